import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mwpcodec import imgio, lifting
from mwpcodec.errors import FormatError

from conftest import random_image


def test_constant_image_annihilation():
    img = imgio.make_phantom("constant", 32, 32, 0)
    pyr = lifting.forward(img, 1)
    for band in pyr.detail_bands:
        assert (band.coeffs == 0).all(), band.band_id
    assert (pyr.ll.coeffs == 128).all()


def test_three_levels_gives_ten_bands_and_16x16_ll():
    img = imgio.make_phantom("smooth_noise", 128, 128, 0)
    pyr = lifting.forward(img, 3)
    assert len(pyr.bands) == 10
    assert pyr.ll.coeffs.shape == (16, 16)
    assert pyr.band(3, "HH").coeffs.shape == (64, 64)


def test_one_dimensional_ramp_pass():
    # hand evaluation of the two lifting steps on [0, 1, 2, 3, 4, 5]:
    #   d[0] = 1 - (0+2)//2 = 0, d[1] = 3 - (2+4)//2 = 0,
    #   d[2] = 5 - (4 + mirror 4)//2 = 1
    #   s = [0 + (0+0+2)//4, 2 + (0+0+2)//4, 4 + (0+1+2)//4] = [0, 2, 4]
    a = np.array([[0, 1, 2, 3, 4, 5]], dtype=np.int64)
    s, d = lifting._fwd_pass(a)
    assert s.tolist() == [[0, 2, 4]]
    assert d.tolist() == [[0, 0, 1]]
    assert lifting._inv_pass(s, d).tolist() == a.tolist()


@pytest.mark.parametrize("width,height,levels", [
    (8, 8, 3), (9, 13, 3), (37, 61, 2), (128, 128, 3), (31, 257, 3), (16, 16, 4),
])
def test_perfect_reconstruction_sizes(width, height, levels):
    rng = np.random.default_rng(width * 1000 + height)
    img = random_image(rng, width, height)
    assert lifting.inverse(lifting.forward(img, levels)) == img


def test_perfect_reconstruction_16bit_odd():
    rng = np.random.default_rng(5)
    img = random_image(rng, 37, 61, bit_depth=16)
    assert lifting.inverse(lifting.forward(img, 2)) == img


@settings(max_examples=80, deadline=None)
@given(st.integers(8, 70), st.integers(8, 70), st.integers(1, 3),
       st.sampled_from([8, 16]), st.integers(0, 2**32 - 1))
def test_perfect_reconstruction_property(width, height, levels, depth, seed):
    rng = np.random.default_rng(seed)
    img = random_image(rng, width, height, bit_depth=depth)
    assert lifting.inverse(lifting.forward(img, levels)) == img


def test_all_zero_pyramid_inverts_to_zero():
    img = imgio.GrayImage(np.zeros((16, 16), dtype=np.int32), 8)
    pyr = lifting.forward(img, 2)
    out = lifting.inverse(pyr)
    assert (out.samples == 0).all()


def test_band_layout_matches_forward():
    for w, h, levels in [(128, 128, 3), (9, 13, 3), (37, 61, 2)]:
        rng = np.random.default_rng(w)
        pyr = lifting.forward(random_image(rng, w, h), levels)
        layout = lifting.band_layout(w, h, levels)
        assert len(layout) == len(pyr.bands)
        for band, (level, orient, rows, cols) in zip(pyr.bands, layout):
            assert band.orientation == orient
            assert band.coeffs.shape == (rows, cols)
            if orient != "LL":
                assert band.level == level


def test_forward_argument_errors():
    img = imgio.make_phantom("constant", 8, 8, 0)
    with pytest.raises(ValueError):
        lifting.forward(img, 0)
    with pytest.raises(ValueError):
        lifting.forward(img, 9)
    with pytest.raises(ValueError):
        lifting.forward(img, 4)  # 8 < 2**4


def test_inverse_rejects_inconsistent_dims():
    img = imgio.make_phantom("constant", 16, 16, 0)
    pyr = lifting.forward(img, 2)
    pyr.bands[3] = lifting.Subband(pyr.bands[3].level, pyr.bands[3].orientation,
                                   np.zeros((3, 3), dtype=np.int32))
    with pytest.raises(FormatError):
        lifting.inverse(pyr)


def test_determinism():
    img = imgio.make_phantom("smooth_noise", 64, 64, 9)
    a = lifting.forward(img, 3)
    b = lifting.forward(img, 3)
    for ba, bb in zip(a.bands, b.bands):
        assert np.array_equal(ba.coeffs, bb.coeffs)
