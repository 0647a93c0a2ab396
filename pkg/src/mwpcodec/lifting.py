"""Integer 5/3 lifting wavelet transform with exact inverse.

One decomposition level splits the running lowpass image into LL, HL, LH
and HH quadrants (rows first, then columns) and recurses on LL. All
arithmetic is integer-only, so forward/inverse round trips are exact and
bit-identical across platforms.

Lifting steps on a 1-D signal x (whole-sample symmetric extension):

    d[i] = x[2i+1] - floor((x[2i] + x[2i+2]) / 2)
    s[i] = x[2i]   + floor((d[i-1] + d[i] + 2) / 4)

With mirror extension the boundary rules collapse to replicating the end
values of the even/detail sequences, which is what the code below does.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import FormatError
from .imgio import GrayImage

ORIENTATIONS = ("LL", "HL", "LH", "HH")
DETAIL_ORIENTATIONS = ("HL", "LH", "HH")

MAX_LEVELS = 8


@dataclass(eq=False)
class Subband:
    level: int               # 1 = coarsest detail scale
    orientation: str         # "LL", "HL", "LH" or "HH"
    coeffs: np.ndarray       # signed int32, shape (rows, cols)

    def __post_init__(self):
        if self.orientation not in ORIENTATIONS:
            raise ValueError(f"bad orientation {self.orientation!r}")
        self.coeffs = np.asarray(self.coeffs, dtype=np.int32)
        if self.coeffs.ndim != 2 or min(self.coeffs.shape) < 1:
            raise ValueError("subband must be a non-empty 2-D grid")

    @property
    def rows(self) -> int:
        return self.coeffs.shape[0]

    @property
    def cols(self) -> int:
        return self.coeffs.shape[1]

    @property
    def band_id(self) -> str:
        return "LL" if self.orientation == "LL" else f"{self.orientation}{self.level}"


@dataclass(eq=False)
class SubbandPyramid:
    """Bands in coding order: LL first, then HL/LH/HH per level coarse to fine."""

    levels: int
    original_width: int
    original_height: int
    bit_depth: int
    bands: list[Subband] = field(default_factory=list)

    def band(self, level: int, orientation: str) -> Subband:
        for b in self.bands:
            if b.orientation == orientation and (orientation == "LL" or b.level == level):
                return b
        raise KeyError((level, orientation))

    @property
    def ll(self) -> Subband:
        return self.bands[0]

    @property
    def detail_bands(self) -> list[Subband]:
        return self.bands[1:]


def band_layout(width: int, height: int, levels: int) -> list[tuple[int, str, int, int]]:
    """Coding-order (level, orientation, rows, cols) for given geometry.

    Lowpass halves take the ceiling on odd sizes, so dimensions match the
    recursive split exactly.
    """
    details = []
    h, w = height, width
    for step in range(levels):
        level = levels - step
        ch, fh = (h + 1) // 2, h // 2
        cw, fw = (w + 1) // 2, w // 2
        details.append([(level, "HL", ch, fw), (level, "LH", fh, cw), (level, "HH", fh, fw)])
        h, w = ch, cw
    layout = [(1, "LL", h, w)]
    for group in reversed(details):
        layout.extend(group)
    return layout


def _fwd_pass(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """One 5/3 analysis pass along the last axis; len >= 2."""
    even = a[..., 0::2]
    odd = a[..., 1::2]
    no = odd.shape[-1]
    right = np.concatenate([even[..., 1:], even[..., -1:]], axis=-1)[..., :no]
    d = odd - ((even[..., :no] + right) >> 1)
    ne = even.shape[-1]
    d_left = np.concatenate([d[..., :1], d], axis=-1)[..., :ne]
    d_right = np.concatenate([d, d[..., -1:]], axis=-1)[..., :ne]
    s = even + ((d_left + d_right + 2) >> 2)
    return s, d


def _inv_pass(s: np.ndarray, d: np.ndarray) -> np.ndarray:
    """Exact inverse of _fwd_pass; merges lowpass/detail back to a signal."""
    ne = s.shape[-1]
    no = d.shape[-1]
    d_left = np.concatenate([d[..., :1], d], axis=-1)[..., :ne]
    d_right = np.concatenate([d, d[..., -1:]], axis=-1)[..., :ne]
    even = s - ((d_left + d_right + 2) >> 2)
    right = np.concatenate([even[..., 1:], even[..., -1:]], axis=-1)[..., :no]
    odd = d + ((even[..., :no] + right) >> 1)
    out = np.empty(s.shape[:-1] + (ne + no,), dtype=s.dtype)
    out[..., 0::2] = even
    out[..., 1::2] = odd
    return out


def _split_level(a: np.ndarray):
    """Rows then columns; returns (ll, hl, lh, hh)."""
    lo, hi = _fwd_pass(a)                       # horizontal
    ll, lh = _fwd_pass(lo.swapaxes(0, 1))       # vertical on lowpass
    hl, hh = _fwd_pass(hi.swapaxes(0, 1))       # vertical on highpass
    return (ll.swapaxes(0, 1), hl.swapaxes(0, 1),
            lh.swapaxes(0, 1), hh.swapaxes(0, 1))


def _merge_level(ll, hl, lh, hh) -> np.ndarray:
    lo = _inv_pass(ll.swapaxes(0, 1), lh.swapaxes(0, 1)).swapaxes(0, 1)
    hi = _inv_pass(hl.swapaxes(0, 1), hh.swapaxes(0, 1)).swapaxes(0, 1)
    return _inv_pass(lo, hi)


def forward(img: GrayImage, levels: int) -> SubbandPyramid:
    """Decompose an image into 3*levels + 1 subbands."""
    if not 1 <= levels <= MAX_LEVELS:
        raise ValueError(f"levels must be in [1, {MAX_LEVELS}], got {levels}")
    if min(img.width, img.height) < (1 << levels):
        raise ValueError(
            f"image {img.width}x{img.height} too small for {levels} levels "
            f"(min side must be >= {1 << levels})")
    a = img.samples.astype(np.int64)
    groups = []
    for step in range(levels):
        level = levels - step
        a, hl, lh, hh = _split_level(a)
        groups.append([Subband(level, "HL", hl), Subband(level, "LH", lh),
                       Subband(level, "HH", hh)])
    bands = [Subband(1, "LL", a)]
    for group in reversed(groups):
        bands.extend(group)
    return SubbandPyramid(levels=levels, original_width=img.width,
                          original_height=img.height, bit_depth=img.bit_depth,
                          bands=bands)


def inverse(pyr: SubbandPyramid) -> GrayImage:
    """Exact integer reconstruction of forward()."""
    expected = band_layout(pyr.original_width, pyr.original_height, pyr.levels)
    if len(pyr.bands) != len(expected):
        raise FormatError(f"pyramid has {len(pyr.bands)} bands, expected {len(expected)}")
    for band, (level, orient, rows, cols) in zip(pyr.bands, expected):
        if band.orientation != orient or (orient != "LL" and band.level != level):
            raise FormatError(f"band order mismatch at {band.band_id}")
        if band.coeffs.shape != (rows, cols):
            raise FormatError(
                f"band {band.band_id} is {band.coeffs.shape}, expected {(rows, cols)}")
    a = pyr.ll.coeffs.astype(np.int64)
    for level in range(1, pyr.levels + 1):
        hl = pyr.band(level, "HL").coeffs.astype(np.int64)
        lh = pyr.band(level, "LH").coeffs.astype(np.int64)
        hh = pyr.band(level, "HH").coeffs.astype(np.int64)
        a = _merge_level(a, hl, lh, hh)
    return GrayImage(a.astype(np.int32), bit_depth=pyr.bit_depth)
