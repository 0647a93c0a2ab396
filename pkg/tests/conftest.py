import numpy as np
import pytest

from mwpcodec import imgio

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

PHANTOM_SPECS = [
    ("constant", 128, 128, 0),
    ("ramp", 128, 128, 0),
    ("gaussian_blob", 128, 128, 0),
    ("smooth_noise", 128, 128, 42),
    ("smooth_noise", 96, 64, 7),
    ("gaussian_blob", 37, 61, 0),
]


def random_image(rng: np.random.Generator, width=None, height=None,
                 bit_depth=8) -> imgio.GrayImage:
    width = width or int(rng.integers(8, 65))
    height = height or int(rng.integers(8, 65))
    samples = rng.integers(0, 1 << bit_depth, size=(height, width))
    return imgio.GrayImage(samples.astype(np.int32), bit_depth=bit_depth)


@pytest.fixture(scope="session")
def phantom_corpus():
    return [imgio.make_phantom(kind, w, h, seed)
            for kind, w, h, seed in PHANTOM_SPECS]
