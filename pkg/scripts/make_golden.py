#!/usr/bin/env python3
"""Regenerate the golden vector pairs under tests/golden/.

Each pair is an input PGM plus the byte-exact container the codec must
produce for it. Any intentional format change requires rerunning this
script and documenting the break in docs/FORMAT.md.
"""

from pathlib import Path

import numpy as np

from mwpcodec import codec, imgio

GOLDEN_DIR = Path(__file__).resolve().parent.parent / "tests" / "golden"


def synthetic_16bit() -> imgio.GrayImage:
    r = np.arange(24, dtype=np.int64)[:, None]
    c = np.arange(40, dtype=np.int64)[None, :]
    return imgio.GrayImage(((r * 257 + c * 123 + (r * c) % 31) % 65536
                            ).astype(np.int32), bit_depth=16)


def cases():
    yield "blob32", imgio.make_phantom("gaussian_blob", 32, 32, 0), codec.CodecConfig()
    yield "ramp37x29", imgio.make_phantom("ramp", 37, 29, 0), codec.CodecConfig()
    yield "grid16bit", synthetic_16bit(), codec.CodecConfig(levels=2)
    yield "noise64", imgio.make_phantom("smooth_noise", 64, 64, 11), \
        codec.CodecConfig(mode="exhaustive")


def main():
    GOLDEN_DIR.mkdir(parents=True, exist_ok=True)
    for name, img, cfg in cases():
        container = codec.compress(img, cfg)
        assert codec.decompress(container) == img
        (GOLDEN_DIR / f"{name}.pgm").write_bytes(imgio.write_pgm(img))
        (GOLDEN_DIR / f"{name}.mwp").write_bytes(container)
        print(f"{name}: {img.width}x{img.height}/{img.bit_depth} -> "
              f"{len(container)} bytes")


if __name__ == "__main__":
    main()
