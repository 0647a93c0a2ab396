"""Decoder totality: no input byte sequence may crash, hang or corrupt
memory; every outcome is a clean codec error or a valid image.

The default budget keeps the suite fast; set MWP_FUZZ_SECONDS for longer
campaigns (the acceptance documentation describes the 1-hour run).
"""

import os
import time
from pathlib import Path

import numpy as np

from mwpcodec import codec
from mwpcodec.errors import CodecError
from mwpcodec.imgio import GrayImage

GOLDEN_DIR = Path(__file__).parent / "golden"


def try_decode(blob: bytes):
    try:
        img = codec.decompress(blob)
        assert isinstance(img, GrayImage)   # valid image is an accepted outcome
    except CodecError:
        pass


def golden_containers():
    return [p.read_bytes() for p in sorted(GOLDEN_DIR.glob("*.mwp"))]


def test_fuzz_mutated_golden_containers():
    budget = float(os.environ.get("MWP_FUZZ_SECONDS", "8"))
    deadline = time.monotonic() + budget
    rng = np.random.default_rng(0xF0CC)
    goldens = golden_containers()
    mutations = 0
    while time.monotonic() < deadline:
        base = bytearray(goldens[int(rng.integers(len(goldens)))])
        op = int(rng.integers(4))
        if op == 0 and len(base) > 1:       # flip random bytes
            for _ in range(int(rng.integers(1, 8))):
                base[int(rng.integers(len(base)))] ^= int(rng.integers(1, 256))
        elif op == 1:                        # truncate
            base = base[:int(rng.integers(len(base)))]
        elif op == 2:                        # extend with noise
            base.extend(rng.bytes(int(rng.integers(1, 64))))
        else:                                # splice two goldens
            other = goldens[int(rng.integers(len(goldens)))]
            cut = int(rng.integers(min(len(base), len(other))))
            base = base[:cut] + other[cut:]
        try_decode(bytes(base))
        mutations += 1
    assert mutations > 100


def test_fuzz_random_blobs():
    rng = np.random.default_rng(0xB10B)
    for _ in range(300):
        try_decode(rng.bytes(int(rng.integers(0, 256))))
    # random blobs wearing a valid magic/version prefix
    for _ in range(300):
        blob = b"MWP1\x01" + rng.bytes(int(rng.integers(0, 128)))
        try_decode(blob)


def test_fuzz_structured_headers():
    """Plausible headers with adversarial geometry/model fields."""
    import struct
    import zlib
    rng = np.random.default_rng(0x5EED)
    for _ in range(300):
        header = struct.pack(
            "<4sBBBBII", b"MWP1", 1, 0,
            int(rng.choice([8, 16, 0, 255])),
            int(rng.choice([1, 3, 8, 0, 200])),
            int(rng.choice([0, 1, 8, 128, 1 << 16, 1 << 31])),
            int(rng.choice([0, 1, 8, 128, 1 << 16])))
        body = header + rng.bytes(int(rng.integers(0, 64)))
        blob = body + struct.pack("<I", zlib.crc32(body) & 0xFFFFFFFF)
        try_decode(blob)


def test_every_single_byte_flip_of_smallest_golden():
    blob = bytearray(min(golden_containers(), key=len))
    for pos in range(len(blob)):
        for delta in (0x01, 0xFF):
            blob[pos] ^= delta
            try_decode(bytes(blob))
            blob[pos] ^= delta
