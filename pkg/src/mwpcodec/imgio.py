"""Grayscale image container, binary PGM (P5) reader/writer and synthetic
test phantoms.

Only maxval 255 and 65535 are supported; 16-bit samples are big-endian on
the wire per the Netpbm convention. The writer never emits comments, so
write/read round trips are byte-stable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FormatError

PHANTOM_KINDS = ("constant", "ramp", "gaussian_blob", "smooth_noise")

_WHITESPACE = b" \t\n\r\x0b\x0c"


@dataclass(frozen=True, eq=False)
class GrayImage:
    """2-D grid of integer samples plus bit-depth metadata.

    ``samples`` is an int32 array of shape (height, width); every sample
    must lie in [0, 2**bit_depth - 1].
    """

    samples: np.ndarray
    bit_depth: int = 8

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=np.int32)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("samples must be a non-empty 2-D grid")
        if self.bit_depth not in (8, 16):
            raise ValueError(f"bit_depth must be 8 or 16, got {self.bit_depth}")
        if arr.min() < 0 or arr.max() > (1 << self.bit_depth) - 1:
            raise ValueError("sample out of range for declared bit depth")
        object.__setattr__(self, "samples", arr)

    @property
    def width(self) -> int:
        return self.samples.shape[1]

    @property
    def height(self) -> int:
        return self.samples.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, GrayImage):
            return NotImplemented
        return (self.bit_depth == other.bit_depth
                and self.samples.shape == other.samples.shape
                and bool(np.array_equal(self.samples, other.samples)))


def _next_token(data: bytes, pos: int) -> tuple[bytes, int]:
    """Return (token, pos-after-token), skipping whitespace and '#' comments."""
    n = len(data)
    while pos < n:
        b = data[pos:pos + 1]
        if b in (b"#",):
            while pos < n and data[pos:pos + 1] != b"\n":
                pos += 1
        elif b in _WHITESPACE:
            pos += 1
        else:
            break
    if pos >= n:
        raise FormatError(f"unexpected end of header at byte {pos}")
    start = pos
    while pos < n and data[pos:pos + 1] not in _WHITESPACE:
        pos += 1
    return data[start:pos], pos


def read_pgm(data: bytes) -> GrayImage:
    """Parse a binary PGM (P5) byte stream."""
    data = bytes(data)
    if data[:2] != b"P5":
        raise FormatError("not a binary PGM (expected magic 'P5' at byte 0)")
    pos = 2
    fields = []
    for name in ("width", "height", "maxval"):
        tok, pos = _next_token(data, pos)
        try:
            value = int(tok)
        except ValueError:
            raise FormatError(f"non-numeric {name} field at byte {pos - len(tok)}") from None
        fields.append(value)
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise FormatError(f"invalid dimensions {width}x{height} in header ending at byte {pos}")
    if maxval not in (255, 65535):
        raise FormatError(f"unsupported maxval {maxval} at byte {pos}; expected 255 or 65535")
    # exactly one whitespace byte separates the header from the payload
    if pos >= len(data) or data[pos:pos + 1] not in _WHITESPACE:
        raise FormatError(f"missing whitespace after maxval at byte {pos}")
    pos += 1
    depth = 8 if maxval == 255 else 16
    count = width * height
    nbytes = count * (depth // 8)
    payload = data[pos:pos + nbytes]
    if len(payload) < nbytes:
        raise FormatError(
            f"truncated payload at byte {pos + len(payload)}: "
            f"expected {nbytes} sample bytes, got {len(payload)}")
    dtype = ">u2" if depth == 16 else np.uint8
    samples = np.frombuffer(payload, dtype=dtype).astype(np.int32).reshape(height, width)
    return GrayImage(samples, bit_depth=depth)


def write_pgm(img: GrayImage) -> bytes:
    """Serialize to binary PGM; read_pgm(write_pgm(img)) == img bit-exactly."""
    maxval = (1 << img.bit_depth) - 1
    header = f"P5\n{img.width} {img.height}\n{maxval}\n".encode("ascii")
    if img.bit_depth == 8:
        payload = img.samples.astype(np.uint8).tobytes()
    else:
        payload = img.samples.astype(">u2").tobytes()
    return header + payload


def read_raw(data: bytes, width: int, height: int, bit_depth: int) -> GrayImage:
    """Headerless raw samples with externally supplied geometry.

    Layout matches the PGM payload: row-major, big-endian for 16 bit.
    """
    nbytes = width * height * (bit_depth // 8)
    if len(data) != nbytes:
        raise FormatError(f"raw payload is {len(data)} bytes, expected {nbytes}")
    dtype = ">u2" if bit_depth == 16 else np.uint8
    samples = np.frombuffer(data, dtype=dtype).astype(np.int32).reshape(height, width)
    return GrayImage(samples, bit_depth=bit_depth)


def write_raw(img: GrayImage) -> bytes:
    if img.bit_depth == 8:
        return img.samples.astype(np.uint8).tobytes()
    return img.samples.astype(">u2").tobytes()


def make_phantom(kind: str, width: int, height: int, seed: int = 0) -> GrayImage:
    """Deterministic 8-bit synthetic test image.

    constant      all samples 128
    ramp          sample(r, c) = (r + c) mod 256
    gaussian_blob centered bell-shaped radial falloff (integer-exact)
    smooth_noise  seeded noise smoothed by a 5x5 box filter
    """
    if kind not in PHANTOM_KINDS:
        raise ValueError(f"unknown phantom kind {kind!r}")
    if width < 8 or height < 8:
        raise ValueError("phantom dimensions must be at least 8x8")

    if kind == "constant":
        samples = np.full((height, width), 128, dtype=np.int32)
    elif kind == "ramp":
        r = np.arange(height, dtype=np.int64)[:, None]
        c = np.arange(width, dtype=np.int64)[None, :]
        samples = ((r + c) % 256).astype(np.int32)
    elif kind == "gaussian_blob":
        # Rational bell 1/(1 + t)^2 in fixed point instead of a true
        # exponential: keeps the output identical on every platform.
        r = np.arange(height, dtype=np.int64)[:, None]
        c = np.arange(width, dtype=np.int64)[None, :]
        dy = 2 * r - (height - 1)
        dx = 2 * c - (width - 1)
        d2 = dy * dy + dx * dx
        scale = 2 * min(width, height) ** 2 // 9 + 1
        t = (d2 * 1024) // scale
        den = 1024 + t
        g = (1024 * 1024 * 1024) // (den * den)   # in [0, 1024]
        samples = (40 + (180 * g + 512) // 1024).astype(np.int32)
    else:  # smooth_noise
        rng = np.random.Generator(np.random.PCG64(seed))
        noise = rng.integers(0, 256, size=(height, width), dtype=np.int64)
        padded = np.pad(noise, 2, mode="edge")
        acc = np.zeros((height, width), dtype=np.int64)
        for dr in range(5):
            for dc in range(5):
                acc += padded[dr:dr + height, dc:dc + width]
        samples = np.clip(acc // 25, 0, 255).astype(np.int32)
    return GrayImage(samples, bit_depth=8)
