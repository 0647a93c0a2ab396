"""Full pipeline in both directions and the on-disk container format.

Compression: forward 5/3 lifting transform, per-detail-band predictor
selection and residual computation (coarse to fine), DPCM on the LL
band, symbol mapping, then one adaptive arithmetic coding pass over all
band streams (LL first, details in coding order).

Container layout (all multi-byte integers little-endian):

    offset  size  field
    0       4     magic "MWP1"
    4       1     version (1)
    5       1     flags (bit0: wavelet id, 0 = 5/3 lifting; others reserved 0)
    6       1     bit depth (8 or 16)
    7       1     decomposition levels (1..8)
    8       4     width
    12      4     height
    16      ...   3*levels model records (coding order, detail bands only):
                  u16 role mask + one i32 Q15.16 coefficient per set bit
    ...     4     payload byte length N
    ...     N     arithmetic-coded payload
    ...     4     CRC32 (IEEE) of every preceding byte

The container fully determines the decoded image; see docs/FORMAT.md.
"""

from __future__ import annotations

import struct
import time
import zlib
from dataclasses import dataclass, field

import numpy as np

from . import entropy, lifting, prediction
from .errors import CorruptionError, FormatError
from .imgio import GrayImage
from .lifting import Subband, SubbandPyramid, band_layout

MAGIC = b"MWP1"
VERSION = 1
_HEADER = struct.Struct("<4sBBBBII")

# a payload byte can encode at most ~706 symbols (max symbol probability
# 65023/65536); 1024 gives slack and bounds allocations for forged headers
_MAX_SYMBOLS_PER_BYTE = 1024


@dataclass(frozen=True)
class CodecConfig:
    levels: int = 3
    mode: str = "greedy"          # predictor selection: greedy | exhaustive
    predict: bool = True          # False -> zero models everywhere (A/B runs)

    def __post_init__(self):
        if not 1 <= self.levels <= lifting.MAX_LEVELS:
            raise ValueError(f"levels must be in [1, {lifting.MAX_LEVELS}]")
        if self.mode not in ("greedy", "exhaustive"):
            raise ValueError(f"unknown selection mode {self.mode!r}")


@dataclass
class BandReport:
    band_id: str
    mask: int
    residual_entropy_bits: float


@dataclass
class Report:
    width: int
    height: int
    bit_depth: int
    container_bytes: int
    bpp: float
    encode_ms: float
    decode_ms: float
    per_band: list[BandReport] = field(default_factory=list)

    def to_csv(self) -> str:
        lines = ["width,height,bit_depth,container_bytes,bpp,enc_ms,dec_ms",
                 f"{self.width},{self.height},{self.bit_depth},"
                 f"{self.container_bytes},{self.bpp:.6f},"
                 f"{self.encode_ms:.3f},{self.decode_ms:.3f}",
                 "band_id,mask,residual_entropy_bits"]
        lines.extend(f"{b.band_id},{b.mask:#06x},{b.residual_entropy_bits:.6f}"
                     for b in self.per_band)
        return "\n".join(lines) + "\n"

    def format_table(self) -> str:
        head = (f"{self.width}x{self.height}/{self.bit_depth}bit  "
                f"{self.container_bytes} bytes  {self.bpp:.4f} bpp  "
                f"enc {self.encode_ms:.1f} ms  dec {self.decode_ms:.1f} ms")
        rows = [f"  {b.band_id:4s} mask={b.mask:#06x} "
                f"H0={b.residual_entropy_bits:6.3f} bits"
                for b in self.per_band]
        return "\n".join([head] + rows)


def compress(img: GrayImage, cfg: CodecConfig = CodecConfig()) -> bytes:
    """Encode an image into a self-describing container (lossless)."""
    container, _ = _compress_with_models(img, cfg)
    return container


def _compress_with_models(img: GrayImage, cfg: CodecConfig):
    pyr = lifting.forward(img, cfg.levels)
    models = []
    streams = []
    for band in pyr.detail_bands:
        model, plane = prediction.encode_band(pyr, band, cfg.mode, cfg.predict)
        models.append(model)
        streams.append(entropy.residuals_to_stream(plane.residuals))
    ll_plane = prediction.dpcm_encode(pyr.ll)
    ll_stream = entropy.residuals_to_stream(ll_plane.residuals)
    payload = entropy.ac_encode([ll_stream] + streams)

    parts = [_HEADER.pack(MAGIC, VERSION, 0, img.bit_depth, cfg.levels,
                          img.width, img.height)]
    parts.extend(prediction.pack_model(m) for m in models)
    parts.append(struct.pack("<I", len(payload)))
    parts.append(payload)
    body = b"".join(parts)
    crc = zlib.crc32(body) & 0xFFFFFFFF
    return body + struct.pack("<I", crc), models


def decompress(data: bytes) -> GrayImage:
    """Exact inverse of compress; rejects malformed or corrupt containers."""
    data = bytes(data)
    if len(data) < _HEADER.size + 8:
        raise FormatError(f"container too short ({len(data)} bytes)")
    magic, version, flags, bit_depth, levels, width, height = \
        _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"unsupported version {version}")
    if flags != 0:
        raise FormatError(f"unsupported flags {flags:#04x} (only 5/3 wavelet defined)")
    if bit_depth not in (8, 16):
        raise CorruptionError(f"invalid bit depth {bit_depth}")
    if not 1 <= levels <= lifting.MAX_LEVELS:
        raise CorruptionError(f"invalid level count {levels}")
    if width < 1 or height < 1 or min(width, height) < (1 << levels):
        raise CorruptionError(f"geometry {width}x{height} impossible for {levels} levels")

    layout = band_layout(width, height, levels)
    offset = _HEADER.size
    models = []
    for level, orient, _, _ in layout[1:]:
        model, offset = prediction.unpack_model(data, offset, level, orient)
        models.append(model)
    if offset + 4 > len(data):
        raise CorruptionError("truncated before payload length")
    (payload_len,) = struct.unpack_from("<I", data, offset)
    offset += 4
    if offset + payload_len + 4 != len(data):
        raise CorruptionError(
            f"container length mismatch: payload {payload_len} bytes leaves "
            f"{len(data) - offset - payload_len} trailing")
    # integrity gate before any payload work
    (stored_crc,) = struct.unpack_from("<I", data, len(data) - 4)
    actual_crc = zlib.crc32(data[:-4]) & 0xFFFFFFFF
    if stored_crc != actual_crc:
        raise FormatError(f"CRC mismatch: stored {stored_crc:#010x}, "
                          f"computed {actual_crc:#010x}")

    counts = [rows * cols for _, _, rows, cols in layout]
    if sum(counts) > (payload_len + 16) * _MAX_SYMBOLS_PER_BYTE:
        raise CorruptionError("payload too small for declared geometry")
    payload = data[offset:offset + payload_len]
    streams = entropy.ac_decode(payload, counts)

    _, _, ll_rows, ll_cols = layout[0]
    ll_res = entropy.stream_to_residuals(streams[0]).reshape(ll_rows, ll_cols)
    ll = prediction.dpcm_decode(
        prediction.ResidualPlane(1, "LL", ll_res), (ll_rows, ll_cols))
    pyr = SubbandPyramid(levels=levels, original_width=width,
                         original_height=height, bit_depth=bit_depth,
                         bands=[ll])
    for (level, orient, rows, cols), model, stream in zip(layout[1:], models,
                                                          streams[1:]):
        res = entropy.stream_to_residuals(stream).reshape(rows, cols)
        plane = prediction.ResidualPlane(level, orient, res)
        pyr.bands.append(prediction.decode_band(pyr, model, plane))
    try:
        return lifting.inverse(pyr)
    except ValueError as exc:  # out-of-range samples from a forged payload
        raise CorruptionError(f"reconstruction out of range: {exc}") from None


def measure(img: GrayImage, cfg: CodecConfig = CodecConfig()) -> Report:
    """Compress + decompress once, reporting size, bpp and wall-clock times."""
    t0 = time.perf_counter()
    container, models = _compress_with_models(img, cfg)
    t1 = time.perf_counter()
    decoded = decompress(container)
    t2 = time.perf_counter()
    if decoded != img:
        raise AssertionError("lossless contract violated")  # pragma: no cover
    pyr = lifting.forward(img, cfg.levels)
    per_band = [BandReport("LL", 0, prediction.residual_entropy_bits(
        prediction.dpcm_encode(pyr.ll).residuals))]
    for band, model in zip(pyr.detail_bands, models):
        ctx = prediction.extract_context(pyr, band)
        residuals = ctx.dependent - prediction.predict_many(model, ctx.columns)
        per_band.append(BandReport(band.band_id, model.mask,
                                   prediction.residual_entropy_bits(residuals)))
    return Report(width=img.width, height=img.height, bit_depth=img.bit_depth,
                  container_bytes=len(container),
                  bpp=8.0 * len(container) / (img.width * img.height),
                  encode_ms=(t1 - t0) * 1e3, decode_ms=(t2 - t1) * 1e3,
                  per_band=per_band)
