"""Residual-to-symbol mapping and the adaptive arithmetic coding layer.

Signed residuals map through a zigzag bijection (0, -1, 1, -2, 2, ... ->
0, 1, 2, 3, 4, ...) onto 512 direct symbols; anything larger emits an
escape symbol (512 for positive, 513 for negative) followed by the raw
32-bit magnitude on the coder's bypass path. Each band's stream is coded
with a fresh adaptive model; one range coder spans the whole payload.

The actual symbol loops live in the backend kernels (compiled extension
or pure-Python twin); this module owns the data model and the reference
AdaptiveModel used by white-box tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ._backend import get_kernels

ESC_POS = 512
ESC_NEG = 513
ALPHABET_SIZE = 514
DIRECT_SYMBOLS = 512

INCREMENT = 32
TOTAL_CAP = 1 << 16


@dataclass(eq=False)
class SymbolStream:
    """Symbols in [0, 513] plus the raw magnitudes of any escapes, in order."""

    symbols: np.ndarray
    escapes: np.ndarray

    def __post_init__(self):
        self.symbols = np.asarray(self.symbols, dtype=np.int32)
        self.escapes = np.asarray(self.escapes, dtype=np.int64)
        n_esc = int(np.count_nonzero(self.symbols >= DIRECT_SYMBOLS))
        if n_esc != self.escapes.size:
            raise ValueError(f"{n_esc} escape symbols but {self.escapes.size} payloads")

    def __len__(self) -> int:
        return int(self.symbols.size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SymbolStream):
            return NotImplemented
        return (np.array_equal(self.symbols, other.symbols)
                and np.array_equal(self.escapes, other.escapes))


def map_residual(r: int) -> tuple[int, Optional[int]]:
    """Zigzag a signed residual; |r| must fit in 31 bits."""
    if abs(r) >= 1 << 31:
        raise ValueError(f"residual {r} out of coder range")
    z = 2 * r if r >= 0 else -2 * r - 1
    if z < DIRECT_SYMBOLS:
        return z, None
    return (ESC_POS if r > 0 else ESC_NEG), abs(r)


def unmap_residual(symbol: int, payload: Optional[int] = None) -> int:
    if symbol < DIRECT_SYMBOLS:
        return symbol // 2 if symbol % 2 == 0 else -((symbol + 1) // 2)
    if payload is None:
        raise ValueError("escape symbol without payload")
    return payload if symbol == ESC_POS else -payload


def residuals_to_stream(residuals) -> SymbolStream:
    """Vectorized map_residual over a residual grid (raster order)."""
    r = np.asarray(residuals, dtype=np.int64).ravel()
    if r.size and int(np.abs(r).max()) >= 1 << 31:
        raise ValueError("residual out of coder range")
    z = np.where(r >= 0, 2 * r, -2 * r - 1)
    direct = z < DIRECT_SYMBOLS
    symbols = np.where(direct, z, np.where(r > 0, ESC_POS, ESC_NEG)).astype(np.int32)
    escapes = np.abs(r[~direct])
    return SymbolStream(symbols, escapes)


def stream_to_residuals(stream: SymbolStream) -> np.ndarray:
    """Exact inverse of residuals_to_stream (flat int64 array)."""
    z = stream.symbols.astype(np.int64)
    r = np.where(z % 2 == 0, z // 2, -((z + 1) // 2))
    esc = z >= DIRECT_SYMBOLS
    if np.any(esc):
        signs = np.where(z[esc] == ESC_POS, 1, -1)
        r[esc] = signs * stream.escapes
    return r


def ac_encode(streams: Sequence[SymbolStream]) -> bytes:
    """Adaptive arithmetic coding of ordered per-band streams."""
    kernels = get_kernels()
    return kernels.encode_streams([(s.symbols, s.escapes) for s in streams])


def ac_decode(data: bytes, counts: Sequence[int]) -> list[SymbolStream]:
    """Exact inverse of ac_encode given per-band symbol counts.

    Raises CorruptionError (band and symbol index in the message) when the
    payload is truncated or the coder state goes invalid.
    """
    kernels = get_kernels()
    return [SymbolStream(symbols, escapes)
            for symbols, escapes in kernels.decode_streams(bytes(data), list(counts))]


class AdaptiveModel:
    """Reference frequency model: the contract both backends implement.

    All 514 counts start at 1; a coded symbol's count grows by the
    current increment; when the total would pass 2**16 every count is
    halved (floor, minimum 1) and the increment itself halves (floor 1).
    The decaying increment adapts fast on short streams while converging
    to a long-memory estimate on stationary ones; a constant increment
    cannot do both. Encoder and decoder evolve this identically symbol
    by symbol.
    """

    def __init__(self):
        self.freq = [1] * ALPHABET_SIZE
        self.total = ALPHABET_SIZE
        self.increment = INCREMENT

    def cum(self, symbol: int) -> int:
        return sum(self.freq[:symbol])

    def interval(self, symbol: int) -> tuple[int, int, int]:
        """(cum_before, freq, total) of a symbol under the current state."""
        return self.cum(symbol), self.freq[symbol], self.total

    def update(self, symbol: int):
        self.freq[symbol] += self.increment
        self.total += self.increment
        if self.total > TOTAL_CAP:
            self.freq = [max(1, f >> 1) for f in self.freq]
            self.total = sum(self.freq)
            self.increment = max(1, self.increment >> 1)
