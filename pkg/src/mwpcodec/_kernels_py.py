"""Pure-Python backend for the hot coding loops.

Mirrors the compiled ``mwpcodec._kernels`` extension exactly: for every
stream an encoder can produce, both backends emit identical bytes and
decode identical values. The coder is a 32-bit carry-propagating range
coder (byte-wise renormalization, pending-0xFF carry resolution) driving
a per-band adaptive frequency model; escape payloads ride through a raw
32-bit bypass path. See docs/FORMAT.md for the normative bit layout.
"""

from __future__ import annotations

import numpy as np

from .errors import CorruptionError

BACKEND_ID = "python"

ALPHABET = 514
INCREMENT = 32
TOTAL_CAP = 1 << 16

_TOP = 1 << 24
_MASK32 = 0xFFFFFFFF
_INT32_MIN = -(1 << 31)
_INT32_MAX = (1 << 31) - 1
_WRAP64 = 1 << 64
_SIGN64 = 1 << 63


def _wrap_i64(v: int) -> int:
    """Two's-complement int64 wraparound (matches the compiled backend)."""
    v &= _WRAP64 - 1
    return v - _WRAP64 if v >= _SIGN64 else v


class RangeEncoder:
    """Carry-propagating range encoder with byte renormalization.

    The cumulative scale is laid out descending by symbol index, so
    symbol 0 owns the top interval and absorbs the range//total division
    slack whenever it is coded — symbol 0 is the most frequent residual
    in predictable content, which is where the waste would hurt.
    """

    __slots__ = ("low", "range", "cache", "cache_size", "out")

    def __init__(self):
        self.low = 0
        self.range = _MASK32
        self.cache = 0
        self.cache_size = 1   # leading byte; absorbs a carry if one occurs
        self.out = bytearray()

    def _shift_low(self):
        low = self.low
        if low < 0xFF000000 or low > _MASK32:
            carry = low >> 32
            out = self.out
            out.append((self.cache + carry) & 0xFF)
            pending = (0xFF + carry) & 0xFF
            for _ in range(self.cache_size - 1):
                out.append(pending)
            self.cache = (low >> 24) & 0xFF
            self.cache_size = 0
        self.cache_size += 1
        self.low = (low << 8) & _MASK32

    def encode(self, start: int, freq: int, total: int, is_top: bool = False):
        """Code the interval [start, start+freq) of a descending scale;
        the top interval (is_top) extends to the full range."""
        r = self.range // total
        self.low += start * r
        rng = self.range - start * r if is_top else r * freq
        while rng < _TOP:
            self._shift_low()
            rng <<= 8
        self.range = rng

    def encode_bits32(self, value: int):
        """Bypass path: 32 raw bits, MSB first, no model adaptation."""
        rng = self.range
        low = self.low
        for shift in range(31, -1, -1):
            rng >>= 1
            if (value >> shift) & 1:
                low += rng
            if rng < _TOP:
                self.low = low
                self._shift_low()
                low = self.low
                rng <<= 8
        self.range = rng
        self.low = low

    def finish(self) -> bytes:
        # range >= 2**24 here, so [low, low+range) contains a code point
        # with 24 trailing zero bits; committing to it lets the decoder
        # supply the last 3 bytes as virtual zeros.
        self.low = (self.low + 0xFFFFFF) >> 24 << 24
        self._shift_low()
        self._shift_low()
        # the first byte is provably 0 (low + range <= 2**32 until the
        # first shift), so it carries no information and is dropped
        return bytes(self.out[1:])


class RangeDecoder:
    """Mirror of RangeEncoder; raises CorruptionError on exhausted input."""

    __slots__ = ("data", "pos", "range", "code", "_r")

    def __init__(self, data):
        self.data = bytes(data)
        self.pos = 0
        self.range = _MASK32
        self.code = 0
        self._r = 0
        for _ in range(4):
            self.code = ((self.code << 8) | self._next_byte()) & _MASK32

    def _next_byte(self) -> int:
        pos = self.pos
        if pos >= len(self.data):
            # a complete stream needs exactly 3 bytes beyond the payload
            # (the encoder's zero flush tail); any more means truncation
            if pos >= len(self.data) + 3:
                raise CorruptionError("payload exhausted")
            self.pos = pos + 1
            return 0
        self.pos = pos + 1
        return self.data[pos]

    def decode_target(self, total: int) -> int:
        """Scale position of the pending symbol; the slack above
        (total-1)*r belongs to the top interval."""
        r = self.range // total
        self._r = r
        target = self.code // r
        return total - 1 if target >= total else target

    def consume(self, start: int, freq: int, is_top: bool = False):
        r = self._r
        self.code -= start * r
        rng = self.range - start * r if is_top else r * freq
        while rng < _TOP:
            self.code = ((self.code << 8) | self._next_byte()) & _MASK32
            rng <<= 8
        self.range = rng

    def decode_bits32(self) -> int:
        rng = self.range
        code = self.code
        value = 0
        for _ in range(32):
            rng >>= 1
            if code >= rng:
                code -= rng
                value = (value << 1) | 1
            else:
                value <<= 1
            if rng < _TOP:
                self.code = code
                code = ((code << 8) | self._next_byte()) & _MASK32
                rng <<= 8
        self.range = rng
        self.code = code
        return value


class AdaptiveCoderModel:
    """Frequency model: 514 counts starting at 1, incremented per coded
    symbol, halved (floor, minimum 1) whenever the total would exceed
    2**16; the increment starts at 32 and halves (floor 1) at each
    rescale.

    A Fenwick tree keeps cumulative-frequency queries O(log n); the count
    dynamics are representation-independent, so the compiled backend's
    flat arrays see exactly the same intervals.
    """

    __slots__ = ("freq", "tree", "total", "increment")

    def __init__(self):
        self.freq = [1] * ALPHABET
        self.total = ALPHABET
        self.increment = INCREMENT
        self._build()

    def _build(self):
        n = ALPHABET
        tree = [0] * (n + 1)
        freq = self.freq
        for i in range(1, n + 1):
            tree[i] += freq[i - 1]
            j = i + (i & -i)
            if j <= n:
                tree[j] += tree[i]
        self.tree = tree

    def cum(self, sym: int) -> int:
        acc = 0
        tree = self.tree
        i = sym
        while i > 0:
            acc += tree[i]
            i -= i & -i
        return acc

    def find(self, target: int) -> tuple[int, int]:
        """Return (symbol, cum_before) with cum_before <= target."""
        tree = self.tree
        pos = 0
        rem = target
        bit = 512
        while bit:
            nxt = pos + bit
            if nxt <= ALPHABET and tree[nxt] <= rem:
                rem -= tree[nxt]
                pos = nxt
            bit >>= 1
        return pos, target - rem

    def update(self, sym: int):
        inc = self.increment
        self.freq[sym] += inc
        tree = self.tree
        i = sym + 1
        while i <= ALPHABET:
            tree[i] += inc
            i += i & -i
        self.total += inc
        if self.total > TOTAL_CAP:
            freq = self.freq
            total = 0
            for s in range(ALPHABET):
                f = freq[s] >> 1
                if f == 0:
                    f = 1
                freq[s] = f
                total += f
            self.total = total
            self.increment = 1 if inc <= 1 else inc >> 1
            self._build()


def encode_streams(streams) -> bytes:
    """Arithmetic-code per-band symbol streams into one payload.

    Each stream is (symbols, escapes): int32 symbols in [0, 513] and the
    raw magnitudes accompanying escape symbols, in order of occurrence. A
    fresh adaptive model is used per stream; a single coder spans all of
    them.
    """
    enc = RangeEncoder()
    for symbols, escapes in streams:
        model = AdaptiveCoderModel()
        cum = model.cum
        update = model.update
        encode = enc.encode
        freq = model.freq
        esc_pos = 0
        esc_list = [int(e) & _MASK32 for e in escapes]
        sym_list = symbols.tolist() if hasattr(symbols, "tolist") else list(symbols)
        for s in sym_list:
            total = model.total
            f = freq[s]
            encode(total - cum(s) - f, f, total, s == 0)
            update(s)
            if s >= 512:
                enc.encode_bits32(esc_list[esc_pos])
                esc_pos += 1
    return enc.finish()


def decode_streams(data, counts):
    """Inverse of encode_streams given the per-band symbol counts.

    Returns a list of (symbols int32 array, escapes int64 array). Raises
    CorruptionError naming the band and symbol index on truncated input
    or invalid coder state.
    """
    try:
        dec = RangeDecoder(data)
    except CorruptionError as exc:
        raise CorruptionError(f"band 0, symbol 0: {exc}") from None
    out = []
    for b, count in enumerate(counts):
        model = AdaptiveCoderModel()
        find = model.find
        update = model.update
        freq = model.freq
        symbols = np.empty(int(count), dtype=np.int32)
        escapes = []
        for i in range(int(count)):
            try:
                total = model.total
                target = dec.decode_target(total)
                s, cum_before = find(total - 1 - target)
                f = freq[s]
                dec.consume(total - cum_before - f, f, s == 0)
                update(s)
                if s >= 512:
                    escapes.append(dec.decode_bits32())
            except CorruptionError as exc:
                raise CorruptionError(f"band {b}, symbol {i}: {exc}") from None
            symbols[i] = s
        out.append((symbols, np.asarray(escapes, dtype=np.int64)))
    # a complete decode consumes every payload byte plus exactly the
    # 3-byte virtual flush tail; anything else is a mangled stream
    if dec.pos != len(dec.data) + 3:
        b = max(len(counts) - 1, 0)
        i = max(int(counts[-1]) - 1, 0) if counts else 0
        raise CorruptionError(
            f"band {b}, symbol {i}: payload length mismatch "
            f"({len(dec.data) + 3 - dec.pos} bytes unread)")
    return out


def reconstruct_band(acc_pre, residuals, qn, qne, qnw, qw):
    """Causal raster reconstruction of one detail band.

    acc_pre holds the Q15.16 accumulator contribution of every inter-band
    role; qn/qne/qnw/qw are the Q15.16 weights of the intra-band roles.
    Reconstructed values saturate to int32 (unreachable for any stream
    the encoder produces; bounds adversarial input).
    """
    acc_pre = np.asarray(acc_pre, dtype=np.int64)
    residuals = np.asarray(residuals, dtype=np.int64)
    h, w = acc_pre.shape
    rec = np.zeros((h, w), dtype=np.int64)
    for r in range(h):
        acc = acc_pre[r].copy()
        if r > 0 and (qn or qne or qnw):
            prev = rec[r - 1]
            if qn:
                acc += qn * prev
            if qne:
                acc[:-1] += qne * prev[1:]
            if qnw:
                acc[1:] += qnw * prev[:-1]
        if qw == 0:
            pred = np.where(acc >= 0, (acc + 32768) >> 16, -((-acc + 32768) >> 16))
            np.clip(pred + residuals[r], _INT32_MIN, _INT32_MAX, out=rec[r])
        else:
            row = rec[r]
            res_row = residuals[r]
            west = 0
            for c in range(w):
                # int64 wraparound at every step keeps adversarial inputs
                # bit-identical to the compiled backend
                a = _wrap_i64(int(acc[c]) + qw * west)
                if a >= 0:
                    pred = _wrap_i64(a + 32768) >> 16
                else:
                    pred = -(_wrap_i64(_wrap_i64(-a) + 32768) >> 16)
                v = _wrap_i64(pred + int(res_row[c]))
                if v < _INT32_MIN:
                    v = _INT32_MIN
                elif v > _INT32_MAX:
                    v = _INT32_MAX
                row[c] = v
                west = v
    return rec
