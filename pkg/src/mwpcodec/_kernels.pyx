# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled backend for the hot coding loops.

Behaviour is defined by the pure-Python twin (mwpcodec._kernels_py):
identical bytes out, identical values back, for every stream an encoder
can produce. Linear scans over the 514-entry frequency table replace the
Fenwick tree; the count dynamics and coded intervals are the same.
"""

from libc.stdint cimport int32_t, int64_t, uint8_t, uint32_t, uint64_t
from libc.string cimport memset

import numpy as np

from .errors import CorruptionError

BACKEND_ID = "c"

cdef enum:
    ALPHABET = 514
    INCREMENT = 32
    TOTAL_CAP = 65536
    TOP = 16777216          # 1 << 24

cdef uint64_t MASK32 = 0xFFFFFFFFULL
cdef int64_t INT32_MIN_ = -2147483648LL
cdef int64_t INT32_MAX_ = 2147483647LL


cdef class RangeEncoder:
    cdef uint64_t low
    cdef uint32_t rng
    cdef uint32_t cache
    cdef Py_ssize_t cache_size
    cdef bytearray out

    def __cinit__(self):
        self.low = 0
        self.rng = 0xFFFFFFFFU
        self.cache = 0
        self.cache_size = 1
        self.out = bytearray()

    cdef void _shift_low(self):
        cdef uint64_t low = self.low
        cdef uint32_t carry
        cdef Py_ssize_t i
        if low < 0xFF000000ULL or low > MASK32:
            carry = <uint32_t>(low >> 32)
            self.out.append(<uint8_t>((self.cache + carry) & 0xFF))
            for i in range(self.cache_size - 1):
                self.out.append(<uint8_t>((0xFF + carry) & 0xFF))
            self.cache = <uint32_t>((low >> 24) & 0xFF)
            self.cache_size = 0
        self.cache_size += 1
        self.low = (low << 8) & MASK32

    cdef void encode(self, uint32_t start, uint32_t freq, uint32_t total,
                     bint is_top):
        cdef uint32_t r = self.rng / total
        cdef uint32_t rng
        if is_top:
            rng = self.rng - start * r   # top interval absorbs division slack
        else:
            rng = r * freq
        self.low += <uint64_t>start * r
        while rng < TOP:
            self._shift_low()
            rng <<= 8
        self.rng = rng

    cdef void encode_bits32(self, uint32_t value):
        cdef uint32_t rng = self.rng
        cdef int shift
        for shift in range(31, -1, -1):
            rng >>= 1
            if (value >> shift) & 1:
                self.low += rng
            if rng < TOP:
                self._shift_low()
                rng <<= 8
        self.rng = rng

    cdef bytes finish(self):
        # commit to the code point with 24 trailing zero bits (range >= 2**24
        # guarantees one); the decoder reads the missing tail as virtual zeros
        self.low = ((self.low + 0xFFFFFFULL) >> 24) << 24
        self._shift_low()
        self._shift_low()
        # first byte is provably 0: low + range <= 2**32 until the first shift
        return bytes(self.out[1:])


cdef class RangeDecoder:
    cdef const uint8_t[::1] data
    cdef Py_ssize_t pos
    cdef uint32_t rng
    cdef uint32_t code
    cdef uint32_t _r

    def __cinit__(self, const uint8_t[::1] data):
        cdef int i
        self.data = data
        self.pos = 0
        self.rng = 0xFFFFFFFFU
        self.code = 0
        self._r = 0
        for i in range(4):
            self.code = <uint32_t>(((<uint64_t>self.code << 8) | self._next_byte()) & MASK32)

    cdef uint32_t _next_byte(self) except? 0xFFFFFFFFU:
        if self.pos >= self.data.shape[0]:
            # 3 virtual zero bytes are the encoder's flush tail; more is truncation
            if self.pos >= self.data.shape[0] + 3:
                raise CorruptionError("payload exhausted")
            self.pos += 1
            return 0
        self.pos += 1
        return self.data[self.pos - 1]

    cdef uint32_t decode_target(self, uint32_t total) except? 0xFFFFFFFFU:
        cdef uint32_t r = self.rng / total
        cdef uint32_t target = self.code / r
        self._r = r
        return total - 1 if target >= total else target

    cdef int consume(self, uint32_t start, uint32_t freq, bint is_top) except -1:
        cdef uint32_t rng
        if is_top:
            rng = self.rng - start * self._r
        else:
            rng = self._r * freq
        self.code -= start * self._r
        while rng < TOP:
            self.code = <uint32_t>(((<uint64_t>self.code << 8) | self._next_byte()) & MASK32)
            rng <<= 8
        self.rng = rng
        return 0

    cdef uint32_t decode_bits32(self) except? 0xFFFFFFFFU:
        cdef uint32_t rng = self.rng
        cdef uint32_t code = self.code
        cdef uint32_t value = 0
        cdef int i
        for i in range(32):
            rng >>= 1
            if code >= rng:
                code -= rng
                value = (value << 1) | 1
            else:
                value <<= 1
            if rng < TOP:
                self.code = code
                code = <uint32_t>(((<uint64_t>code << 8) | self._next_byte()) & MASK32)
                rng <<= 8
        self.rng = rng
        self.code = code
        return value


cdef struct Model:
    int32_t freq[ALPHABET]
    int32_t total
    int32_t increment


cdef inline void model_init(Model* m):
    cdef int i
    for i in range(ALPHABET):
        m.freq[i] = 1
    m.total = ALPHABET
    m.increment = INCREMENT


cdef inline int32_t model_cum(Model* m, int32_t sym):
    cdef int32_t acc = 0
    cdef int i
    for i in range(sym):
        acc += m.freq[i]
    return acc


cdef inline int32_t model_find(Model* m, int32_t target, int32_t* cum_before):
    cdef int32_t acc = 0
    cdef int32_t s = 0
    while acc + m.freq[s] <= target:
        acc += m.freq[s]
        s += 1
    cum_before[0] = acc
    return s


cdef inline void model_update(Model* m, int32_t sym):
    cdef int i
    cdef int32_t f, total
    m.freq[sym] += m.increment
    m.total += m.increment
    if m.total > TOTAL_CAP:
        total = 0
        for i in range(ALPHABET):
            f = m.freq[i] >> 1
            if f == 0:
                f = 1
            m.freq[i] = f
            total += f
        m.total = total
        if m.increment > 1:
            m.increment >>= 1


def encode_streams(streams):
    """See mwpcodec._kernels_py.encode_streams."""
    cdef RangeEncoder enc = RangeEncoder()
    cdef Model model
    cdef const int32_t[::1] symbols
    cdef const int64_t[::1] escapes
    cdef Py_ssize_t i, esc_pos
    cdef int32_t s, f
    for raw_symbols, raw_escapes in streams:
        symbols = np.ascontiguousarray(raw_symbols, dtype=np.int32)
        escapes = np.ascontiguousarray(raw_escapes, dtype=np.int64)
        model_init(&model)
        esc_pos = 0
        for i in range(symbols.shape[0]):
            s = symbols[i]
            f = model.freq[s]
            enc.encode(<uint32_t>(model.total - model_cum(&model, s) - f),
                       <uint32_t>f, <uint32_t>model.total, s == 0)
            model_update(&model, s)
            if s >= 512:
                enc.encode_bits32(<uint32_t>(escapes[esc_pos] & 0xFFFFFFFFLL))
                esc_pos += 1
    return enc.finish()


def decode_streams(data, counts):
    """See mwpcodec._kernels_py.decode_streams."""
    cdef bytes payload = bytes(data)
    cdef RangeDecoder dec
    cdef Model model
    cdef Py_ssize_t b, i, count
    cdef int32_t s, target, cum_before
    cdef int32_t[::1] symbols
    try:
        dec = RangeDecoder(payload)
    except CorruptionError as exc:
        raise CorruptionError(f"band 0, symbol 0: {exc}") from None
    out = []
    for b, raw_count in enumerate(counts):
        count = raw_count
        model_init(&model)
        symbols_arr = np.empty(count, dtype=np.int32)
        symbols = symbols_arr
        escapes = []
        for i in range(count):
            try:
                target = <int32_t>dec.decode_target(<uint32_t>model.total)
                s = model_find(&model, model.total - 1 - target, &cum_before)
                dec.consume(<uint32_t>(model.total - cum_before - model.freq[s]),
                            <uint32_t>model.freq[s], s == 0)
                model_update(&model, s)
                if s >= 512:
                    escapes.append(dec.decode_bits32())
            except CorruptionError as exc:
                raise CorruptionError(f"band {b}, symbol {i}: {exc}") from None
            symbols[i] = s
        out.append((symbols_arr, np.asarray(escapes, dtype=np.int64)))
    # a complete decode consumes every payload byte plus exactly the
    # 3-byte virtual flush tail; anything else is a mangled stream
    if dec.pos != dec.data.shape[0] + 3:
        b = max(len(counts) - 1, 0)
        i = max(int(counts[len(counts) - 1]) - 1, 0) if len(counts) else 0
        raise CorruptionError(
            f"band {b}, symbol {i}: payload length mismatch "
            f"({dec.data.shape[0] + 3 - dec.pos} bytes unread)")
    return out


def reconstruct_band(acc_pre, residuals, qn, qne, qnw, qw):
    """See mwpcodec._kernels_py.reconstruct_band."""
    cdef const int64_t[:, ::1] pre = np.ascontiguousarray(acc_pre, dtype=np.int64)
    cdef const int64_t[:, ::1] res = np.ascontiguousarray(residuals, dtype=np.int64)
    cdef int64_t cqn = qn, cqne = qne, cqnw = qnw, cqw = qw
    cdef Py_ssize_t h = pre.shape[0], w = pre.shape[1]
    rec_arr = np.zeros((h, w), dtype=np.int64)
    cdef int64_t[:, ::1] rec = rec_arr
    cdef Py_ssize_t r, c
    cdef int64_t acc, pred, v
    for r in range(h):
        for c in range(w):
            acc = pre[r, c]
            if r > 0:
                acc += cqn * rec[r - 1, c]
                if c + 1 < w:
                    acc += cqne * rec[r - 1, c + 1]
                if c > 0:
                    acc += cqnw * rec[r - 1, c - 1]
            if c > 0:
                acc += cqw * rec[r, c - 1]
            if acc >= 0:
                pred = (acc + 32768) >> 16
            else:
                pred = -((-acc + 32768) >> 16)
            v = pred + res[r, c]
            if v < INT32_MIN_:
                v = INT32_MIN_
            elif v > INT32_MAX_:
                v = INT32_MAX_
            rec[r, c] = v
    return rec_arr
