"""Causal predictor contexts, per-subband linear models and DPCM.

Every detail coefficient sees eleven candidate neighbors: four raster-
causal positions inside its own band (North, NorthEast, NorthWest, West)
and seven positions at the next-coarser scale (the same-orientation
parent at (r//2, c//2), its four neighbors, and the two "aunt" bands of
sibling orientation at the parent's position). References outside a
band's bounds contribute 0. Level-1 bands parent into LL and take their
aunts from the causal same-level siblings at (r, c).

Models are fitted per band by ordinary least squares on the context
columns, quantized to Q15.16 fixed point and evaluated with pure 64-bit
integer arithmetic, so encoder and decoder predictions agree bit for bit.
Predictor subsets are chosen by a codelength objective:

    bits(mask) = n * H0(residuals) + 16 + 32 * popcount(mask)

after dropping roles with undefined correlation to the dependent and
pruning near-duplicates (|R| > 0.95 against an earlier candidate).
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from enum import IntEnum
from itertools import combinations
from typing import Optional

import numpy as np

from ._backend import get_kernels
from .errors import CorruptionError
from .lifting import Subband, SubbandPyramid

Q_BITS = 16
Q_ONE = 1 << Q_BITS
Q_HALF = 1 << (Q_BITS - 1)
_INT32_MIN = -(1 << 31)
_INT32_MAX = (1 << 31) - 1

COLLINEARITY_LIMIT = 0.95
MASK_BITS_COST = 16
COEFF_BITS_COST = 32


class PredictorRole(IntEnum):
    """The eleven context roles, in fixed mask/serialization order."""

    PARENT = 0
    PARENT_EAST = 1
    PARENT_WEST = 2
    PARENT_SOUTH = 3
    PARENT_NORTH = 4
    NORTH = 5
    NORTH_EAST = 6
    NORTH_WEST = 7
    WEST = 8
    AUNT1 = 9
    AUNT2 = 10


N_ROLES = len(PredictorRole)
INTRA_ROLES = (PredictorRole.NORTH, PredictorRole.NORTH_EAST,
               PredictorRole.NORTH_WEST, PredictorRole.WEST)
INTER_ROLES = tuple(r for r in PredictorRole if r not in INTRA_ROLES)

# Aunt orientations cycle HL -> LH -> HH -> HL.
_AUNTS = {"HL": ("LH", "HH"), "LH": ("HH", "HL"), "HH": ("HL", "LH")}
# Causal same-level siblings available to level-1 bands (coding order HL, LH, HH).
_LEVEL1_CAUSAL = {"HL": (), "LH": ("HL",), "HH": ("HL", "LH")}


@dataclass(eq=False)
class ContextMatrix:
    """Per-coefficient context rows for one detail band (raster order)."""

    level: int
    orientation: str
    shape: tuple[int, int]
    columns: np.ndarray      # (n, 11) int64
    dependent: np.ndarray    # (n,) int64
    _gram: Optional[tuple] = field(default=None, repr=False)

    @property
    def band_id(self) -> str:
        return f"{self.orientation}{self.level}"

    def gram(self) -> tuple[np.ndarray, np.ndarray]:
        """Cached (X^T X, X^T y) over all 11 columns, as float64.

        The sums are formed in exact integer arithmetic before the float
        conversion so that fitted models do not depend on the platform's
        BLAS reduction order.
        """
        if self._gram is None:
            self._gram = _exact_gram(self.columns, self.dependent)
        return self._gram


@dataclass(frozen=True)
class PredictionModel:
    """Selected roles (11-bit mask) and their Q15.16 weights in role order."""

    level: int
    orientation: str
    mask: int = 0
    coeffs_q: tuple[int, ...] = ()
    degenerate: bool = False
    raw_coeffs: Optional[tuple[float, ...]] = None  # pre-quantization, diagnostic

    def __post_init__(self):
        if not 0 <= self.mask < (1 << N_ROLES):
            raise ValueError(f"mask {self.mask:#x} out of range")
        if len(self.coeffs_q) != self.mask.bit_count():
            raise ValueError("coefficient count must equal mask popcount")

    @property
    def band_id(self) -> str:
        return f"{self.orientation}{self.level}"

    @property
    def roles(self) -> tuple[PredictorRole, ...]:
        return tuple(r for r in PredictorRole if self.mask >> r & 1)

    def weights(self) -> np.ndarray:
        """Dense 11-entry int64 vector of Q15.16 weights (0 if unselected)."""
        w = np.zeros(N_ROLES, dtype=np.int64)
        for role, q in zip(self.roles, self.coeffs_q):
            w[role] = q
        return w


@dataclass(eq=False)
class ResidualPlane:
    """Integer prediction errors of one band; actual = predicted + residual."""

    level: int
    orientation: str
    residuals: np.ndarray    # (rows, cols) int64

    def __post_init__(self):
        self.residuals = np.asarray(self.residuals, dtype=np.int64)

    @property
    def band_id(self) -> str:
        return "LL" if self.orientation == "LL" else f"{self.orientation}{self.level}"


def _gather(coeffs: np.ndarray, rr: np.ndarray, cc: np.ndarray) -> np.ndarray:
    """coeffs[rr, cc] with 0 for any index outside the band."""
    h, w = coeffs.shape
    ok = (rr >= 0) & (rr < h) & (cc >= 0) & (cc < w)
    out = np.zeros(rr.shape, dtype=np.int64)
    if ok.any():
        out[ok] = coeffs[rr[ok], cc[ok]]
    return out


def _interband_columns(pyr: SubbandPyramid, level: int, orientation: str,
                       shape: tuple[int, int]) -> dict[PredictorRole, np.ndarray]:
    """The seven parent/aunt columns for a band, flattened raster order.

    Only causal bands are consulted, so a partially decoded pyramid that
    holds every coarser band plus the earlier same-level siblings yields
    exactly the encoder's values.
    """
    rows, cols = shape
    rr, cc = np.indices((rows, cols))
    rr = rr.ravel()
    cc = cc.ravel()
    pr, pc = rr >> 1, cc >> 1
    parent = pyr.ll.coeffs if level == 1 else pyr.band(level - 1, orientation).coeffs
    out = {
        PredictorRole.PARENT: _gather(parent, pr, pc),
        PredictorRole.PARENT_EAST: _gather(parent, pr, pc + 1),
        PredictorRole.PARENT_WEST: _gather(parent, pr, pc - 1),
        PredictorRole.PARENT_SOUTH: _gather(parent, pr + 1, pc),
        PredictorRole.PARENT_NORTH: _gather(parent, pr - 1, pc),
    }
    aunt1, aunt2 = _AUNTS[orientation]
    if level >= 2:
        out[PredictorRole.AUNT1] = _gather(pyr.band(level - 1, aunt1).coeffs, pr, pc)
        out[PredictorRole.AUNT2] = _gather(pyr.band(level - 1, aunt2).coeffs, pr, pc)
    else:
        causal = _LEVEL1_CAUSAL[orientation]
        zero = np.zeros(rows * cols, dtype=np.int64)
        out[PredictorRole.AUNT1] = (_gather(pyr.band(1, aunt1).coeffs, rr, cc)
                                    if aunt1 in causal else zero)
        out[PredictorRole.AUNT2] = (_gather(pyr.band(1, aunt2).coeffs, rr, cc)
                                    if aunt2 in causal else zero.copy())
    return out


def extract_context(pyr: SubbandPyramid, band: Subband) -> ContextMatrix:
    """Context rows for every coefficient of a detail band."""
    if band.orientation == "LL":
        raise ValueError("LL band has no prediction context")
    rows, cols = band.coeffs.shape
    rr, cc = np.indices((rows, cols))
    rr = rr.ravel()
    cc = cc.ravel()
    coeffs = band.coeffs
    columns = np.zeros((rows * cols, N_ROLES), dtype=np.int64)
    columns[:, PredictorRole.NORTH] = _gather(coeffs, rr - 1, cc)
    columns[:, PredictorRole.NORTH_EAST] = _gather(coeffs, rr - 1, cc + 1)
    columns[:, PredictorRole.NORTH_WEST] = _gather(coeffs, rr - 1, cc - 1)
    columns[:, PredictorRole.WEST] = _gather(coeffs, rr, cc - 1)
    for role, col in _interband_columns(pyr, band.level, band.orientation,
                                        (rows, cols)).items():
        columns[:, role] = col
    return ContextMatrix(level=band.level, orientation=band.orientation,
                         shape=(rows, cols), columns=columns,
                         dependent=coeffs.astype(np.int64).ravel())


def _exact_gram(columns: np.ndarray, y: np.ndarray):
    n = columns.shape[0]
    stacked = np.concatenate([columns, y[:, None]], axis=1)
    maxabs = max(1, int(np.abs(stacked).max()) if n else 1)
    if n * maxabs * maxabs < (1 << 62):
        full = stacked.T @ stacked
    elif maxabs < (1 << 23):
        total = np.zeros((N_ROLES + 1, N_ROLES + 1), dtype=object)
        step = 1 << 15
        for lo in range(0, n, step):
            chunk = stacked[lo:lo + step]
            total = total + (chunk.T @ chunk).astype(object)
        full = total
    else:  # pathological magnitudes; exactness is no longer attainable
        full = stacked.astype(np.float64).T @ stacked.astype(np.float64)
    full = full.astype(np.float64)
    return full[:N_ROLES, :N_ROLES], full[:N_ROLES, N_ROLES]


def _solve_gauss(a: np.ndarray, b: np.ndarray) -> Optional[list[float]]:
    """Gaussian elimination with partial pivoting in plain Python floats.

    Returns None when a pivot magnitude drops below 1e-9 (singular).
    """
    k = len(b)
    m = [[float(a[i][j]) for j in range(k)] + [float(b[i])] for i in range(k)]
    for col in range(k):
        piv = max(range(col, k), key=lambda r: abs(m[r][col]))
        if abs(m[piv][col]) < 1e-9:
            return None
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
        pivot = m[col][col]
        for r in range(col + 1, k):
            f = m[r][col] / pivot
            if f != 0.0:
                for j in range(col, k + 1):
                    m[r][j] -= f * m[col][j]
    x = [0.0] * k
    for r in range(k - 1, -1, -1):
        s = m[r][k] - sum(m[r][j] * x[j] for j in range(r + 1, k))
        x[r] = s / m[r][r]
    return x


def quantize_q16(value: float) -> int:
    """Round half away from zero to Q15.16, clamped to the int32 range."""
    if value >= 0:
        q = math.floor(value * Q_ONE + 0.5)
    else:
        q = -math.floor(-value * Q_ONE + 0.5)
    return min(max(q, _INT32_MIN), _INT32_MAX)


def _mask_of(mask_or_roles) -> int:
    if isinstance(mask_or_roles, (int, np.integer)):
        mask = int(mask_or_roles)
    else:
        mask = 0
        for role in mask_or_roles:
            mask |= 1 << int(role)
    if not 0 <= mask < (1 << N_ROLES):
        raise ValueError(f"mask {mask:#x} out of range")
    return mask


def fit_model(ctx: ContextMatrix, mask_or_roles) -> PredictionModel:
    """Ordinary least squares over the masked columns, Q15.16-quantized.

    Singular normal equations fall back to the zero model with the
    degenerate flag set; they are not an error.
    """
    mask = _mask_of(mask_or_roles)
    if mask == 0:
        return PredictionModel(ctx.level, ctx.orientation)
    roles = [r for r in range(N_ROLES) if mask >> r & 1]
    g, gy = ctx.gram()
    a = g[np.ix_(roles, roles)]
    b = gy[roles]
    solution = _solve_gauss(a, b)
    if solution is None or not all(math.isfinite(v) for v in solution):
        return PredictionModel(ctx.level, ctx.orientation, degenerate=True)
    return PredictionModel(ctx.level, ctx.orientation, mask=mask,
                           coeffs_q=tuple(quantize_q16(v) for v in solution),
                           raw_coeffs=tuple(solution))


def predict(model: PredictionModel, context_row) -> int:
    """Fixed-point model evaluation of a single 11-entry context row.

    acc accumulates coeff * value in 64 bits; the result is acc / 2**16
    rounded half away from zero. Integer-only, platform-independent.
    """
    acc = 0
    row = context_row
    for role, q in zip(model.roles, model.coeffs_q):
        acc += q * int(row[role])
    if acc >= 0:
        return (acc + Q_HALF) >> Q_BITS
    return -((-acc + Q_HALF) >> Q_BITS)


def predict_many(model: PredictionModel, columns: np.ndarray) -> np.ndarray:
    """Vectorized predict() over (n, 11) context columns."""
    if model.mask == 0:
        return np.zeros(columns.shape[0], dtype=np.int64)
    roles = list(model.roles)
    q = np.array(model.coeffs_q, dtype=np.int64)
    acc = columns[:, roles] @ q
    return np.where(acc >= 0, (acc + Q_HALF) >> Q_BITS, -((-acc + Q_HALF) >> Q_BITS))


def residual_entropy_bits(residuals: np.ndarray) -> float:
    """Empirical order-0 entropy (bits/value) of a residual population."""
    values = np.asarray(residuals, dtype=np.int64).ravel()
    n = values.size
    if n == 0:
        return 0.0
    lo = int(values.min())
    hi = int(values.max())
    if hi == lo:
        return 0.0
    if hi - lo <= 1 << 20:
        counts = np.bincount((values - lo).astype(np.int64))
        counts = counts[counts > 0]
    else:
        _, counts = np.unique(values, return_counts=True)
    clogc = sum(c * math.log2(c) for c in counts.tolist())
    return math.log2(n) - clogc / n


def selection_objective(ctx: ContextMatrix, mask_or_roles) -> tuple[float, PredictionModel]:
    """Codelength (bits) of coding the band under a candidate mask."""
    mask = _mask_of(mask_or_roles)
    model = fit_model(ctx, mask)
    residuals = ctx.dependent - predict_many(model, ctx.columns)
    h0 = residual_entropy_bits(residuals)
    n = ctx.dependent.size
    bits = n * h0 + MASK_BITS_COST + COEFF_BITS_COST * model.mask.bit_count()
    return bits, model


def _candidate_roles(ctx: ContextMatrix) -> list[int]:
    """Admissible roles: defined correlation to the dependent, then a
    pairwise |R| > 0.95 multicollinearity prune in role order."""
    cols = ctx.columns
    y = ctx.dependent
    if y.size < 2 or y.min() == y.max():
        return []
    candidates = [r for r in range(N_ROLES)
                  if cols[:, r].min() != cols[:, r].max()]
    if not candidates:
        return []
    cf = cols[:, candidates].astype(np.float64)
    cf -= cf.mean(axis=0)
    norms = np.sqrt((cf * cf).sum(axis=0))
    admitted: list[int] = []
    admitted_idx: list[int] = []
    for i, role in enumerate(candidates):
        ok = True
        for j in admitted_idx:
            r = float((cf[:, i] * cf[:, j]).sum()) / (norms[i] * norms[j])
            if abs(r) > COLLINEARITY_LIMIT:
                ok = False
                break
        if ok:
            admitted.append(role)
            admitted_idx.append(i)
    return admitted


def select_predictors(ctx: ContextMatrix, mode: str = "greedy") -> PredictionModel:
    """Choose the predictor subset minimizing the codelength objective.

    greedy: forward selection, admitting the role with the largest
    objective decrease until none helps. exhaustive: all 2**k subsets of
    the filtered candidates. Ties break toward fewer roles, then earlier
    roles. The empty mask is always in the search space.
    """
    if mode not in ("greedy", "exhaustive"):
        raise ValueError(f"unknown selection mode {mode!r}")
    if ctx.dependent.size == 0:
        raise ValueError("empty context")
    candidates = _candidate_roles(ctx)
    best_bits, best_model = selection_objective(ctx, 0)
    best_key = (best_bits, 0, 0)
    if mode == "exhaustive":
        for k in range(1, len(candidates) + 1):
            for subset in combinations(candidates, k):
                mask = _mask_of(subset)
                bits, model = selection_objective(ctx, mask)
                key = (bits, k, mask)
                if key < best_key:
                    best_key, best_model = key, model
        return best_model
    remaining = list(candidates)
    while remaining:
        step = None
        for role in remaining:
            mask = best_key[2] | (1 << role)
            bits, model = selection_objective(ctx, mask)
            key = (bits, mask.bit_count(), mask)
            if step is None or key < step[0]:
                step = (key, model, role)
        if step is None or step[0][0] >= best_key[0]:
            break
        best_key, best_model = step[0], step[1]
        remaining.remove(step[2])
    return best_model


def dpcm_encode(ll: Subband) -> ResidualPlane:
    """Raster DPCM of the coarse band: first value verbatim, then
    successive differences (rows wrap from the previous row's last sample)."""
    if ll.orientation != "LL":
        raise ValueError("DPCM applies to the LL band only")
    flat = ll.coeffs.astype(np.int64).ravel()
    res = np.empty_like(flat)
    res[0] = flat[0]
    res[1:] = flat[1:] - flat[:-1]
    return ResidualPlane(ll.level, "LL", res.reshape(ll.coeffs.shape))


def dpcm_decode(res: ResidualPlane, dims: tuple[int, int]) -> Subband:
    """Exact inverse of dpcm_encode."""
    if res.orientation != "LL":
        raise ValueError("DPCM applies to the LL band only")
    rows, cols = dims
    flat = res.residuals.ravel()
    if flat.size != rows * cols:
        raise CorruptionError(f"LL residual count {flat.size} != {rows * cols}")
    values = np.cumsum(flat)
    values = np.clip(values, _INT32_MIN, _INT32_MAX)
    return Subband(res.level, "LL", values.reshape(rows, cols).astype(np.int32))


def encode_band(pyr: SubbandPyramid, band: Subband, mode: str = "greedy",
                predict_enabled: bool = True) -> tuple[PredictionModel, ResidualPlane]:
    """Select, fit and apply a model to one detail band of a full pyramid."""
    ctx = extract_context(pyr, band)
    if predict_enabled:
        model = select_predictors(ctx, mode)
    else:
        model = PredictionModel(band.level, band.orientation)
    residuals = ctx.dependent - predict_many(model, ctx.columns)
    plane = ResidualPlane(band.level, band.orientation,
                          residuals.reshape(band.coeffs.shape))
    return model, plane


def decode_band(pyr_partial: SubbandPyramid, model: PredictionModel,
                residuals: ResidualPlane) -> Subband:
    """Reconstruct a detail band from causal bands already in pyr_partial.

    Inter-band role contributions are precomputed as a Q15.16 accumulator
    plane; the intra-band raster recursion runs in the kernel backend.
    decode_band(encode_band(...)) is exact for every model.
    """
    shape = residuals.residuals.shape
    weights = model.weights()
    inter = _interband_columns(pyr_partial, model.level, model.orientation, shape)
    acc_pre = np.zeros(shape[0] * shape[1], dtype=np.int64)
    for role in INTER_ROLES:
        q = int(weights[role])
        if q:
            acc_pre += q * inter[role]
    rec = get_kernels().reconstruct_band(
        acc_pre.reshape(shape), residuals.residuals,
        int(weights[PredictorRole.NORTH]), int(weights[PredictorRole.NORTH_EAST]),
        int(weights[PredictorRole.NORTH_WEST]), int(weights[PredictorRole.WEST]))
    return Subband(model.level, model.orientation, np.asarray(rec, dtype=np.int64).astype(np.int32))


def pack_model(model: PredictionModel) -> bytes:
    """Wire form: u16 little-endian mask (high 5 bits zero), then one
    signed 32-bit little-endian Q15.16 coefficient per set bit in role order."""
    return struct.pack("<H", model.mask) + b"".join(
        struct.pack("<i", q) for q in model.coeffs_q)


def unpack_model(data: bytes, offset: int, level: int, orientation: str) -> tuple[PredictionModel, int]:
    """Parse one model record; returns (model, next offset)."""
    if offset + 2 > len(data):
        raise CorruptionError("truncated model record")
    (mask,) = struct.unpack_from("<H", data, offset)
    offset += 2
    if mask >> N_ROLES:
        raise CorruptionError(f"model mask {mask:#06x} has reserved bits set")
    k = mask.bit_count()
    if offset + 4 * k > len(data):
        raise CorruptionError("truncated model coefficients")
    coeffs = struct.unpack_from(f"<{k}i", data, offset) if k else ()
    return PredictionModel(level, orientation, mask=mask, coeffs_q=tuple(coeffs)), offset + 4 * k
