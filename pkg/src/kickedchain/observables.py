"""Scalar diagnostics of a trajectory and their ensemble statistics.

Entropies are in bits throughout (log base 2), matching the convention of
the bipartite entanglement plots; the relative entropy of coherence of a
pure state reduces to the Shannon entropy of its z-basis populations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import xlogy

from .errors import ConsistencyError, DimensionError
from .floquet import ACFieldParams, DerivativePair, StateVector
from .spin_ops import ChainParams, sz_total_diagonal

#: Magnetization threshold below which the oscillations count as dead.
DEFAULT_EPSILON = 1e-2

LN2 = math.log(2.0)


def magnetization(state: StateVector) -> float:
    """Per-site magnetization (1/N) <sum_i S_i^z>, in [-1/2, 1/2]."""
    m = sz_total_diagonal(state.n_sites)
    weights = np.abs(state.amplitudes) ** 2
    return float(weights @ m) / state.n_sites


def entanglement_entropy(state: StateVector, cut: int | None = None) -> float:
    """Von Neumann entropy (bits) across a cut after the first ``cut`` sites.

    Defaults to the equal bipartition cut = N // 2.  Implemented through
    the singular values of the amplitude matrix; the reduced-density-matrix
    route lives in :mod:`kickedchain.reference` as the cross-check.
    """
    N = state.n_sites
    if cut is None:
        cut = N // 2
    if not 1 <= cut <= N - 1:
        raise ValueError(f"cut must be in [1, {N - 1}], got {cut}")
    M = state.amplitudes.reshape(1 << (N - cut), 1 << cut)
    sigma = np.linalg.svd(M, compute_uv=False)
    p = sigma * sigma
    return max(float(-np.sum(xlogy(p, p))) / LN2, 0.0)


def coherence(state: StateVector) -> float:
    """Relative entropy of coherence in the z product basis (bits).

    For a pure state S(rho) = 0, so this is the Shannon entropy of the
    basis populations p_k = |psi_k|^2.
    """
    p = np.abs(state.amplitudes) ** 2
    return max(float(-np.sum(xlogy(p, p))) / LN2, 0.0)


def qfi(pair: DerivativePair) -> float:
    """Quantum Fisher information F = 4(<dpsi|dpsi> - |<psi|dpsi>|^2).

    Raises :class:`ConsistencyError` if the value is negative beyond
    rounding (-1e-10), which indicates a corrupted derivative.
    """
    dpsi = pair.dpsi
    overlap = np.vdot(pair.psi.amplitudes, dpsi)
    value = 4.0 * (np.vdot(dpsi, dpsi).real - abs(overlap) ** 2)
    if value < -1e-10:
        raise ConsistencyError(f"QFI = {value} < 0: derivative state is inconsistent")
    return max(value, 0.0)


def sql_ratio(f: float, N: int, t: float) -> float:
    """QFI normalized by the uncorrelated-spin bound N (2t/pi)^2 (0 at t=0)."""
    if t == 0.0:
        return 0.0
    return f / (N * (2.0 * t / math.pi) ** 2)


def lifetime(series, epsilon: float = DEFAULT_EPSILON, cap: int | None = None):
    """First stroboscopic index where |magnetization| drops below epsilon.

    ``series`` is the (signed, ensemble-averaged) magnetization at
    n = 0, 1, 2, ...; the threshold is applied to its absolute value.
    Returns None when no point within the cap crosses the threshold
    (the exceeded-cap sentinel).
    """
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    arr = np.abs(np.asarray(series, dtype=np.float64))
    if arr.size == 0:
        raise ValueError("empty magnetization series")
    if cap is not None:
        arr = arr[: cap + 1]
    below = np.nonzero(arr < epsilon)[0]
    return int(below[0]) if below.size else None


@dataclass(frozen=True)
class SaturationWindow:
    """Stroboscopic window [t1, t2] over which saturated observables average."""

    t1: int
    t2: int

    def __post_init__(self):
        if not 0 <= self.t1 < self.t2:
            raise ValueError(f"need 0 <= t1 < t2, got [{self.t1}, {self.t2}]")

    @classmethod
    def default(cls, t_max: int) -> "SaturationWindow":
        """Last fifth of the run, where the slow observables have leveled off."""
        return cls(t1=int(0.8 * t_max), t2=t_max)


def saturation_average(series, window: SaturationWindow) -> float:
    """Arithmetic mean of the series over the window (endpoints included)."""
    arr = np.asarray(series, dtype=np.float64)
    if window.t2 > len(arr) - 1:
        raise ValueError(
            f"window [{window.t1}, {window.t2}] exceeds series range [0, {len(arr) - 1}]"
        )
    return float(np.mean(arr[window.t1 : window.t2 + 1]))


@dataclass(frozen=True)
class TrajectoryRecord:
    """Stroboscopic series of one disorder realization.

    ``n`` holds the recorded period indices (strictly increasing, starting
    at 0); ``qfi`` and ``qfi_ratio`` are None when no AC field is attached.
    ``lifetime`` is this realization's own first-crossing time (None when
    it never crossed within the cap); it is computed at full resolution
    even when the stored series is stride-thinned.
    """

    params: ChainParams
    seed: int
    index: int
    cap: int
    n: np.ndarray
    sz: np.ndarray
    ent: np.ndarray
    coh: np.ndarray
    qfi: np.ndarray | None = None
    qfi_ratio: np.ndarray | None = None
    lifetime: int | None = None
    ac: ACFieldParams | None = None

    def __post_init__(self):
        n = np.asarray(self.n)
        series = [self.sz, self.ent, self.coh] + (
            [self.qfi, self.qfi_ratio] if self.qfi is not None else []
        )
        for s in series:
            if len(s) != len(n):
                raise DimensionError("trajectory series lengths differ")
        if n.size and (np.diff(n) <= 0).any():
            raise ValueError("record times must be strictly increasing")
        half = self.params.N / 2.0
        if np.any(self.ent < -1e-9) or np.any(self.ent > half + 1e-9):
            raise ConsistencyError("entanglement entropy outside [0, N/2] bits")
        if np.any(self.coh < -1e-9) or np.any(self.coh > self.params.N + 1e-9):
            raise ConsistencyError("coherence outside [0, N] bits")
        if self.qfi is not None and np.any(np.asarray(self.qfi) < -1e-10):
            raise ConsistencyError("negative QFI recorded")


@dataclass(frozen=True)
class EnsembleStatistics:
    """Disorder-averaged series: mean and standard error per time point.

    Standard errors are sample stddev / sqrt(R) (0 when R = 1).  Derived
    per-realization scalars are kept alongside: individual lifetimes (NaN
    when capped) and, when the AC field is on, each realization's maximal
    SQL-normalized QFI ratio, whose median complements the mean series.
    """

    params: ChainParams
    ac: ACFieldParams | None
    seed: int
    R: int
    cap: int
    n: np.ndarray
    sz_mean: np.ndarray
    sz_stderr: np.ndarray
    ent_mean: np.ndarray | None
    ent_stderr: np.ndarray | None
    coh_mean: np.ndarray | None
    coh_stderr: np.ndarray | None
    qfi_mean: np.ndarray | None = None
    qfi_stderr: np.ndarray | None = None
    realization_lifetimes: np.ndarray | None = None
    realization_max_ratio: np.ndarray | None = None
    lifetime: int | None = field(default=None)

    @property
    def qfi_ratio(self) -> np.ndarray | None:
        """SQL-normalized ratio of the mean QFI series."""
        if self.qfi_mean is None:
            return None
        t = self.n * self.params.T
        denom = self.params.N * (2.0 * t / math.pi) ** 2
        out = np.zeros_like(self.qfi_mean)
        np.divide(self.qfi_mean, denom, out=out, where=denom > 0)
        return out

    def max_qfi_ratio(self) -> tuple[float, float]:
        """Max over time of the mean-QFI SQL ratio and its argmax time."""
        ratio = self.qfi_ratio
        if ratio is None or len(ratio) < 2:
            return math.nan, math.nan
        i = int(np.argmax(ratio[1:])) + 1  # t = 0 is identically zero
        return float(ratio[i]), float(self.n[i] * self.params.T)

    def max_ratio_median(self) -> float:
        """Median over realizations of the per-realization max QFI ratio."""
        if self.realization_max_ratio is None:
            return math.nan
        return float(np.median(self.realization_max_ratio))
