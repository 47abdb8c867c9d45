"""Ensemble orchestration: disorder streams, parallel sweeps, checkpoints.

Determinism contract
--------------------
Results are byte-identical across reruns, worker counts, and
kill-and-resume, because

* realization ``r`` always draws its fields from the counter-based stream
  ``(seed, r)``, independent of execution order;
* realizations are processed in fixed blocks (``block_size`` is part of
  the grid identity), each block reduced with numpy's fixed summation
  order, and block partials merged strictly in block order per cell;
* checkpoints store only fully merged per-cell prefixes, so resuming
  replays the exact remaining block sequence.

Streaming accumulation keeps peak memory independent of the realization
count: only per-time sums/sums-of-squares and per-realization scalars are
retained.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import tempfile
from concurrent.futures import FIRST_COMPLETED, ProcessPoolExecutor, wait
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import xlogy

from .errors import CheckpointMismatchError, ConfigError, ConsistencyError
from .floquet import (
    ACFieldParams,
    FloquetPropagator,
    ac_period_phase,
    prepare_initial_state,
)
from .observables import (
    DEFAULT_EPSILON,
    EnsembleStatistics,
    SaturationWindow,
    TrajectoryRecord,
    lifetime,
    saturation_average,
)
from .spin_ops import ChainParams, DisorderRealization, build_basis, kick_state, sz_total_diagonal

DEFAULT_SEED = 12345
DEFAULT_BLOCK_SIZE = 16
DEFAULT_THETA = math.pi / 16

#: consecutive periods below eps/10 after which a lifetime-only trajectory
#: may stop contributing (its remaining signal is treated as zero).
EARLY_STOP_RUN = 100

AXIS_NAMES = ("h", "phi", "J2", "D", "N")

CHECKPOINT_FORMAT = "kickedchain-checkpoint-v1"


# ---------------------------------------------------------------------------
# single trajectory
# ---------------------------------------------------------------------------

def run_trajectory(
    params: ChainParams,
    disorder: DisorderRealization,
    ac: ACFieldParams | None = None,
    *,
    t_max: int,
    record_stride: int = 1,
    eps: float = DEFAULT_EPSILON,
    measure_before_kick: bool = False,
    theta_profile=None,
) -> TrajectoryRecord:
    """Evolve one disorder realization for ``t_max`` periods.

    Magnetization is tracked every period (the realization's lifetime is
    found at full resolution); the stored series keeps every
    ``record_stride``-th period plus t = 0 and the final period.  QFI is
    tracked when an AC field is attached.
    """
    if t_max < 1:
        raise ValueError(f"t_max must be >= 1, got {t_max}")
    if record_stride < 1:
        raise ValueError(f"record_stride must be >= 1, got {record_stride}")
    N = params.N
    if theta_profile is None:
        theta_profile = np.full(N, DEFAULT_THETA)
    prop = FloquetPropagator.build(params, disorder)
    psi = prepare_initial_state(N, theta_profile).amplitudes.copy()
    m = sz_total_diagonal(N)
    track_qfi = ac is not None
    dpsi = np.zeros_like(psi) if track_qfi else None

    rec_ns = sorted(set(range(0, t_max + 1, record_stride)) | {t_max})
    rec_pos = {n: i for i, n in enumerate(rec_ns)}
    n_rec = len(rec_ns)
    sz_full = np.empty(t_max + 1)
    ent = np.empty(n_rec)
    coh = np.empty(n_rec)
    fisher = np.empty(n_rec) if track_qfi else None
    ratio = np.empty(n_rec) if track_qfi else None

    cut = N // 2
    ln2 = math.log(2.0)

    def record(n, amps, qfi_amps, dvec):
        # qfi_amps/dvec must come from the same unitary history; amps may be
        # the pre-kick state when that measurement convention is selected
        sz_full[n] = (np.abs(amps) ** 2 @ m) / N
        i = rec_pos.get(n)
        if i is None:
            return
        p = np.abs(amps) ** 2
        if N >= 2:
            sigma = np.linalg.svd(amps.reshape(1 << (N - cut), 1 << cut), compute_uv=False)
            q = sigma * sigma
            ent[i] = max(-np.sum(xlogy(q, q)) / ln2, 0.0)
        else:
            ent[i] = 0.0  # no bipartition of a single site
        coh[i] = max(-np.sum(xlogy(p, p)) / ln2, 0.0)
        if track_qfi:
            f = 4.0 * (np.vdot(dvec, dvec).real - abs(np.vdot(qfi_amps, dvec)) ** 2)
            if f < -1e-10:
                raise ConsistencyError(f"negative QFI {f} at period {n}")
            fisher[i] = max(f, 0.0)
            t = n * params.T
            ratio[i] = fisher[i] / (N * (2 * t / math.pi) ** 2) if t > 0 else 0.0

    record(0, psi, psi, dpsi)
    for n in range(t_max):
        if ac is not None:
            phase, g = ac_period_phase(ac, n, params.T)
            if phase != 0.0:
                acf = np.exp(-1j * phase * m)
                psi = psi * acf
                dpsi = dpsi * acf
            dpsi = dpsi + (-1j * g) * (m * psi)
        if measure_before_kick:
            free, kicked = prop.step_raw_before_kick(psi, 0.0)
            if track_qfi:
                dpsi = prop.step_raw(dpsi, 0.0)
            psi = kicked
            record(n + 1, free, psi, dpsi)
        else:
            psi = prop.step_raw(psi, 0.0)
            if track_qfi:
                dpsi = prop.step_raw(dpsi, 0.0)
            record(n + 1, psi, psi, dpsi)

    t_star = lifetime(sz_full, eps, cap=t_max)
    return TrajectoryRecord(
        params=params,
        seed=disorder.seed,
        index=disorder.index,
        cap=t_max,
        n=np.asarray(rec_ns, dtype=np.int64),
        sz=sz_full[rec_ns].copy(),
        ent=ent,
        coh=coh,
        qfi=fisher,
        qfi_ratio=ratio,
        lifetime=t_star,
        ac=ac,
    )


# ---------------------------------------------------------------------------
# block engine (shared by ensembles and sweeps)
# ---------------------------------------------------------------------------

def _effective_block(block_size: int, N: int) -> int:
    # cap the stacked dense propagators at ~64 MB
    return max(1, min(block_size, (1 << 22) // ((1 << N) ** 2) or 1))


def _evolve_block(
    params: ChainParams,
    ac: ACFieldParams | None,
    seed: int,
    r_indices: np.ndarray,
    t_max: int,
    eps: float,
    lifetime_only: bool,
    measure_before_kick: bool,
    theta: float,
) -> dict:
    """Evolve a contiguous block of realizations, return partial sums.

    The batched path stacks the dense per-realization period operators and
    steps all trajectories with one mat-vec per period; above the dense
    cutoff it falls back to sequential sector-based evolution.
    """
    N = params.N
    B = len(r_indices)
    basis = build_basis(N)
    props = [
        FloquetPropagator.build(params, DisorderRealization.draw(params.h, N, seed, int(r)), basis)
        for r in r_indices
    ]
    track_heavy = not lifetime_only
    track_qfi = ac is not None and not lifetime_only

    psi0 = prepare_initial_state(N, np.full(N, theta)).amplitudes
    m = sz_total_diagonal(N)
    cut = N // 2
    ln2 = math.log(2.0)

    sz = np.zeros((B, t_max + 1))
    ent = np.zeros((B, t_max + 1)) if track_heavy else None
    coh = np.zeros((B, t_max + 1)) if track_heavy else None
    fisher = np.zeros((B, t_max + 1)) if track_qfi else None

    batched = all(p.full_matrix() is not None for p in props)
    psi = np.tile(psi0, (B, 1))
    dpsi = np.zeros_like(psi) if track_qfi else None
    if batched:
        U = np.stack([p.full_matrix() for p in props])
        U_free = np.stack([p.free_matrix() for p in props]) if measure_before_kick else None

    def measure(idx, n, amps, qfi_amps, dvec):
        # qfi_amps/dvec share one unitary history (pre-kick amps may not)
        p = np.abs(amps) ** 2
        sz[idx, n] = (p @ m) / N
        if track_heavy:
            if N >= 2:
                sigma = np.linalg.svd(
                    amps.reshape(-1, 1 << (N - cut), 1 << cut), compute_uv=False
                )
                q = sigma * sigma
                ent[idx, n] = np.maximum(-np.sum(xlogy(q, q), axis=-1) / ln2, 0.0)
            coh[idx, n] = np.maximum(-np.sum(xlogy(p, p), axis=-1) / ln2, 0.0)
        if track_qfi:
            dd = np.einsum("bi,bi->b", dvec.conj(), dvec).real
            pd = np.einsum("bi,bi->b", qfi_amps.conj(), dvec)
            f = 4.0 * (dd - np.abs(pd) ** 2)
            if f.min() < -1e-10:
                raise ConsistencyError(f"negative QFI {f.min()} at period {n}")
            fisher[idx, n] = np.maximum(f, 0.0)

    active = np.arange(B)
    below_count = np.zeros(B, dtype=np.int64)
    measure(active, 0, psi, psi, dpsi)
    for n in range(t_max):
        if ac is not None:
            phase, g = ac_period_phase(ac, n, params.T)
            if phase != 0.0:
                acf = np.exp(-1j * phase * m)
                psi = psi * acf
                if track_qfi:
                    dpsi = dpsi * acf
            if track_qfi:
                dpsi = dpsi + (-1j * g) * (psi * m)
        if batched:
            if measure_before_kick:
                free = np.matmul(U_free, psi[:, :, None])[:, :, 0]
                if track_qfi:
                    dpsi = np.matmul(U, dpsi[:, :, None])[:, :, 0]
                psi = kick_state(free.T, N, params.phi).T
                measure(active, n + 1, free, psi, dpsi)
            else:
                psi = np.matmul(U, psi[:, :, None])[:, :, 0]
                if track_qfi:
                    dpsi = np.matmul(U, dpsi[:, :, None])[:, :, 0]
                measure(active, n + 1, psi, psi, dpsi)
        else:
            rows = []
            drows = []
            meas_rows = []
            for b, cell_prop in enumerate([props[a] for a in active]):
                if measure_before_kick:
                    free, kicked = cell_prop.step_raw_before_kick(psi[b], 0.0)
                    rows.append(kicked)
                    meas_rows.append(free)
                else:
                    rows.append(cell_prop.step_raw(psi[b], 0.0))
                    meas_rows.append(rows[-1])
                if track_qfi:
                    drows.append(cell_prop.step_raw(dpsi[b], 0.0))
            psi = np.stack(rows)
            if track_qfi:
                dpsi = np.stack(drows)
            measure(active, n + 1, np.stack(meas_rows), psi, dpsi)

        if lifetime_only:
            below = np.abs(sz[active, n + 1]) < eps / 10.0
            below_count = np.where(below, below_count + 1, 0)
            keep = below_count < EARLY_STOP_RUN
            if not keep.all():
                active = active[keep]
                below_count = below_count[keep]
                psi = psi[keep]
                if batched:
                    U = U[keep]
                    if U_free is not None:
                        U_free = U_free[keep]
                if active.size == 0:
                    break

    lifetimes = np.full(B, np.nan)
    for b in range(B):
        t_star = lifetime(sz[b], eps, cap=t_max)
        if t_star is not None:
            lifetimes[b] = t_star

    def shifted_moments(series):
        # moments about the block's first realization: exact zeros when all
        # realizations coincide (h = 0), well-conditioned otherwise
        origin = series[0].copy()
        dev = series - origin
        return origin, dev.sum(axis=0), (dev * dev).sum(axis=0)

    out = {"count": B, "lifetimes": lifetimes}
    out["sz_origin"], out["sz_s1"], out["sz_s2"] = shifted_moments(sz)
    if track_heavy:
        out["ent_origin"], out["ent_s1"], out["ent_s2"] = shifted_moments(ent)
        out["coh_origin"], out["coh_s1"], out["coh_s2"] = shifted_moments(coh)
    if track_qfi:
        out["qfi_origin"], out["qfi_s1"], out["qfi_s2"] = shifted_moments(fisher)
        t = np.arange(t_max + 1) * params.T
        denom = N * (2.0 * t / math.pi) ** 2
        denom[0] = math.inf
        out["max_ratios"] = (fisher / denom).max(axis=1)
    return out


class _StreamingMoments:
    """First two moments of one series, shifted about the first block's origin.

    Holds (origin, s1 = sum of deviations, s2 = sum of squared deviations);
    rebasing incoming block partials onto the stored origin keeps the merge
    exact for identical realizations and well-conditioned in general.
    """

    __slots__ = ("origin", "s1", "s2")

    def __init__(self):
        self.origin = None
        self.s1 = None
        self.s2 = None

    def merge(self, count, origin, s1, s2):
        if self.origin is None:
            self.origin = origin.copy()
            self.s1 = s1.copy()
            self.s2 = s2.copy()
            return
        delta = origin - self.origin
        self.s1 += s1 + count * delta
        self.s2 += s2 + 2.0 * delta * s1 + count * delta * delta

    def mean_stderr(self, R):
        mean = self.origin + self.s1 / R
        if R > 1:
            var = np.maximum((self.s2 - self.s1 * self.s1 / R) / (R - 1), 0.0)
            stderr = np.sqrt(var / R)
        else:
            stderr = np.zeros_like(mean)
        return mean, stderr


class _CellAccumulator:
    """Merges block partials of one cell strictly in block order."""

    def __init__(self, t_max: int, R: int, track_heavy: bool, track_qfi: bool):
        self.t_max = t_max
        self.R = R
        self.track_heavy = track_heavy
        self.track_qfi = track_qfi
        self.cursor = 0  # next block index expected
        self.count = 0
        self.sz = _StreamingMoments()
        self.ent = _StreamingMoments() if track_heavy else None
        self.coh = _StreamingMoments() if track_heavy else None
        self.qfi = _StreamingMoments() if track_qfi else None
        self.lifetimes = np.full(R, np.nan)
        self.max_ratios = np.full(R, np.nan) if track_qfi else None
        self.pending: dict[int, tuple] = {}

    def offer(self, block_idx: int, r_start: int, payload: dict):
        self.pending[block_idx] = (r_start, payload)
        while self.cursor in self.pending:
            r0, pl = self.pending.pop(self.cursor)
            self._merge(r0, pl)
            self.cursor += 1

    def _merge(self, r_start: int, pl: dict):
        b = pl["count"]
        self.count += b
        self.sz.merge(b, pl["sz_origin"], pl["sz_s1"], pl["sz_s2"])
        if self.track_heavy:
            self.ent.merge(b, pl["ent_origin"], pl["ent_s1"], pl["ent_s2"])
            self.coh.merge(b, pl["coh_origin"], pl["coh_s1"], pl["coh_s2"])
        if self.track_qfi:
            self.qfi.merge(b, pl["qfi_origin"], pl["qfi_s1"], pl["qfi_s2"])
            self.max_ratios[r_start : r_start + b] = pl["max_ratios"]
        self.lifetimes[r_start : r_start + b] = pl["lifetimes"]

    def done(self) -> bool:
        return self.count == self.R

    def finalize(self, params, ac, seed, eps) -> EnsembleStatistics:
        if not self.done():
            raise ConsistencyError(f"cell finalized with {self.count}/{self.R} realizations")
        R = self.R

        def stats(m):
            return (None, None) if m is None else m.mean_stderr(R)

        sz_mean, sz_err = stats(self.sz)
        ent_mean, ent_err = stats(self.ent)
        coh_mean, coh_err = stats(self.coh)
        qfi_mean, qfi_err = stats(self.qfi)
        return EnsembleStatistics(
            params=params,
            ac=ac,
            seed=seed,
            R=R,
            cap=self.t_max,
            n=np.arange(self.t_max + 1, dtype=np.int64),
            sz_mean=sz_mean,
            sz_stderr=sz_err,
            ent_mean=ent_mean,
            ent_stderr=ent_err,
            coh_mean=coh_mean,
            coh_stderr=coh_err,
            qfi_mean=qfi_mean,
            qfi_stderr=qfi_err,
            realization_lifetimes=self.lifetimes.copy(),
            realization_max_ratio=None if self.max_ratios is None else self.max_ratios.copy(),
            lifetime=lifetime(sz_mean, eps, cap=self.t_max),
        )


def _block_bounds(R: int, block: int) -> list[tuple[int, int]]:
    return [(r, min(r + block, R)) for r in range(0, R, block)]


def _block_worker(task):
    (cell_idx, block_idx, params, ac, seed, r0, r1, t_max, eps,
     lifetime_only, measure_before_kick, theta) = task
    payload = _evolve_block(
        params, ac, seed, np.arange(r0, r1), t_max, eps,
        lifetime_only, measure_before_kick, theta,
    )
    return cell_idx, block_idx, r0, payload


def run_ensemble(
    params: ChainParams,
    ac: ACFieldParams | None = None,
    *,
    R: int,
    seed: int = DEFAULT_SEED,
    t_max: int,
    eps: float = DEFAULT_EPSILON,
    workers: int = 1,
    block_size: int = DEFAULT_BLOCK_SIZE,
    measure_before_kick: bool = False,
    theta: float = DEFAULT_THETA,
) -> EnsembleStatistics:
    """Disorder-averaged stroboscopic series over R realizations.

    Realization ``r`` uses ``DisorderRealization.draw(params.h, N, seed, r)``.
    The merge is associative/commutative over blocks, applied in canonical
    block order, so the result does not depend on ``workers``.
    """
    if R < 1:
        raise ValueError(f"R must be >= 1, got {R}")
    block = _effective_block(block_size, params.N)
    bounds = _block_bounds(R, block)
    acc = _CellAccumulator(t_max, R, track_heavy=True, track_qfi=ac is not None)
    tasks = [
        (0, i, params, ac, seed, r0, r1, t_max, eps, False, measure_before_kick, theta)
        for i, (r0, r1) in enumerate(bounds)
    ]
    for _, block_idx, r0, payload in _execute(tasks, workers):
        acc.offer(block_idx, r0, payload)
    return acc.finalize(params, ac, seed, eps)


def _execute(tasks, workers: int):
    """Yield results of block tasks, inline or via a process pool."""
    if workers <= 1 or len(tasks) <= 1:
        for t in tasks:
            yield _block_worker(t)
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = {pool.submit(_block_worker, t) for t in tasks}
        while futures:
            finished, futures = wait(futures, return_when=FIRST_COMPLETED)
            for f in finished:
                yield f.result()


# ---------------------------------------------------------------------------
# parameter-grid sweeps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepAxis:
    name: str
    values: tuple

    def __post_init__(self):
        if self.name not in AXIS_NAMES:
            raise ConfigError(f"unknown sweep axis {self.name!r}; choose from {AXIS_NAMES}")
        vals = tuple(float(v) for v in self.values)
        if not vals:
            raise ConfigError(f"axis {self.name!r} has no values")
        if not all(math.isfinite(v) for v in vals):
            raise ConfigError(f"axis {self.name!r} has non-finite values")
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True)
class SweepGrid:
    """A 1- or 2-axis parameter grid with its full run configuration."""

    axes: tuple
    params: ChainParams
    ac: ACFieldParams | None
    R: int
    t_max: int
    eps: float = DEFAULT_EPSILON
    seed: int = DEFAULT_SEED
    lifetime_only: bool = False
    measure_before_kick: bool = False
    theta: float = DEFAULT_THETA
    block_size: int = DEFAULT_BLOCK_SIZE

    def __post_init__(self):
        if not 1 <= len(self.axes) <= 2:
            raise ConfigError(f"grids support 1 or 2 axes, got {len(self.axes)}")
        if len({a.name for a in self.axes}) != len(self.axes):
            raise ConfigError("sweep axes must be distinct")
        if self.R < 1:
            raise ConfigError(f"R must be >= 1, got {self.R}")
        if self.t_max < 1:
            raise ConfigError(f"t_max must be >= 1, got {self.t_max}")

    def _resolve(self, assignments: dict) -> ChainParams:
        kwargs = {}
        for name, value in assignments.items():
            kwargs[name] = int(round(value)) if name == "N" else value
        return replace(self.params, **kwargs)

    def cell_specs(self) -> list[tuple[int, int | None, dict, ChainParams]]:
        """Cells in canonical order: axis 1 outer, axis 2 inner."""
        out = []
        if len(self.axes) == 1:
            ax = self.axes[0]
            for i, v in enumerate(ax.values):
                out.append((i, None, {ax.name: v}, self._resolve({ax.name: v})))
        else:
            a1, a2 = self.axes
            for i, v1 in enumerate(a1.values):
                for j, v2 in enumerate(a2.values):
                    coords = {a1.name: v1, a2.name: v2}
                    out.append((i, j, coords, self._resolve(coords)))
        return out

    def to_dict(self) -> dict:
        return {
            "axes": [[a.name, list(a.values)] for a in self.axes],
            "params": self.params.to_dict(),
            "ac": None if self.ac is None else self.ac.to_dict(),
            "R": self.R,
            "t_max": self.t_max,
            "eps": self.eps,
            "seed": self.seed,
            "lifetime_only": self.lifetime_only,
            "measure_before_kick": self.measure_before_kick,
            "theta": self.theta,
            "block_size": self.block_size,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SweepGrid":
        axes = tuple(SweepAxis(name, tuple(vals)) for name, vals in d["axes"])
        return cls(
            axes=axes,
            params=ChainParams.from_dict(d["params"]),
            ac=None if d.get("ac") is None else ACFieldParams.from_dict(d["ac"]),
            R=d["R"],
            t_max=d["t_max"],
            eps=d.get("eps", DEFAULT_EPSILON),
            seed=d.get("seed", DEFAULT_SEED),
            lifetime_only=d.get("lifetime_only", False),
            measure_before_kick=d.get("measure_before_kick", False),
            theta=d.get("theta", DEFAULT_THETA),
            block_size=d.get("block_size", DEFAULT_BLOCK_SIZE),
        )

    def grid_hash(self) -> str:
        blob = json.dumps({"format": CHECKPOINT_FORMAT, **self.to_dict()}, sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()


@dataclass(frozen=True)
class SweepCell:
    """One grid cell: resolved parameters, statistics, derived scalars."""

    coords: dict
    indices: tuple
    params: ChainParams
    stats: EnsembleStatistics
    lifetime: int | None
    ent_sat: float
    coh_sat: float
    max_qfi_ratio: float
    argmax_t: float

    @classmethod
    def from_stats(cls, coords, indices, params, stats: EnsembleStatistics) -> "SweepCell":
        window = SaturationWindow.default(stats.cap)
        ent_sat = (
            saturation_average(stats.ent_mean, window) if stats.ent_mean is not None else math.nan
        )
        coh_sat = (
            saturation_average(stats.coh_mean, window) if stats.coh_mean is not None else math.nan
        )
        max_ratio, argmax_t = stats.max_qfi_ratio()
        return cls(
            coords=coords,
            indices=indices,
            params=params,
            stats=stats,
            lifetime=stats.lifetime,
            ent_sat=ent_sat,
            coh_sat=coh_sat,
            max_qfi_ratio=max_ratio,
            argmax_t=argmax_t,
        )


def _checkpoint_save(path, grid: SweepGrid, accs: list[_CellAccumulator], n_blocks: int):
    n_cells = len(accs)
    t1 = grid.t_max + 1
    completed = np.zeros((n_cells, n_blocks), dtype=bool)
    for i, a in enumerate(accs):
        completed[i, : a.cursor] = True
    arrays = {
        "format": np.array(CHECKPOINT_FORMAT),
        "grid_hash": np.array(grid.grid_hash()),
        "cursors": np.array([a.cursor for a in accs], dtype=np.int64),
        "counts": np.array([a.count for a in accs], dtype=np.int64),
        "completed": completed,
        "lifetimes": np.stack([a.lifetimes for a in accs]),
    }
    names = ["sz"] + (["ent", "coh"] if not grid.lifetime_only else [])
    if grid.ac is not None and not grid.lifetime_only:
        names.append("qfi")
        arrays["max_ratios"] = np.stack([a.max_ratios for a in accs])
    zeros = np.zeros(t1)
    for name in names:
        for part in ("origin", "s1", "s2"):
            arrays[f"{name}_{part}"] = np.stack(
                [getattr(getattr(a, name), part) if a.cursor > 0 else zeros for a in accs]
            )
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(os.path.abspath(path)), suffix=".tmp")
    os.close(fd)
    try:
        with open(tmp, "wb") as fh:
            np.savez(fh, **arrays)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


def _checkpoint_load(path, grid: SweepGrid, accs: list[_CellAccumulator]):
    with np.load(path, allow_pickle=False) as data:
        if str(data["format"]) != CHECKPOINT_FORMAT:
            raise CheckpointMismatchError(
                f"unsupported checkpoint format {data['format']!r} at {path}"
            )
        if str(data["grid_hash"]) != grid.grid_hash():
            raise CheckpointMismatchError(
                f"checkpoint {path} belongs to a different grid configuration; "
                f"refusing to resume"
            )
        cursors = data["cursors"]
        counts = data["counts"]
        names = ["sz"] + (["ent", "coh"] if not grid.lifetime_only else [])
        if grid.ac is not None and not grid.lifetime_only:
            names.append("qfi")
        for i, a in enumerate(accs):
            a.cursor = int(cursors[i])
            a.count = int(counts[i])
            a.lifetimes = data["lifetimes"][i].copy()
            if a.track_qfi:
                a.max_ratios = data["max_ratios"][i].copy()
            if a.cursor == 0:
                continue
            for name in names:
                m = getattr(a, name)
                m.origin = data[f"{name}_origin"][i].copy()
                m.s1 = data[f"{name}_s1"][i].copy()
                m.s2 = data[f"{name}_s2"][i].copy()


def run_sweep(
    grid: SweepGrid,
    workers: int = 1,
    checkpoint_path: str | None = None,
    checkpoint_every: int | None = None,
) -> list[SweepCell]:
    """Run every grid cell's ensemble; resume from checkpoint when present.

    Cells are returned in canonical order (axis 1 outer).  Results are
    independent of ``workers`` and of interruption points; resuming a
    completed sweep is a no-op.
    """
    specs = grid.cell_specs()
    track_qfi = grid.ac is not None and not grid.lifetime_only
    block = _effective_block(grid.block_size, max(p.N for _, _, _, p in specs))
    bounds = _block_bounds(grid.R, block)
    n_blocks = len(bounds)
    accs = [
        _CellAccumulator(grid.t_max, grid.R, track_heavy=not grid.lifetime_only,
                         track_qfi=track_qfi)
        for _ in specs
    ]
    if checkpoint_path and os.path.exists(checkpoint_path):
        _checkpoint_load(checkpoint_path, grid, accs)

    tasks = []
    for cell_idx, (_, _, _, cell_params) in enumerate(specs):
        for block_idx, (r0, r1) in enumerate(bounds):
            if block_idx < accs[cell_idx].cursor:
                continue  # already merged into the checkpoint
            tasks.append((
                cell_idx, block_idx, cell_params, grid.ac, grid.seed, r0, r1,
                grid.t_max, grid.eps, grid.lifetime_only,
                grid.measure_before_kick, grid.theta,
            ))

    if checkpoint_every is None:
        checkpoint_every = max(1, (len(specs) * n_blocks) // 10)
    done_since_save = 0
    for cell_idx, block_idx, r0, payload in _execute(tasks, workers):
        accs[cell_idx].offer(block_idx, r0, payload)
        done_since_save += 1
        if checkpoint_path and done_since_save >= checkpoint_every:
            _checkpoint_save(checkpoint_path, grid, accs, n_blocks)
            done_since_save = 0
    if checkpoint_path:
        _checkpoint_save(checkpoint_path, grid, accs, n_blocks)

    cells = []
    for (i1, i2, coords, cell_params), acc in zip(specs, accs):
        stats = acc.finalize(cell_params, grid.ac, grid.seed, grid.eps)
        cells.append(SweepCell.from_stats(coords, (i1, i2), cell_params, stats))
    return cells
