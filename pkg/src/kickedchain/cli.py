"""Command-line interface and stable CSV result formats.

Verbs: ``evolve`` (one realization), ``ensemble`` (disorder average),
``sweep`` (1- or 2-axis parameter grid), ``qfi-scaling`` (system-size grid
with the AC probe on).  All options can come from a JSON config file
(``--config``), from flags (flags win), or fall back to the built-in
defaults of the reference parameter set.

Two pinned schemas are written, both with a commented metadata preamble
that embeds the fully resolved configuration:

* series files: ``t_over_T, Sz_mean, Sz_stderr, ent_mean, ent_stderr,
  coh_mean, coh_stderr, qfi_mean, qfi_stderr, qfi_ratio``
* map files: ``axis1, axis2, lifetime, lifetime_is_capped, ent_sat,
  coh_sat, max_qfi_ratio, argmax_t``

Floats are serialized with 17 significant digits, so identical configs
(same seed) reproduce byte-identical files regardless of worker count or
checkpoint interruptions.  Exit codes: 0 success, 2 config error,
3 runtime error.  ``KICKEDCHAIN_WORKERS`` sets the default worker count.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .errors import ConfigError, SimulationError
from .floquet import ACFieldParams
from .observables import DEFAULT_EPSILON, EnsembleStatistics, TrajectoryRecord
from .spin_ops import MAX_SITES, ChainParams, DisorderRealization
from .sweep import (
    DEFAULT_BLOCK_SIZE,
    DEFAULT_SEED,
    DEFAULT_THETA,
    SweepAxis,
    SweepCell,
    SweepGrid,
    run_ensemble,
    run_sweep,
    run_trajectory,
)

SERIES_SCHEMA = "kickedchain-series-v1"
MAP_SCHEMA = "kickedchain-map-v1"
SERIES_HEADER = (
    "t_over_T,Sz_mean,Sz_stderr,ent_mean,ent_stderr,"
    "coh_mean,coh_stderr,qfi_mean,qfi_stderr,qfi_ratio"
)
MAP_HEADER = "axis1,axis2,lifetime,lifetime_is_capped,ent_sat,coh_sat,max_qfi_ratio,argmax_t"

WORKERS_ENV = "KICKEDCHAIN_WORKERS"

# reference parameter set: ferromagnetic J1, |J2/J1| = 1/4, near-pi kick
_COMMON_DEFAULTS = {
    "N": 8,
    "J1": -1.0,
    "J2": 0.25,
    "D": 0.0,
    "h": 1.0,
    "phi": 3.05,
    "T": 1.0,
    "seed": DEFAULT_SEED,
    "t_max": 1000,
    "eps": DEFAULT_EPSILON,
    "out_dir": "results",
    "theta0": DEFAULT_THETA,
    "measure_before_kick": False,
    "ac": False,
    "h_ac": 0.0,
    "omega_ac": None,  # resolved to pi/T
    "theta_ac": 0.0,
}

_MODE_DEFAULTS = {
    "evolve": {"realization_index": 0, "record_stride": 1},
    "ensemble": {"R": 1000, "workers": None, "block_size": DEFAULT_BLOCK_SIZE},
    "sweep": {
        "R": 250,
        "workers": None,
        "block_size": DEFAULT_BLOCK_SIZE,
        "axis1": None,
        "axis2": None,
        "lifetime_only": False,
        "checkpoint": None,
    },
    "qfi-scaling": {
        "R": 250,
        "workers": None,
        "block_size": DEFAULT_BLOCK_SIZE,
        "n_values": None,
        "h_values": None,
        "checkpoint": None,
    },
}


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved run configuration for one CLI invocation."""

    mode: str
    params: ChainParams
    ac: ACFieldParams | None
    seed: int
    t_max: int
    eps: float
    out_dir: str
    theta0: float
    measure_before_kick: bool
    workers: int = 1
    R: int = 1
    record_stride: int = 1
    realization_index: int = 0
    block_size: int = DEFAULT_BLOCK_SIZE
    grid: SweepGrid | None = None
    checkpoint: str | None = None

    def result_identity(self) -> dict:
        """The part of the config that determines the emitted bytes.

        Excludes execution details (workers, output/checkpoint paths) so
        reruns with different parallelism stay byte-identical.
        """
        d = {
            "mode": self.mode,
            "params": self.params.to_dict(),
            "ac": None if self.ac is None else self.ac.to_dict(),
            "seed": self.seed,
            "t_max": self.t_max,
            "eps": self.eps,
            "theta0": self.theta0,
            "measure_before_kick": self.measure_before_kick,
        }
        if self.mode == "evolve":
            d["realization_index"] = self.realization_index
            d["record_stride"] = self.record_stride
        else:
            d["R"] = self.R
            d["block_size"] = self.block_size
        if self.grid is not None:
            d["grid"] = self.grid.to_dict()
        return d


def _parse_axis(spec) -> SweepAxis:
    """Axis spec: "h=1,2,3" or "h=lin:1:7:8" (flags) or {name, values} (JSON)."""
    if isinstance(spec, dict):
        try:
            return SweepAxis(spec["name"], tuple(spec["values"]))
        except KeyError as exc:
            raise ConfigError(f"axis spec needs 'name' and 'values', got {spec}") from exc
    if isinstance(spec, SweepAxis):
        return spec
    text = str(spec)
    if "=" not in text:
        raise ConfigError(
            f"axis spec {text!r} must look like 'h=1,2,3' or 'h=lin:1:7:8'"
        )
    name, rhs = text.split("=", 1)
    if rhs.startswith("lin:"):
        try:
            lo, hi, num = rhs[4:].split(":")
            values = np.linspace(float(lo), float(hi), int(num))
        except ValueError as exc:
            raise ConfigError(f"bad linspace spec {rhs!r}; use lin:lo:hi:count") from exc
    else:
        try:
            values = [float(v) for v in rhs.split(",") if v.strip()]
        except ValueError as exc:
            raise ConfigError(f"bad axis values {rhs!r}") from exc
    return SweepAxis(name.strip(), tuple(values))


def _parse_value_list(spec, kind=float):
    if spec is None:
        return None
    if isinstance(spec, (list, tuple)):
        return [kind(v) for v in spec]
    return [kind(v) for v in str(spec).split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kickedchain",
        description="Kicked disordered chiral spin-chain simulator and AC-field sensing toolkit",
    )
    sub = parser.add_subparsers(dest="mode", required=True)

    def add_common(p):
        p.add_argument("--config", help="JSON config file; flags override its keys")
        p.add_argument("--N", type=int, help=f"site count (2..{MAX_SITES})")
        p.add_argument("--J1", type=float, help="nearest-neighbor coupling")
        p.add_argument("--J2", type=float, help="next-nearest-neighbor coupling")
        p.add_argument("--D", type=float, help="z-axis DMI strength")
        p.add_argument("--h", type=float, help="disorder half-width")
        p.add_argument("--phi", type=float, help="kick angle (radians)")
        p.add_argument("--T", type=float, help="drive period")
        p.add_argument("--seed", type=int, help="master seed of the disorder streams")
        p.add_argument("--t-max", dest="t_max", type=int, help="number of drive periods")
        p.add_argument("--eps", type=float, help="magnetization lifetime threshold")
        p.add_argument("--out-dir", dest="out_dir", help="output directory")
        p.add_argument("--theta0", type=float, help="initial per-site tilt angle")
        p.add_argument(
            "--measure-before-kick", dest="measure_before_kick", action="store_true",
            default=argparse.SUPPRESS, help="record observables before the kick",
        )
        p.add_argument("--ac", action="store_true", default=argparse.SUPPRESS,
                       help="attach the AC probe field (QFI columns)")
        p.add_argument("--h-ac", dest="h_ac", type=float, help="AC amplitude evaluation point")
        p.add_argument("--omega-ac", dest="omega_ac", type=float,
                       help="AC angular frequency (default pi/T)")
        p.add_argument("--theta-ac", dest="theta_ac", type=float, help="AC phase")

    p_evolve = sub.add_parser("evolve", help="single disorder realization")
    add_common(p_evolve)
    p_evolve.add_argument("--realization-index", dest="realization_index", type=int,
                          help="which realization of the seed stream")
    p_evolve.add_argument("--record-stride", dest="record_stride", type=int,
                          help="store every k-th period (t=0 and final always kept)")

    p_ens = sub.add_parser("ensemble", help="disorder-averaged series")
    add_common(p_ens)
    p_ens.add_argument("--R", type=int, help="number of disorder realizations")
    p_ens.add_argument("--workers", type=int, help="parallel worker processes")
    p_ens.add_argument("--block-size", dest="block_size", type=int,
                       help="realizations per reduction block (affects bit-level identity)")

    p_sweep = sub.add_parser("sweep", help="1- or 2-axis parameter grid")
    add_common(p_sweep)
    p_sweep.add_argument("--R", type=int, help="realizations per cell")
    p_sweep.add_argument("--workers", type=int, help="parallel worker processes")
    p_sweep.add_argument("--block-size", dest="block_size", type=int)
    p_sweep.add_argument("--axis1", help="e.g. 'h=lin:1:7:8' or 'phi=2.7,3.0,3.14'")
    p_sweep.add_argument("--axis2", help="optional second axis")
    p_sweep.add_argument("--lifetime-only", dest="lifetime_only", action="store_true",
                         default=argparse.SUPPRESS,
                         help="skip entropy/QFI and allow early stopping of dead trajectories")
    p_sweep.add_argument("--checkpoint", help="checkpoint path (default: alongside output)")

    p_qfi = sub.add_parser("qfi-scaling", help="AC-probe grid over system sizes")
    add_common(p_qfi)
    p_qfi.add_argument("--R", type=int, help="realizations per cell")
    p_qfi.add_argument("--workers", type=int, help="parallel worker processes")
    p_qfi.add_argument("--block-size", dest="block_size", type=int)
    p_qfi.add_argument("--N-values", dest="n_values", help="comma list of sizes, e.g. 4,6,8")
    p_qfi.add_argument("--h-values", dest="h_values",
                       help="optional comma list of disorder strengths (second axis)")
    p_qfi.add_argument("--checkpoint", help="checkpoint path (default: alongside output)")
    return parser


def parse_config(argv=None) -> RunConfig:
    """Resolve defaults, config file, and flags into a validated RunConfig."""
    parser = build_parser()
    ns = parser.parse_args(argv)
    mode = ns.mode
    allowed = set(_COMMON_DEFAULTS) | set(_MODE_DEFAULTS[mode]) | {"mode"}

    merged = dict(_COMMON_DEFAULTS)
    merged.update(_MODE_DEFAULTS[mode])
    if getattr(ns, "config", None):
        try:
            with open(ns.config) as fh:
                file_cfg = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file {ns.config}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {ns.config} is not valid JSON: {exc}") from exc
        if not isinstance(file_cfg, dict):
            raise ConfigError(f"config file {ns.config} must hold a JSON object")
        if "mode" in file_cfg and file_cfg["mode"] != mode:
            raise ConfigError(
                f"config file is for mode {file_cfg['mode']!r} but {mode!r} was invoked"
            )
        unknown = set(file_cfg) - allowed
        if unknown:
            raise ConfigError(
                f"unknown config keys for mode {mode!r}: {sorted(unknown)}; "
                f"allowed: {sorted(allowed - {'mode'})}"
            )
        merged.update({k: v for k, v in file_cfg.items() if k != "mode"})
    for key, value in vars(ns).items():
        if key in ("mode", "config") or value is None:
            continue
        merged[key] = value

    return _build_config(mode, merged)


def _build_config(mode: str, cfg: dict) -> RunConfig:
    try:
        params = ChainParams(
            N=int(cfg["N"]), J1=float(cfg["J1"]), J2=float(cfg["J2"]),
            D=float(cfg["D"]), h=float(cfg["h"]), phi=float(cfg["phi"]),
            T=float(cfg["T"]),
        )
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"invalid chain parameters: {exc}") from exc
    if not 1 <= params.N <= MAX_SITES:
        raise ConfigError(f"N={params.N} outside supported range [1, {MAX_SITES}]")

    ac_on = bool(cfg["ac"]) or mode == "qfi-scaling"
    if not ac_on and (cfg["h_ac"] or cfg["omega_ac"] or cfg["theta_ac"]):
        raise ConfigError("AC field options given but 'ac' is not enabled; pass --ac")
    ac = None
    if ac_on:
        omega = cfg["omega_ac"] if cfg["omega_ac"] is not None else math.pi / params.T
        try:
            ac = ACFieldParams(h_ac=float(cfg["h_ac"]), omega=float(omega),
                               theta=float(cfg["theta_ac"]))
        except ValueError as exc:
            raise ConfigError(f"invalid AC field parameters: {exc}") from exc

    t_max = int(cfg["t_max"])
    if t_max < 1:
        raise ConfigError(f"t_max must be >= 1, got {t_max}")
    eps = float(cfg["eps"])
    if eps <= 0:
        raise ConfigError(f"eps must be positive, got {eps}")

    workers = cfg.get("workers")
    if workers is None:
        workers = int(os.environ.get(WORKERS_ENV, "1"))
    workers = max(1, int(workers))

    grid = None
    if mode == "sweep":
        if cfg["axis1"] is None:
            raise ConfigError("sweep needs --axis1 (e.g. 'h=lin:1:7:8')")
        axes = [_parse_axis(cfg["axis1"])]
        if cfg["axis2"] is not None:
            axes.append(_parse_axis(cfg["axis2"]))
        grid = SweepGrid(
            axes=tuple(axes), params=params, ac=ac, R=int(cfg["R"]), t_max=t_max,
            eps=eps, seed=int(cfg["seed"]), lifetime_only=bool(cfg["lifetime_only"]),
            measure_before_kick=bool(cfg["measure_before_kick"]),
            theta=float(cfg["theta0"]), block_size=int(cfg["block_size"]),
        )
    elif mode == "qfi-scaling":
        n_values = _parse_value_list(cfg["n_values"], int)
        if not n_values:
            raise ConfigError("qfi-scaling needs --N-values (e.g. 4,6,8)")
        bad = [n for n in n_values if not 1 <= n <= MAX_SITES]
        if bad:
            raise ConfigError(f"N values {bad} outside supported range [1, {MAX_SITES}]")
        axes = [SweepAxis("N", tuple(float(n) for n in n_values))]
        h_values = _parse_value_list(cfg["h_values"], float)
        if h_values:
            axes.append(SweepAxis("h", tuple(h_values)))
        grid = SweepGrid(
            axes=tuple(axes), params=params, ac=ac, R=int(cfg["R"]), t_max=t_max,
            eps=eps, seed=int(cfg["seed"]),
            measure_before_kick=bool(cfg["measure_before_kick"]),
            theta=float(cfg["theta0"]), block_size=int(cfg["block_size"]),
        )

    kwargs = {}
    if mode == "evolve":
        stride = int(cfg["record_stride"])
        if stride < 1:
            raise ConfigError(f"record_stride must be >= 1, got {stride}")
        kwargs.update(realization_index=int(cfg["realization_index"]), record_stride=stride)
    else:
        R = int(cfg["R"])
        if R < 1:
            raise ConfigError(f"R must be >= 1, got {R}")
        kwargs.update(R=R, block_size=int(cfg["block_size"]))
    if mode in ("sweep", "qfi-scaling"):
        kwargs["checkpoint"] = cfg["checkpoint"]

    return RunConfig(
        mode=mode, params=params, ac=ac, seed=int(cfg["seed"]), t_max=t_max, eps=eps,
        out_dir=str(cfg["out_dir"]), theta0=float(cfg["theta0"]),
        measure_before_kick=bool(cfg["measure_before_kick"]), workers=workers,
        grid=grid, **kwargs,
    )


# ---------------------------------------------------------------------------
# result serialization
# ---------------------------------------------------------------------------

def _fmt(x) -> str:
    if x is None:
        return "nan"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    return f"{x:.17g}"


def _preamble(schema: str, config: RunConfig) -> list[str]:
    blob = json.dumps(config.result_identity(), sort_keys=True)
    return [f"# {schema}", f"# version = {__version__}", f"# config = {blob}"]


def config_slug(config: RunConfig) -> str:
    ident = json.dumps(config.result_identity(), sort_keys=True)
    digest = hashlib.sha256(ident.encode()).hexdigest()[:8]
    if config.grid is not None:
        axes = "-".join(a.name for a in config.grid.axes)
        return f"{config.mode.replace('qfi-scaling', 'qfiscaling')}_{axes}_{digest}"
    return f"{config.mode}_N{config.params.N}_h{config.params.h:g}_{digest}"


def write_series_csv(path, source, config: RunConfig):
    """Series schema from an EnsembleStatistics or a TrajectoryRecord."""
    if isinstance(source, EnsembleStatistics):
        n = source.n
        zeros = np.zeros(len(n))
        cols = [
            n, source.sz_mean, source.sz_stderr,
            source.ent_mean, source.ent_stderr,
            source.coh_mean, source.coh_stderr,
            source.qfi_mean, source.qfi_stderr, source.qfi_ratio,
        ]
        cols = [zeros * math.nan if c is None else c for c in cols]
    elif isinstance(source, TrajectoryRecord):
        n = source.n
        zeros = np.zeros(len(n))
        nans = np.full(len(n), math.nan)
        cols = [
            n, source.sz, zeros, source.ent, zeros, source.coh, zeros,
            source.qfi if source.qfi is not None else nans, zeros,
            source.qfi_ratio if source.qfi_ratio is not None else nans,
        ]
    else:
        raise TypeError(f"cannot serialize {type(source)} as a series")
    lines = _preamble(SERIES_SCHEMA, config)
    lines.append(SERIES_HEADER)
    for i in range(len(n)):
        lines.append(",".join(_fmt(c[i]) for c in cols))
    _write_lines(path, lines)


def write_map_csv(path, cells: list[SweepCell], config: RunConfig):
    """Map schema: one row per grid cell in canonical order."""
    grid = config.grid
    lines = _preamble(MAP_SCHEMA, config)
    lines.append(f"# axis1 = {grid.axes[0].name}")
    lines.append(f"# axis2 = {grid.axes[1].name if len(grid.axes) > 1 else 'none'}")
    lines.append(MAP_HEADER)
    for cell in cells:
        axis_vals = list(cell.coords.values())
        a1 = axis_vals[0]
        a2 = axis_vals[1] if len(axis_vals) > 1 else math.nan
        capped = cell.lifetime is None
        t_star = config.t_max if capped else cell.lifetime
        lines.append(",".join([
            _fmt(a1), _fmt(a2), str(int(t_star)), str(int(capped)),
            _fmt(cell.ent_sat), _fmt(cell.coh_sat),
            _fmt(cell.max_qfi_ratio), _fmt(cell.argmax_t),
        ]))
    _write_lines(path, lines)


def _write_lines(path, lines):
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def emit_results(result, config: RunConfig) -> list[str]:
    """Write the run's CSV set into ``config.out_dir``; returns the paths."""
    os.makedirs(config.out_dir, exist_ok=True)
    path = os.path.join(config.out_dir, f"{config_slug(config)}.csv")
    if config.mode in ("evolve", "ensemble"):
        write_series_csv(path, result, config)
    else:
        write_map_csv(path, result, config)
    return [path]


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def run(config: RunConfig) -> list[str]:
    if config.mode == "evolve":
        disorder = DisorderRealization.draw(
            config.params.h, config.params.N, config.seed, config.realization_index
        )
        record = run_trajectory(
            config.params, disorder, config.ac, t_max=config.t_max,
            record_stride=config.record_stride, eps=config.eps,
            measure_before_kick=config.measure_before_kick,
            theta_profile=np.full(config.params.N, config.theta0),
        )
        return emit_results(record, config)
    if config.mode == "ensemble":
        stats = run_ensemble(
            config.params, config.ac, R=config.R, seed=config.seed,
            t_max=config.t_max, eps=config.eps, workers=config.workers,
            block_size=config.block_size,
            measure_before_kick=config.measure_before_kick, theta=config.theta0,
        )
        return emit_results(stats, config)
    # sweep and qfi-scaling
    checkpoint = config.checkpoint
    if checkpoint is None:
        os.makedirs(config.out_dir, exist_ok=True)
        checkpoint = os.path.join(config.out_dir, f"{config_slug(config)}.checkpoint.npz")
    cells = run_sweep(config.grid, workers=config.workers, checkpoint_path=checkpoint)
    return emit_results(cells, config)


def main(argv=None) -> int:
    try:
        config = parse_config(argv)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        paths = run(config)
    except (SimulationError, OSError, ValueError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 3
    for p in paths:
        print(p)
    return 0


if __name__ == "__main__":
    sys.exit(main())
