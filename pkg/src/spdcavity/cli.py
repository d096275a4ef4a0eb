"""
Command-line front end.

Exit codes: 0 success, 1 failed invariant check, 2 invalid configuration,
3 operation at or above the oscillation threshold, 4 unwritable output.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import __version__, kernels
from .analysis import (
    CRITICAL_BAND,
    DivergentAtThreshold,
    k_factor,
    orthogonal_mode_closed_form,
    photon_numbers,
)
from .cavity import CavityParams, SingularAtThreshold
from .checks import FAULTS, run_invariants
from .elements import ParameterError
from .sweep import AxisSpec, axes_from_metadata, figure_preset, read_metadata, sweep

EXIT_OK, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_THRESHOLD, EXIT_IO = 0, 1, 2, 3, 4
OUTPUT_DIR_ENV = "SPDCAVITY_OUTPUT_DIR"
ANGLE_AXES = ("phi", "theta")


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    """Fully resolved configuration of one command."""

    command: str
    params: CavityParams
    axes: dict = field(default_factory=dict)
    output: Path | None = None
    fmt: str = "csv"
    critical_band: float = CRITICAL_BAND
    jobs: int = 1
    backend: str | None = None


def _param_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("cavity parameters")
    g.add_argument("--G", type=float, help="crystal gain, >= 1 (default 1)")
    g.add_argument("--R", type=float, help="output mirror reflectivity in [0, 1) (default 0)")
    g.add_argument("--t", type=float, help="absorber transmission in [0, 1] (default 1)")
    g.add_argument("--phi", type=float, help="rotator angle (default 0)")
    g.add_argument("--theta", type=float, help="single-pass phase omega L / c (default 0)")
    g.add_argument("--deg", action="store_true", help="read angles in degrees")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spdcavity",
        description="Twin-photon rates and Petermann K factors of a cavity "
        "with non-orthogonal polarization modes.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("photons", help="output photon numbers for vacuum input")
    _param_flags(p)

    p = sub.add_parser("kfactor", help="cold-cavity Petermann K factor and regime")
    _param_flags(p)
    p.add_argument("--critical-band", type=float, default=CRITICAL_BAND)

    p = sub.add_parser("sweep", help="evaluate observables on a parameter grid")
    _param_flags(p)
    p.add_argument("--fig", type=int, choices=(2, 3), help="figure preset")
    p.add_argument(
        "--axis",
        action="append",
        default=[],
        metavar="NAME=SPEC",
        help="swept parameter, SPEC is start:stop:num or v1,v2,...; repeatable",
    )
    p.add_argument("--config", type=Path, help="re-run the configuration stored in an output file")
    p.add_argument("-o", "--output", type=Path, help=f"output file (default in ${OUTPUT_DIR_ENV} or .)")
    p.add_argument("--format", choices=("csv", "json"), help="output format (default csv)")
    p.add_argument("--critical-band", type=float)
    p.add_argument("--jobs", type=int, default=1, help="worker threads")
    p.add_argument("--backend", choices=sorted(kernels.BACKENDS), help="sweep kernel backend")

    p = sub.add_parser("check", help="run the invariant suite")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--inject-fault", choices=FAULTS, help=argparse.SUPPRESS)
    return parser


def _angle(x: float, deg: bool) -> float:
    return math.radians(x) if deg else x


def _params(args, base: CavityParams | None = None) -> CavityParams:
    base = base or CavityParams()
    changes = {}
    for name in ("G", "R", "t", "phi", "theta"):
        value = getattr(args, name)
        if value is not None:
            changes[name] = _angle(value, args.deg) if name in ANGLE_AXES else value
    return replace(base, **changes)


def _resolve_sweep(args) -> RunConfig:
    fmt, band, backend = args.format, args.critical_band, args.backend
    if args.config is not None:
        try:
            meta = read_metadata(args.config)
            params = CavityParams(**meta["fixed"])
            axes = axes_from_metadata(meta)
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise ConfigError(f"cannot read configuration from {args.config}: {exc}") from None
        fmt = fmt or meta.get("format")
        band = band if band is not None else meta.get("critical_band")
        backend = backend or meta.get("backend")
        if backend not in kernels.BACKENDS:
            backend = None
    elif args.fig is not None:
        params, axes = figure_preset(args.fig)
        params = _params(args, params)
    else:
        params, axes = _params(args), {}

    for item in args.axis:
        name, sep, spec = item.partition("=")
        if not sep:
            raise ConfigError(f"--axis expects NAME=SPEC, got {item!r}")
        axis = AxisSpec.parse(spec)
        if args.deg and name in ANGLE_AXES:
            if axis.values is not None:
                axis = AxisSpec(values=tuple(math.radians(v) for v in axis.values))
            else:
                axis = AxisSpec(math.radians(axis.start), math.radians(axis.stop), axis.num)
        axes[name] = axis
    if not axes:
        raise ConfigError("sweep needs --fig, --config or at least one --axis")

    fmt = fmt or "csv"
    output = args.output
    if output is None:
        stem = f"fig{args.fig}" if args.fig else "sweep"
        output = Path(os.environ.get(OUTPUT_DIR_ENV, ".")) / f"{stem}.{fmt}"
    return RunConfig(
        "sweep",
        params,
        axes,
        output=output,
        fmt=fmt,
        critical_band=CRITICAL_BAND if band is None else float(band),
        jobs=max(1, args.jobs),
        backend=backend,
    )


def cmd_photons(cfg: RunConfig) -> int:
    p = cfg.params
    n = photon_numbers(p)
    print(f"parameters: G={p.G!r} R={p.R!r} t={p.t!r} phi={p.phi!r} theta={p.theta!r}")
    print(f"n_a       = {n.n_a:.12g}")
    print(f"n_b       = {n.n_b:.12g}")
    print(f"N_total   = {n.total:.12g}")
    print(f"<a+ b>    = {n.correlation:.6g}")
    if p.t == 1.0 and p.phi == 0.0:
        exact = orthogonal_mode_closed_form(p.G, p.R, p.theta)
        dev = abs(n.n_a - exact) / exact if exact else abs(n.n_a)
        print(f"orthogonal-mode closed form n = {exact:.12g}  (relative deviation {dev:.3e})")
    return EXIT_OK


def cmd_kfactor(cfg: RunConfig) -> int:
    p = cfg.params
    res = k_factor(p, cfg.critical_band)
    print(f"parameters: t={p.t!r} phi={p.phi!r}")
    if res.divergent:
        print("K         = inf  (divergent: the cold-cavity eigenmodes coalesce)")
    else:
        print(f"K         = {res.K:.12g}")
    print(f"regime    = {res.regime}")
    print(f"t_c(phi)  = {res.t_c:.12g}")
    if math.isfinite(res.closed_form) and not res.divergent:
        dev = abs(res.K - res.closed_form) / res.closed_form
        print(f"closed form K = {res.closed_form:.12g}  (relative deviation {dev:.3e})")
    else:
        print(f"closed form K = {res.closed_form:.12g}")
    return EXIT_OK


def cmd_sweep(cfg: RunConfig) -> int:
    result = sweep(
        cfg.params, cfg.axes, critical_band=cfg.critical_band, jobs=cfg.jobs, backend=cfg.backend
    )
    result = replace(result, metadata={**result.metadata, "format": cfg.fmt})
    try:
        result.write(cfg.output, cfg.fmt)
    except OSError as exc:
        print(f"error: cannot write {cfg.output}: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"wrote {len(result)} records to {cfg.output}")
    return EXIT_OK


def cmd_check(args) -> int:
    results = run_invariants(args.seed, args.samples, args.inject_fault)
    for r in results:
        print(r.line())
    ok = all(r.passed for r in results)
    print(f"{sum(r.passed for r in results)}/{len(results)} invariants pass (seed {args.seed})")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "check":
            if args.samples < 1:
                raise ConfigError("--samples must be >= 1")
            return cmd_check(args)
        if args.command == "sweep":
            return cmd_sweep(_resolve_sweep(args))
        cfg = RunConfig(args.command, _params(args))
        if args.command == "kfactor":
            cfg.critical_band = args.critical_band
            return cmd_kfactor(cfg)
        return cmd_photons(cfg)
    except (ParameterError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SingularAtThreshold, DivergentAtThreshold) as exc:
        print(f"error: at or above the oscillation threshold: {exc}", file=sys.stderr)
        return EXIT_THRESHOLD


if __name__ == "__main__":
    sys.exit(main())
