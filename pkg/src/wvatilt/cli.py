"""Command-line surface: subcommands, CSV/JSON emission, exit codes.

Every subcommand produces exactly one artifact (CSV or JSON) on the path
given by ``--output`` (default stdout); diagnostics go to stderr.  Artifacts
embed the fully resolved configuration, the package version, and the
command arguments, so identical invocations are byte-identical and any
output file documents how to reproduce it.

Exit codes: 0 success, 2 configuration/usage error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .config import (
    OutputFormat,
    RunConfig,
    config_echo,
    default_config,
    parse_config,
    with_overrides,
)
from .coherency import PointKind, locate_points, nth_point
from .errors import (
    ConfigError,
    DegeneratePostSelection,
    GridTooCoarseError,
    PointNotFoundError,
    RankDeficientFitError,
)
from .optics import interaction_params
from .pointer import Regime, SelectionSpec
from .sensitivity import (
    MEASUREMENT_HEADER,
    density_map,
    fit_boost,
    optimal_epsilon,
    probability_map,
    read_measurements,
    sweep_epsilon,
    sweep_theta,
    synthesize_measurements,
    tilt_sensitivity,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


class NumericalFailure(RuntimeError):
    """A command could not produce a meaningful artifact from valid inputs."""


@dataclass
class Artifact:
    """Tabular command output plus reproducibility metadata."""

    columns: list[str]
    rows: list[tuple]
    meta: dict[str, object] = field(default_factory=dict)


def _fmt_value(value: object) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def _json_scalar(value: object) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if not math.isfinite(value):
            return "null"
        return f"{value:.17g}"
    if isinstance(value, int):
        return str(value)
    escaped = (
        str(value)
        .replace("\\", "\\\\")
        .replace('"', '\\"')
        .replace("\n", "\\n")
    )
    return f'"{escaped}"'


def _json_render(value: object, indent: int) -> str:
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = ",\n".join(
            f'{inner}"{k}": {_json_render(v, indent + 1)}' for k, v in value.items()
        )
        return "{\n" + items + "\n" + pad + "}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        items = ",\n".join(f"{inner}{_json_render(v, indent + 1)}" for v in value)
        return "[\n" + items + "\n" + pad + "]"
    return _json_scalar(value)


def render_csv(artifact: Artifact) -> str:
    lines = [f"# {key} = {_fmt_value(value)}" for key, value in artifact.meta.items()]
    lines.append(",".join(artifact.columns))
    for row in artifact.rows:
        lines.append(",".join(_fmt_value(v) for v in row))
    return "\n".join(lines) + "\n"


def render_json(artifact: Artifact) -> str:
    payload = {
        "meta": artifact.meta,
        "rows": [dict(zip(artifact.columns, row)) for row in artifact.rows],
    }
    return _json_render(payload, 0) + "\n"


def write_output(artifact: Artifact, fmt: OutputFormat, path: str) -> None:
    """Serialize the artifact; '-' writes to stdout (the data stream)."""
    text = render_csv(artifact) if fmt is OutputFormat.CSV else render_json(artifact)
    if path == "-":
        sys.stdout.write(text)
    else:
        try:
            Path(path).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot write output to '{path}': {exc}") from exc


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wvatilt",
        description=(
            "Tilt-sensitivity analysis of a birefringent-plate weak-value "
            "amplifier (angles in rad, lengths in m)"
        ),
    )
    parser.add_argument("--config", help="configuration file (dotted key = value)")
    parser.add_argument(
        "--format", choices=["csv", "json"], help="override output format"
    )
    parser.add_argument(
        "--output", default="-", help="artifact path ('-' = stdout, the default)"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    # The same options are accepted after the subcommand; SUPPRESS keeps a
    # value given before the subcommand from being clobbered by defaults.
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--config",
        default=argparse.SUPPRESS,
        help="configuration file (dotted key = value)",
    )
    common.add_argument(
        "--format",
        choices=["csv", "json"],
        default=argparse.SUPPRESS,
        help="override output format",
    )
    common.add_argument(
        "--output",
        default=argparse.SUPPRESS,
        help="artifact path ('-' = stdout, the default)",
    )

    overrides = argparse.ArgumentParser(add_help=False, parents=[common])
    overrides.add_argument("--epsilon", type=float, help="post-selection deviation, rad")
    overrides.add_argument(
        "--regime", choices=[r.value for r in Regime], help="polarizer convention"
    )
    overrides.add_argument("--k-sigma", type=float, help="boost strength k*sigma")

    p = sub.add_parser(
        "coherency", parents=[common], help="enumerate phase-matching angles"
    )
    p.add_argument("--min-theta", type=float, default=0.0)
    p.add_argument("--max-theta", type=float, default=1.0)
    p.add_argument(
        "--kind", choices=[k.value for k in PointKind], default="coherency"
    )

    p = sub.add_parser("sweep-theta", parents=[overrides], help="sweep incidence angle")
    p.add_argument("--theta-min", type=float, required=True)
    p.add_argument("--theta-max", type=float, required=True)
    p.add_argument("--points", type=int, default=201)
    p.add_argument("--slopes", action="store_true", help="include d<z>/dtheta")

    p = sub.add_parser(
        "sweep-epsilon", parents=[overrides], help="sweep post-selector angle"
    )
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--theta", type=float, help="fixed incidence angle, rad")
    group.add_argument("--point", type=int, help="coherency-point ordinal instead")
    p.add_argument("--epsilon-min", type=float, default=1e-4)
    p.add_argument("--epsilon-max", type=float, default=math.pi / 4)
    p.add_argument("--points", type=int, default=201)

    p = sub.add_parser(
        "density-map", parents=[overrides], help="|amplitude|^2 over (theta, z)"
    )
    p.add_argument("--theta-min", type=float, required=True)
    p.add_argument("--theta-max", type=float, required=True)
    p.add_argument("--theta-points", type=int, default=101)
    p.add_argument("--z-min", type=float, help="default: auto window")
    p.add_argument("--z-max", type=float)
    p.add_argument("--z-points", type=int, default=201)

    p = sub.add_parser(
        "probability-map",
        parents=[overrides],
        help="post-selection probability over (theta, epsilon)",
    )
    p.add_argument("--theta-min", type=float, required=True)
    p.add_argument("--theta-max", type=float, required=True)
    p.add_argument("--theta-points", type=int, default=101)
    p.add_argument("--epsilon-min", type=float, default=0.0)
    p.add_argument("--epsilon-max", type=float, default=math.pi / 2)
    p.add_argument("--epsilon-points", type=int, default=101)

    p = sub.add_parser(
        "optimize-epsilon",
        parents=[overrides],
        help="post-selector angle maximizing the pointer shift",
    )
    group = p.add_mutually_exclusive_group()
    group.add_argument("--point", type=int, default=1, help="coherency-point ordinal")
    group.add_argument("--first", type=int, help="optimize points 1..N")

    p = sub.add_parser(
        "sensitivity-table",
        parents=[overrides],
        help="tilt sensitivity vs epsilon at a coherency point",
    )
    p.add_argument("--point", type=int, default=7)
    p.add_argument(
        "--epsilons",
        default="0,0.5,1,1.5,2,4",
        help="comma-separated epsilon values in units of gamma/sigma",
    )

    p = sub.add_parser(
        "fit-boost", parents=[overrides], help="least-squares boost recovery"
    )
    p.add_argument("--data", required=True, help=f"CSV with header {MEASUREMENT_HEADER}")
    p.add_argument("--point", type=int, default=7)
    p.add_argument(
        "--free", default="k_sigma", help="comma list of free parameters"
    )
    p.add_argument("--initial-k-sigma", type=float, default=0.02)

    p = sub.add_parser(
        "synthesize", parents=[overrides], help="generate model measurement records"
    )
    p.add_argument("--point", type=int, default=7)
    p.add_argument("--offset-max", type=float, required=True, help="half-range, rad")
    p.add_argument("--points", type=int, default=25)
    p.add_argument("--noise-z", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--frames", type=int, default=500)

    return parser


def _load_config(args: argparse.Namespace) -> RunConfig:
    if args.config is None:
        config = default_config()
    else:
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config '{args.config}': {exc}") from exc
        config = parse_config(text)
    epsilon = getattr(args, "epsilon", None)
    regime = getattr(args, "regime", None)
    k_sigma = getattr(args, "k_sigma", None)
    return with_overrides(
        config,
        epsilon=epsilon,
        regime=None if regime is None else Regime(regime),
        k_sigma=k_sigma,
    )


def _meta(config: RunConfig, command: str, extra: dict[str, object]) -> dict[str, object]:
    meta: dict[str, object] = {"version": __version__, "command": command}
    for key, value in config_echo(config).items():
        meta[f"config.{key}"] = value
    for key, value in extra.items():
        meta[f"args.{key}"] = value
    return meta


# ---------------------------------------------------------------------------
# subcommand implementations
# ---------------------------------------------------------------------------

def _cmd_coherency(config: RunConfig, args: argparse.Namespace) -> Artifact:
    kind = PointKind(args.kind)
    points = locate_points(
        config.crystal,
        config.beam.vacuum_wavenumber,
        (args.min_theta, args.max_theta),
        kind,
    )
    rows = [
        (
            p.index,
            p.kind.value,
            p.theta,
            p.phase_cycles,
            p.gamma_o,
            p.gamma,
            p.classical_slope,
            p.phase_slope,
        )
        for p in points
    ]
    return Artifact(
        columns=[
            "index",
            "kind",
            "theta_rad",
            "phase_cycles",
            "gamma_o_m",
            "gamma_m",
            "classical_slope_m_per_rad",
            "phase_slope",
        ],
        rows=rows,
        meta=_meta(
            config,
            "coherency",
            {"min_theta": args.min_theta, "max_theta": args.max_theta, "kind": args.kind},
        ),
    )


def _cmd_sweep_theta(config: RunConfig, args: argparse.Namespace) -> Artifact:
    records = sweep_theta(
        config.crystal,
        config.beam.vacuum_wavenumber,
        (args.theta_min, args.theta_max),
        args.points,
        config.selection,
        config.beam,
        config.boost,
        include_slopes=args.slopes,
    )
    if all(r.z_exp is None for r in records):
        raise NumericalFailure(
            "post-selection probability below floor across the entire sweep"
        )
    columns = ["theta_rad", "z_exp_m", "probability", "gamma_o_m"]
    if args.slopes:
        columns.append("slope_m_per_rad")
        rows = [
            (r.theta, r.z_exp, r.probability, r.gamma_o, r.slope) for r in records
        ]
    else:
        rows = [(r.theta, r.z_exp, r.probability, r.gamma_o) for r in records]
    return Artifact(
        columns=columns,
        rows=rows,
        meta=_meta(
            config,
            "sweep-theta",
            {
                "theta_min": args.theta_min,
                "theta_max": args.theta_max,
                "points": args.points,
                "slopes": args.slopes,
            },
        ),
    )


def _resolve_point_theta(config: RunConfig, args: argparse.Namespace) -> float:
    if args.theta is not None:
        return args.theta
    cp = nth_point(config.crystal, config.beam.vacuum_wavenumber, args.point)
    return cp.theta


def _cmd_sweep_epsilon(config: RunConfig, args: argparse.Namespace) -> Artifact:
    theta = _resolve_point_theta(config, args)
    records = sweep_epsilon(
        config.crystal,
        config.beam.vacuum_wavenumber,
        theta,
        (args.epsilon_min, args.epsilon_max),
        args.points,
        config.selection.regime,
        config.beam,
        config.boost,
    )
    if all(r.z_exp is None for r in records):
        raise NumericalFailure(
            "post-selection probability below floor across the entire sweep"
        )
    return Artifact(
        columns=["epsilon_rad", "z_exp_m", "probability"],
        rows=[(r.epsilon, r.z_exp, r.probability) for r in records],
        meta=_meta(
            config,
            "sweep-epsilon",
            {
                "theta": theta,
                "epsilon_min": args.epsilon_min,
                "epsilon_max": args.epsilon_max,
                "points": args.points,
            },
        ),
    )


def _cmd_density_map(config: RunConfig, args: argparse.Namespace) -> Artifact:
    crystal, beam = config.crystal, config.beam
    k_o = beam.vacuum_wavenumber
    theta_axis = np.linspace(args.theta_min, args.theta_max, args.theta_points)
    if (args.z_min is None) != (args.z_max is None):
        raise ConfigError("--z-min and --z-max must be given together")
    if args.z_min is None:
        ips = [interaction_params(crystal, k_o, float(t)) for t in theta_axis]
        centers = [ip.gamma_common for ip in ips]
        pad = 6.0 * beam.sigma + max(abs(ip.gamma) for ip in ips)
        z_lo, z_hi = min(centers) - pad, max(centers) + pad
    else:
        z_lo, z_hi = args.z_min, args.z_max
    z_axis = np.linspace(z_lo, z_hi, args.z_points)
    dm = density_map(
        crystal, k_o, theta_axis, z_axis, config.selection, beam, config.boost
    )
    rows = [
        (float(t), float(z), float(dm.values[i, j]))
        for i, t in enumerate(dm.theta_axis)
        for j, z in enumerate(dm.z_axis)
    ]
    return Artifact(
        columns=["theta_rad", "z_m", "density_per_m"],
        rows=rows,
        meta=_meta(
            config,
            "density-map",
            {
                "theta_min": args.theta_min,
                "theta_max": args.theta_max,
                "theta_points": args.theta_points,
                "z_min": z_lo,
                "z_max": z_hi,
                "z_points": args.z_points,
            },
        ),
    )


def _cmd_probability_map(config: RunConfig, args: argparse.Namespace) -> Artifact:
    theta_axis = np.linspace(args.theta_min, args.theta_max, args.theta_points)
    epsilon_axis = np.linspace(args.epsilon_min, args.epsilon_max, args.epsilon_points)
    pm = probability_map(
        config.crystal,
        config.beam.vacuum_wavenumber,
        theta_axis,
        epsilon_axis,
        config.selection.regime,
        config.beam,
        config.boost,
    )
    rows = [
        (float(t), float(e), float(pm.values[i, j]))
        for i, t in enumerate(pm.theta_axis)
        for j, e in enumerate(pm.epsilon_axis)
    ]
    return Artifact(
        columns=["theta_rad", "epsilon_rad", "probability"],
        rows=rows,
        meta=_meta(
            config,
            "probability-map",
            {
                "theta_min": args.theta_min,
                "theta_max": args.theta_max,
                "theta_points": args.theta_points,
                "epsilon_min": args.epsilon_min,
                "epsilon_max": args.epsilon_max,
                "epsilon_points": args.epsilon_points,
            },
        ),
    )


def _cmd_optimize_epsilon(config: RunConfig, args: argparse.Namespace) -> Artifact:
    indices = range(1, args.first + 1) if args.first else [args.point]
    rows = []
    for n in indices:
        cp = nth_point(config.crystal, config.beam.vacuum_wavenumber, n)
        eps_star, shift_star = optimal_epsilon(
            config.crystal,
            config.beam.vacuum_wavenumber,
            cp,
            config.beam,
            config.boost,
        )
        rows.append((n, cp.theta, cp.gamma, eps_star, shift_star))
    return Artifact(
        columns=["point", "theta_rad", "gamma_m", "epsilon_star_rad", "shift_star_m"],
        rows=rows,
        meta=_meta(
            config,
            "optimize-epsilon",
            {"point": args.point, "first": args.first},
        ),
    )


def _cmd_sensitivity_table(config: RunConfig, args: argparse.Namespace) -> Artifact:
    try:
        multipliers = [float(tok) for tok in args.epsilons.split(",") if tok.strip()]
    except ValueError as exc:
        raise ConfigError(f"--epsilons must be comma-separated numbers: {exc}") from exc
    if not multipliers:
        raise ConfigError("--epsilons must list at least one value")
    cp = nth_point(config.crystal, config.beam.vacuum_wavenumber, args.point)
    x = cp.gamma / config.beam.sigma
    rows = []
    for mult in multipliers:
        eps = mult * x
        sel = SelectionSpec(epsilon=eps, regime=config.selection.regime)
        slope = tilt_sensitivity(
            config.crystal,
            config.beam.vacuum_wavenumber,
            config.beam,
            sel,
            config.boost,
            cp.theta,
        )
        rows.append((args.point, mult, eps, slope))
    return Artifact(
        columns=["point", "epsilon_gamma_sigma_units", "epsilon_rad", "slope_m_per_rad"],
        rows=rows,
        meta=_meta(
            config,
            "sensitivity-table",
            {"point": args.point, "epsilons": args.epsilons},
        ),
    )


def _cmd_fit_boost(config: RunConfig, args: argparse.Namespace) -> Artifact:
    try:
        samples = read_measurements(args.data)
    except OSError as exc:
        raise ConfigError(f"cannot read data '{args.data}': {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"bad measurement file '{args.data}': {exc}") from exc
    free = tuple(tok.strip() for tok in args.free.split(",") if tok.strip())
    cp = nth_point(config.crystal, config.beam.vacuum_wavenumber, args.point)
    try:
        result = fit_boost(
            config.crystal,
            config.beam.vacuum_wavenumber,
            samples,
            cp,
            config.selection,
            config.beam,
            free=free,
            initial={"k_sigma": args.initial_k_sigma},
        )
    except RankDeficientFitError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    divergence = (result.k_sigma_hat / config.beam.sigma) / config.beam.vacuum_wavenumber
    columns = [
        "k_sigma_hat",
        "residual_rms_m",
        "iterations",
        "converged",
        "divergence_rad",
    ]
    row = [
        result.k_sigma_hat,
        result.residual_rms,
        result.iterations,
        result.converged,
        divergence,
    ]
    for name in free:
        if name != "k_sigma":
            columns.append(f"{name}_hat")
            row.append(result.parameters[name])
    return Artifact(
        columns=columns,
        rows=[tuple(row)],
        meta=_meta(
            config,
            "fit-boost",
            {
                "data": args.data,
                "point": args.point,
                "free": ",".join(free),
                "initial_k_sigma": args.initial_k_sigma,
            },
        ),
    )


def _cmd_synthesize(config: RunConfig, args: argparse.Namespace) -> Artifact:
    cp = nth_point(config.crystal, config.beam.vacuum_wavenumber, args.point)
    offsets = np.linspace(-args.offset_max, args.offset_max, args.points)
    samples = synthesize_measurements(
        config.crystal,
        config.beam.vacuum_wavenumber,
        cp,
        config.selection,
        config.beam,
        config.boost,
        offsets,
        noise_z=args.noise_z,
        seed=args.seed,
        frame_count=args.frames,
    )
    return Artifact(
        columns=MEASUREMENT_HEADER.split(","),
        rows=[(s.theta_offset, s.z_mean, s.z_stddev, s.frame_count) for s in samples],
        meta=_meta(
            config,
            "synthesize",
            {
                "point": args.point,
                "offset_max": args.offset_max,
                "points": args.points,
                "noise_z": args.noise_z,
                "seed": args.seed,
                "frames": args.frames,
            },
        ),
    )


_COMMANDS = {
    "coherency": _cmd_coherency,
    "sweep-theta": _cmd_sweep_theta,
    "sweep-epsilon": _cmd_sweep_epsilon,
    "density-map": _cmd_density_map,
    "probability-map": _cmd_probability_map,
    "optimize-epsilon": _cmd_optimize_epsilon,
    "sensitivity-table": _cmd_sensitivity_table,
    "fit-boost": _cmd_fit_boost,
    "synthesize": _cmd_synthesize,
}


def run_command(command: str, config: RunConfig, args: argparse.Namespace) -> Artifact:
    """Execute one subcommand against a resolved configuration."""
    return _COMMANDS[command](config, args)


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code if isinstance(exc.code, int) else EXIT_CONFIG
        return EXIT_CONFIG if code not in (0,) else 0
    try:
        config = _load_config(args)
        artifact = run_command(args.command, config, args)
        fmt = config.output_format if args.format is None else OutputFormat(args.format)
        write_output(artifact, fmt, args.output)
    except (
        NumericalFailure,
        DegeneratePostSelection,
        PointNotFoundError,
        RankDeficientFitError,
        GridTooCoarseError,
    ) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


def console_entry() -> None:  # pragma: no cover - thin wrapper
    sys.exit(main())
