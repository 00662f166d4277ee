"""hybridqed command-line entry point.

Every subcommand resolves a parameter set from a preset or a TOML
configuration file, runs one service and writes CSV headed by a run manifest.
Exit codes: 0 success, 1 physics or numerical error, 2 usage error.
"""

import argparse
import sys
from collections.abc import Callable, Sequence
from typing import Any

import numpy as np

from src.cli.csv_writer import Cell, emit_csv
from src.lib.config import settings
from src.lib.exceptions import HybridQEDException
from src.lib.logger import get_logger, get_run_id, set_run_id, setup_logging
from src.models.config_file import load_config_file
from src.models.manifest import RunManifest
from src.models.params import DriveConfig, GridSpec, SystemParams, TauGridSpec
from src.models.presets import PRESET_NAMES, Preset, list_presets, load_preset
from src.services.fluctuation_service import g2_of_tau, temperature_trend
from src.services.parameter_service import ensure_valid
from src.services.probe_response_service import sweep_response
from src.services.steady_state_service import bistability_scan, solve_steady_state
from src.services.time_domain_service import validate_suite

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

RESPONSE_COLUMNS = (
    "delta_rad_s",
    "delta_norm",
    "mu_p",
    "nu_p",
    "re_c_minus",
    "im_c_minus",
    "re_c_plus",
    "im_c_plus",
    "transmission",
    "phase_rad",
    "method_deviation",
    "flag",
)
STEADY_COLUMNS = (
    "re_c0",
    "im_c0",
    "abs_c0_sq",
    "q0",
    "delta3",
    "residual",
    "n_branches",
    "selected_index",
    "stable",
)
G2_COLUMNS = ("tau_s", "g2", "y14", "re_y13", "im_y13", "re_y12", "im_y12", "quad_err", "flag")
VALIDATE_COLUMNS = (
    "preset",
    "variant",
    "check",
    "delta_rad_s",
    "re_frequency_domain",
    "im_frequency_domain",
    "re_time_domain",
    "im_time_domain",
    "deviation",
    "passed",
    "error",
)
BISTABILITY_COLUMNS = (
    "omega_drive_rad_s",
    "n_roots",
    "intensity_0",
    "stable_0",
    "intensity_1",
    "stable_1",
    "intensity_2",
    "stable_2",
    "selected_index",
)
TREND_COLUMNS = ("temperature_k", "max_abs_dev", "min_g2", "g2_zero", "non_increasing")

_SOURCE_COMMANDS = frozenset({"steady", "response", "g2", "bistability", "trend"})


def _floats(text: str, count: int, name: str) -> list[str]:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != count:
        raise argparse.ArgumentTypeError(f"{name} expects {count} comma-separated values, got '{text}'")
    return parts


def parse_grid(text: str) -> GridSpec:
    """'center,span,npoints' in rad/s."""
    center, span, npoints = _floats(text, 3, "--grid")
    try:
        return GridSpec(center=float(center), span=float(span), npoints=int(npoints))
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"invalid --grid '{text}': {e}") from e


def parse_tau(text: str) -> TauGridSpec:
    """'max,npoints' or 'max,npoints,log'."""
    parts = [p.strip() for p in text.split(",")]
    if len(parts) not in (2, 3) or (len(parts) == 3 and parts[2] != "log"):
        raise argparse.ArgumentTypeError(f"--tau expects max,npoints[,log], got '{text}'")
    try:
        return TauGridSpec(tau_max=float(parts[0]), npoints=int(parts[1]), log=len(parts) == 3)
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"invalid --tau '{text}': {e}") from e


def parse_range(text: str) -> list[float]:
    """'start,stop,npoints' in rad/s."""
    start, stop, npoints = _floats(text, 3, "--range")
    try:
        count = int(npoints)
        if count < 1:
            raise ValueError("npoints must be positive")
        return np.linspace(float(start), float(stop), count).tolist()
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"invalid --range '{text}': {e}") from e


def parse_temperatures(text: str) -> list[float]:
    """Comma-separated temperatures in kelvin."""
    try:
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"invalid --temperatures '{text}': {e}") from e


# Options accepted both before and after the subcommand
_COMMON_OPTIONS = ("config", "chi_literal", "threads", "seed", "log_level")


def _common_options() -> argparse.ArgumentParser:
    """Parent parser for the global flags; SUPPRESS keeps a subparser from resetting them."""
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="TOML configuration file used instead of --preset")
    chi = common.add_mutually_exclusive_group()
    chi.add_argument(
        "--chi-literal",
        dest="chi_literal",
        action="store_const",
        const=True,
        help="Take caption chi values as printed (the default)",
    )
    chi.add_argument(
        "--chi-angular",
        dest="chi_literal",
        action="store_const",
        const=False,
        help="Read caption chi values as chi/2pi and multiply them by 2*pi",
    )
    common.add_argument("--threads", type=int, help="Worker threads")
    common.add_argument("--seed", type=int, help="Reserved; every pipeline is deterministic")
    common.add_argument(
        "--log-level",
        choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
        help="Override the configured log level",
    )
    return common


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with global flags and one subparser per subcommand."""
    common = _common_options()
    parser = argparse.ArgumentParser(
        prog="hybridqed",
        description="Probe response, photon statistics and validation of a driven cavity "
        "coupled to a mechanical resonator and a qubit",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        parents=[common],
        epilog="""
Examples:
  # List the figure presets
  hybridqed presets

  # Probe sweep with both methods
  hybridqed response --preset fig2 --variant iii --method both --out fig2_iii.csv

  # g2(tau) for the weak-drive study
  hybridqed g2 --preset fig6 --tau 3.2e-5,200

  # Time-domain cross-check of every preset
  hybridqed validate --preset all --threads 4 --out report.csv
        """,
    )

    subparsers = parser.add_subparsers(dest="command", help="Command to execute")

    def add_command(name: str, help_text: str) -> argparse.ArgumentParser:
        return subparsers.add_parser(name, help=help_text, parents=[common])

    def source_args(sub: argparse.ArgumentParser) -> None:
        sub.add_argument("--preset", choices=PRESET_NAMES, help="Figure preset")
        sub.add_argument("--variant", help="Variant label (default: last in caption order)")
        sub.add_argument("--out", help="Output CSV (default: stdout)")

    steady = add_command("steady", "Zeroth-order steady state as one CSV row")
    source_args(steady)

    response = add_command("response", "Probe response sweep")
    source_args(response)
    response.add_argument(
        "--method",
        choices=["closed", "solve", "both"],
        default="closed",
        help="Closed form, linear solve or both (default: closed)",
    )
    response.add_argument("--grid", type=parse_grid, help="center,span,npoints in rad/s")

    g2 = add_command("g2", "Second-order coherence g2(tau) of the output field")
    source_args(g2)
    g2.add_argument("--tau", type=parse_tau, help="max,npoints[,log] in seconds")
    g2.add_argument("--temperature", type=float, help="Bath temperature in kelvin")
    g2.add_argument(
        "--e-form",
        choices=["validated", "as_printed"],
        default="validated",
        help="Sign of the Lambda3 term in E(omega) (default: validated)",
    )
    g2.add_argument(
        "--method",
        choices=["poles", "quadrature"],
        default="poles",
        help="Closed-form pole sums or adaptive quadrature for y12 and y13 (default: poles)",
    )

    validate = add_command("validate", "Time-domain cross-validation")
    validate.add_argument("--preset", default="all", help="'all' or a preset name")
    validate.add_argument("--variant", help="Single variant (default: all)")
    validate.add_argument("--points", type=int, default=5, help="Probe detunings per variant")
    validate.add_argument("--out", help="Output CSV (default: stdout)")

    add_command("presets", "List the figure presets")

    bistability = add_command("bistability", "Intensity roots across drive frequencies")
    source_args(bistability)
    bistability.add_argument(
        "--range",
        type=parse_range,
        help="start,stop,npoints of omega_drive in rad/s (default: omega_c +- 10 gamma_c, 201 points)",
    )

    trend = add_command("trend", "Nonclassicality of g2 across temperatures")
    source_args(trend)
    trend.add_argument(
        "--temperatures",
        type=parse_temperatures,
        default=[0.0, 0.01, 0.1, 1.0],
        help="Ascending temperatures in kelvin (default: 0,0.01,0.1,1)",
    )
    trend.add_argument("--tau", type=parse_tau, help="max,npoints[,log] in seconds")

    return parser


def _load_source(args: argparse.Namespace) -> Preset:
    if args.config:
        return load_config_file(args.config, chi_literal=args.chi_literal)
    return load_preset(args.preset, chi_literal=args.chi_literal)


def _chi_reading(args: argparse.Namespace, preset: Preset | None) -> bool:
    if preset is not None:
        return preset.chi_literal
    return settings.chi_literal if args.chi_literal is None else args.chi_literal


def _manifest(
    args: argparse.Namespace,
    argv: Sequence[str],
    preset: Preset | None,
    variant: str | None,
    params: SystemParams | None,
    drive: DriveConfig | None,
    options: dict[str, Any],
    summary: dict[str, Any] | None = None,
) -> RunManifest:
    parameters: dict[str, Any] = {}
    if params is not None and drive is not None:
        parameters = {**params.model_dump(), **drive.model_dump()}
    return RunManifest(
        subcommand=args.command,
        argv=list(argv),
        source=args.config or (preset.name if preset else None),
        variant=variant,
        chi_literal=_chi_reading(args, preset),
        parameters=parameters,
        options={**options, "threads": args.threads, "seed": args.seed},
        run_id=get_run_id(),
        outputs=[args.out] if getattr(args, "out", None) else [],
        summary=summary or {},
    )


def _resolve(args: argparse.Namespace) -> tuple[Preset, str, SystemParams, DriveConfig]:
    preset = _load_source(args)
    label = args.variant or preset.variant_labels[-1]
    params, drive = preset.resolve(label)
    return preset, label, params, drive


def cmd_steady(args: argparse.Namespace, argv: Sequence[str]) -> int:
    """Solve the steady state and print one CSV row."""
    preset, label, params, drive = _resolve(args)
    ensure_valid(params, drive)
    steady = solve_steady_state(params, drive)
    row: list[Cell] = [
        steady.c0.real,
        steady.c0.imag,
        steady.intensity,
        steady.q0,
        steady.delta3,
        steady.residual,
        steady.n_branches,
        steady.selected_index,
        steady.stable,
    ]
    manifest = _manifest(args, argv, preset, label, params, drive, {})
    emit_csv([row], STEADY_COLUMNS, args.out, manifest)
    return EXIT_OK


def cmd_response(args: argparse.Namespace, argv: Sequence[str]) -> int:
    """Sweep the probe detuning."""
    preset, label, params, drive = _resolve(args)
    grid = args.grid or preset.grid
    sweep = sweep_response(params, drive, grid, args.method, threads=args.threads)

    delta_norm = sweep.delta_norm
    rows: list[list[Cell]] = []
    for i, response in enumerate(sweep.responses):
        c_plus = sweep.alternates[i].c_plus if sweep.alternates else response.c_plus
        rows.append(
            [
                float(sweep.detuning_grid[i]),
                float(delta_norm[i]),
                response.mu_p,
                response.nu_p,
                response.c_minus.real,
                response.c_minus.imag,
                c_plus.real,
                c_plus.imag,
                response.transmission,
                response.phase,
                float(sweep.deviation[i]),
                sweep.flags[i],
            ]
        )
    options = {"method": args.method, "grid": grid.model_dump()}
    emit_csv(rows, RESPONSE_COLUMNS, args.out, _manifest(args, argv, preset, label, params, drive, options))
    return EXIT_OK


def cmd_g2(args: argparse.Namespace, argv: Sequence[str]) -> int:
    """g2(tau) over a delay grid."""
    preset, label, params, drive = _resolve(args)
    if args.temperature is not None:
        drive = drive.model_copy(update={"temperature": args.temperature})
    tau_grid = args.tau or preset.tau_grid
    series = g2_of_tau(
        params, drive, tau_grid, e_form=args.e_form, method=args.method, threads=args.threads
    )

    rows: list[list[Cell]] = [
        [
            float(series.tau_grid[i]),
            float(series.g2_values[i]),
            series.y14,
            float(series.y13_of_tau[i].real),
            float(series.y13_of_tau[i].imag),
            float(series.y12_of_tau[i].real),
            float(series.y12_of_tau[i].imag),
            float(series.quadrature_error[i]),
            series.flags[i],
        ]
        for i in range(series.tau_grid.size)
    ]
    options = {"tau_grid": tau_grid.model_dump(), "e_form": args.e_form, "method": args.method}
    flux = series.flux
    summary = {
        "g2_zero": series.g2_zero,
        "min_g2": series.min_g2,
        "max_abs_deviation": series.max_abs_deviation,
        "antibunching_depth": series.antibunching_depth,
        "flux_coherent": flux.coherent,
        "flux_incoherent": flux.incoherent,
        "flux_total": flux.total,
        "method": series.method,
    }
    manifest = _manifest(args, argv, preset, label, params, drive, options, summary)
    emit_csv(rows, G2_COLUMNS, args.out, manifest)
    return EXIT_OK


def cmd_validate(args: argparse.Namespace, argv: Sequence[str]) -> int:
    """Time-domain cross-validation; exit 1 when any row fails."""
    names = list(PRESET_NAMES) if args.preset == "all" else [args.preset]
    report = validate_suite(
        names,
        args.variant,
        response_points=args.points,
        threads=args.threads,
        chi_literal=args.chi_literal,
    )

    rows: list[list[Cell]] = []
    for r in report.rows:
        fd, td = complex(r.frequency_domain), complex(r.time_domain)
        rows.append(
            [
                r.preset,
                r.variant,
                r.check,
                r.delta,
                fd.real,
                fd.imag,
                td.real,
                td.imag,
                r.deviation,
                r.passed,
                r.error,
            ]
        )
    manifest = _manifest(
        args, argv, None, args.variant, None, None, {"presets": names, "points": args.points}
    )
    emit_csv(rows, VALIDATE_COLUMNS, args.out, manifest)
    return EXIT_OK if report.all_passed else EXIT_FAILURE


def cmd_presets(args: argparse.Namespace, argv: Sequence[str]) -> int:
    """Print preset names, summaries and variant labels."""
    for name, summary in list_presets():
        variants = ", ".join(load_preset(name).variant_labels)
        print(f"{name:<6} {summary}")
        print(f"       variants: {variants}")
    return EXIT_OK


def cmd_bistability(args: argparse.Namespace, argv: Sequence[str]) -> int:
    """Scan the drive frequency and report every intensity root."""
    preset, label, params, drive = _resolve(args)
    ensure_valid(params, drive)
    scan = args.range or np.linspace(
        params.omega_cavity - 10.0 * params.gamma_cavity,
        params.omega_cavity + 10.0 * params.gamma_cavity,
        201,
    ).tolist()
    branches = bistability_scan(params, drive, scan, threads=args.threads)

    rows: list[list[Cell]] = []
    for b in branches:
        row: list[Cell] = [b.omega_drive, b.n_roots]
        for k in range(3):
            if k < b.n_roots:
                row.extend([b.intensities[k], b.stability_flags[k]])
            else:
                row.extend([float("nan"), ""])
        row.append(b.selected_index)
        rows.append(row)
    options = {"range": [scan[0], scan[-1], len(scan)]}
    emit_csv(rows, BISTABILITY_COLUMNS, args.out, _manifest(args, argv, preset, label, params, drive, options))
    return EXIT_OK


def cmd_trend(args: argparse.Namespace, argv: Sequence[str]) -> int:
    """max|g2 - 1| across bath temperatures."""
    preset, label, params, drive = _resolve(args)
    tau_grid = args.tau or preset.tau_grid
    report = temperature_trend(params, drive, args.temperatures, tau_grid, threads=args.threads)
    rows: list[list[Cell]] = [
        [p.temperature, p.max_abs_deviation, p.min_g2, p.g2_zero, report.non_increasing]
        for p in report.points
    ]
    options = {"temperatures": args.temperatures, "tau_grid": tau_grid.model_dump()}
    emit_csv(rows, TREND_COLUMNS, args.out, _manifest(args, argv, preset, label, params, drive, options))
    return EXIT_OK


COMMANDS: dict[str, Callable[[argparse.Namespace, Sequence[str]], int]] = {
    "steady": cmd_steady,
    "response": cmd_response,
    "g2": cmd_g2,
    "validate": cmd_validate,
    "presets": cmd_presets,
    "bistability": cmd_bistability,
    "trend": cmd_trend,
}


def run(argv: Sequence[str] | None = None) -> int:
    """
    Parse argv and dispatch to a subcommand.

    Returns:
        Exit code (0 ok, 1 physics or numerical error, 2 usage error)
    """
    arguments = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(arguments)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    for name in _COMMON_OPTIONS:
        setattr(args, name, getattr(args, name, None))

    if not args.command:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    if args.command in _SOURCE_COMMANDS and not (args.config or args.preset):
        print(f"ERROR: {args.command} needs --preset or --config", file=sys.stderr)
        return EXIT_USAGE

    setup_logging(args.log_level)
    set_run_id()
    logger.info(f"hybridqed {args.command}: {' '.join(arguments)}")
    try:
        return COMMANDS[args.command](args, arguments)
    except HybridQEDException as e:
        logger.error(f"{args.command} failed: {e.message}")
        print(f"ERROR: {e.message}", file=sys.stderr)
        return EXIT_FAILURE


def main() -> None:
    """Console-script entry point."""
    sys.exit(run())


if __name__ == "__main__":
    main()
