"""
NC-Chern - Main Entry Point

Command-line front-end: builds an ExperimentConfig from a config file and
flags, runs the named computation and writes a JSON document or CSV table.
"""

import argparse
import json
import logging
import math
import sys
from datetime import datetime, timezone
from typing import Any, Callable, Dict, List, Optional, Sequence, TextIO, Tuple

import numpy as np

from src import __version__
from src.algebra.clifford import build_clifford, graded_trace
from src.algebra.nctorus import DerivationKind, DerivationScheme
from src.builders.disorder import sample_disorder
from src.builders.hamiltonian import build_hamiltonian, fermi_projector
from src.calculators.chern import PhaseSettings, disorder_averaged_chern, kspace_chern, phase_diagram
from src.calculators.fredholm import index_estimate, schatten_profile
from src.calculators.localization import fractional_moment_fit, sobolev_continuity
from src.errors import ArgumentError, ChernToolError, ConfigError, InternalError
from src.models.results import IdentityCheck
from src.oracles.dixmier import dixmier_estimate
from src.oracles.identities import MAX_POINT_NORM, lemma3_lhs, lemma3_rhs, simplex_volume
from src.utils.config import (
    ExperimentConfig,
    RuntimeSettings,
    apply_overrides,
    check_resources,
    estimate_memory_gb,
    load_config,
    parse_config_data,
    projected_dimension,
)
from src.utils.logging_config import setup_logging
from src.utils.performance import format_perf_report, get_metrics
from src.writers.result_writer import write_csv, write_json


logger = logging.getLogger(__name__)

IDENTITY_TOLERANCES = {1: 1e-2, 2: 5e-2}
SIMPLEX_TOLERANCE = 1e-9
DIXMIER_TOLERANCE = 5e-2
DIXMIER_DEFAULT_RADIUS = {1: 256, 2: 16}
MIN_DETERMINANT = 0.25


def _float_list(text: str) -> List[float]:
    return [float(part) for part in text.split(",") if part.strip()]


def _int_list(text: str) -> List[int]:
    return [int(part) for part in text.split(",") if part.strip()]


def _flux_entry(text: str) -> Tuple[int, int, float]:
    try:
        i, j, value = text.split(",")
        return int(i), int(j), float(value)
    except ValueError as error:
        raise argparse.ArgumentTypeError(f"flux entry must look like I,J,VALUE, got '{text}'") from error


def _param(text: str) -> Tuple[str, float]:
    key, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"model parameter must look like KEY=VALUE, got '{text}'")
    return key.strip(), float(value)


def _common_parser() -> argparse.ArgumentParser:
    """Flags shared by every subcommand; all default to None so only explicit flags override the file."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML or JSON experiment file")
    common.add_argument("--model", help="Model name (chern2d, dirac4d, hofstadter2d, atomic)")
    common.add_argument("--param", action="append", type=_param, metavar="KEY=VALUE", help="Model parameter")
    common.add_argument("--n", type=int, help="Half-dimension of the Chern number")
    common.add_argument("--L", type=int, help="Linear volume size")
    common.add_argument("--boundary", choices=["open", "periodic"])
    common.add_argument("--flux", action="append", type=_flux_entry, metavar="I,J,VALUE",
                        help="Magnetic field entry B_ij (1-based, repeatable)")
    common.add_argument("--lambda", dest="lam", type=float, help="Disorder strength")
    common.add_argument("--fermi-energy", type=float)
    common.add_argument("--seeds", type=_int_list, help="Comma-separated seeds")
    common.add_argument("--seed0", type=int)
    common.add_argument("--seed-count", type=int)
    common.add_argument("--scheme", choices=[kind.value for kind in DerivationKind])
    common.add_argument("--core-fraction", type=float)
    common.add_argument("--output", "-o", help="Output file (stdout when omitted)")
    common.add_argument("--format", choices=["json", "csv"])
    common.add_argument("--workers", type=int, help="Worker processes (default CHERN_WORKERS)")
    common.add_argument("--plan", action="store_true", help="Print projected matrix sizes and exit")
    common.add_argument("--verbose", "-v", action="store_true", help="Enable verbose logging")
    return common


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subcommand per computation."""
    parser = argparse.ArgumentParser(
        prog="chern",
        description="NC-Chern - Non-commutative Chern numbers of disordered lattice models",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Clean Chern number from the Brillouin zone
  chern kspace --model chern2d --param m=1 --grid 64

  # Disorder-averaged real-space Chern number
  chern realspace --model chern2d --L 24 --lambda 2 --seed-count 10

  # Lemma check with 20 random point sets
  chern verify-identity --lemma 3 --n 1 --trials 20

  # Phase diagram from a committed experiment file
  chern phase-diagram --config experiments/phase.toml -o phase.csv
        """,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = _common_parser()
    commands = parser.add_subparsers(dest="command", required=True)

    kspace = commands.add_parser("kspace", parents=[common], help="Chern number of a clean model in momentum space")
    kspace.add_argument("--grid", type=int, help="Points per direction")
    kspace.add_argument("--method", dest="kspace_method", choices=["links", "analytic", "central"])

    commands.add_parser("realspace", parents=[common], help="Disorder-averaged real-space Chern number")

    index = commands.add_parser("index", parents=[common], help="Fredholm index from the truncated supertrace")
    index.add_argument("--radii", type=_float_list, help="Comma-separated increasing radii")
    index.add_argument("--x0", type=_float_list, help="Dirac offset in [0,1]^d")
    index.add_argument("--insertion", choices=["symmetric", "gamma1"])
    index.add_argument("--schatten", dest="schatten_qs", type=_float_list, help="Schatten exponents to tabulate")

    localization = commands.add_parser("localization", parents=[common], help="Fractional-moment decay fit")
    localization.add_argument("--s", type=float, help="Moment exponent in (0, 1)")
    localization.add_argument("--delta", type=float, help="Imaginary energy offset")
    localization.add_argument("--distances", type=_int_list)
    localization.add_argument("--beta-threshold", type=float)
    localization.add_argument("--lam-values", type=_float_list, help="Disorder strengths to sweep")

    sobolev = commands.add_parser("sobolev", parents=[common], help="Sobolev continuity of the Fermi projector")
    sobolev.add_argument("--perturbations", type=_float_list, help="Decreasing perturbation sizes")
    sobolev.add_argument("--deformation", choices=["hoppings", "fermi_energy", "disorder"])

    phase = commands.add_parser("phase-diagram", parents=[common], help="Chern number over an (m, lambda) grid")
    phase.add_argument("--m-values", type=_float_list)
    phase.add_argument("--lam-values", type=_float_list)

    verify = commands.add_parser("verify-identity", parents=[common], help="Quadrature checks of the identities")
    verify.add_argument("--lemma", type=int, choices=[3, 5])
    verify.add_argument("--trials", type=int)
    verify.add_argument("--quad-radius", type=float)
    verify.add_argument("--resolution", type=int)
    verify.add_argument("--r-max", type=int)
    return parser


CLI_ONLY = ("config", "param", "plan", "verbose", "command")


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    """File values first, explicit flags on top, subcommand always wins."""
    overrides: Dict[str, Any] = {key: value for key, value in vars(args).items() if key not in CLI_ONLY}
    if "lam" in overrides:
        overrides["lambda"] = overrides.pop("lam")
    if args.param:
        overrides["model_params"] = dict(args.param)
    overrides["command"] = args.command

    if args.config:
        base = load_config(args.config)
        if args.param:
            overrides["model_params"] = {**base.model_params, **dict(args.param)}
        return apply_overrides(base, overrides)
    return parse_config_data({key: value for key, value in overrides.items() if value is not None}, "command line")


def _scheme(config: ExperimentConfig, vol) -> Optional[DerivationScheme]:
    return DerivationScheme(DerivationKind(config.scheme), vol) if config.scheme else None


def _run_kspace(config: ExperimentConfig, workers: int):
    model = config.build_model()
    return kspace_chern(model, config.fermi_energy, config.n, config.grid, config.kspace_method), None


def _run_realspace(config: ExperimentConfig, workers: int):
    model = config.build_model()
    vol = config.build_volume(model)
    estimate = disorder_averaged_chern(
        model,
        vol,
        config.build_field(model.d),
        config.lam,
        config.fermi_energy,
        config.n,
        config.resolved_seeds,
        scheme_kind=DerivationKind(config.scheme) if config.scheme else None,
        core_fraction=config.core_fraction,
        workers=workers,
    )
    return estimate, None


def _run_index(config: ExperimentConfig, workers: int):
    model = config.build_model()
    vol = config.build_volume(model)
    B = config.build_field(model.d)
    rep = build_clifford(config.n)
    x0 = config.x0 if config.x0 is not None else [0.5] * model.d
    seeds = config.resolved_seeds

    first = None
    per_seed = []
    for seed in seeds:
        dis = sample_disorder(vol, model, config.lam, seed)
        projector = fermi_projector(build_hamiltonian(model, vol, B, dis), config.fermi_energy)
        estimate = index_estimate(projector, vol, rep, x0, config.radii, config.insertion)
        per_seed.append(
            {
                "seed": seed,
                "extrapolated": estimate.extrapolated,
                "nearest_integer": estimate.nearest_integer,
                "converged": estimate.converged,
            }
        )
        if first is None:
            first = (estimate, projector)

    estimate, projector = first
    result = estimate.to_dict()
    result["seed"] = seeds[0]
    result["per_seed"] = per_seed
    integers = {entry["nearest_integer"] for entry in per_seed}
    result["agree"] = len(integers) == 1 and None not in integers
    if not result["agree"]:
        message = f"Index integers do not agree across seeds {seeds}: {[entry['nearest_integer'] for entry in per_seed]}"
        result["warnings"].append(message)
        logger.warning(f"[WARN] {message}")
    if config.schatten_qs:
        result["schatten"] = schatten_profile(projector, vol, rep, x0, config.schatten_qs)
    return result, None


def _run_localization(config: ExperimentConfig, workers: int):
    model = config.build_model()
    vol = config.build_volume(model)
    lambdas = config.lam_values or [config.lam]
    fits = [
        fractional_moment_fit(
            model,
            vol,
            config.build_field(model.d),
            lam,
            config.fermi_energy,
            config.s,
            config.delta,
            config.resolved_seeds,
            config.distances,
            config.beta_threshold,
        )
        for lam in lambdas
    ]
    return {"fits": [fit.to_dict() for fit in fits]}, [fit.to_row() for fit in fits]


def _run_sobolev(config: ExperimentConfig, workers: int):
    model = config.build_model()
    vol = config.build_volume(model)
    report = sobolev_continuity(
        model,
        vol,
        config.fermi_energy,
        config.perturbations,
        config.n,
        config.resolved_seeds,
        lam=config.lam,
        kind=config.deformation,
        B=config.build_field(model.d),
        scheme=_scheme(config, vol),
    )
    return report, [row.to_row() for row in report.rows]


def _run_phase_diagram(config: ExperimentConfig, workers: int):
    model = config.build_model()
    vol = config.build_volume(model)
    settings = PhaseSettings(
        vol=vol,
        fermi_energy=config.fermi_energy,
        n=config.n,
        seeds=config.resolved_seeds,
        B=config.build_field(model.d),
        scheme_kind=DerivationKind(config.scheme) if config.scheme else None,
        core_fraction=config.core_fraction,
        model_params={key: value for key, value in config.model_params.items() if key != "m"},
    )
    grid = [(m, lam) for m in config.m_values for lam in (config.lam_values or [config.lam])]
    rows = phase_diagram(config.model, grid, settings, workers=workers)
    return {"rows": [row.to_row() for row in rows]}, [row.to_row() for row in rows]


def _random_points(rng: np.random.Generator, n: int) -> np.ndarray:
    """2n points in the allowed ball whose determinant is not too small."""
    bound = MAX_POINT_NORM / np.sqrt(2 * n)
    while True:
        points = rng.uniform(-bound, bound, size=(2 * n, 2 * n))
        if abs(np.linalg.det(points)) >= MIN_DETERMINANT:
            return points


def identity_checks(config: ExperimentConfig) -> List[IdentityCheck]:
    """Integral-identity and simplex-volume checks (--lemma 3), or the Dixmier estimator cases (--lemma 5)."""
    n = config.n
    rep = build_clifford(n)
    checks: List[IdentityCheck] = []
    if config.lemma == 3:
        if n > 2:
            raise ArgumentError(f"Integral identity check supports n <= 2, got n={n}", n=n)
        for trial in range(config.trials):
            rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([config.seed0, trial])))
            points = _random_points(rng, n)
            lhs = lemma3_lhs(rep, points, config.quad_radius, config.resolution).value
            checks.append(IdentityCheck("lemma3", n, trial, lhs, lemma3_rhs(points, rep), IDENTITY_TOLERANCES[n]))

            vectors = rng.standard_normal((2 * n, 2 * n))
            volume = simplex_volume(np.vstack([np.zeros(2 * n), vectors]))
            expected = rep.graded_constant * math.factorial(2 * n) * volume
            checks.append(IdentityCheck("simplex", n, trial, graded_trace(rep, vectors), expected, SIMPLEX_TOLERANCE))
        return checks

    if n > 2:
        raise ArgumentError(f"Dixmier estimator supports n <= 2, got n={n}", n=n)
    r_max = config.r_max or DIXMIER_DEFAULT_RADIUS[n]
    sphere = 2 * np.pi ** n / math.factorial(n - 1)
    constant = sphere / (2 * n)
    cases = [
        ("dixmier-constant", None, None, constant),
        ("dixmier-odd", None, lambda units: units[:, 0], 0.0),
        ("dixmier-uniform", lambda points, rng: rng.uniform(0.0, 1.0, len(points)), None, constant / 2),
    ]
    for trial, (name, f_values, phi, expected) in enumerate(cases):
        result = dixmier_estimate(f_values, phi, n, r_max, config.seed0)
        checks.append(IdentityCheck(name, n, trial, result.limit, expected, DIXMIER_TOLERANCE))
    return checks


def _run_verify_identity(config: ExperimentConfig, workers: int):
    checks = identity_checks(config)
    failed = [check for check in checks if not check.passed]
    for check in failed:
        logger.warning(f"[WARN] {check.check} trial {check.trial}: relative error {check.rel_error:.3g}")
    logger.info(f"[OK] {len(checks) - len(failed)}/{len(checks)} identity checks passed")
    rows = [check.to_row() for check in checks]
    return {"checks": rows, "passed": not failed}, rows


HANDLERS: Dict[str, Callable[[ExperimentConfig, int], Tuple[Any, Optional[List[Dict[str, Any]]]]]] = {
    "kspace": _run_kspace,
    "realspace": _run_realspace,
    "index": _run_index,
    "localization": _run_localization,
    "sobolev": _run_sobolev,
    "phase-diagram": _run_phase_diagram,
    "verify-identity": _run_verify_identity,
}


def plan(config: ExperimentConfig, settings: RuntimeSettings) -> Dict[str, Any]:
    dimension = projected_dimension(config)
    return {
        "command": config.command,
        "dimension": dimension,
        "memory_gb": round(estimate_memory_gb(dimension), 6),
        "cap": settings.max_dim,
        "within_cap": dimension <= settings.max_dim,
    }


def run(config: ExperimentConfig, settings: Optional[RuntimeSettings] = None, stream: Optional[TextIO] = None) -> int:
    """
    Execute one experiment and write its artifact.

    Returns:
        0 on success; 1 when verify-identity finds a failing check

    Raises:
        ChernToolError: Resource refusal or computational failure
    """
    settings = settings or RuntimeSettings()
    stream = stream or sys.stdout
    check_resources(config, settings.max_dim)
    workers = config.workers if config.workers is not None else settings.workers

    logger.info(f"[...] Running {config.command} ({config.model}, n={config.n})")
    result, rows = HANDLERS[config.command](config, workers)

    if config.output_format == "csv":
        if rows is None:
            raise ArgumentError(f"Command {config.command} has no tabular output; use --format json")
        write_csv(config.command, rows, config.output, stream)
    else:
        write_json(config.command, config.echo(), result, config.output, stream)

    if config.command == "verify-identity" and not result["passed"]:
        return 1
    return 0


def _print_error(error: ChernToolError) -> None:
    print(json.dumps(error.to_dict(), sort_keys=True), file=sys.stdout)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Main entry point for the chern command.

    Returns:
        Exit code (0 success, 1 failed check or unexpected error, 2 tool error, 130 interrupt)
    """
    args = build_parser().parse_args(argv)

    try:
        settings = RuntimeSettings.from_env()
    except ConfigError as error:
        _print_error(error)
        return 2

    log_level = logging.DEBUG if args.verbose else getattr(logging, settings.log_level, logging.INFO)
    setup_logging(level=log_level, log_dir=settings.log_dir)

    logger.info("=" * 60)
    logger.info(f"NC-Chern {__version__} - {args.command}")
    logger.info(f"Timestamp: {datetime.now(timezone.utc).isoformat()}")
    logger.info("=" * 60)

    try:
        config = config_from_args(args)
        if args.plan:
            print(json.dumps(plan(config, settings), sort_keys=True))
            return 0
        status = run(config, settings)

    except KeyboardInterrupt:
        logger.warning("[WARN] Operation interrupted by user")
        return 130

    except ChernToolError as error:
        logger.error(f"[ERROR] {error.code}: {error}")
        _print_error(error)
        return 2

    except Exception as error:
        logger.error(f"[ERROR] Operation failed: {error}", exc_info=True)
        _print_error(InternalError(str(error), type=type(error).__name__))
        return 1

    if args.verbose:
        logger.info(format_perf_report())
        get_metrics().clear()
    logger.info(f"[DONE] {args.command} finished with status {status}")
    return status


if __name__ == "__main__":
    sys.exit(main())
