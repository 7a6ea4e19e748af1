"""Command-line front end: run Lloyd minimisations, searches, sweeps and the verification suite.

Examples:
    centroidal-power --mode lloyd --lambda 0.1 --cells 3 --seed 7 --out results/lloyd
    centroidal-power --mode sweep --lambda 0.1 0.026 0.005 --restarts 50 --out results/sweep
    centroidal-power --mode verify

Exit status is 0 on success, 1 when a solver fails or a verification check
fails, and 2 for an invalid run specification. Errors are printed to stderr
as JSON ``{"error": ..., "message": ..., "details": ...}``.
"""

import argparse
import json
import logging
import sys
from collections.abc import Sequence
from pathlib import Path

from pydantic import ValidationError

from .energy import hexagonal_reference
from .errors import CentroidalPowerError, ConfigError, InvalidDomain
from .export import (
    lloyd_result_to_dict,
    search_result_to_dict,
    write_candidates_csv,
    write_json,
    write_metadata,
    write_svg,
    write_trace_csv,
)
from .geometry import polygon_area, power_diagram
from .lloyd import run_lloyd
from .models import ConvexPolygon, LloydConfig, OutputFormat, RunMode, RunSpec, SearchConfig
from .search import estimate_cell_count, genetic_search, random_init
from .utils import lambda_label, parse_domain
from .verify import format_table, run_verification

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2


def validate_spec(spec: RunSpec) -> list[str]:
    """List every violated constraint of a run specification without running it.

    Returns:
        Human-readable violations; empty for a valid spec
    """
    problems: list[str] = []
    try:
        parse_domain(spec.domain)
    except InvalidDomain as e:
        problems.extend(f"domain: {v}" for v in e.details.get("violations", [str(e)]))

    lambdas = spec.lambdas
    if spec.mode is RunMode.LLOYD:
        if len(lambdas) != 1:
            problems.append(f"lloyd mode needs exactly one lambda, got {len(lambdas)}")
        elif lambdas[0] < 0.0:
            problems.append(f"lambda must be >= 0 for lloyd mode, got {lambdas[0]}")
        elif lambdas[0] == 0.0 and spec.cells is None:
            problems.append("lloyd mode with lambda = 0 needs --cells")
    elif spec.mode is RunMode.SEARCH:
        if len(lambdas) != 1:
            problems.append(f"search mode needs exactly one lambda, got {len(lambdas)}")
        elif lambdas[0] <= 0.0:
            problems.append(f"lambda must be > 0 for search mode, got {lambdas[0]}")
    elif spec.mode is RunMode.SWEEP:
        if not lambdas:
            problems.append("sweep mode needs at least one lambda")
        problems.extend(f"lambda must be > 0 for sweep mode, got {lam}" for lam in lambdas if lam <= 0.0)

    if spec.cells is not None and spec.cells < 1:
        problems.append(f"cells must be >= 1, got {spec.cells}")
    if spec.seed < 0:
        problems.append(f"seed must be >= 0, got {spec.seed}")
    for name in ("restarts", "max_iterations", "round_iterations", "rounds"):
        if getattr(spec, name) < 1:
            problems.append(f"{name} must be >= 1, got {getattr(spec, name)}")
    if spec.tolerance <= 0.0:
        problems.append(f"tolerance must be > 0, got {spec.tolerance}")
    if spec.interval_coefficient <= 0.0:
        problems.append(f"interval coefficient must be > 0, got {spec.interval_coefficient}")
    if spec.workers is not None and spec.workers < 1:
        problems.append(f"workers must be >= 1, got {spec.workers}")
    if spec.mode is not RunMode.VERIFY and not spec.formats:
        problems.append("at least one output format is required")
    return problems


def run(spec: RunSpec) -> int:
    """Execute a run specification and write its artifacts.

    Args:
        spec: What to run and where to write results

    Returns:
        int: Process exit status

    Raises:
        ConfigError: If the spec is invalid
        CentroidalPowerError: Propagated solver errors
    """
    problems = validate_spec(spec)
    if problems:
        raise ConfigError(f"invalid run specification: {'; '.join(problems)}", violations=problems)

    domain = parse_domain(spec.domain)
    out = spec.output_dir
    status = EXIT_OK

    if spec.mode is RunMode.VERIFY:
        results = run_verification()
        print(format_table(results))
        if OutputFormat.JSON in spec.formats:
            write_json({"checks": [r.model_dump() for r in results]}, out / "verification.json")
        status = EXIT_OK if all(r.passed for r in results) else EXIT_FAILURE
    elif spec.mode is RunMode.LLOYD:
        _run_lloyd(spec, domain, out)
    elif spec.mode is RunMode.SEARCH:
        _run_search(spec, domain, spec.lambdas[0], out)
    else:
        for lam in spec.lambdas:
            _run_search(spec, domain, lam, out / lambda_label(lam))

    write_metadata(out, mode=spec.mode.value, spec=spec.model_dump(mode="json", by_alias=True))
    return status


def _run_lloyd(spec: RunSpec, domain: ConvexPolygon, out: Path) -> None:
    lam = spec.lambdas[0]
    cells = spec.cells
    if cells is None:
        cells = max(1, round(estimate_cell_count(lam, polygon_area(domain))))
    config = LloydConfig(lam=lam, max_iterations=spec.max_iterations, displacement_tolerance=spec.tolerance)
    result = run_lloyd(random_init(cells, domain, spec.seed), domain, config)
    print(
        f"lambda={lam:g}: {len(result.final_generators)} cells, E={result.energy.total:.12g}, "
        f"converged={result.converged} after {result.iterations} iterations"
    )
    if OutputFormat.JSON in spec.formats:
        write_json(lloyd_result_to_dict(result, domain, spec.seed), out / "result.json")
    if OutputFormat.CSV in spec.formats:
        write_trace_csv(result.trace, out / "trace.csv")
    if OutputFormat.SVG in spec.formats:
        write_svg(power_diagram(result.final_generators, domain), out / "diagram.svg")


def _run_search(spec: RunSpec, domain: ConvexPolygon, lam: float, out: Path) -> None:
    config = SearchConfig(
        lam=lam,
        interval_coefficient=spec.interval_coefficient,
        replicas=spec.restarts,
        round_iterations=spec.round_iterations,
        rounds=spec.rounds,
        seed=spec.seed,
        workers=spec.workers,
    )
    result = genetic_search(domain, config)
    best = result.best
    ref = hexagonal_reference(lam, polygon_area(domain))
    print(
        f"lambda={lam:g}: best {best.cell_count} cells, E={best.energy.total:.12g} "
        f"(honeycomb {ref.total_energy:.12g}), rescaled {best.rescaled_energy:.6g}, "
        f"sides {result.side_histogram}"
    )
    if OutputFormat.JSON in spec.formats:
        write_json(search_result_to_dict(result, domain, spec.seed), out / "result.json")
    if OutputFormat.CSV in spec.formats:
        write_candidates_csv(result, out / "candidates.csv")
    if OutputFormat.SVG in spec.formats:
        write_svg(power_diagram(best.generators, domain), out / "diagram.svg")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="centroidal-power",
        description="Centroidal power diagrams: generalised Lloyd runs, multistart searches and verification.",
    )
    parser.add_argument("--mode", required=True, choices=[m.value for m in RunMode], help="What to run.")
    parser.add_argument(
        "--lambda", dest="lambdas", type=float, nargs="+", default=[], metavar="LAMBDA",
        help="Perimeter weight(s); one value for lloyd/search, several for sweep.",
    )
    parser.add_argument(
        "--domain", default="unit-square",
        help="Preset (unit-square, hexagon, triangle), rectangle:WxH, or a JSON vertex list.",
    )
    parser.add_argument("--seed", type=int, default=0, help="Master random seed (default: 0).")
    parser.add_argument("--restarts", type=int, default=50, help="Random starts per cell count, N_r (default: 50).")
    parser.add_argument("--max-iter", type=int, default=10_000, help="Lloyd iteration cap (default: 10000).")
    parser.add_argument("--tol", type=float, default=1e-10, help="Displacement tolerance relative to diam (default: 1e-10).")
    parser.add_argument("--round-iter", type=int, default=200, help="Lloyd iterations per search round (default: 200).")
    parser.add_argument("--rounds", type=int, default=5, help="Search refinement rounds (default: 5).")
    parser.add_argument("-C", "--interval", type=float, default=1.0, help="Cell-count interval coefficient C (default: 1.0).")
    parser.add_argument("--cells", type=int, help="Initial cell count for lloyd mode (default: honeycomb estimate).")
    parser.add_argument("--workers", type=int, help="Search process pool size (default: all cores).")
    parser.add_argument("--out", type=Path, default=Path("results"), help="Output directory (default: results).")
    parser.add_argument(
        "--format", dest="formats", nargs="+", choices=[f.value for f in OutputFormat],
        default=[f.value for f in OutputFormat], help="Artifact formats (default: all).",
    )
    parser.add_argument("--validate", action="store_true", help="Only list specification problems.")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for info, -vv for debug logging.")
    return parser


def spec_from_args(args: argparse.Namespace) -> RunSpec:
    try:
        return RunSpec(
            mode=args.mode,
            domain=args.domain,
            lambdas=tuple(args.lambdas),
            cells=args.cells,
            seed=args.seed,
            restarts=args.restarts,
            max_iterations=args.max_iter,
            tolerance=args.tol,
            round_iterations=args.round_iter,
            rounds=args.rounds,
            interval_coefficient=args.interval,
            workers=args.workers,
            output_dir=args.out,
            formats=tuple(args.formats),
        )
    except ValidationError as e:
        violations = [f"{'.'.join(map(str, err['loc']))}: {err['msg']}" for err in e.errors()]
        raise ConfigError(f"invalid arguments: {'; '.join(violations)}", violations=violations) from e


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    level = (logging.WARNING, logging.INFO, logging.DEBUG)[min(args.verbose, 2)]
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")

    try:
        spec = spec_from_args(args)
        if args.validate:
            problems = validate_spec(spec)
            print(json.dumps({"violations": problems}, indent=2))
            return EXIT_OK if not problems else EXIT_CONFIG
        return run(spec)
    except ConfigError as e:
        print(json.dumps(e.to_dict()), file=sys.stderr)
        return EXIT_CONFIG
    except CentroidalPowerError as e:
        logger.error(f"Run failed: {e}")
        print(json.dumps(e.to_dict(), default=str), file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
