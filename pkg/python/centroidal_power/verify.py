"""Verification suite: closed-form constants and oracle cross-checks.

Every check is quick (well under a minute in total) and compares a solver
output with an independent value.
"""

import logging
import math
from collections.abc import Callable
from fractions import Fraction

import numpy as np

from .energy import (
    C6,
    HEX_DENSITY,
    cell_moments,
    energy_measure,
    generator_arrays,
    hexagonal_reference,
    solve_weights,
)
from .geometry import polygon_second_moment, power_cells, regular_polygon, unit_square
from .lloyd import lloyd_step
from .models import AtomicMeasure, CheckResult
from .oracle import cvt_fixture_energies, cvt_fixture_generators, discrete_ot, grid_measure, solve_1d

logger = logging.getLogger(__name__)

# Honeycomb density as printed to seven digits.
PRINTED_DENSITY = 0.4685737


def _check(name: str, observed: float, expected: float, tolerance: float, detail: str = "") -> CheckResult:
    return CheckResult(
        name=name,
        passed=bool(abs(observed - expected) <= tolerance),
        observed=float(observed),
        expected=float(expected),
        tolerance=tolerance,
        detail=detail,
    )


def check_hexagon_constant() -> list[CheckResult]:
    hexagon = regular_polygon(6, area=1.0)
    return [
        _check("hexagon second moment = 5 sqrt(3)/54", polygon_second_moment(hexagon, (0.0, 0.0)), C6, 1e-12)
    ]


def check_density_constant() -> list[CheckResult]:
    results = []
    for lam in (1.0, 0.1, 0.005):
        density = hexagonal_reference(lam, 1.0).expected_cells * lam ** (2.0 / 3.0)
        results.append(_check(f"honeycomb density at lambda={lam:g}", density, HEX_DENSITY, 1e-10))
    results.append(_check("honeycomb density vs printed value", HEX_DENSITY, PRINTED_DENSITY, 5e-8))
    return results


def check_single_atom() -> list[CheckResult]:
    square = unit_square()
    nu = AtomicMeasure.from_arrays(np.array([[0.5, 0.5]]), np.array([1.0]))
    exact = energy_measure(nu, square, 0.0).total
    cost, _ = discrete_ot(grid_measure(square, 64), nu)
    return [
        _check("single-atom transport (power cells)", exact, 1.0 / 6.0, 1e-12),
        _check("single-atom transport (64x64 discrete OT)", cost, 1.0 / 6.0, 2e-3),
    ]


def check_one_dimensional() -> list[CheckResult]:
    solution = solve_1d(Fraction(1, 6000), 2)
    return [
        _check("1-D optimal cell count at lambda=1/6000", solution.m_opt, 10, 0),
        _check("1-D optimal energy at lambda=1/6000", solution.energy, 0.0025, 0.0),
    ]


def check_cvt_fixtures() -> list[CheckResult]:
    square = unit_square()
    energies = cvt_fixture_energies()
    results = [
        _check("2x2 CVT energy", energies["2x2"], 1.0 / 24.0, 1e-12),
        _check("4-strip CVT energy", energies["4-strips"], 17.0 / 192.0, 1e-12),
    ]
    for name in ("2x2", "4-strips"):
        gens = cvt_fixture_generators(name)
        moved, _ = lloyd_step(gens, square, 0.0)
        before, _ = generator_arrays(gens)
        after, _ = generator_arrays(moved)
        results.append(
            _check(f"{name} CVT is a Lloyd fixed point", float(np.abs(after - before).max()), 0.0, 1e-12)
        )
    return results


def check_oracle_equivalence(seed: int = 0, atoms: int = 3, resolution: int = 64) -> list[CheckResult]:
    """Power-cell transport cost against brute-force discrete OT for a random measure."""
    square = unit_square()
    rng = np.random.default_rng(seed)
    sites = rng.uniform(0.1, 0.9, size=(atoms, 2))
    masses = rng.uniform(0.5, 1.5, size=atoms)
    nu = AtomicMeasure.from_arrays(sites, masses / masses.sum())
    weights = np.asarray(solve_weights(nu, square).weights)
    _, costs, _ = cell_moments(sites, power_cells(sites, weights, square))
    cost, _ = discrete_ot(grid_measure(square, resolution), nu)
    return [
        _check(
            f"{atoms} random atoms: power cells vs {resolution}x{resolution} discrete OT",
            cost,
            math.fsum(costs.tolist()),
            2e-3,
            detail=f"seed={seed}",
        )
    ]


CHECKS: tuple[Callable[[], list[CheckResult]], ...] = (
    check_hexagon_constant,
    check_density_constant,
    check_single_atom,
    check_one_dimensional,
    check_cvt_fixtures,
    check_oracle_equivalence,
)


def run_verification() -> list[CheckResult]:
    """Run every check and return the results in a fixed order."""
    results: list[CheckResult] = []
    for check in CHECKS:
        results.extend(check())
    failed = sum(1 for r in results if not r.passed)
    logger.info(f"Verification: {len(results) - failed}/{len(results)} checks passed")
    return results


def format_table(results: list[CheckResult]) -> str:
    """Plain-text pass/fail table."""
    width = max(len(r.name) for r in results)
    lines = [f"{'check':<{width}}  result  observed            expected"]
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        lines.append(f"{r.name:<{width}}  {status:<6}  {r.observed:<18.12g}  {r.expected:.12g}")
    return "\n".join(lines)
