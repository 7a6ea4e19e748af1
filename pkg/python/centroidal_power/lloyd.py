"""Generalised Lloyd iteration for centroidal power diagrams.

One step builds the power diagram, optionally drops generators whose cells are
empty, then moves every site to its cell centroid and resets every weight to
``-lambda / (2 sqrt|P_i|)``, all simultaneously. With ``lambda = 0`` the weights
stay zero and the scheme is the classical Lloyd algorithm for centroidal
Voronoi tessellations.

The energy never increases along the iteration; an increase beyond
``MONOTONE_SLACK`` is raised as ``NumericalRegression``.
"""

import logging
from collections.abc import Sequence

import numpy as np

from .energy import breakdown, cell_moments, el_residuals, generator_arrays, to_generators
from .errors import AllCellsEmpty, NumericalRegression
from .geometry import (
    assemble_diagram,
    check_distinct_sites,
    diameter,
    power_cells,
    radial_quadrature,
)
from .models import (
    DEGENERACY_TOLERANCE,
    ConvexPolygon,
    LloydConfig,
    LloydRecord,
    LloydResult,
    LloydTrace,
    PCentroidResult,
    Point2,
    PowerDiagram,
    WeightedGenerator,
)

logger = logging.getLogger(__name__)

MONOTONE_SLACK = 1e-12


def _update(
    sites: np.ndarray,
    weights: np.ndarray,
    areas: np.ndarray,
    centroids: np.ndarray,
    lam: float,
    delete_empty: bool,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Jacobi update of all generators; returns new sites, new weights and the kept mask."""
    live = areas > 0.0
    if not live.any():
        raise AllCellsEmpty(f"all {len(areas)} power cells are empty", generators=len(areas))
    keep = live if delete_empty else np.ones_like(live)
    new_sites = np.where(live[:, None], centroids, sites)
    if lam > 0.0:
        with np.errstate(divide="ignore"):
            new_weights = np.where(live, -0.5 * lam / np.sqrt(areas), weights)
    else:
        new_weights = np.where(live, 0.0, weights)
    return new_sites[keep], new_weights[keep], keep


def lloyd_step(
    gens: Sequence[WeightedGenerator],
    domain: ConvexPolygon,
    lam: float,
    delete_empty: bool = True,
) -> tuple[tuple[WeightedGenerator, ...], PowerDiagram]:
    """One generalised Lloyd step.

    Args:
        gens: Current generators (at least one)
        domain: Convex domain
        lam: Perimeter weight lambda (>= 0)
        delete_empty: Drop generators with empty cells; when False they are
            carried over unchanged

    Returns:
        The updated generators and the power diagram of the input generators

    Raises:
        AllCellsEmpty: If no cell is nonempty
    """
    if not gens:
        raise AllCellsEmpty("lloyd_step needs at least one generator", generators=0)
    sites, weights = generator_arrays(gens)
    check_distinct_sites(sites, DEGENERACY_TOLERANCE * diameter(domain))
    cells = power_cells(sites, weights, domain)
    areas, _, centroids = cell_moments(sites, cells)
    new_sites, new_weights, keep = _update(sites, weights, areas, centroids, lam, delete_empty)
    dropped = int(len(keep) - keep.sum())
    if dropped:
        logger.debug(f"Deleted {dropped} generators with empty cells")
    return to_generators(new_sites, new_weights), assemble_diagram(gens, cells, domain)


def run_lloyd(
    init_gens: Sequence[WeightedGenerator], domain: ConvexPolygon, config: LloydConfig
) -> LloydResult:
    """Iterate :func:`lloyd_step` to a fixed point.

    Stops once the largest site motion is below
    ``displacement_tolerance * diam(domain)`` and the energy decrease is below
    ``energy_tolerance``, or after ``max_iterations`` steps. Record 0 of the
    trace is the starting configuration.

    Args:
        init_gens: Starting generators
        domain: Convex domain
        config: Lloyd settings

    Returns:
        LloydResult: Final generators (empty cells pruned when deletion is on),
        the trace, the convergence flag and the Euler-Lagrange residuals

    Raises:
        NumericalRegression: If an iteration increases the energy by more than
            ``MONOTONE_SLACK``
        DuplicateSites: If two starting sites coincide

    Example:
        ```python
        gens = random_init(3, unit_square(), seed=7)
        result = run_lloyd(gens, unit_square(), LloydConfig(lam=0.1))
        print(result.energy.total, len(result.final_generators))
        ```
    """
    lam = config.lam
    diam = diameter(domain)
    sites, weights = generator_arrays(init_gens)
    check_distinct_sites(sites, DEGENERACY_TOLERANCE * diam)

    cells = power_cells(sites, weights, domain)
    areas, costs, centroids = cell_moments(sites, cells)
    energy = breakdown(lam, areas, costs)
    records = [
        LloydRecord(
            iteration=0,
            energy=energy,
            max_site_displacement=0.0,
            max_weight_change=0.0,
            live_cells=int(np.count_nonzero(areas)),
        )
    ]

    converged = False
    for iteration in range(1, config.max_iterations + 1):
        new_sites, new_weights, keep = _update(sites, weights, areas, centroids, lam, config.delete_empty)
        displacement = float(np.max(np.hypot(*(new_sites - sites[keep]).T)))
        weight_change = float(np.max(np.abs(new_weights - weights[keep])))
        sites, weights = new_sites, new_weights

        cells = power_cells(sites, weights, domain)
        areas, costs, centroids = cell_moments(sites, cells)
        previous = energy
        energy = breakdown(lam, areas, costs)
        delta = energy.total - previous.total
        if delta > MONOTONE_SLACK:
            raise NumericalRegression(
                f"energy increased by {delta:.3e} at iteration {iteration} "
                f"({previous.total:.15g} -> {energy.total:.15g})",
                iteration=iteration,
                delta=delta,
            )
        records.append(
            LloydRecord(
                iteration=iteration,
                energy=energy,
                max_site_displacement=displacement,
                max_weight_change=weight_change,
                live_cells=int(np.count_nonzero(areas)),
            )
        )
        logger.debug(
            f"Lloyd iteration {iteration}: E={energy.total:.15g}, disp={displacement:.3e}, "
            f"cells={records[-1].live_cells}"
        )
        if displacement < config.displacement_tolerance * diam and -delta < config.energy_tolerance:
            converged = True
            break

    if converged:
        logger.info(f"Lloyd converged after {records[-1].iteration} iterations, E={energy.total:.12g}")
    else:
        logger.info(f"Lloyd stopped at max_iterations={config.max_iterations} without converging")

    if config.delete_empty:
        live = areas > 0.0
        sites, weights = sites[live], weights[live]
    final = to_generators(sites, weights)
    if np.all(areas > 0.0) or config.delete_empty:
        residuals = el_residuals(final, domain, lam)
    else:
        logger.warning("Final configuration has empty cells; residuals not computed")
        residuals = ()

    return LloydResult(
        final_generators=final,
        trace=LloydTrace(records=tuple(records)),
        converged=converged,
        residuals=residuals,
    )


def p_centroid_step(
    sites: Sequence[Sequence[float]] | np.ndarray,
    domain: ConvexPolygon,
    p: float,
    refine: int | None = None,
) -> np.ndarray:
    """One lagged p-centroid update on the Voronoi cells of ``sites``.

    ``x_i' = int_{V_i} x |x - x_i|^(p-2) dx / int_{V_i} |x - x_i|^(p-2) dx``,
    i.e. the weighted centroid with the nonlinear factor frozen at the
    current site. For ``p = 2`` this is the classical Lloyd step.

    Args:
        sites: ``(M, 2)`` current sites
        domain: Convex domain
        p: Transport exponent, ``p >= 1``
        refine: Fan-triangle subdivisions (default: once when ``p < 2``)

    Returns:
        np.ndarray: ``(M, 2)`` updated sites

    Raises:
        QuadratureSingularity: If ``p < 2`` and a quadrature node hits a site
    """
    if p < 1.0:
        raise ValueError(f"p must be >= 1, got {p}")
    if refine is None:
        refine = 1 if p < 2.0 else 0
    pts = np.asarray(sites, dtype=float).reshape(-1, 2)
    check_distinct_sites(pts, DEGENERACY_TOLERANCE * diameter(domain))
    cells = power_cells(pts, np.zeros(len(pts)), domain)
    updated = pts.copy()
    for i, cell in enumerate(cells):
        if cell is None:
            continue
        nodes, weights = radial_quadrature(cell[0], pts[i], p - 2.0, refine)
        updated[i] = weights @ nodes / weights.sum()
    return updated


def run_p_centroid(
    sites: Sequence[Sequence[float]] | np.ndarray,
    domain: ConvexPolygon,
    p: float,
    max_iterations: int = 1_000,
    tolerance: float = 1e-10,
) -> PCentroidResult:
    """Repeat :func:`p_centroid_step` until sites move less than ``tolerance * diam(domain)``."""
    pts = np.asarray(sites, dtype=float).reshape(-1, 2)
    limit = tolerance * diameter(domain)
    displacements: list[float] = []
    converged = False
    for _ in range(max_iterations):
        updated = p_centroid_step(pts, domain, p)
        displacements.append(float(np.max(np.hypot(*(updated - pts).T))))
        pts = updated
        if displacements[-1] < limit:
            converged = True
            break
    if not converged:
        logger.warning(f"p-centroid iteration (p={p}) stopped at {max_iterations} iterations")
    return PCentroidResult(
        p=p,
        sites=tuple(Point2(float(x), float(y)) for x, y in pts),
        iterations=len(displacements),
        converged=converged,
        displacements=tuple(displacements),
    )
