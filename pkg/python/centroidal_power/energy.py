"""Limit energy evaluation, Kantorovich weight solving and hexagonal reference constants.

The energy of a configuration is ``lambda * sum sqrt(m_i) + W2(1, nu)``. It is
evaluated either from weighted generators (masses are the induced power-cell
areas) or from an atomic measure (weights are first solved so that the cells
carry the prescribed masses).

Sign convention: a diagram weight w_i is the Kantorovich potential psi(x_i),
so increasing w_i grows cell i.
"""

import logging
import math
import warnings
from collections.abc import Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.linalg import MatrixRankWarning, spsolve

from .errors import EmptyCell, InvalidMeasure, NoConvergence
from .geometry import (
    RawCell,
    check_distinct_sites,
    contains,
    diameter,
    moments_about,
    polygon_area,
    power_cells,
    scale_about_origin,
)
from .models import (
    DEGENERACY_TOLERANCE,
    AtomicMeasure,
    ConvexPolygon,
    ELResidual,
    EnergyBreakdown,
    HexagonalReference,
    KantorovichWeights,
    Point2,
    WeightedGenerator,
)

logger = logging.getLogger(__name__)

# Transport cost of a unit-area regular hexagon to its centre.
C6 = 5.0 * math.sqrt(3.0) / 54.0

# Optimal hexagons per unit area at lambda = 1 (scales as lambda^(-2/3)).
HEX_DENSITY = 5.0 ** (2.0 / 3.0) * 3.0 ** (-5.0 / 3.0)

# Dual solver stops when max |m_i - |P_i|| <= MASS_TOLERANCE * |domain|.
MASS_TOLERANCE = 1e-7

# Atoms lighter than this fraction of |domain| are rejected.
ZERO_MASS_GUARD = 1e-12

# Relative slack on the dual objective when checking ascent.
DUAL_SLACK = 1e-13

_MIN_STEP = 2.0**-40


def generator_arrays(gens: Sequence[WeightedGenerator]) -> tuple[np.ndarray, np.ndarray]:
    """Sites as an ``(M, 2)`` array and weights as an ``(M,)`` array."""
    sites = np.array([g.site for g in gens], dtype=float).reshape(-1, 2)
    weights = np.array([g.weight for g in gens], dtype=float)
    return sites, weights


def to_generators(sites: np.ndarray, weights: np.ndarray) -> tuple[WeightedGenerator, ...]:
    return tuple(
        WeightedGenerator(site=Point2(float(x), float(y)), weight=float(w))
        for (x, y), w in zip(sites, weights)
    )


def cell_moments(
    sites: np.ndarray, cells: list[RawCell]
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-cell area, transport cost to the own site, and centroid.

    Empty cells get zero area and cost; their centroid is reported as the site.

    Returns:
        ``(areas, costs, centroids)`` with shapes ``(M,)``, ``(M,)``, ``(M, 2)``
    """
    m = len(cells)
    areas = np.zeros(m)
    costs = np.zeros(m)
    centroids = np.array(sites, dtype=float, copy=True)
    for i, cell in enumerate(cells):
        if cell is None:
            continue
        xi, yi = float(sites[i, 0]), float(sites[i, 1])
        area, sx, sy, polar = moments_about(cell[0], xi, yi)
        areas[i] = area
        costs[i] = polar
        centroids[i] = (xi + sx / area, yi + sy / area)
    return areas, costs, centroids


def breakdown(lam: float, areas: np.ndarray, costs: np.ndarray) -> EnergyBreakdown:
    """Energy terms from per-cell areas and transport costs."""
    return EnergyBreakdown.from_terms(
        lam, lam * math.fsum(np.sqrt(areas).tolist()), math.fsum(costs.tolist())
    )


def energy_weighted(
    gens: Sequence[WeightedGenerator], domain: ConvexPolygon, lam: float
) -> EnergyBreakdown:
    """Energy of weighted generators, with masses equal to the induced cell areas.

    ``E = sum_i lambda * sqrt|P_i| + integral over P_i of |x - x_i|^2``. Empty
    cells contribute nothing. Because power cells are the optimal transport
    cells for their own areas, the transport term equals ``W2(1, sum |P_i| delta_i)``.

    Args:
        gens: Weighted generators
        domain: Convex domain
        lam: Perimeter weight lambda (>= 0)

    Returns:
        EnergyBreakdown: Perimeter, transport and total terms

    Raises:
        DuplicateSites: If two sites coincide
    """
    if lam < 0.0:
        raise ValueError(f"lambda must be nonnegative, got {lam}")
    sites, weights = generator_arrays(gens)
    check_distinct_sites(sites, DEGENERACY_TOLERANCE * diameter(domain))
    areas, costs, _ = cell_moments(sites, power_cells(sites, weights, domain))
    return breakdown(lam, areas, costs)


def _edge_laplacian(sites: np.ndarray, cells: list[RawCell]) -> coo_matrix:
    """Hessian of minus the dual objective: ``|e_ij| / (2 |x_i - x_j|)`` off the diagonal."""
    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    for i, cell in enumerate(cells):
        if cell is None:
            continue
        verts, labels = cell
        n = len(verts)
        for k, j in enumerate(labels):
            if j < 0:
                continue
            (x0, y0), (x1, y1) = verts[k], verts[(k + 1) % n]
            coupling = math.hypot(x1 - x0, y1 - y0) / (
                2.0 * math.hypot(sites[j, 0] - sites[i, 0], sites[j, 1] - sites[i, 1])
            )
            rows += [i, i]
            cols += [i, j]
            vals += [coupling, -coupling]
    m = len(cells)
    return coo_matrix((vals, (rows, cols)), shape=(m, m))


class _DualState:
    """Dual objective, gradient and cells at one weight vector."""

    __slots__ = ("weights", "cells", "areas", "costs", "value", "gradient")

    def __init__(self, sites: np.ndarray, masses: np.ndarray, weights: np.ndarray, domain: ConvexPolygon):
        self.weights = weights
        self.cells = power_cells(sites, weights, domain)
        self.areas, self.costs, _ = cell_moments(sites, self.cells)
        self.value = math.fsum((self.costs - weights * self.areas + masses * weights).tolist())
        self.gradient = masses - self.areas


def dual_objective(nu: AtomicMeasure, weights: Sequence[float], domain: ConvexPolygon) -> float:
    """The concave Kantorovich dual ``f(a) = sum_i [int_{P_i(a)} |x - x_i|^2 - a_i |P_i(a)|] + sum_i m_i a_i``.

    Its gradient is ``m_i - |P_i(a)|`` and its maximum value is ``W2(1, nu)``.
    """
    a = np.asarray(weights, dtype=float)
    return _DualState(nu.sites, nu.masses, a, domain).value


def _check_measure(nu: AtomicMeasure, domain: ConvexPolygon, area: float) -> None:
    masses = nu.masses
    light = np.flatnonzero(masses < ZERO_MASS_GUARD * area)
    if light.size:
        raise InvalidMeasure(
            f"atom {int(light[0])} has mass {masses[light[0]]:.3g} below {ZERO_MASS_GUARD:g}*|domain|; "
            f"drop the atom or merge its mass into a neighbour",
            index=int(light[0]),
        )
    if abs(nu.total_mass - area) > 1e-9 * area:
        raise InvalidMeasure(
            f"total mass {nu.total_mass:.12g} differs from the domain area {area:.12g}",
            total_mass=nu.total_mass,
            area=area,
        )
    tol = DEGENERACY_TOLERANCE * diameter(domain)
    for i, atom in enumerate(nu.atoms):
        if not contains(domain, atom.site, tolerance=tol * diameter(domain)):
            raise InvalidMeasure(f"atom {i} at {tuple(atom.site)} lies outside the domain", index=i)
    check_distinct_sites(nu.sites, tol)


def _accept(
    state: _DualState, trial: _DualState, floor: float, require_residual_drop: float | None
) -> bool:
    slack = DUAL_SLACK * max(1.0, abs(state.value))
    if trial.value < state.value - slack:
        return False
    if float(trial.areas.min()) < floor:
        return False
    if require_residual_drop is not None:
        return float(np.linalg.norm(trial.gradient)) <= require_residual_drop
    return True


def solve_weights(
    nu: AtomicMeasure,
    domain: ConvexPolygon,
    tolerance: float = MASS_TOLERANCE,
    max_iterations: int = 10_000,
) -> KantorovichWeights:
    """Kantorovich weights whose power cells carry the masses of ``nu``.

    Maximises the concave dual ``f(a)`` (see :func:`dual_objective`) by damped
    Newton steps. The Hessian is the cell-adjacency Laplacian with couplings
    ``|e_ij| / (2 |x_i - x_j|)``, restricted by fixing ``a_1 = 0``. A step of
    length ``alpha`` (halved until accepted) must not decrease ``f``, must keep
    every cell above half the smaller of the least mass and the least initial
    area, and must shrink the mass residual by the factor ``1 - alpha/2``. When
    no Newton step is accepted a backtracked gradient step is tried instead.

    Args:
        nu: Atomic measure with total mass equal to the domain area
        domain: Convex domain containing every atom
        tolerance: Stop when ``max_i |m_i - |P_i|| <= tolerance * |domain|``
        max_iterations: Iteration cap

    Returns:
        KantorovichWeights: Weights normalised so that the first one is zero

    Raises:
        InvalidMeasure: If an atom is (numerically) massless, outside the
            domain, or the total mass does not match the domain area
        NoConvergence: If the residual stalls above tolerance

    Example:
        ```python
        nu = AtomicMeasure.from_arrays(
            np.array([[0.25, 0.5], [0.75, 0.5]]), np.array([0.6, 0.4])
        )
        solve_weights(nu, unit_square()).weights  # (0.0, -0.1)
        ```
    """
    area = polygon_area(domain)
    _check_measure(nu, domain, area)
    sites, masses = nu.sites, nu.masses
    m = len(masses)
    target = tolerance * area

    state = _DualState(sites, masses, np.zeros(m), domain)
    trace = [state.value]
    if m == 1:
        return KantorovichWeights(
            weights=(0.0,), iterations=0, residual=float(abs(state.gradient[0])), dual_trace=tuple(trace)
        )

    floor = 0.5 * min(float(masses.min()), float(state.areas.min()))
    iteration = 0
    while float(np.abs(state.gradient).max()) > target:
        if iteration >= max_iterations:
            residual = float(np.abs(state.gradient).max())
            raise NoConvergence(
                f"dual ascent did not reach the mass tolerance {target:.3g} in {iteration} iterations "
                f"(residual {residual:.3g}); check the measure for tiny or clustered atoms",
                iterations=iteration,
                residual=residual,
            )
        iteration += 1
        laplacian = _edge_laplacian(sites, state.cells).tocsr()
        trial = _newton_step(sites, masses, domain, state, laplacian, floor)
        if trial is None:
            logger.warning(f"Newton step rejected at dual iteration {iteration}; trying a gradient step")
            trial = _gradient_step(sites, masses, domain, state, laplacian, floor)
        if trial is None:
            residual = float(np.abs(state.gradient).max())
            raise NoConvergence(
                f"dual ascent stalled at iteration {iteration} with residual {residual:.3g}",
                iterations=iteration,
                residual=residual,
            )
        state = trial
        trace.append(state.value)
        logger.debug(
            f"Dual iteration {iteration}: f={state.value:.15g}, residual={np.abs(state.gradient).max():.3g}"
        )

    weights = state.weights - state.weights[0]
    logger.info(f"Solved Kantorovich weights for {m} atoms in {iteration} iterations")
    return KantorovichWeights(
        weights=tuple(weights.tolist()),
        iterations=iteration,
        residual=float(np.abs(state.gradient).max()),
        dual_trace=tuple(trace),
    )


def _newton_step(sites, masses, domain, state, laplacian, floor) -> _DualState | None:
    with warnings.catch_warnings(), np.errstate(all="ignore"):
        warnings.simplefilter("ignore", MatrixRankWarning)
        reduced = spsolve(laplacian[1:, 1:].tocsc(), state.gradient[1:])
    direction = np.concatenate([[0.0], np.atleast_1d(reduced)])
    if not np.all(np.isfinite(direction)):
        return None
    gnorm = float(np.linalg.norm(state.gradient))
    alpha = 1.0
    while alpha >= _MIN_STEP:
        trial = _DualState(sites, masses, state.weights + alpha * direction, domain)
        if _accept(state, trial, floor, (1.0 - alpha / 2.0) * gnorm):
            return trial
        alpha /= 2.0
    return None


def _gradient_step(sites, masses, domain, state, laplacian, floor) -> _DualState | None:
    scale = float(laplacian.diagonal().max())
    direction = state.gradient / scale if scale > 0.0 else state.gradient
    alpha = 1.0
    while alpha >= _MIN_STEP:
        trial = _DualState(sites, masses, state.weights + alpha * direction, domain)
        if _accept(state, trial, floor, None) and trial.value > state.value:
            return trial
        alpha /= 2.0
    return None


def energy_measure(nu: AtomicMeasure, domain: ConvexPolygon, lam: float) -> EnergyBreakdown:
    """Energy ``lambda * sum sqrt(m_i) + W2(1, nu)`` of an atomic measure.

    The transport term is the exact cost of the power cells produced by
    :func:`solve_weights`.
    """
    kw = solve_weights(nu, domain)
    sites = nu.sites
    cells = power_cells(sites, np.asarray(kw.weights), domain)
    _, costs, _ = cell_moments(sites, cells)
    return EnergyBreakdown.from_terms(
        lam, lam * math.fsum(math.sqrt(a.mass) for a in nu.atoms), math.fsum(costs.tolist())
    )


def hexagonal_reference(lam: float, domain_area: float) -> HexagonalReference:
    """Energy of a honeycomb of optimally sized regular hexagons.

    A hexagon of diameter D has area ``3 sqrt(3) D^2 / 8`` and energy
    ``lambda 3^(3/4) 2^(-3/2) D + 3^(1/2) 2^(-7) 5 D^4``; the energy per unit
    area is minimised at ``D = 3^(1/12) 2^(3/2) 5^(-1/3) lambda^(1/3)``.

    Args:
        lam: Perimeter weight lambda (> 0)
        domain_area: Area covered by the honeycomb

    Returns:
        HexagonalReference: Optimal diameter, cell area and energies
    """
    if lam <= 0.0:
        raise ValueError(f"lambda must be positive, got {lam}")
    d_opt = 3.0 ** (1.0 / 12.0) * 2.0**1.5 * 5.0 ** (-1.0 / 3.0) * lam ** (1.0 / 3.0)
    cell_area = 3.0 * math.sqrt(3.0) * d_opt**2 / 8.0
    cell_energy = lam * 3.0**0.75 * 2.0**-1.5 * d_opt + math.sqrt(3.0) * 2.0**-7 * 5.0 * d_opt**4
    return HexagonalReference(
        lam=lam,
        d_opt=d_opt,
        cell_area=cell_area,
        cell_energy=cell_energy,
        total_energy=cell_energy * domain_area / cell_area,
        c6=C6,
        domain_area=domain_area,
    )


def rescaled_energy(e: EnergyBreakdown, ref: HexagonalReference) -> float:
    """``(E - E_hex) / e_hex``: excess over the honeycomb in units of one optimal hexagon."""
    if not math.isclose(e.lam, ref.lam, rel_tol=1e-12):
        raise ValueError(f"energy lambda {e.lam} does not match reference lambda {ref.lam}")
    return (e.total - ref.total_energy) / ref.cell_energy


def rescale_factor(lam: float) -> float:
    """Length scale ``(2 c6 / lambda)^(1/3)`` that maps lambda to ``2 c6``."""
    if lam <= 0.0:
        raise ValueError(f"lambda must be positive, got {lam}")
    return (2.0 * C6 / lam) ** (1.0 / 3.0)


def rescale_domain(domain: ConvexPolygon, lam: float) -> ConvexPolygon:
    """The domain scaled about the origin by ``(2 c6 / lambda)^(1/3)``.

    On the scaled domain the energy with perimeter weight ``2 c6`` equals
    ``(2 c6 / lambda)^(4/3)`` times the original energy.
    """
    return scale_about_origin(domain, rescale_factor(lam))


def rescale_generators(gens: Sequence[WeightedGenerator], lam: float) -> tuple[WeightedGenerator, ...]:
    """Generators matching :func:`rescale_domain`: sites scale by s, weights by s^2."""
    s = rescale_factor(lam)
    sites, weights = generator_arrays(gens)
    return to_generators(s * sites, s * s * weights)


def el_residuals(
    gens: Sequence[WeightedGenerator], domain: ConvexPolygon, lam: float
) -> tuple[ELResidual, ...]:
    """Euler-Lagrange residuals of every generator.

    A critical point has each site at the centroid of its cell and each weight
    equal to ``-lambda / (2 sqrt|P_i|)``.

    Raises:
        EmptyCell: If some generator has an empty cell
    """
    sites, weights = generator_arrays(gens)
    check_distinct_sites(sites, DEGENERACY_TOLERANCE * diameter(domain))
    cells = power_cells(sites, weights, domain)
    areas, _, centroids = cell_moments(sites, cells)
    empty = [i for i, cell in enumerate(cells) if cell is None]
    if empty:
        raise EmptyCell(
            f"generator {empty[0]} has an empty cell; delete empty cells before computing residuals",
            index=empty[0],
        )
    drift = np.hypot(*(sites - centroids).T)
    weight_gap = np.abs(weights + 0.5 * lam / np.sqrt(areas))
    return tuple(
        ELResidual(centroid_residual=float(d), weight_residual=float(g))
        for d, g in zip(drift, weight_gap)
    )
