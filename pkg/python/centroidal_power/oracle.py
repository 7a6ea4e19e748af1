"""Independent reference solutions used to verify the power-diagram solvers.

- ``discrete_ot``: brute-force transport from a gridded Lebesgue measure to an
  atomic measure, solved exactly by POT's network simplex
- ``solve_1d``: closed-form minimiser of the one-dimensional energy
- ``cvt_fixture_energies``: the two classical CVTs of the unit square
"""

import logging
import math
from fractions import Fraction
from numbers import Rational

import numpy as np
import ot

from .errors import InfeasibleScale, MassMismatch, NoConvergence
from .geometry import BOUNDARY, bounding_box, clip_labelled, contains, moments_about
from .models import (
    AtomicMeasure,
    ConvexPolygon,
    GridMeasure,
    OneDSolution,
    Point2,
    TransportPlan,
    WeightedGenerator,
)

logger = logging.getLogger(__name__)

MAX_GRID_CELLS = 65_536
MAX_ATOMS = 50
MARGINAL_TOLERANCE = 1e-10
EMD_MAX_ITERATIONS = 10_000_000


def grid_measure(domain: ConvexPolygon, nx: int, ny: int | None = None) -> GridMeasure:
    """Lump the Lebesgue measure of the domain onto a uniform grid.

    The grid covers the bounding box. Each grid cell gets the exact area of its
    intersection with the domain and a node at the centroid of that piece, so
    interior nodes are cell midpoints and the masses sum to the domain area.

    Args:
        domain: Convex domain
        nx: Grid cells along x
        ny: Grid cells along y (defaults to ``nx``)

    Returns:
        GridMeasure: ``(ny, nx)`` masses and ``(ny, nx, 2)`` nodes
    """
    ny = nx if ny is None else ny
    if nx * ny > MAX_GRID_CELLS:
        raise InfeasibleScale(
            f"grid {nx}x{ny} exceeds the cap of {MAX_GRID_CELLS} cells", cells=nx * ny
        )
    xmin, ymin, xmax, ymax = bounding_box(domain)
    hx, hy = (xmax - xmin) / nx, (ymax - ymin) / ny
    xs = xmin + hx * np.arange(nx + 1)
    ys = ymin + hy * np.arange(ny + 1)

    masses = np.zeros((ny, nx))
    nodes = np.zeros((ny, nx, 2))
    nodes[..., 0] = xmin + hx * (np.arange(nx) + 0.5)[None, :]
    nodes[..., 1] = ymin + hy * (np.arange(ny) + 0.5)[:, None]

    # A convex domain holding all four corners holds the whole grid cell.
    corner_inside = np.array([[contains(domain, (x, y)) for x in xs] for y in ys])
    full = corner_inside[:-1, :-1] & corner_inside[:-1, 1:] & corner_inside[1:, :-1] & corner_inside[1:, 1:]
    masses[full] = hx * hy

    domain_verts = [(float(x), float(y)) for x, y in domain.vertices]
    eps = 1e-12 * max(xmax - xmin, ymax - ymin)
    for row, col in zip(*np.nonzero(~full)):
        piece = _intersect_box(domain_verts, xs[col], xs[col + 1], ys[row], ys[row + 1], eps)
        if piece is None:
            continue
        cx, cy = nodes[row, col]
        area, sx, sy, _ = moments_about(piece, cx, cy)
        masses[row, col] = area
        nodes[row, col] = (cx + sx / area, cy + sy / area)

    support = ConvexPolygon.trusted([(xmin, ymin), (xmax, ymin), (xmax, ymax), (xmin, ymax)])
    return GridMeasure(resolution=(nx, ny), masses=masses, nodes=nodes, support=support)


def _intersect_box(verts, x0, x1, y0, y1, eps):
    labels = [BOUNDARY] * len(verts)
    piece = (verts, labels)
    for nx_, ny_, offset in ((1.0, 0.0, x1), (-1.0, 0.0, -x0), (0.0, 1.0, y1), (0.0, -1.0, -y0)):
        piece = clip_labelled(piece[0], piece[1], nx_, ny_, offset, BOUNDARY, eps, 0.0)
        if piece is None:
            return None
    return piece[0]


def _cost_matrix(sources: np.ndarray, targets: np.ndarray, p: float) -> np.ndarray:
    if p == 2.0:
        return ot.dist(sources, targets, metric="sqeuclidean")
    return ot.dist(sources, targets, metric="euclidean") ** p


def discrete_ot(
    mu: GridMeasure, nu: AtomicMeasure, p: float = 2.0
) -> tuple[float, TransportPlan]:
    """Exact optimal cost of transporting a grid measure onto an atomic measure.

    The finite transportation problem with cost ``|x - y|^p`` between grid nodes
    and atom sites is solved to optimality by network simplex (``ot.emd``).
    Grid nodes without mass are left out of the problem and receive the
    c-transform of the atom potentials, so the dual certificate covers every node.

    Args:
        mu: Gridded Lebesgue measure
        nu: Atomic measure with the same total mass
        p: Cost exponent

    Returns:
        ``(cost, plan)``; plan flows are keyed by (flat grid index, atom index)

    Raises:
        MassMismatch: If the total masses differ by more than 1e-10
        InfeasibleScale: If the grid or the measure exceeds the size caps
        NoConvergence: If the network simplex stops before optimality
    """
    nx, ny = mu.resolution
    if nx * ny > MAX_GRID_CELLS or len(nu.atoms) > MAX_ATOMS:
        raise InfeasibleScale(
            f"transport problem {nx * ny}x{len(nu.atoms)} exceeds the caps "
            f"({MAX_GRID_CELLS} grid cells, {MAX_ATOMS} atoms)",
            grid_cells=nx * ny,
            atoms=len(nu.atoms),
        )
    masses = mu.masses.ravel()
    nodes = mu.nodes.reshape(-1, 2)
    total = math.fsum(masses.tolist())
    if abs(total - nu.total_mass) > MARGINAL_TOLERANCE:
        raise MassMismatch(
            f"grid mass {total:.15g} differs from atom mass {nu.total_mass:.15g}",
            grid_mass=total,
            atom_mass=nu.total_mass,
        )

    support = np.flatnonzero(masses > 0.0)
    a = masses[support]
    b = nu.masses * (a.sum() / nu.masses.sum())
    cost_matrix = _cost_matrix(nodes[support], nu.sites, p)
    plan, log = ot.emd(a, b, cost_matrix, numItermax=EMD_MAX_ITERATIONS, log=True)
    if log["warning"] is not None:
        raise NoConvergence(f"network simplex did not finish: {log['warning']}", result_code=log["result_code"])

    v = np.asarray(log["v"], dtype=float)
    u = np.min(_cost_matrix(nodes, nu.sites, p) - v[None, :], axis=1)
    u[support] = log["u"]
    rows, cols = np.nonzero(plan > 0.0)
    flows = {(int(support[r]), int(c)): float(plan[r, c]) for r, c in zip(rows, cols)}
    cost = float(log["cost"])
    logger.debug(f"Discrete transport {len(support)}x{len(nu.atoms)} solved, cost={cost:.12g}")
    return cost, TransportPlan(
        flows=flows, row_potentials=tuple(u.tolist()), column_potentials=tuple(v.tolist())
    )


def optimality_violation(plan: TransportPlan, mu: GridMeasure, nu: AtomicMeasure, p: float = 2.0) -> float:
    """Largest breach of the dual certificate of a transport plan.

    Dual feasibility requires ``u_i + v_j <= c_ij`` on every arc and
    complementary slackness requires equality on arcs carrying flow. Returns
    the worst violation of either; zero for an exact certificate.
    """
    costs = _cost_matrix(mu.nodes.reshape(-1, 2), nu.sites, p)
    reduced = costs - np.asarray(plan.row_potentials)[:, None] - np.asarray(plan.column_potentials)[None, :]
    worst = max(0.0, -float(reduced.min()))
    for i, j in plan.flows:
        worst = max(worst, abs(float(reduced[i, j])))
    return worst


def marginal_errors(plan: TransportPlan, mu: GridMeasure, nu: AtomicMeasure) -> tuple[float, float]:
    """Largest row-sum and column-sum deviations of the plan from the marginals."""
    rows = np.zeros(mu.masses.size)
    cols = np.zeros(len(nu.atoms))
    for (i, j), mass in plan.flows.items():
        rows[i] += mass
        cols[j] += mass
    return float(np.abs(rows - mu.masses.ravel()).max()), float(np.abs(cols - nu.masses).max())


def _exact(lam, p) -> bool:
    return isinstance(lam, Rational) and float(p).is_integer()


def energy_1d(m: int, lam: float | Fraction, p: float = 2.0) -> float | Fraction:
    """Energy ``lambda M + 2^(-p) / (p + 1) M^(-p)`` of the uniform M-cell partition of [0, 1].

    Exact (a Fraction) when ``lam`` is rational and ``p`` integral.
    """
    if _exact(lam, p):
        k = int(p)
        return Fraction(lam) * m + Fraction(1, 2**k * (k + 1) * m**k)
    return float(lam) * m + 2.0**-p / (p + 1.0) * float(m) ** -p


def solve_1d(lam: float | Fraction, p: float = 2.0) -> OneDSolution:
    """Global minimiser of the one-dimensional energy on [0, 1].

    The optimal real cell count ``(2^p (p + 1) lambda / p)^(-1/(p+1))`` is
    rounded down and up; the integer with the lower energy wins (ties go to
    the smaller count).

    Example:
        >>> solve_1d(Fraction(1, 6000)).m_opt
        10
    """
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    if p < 1.0:
        raise ValueError(f"p must be >= 1, got {p}")
    real = (2.0**p * (p + 1.0) * float(lam) / p) ** (-1.0 / (p + 1.0))
    options = sorted({max(1, math.floor(real)), max(1, math.ceil(real))})
    m_opt = min(options, key=lambda m: (energy_1d(m, lam, p), m))
    return OneDSolution(
        lam=float(lam),
        p=p,
        m_opt=m_opt,
        energy=float(energy_1d(m_opt, lam, p)),
        sites=tuple((2 * i + 1) / (2 * m_opt) for i in range(m_opt)),
    )


def scan_1d(lam: float | Fraction, p: float = 2.0, max_cells: int = 1000) -> int:
    """Exhaustive minimiser of :func:`energy_1d` over ``1..max_cells``."""
    return min(range(1, max_cells + 1), key=lambda m: (energy_1d(m, lam, p), m))


def lloyd_1d(sites, iterations: int = 10_000, tolerance: float = 0.0) -> list:
    """Classical Lloyd iteration on [0, 1]: each site moves to the midpoint of its Voronoi interval.

    Works on any ordered field, so Fraction input is iterated exactly.
    """
    current = sorted(sites)
    for _ in range(iterations):
        bounds = [0] + [(a + b) / 2 for a, b in zip(current, current[1:])] + [1]
        updated = [(lo + hi) / 2 for lo, hi in zip(bounds, bounds[1:])]
        moved = max(abs(a - b) for a, b in zip(updated, current))
        current = updated
        if moved <= tolerance:
            break
    return current


_FIXTURES = {
    # (columns, rows) of equal rectangles tiling the unit square
    "2x2": (2, 2),
    "4-strips": (4, 1),
}


def cvt_fixture_generators(name: str) -> tuple[WeightedGenerator, ...]:
    """Sites at the rectangle centres of a named CVT of the unit square, all weights zero."""
    if name not in _FIXTURES:
        raise ValueError(f"unknown fixture {name!r}; choose from {sorted(_FIXTURES)}")
    cols, rows = _FIXTURES[name]
    return tuple(
        WeightedGenerator(site=Point2((c + 0.5) / cols, (r + 0.5) / rows))
        for r in range(rows)
        for c in range(cols)
    )


def cvt_fixture_energies() -> dict[str, float]:
    """Transport cost of the 2x2 and 4-strip CVTs of the unit square.

    Each a-by-b rectangle contributes ``(a^2 + b^2) a b / 12`` about its centre,
    giving 1/24 for 2x2 and 17/192 for the strips.
    """
    energies: dict[str, Fraction] = {}
    for name, (cols, rows) in _FIXTURES.items():
        a, b = Fraction(1, cols), Fraction(1, rows)
        energies[name] = cols * rows * (a * a + b * b) * a * b / 12
    if not energies["2x2"] < energies["4-strips"]:
        raise ArithmeticError("2x2 CVT must have lower energy than the 4-strip CVT")
    return {name: float(value) for name, value in energies.items()}
