"""Multistart search for global minimisers and pattern diagnostics.

For every cell count M in an interval around the honeycomb estimate, ``N_r``
random starts are relaxed by a fixed number of Lloyd iterations. The pooled
states are ranked by energy, duplicates (same cell count and rescaled energy
within tolerance) are factored out, and the best survivors are refined in
further rounds until the best energy stops moving.

Candidates are independent, so they run on a process pool. Every start draws
from its own generator seeded by ``(seed, M, replica)`` and results are merged
in task order, which keeps the outcome independent of the worker count.
"""

import concurrent.futures
import logging
import math
from collections import Counter
from collections.abc import Iterable

import numpy as np

from .energy import (
    HEX_DENSITY,
    generator_arrays,
    hexagonal_reference,
    rescaled_energy,
    to_generators,
)
from .errors import EmptyInterval
from .geometry import bounding_box, polygon_area, power_diagram
from .lloyd import run_lloyd
from .models import (
    Candidate,
    ConvexPolygon,
    EnergyBreakdown,
    HexagonalReference,
    LloydConfig,
    PowerDiagram,
    Provenance,
    SearchConfig,
    SearchResult,
    WeightedGenerator,
)

logger = logging.getLogger(__name__)

# Consecutive edges turning by less than this angle (radians) count as one side.
SIDE_ANGLE_TOLERANCE = 1e-6


def estimate_cell_count(lam: float, domain_area: float) -> float:
    """Honeycomb estimate of the minimiser's cell count, ``|domain| 5^(2/3) 3^(-5/3) lambda^(-2/3)``."""
    if lam <= 0.0:
        raise ValueError(f"lambda must be positive, got {lam}")
    return domain_area * HEX_DENSITY * lam ** (-2.0 / 3.0)


def cell_count_interval(lam: float, domain_area: float, coefficient: float = 1.0) -> range:
    """Integer cell counts in ``M_g +- C lambda^(-2/3)``, clipped below at 1.

    Raises:
        EmptyInterval: If the interval holds no positive integer
    """
    centre = estimate_cell_count(lam, domain_area)
    half_width = coefficient * lam ** (-2.0 / 3.0)
    low = max(1, math.ceil(centre - half_width))
    high = math.floor(centre + half_width)
    if high < low:
        raise EmptyInterval(
            f"no positive cell count in [{centre - half_width:.4g}, {centre + half_width:.4g}]; "
            f"increase the interval coefficient C",
            centre=centre,
            half_width=half_width,
        )
    return range(low, high + 1)


def _strictly_inside(points: np.ndarray, vertices: np.ndarray) -> np.ndarray:
    edges = np.roll(vertices, -1, axis=0) - vertices
    rel = points[:, None, :] - vertices[None, :, :]
    cross = edges[None, :, 0] * rel[:, :, 1] - edges[None, :, 1] * rel[:, :, 0]
    return np.all(cross > 0.0, axis=1)


def random_init(
    m: int, domain: ConvexPolygon, seed: int | Iterable[int]
) -> tuple[WeightedGenerator, ...]:
    """``m`` uniform random sites strictly inside the domain, all weights zero.

    Sites are drawn from the bounding box and rejected until they fall inside.

    Args:
        m: Number of generators (>= 1)
        domain: Convex domain
        seed: Integer or integer sequence for ``numpy.random.default_rng``
    """
    if m < 1:
        raise ValueError(f"need at least one generator, got {m}")
    rng = np.random.default_rng(list(seed) if isinstance(seed, Iterable) else seed)
    xmin, ymin, xmax, ymax = bounding_box(domain)
    verts = domain.array
    accepted: list[np.ndarray] = []
    count = 0
    while count < m:
        batch = rng.uniform((xmin, ymin), (xmax, ymax), size=(2 * m, 2))
        inside = batch[_strictly_inside(batch, verts)]
        accepted.append(inside)
        count += len(inside)
    sites = np.concatenate(accepted)[:m]
    return to_generators(sites, np.zeros(m))


def _relax(task: tuple) -> tuple[np.ndarray, np.ndarray, EnergyBreakdown]:
    """Worker: run Lloyd from one start; returns final sites, weights and energy."""
    sites, weights, domain, lam, iterations = task
    config = LloydConfig(lam=lam, max_iterations=iterations)
    result = run_lloyd(to_generators(sites, weights), domain, config)
    final_sites, final_weights = generator_arrays(result.final_generators)
    return final_sites, final_weights, result.energy


def _run_tasks(tasks: list[tuple], workers: int | None) -> list[tuple]:
    if workers is not None and workers < 2:
        return [_relax(task) for task in tasks]
    with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(_relax, tasks, chunksize=max(1, len(tasks) // 64)))


def _to_candidates(
    outputs: list[tuple], provenance: list[Provenance], ref: HexagonalReference
) -> list[Candidate]:
    candidates = []
    for (sites, weights, energy), origin in zip(outputs, provenance):
        candidates.append(
            Candidate(
                generators=to_generators(sites, weights),
                energy=energy,
                rescaled_energy=rescaled_energy(energy, ref),
                cell_count=len(sites),
                provenance=origin,
            )
        )
    return candidates


def rank_candidates(candidates: list[Candidate], tolerance: float) -> list[Candidate]:
    """Sort by energy and drop candidates duplicating an earlier one.

    A duplicate has the same cell count and a rescaled energy within
    ``tolerance`` of a kept candidate.
    """
    ordered = sorted(
        candidates,
        key=lambda c: (c.energy.total, c.cell_count, c.provenance.initial_cells, c.provenance.replica),
    )
    kept: list[Candidate] = []
    for candidate in ordered:
        if any(
            k.cell_count == candidate.cell_count
            and abs(k.rescaled_energy - candidate.rescaled_energy) < tolerance
            for k in kept
        ):
            continue
        kept.append(candidate)
    return kept


def select_survivors(ranked: list[Candidate], count: int, window: float) -> list[Candidate]:
    """The best ``count`` ranked candidates, one per state.

    A candidate with the same cell count as an already selected one and a
    rescaled energy within ``window`` of it is taken as another copy of that
    state and skipped.
    """
    selected: list[Candidate] = []
    for candidate in ranked:
        if len(selected) == count:
            break
        if any(
            s.cell_count == candidate.cell_count
            and abs(s.rescaled_energy - candidate.rescaled_energy) < window
            for s in selected
        ):
            continue
        selected.append(candidate)
    return selected


def genetic_search(domain: ConvexPolygon, config: SearchConfig) -> SearchResult:
    """Multistart search for the global minimiser at one lambda.

    Args:
        domain: Convex domain
        config: Search settings

    Returns:
        SearchResult: Deduplicated survivors in ascending energy, the side
        histogram of the best one, and the best rescaled energy per round

    Raises:
        EmptyInterval: If the cell-count interval is empty
        NumericalRegression: Propagated from a Lloyd run

    Example:
        ```python
        result = genetic_search(unit_square(), SearchConfig(lam=0.1, N_r=50))
        print(result.best.cell_count)  # 3
        ```
    """
    area = polygon_area(domain)
    ref = hexagonal_reference(config.lam, area)
    interval = cell_count_interval(config.lam, area, config.interval_coefficient)
    logger.info(
        f"Searching lambda={config.lam:g}: M in [{interval.start}, {interval.stop - 1}], "
        f"{config.replicas} starts each"
    )

    tasks: list[tuple] = []
    provenance: list[Provenance] = []
    for m in interval:
        for replica in range(config.replicas):
            sites, weights = generator_arrays(random_init(m, domain, (config.seed, m, replica)))
            tasks.append((sites, weights, domain, config.lam, config.round_iterations))
            provenance.append(Provenance(initial_cells=m, seed=config.seed, replica=replica))

    ranked = rank_candidates(
        _to_candidates(_run_tasks(tasks, config.workers), provenance, ref),
        config.energy_dedup_tolerance,
    )
    round_best = [ranked[0].rescaled_energy]
    logger.info(f"Initial pass: {len(ranked)} distinct states, best E~={round_best[-1]:.6g}")

    for round_index in range(1, config.rounds + 1):
        survivors = select_survivors(ranked, config.survivors, config.survivor_window)
        tasks = [
            (*generator_arrays(c.generators), domain, config.lam, config.round_iterations)
            for c in survivors
        ]
        ranked = rank_candidates(
            _to_candidates(
                _run_tasks(tasks, config.workers), [c.provenance for c in survivors], ref
            ),
            config.energy_dedup_tolerance,
        )
        round_best.append(ranked[0].rescaled_energy)
        logger.info(f"Round {round_index}: {len(ranked)} survivors, best E~={round_best[-1]:.6g}")
        if abs(round_best[-2] - round_best[-1]) < config.energy_dedup_tolerance:
            break

    best = power_diagram(ranked[0].generators, domain)
    return SearchResult(
        ranked=tuple(ranked),
        side_histogram=side_histogram(best),
        round_best=tuple(round_best),
        interval=(interval.start, interval.stop - 1),
    )


def side_count(vertices: np.ndarray, angle_tolerance: float = SIDE_ANGLE_TOLERANCE) -> int:
    """Number of sides of a convex polygon after merging collinear consecutive edges."""
    edges = np.roll(vertices, -1, axis=0) - vertices
    prev = np.roll(edges, 1, axis=0)
    turn = np.arctan2(
        prev[:, 0] * edges[:, 1] - prev[:, 1] * edges[:, 0],
        prev[:, 0] * edges[:, 0] + prev[:, 1] * edges[:, 1],
    )
    return int(np.count_nonzero(np.abs(turn) > angle_tolerance))


def side_histogram(diagram: PowerDiagram) -> dict[int, int]:
    """Side count -> number of nonempty cells with that many sides."""
    counts = Counter(
        side_count(cell.polygon.array) for cell in diagram.cells if cell.polygon is not None
    )
    return dict(sorted(counts.items()))


def interior_cells(diagram: PowerDiagram) -> list[int]:
    """Generator indices of nonempty cells with no edge on the domain boundary."""
    return [
        cell.generator
        for cell in diagram.cells
        if cell.polygon is not None and not cell.touches_boundary
    ]


def hexagon_fraction(diagram: PowerDiagram) -> float:
    """Share of interior cells that are hexagons (0 when there are no interior cells)."""
    interior = interior_cells(diagram)
    if not interior:
        return 0.0
    hexagons = sum(1 for i in interior if side_count(diagram.cells[i].polygon.array) == 6)
    return hexagons / len(interior)
