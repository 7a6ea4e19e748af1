"""Pydantic data models for centroidal_power.

This module provides the type system shared by every solver: convex polygons,
weighted generators, power diagrams, atomic measures, energies and the run
records produced by the Lloyd iteration and the multistart search.
All models are immutable (frozen=True) and use strict validation (extra='forbid').

Points are plain ``NamedTuple`` pairs so that the clipping hot path can work on
ordinary tuples; cells produced internally are assembled with
``model_construct`` because they are valid by construction.
"""

import math
from enum import Enum
from pathlib import Path
from typing import NamedTuple

import numpy as np
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    NonNegativeFloat,
    NonNegativeInt,
    PositiveFloat,
    PositiveInt,
    field_validator,
    model_validator,
)

from .errors import InvalidDomain, InvalidMeasure

# Vertices closer than this fraction of the domain diameter are merged.
DEGENERACY_TOLERANCE = 1e-12


class Point2(NamedTuple):
    """A point of the plane in dimensionless length units."""

    x: float
    y: float


class RunMode(str, Enum):
    """What a CLI invocation does."""

    LLOYD = "lloyd"  # One generalised Lloyd run from a random start
    SEARCH = "search"  # Multistart search at one lambda
    SWEEP = "sweep"  # Multistart search for each of several lambdas
    VERIFY = "verify"  # Oracle and closed-form verification suite


class OutputFormat(str, Enum):
    """Artifact formats written by the CLI."""

    JSON = "json"
    CSV = "csv"
    SVG = "svg"


class PowerBaseModel(BaseModel):
    """Base model class for all centroidal_power models.

    Provides consistent configuration across all data models:
    - frozen=True: Makes models immutable after creation
    - extra='forbid': Prevents unexpected fields in input data
    - populate_by_name=True: Aliased wire names ("lambda") and Python names
      ("lam") are both accepted
    """

    model_config = ConfigDict(frozen=True, extra="forbid", populate_by_name=True)


def polygon_violations(
    vertices: list[Point2] | tuple[Point2, ...], tolerance: float = DEGENERACY_TOLERANCE
) -> list[str]:
    """List every convex-polygon invariant the vertex sequence violates.

    Args:
        vertices: Candidate vertex sequence, expected counterclockwise
        tolerance: Degeneracy tolerance relative to the polygon diameter

    Returns:
        Human-readable violations; empty when the polygon is valid
    """
    if len(vertices) < 3:
        return [f"polygon needs at least 3 vertices, got {len(vertices)}"]

    pts = np.asarray(vertices, dtype=float)
    if not np.all(np.isfinite(pts)):
        return ["polygon has non-finite coordinates"]

    problems: list[str] = []
    diam = float(np.max(np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)))
    if diam == 0.0:
        return ["polygon collapses to a single point"]

    edges = np.roll(pts, -1, axis=0) - pts
    for k, length in enumerate(np.linalg.norm(edges, axis=1)):
        if length < tolerance * diam:
            problems.append(
                f"vertices {k} and {(k + 1) % len(pts)} are closer than {tolerance:g}*diameter"
            )

    signed_area = 0.5 * float(np.sum(pts[:, 0] * np.roll(pts[:, 1], -1) - np.roll(pts[:, 0], -1) * pts[:, 1]))
    if signed_area <= 0.0:
        problems.append(
            f"signed area {signed_area:.6g} is not positive; list vertices counterclockwise"
        )
        return problems

    prev_edges = np.roll(edges, 1, axis=0)
    cross = prev_edges[:, 0] * edges[:, 1] - prev_edges[:, 1] * edges[:, 0]
    for k in np.flatnonzero(cross < -tolerance * diam * diam):
        problems.append(f"vertex {k} is reflex; the polygon is not convex")
    return problems


class ConvexPolygon(PowerBaseModel):
    """Convex polygon given by counterclockwise vertices.

    Used for the domain and for every power cell. Validation rejects
    non-convex, clockwise and degenerate input with ``InvalidDomain``.

    Serialises as ``{"vertices": [[x, y], ...]}``.
    """

    vertices: tuple[Point2, ...]

    @model_validator(mode="after")
    def _check_invariants(self) -> "ConvexPolygon":
        problems = polygon_violations(self.vertices)
        if problems:
            raise InvalidDomain("; ".join(problems), violations=problems)
        return self

    @classmethod
    def trusted(cls, vertices: list[tuple[float, float]]) -> "ConvexPolygon":
        """Wrap vertices already known to be valid (clipping output) without re-checking."""
        return cls.model_construct(vertices=tuple(Point2(float(x), float(y)) for x, y in vertices))

    @property
    def array(self) -> np.ndarray:
        """Vertices as an ``(n, 2)`` float array."""
        return np.asarray(self.vertices, dtype=float)


class HalfPlane(PowerBaseModel):
    """The closed half-plane ``{x : normal . x <= offset}``."""

    normal: tuple[float, float]
    offset: float

    @field_validator("normal")
    @classmethod
    def _nonzero_normal(cls, normal: tuple[float, float]) -> tuple[float, float]:
        if normal[0] == 0.0 and normal[1] == 0.0:
            raise ValueError("half-plane normal must be nonzero")
        return normal


class WeightedGenerator(PowerBaseModel):
    """A site with its power weight (squared-length units).

    Weights follow the Kantorovich convention: the weight of a generator is
    the dual potential psi evaluated at its site, so a larger weight grows
    the cell.
    """

    site: Point2
    weight: float = 0.0


class PowerCell(PowerBaseModel):
    """One cell of a power diagram.

    Attributes:
        generator: Index of the generator owning the cell
        polygon: The cell, or None when the cell is empty
        neighbors: For edge k (vertex k to vertex k+1) the index of the
            generator across it, or -1 when the edge lies on the domain boundary
    """

    generator: NonNegativeInt
    polygon: ConvexPolygon | None = None
    neighbors: tuple[int, ...] = ()

    @property
    def is_empty(self) -> bool:
        return self.polygon is None

    @property
    def touches_boundary(self) -> bool:
        return -1 in self.neighbors


class PowerDiagram(PowerBaseModel):
    """Partition of the domain induced by weighted generators.

    Cell i collects the points minimising ``|x - x_i|^2 - w_i``.
    """

    generators: tuple[WeightedGenerator, ...]
    cells: tuple[PowerCell, ...]
    domain: ConvexPolygon

    @property
    def live_cells(self) -> int:
        """Number of nonempty cells."""
        return sum(1 for cell in self.cells if not cell.is_empty)


class Atom(PowerBaseModel):
    """A point mass of an atomic measure."""

    site: Point2
    mass: PositiveFloat


class AtomicMeasure(PowerBaseModel):
    """The measure ``sum_i m_i delta_{x_i}`` with distinct sites and positive masses.

    The total mass must equal the domain area; that check needs the domain and
    is performed by the transport solvers.
    """

    atoms: tuple[Atom, ...] = Field(min_length=1)

    @model_validator(mode="after")
    def _distinct_sites(self) -> "AtomicMeasure":
        seen: dict[Point2, int] = {}
        for i, atom in enumerate(self.atoms):
            if atom.site in seen:
                raise InvalidMeasure(
                    f"atoms {seen[atom.site]} and {i} share the site {tuple(atom.site)}",
                    indices=[seen[atom.site], i],
                )
            seen[atom.site] = i
        return self

    @classmethod
    def from_arrays(cls, sites: np.ndarray, masses: np.ndarray) -> "AtomicMeasure":
        return cls(
            atoms=tuple(
                Atom(site=Point2(float(x), float(y)), mass=float(m))
                for (x, y), m in zip(sites, masses)
            )
        )

    @property
    def sites(self) -> np.ndarray:
        return np.array([atom.site for atom in self.atoms], dtype=float)

    @property
    def masses(self) -> np.ndarray:
        return np.array([atom.mass for atom in self.atoms], dtype=float)

    @property
    def total_mass(self) -> float:
        return math.fsum(atom.mass for atom in self.atoms)


class EnergyBreakdown(PowerBaseModel):
    """The two terms of the limit energy and their sum.

    Serialises as ``{"lambda": ..., "perimeter": ..., "transport": ..., "total": ...}``.
    """

    lam: NonNegativeFloat = Field(alias="lambda")
    perimeter_term: NonNegativeFloat = Field(alias="perimeter")
    transport_term: NonNegativeFloat = Field(alias="transport")
    total: NonNegativeFloat

    @model_validator(mode="after")
    def _total_is_sum(self) -> "EnergyBreakdown":
        expected = self.perimeter_term + self.transport_term
        if abs(self.total - expected) > 1e-12 * max(1.0, expected):
            raise ValueError(f"total {self.total} != perimeter + transport = {expected}")
        return self

    @classmethod
    def from_terms(cls, lam: float, perimeter: float, transport: float) -> "EnergyBreakdown":
        return cls(
            lam=lam,
            perimeter_term=perimeter,
            transport_term=transport,
            total=perimeter + transport,
        )


class KantorovichWeights(PowerBaseModel):
    """Dual potentials solving the semi-discrete transport problem.

    Attributes:
        weights: One potential per atom, normalised so the first is zero
        iterations: Dual ascent iterations taken
        residual: Final ``max_i |m_i - |P_i||``
        dual_trace: Dual objective after each accepted iterate (nondecreasing)
    """

    weights: tuple[float, ...]
    iterations: NonNegativeInt
    residual: NonNegativeFloat
    dual_trace: tuple[float, ...] = ()


class HexagonalReference(PowerBaseModel):
    """Energy of an ideal honeycomb of optimally sized hexagons.

    Attributes:
        lam: Perimeter weight lambda
        d_opt: Optimal hexagon diameter
        cell_area: Area of the optimal hexagon
        cell_energy: Energy of one optimal hexagon
        total_energy: Energy of ``domain_area / cell_area`` optimal hexagons
        c6: Transport cost of a unit-area regular hexagon to its centre
        domain_area: Area the reference is computed for
    """

    lam: PositiveFloat = Field(alias="lambda")
    d_opt: PositiveFloat
    cell_area: PositiveFloat
    cell_energy: PositiveFloat
    total_energy: PositiveFloat
    c6: PositiveFloat
    domain_area: PositiveFloat

    @property
    def expected_cells(self) -> float:
        """Number of optimal hexagons that fit the domain area."""
        return self.domain_area / self.cell_area


class ELResidual(PowerBaseModel):
    """Euler-Lagrange residuals of one generator.

    Attributes:
        centroid_residual: ``|x_i - centroid(P_i)|``
        weight_residual: ``|w_i + lambda / (2 sqrt|P_i|)|``
    """

    centroid_residual: NonNegativeFloat
    weight_residual: NonNegativeFloat


class LloydConfig(PowerBaseModel):
    """Settings for one generalised Lloyd run."""

    lam: NonNegativeFloat = Field(alias="lambda")
    max_iterations: PositiveInt = 10_000
    displacement_tolerance: PositiveFloat = Field(
        default=1e-10, description="Stop threshold on site motion, relative to diam(domain)"
    )
    energy_tolerance: PositiveFloat = Field(
        default=1e-12, description="Stop threshold on the absolute energy decrease"
    )
    delete_empty: bool = True


class LloydRecord(PowerBaseModel):
    """State of a Lloyd run after one iteration (iteration 0 is the start)."""

    iteration: NonNegativeInt
    energy: EnergyBreakdown
    max_site_displacement: NonNegativeFloat
    max_weight_change: NonNegativeFloat
    live_cells: NonNegativeInt


class LloydTrace(PowerBaseModel):
    """Per-iteration records of a Lloyd run."""

    records: tuple[LloydRecord, ...] = ()

    @property
    def totals(self) -> list[float]:
        return [record.energy.total for record in self.records]

    def max_increase(self) -> float:
        """Largest energy increase between consecutive records (<= 0 when monotone)."""
        totals = self.totals
        if len(totals) < 2:
            return 0.0
        return max(b - a for a, b in zip(totals, totals[1:]))


class LloydResult(PowerBaseModel):
    """Outcome of a Lloyd run."""

    final_generators: tuple[WeightedGenerator, ...]
    trace: LloydTrace
    converged: bool
    residuals: tuple[ELResidual, ...]

    @property
    def energy(self) -> EnergyBreakdown:
        return self.trace.records[-1].energy

    @property
    def iterations(self) -> int:
        return self.trace.records[-1].iteration


class PCentroidResult(PowerBaseModel):
    """Outcome of the lagged p-centroid iteration on Voronoi cells.

    Attributes:
        p: Transport exponent
        sites: Final sites
        iterations: Steps taken
        converged: Whether the last displacement fell below tolerance
        displacements: Largest site motion of every step
    """

    p: float = Field(ge=1.0)
    sites: tuple[Point2, ...]
    iterations: NonNegativeInt
    converged: bool
    displacements: tuple[float, ...] = ()


class SearchConfig(PowerBaseModel):
    """Settings for the multistart search.

    Attributes:
        lam: Perimeter weight lambda (> 0)
        interval_coefficient: C in the interval ``M_g +- C lambda^(-2/3)``
        replicas: Random starts per cell count (N_r)
        round_iterations: Lloyd iterations per candidate per round
        energy_dedup_tolerance: Absolute tolerance on the rescaled energy used to
            factor out duplicates and to stop the refinement rounds
        rounds: Maximum number of refinement rounds
        seed: Master seed; candidate seeds derive from (seed, M, replica)
        survivors: How many of the best distinct candidates are refined per round
        survivor_window: Rescaled-energy window inside which candidates with the
            same cell count are refined as one state; runs stopped at the
            iteration cap leave copies of a state that differ by more than the
            dedup tolerance
        workers: Process pool size; None uses every core, 1 runs in-process
    """

    lam: PositiveFloat = Field(alias="lambda")
    interval_coefficient: PositiveFloat = Field(default=1.0, alias="C")
    replicas: PositiveInt = Field(default=50, alias="N_r")
    round_iterations: PositiveInt = 200
    energy_dedup_tolerance: PositiveFloat = 1e-9
    rounds: PositiveInt = 5
    seed: NonNegativeInt = 0
    survivors: PositiveInt = 20
    survivor_window: PositiveFloat = 1e-4
    workers: PositiveInt | None = None


class Provenance(PowerBaseModel):
    """Where a search candidate came from."""

    initial_cells: PositiveInt
    seed: int
    replica: NonNegativeInt


class Candidate(PowerBaseModel):
    """A local minimiser found by the search."""

    generators: tuple[WeightedGenerator, ...]
    energy: EnergyBreakdown
    rescaled_energy: float
    cell_count: NonNegativeInt
    provenance: Provenance


class SearchResult(PowerBaseModel):
    """Ranked, deduplicated candidates of a multistart search.

    Attributes:
        ranked: Candidates in ascending energy
        side_histogram: Side count -> number of cells, for the best candidate
        round_best: Best rescaled energy after the initial pass and each round
        interval: Smallest and largest initial cell counts tried
    """

    ranked: tuple[Candidate, ...] = Field(min_length=1)
    side_histogram: dict[int, int]
    round_best: tuple[float, ...]
    interval: tuple[int, int]

    @property
    def best(self) -> Candidate:
        return self.ranked[0]


class GridMeasure(PowerBaseModel):
    """Lebesgue measure of a domain lumped onto a uniform grid.

    Attributes:
        resolution: ``(nx, ny)``
        masses: ``(ny, nx)`` array, mass of grid cell intersected with the domain
        nodes: ``(ny, nx, 2)`` array, centroid of each grid cell's piece of the domain
        support: Bounding box of the domain
    """

    model_config = ConfigDict(frozen=True, extra="forbid", arbitrary_types_allowed=True)

    resolution: tuple[PositiveInt, PositiveInt]
    masses: np.ndarray
    nodes: np.ndarray
    support: ConvexPolygon


class TransportPlan(PowerBaseModel):
    """Sparse optimal plan of a discrete transport problem with its dual certificate.

    Attributes:
        flows: (grid index, atom index) -> transported mass, nonzero entries only
        row_potentials: Dual potential of every grid node
        column_potentials: Dual potential of every atom
    """

    flows: dict[tuple[int, int], float]
    row_potentials: tuple[float, ...]
    column_potentials: tuple[float, ...]

    def to_rows(self) -> list[list[float]]:
        """``[grid, atom, mass]`` rows for JSON dumps."""
        return [[i, j, mass] for (i, j), mass in sorted(self.flows.items())]


class OneDSolution(PowerBaseModel):
    """Global minimiser of the one-dimensional energy on [0, 1]."""

    lam: PositiveFloat = Field(alias="lambda")
    p: float = Field(ge=1.0)
    m_opt: PositiveInt
    energy: float
    sites: tuple[float, ...]


class CheckResult(PowerBaseModel):
    """Outcome of one verification check."""

    name: str
    passed: bool
    observed: float
    expected: float
    tolerance: float
    detail: str = ""


class RunSpec(PowerBaseModel):
    """Everything the CLI needs to run one batch job.

    Fields are deliberately loose; ``validate_spec`` lists semantic violations
    so that every problem is reported at once.
    """

    mode: RunMode
    domain: str | list[tuple[float, float]] = "unit-square"
    lambdas: tuple[float, ...] = Field(default=(), alias="lambda")
    cells: int | None = None
    seed: int = 0
    restarts: int = 50
    max_iterations: int = 10_000
    tolerance: float = 1e-10
    round_iterations: int = 200
    rounds: int = 5
    interval_coefficient: float = 1.0
    workers: int | None = None
    output_dir: Path = Path("results")
    formats: tuple[OutputFormat, ...] = (OutputFormat.JSON, OutputFormat.CSV, OutputFormat.SVG)
