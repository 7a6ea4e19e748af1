"""centroidal_power - centroidal power diagrams for a sharp-interface pattern energy.

This package minimises ``lambda * sum_i sqrt(m_i) + W2(1, sum_i m_i delta_{x_i})``
over atomic measures on a convex polygon. The transport cells of such a measure
form a power diagram, so a configuration is carried as weighted generators and
improved with a generalised Lloyd iteration. A multistart search looks for
global minimisers, and brute-force transport, a 1-D closed form and classical
CVT fixtures provide independent checks.

Basic usage:
    ```python
    import centroidal_power as cp

    domain = cp.unit_square()
    start = cp.random_init(3, domain, seed=7)
    result = cp.run_lloyd(start, domain, cp.LloydConfig(lam=0.1))
    print(result.energy.total, len(result.final_generators))
    ```
"""

__version__ = "0.1.0"

from .energy import (
    C6,
    HEX_DENSITY,
    dual_objective,
    el_residuals,
    energy_measure,
    energy_weighted,
    hexagonal_reference,
    rescale_domain,
    rescale_generators,
    rescaled_energy,
    solve_weights,
)
from .errors import (
    AllCellsEmpty,
    CentroidalPowerError,
    ConfigError,
    DuplicateSites,
    EmptyCell,
    EmptyInterval,
    GeometryError,
    InfeasibleScale,
    InvalidDomain,
    InvalidMeasure,
    MassMismatch,
    NoConvergence,
    NumericalRegression,
    QuadratureSingularity,
    SiteOutsideDomain,
    SolverError,
)
from .export import load_result
from .geometry import (
    bisector,
    bounding_box,
    clip_halfplane,
    contains,
    diameter,
    locate,
    p_moment_quadrature,
    polygon_area,
    polygon_centroid,
    polygon_second_moment,
    power_diagram,
    regular_polygon,
    scale_about_origin,
    translate,
    unit_square,
)
from .lloyd import lloyd_step, p_centroid_step, run_lloyd, run_p_centroid
from .models import (
    Atom,
    AtomicMeasure,
    Candidate,
    CheckResult,
    ConvexPolygon,
    ELResidual,
    EnergyBreakdown,
    GridMeasure,
    HalfPlane,
    HexagonalReference,
    KantorovichWeights,
    LloydConfig,
    LloydRecord,
    LloydResult,
    LloydTrace,
    OneDSolution,
    OutputFormat,
    PCentroidResult,
    Point2,
    PowerCell,
    PowerDiagram,
    Provenance,
    RunMode,
    RunSpec,
    SearchConfig,
    SearchResult,
    TransportPlan,
    WeightedGenerator,
)
from .oracle import (
    cvt_fixture_energies,
    cvt_fixture_generators,
    discrete_ot,
    energy_1d,
    grid_measure,
    lloyd_1d,
    optimality_violation,
    scan_1d,
    solve_1d,
)
from .search import (
    cell_count_interval,
    estimate_cell_count,
    genetic_search,
    hexagon_fraction,
    interior_cells,
    random_init,
    side_histogram,
)
from .verify import run_verification

__all__ = [
    # Error handling
    "CentroidalPowerError",
    "GeometryError",
    "InvalidDomain",
    "DuplicateSites",
    "EmptyCell",
    "InvalidMeasure",
    "SolverError",
    "NoConvergence",
    "AllCellsEmpty",
    "NumericalRegression",
    "QuadratureSingularity",
    "SiteOutsideDomain",
    "EmptyInterval",
    "MassMismatch",
    "InfeasibleScale",
    "ConfigError",
    # Model classes
    "Point2",
    "ConvexPolygon",
    "HalfPlane",
    "WeightedGenerator",
    "PowerCell",
    "PowerDiagram",
    "Atom",
    "AtomicMeasure",
    "EnergyBreakdown",
    "KantorovichWeights",
    "HexagonalReference",
    "ELResidual",
    "LloydConfig",
    "LloydRecord",
    "LloydTrace",
    "LloydResult",
    "PCentroidResult",
    "SearchConfig",
    "Provenance",
    "Candidate",
    "SearchResult",
    "GridMeasure",
    "TransportPlan",
    "OneDSolution",
    "CheckResult",
    "RunMode",
    "OutputFormat",
    "RunSpec",
    # Geometry
    "unit_square",
    "regular_polygon",
    "translate",
    "scale_about_origin",
    "diameter",
    "bounding_box",
    "contains",
    "clip_halfplane",
    "bisector",
    "power_diagram",
    "locate",
    "polygon_area",
    "polygon_centroid",
    "polygon_second_moment",
    "p_moment_quadrature",
    # Energy
    "C6",
    "HEX_DENSITY",
    "energy_weighted",
    "energy_measure",
    "solve_weights",
    "dual_objective",
    "hexagonal_reference",
    "rescaled_energy",
    "rescale_domain",
    "rescale_generators",
    "el_residuals",
    # Lloyd
    "lloyd_step",
    "run_lloyd",
    "p_centroid_step",
    "run_p_centroid",
    # Search
    "estimate_cell_count",
    "cell_count_interval",
    "random_init",
    "genetic_search",
    "side_histogram",
    "interior_cells",
    "hexagon_fraction",
    # Oracles
    "grid_measure",
    "discrete_ot",
    "optimality_violation",
    "solve_1d",
    "energy_1d",
    "scan_1d",
    "lloyd_1d",
    "cvt_fixture_energies",
    "cvt_fixture_generators",
    "run_verification",
    # I/O
    "load_result",
    # Version
    "__version__",
]
