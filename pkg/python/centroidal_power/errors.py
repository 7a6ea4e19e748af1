"""Sealed error hierarchy for centroidal_power with actionable error messages."""

from typing import Any


class CentroidalPowerError(Exception):
    """Base exception for all centroidal_power errors.

    Provides a common base class for all exceptions raised by the package,
    enabling callers to catch every library failure in a single except clause.
    Structured context (iteration counts, residuals, offending indices) is kept
    in ``details`` so the CLI can emit it as machine-readable JSON.

    Examples:
        ```python
        try:
            result = run_lloyd(generators, domain, config)
        except CentroidalPowerError as e:
            print(f"Error: {e}")
            print(e.to_dict())
        ```
    """

    def __init__(self, message: str, **details: Any) -> None:
        """Initialize with a clear, actionable error message.

        Args:
            message: Error description with guidance for resolution
            **details: Structured context describing the failure
        """
        super().__init__(message)
        self.details = details

    def to_dict(self) -> dict[str, Any]:
        """Machine-readable form: error class, message and details."""
        return {"error": type(self).__name__, "message": str(self), "details": self.details}


class GeometryError(CentroidalPowerError):
    """Exception raised when a geometric input cannot be processed."""


class InvalidDomain(GeometryError):
    """Exception raised when a polygon violates the convex-domain invariants.

    Common causes:
    - Fewer than three vertices
    - Clockwise vertex order (negative signed area)
    - A reflex vertex (the polygon is not convex)
    - Two consecutive vertices closer than the degeneracy tolerance

    Examples:
        ```python
        try:
            domain = ConvexPolygon(vertices=[(0, 0), (1, 1), (1, 0), (0, 1)])
        except InvalidDomain as e:
            print(e)  # "vertex 1 is reflex ..."
        ```
    """


class DuplicateSites(GeometryError):
    """Exception raised when two generators share a site within tolerance.

    The bisector of two coincident sites is undefined, so the power diagram
    cannot be built. Perturb or merge the sites before retrying.
    """


class SiteOutsideDomain(GeometryError):
    """Exception raised when a generator site lies outside the domain.

    A cell is the domain clipped by bisectors, so a site outside it has no
    meaningful cell. Sites on the boundary are accepted.
    """


class EmptyCell(CentroidalPowerError):
    """Exception raised when an operation needs every power cell to be nonempty.

    Common causes:
    - A weight so small that the generator's cell was crushed by its neighbours
    - Asking for Euler-Lagrange residuals before deleting empty cells
    """


class InvalidMeasure(CentroidalPowerError):
    """Exception raised when an atomic measure cannot be transported from the domain.

    Common causes:
    - An atom with (numerically) zero mass
    - An atom placed outside the domain
    """


class SolverError(CentroidalPowerError):
    """Base class for failures inside an iterative solver."""


class NoConvergence(SolverError):
    """Exception raised when the Kantorovich dual ascent stalls.

    ``details`` carries ``iterations`` and the final mass ``residual``.
    """


class AllCellsEmpty(SolverError):
    """Exception raised when a Lloyd step leaves no nonempty power cell."""


class NumericalRegression(SolverError):
    """Exception raised when a Lloyd iteration increases the energy.

    The generalised Lloyd map never increases the energy in exact arithmetic,
    so an increase beyond rounding slack points at a geometry or rounding bug.
    ``details`` carries the ``iteration`` and the energy increase ``delta``.
    """


class QuadratureSingularity(SolverError):
    """Exception raised when a singular p-moment integrand hits a quadrature node."""


class EmptyInterval(CentroidalPowerError):
    """Exception raised when the search interval contains no positive cell count."""


class MassMismatch(CentroidalPowerError):
    """Exception raised when two measures that must balance carry different mass."""


class InfeasibleScale(CentroidalPowerError):
    """Exception raised when a brute-force transport problem exceeds the size caps."""


class ConfigError(CentroidalPowerError):
    """Exception raised when a run specification is invalid.

    ``details["violations"]`` lists every violated constraint.

    Examples:
        ```python
        try:
            run(spec)
        except ConfigError as e:
            for violation in e.details["violations"]:
                print(f"- {violation}")
        ```
    """
