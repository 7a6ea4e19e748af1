"""
Tests for polygons, power diagrams and polygon moments.
"""
import math

import numpy as np
import pytest

from centroidal_power import (
    C6,
    ConvexPolygon,
    DuplicateSites,
    HalfPlane,
    InvalidDomain,
    SiteOutsideDomain,
    WeightedGenerator,
    bisector,
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
    translate,
)
from centroidal_power.energy import to_generators
from centroidal_power.geometry import BOUNDARY, moments_about, power_cells
from centroidal_power.models import Point2


class TestConvexPolygon:
    """Validation of the convex-domain invariants"""

    def test_square_is_valid(self, square):
        """The unit square passes validation"""
        assert len(square.vertices) == 4
        assert diameter(square) == pytest.approx(math.sqrt(2.0))

    def test_clockwise_rejected(self):
        """Clockwise vertex order raises InvalidDomain"""
        with pytest.raises(InvalidDomain) as exc:
            ConvexPolygon(vertices=[(0, 0), (0, 1), (1, 1), (1, 0)])
        assert "counterclockwise" in str(exc.value)

    def test_reflex_vertex_rejected(self):
        """A non-convex polygon lists its reflex vertex"""
        with pytest.raises(InvalidDomain) as exc:
            ConvexPolygon(vertices=[(0, 0), (2, 0), (1, 0.5), (2, 2), (0, 2)])
        assert any("reflex" in v for v in exc.value.details["violations"])

    def test_too_few_vertices(self):
        """Two vertices are not a polygon"""
        with pytest.raises(InvalidDomain):
            ConvexPolygon(vertices=[(0, 0), (1, 0)])

    def test_repeated_vertex_rejected(self):
        """Consecutive coincident vertices are degenerate"""
        with pytest.raises(InvalidDomain):
            ConvexPolygon(vertices=[(0, 0), (1, 0), (1, 0), (1, 1), (0, 1)])

    def test_contains(self, square):
        """Closed and strict containment differ on the boundary"""
        assert contains(square, (0.5, 0.5), strict=True)
        assert contains(square, (1.0, 0.3))
        assert not contains(square, (1.0, 0.3), strict=True)
        assert not contains(square, (1.2, 0.3))


class TestMoments:
    """Closed-form polygon moments and the p-moment quadrature"""

    def test_square_moments(self, square):
        """Area, centroid and second moment of the unit square"""
        assert polygon_area(square) == pytest.approx(1.0, abs=1e-15)
        assert polygon_centroid(square) == pytest.approx((0.5, 0.5), abs=1e-15)
        assert polygon_second_moment(square, (0.5, 0.5)) == pytest.approx(1.0 / 6.0, abs=1e-15)

    def test_square_moment_about_corner(self, square):
        """Second moment about a corner is 2/3"""
        assert polygon_second_moment(square, (0.0, 0.0)) == pytest.approx(2.0 / 3.0, abs=1e-15)

    def test_unit_hexagon_constant(self):
        """A unit-area regular hexagon has second moment 5 sqrt(3)/54 about its centre"""
        hexagon = regular_polygon(6, area=1.0)
        assert polygon_area(hexagon) == pytest.approx(1.0, abs=1e-14)
        assert polygon_second_moment(hexagon, (0.0, 0.0)) == pytest.approx(C6, abs=1e-14)

    def test_moments_translate(self, square):
        """Moments about a point do not depend on where the polygon sits"""
        moved = translate(square, 3.0, -2.0)
        assert polygon_second_moment(moved, (3.5, -1.5)) == pytest.approx(1.0 / 6.0, abs=1e-12)
        area, sx, sy, _ = moments_about(moved.vertices, 3.5, -1.5)
        assert area == pytest.approx(1.0)
        assert sx == pytest.approx(0.0, abs=1e-12)
        assert sy == pytest.approx(0.0, abs=1e-12)

    def test_quadrature_matches_exact_for_p2(self, square):
        """The p = 2 quadrature reproduces the closed form"""
        for point in [(0.5, 0.5), (0.1, 0.8), (0.0, 0.0)]:
            assert p_moment_quadrature(square, point, 2.0) == pytest.approx(
                polygon_second_moment(square, point), abs=1e-14
            )

    def test_quadrature_p4(self, square):
        """The p = 4 moment of the unit square about its centre is 7/180"""
        assert p_moment_quadrature(square, (0.5, 0.5), 4.0) == pytest.approx(7.0 / 180.0, abs=1e-14)

    def test_quadrature_refinement_converges_for_p1(self, square):
        """Refining the fan moves the p = 1 moment towards a fixed value"""
        coarse = p_moment_quadrature(square, (0.5, 0.5), 1.0, refine=1)
        fine = p_moment_quadrature(square, (0.5, 0.5), 1.0, refine=4)
        # mean distance from the centre of the unit square
        exact = (math.sqrt(2.0) + math.log(1.0 + math.sqrt(2.0))) / 6.0
        assert abs(fine - exact) < abs(coarse - exact) + 1e-15
        assert fine == pytest.approx(exact, rel=1e-4)

    def test_quadrature_rejects_small_p(self, square):
        """Exponents below one are refused"""
        with pytest.raises(ValueError):
            p_moment_quadrature(square, (0.5, 0.5), 0.5)


class TestClipping:
    """Half-plane clipping and bisectors"""

    def test_clip_half(self, square):
        """Clipping by x <= 0.5 keeps the left half"""
        half = clip_halfplane(square, HalfPlane(normal=(1.0, 0.0), offset=0.5))
        assert half is not None
        assert polygon_area(half) == pytest.approx(0.5)

    def test_clip_everything(self, square):
        """A half-plane missing the polygon leaves nothing"""
        assert clip_halfplane(square, HalfPlane(normal=(1.0, 0.0), offset=-1.0)) is None

    def test_clip_nothing(self, square):
        """A half-plane containing the polygon returns it whole"""
        kept = clip_halfplane(square, HalfPlane(normal=(0.0, 1.0), offset=5.0))
        assert polygon_area(kept) == pytest.approx(1.0)

    def test_zero_normal_rejected(self):
        """A half-plane needs a direction"""
        with pytest.raises(ValueError):
            HalfPlane(normal=(0.0, 0.0), offset=1.0)

    def test_bisector_of_weighted_pair(self, two_generators):
        """The bisector of the example pair is x = 0.6"""
        h = bisector(*two_generators)
        assert h.offset / h.normal[0] == pytest.approx(0.6)
        assert h.normal[1] == 0.0


class TestPowerDiagram:
    """Construction and queries of power diagrams"""

    def test_single_generator_owns_domain(self, square):
        """One generator gets the whole domain with boundary-only edges"""
        diagram = power_diagram([WeightedGenerator(site=Point2(0.3, 0.3))], square)
        cell = diagram.cells[0]
        assert polygon_area(cell.polygon) == pytest.approx(1.0)
        assert set(cell.neighbors) == {BOUNDARY}

    def test_weighted_pair(self, square, two_generators):
        """The heavier generator's cell extends to x = 0.6"""
        diagram = power_diagram(two_generators, square)
        left, right = diagram.cells
        assert polygon_area(left.polygon) == pytest.approx(0.6)
        assert polygon_area(right.polygon) == pytest.approx(0.4)
        assert 1 in left.neighbors and BOUNDARY in left.neighbors
        assert 0 in right.neighbors

    def test_cells_partition_domain(self, square, rng):
        """Cell areas add up to the domain area"""
        sites = rng.uniform(0.05, 0.95, size=(25, 2))
        weights = rng.uniform(-0.01, 0.01, size=25)
        diagram = power_diagram(to_generators(sites, weights), square)
        total = sum(polygon_area(c.polygon) for c in diagram.cells if c.polygon is not None)
        assert total == pytest.approx(1.0, abs=1e-12)

    def test_cells_agree_with_locate(self, square, rng):
        """Each cell centroid is located in its own cell"""
        sites = rng.uniform(0.05, 0.95, size=(12, 2))
        diagram = power_diagram(to_generators(sites, np.zeros(12)), square)
        for cell in diagram.cells:
            assert locate(diagram, polygon_centroid(cell.polygon)) == cell.generator

    def test_empty_cell(self, square):
        """A very light generator ends up with no cell"""
        gens = [
            WeightedGenerator(site=Point2(0.25, 0.5), weight=0.0),
            WeightedGenerator(site=Point2(0.75, 0.5), weight=-10.0),
        ]
        diagram = power_diagram(gens, square)
        assert diagram.cells[1].is_empty
        assert diagram.live_cells == 1
        assert polygon_area(diagram.cells[0].polygon) == pytest.approx(1.0)

    def test_duplicate_sites(self, square):
        """Coincident sites raise DuplicateSites with their indices"""
        gens = [
            WeightedGenerator(site=Point2(0.5, 0.5)),
            WeightedGenerator(site=Point2(0.2, 0.2)),
            WeightedGenerator(site=Point2(0.5, 0.5)),
        ]
        with pytest.raises(DuplicateSites) as exc:
            power_diagram(gens, square)
        assert exc.value.details["indices"] == [0, 2]

    def test_no_generators(self, square):
        """An empty generator list is refused"""
        with pytest.raises(ValueError):
            power_diagram([], square)

    def test_locate_ties_go_to_lowest_index(self, square):
        """A point on the bisector belongs to the first generator"""
        gens = [WeightedGenerator(site=Point2(0.25, 0.5)), WeightedGenerator(site=Point2(0.75, 0.5))]
        assert locate(power_diagram(gens, square), (0.5, 0.1)) == 0

    def test_triangle_domain(self):
        """Diagrams work on a non-rectangular domain"""
        triangle = ConvexPolygon(vertices=[(0.0, 0.0), (2.0, 0.0), (0.0, 1.0)])
        gens = [WeightedGenerator(site=Point2(0.3, 0.3)), WeightedGenerator(site=Point2(1.2, 0.2))]
        diagram = power_diagram(gens, triangle)
        assert sum(polygon_area(c.polygon) for c in diagram.cells) == pytest.approx(1.0)

    @pytest.mark.filterwarnings("error::RuntimeWarning")
    def test_build_emits_no_warnings(self, square, two_generators):
        """Building a diagram raises no floating-point warnings"""
        diagram = power_diagram(two_generators, square)
        assert diagram.live_cells == 2

    def test_site_outside_domain(self, square):
        """A site outside the domain is refused with its index"""
        gens = [WeightedGenerator(site=Point2(0.5, 0.5)), WeightedGenerator(site=Point2(1.2, 0.5))]
        with pytest.raises(SiteOutsideDomain) as exc:
            power_diagram(gens, square)
        assert exc.value.details["index"] == 1

    def test_site_on_boundary_accepted(self, square):
        """Sites on the boundary are inside the closed domain"""
        gens = [WeightedGenerator(site=Point2(0.0, 0.5)), WeightedGenerator(site=Point2(1.0, 1.0))]
        diagram = power_diagram(gens, square)
        assert sum(polygon_area(c.polygon) for c in diagram.cells) == pytest.approx(1.0)


def _sites_inside(domain, count, rng):
    xmin, ymin = np.min(domain.array, axis=0)
    xmax, ymax = np.max(domain.array, axis=0)
    sites = []
    while len(sites) < count:
        point = (rng.uniform(xmin, xmax), rng.uniform(ymin, ymax))
        if contains(domain, point, strict=True):
            sites.append(point)
    return np.array(sites)


class TestDiagramProperties:
    """Structural properties of power diagrams on random instances"""

    @pytest.mark.parametrize("seed", range(5))
    def test_membership(self, seed):
        """Random points lie in the cell of their power-nearest generator"""
        rng = np.random.default_rng(seed)
        domain = regular_polygon(int(rng.integers(3, 9)), rotation=float(rng.uniform(0.0, 1.0)))
        sites = _sites_inside(domain, 20, rng)
        weights = rng.uniform(-0.01, 0.01, size=20)
        diagram = power_diagram(to_generators(sites, weights), domain)
        points = _sites_inside(domain, 1000, rng)
        power = ((points[:, None, :] - sites[None, :, :]) ** 2).sum(axis=2) - weights[None, :]
        order = np.sort(power, axis=1)
        checked = 0
        for point, row, ranked in zip(points, power, order):
            if ranked[1] - ranked[0] < 1e-9:
                continue
            cell = diagram.cells[int(np.argmin(row))]
            assert cell.polygon is not None
            assert contains(cell.polygon, point, tolerance=1e-12)
            checked += 1
        assert checked > 990

    @pytest.mark.parametrize("seed", range(3))
    def test_partition_of_random_domain(self, seed):
        """Cells of a random polygonal domain add up to its area"""
        rng = np.random.default_rng(100 + seed)
        domain = regular_polygon(int(rng.integers(3, 9)), area=float(rng.uniform(0.5, 2.0)))
        sites = _sites_inside(domain, 40, rng)
        diagram = power_diagram(to_generators(sites, rng.uniform(-0.01, 0.01, size=40)), domain)
        total = sum(polygon_area(c.polygon) for c in diagram.cells if c.polygon is not None)
        assert total == pytest.approx(polygon_area(domain), abs=1e-9 * polygon_area(domain))

    def test_common_weight_shift(self, square, rng):
        """Adding a constant to every weight leaves every cell unchanged"""
        sites = rng.uniform(0.05, 0.95, size=(15, 2))
        weights = rng.uniform(-0.01, 0.01, size=15)
        before = power_cells(sites, weights, square)
        after = power_cells(sites, weights + 0.37, square)
        for a, b in zip(before, after):
            assert (a is None) == (b is None)
            if a is None:
                continue
            assert a[1] == b[1]
            assert np.allclose(a[0], b[0], rtol=0.0, atol=1e-12)

    def test_translation_equivariance(self, square, rng):
        """Translating sites and domain translates every cell"""
        sites = rng.uniform(0.05, 0.95, size=(15, 2))
        weights = rng.uniform(-0.01, 0.01, size=15)
        shift = np.array([3.0, -2.0])
        before = power_cells(sites, weights, square)
        after = power_cells(sites + shift, weights, translate(square, *shift))
        for a, b in zip(before, after):
            assert (a is None) == (b is None)
            if a is None:
                continue
            assert a[1] == b[1]
            assert np.allclose(np.asarray(a[0]) + shift, b[0], rtol=0.0, atol=1e-12)

    def test_moment_additivity(self):
        """The second moment equals the sum over a fan triangulation"""
        hexagon = regular_polygon(6, area=1.0, center=(0.3, -0.2), rotation=0.4)
        verts = [tuple(v) for v in hexagon.vertices]
        whole = moments_about(verts, 0.1, 0.05)[3]
        parts = sum(
            moments_about([verts[0], verts[k], verts[k + 1]], 0.1, 0.05)[3] for k in range(1, len(verts) - 1)
        )
        assert parts == pytest.approx(whole, rel=1e-12)
