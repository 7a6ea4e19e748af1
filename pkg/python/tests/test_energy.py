"""
Tests for energy evaluation, Kantorovich weights and the honeycomb reference.
"""
import math

import numpy as np
import pytest

from centroidal_power import (
    C6,
    HEX_DENSITY,
    AtomicMeasure,
    EmptyCell,
    EnergyBreakdown,
    InvalidMeasure,
    WeightedGenerator,
    dual_objective,
    cvt_fixture_generators,
    el_residuals,
    energy_measure,
    energy_weighted,
    hexagonal_reference,
    polygon_area,
    rescale_domain,
    rescale_generators,
    rescaled_energy,
    solve_weights,
)
from centroidal_power.energy import cell_moments, rescale_factor, to_generators
from centroidal_power.geometry import power_cells
from centroidal_power.models import Point2


def _measure(sites, masses):
    return AtomicMeasure.from_arrays(np.asarray(sites, dtype=float), np.asarray(masses, dtype=float))


class TestEnergyWeighted:
    """Energy of weighted generators"""

    def test_single_generator(self, square):
        """One cell: perimeter lambda, transport 1/6"""
        e = energy_weighted([WeightedGenerator(site=Point2(0.5, 0.5))], square, 1.0)
        assert e.perimeter_term == pytest.approx(1.0)
        assert e.transport_term == pytest.approx(1.0 / 6.0, abs=1e-15)
        assert e.total == pytest.approx(7.0 / 6.0)

    def test_lambda_zero_is_pure_transport(self, square, two_generators):
        """At lambda = 0 only the transport term remains"""
        e = energy_weighted(two_generators, square, 0.0)
        assert e.perimeter_term == 0.0
        assert e.total == e.transport_term > 0.0

    def test_masses_are_cell_areas(self, square, two_generators):
        """The perimeter term uses the induced cell areas"""
        e = energy_weighted(two_generators, square, 1.0)
        assert e.perimeter_term == pytest.approx(math.sqrt(0.6) + math.sqrt(0.4))

    def test_negative_lambda_rejected(self, square, two_generators):
        """Lambda must be nonnegative"""
        with pytest.raises(ValueError):
            energy_weighted(two_generators, square, -0.1)

    def test_breakdown_wire_names(self):
        """Energies serialise under the lambda/perimeter/transport names"""
        e = EnergyBreakdown.from_terms(0.5, 1.0, 0.25)
        assert e.model_dump(by_alias=True) == {
            "lambda": 0.5,
            "perimeter": 1.0,
            "transport": 0.25,
            "total": 1.25,
        }

    def test_breakdown_total_checked(self):
        """A total that is not the sum of its terms is rejected"""
        with pytest.raises(ValueError):
            EnergyBreakdown(lam=1.0, perimeter_term=1.0, transport_term=1.0, total=3.0)


class TestSolveWeights:
    """Kantorovich weights by damped Newton dual ascent"""

    def test_two_atoms(self, square):
        """Masses 0.6 and 0.4 put the bisector at x = 0.6"""
        nu = _measure([[0.25, 0.5], [0.75, 0.5]], [0.6, 0.4])
        kw = solve_weights(nu, square)
        assert kw.weights[0] == 0.0
        assert kw.weights[1] == pytest.approx(-0.1, abs=1e-6)
        assert kw.residual <= 1e-7

    def test_single_atom(self, square):
        """A single atom needs no iterations"""
        kw = solve_weights(_measure([[0.5, 0.5]], [1.0]), square)
        assert kw.weights == (0.0,)
        assert kw.iterations == 0

    def test_masses_reproduced(self, square, rng):
        """Cells of the solved weights carry the prescribed masses"""
        sites = rng.uniform(0.05, 0.95, size=(15, 2))
        masses = rng.uniform(0.5, 1.5, size=15)
        masses /= masses.sum()
        kw = solve_weights(_measure(sites, masses), square)
        areas, _, _ = cell_moments(sites, power_cells(sites, np.asarray(kw.weights), square))
        assert np.abs(areas - masses).max() <= 1e-7

    def test_dual_trace_nondecreasing(self, square, rng):
        """The dual objective never decreases along the accepted iterates"""
        sites = rng.uniform(0.05, 0.95, size=(10, 2))
        masses = np.linspace(1.0, 3.0, 10)
        masses /= masses.sum()
        kw = solve_weights(_measure(sites, masses), square)
        trace = np.asarray(kw.dual_trace)
        assert np.all(np.diff(trace) >= -1e-13 * np.maximum(1.0, np.abs(trace[:-1])))

    def test_dual_maximum_is_transport_cost(self, square):
        """At the optimum the dual objective equals the transport cost"""
        nu = _measure([[0.2, 0.3], [0.7, 0.4], [0.5, 0.8]], [0.3, 0.3, 0.4])
        kw = solve_weights(nu, square)
        transport = energy_measure(nu, square, 0.0).transport_term
        assert dual_objective(nu, kw.weights, square) == pytest.approx(transport, abs=1e-7)

    def test_mass_mismatch_rejected(self, square):
        """Total mass must equal the domain area"""
        with pytest.raises(InvalidMeasure) as exc:
            solve_weights(_measure([[0.25, 0.5], [0.75, 0.5]], [0.6, 0.6]), square)
        assert exc.value.details["area"] == pytest.approx(1.0)

    def test_atom_outside_rejected(self, square):
        """Atoms must lie in the domain"""
        with pytest.raises(InvalidMeasure) as exc:
            solve_weights(_measure([[0.25, 0.5], [1.5, 0.5]], [0.5, 0.5]), square)
        assert exc.value.details["index"] == 1

    def test_tiny_atom_rejected(self, square):
        """Numerically massless atoms are refused"""
        with pytest.raises(InvalidMeasure):
            solve_weights(_measure([[0.25, 0.5], [0.75, 0.5]], [1.0 - 1e-14, 1e-14]), square)

    def test_duplicate_atoms_rejected(self):
        """Two atoms at one site are not a valid measure"""
        with pytest.raises(InvalidMeasure):
            _measure([[0.5, 0.5], [0.5, 0.5]], [0.5, 0.5])


class TestEnergyMeasure:
    """Energy of atomic measures"""

    def test_centre_atom(self, square):
        """A single atom at the centre costs 1/6"""
        e = energy_measure(_measure([[0.5, 0.5]], [1.0]), square, 0.1)
        assert e.transport_term == pytest.approx(1.0 / 6.0, abs=1e-15)
        assert e.perimeter_term == pytest.approx(0.1)

    def test_corner_atom(self, square):
        """A single atom at a corner costs 2/3"""
        e = energy_measure(_measure([[0.0, 0.0]], [1.0]), square, 0.0)
        assert e.transport_term == pytest.approx(2.0 / 3.0, abs=1e-15)

    def test_agrees_with_weighted_energy(self, square, two_generators):
        """The induced measure of weighted generators has the same energy"""
        direct = energy_weighted(two_generators, square, 0.3)
        nu = _measure([[0.25, 0.5], [0.75, 0.5]], [0.6, 0.4])
        assert energy_measure(nu, square, 0.3).total == pytest.approx(direct.total, abs=1e-7)


class TestHexagonalReference:
    """Closed-form honeycomb constants"""

    def test_cell_energy_formula(self):
        """One optimal hexagon costs lambda sqrt(A) + c6 A^2"""
        ref = hexagonal_reference(0.1, 1.0)
        assert ref.cell_energy == pytest.approx(0.1 * math.sqrt(ref.cell_area) + C6 * ref.cell_area**2)

    def test_cell_area_is_optimal(self):
        """The optimal hexagon area is (lambda / (2 c6))^(2/3)"""
        lam = 0.026
        ref = hexagonal_reference(lam, 1.0)
        assert ref.cell_area == pytest.approx((lam / (2.0 * C6)) ** (2.0 / 3.0))

    def test_density(self):
        """The honeycomb at lambda = 0.005 holds about 16.03 cells per unit area"""
        ref = hexagonal_reference(0.005, 1.0)
        assert ref.expected_cells == pytest.approx(16.03, abs=0.01)
        assert ref.expected_cells * 0.005 ** (2.0 / 3.0) == pytest.approx(HEX_DENSITY)

    def test_total_scales_with_area(self):
        """The honeycomb energy is extensive"""
        assert hexagonal_reference(0.1, 3.0).total_energy == pytest.approx(
            3.0 * hexagonal_reference(0.1, 1.0).total_energy
        )

    def test_rescaled_energy(self):
        """The honeycomb itself has rescaled energy zero"""
        ref = hexagonal_reference(0.1, 1.0)
        e = EnergyBreakdown.from_terms(0.1, ref.total_energy - 0.05, 0.05 + ref.cell_energy)
        assert rescaled_energy(e, ref) == pytest.approx(1.0)

    def test_rescaled_energy_lambda_mismatch(self):
        """A reference for another lambda is refused"""
        with pytest.raises(ValueError):
            rescaled_energy(EnergyBreakdown.from_terms(0.2, 1.0, 0.1), hexagonal_reference(0.1, 1.0))

    def test_nonpositive_lambda(self):
        """The reference needs lambda > 0"""
        with pytest.raises(ValueError):
            hexagonal_reference(0.0, 1.0)


class TestScaling:
    """The rescaling that maps lambda to 2 c6"""

    def test_energy_scales_by_four_thirds_power(self, square, rng):
        """E(rescaled, 2 c6) = (2 c6 / lambda)^(4/3) E(original, lambda)"""
        lam = 0.05
        sites = rng.uniform(0.05, 0.95, size=(8, 2))
        weights = rng.uniform(-0.02, 0.0, size=8)
        gens = to_generators(sites, weights)
        original = energy_weighted(gens, square, lam)
        scaled = energy_weighted(rescale_generators(gens, lam), rescale_domain(square, lam), 2.0 * C6)
        factor = (2.0 * C6 / lam) ** (4.0 / 3.0)
        assert scaled.total == pytest.approx(factor * original.total, rel=1e-12)
        assert scaled.perimeter_term == pytest.approx(factor * original.perimeter_term, rel=1e-12)


class TestResiduals:
    """Euler-Lagrange residuals"""

    def test_critical_single_generator(self, square):
        """A centred generator with weight -lambda/2 is critical"""
        gens = [WeightedGenerator(site=Point2(0.5, 0.5), weight=-0.05)]
        (res,) = el_residuals(gens, square, 0.1)
        assert res.centroid_residual == pytest.approx(0.0, abs=1e-15)
        assert res.weight_residual == pytest.approx(0.0, abs=1e-15)

    def test_empty_cell_raises(self, square):
        """Residuals need every cell to be nonempty"""
        gens = [
            WeightedGenerator(site=Point2(0.25, 0.5)),
            WeightedGenerator(site=Point2(0.75, 0.5), weight=-10.0),
        ]
        with pytest.raises(EmptyCell) as exc:
            el_residuals(gens, square, 0.1)
        assert exc.value.details["index"] == 1

    def test_perturbed_site(self, square):
        """Moving one site of the 2x2 CVT leaves it short of its centroid"""
        gens = list(cvt_fixture_generators("2x2"))
        gens[0] = WeightedGenerator(site=Point2(0.26, 0.25))
        residuals = el_residuals(gens, square, 0.0)
        assert 1e-3 < residuals[0].centroid_residual < 0.01
        assert all(r.weight_residual == 0.0 for r in residuals)

    def test_exact_cvt(self, square):
        """The 2x2 CVT at lambda = 0 is critical"""
        residuals = el_residuals(cvt_fixture_generators("2x2"), square, 0.0)
        assert max(r.centroid_residual for r in residuals) < 1e-12


class TestRescaleDomain:
    """Scaling the domain to perimeter weight 2 c6"""

    def test_identity_at_two_c6(self, square):
        """lambda = 2 c6 leaves the domain unchanged"""
        assert np.allclose(rescale_domain(square, 2.0 * C6).array, square.array, rtol=0.0, atol=1e-15)

    def test_side_doubles(self, square):
        """lambda = 2 c6 / 8 doubles the side of the square"""
        scaled = rescale_domain(square, 2.0 * C6 / 8.0)
        assert polygon_area(scaled) == pytest.approx(4.0, rel=1e-12)
        assert np.allclose(scaled.array, 2.0 * square.array, rtol=0.0, atol=1e-12)

    def test_factor_decreases_with_lambda(self):
        """Smaller lambda means a larger domain"""
        factors = [rescale_factor(lam) for lam in (0.001, 0.01, 0.1, 1.0)]
        assert factors == sorted(factors, reverse=True)


class TestInvariances:
    """Consistency of the two energy coordinates and the dual gauge"""

    @pytest.mark.parametrize("seed", range(5))
    def test_weighted_energy_matches_measure_energy(self, square, seed):
        """Weighted generators and their induced measure have the same energy"""
        rng = np.random.default_rng(seed)
        grid = np.array([(x, y) for y in (0.25, 0.75) for x in (1 / 6, 0.5, 5 / 6)])
        sites = grid + rng.uniform(-0.05, 0.05, size=(6, 2))
        weights = rng.uniform(-0.005, 0.005, size=6)
        areas, _, _ = cell_moments(sites, power_cells(sites, weights, square))
        assert np.all(areas > 1e-3)
        direct = energy_weighted(to_generators(sites, weights), square, 0.1)
        induced = energy_measure(_measure(sites, areas / areas.sum()), square, 0.1)
        assert induced.total == pytest.approx(direct.total, abs=1e-8)

    def test_common_weight_offset(self, square):
        """Shifting every Kantorovich weight keeps the cells and the dual value"""
        nu = _measure([[0.2, 0.3], [0.7, 0.4], [0.5, 0.8]], [0.3, 0.3, 0.4])
        weights = np.asarray(solve_weights(nu, square).weights)
        shifted = weights + 0.25
        assert dual_objective(nu, shifted, square) == pytest.approx(dual_objective(nu, weights, square), abs=1e-12)
        areas, costs, _ = cell_moments(nu.sites, power_cells(nu.sites, weights, square))
        areas_shifted, costs_shifted, _ = cell_moments(nu.sites, power_cells(nu.sites, shifted, square))
        assert np.allclose(areas, areas_shifted, rtol=0.0, atol=1e-12)
        assert costs.sum() == pytest.approx(costs_shifted.sum(), abs=1e-12)
