"""
Tests for the verification suite.
"""
import pytest

from centroidal_power import CheckResult, run_verification
from centroidal_power.verify import (
    check_cvt_fixtures,
    check_density_constant,
    check_hexagon_constant,
    check_one_dimensional,
    check_oracle_equivalence,
    check_single_atom,
    format_table,
)


class TestChecks:
    """Individual checks pass"""

    @pytest.mark.parametrize(
        "check",
        [check_hexagon_constant, check_density_constant, check_one_dimensional, check_cvt_fixtures],
    )
    def test_closed_form_checks(self, check):
        """Closed-form constants and fixtures agree"""
        results = check()
        assert results
        assert all(r.passed for r in results), [r.name for r in results if not r.passed]

    def test_single_atom(self):
        """Power cells and discrete transport agree for one atom"""
        assert all(r.passed for r in check_single_atom())

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_oracle_equivalence(self, seed):
        """Random three-atom measures agree with the discrete oracle"""
        (result,) = check_oracle_equivalence(seed=seed)
        assert result.passed, f"observed {result.observed}, expected {result.expected}"


class TestReport:
    """The pass/fail table"""

    def test_table(self):
        """Each result gets a row with its status"""
        results = [
            CheckResult(name="a", passed=True, observed=1.0, expected=1.0, tolerance=0.0),
            CheckResult(name="longer name", passed=False, observed=2.0, expected=1.0, tolerance=0.5),
        ]
        lines = format_table(results).splitlines()
        assert len(lines) == 3
        assert "PASS" in lines[1]
        assert "FAIL" in lines[2]

    @pytest.mark.slow
    def test_full_suite(self):
        """Every check in the suite passes"""
        results = run_verification()
        assert len(results) >= 12
        assert all(r.passed for r in results)
