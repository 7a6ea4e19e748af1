#!/usr/bin/env python3
"""
Cross-checks against independent reference solutions.

Compares power-cell transport with brute-force discrete transport, prints the
1-D closed form next to an exhaustive scan, and runs the verification suite.
"""

import sys
from fractions import Fraction

import numpy as np

import centroidal_power as cp
from centroidal_power.export import plan_to_dict, write_json
from centroidal_power.verify import format_table
from example_utils import ensure_export_directory


def main():
    domain = cp.unit_square()

    print("=== Semi-discrete vs Discrete Transport ===")
    rng = np.random.default_rng(3)
    sites = rng.uniform(0.1, 0.9, size=(5, 2))
    nu = cp.AtomicMeasure.from_arrays(sites, np.full(5, 0.2))
    exact = cp.energy_measure(nu, domain, 0.0).transport_term
    for n in (16, 32, 64):
        cost, plan = cp.discrete_ot(cp.grid_measure(domain, n), nu)
        print(f"  {n:>3}x{n:<3} grid: {cost:.6f} (power cells {exact:.6f}, gap {abs(cost - exact):.1e}, "
              f"{len(plan.flows)} flows)")
    path = write_json(plan_to_dict(plan, cost), ensure_export_directory() / "plan_64.json")
    print(f"  ✓ wrote the 64x64 plan to {path}")

    print("\n=== One-Dimensional Minimiser ===")
    for lam in (Fraction(1, 6000), 0.01, 1e-4):
        solution = cp.solve_1d(lam)
        print(f"  lambda={float(lam):.3g}: M={solution.m_opt} (scan {cp.scan_1d(lam)}), E={solution.energy:.8f}")

    print("\n=== Verification Suite ===")
    results = cp.run_verification()
    print(format_table(results))
    return 0 if all(r.passed for r in results) else 1


if __name__ == "__main__":
    sys.exit(main())
