#!/usr/bin/env python3
"""
Basic usage examples for centroidal_power.

This script demonstrates the fundamental operations: building a power
diagram, evaluating the energy, solving for transport weights and running
the generalised Lloyd algorithm.
"""

import numpy as np

import centroidal_power as cp
from example_utils import print_diagram_summary, print_energy


def main():
    domain = cp.unit_square()

    # Example 1: A power diagram from weighted generators
    print("=== Power Diagram ===")
    gens = [
        cp.WeightedGenerator(site=(0.25, 0.5), weight=0.1),
        cp.WeightedGenerator(site=(0.75, 0.5), weight=0.0),
    ]
    diagram = cp.power_diagram(gens, domain)
    for cell in diagram.cells:
        print(f"  generator {cell.generator}: area {cp.polygon_area(cell.polygon):.3f}, neighbours {cell.neighbors}")
    print_energy("Energy at lambda=0.1", cp.energy_weighted(gens, domain, 0.1))

    # Example 2: Weights that realise prescribed masses
    print("\n=== Kantorovich Weights ===")
    nu = cp.AtomicMeasure.from_arrays(np.array([[0.25, 0.5], [0.75, 0.5]]), np.array([0.6, 0.4]))
    kw = cp.solve_weights(nu, domain)
    print(f"  weights {tuple(round(w, 6) for w in kw.weights)} after {kw.iterations} Newton steps")
    print(f"  W2 transport cost: {cp.energy_measure(nu, domain, 0.0).transport_term:.8f}")

    # Example 3: Generalised Lloyd from a random start
    print("\n=== Generalised Lloyd ===")
    start = cp.random_init(3, domain, seed=7)
    result = cp.run_lloyd(start, domain, cp.LloydConfig(lam=0.1))
    print(f"  converged={result.converged} after {result.iterations} iterations")
    print_energy("  final", result.energy, domain)
    worst = max(r.centroid_residual for r in result.residuals)
    print(f"  largest centroid residual: {worst:.2e}")
    print_diagram_summary(cp.power_diagram(result.final_generators, domain))

    # Example 4: The honeycomb reference
    print("\n=== Honeycomb Reference ===")
    for lam in (0.1, 0.026, 0.005):
        ref = cp.hexagonal_reference(lam, 1.0)
        print(f"  lambda={lam:<6} hexagon area {ref.cell_area:.4f}, ~{ref.expected_cells:.2f} cells, E_hex={ref.total_energy:.6f}")

    # Example 5: Handling errors
    print("\n=== Error Handling ===")
    try:
        cp.ConvexPolygon(vertices=[(0, 0), (0, 1), (1, 1), (1, 0)])
    except cp.InvalidDomain as e:
        print(f"  ✗ {e}")
    try:
        cp.power_diagram([cp.WeightedGenerator(site=(0.5, 0.5))] * 2, domain)
    except cp.CentroidalPowerError as e:
        print(f"  ✗ {type(e).__name__}: {e.to_dict()['details']}")


if __name__ == "__main__":
    main()
