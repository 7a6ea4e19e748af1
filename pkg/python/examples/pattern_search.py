#!/usr/bin/env python3
"""
Multistart search over several lambdas.

Runs the genetic search for each perimeter weight, compares the best state
with the honeycomb and writes the artifacts the CLI would write.
"""

import sys

import centroidal_power as cp
from centroidal_power.export import search_result_to_dict, write_json, write_svg
from centroidal_power.utils import lambda_label
from example_utils import ensure_export_directory, print_diagram_summary, print_energy, quick_mode


def main():
    domain = cp.unit_square()
    lambdas = (0.1, 0.026) if quick_mode() else (0.1, 0.026, 0.005)
    replicas = 3 if quick_mode() else 50
    export_dir = ensure_export_directory()

    print("=== Multistart Search ===")
    for lam in lambdas:
        config = cp.SearchConfig(lam=lam, N_r=replicas, round_iterations=100 if quick_mode() else 200, seed=0)
        try:
            result = cp.genetic_search(domain, config)
        except cp.CentroidalPowerError as e:
            print(f"✗ lambda={lam}: {e}")
            return 1

        best = result.best
        print(f"\nlambda={lam}: tried M in {result.interval}, {len(result.ranked)} distinct states")
        print_energy("  best", best.energy, domain)
        print(f"  honeycomb estimate {cp.estimate_cell_count(lam, 1.0):.2f} cells, found {best.cell_count}")
        diagram = cp.power_diagram(best.generators, domain)
        print_diagram_summary(diagram)

        out = export_dir / lambda_label(lam)
        write_json(search_result_to_dict(result, domain, config.seed), out / "result.json")
        write_svg(diagram, out / "diagram.svg")
        print(f"  ✓ wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
