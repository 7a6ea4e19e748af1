#!/usr/bin/env python3
"""
Utility functions for centroidal_power examples.

Small helpers shared by the example scripts: output directories,
quick-mode settings and compact printing of energies and diagrams.
"""

import os
from pathlib import Path

import centroidal_power as cp


def quick_mode():
    """True when examples should use small settings (set by the example tests)."""
    return os.environ.get("NON_INTERACTIVE") == "1"


def print_energy(label, energy, domain=None):
    """Print an energy breakdown, with the honeycomb excess when a domain is given."""
    line = (
        f"{label}: E={energy.total:.10f} "
        f"(perimeter {energy.perimeter_term:.6f}, transport {energy.transport_term:.6f})"
    )
    if domain is not None and energy.lam > 0:
        ref = cp.hexagonal_reference(energy.lam, cp.polygon_area(domain))
        line += f", rescaled {cp.rescaled_energy(energy, ref):+.4f}"
    print(line)


def print_diagram_summary(diagram):
    """Print the side histogram and hexagon share of a diagram."""
    print(f"  cells: {diagram.live_cells}")
    print(f"  sides: {cp.side_histogram(diagram)}")
    print(f"  interior hexagons: {cp.hexagon_fraction(diagram):.0%}")


def ensure_export_directory(dir_name="exports"):
    """Create the export directory (EXPORT_DIR, or next to the examples) if needed."""
    export_dir = Path(os.environ.get("EXPORT_DIR") or Path(__file__).parent / dir_name)
    export_dir.mkdir(parents=True, exist_ok=True)
    return export_dir
