"""Serialisation of results: JSON records, CSV traces and SVG diagrams.

Result files are deterministic for a given run; the export timestamp goes
into a separate ``metadata.json``.
"""

import csv
import json
import logging
import xml.etree.ElementTree as ET
from datetime import datetime
from pathlib import Path
from typing import Any

import numpy as np

from .energy import (
    cell_moments,
    generator_arrays,
    hexagonal_reference,
    rescaled_energy,
    to_generators,
)
from .errors import CentroidalPowerError
from .geometry import bounding_box, polygon_area, power_cells
from .models import (
    ConvexPolygon,
    EnergyBreakdown,
    LloydResult,
    LloydTrace,
    PowerDiagram,
    SearchResult,
    TransportPlan,
    WeightedGenerator,
)
from .search import side_count

logger = logging.getLogger(__name__)

TRACE_HEADER = ("iteration", "total", "perimeter", "transport", "max_disp", "cells")

# Cell fill by number of sides; anything else is light grey.
SIDE_COLOURS = {6: "#f4d03f", 7: "#f5a6c8", 5: "#e74c3c", 4: "#f39c12"}
OTHER_COLOUR = "#d9d9d9"


def polygon_to_dict(poly: ConvexPolygon) -> dict[str, Any]:
    return {"vertices": [[x, y] for x, y in poly.vertices]}


def diagram_to_dict(diagram: PowerDiagram) -> dict[str, Any]:
    """``{"cells": [{"generator": i, "vertices": [...]}]}``; empty cells have no vertices."""
    return {
        "cells": [
            {
                "generator": cell.generator,
                "vertices": [] if cell.polygon is None else [[x, y] for x, y in cell.polygon.vertices],
            }
            for cell in diagram.cells
        ]
    }


def plan_to_dict(plan: TransportPlan, cost: float) -> dict[str, Any]:
    """Discrete transport plan as ``[grid, atom, mass]`` rows with its potentials."""
    return {
        "cost": cost,
        "flows": plan.to_rows(),
        "row_potentials": list(plan.row_potentials),
        "column_potentials": list(plan.column_potentials),
    }


def energy_to_dict(energy: EnergyBreakdown) -> dict[str, float]:
    return energy.model_dump(by_alias=True)


def generators_to_dict(
    gens: tuple[WeightedGenerator, ...], domain: ConvexPolygon
) -> list[dict[str, Any]]:
    """Generators with the areas of their power cells (the atom masses)."""
    sites, weights = generator_arrays(gens)
    areas, _, _ = cell_moments(sites, power_cells(sites, weights, domain))
    return [
        {"site": [float(x), float(y)], "weight": float(w), "mass": float(m)}
        for (x, y), w, m in zip(sites, weights, areas)
    ]


def _rescaled(energy: EnergyBreakdown, domain: ConvexPolygon) -> float | None:
    if energy.lam <= 0.0:
        return None
    return rescaled_energy(energy, hexagonal_reference(energy.lam, polygon_area(domain)))


def lloyd_result_to_dict(result: LloydResult, domain: ConvexPolygon, seed: int | None = None) -> dict[str, Any]:
    """JSON record of a Lloyd run: generators, masses, energies, residuals."""
    return {
        "kind": "lloyd",
        "seed": seed,
        "domain": polygon_to_dict(domain),
        "converged": result.converged,
        "iterations": result.iterations,
        "energy": energy_to_dict(result.energy),
        "rescaled_energy": _rescaled(result.energy, domain),
        "generators": generators_to_dict(result.final_generators, domain),
        "residuals": [r.model_dump() for r in result.residuals],
    }


def search_result_to_dict(result: SearchResult, domain: ConvexPolygon, seed: int | None = None) -> dict[str, Any]:
    """JSON record of a search: the best state in full plus every ranked candidate."""
    best = result.best
    return {
        "kind": "search",
        "seed": seed,
        "domain": polygon_to_dict(domain),
        "interval": list(result.interval),
        "round_best": list(result.round_best),
        "side_histogram": {str(k): v for k, v in result.side_histogram.items()},
        "energy": energy_to_dict(best.energy),
        "rescaled_energy": best.rescaled_energy,
        "generators": generators_to_dict(best.generators, domain),
        "ranked": [
            {
                "cell_count": c.cell_count,
                "energy": energy_to_dict(c.energy),
                "rescaled_energy": c.rescaled_energy,
                "provenance": c.provenance.model_dump(),
                "generators": [
                    {"site": [g.site.x, g.site.y], "weight": g.weight} for g in c.generators
                ],
            }
            for c in result.ranked
        ],
    }


def write_json(data: dict[str, Any], path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2, ensure_ascii=False)
    logger.debug(f"Wrote {path}")
    return path


def write_metadata(out_dir: Path, **fields: Any) -> Path:
    """``metadata.json`` with the export timestamp and any extra fields."""
    from . import __version__

    return write_json(
        {"exported_at": datetime.now().isoformat(), "version": __version__, **fields},
        out_dir / "metadata.json",
    )


def write_trace_csv(trace: LloydTrace, path: Path) -> Path:
    """Lloyd trace as CSV with header ``iteration,total,perimeter,transport,max_disp,cells``."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(TRACE_HEADER)
        for record in trace.records:
            writer.writerow(
                [
                    record.iteration,
                    repr(record.energy.total),
                    repr(record.energy.perimeter_term),
                    repr(record.energy.transport_term),
                    repr(record.max_site_displacement),
                    record.live_cells,
                ]
            )
    return path


def side_colour(sides: int) -> str:
    return SIDE_COLOURS.get(sides, OTHER_COLOUR)


def diagram_to_svg(diagram: PowerDiagram, size: int = 600) -> ET.Element:
    """SVG of the diagram with cells filled by side count and sites as dots.

    The y axis is flipped so the picture matches mathematical orientation.
    """
    xmin, ymin, xmax, ymax = bounding_box(diagram.domain)
    scale = size / max(xmax - xmin, ymax - ymin)
    width, height = (xmax - xmin) * scale, (ymax - ymin) * scale

    def project(x: float, y: float) -> str:
        return f"{(x - xmin) * scale:.3f},{(ymax - y) * scale:.3f}"

    root = ET.Element(
        "svg",
        xmlns="http://www.w3.org/2000/svg",
        version="1.1",
        width=f"{width:.0f}px",
        height=f"{height:.0f}px",
        viewBox=f"0 0 {width:.3f} {height:.3f}",
    )
    cells = ET.SubElement(root, "g", stroke="#333333", attrib={"stroke-width": "1"})
    for cell in diagram.cells:
        if cell.polygon is None:
            continue
        sides = side_count(cell.polygon.array)
        polygon = ET.SubElement(
            cells,
            "polygon",
            points=" ".join(project(x, y) for x, y in cell.polygon.vertices),
            fill=side_colour(sides),
        )
        polygon.set("data-sides", str(sides))
        polygon.set("data-generator", str(cell.generator))
    sites = ET.SubElement(root, "g", fill="#000000")
    for gen in diagram.generators:
        cx, cy = project(*gen.site).split(",")
        ET.SubElement(sites, "circle", cx=cx, cy=cy, r="2")
    ET.SubElement(
        root,
        "polygon",
        points=" ".join(project(x, y) for x, y in diagram.domain.vertices),
        fill="none",
        stroke="#000000",
        attrib={"stroke-width": "2"},
    )
    return root


def write_svg(diagram: PowerDiagram, path: Path, size: int = 600) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    ET.ElementTree(diagram_to_svg(diagram, size)).write(path, encoding="utf-8", xml_declaration=True)
    return path


def load_result(path: Path) -> tuple[tuple[WeightedGenerator, ...], ConvexPolygon, EnergyBreakdown]:
    """Reload a result JSON written by this module.

    Returns:
        The generators, the domain and the logged energy, so that the energy
        can be re-evaluated with ``energy_weighted``

    Raises:
        CentroidalPowerError: If the file is not a result record
    """
    try:
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
        gens = data["generators"]
        sites = np.array([g["site"] for g in gens], dtype=float).reshape(-1, 2)
        weights = np.array([g["weight"] for g in gens], dtype=float)
        domain = ConvexPolygon(vertices=[tuple(v) for v in data["domain"]["vertices"]])
        energy = EnergyBreakdown.model_validate(data["energy"])
    except (OSError, KeyError, TypeError, ValueError) as e:
        raise CentroidalPowerError(f"cannot load result from {path}: {e}", path=str(path)) from e
    return to_generators(sites, weights), domain, energy


CANDIDATE_HEADER = ("rank", "cells", "total", "perimeter", "transport", "rescaled", "initial_cells", "replica")


def write_candidates_csv(result: SearchResult, path: Path) -> Path:
    """Ranked search candidates, one row each."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(CANDIDATE_HEADER)
        for rank, c in enumerate(result.ranked, start=1):
            writer.writerow(
                [
                    rank,
                    c.cell_count,
                    repr(c.energy.total),
                    repr(c.energy.perimeter_term),
                    repr(c.energy.transport_term),
                    repr(c.rescaled_energy),
                    c.provenance.initial_cells,
                    c.provenance.replica,
                ]
            )
    return path
