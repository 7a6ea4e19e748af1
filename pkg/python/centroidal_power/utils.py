"""Common utilities for centroidal_power.

Domain presets and the helpers that turn command-line strings into domains
and output directory names.
"""

import json
import math
from collections.abc import Callable

from .errors import InvalidDomain
from .geometry import regular_polygon, unit_square
from .models import ConvexPolygon, Point2

PRESETS: dict[str, Callable[[], ConvexPolygon]] = {
    "unit-square": unit_square,
    "hexagon": lambda: regular_polygon(6, area=1.0, center=(0.5, 0.5)),
    "triangle": lambda: regular_polygon(3, area=1.0, center=(0.5, 0.5), rotation=math.pi / 2),
}


def parse_domain(spec: str | list) -> ConvexPolygon:
    """Convert a domain description to a validated ConvexPolygon.

    Accepted forms:
    - a preset name: ``"unit-square"``, ``"hexagon"``, ``"triangle"``
      (hexagon and triangle have unit area and are centred at (0.5, 0.5))
    - ``"rectangle:WxH"`` for ``[0, W] x [0, H]``
    - a JSON vertex list such as ``"[[0, 0], [2, 0], [0, 1]]"``
    - an already parsed list of ``[x, y]`` pairs

    Args:
        spec: Domain description

    Returns:
        ConvexPolygon: The domain

    Raises:
        InvalidDomain: If the description cannot be parsed or the polygon
            violates the convex-domain invariants

    Examples:
        >>> parse_domain("rectangle:2x1").vertices[2]
        Point2(x=2.0, y=1.0)
    """
    if isinstance(spec, list):
        return _from_pairs(spec)

    text = spec.strip()
    if text in PRESETS:
        return PRESETS[text]()
    if text.startswith("rectangle:"):
        try:
            width, height = (float(v) for v in text.removeprefix("rectangle:").split("x"))
        except ValueError as e:
            raise InvalidDomain(f"cannot parse rectangle size in {text!r}; expected rectangle:WxH") from e
        return _from_pairs([[0.0, 0.0], [width, 0.0], [width, height], [0.0, height]])
    if text.startswith("["):
        try:
            pairs = json.loads(text)
        except json.JSONDecodeError as e:
            raise InvalidDomain(f"domain is not valid JSON: {e}") from e
        return _from_pairs(pairs)
    raise InvalidDomain(
        f"unknown domain {text!r}; use one of {sorted(PRESETS)}, rectangle:WxH or a JSON vertex list"
    )


def _from_pairs(pairs: list) -> ConvexPolygon:
    try:
        vertices = [Point2(float(x), float(y)) for x, y in pairs]
    except (TypeError, ValueError) as e:
        raise InvalidDomain("domain vertices must be [x, y] pairs of numbers") from e
    return ConvexPolygon(vertices=vertices)


def lambda_label(lam: float) -> str:
    """Directory-safe label for a lambda value, e.g. ``lambda_0.005``."""
    return f"lambda_{lam:g}"
