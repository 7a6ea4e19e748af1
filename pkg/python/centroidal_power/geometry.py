"""Exact planar convex geometry: half-plane clipping, power diagrams and polygon moments.

Power cells are built one at a time by clipping the domain with the bisector
half-planes of the other generators (O(M^2) overall). Bisectors are visited in
order of their distance from the site and the loop stops as soon as the next
bisector lies beyond the current cell, which is exact and keeps the typical
cost per cell to a handful of clips.

All polygon moments are closed-form sums over the fan of signed triangles
spanned by a reference point and each polygon edge.
"""

import logging
import math
from collections.abc import Sequence

import numpy as np

from .errors import DuplicateSites, QuadratureSingularity, SiteOutsideDomain
from .models import (
    DEGENERACY_TOLERANCE,
    ConvexPolygon,
    HalfPlane,
    Point2,
    PowerCell,
    PowerDiagram,
    WeightedGenerator,
)

logger = logging.getLogger(__name__)

Vertices = list[tuple[float, float]]
RawCell = tuple[Vertices, list[int]] | None

BOUNDARY = -1

# Symmetric 7-point rule on the reference triangle, exact for degree 5.
_S15 = math.sqrt(15.0)
_RULE_BARY = np.array(
    [
        [1 / 3, 1 / 3, 1 / 3],
        [(9 - 2 * _S15) / 21, (6 + _S15) / 21, (6 + _S15) / 21],
        [(6 + _S15) / 21, (9 - 2 * _S15) / 21, (6 + _S15) / 21],
        [(6 + _S15) / 21, (6 + _S15) / 21, (9 - 2 * _S15) / 21],
        [(9 + 2 * _S15) / 21, (6 - _S15) / 21, (6 - _S15) / 21],
        [(6 - _S15) / 21, (9 + 2 * _S15) / 21, (6 - _S15) / 21],
        [(6 - _S15) / 21, (6 - _S15) / 21, (9 + 2 * _S15) / 21],
    ]
)
_RULE_WEIGHTS = np.array(
    [9 / 40] + [(155 + _S15) / 1200] * 3 + [(155 - _S15) / 1200] * 3
)


def unit_square() -> ConvexPolygon:
    """The unit square [0, 1] x [0, 1]."""
    return ConvexPolygon(vertices=[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])


def regular_polygon(
    sides: int,
    area: float = 1.0,
    center: tuple[float, float] = (0.0, 0.0),
    rotation: float = 0.0,
) -> ConvexPolygon:
    """Regular polygon with the given number of sides and area.

    Args:
        sides: Number of sides (>= 3)
        area: Target area; the circumradius is obtained by inverting
            ``area = sides * R^2 * sin(2 pi / sides) / 2``
        center: Centre of the polygon
        rotation: Angle of the first vertex, in radians

    Returns:
        ConvexPolygon: Counterclockwise regular polygon
    """
    radius = math.sqrt(2.0 * area / (sides * math.sin(2.0 * math.pi / sides)))
    return ConvexPolygon(
        vertices=[
            (
                center[0] + radius * math.cos(rotation + 2.0 * math.pi * k / sides),
                center[1] + radius * math.sin(rotation + 2.0 * math.pi * k / sides),
            )
            for k in range(sides)
        ]
    )


def translate(poly: ConvexPolygon, dx: float, dy: float) -> ConvexPolygon:
    return ConvexPolygon.trusted([(x + dx, y + dy) for x, y in poly.vertices])


def scale_about_origin(poly: ConvexPolygon, factor: float) -> ConvexPolygon:
    if factor <= 0.0:
        raise ValueError(f"scale factor must be positive, got {factor}")
    return ConvexPolygon.trusted([(factor * x, factor * y) for x, y in poly.vertices])


def diameter(poly: ConvexPolygon) -> float:
    """Largest distance between two vertices."""
    pts = poly.array
    return float(np.max(np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)))


def bounding_box(poly: ConvexPolygon) -> tuple[float, float, float, float]:
    """``(xmin, ymin, xmax, ymax)`` of the polygon."""
    pts = poly.array
    xmin, ymin = pts.min(axis=0)
    xmax, ymax = pts.max(axis=0)
    return float(xmin), float(ymin), float(xmax), float(ymax)


def contains(
    poly: ConvexPolygon,
    point: Sequence[float],
    strict: bool = False,
    tolerance: float = 0.0,
) -> bool:
    """Whether the point lies in the polygon (in its interior when ``strict``)."""
    px, py = float(point[0]), float(point[1])
    verts = poly.vertices
    for (x0, y0), (x1, y1) in zip(verts, verts[1:] + verts[:1]):
        cross = (x1 - x0) * (py - y0) - (y1 - y0) * (px - x0)
        if strict and cross <= tolerance:
            return False
        if not strict and cross < -tolerance:
            return False
    return True


def moments_about(verts: Sequence[tuple[float, float]], ax: float, ay: float) -> tuple[float, float, float, float]:
    """Area, first moments and polar second moment of a polygon about ``(ax, ay)``.

    Each edge contributes the exact moments of the signed triangle it spans with
    the reference point, so the sums are the closed-form fan decomposition.
    """
    area = sx = sy = polar = 0.0
    x0, y0 = verts[-1]
    x0 -= ax
    y0 -= ay
    for x1, y1 in verts:
        x1 -= ax
        y1 -= ay
        cross = x0 * y1 - x1 * y0
        area += cross
        sx += cross * (x0 + x1)
        sy += cross * (y0 + y1)
        polar += cross * (x0 * x0 + x0 * x1 + x1 * x1 + y0 * y0 + y0 * y1 + y1 * y1)
        x0, y0 = x1, y1
    return area / 2.0, sx / 6.0, sy / 6.0, polar / 12.0


def _shoelace(verts: Sequence[tuple[float, float]]) -> float:
    area = 0.0
    x0, y0 = verts[-1]
    for x1, y1 in verts:
        area += x0 * y1 - x1 * y0
        x0, y0 = x1, y1
    return area / 2.0


def polygon_area(poly: ConvexPolygon) -> float:
    """Shoelace area of the polygon."""
    return _shoelace(poly.vertices)


def polygon_centroid(poly: ConvexPolygon) -> Point2:
    """Centre of mass of the polygon (first moment over area)."""
    ax, ay = poly.vertices[0]
    area, sx, sy, _ = moments_about(poly.vertices, ax, ay)
    return Point2(ax + sx / area, ay + sy / area)


def polygon_second_moment(poly: ConvexPolygon, a: Sequence[float]) -> float:
    """Exact ``integral over poly of |x - a|^2 dx``.

    Examples:
        >>> polygon_second_moment(unit_square(), (0.5, 0.5))  # 1/6
        0.16666666666666666
    """
    return moments_about(poly.vertices, float(a[0]), float(a[1]))[3]


def _fan_quadrature(
    verts: Sequence[tuple[float, float]], a: Sequence[float], refine: int
) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights integrating over a polygon with fan triangles rooted at ``a``.

    The root is a triangle vertex, never a quadrature node, so integrands that
    are singular at ``a`` remain finite at every node.
    """
    apex = np.asarray(a, dtype=float)
    pts = np.asarray(verts, dtype=float)
    tris = np.stack(
        [np.broadcast_to(apex, pts.shape), pts, np.roll(pts, -1, axis=0)], axis=1
    )
    for _ in range(refine):
        p0, p1, p2 = tris[:, 0], tris[:, 1], tris[:, 2]
        m01, m12, m20 = (p0 + p1) / 2, (p1 + p2) / 2, (p2 + p0) / 2
        tris = np.concatenate(
            [
                np.stack([p0, m01, m20], axis=1),
                np.stack([m01, p1, m12], axis=1),
                np.stack([m20, m12, p2], axis=1),
                np.stack([m01, m12, m20], axis=1),
            ]
        )
    e1 = tris[:, 1] - tris[:, 0]
    e2 = tris[:, 2] - tris[:, 0]
    signed_area = 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
    nodes = np.einsum("qk,tkd->tqd", _RULE_BARY, tris).reshape(-1, 2)
    weights = (signed_area[:, None] * _RULE_WEIGHTS[None, :]).reshape(-1)
    return nodes, weights


def radial_quadrature(
    verts: Sequence[tuple[float, float]], a: Sequence[float], exponent: float, refine: int
) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature nodes and weights already multiplied by ``|x - a|^exponent``."""
    nodes, weights = _fan_quadrature(verts, a, refine)
    r = np.hypot(nodes[:, 0] - a[0], nodes[:, 1] - a[1])
    if exponent < 0.0 and np.any(r == 0.0):
        raise QuadratureSingularity(
            f"quadrature node coincides with the singular point {tuple(a)} for exponent {exponent}",
            point=tuple(a),
        )
    return nodes, weights * r**exponent


def p_moment_quadrature(
    poly: ConvexPolygon, a: Sequence[float], p: float, refine: int | None = None
) -> float:
    """Numerical ``integral over poly of |x - a|^p dx`` for ``p >= 1``.

    Uses the 7-point symmetric triangle rule on the fan of triangles rooted at
    ``a``. The rule is exact for even integer ``p <= 4``; for other exponents the
    fan is refined ``refine`` times (default: once when ``p < 2``).

    Args:
        poly: Polygon to integrate over
        a: Reference point
        p: Exponent, ``p >= 1``
        refine: Number of 4-way triangle subdivisions

    Returns:
        float: The integral
    """
    if p < 1.0:
        raise ValueError(f"p must be >= 1, got {p}")
    if refine is None:
        refine = 1 if p < 2.0 else 0
    nodes, weights = _fan_quadrature(poly.vertices, a, refine)
    r = np.hypot(nodes[:, 0] - a[0], nodes[:, 1] - a[1])
    return float(np.sum(weights * r**p))


def clip_labelled(
    verts: Vertices,
    labels: list[int],
    nx: float,
    ny: float,
    offset: float,
    label: int,
    eps: float,
    area_eps: float,
) -> RawCell:
    """Intersect a labelled convex polygon with ``{nx*x + ny*y <= offset}``.

    ``labels[k]`` names the edge from vertex k to vertex k+1; edges created along
    the clip line get ``label``. Returns None when less than ``area_eps`` of area
    survives.
    """
    s = [nx * x + ny * y - offset for x, y in verts]
    if max(s) <= eps:
        return verts, labels
    if min(s) >= -eps:
        return None

    out_v: Vertices = []
    out_l: list[int] = []
    n = len(verts)
    for k in range(n):
        px, py = verts[k]
        qx, qy = verts[(k + 1) % n]
        sp, sq = s[k], s[(k + 1) % n]
        if sp <= eps:
            out_v.append((px, py))
            out_l.append(labels[k])
            if sq > eps:
                if sp < -eps:
                    t = sp / (sp - sq)
                    out_v.append((px + t * (qx - px), py + t * (qy - py)))
                    out_l.append(label)
                else:
                    out_l[-1] = label
        elif sq < -eps:
            t = sp / (sp - sq)
            out_v.append((px + t * (qx - px), py + t * (qy - py)))
            out_l.append(labels[k])

    i = 0
    while len(out_v) >= 3 and i < len(out_v):
        j = (i + 1) % len(out_v)
        if abs(out_v[i][0] - out_v[j][0]) + abs(out_v[i][1] - out_v[j][1]) < eps:
            del out_v[i]
            del out_l[i]
        else:
            i += 1
    if len(out_v) < 3 or _shoelace(out_v) <= area_eps:
        return None
    return out_v, out_l


def clip_halfplane(poly: ConvexPolygon, h: HalfPlane) -> ConvexPolygon | None:
    """Intersection of a convex polygon with a half-plane.

    Returns:
        The clipped polygon, or None when the intersection has zero area
    """
    norm = math.hypot(*h.normal)
    eps = DEGENERACY_TOLERANCE * diameter(poly)
    result = clip_labelled(
        [tuple(v) for v in poly.vertices],
        [BOUNDARY] * len(poly.vertices),
        h.normal[0] / norm,
        h.normal[1] / norm,
        h.offset / norm,
        BOUNDARY,
        eps,
        eps * diameter(poly),
    )
    return None if result is None else ConvexPolygon.trusted(result[0])


def bisector(gi: WeightedGenerator, gj: WeightedGenerator) -> HalfPlane:
    """Half-plane of points whose power distance to ``gi`` is at most that to ``gj``.

    ``2 (x_j - x_i) . x <= |x_j|^2 - |x_i|^2 + w_i - w_j``
    """
    (xi, yi), (xj, yj) = gi.site, gj.site
    return HalfPlane(
        normal=(2.0 * (xj - xi), 2.0 * (yj - yi)),
        offset=(xj * xj + yj * yj) - (xi * xi + yi * yi) + gi.weight - gj.weight,
    )


def check_distinct_sites(sites: np.ndarray, tolerance: float) -> None:
    """Raise DuplicateSites when two sites are closer than ``tolerance``."""
    if len(sites) < 2:
        return
    order = np.lexsort((sites[:, 1], sites[:, 0]))
    ordered = sites[order]
    for a in range(len(ordered)):
        b = a + 1
        while b < len(ordered) and ordered[b, 0] - ordered[a, 0] <= tolerance:
            if abs(ordered[b, 1] - ordered[a, 1]) <= tolerance:
                i, j = sorted((int(order[a]), int(order[b])))
                raise DuplicateSites(
                    f"generators {i} and {j} coincide within {tolerance:g}; "
                    f"merge or perturb the sites",
                    indices=[i, j],
                )
            b += 1


def check_sites_inside(sites: np.ndarray, domain: ConvexPolygon, tolerance: float = DEGENERACY_TOLERANCE) -> None:
    """Raise SiteOutsideDomain for the first site not in the closed domain."""
    diam = diameter(domain)
    slack = tolerance * diam * diam
    for i, (x, y) in enumerate(sites.tolist()):
        if not contains(domain, (x, y), tolerance=slack):
            raise SiteOutsideDomain(
                f"generator {i} at ({x:.6g}, {y:.6g}) lies outside the domain; "
                f"every site must lie inside or on the boundary",
                index=i,
            )


def power_cells(
    sites: np.ndarray,
    weights: np.ndarray,
    domain: ConvexPolygon,
    tolerance: float = DEGENERACY_TOLERANCE,
) -> list[RawCell]:
    """Raw power cells as ``(vertices, edge labels)`` pairs, None for empty cells.

    This is the array-level core of :func:`power_diagram`, used directly by the
    iterative solvers to avoid model construction in their inner loops.
    Sites are assumed distinct.
    """
    domain_verts = [(float(x), float(y)) for x, y in domain.vertices]
    diam = diameter(domain)
    eps = tolerance * diam
    area_eps = eps * diam
    m = len(sites)
    if m == 1:
        return [(domain_verts, [BOUNDARY] * len(domain_verts))]

    cells: list[RawCell] = []
    for i in range(m):
        xi, yi = float(sites[i, 0]), float(sites[i, 1])
        d = sites - sites[i]
        dist = np.hypot(d[:, 0], d[:, 1])
        dist[i] = 1.0
        # signed distance from the site to each bisector, along the site-to-site direction
        reach = (dist * dist + weights[i] - weights) / (2.0 * dist)
        reach[i] = np.inf
        order = np.argsort(reach, kind="stable").tolist()
        reach_l = reach.tolist()
        nx_l = (d[:, 0] / dist).tolist()
        ny_l = (d[:, 1] / dist).tolist()

        local: RawCell = ([(x - xi, y - yi) for x, y in domain_verts], [BOUNDARY] * len(domain_verts))
        radius = max(math.hypot(x, y) for x, y in local[0])
        for j in order:
            if reach_l[j] >= radius:
                break
            local = clip_labelled(local[0], local[1], nx_l[j], ny_l[j], reach_l[j], j, eps, area_eps)
            if local is None:
                break
            radius = max(math.hypot(x, y) for x, y in local[0])

        if local is None:
            cells.append(None)
        else:
            cells.append(([(x + xi, y + yi) for x, y in local[0]], local[1]))
    return cells


def power_diagram(
    gens: Sequence[WeightedGenerator],
    domain: ConvexPolygon,
    tolerance: float = DEGENERACY_TOLERANCE,
) -> PowerDiagram:
    """Power diagram of weighted generators restricted to a convex domain.

    Cell i is the domain clipped by the half-planes
    ``2 (x_j - x_i) . x <= |x_j|^2 - |x_i|^2 + w_i - w_j`` for every j != i.
    Points on a shared bisector belong to both cells (a measure-zero overlap).

    Args:
        gens: At least one weighted generator
        domain: Convex domain (validated on construction)
        tolerance: Degeneracy tolerance relative to the domain diameter

    Returns:
        PowerDiagram: One cell record per generator, in generator order

    Raises:
        DuplicateSites: If two sites coincide within tolerance
        SiteOutsideDomain: If a site lies outside the domain
        ValueError: If no generator is given

    Example:
        ```python
        gens = [
            WeightedGenerator(site=(0.25, 0.5), weight=0.1),
            WeightedGenerator(site=(0.75, 0.5), weight=0.0),
        ]
        diagram = power_diagram(gens, unit_square())
        # the shared edge is the line x = 0.6
        ```
    """
    if not gens:
        raise ValueError("power_diagram needs at least one generator")
    sites = np.array([g.site for g in gens], dtype=float)
    weights = np.array([g.weight for g in gens], dtype=float)
    check_sites_inside(sites, domain, tolerance)
    check_distinct_sites(sites, tolerance * diameter(domain))

    diagram = assemble_diagram(gens, power_cells(sites, weights, domain, tolerance), domain)
    logger.debug(f"Built power diagram with {len(gens)} generators, {diagram.live_cells} nonempty cells")
    return diagram


def assemble_diagram(
    gens: Sequence[WeightedGenerator], cells: list[RawCell], domain: ConvexPolygon
) -> PowerDiagram:
    """Wrap raw cells from :func:`power_cells` into a PowerDiagram."""
    return PowerDiagram.model_construct(
        generators=tuple(gens),
        cells=tuple(_wrap_cell(i, cell) for i, cell in enumerate(cells)),
        domain=domain,
    )


def _wrap_cell(index: int, cell: RawCell) -> PowerCell:
    if cell is None:
        return PowerCell.model_construct(generator=index, polygon=None, neighbors=())
    verts, labels = cell
    return PowerCell.model_construct(
        generator=index, polygon=ConvexPolygon.trusted(verts), neighbors=tuple(labels)
    )


def locate(diagram: PowerDiagram, point: Sequence[float]) -> int:
    """Index of the generator whose power cell contains the point.

    Ties on a bisector go to the lowest generator index.
    """
    sites = np.array([g.site for g in diagram.generators], dtype=float)
    weights = np.array([g.weight for g in diagram.generators], dtype=float)
    power = np.sum((sites - np.asarray(point, dtype=float)) ** 2, axis=1) - weights
    return int(np.argmin(power))
