"""Iterative polygon growth: append outward isosceles triangles to sides
whose rasterized field weight is positive, subdivide the rest.

Vertices live in the continuum square [-N, N]^2 in lattice units; weights
are always evaluated by rasterizing shapes onto the integer lattice and
summing the field there. Each side carries a nominal bookkeeping length
(N at level 1, divided by 4 for every child) used for triangle heights
and the sub-lattice termination test, so nominal lengths stay in the
dyadic set {N * 2^-m}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import shapely
from shapely.geometry import Polygon as ShapelyPolygon

from .field import FieldRealization
from .lattice import BoxSpec, Site

Point = tuple[float, float]

_RASTER_NUDGE = 1e-9  # half-open rule: include left/bottom edges


@dataclass(frozen=True)
class Side:
    p: Point
    q: Point
    length: float  # nominal bookkeeping length, not necessarily Euclidean

    def euclid(self) -> float:
        return math.hypot(self.q[0] - self.p[0], self.q[1] - self.p[1])


@dataclass(frozen=True, eq=False)
class Polygon:
    """Closed, simple, counterclockwise polygon; sides double as the
    active-side list (every side is refinable)."""

    vertices: tuple[Point, ...]
    level: int
    sides: tuple[Side, ...]
    half_box: float  # containment limit N

    def shape(self) -> ShapelyPolygon:
        return ShapelyPolygon(self.vertices)

    def area(self) -> float:
        return self.shape().area

    def side_count(self) -> int:
        return len(self.sides)


def signed_area(vertices) -> float:
    s = 0.0
    n = len(vertices)
    for i in range(n):
        x0, y0 = vertices[i]
        x1, y1 = vertices[(i + 1) % n]
        s += x0 * y1 - x1 * y0
    return 0.5 * s


def init_polygon(spec: BoxSpec) -> Polygon:
    """Level-1 polygon: the axis-aligned square [-N/2, N/2]^2, CCW."""
    n = spec.N
    if n < 2:
        raise ValueError("box half-side must be >= 2 to refine a polygon")
    h = n / 2.0
    verts = ((-h, -h), (h, -h), (h, h), (-h, h))
    sides = tuple(
        Side(p=verts[i], q=verts[(i + 1) % 4], length=float(n)) for i in range(4)
    )
    return Polygon(vertices=verts, level=1, sides=sides, half_box=float(n))


def triangle_for_side(side: Side, epsilon: float) -> tuple[Point, Point, Point]:
    """Outward isosceles triangle on the middle half of the side.

    Base endpoints at parameters 1/4 and 3/4 along the side; apex displaced
    from the midpoint by eps^(2/3) * l(S) / 8 along the outward normal
    (right of the CCW direction).
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    px, py = side.p
    qx, qy = side.q
    dx, dy = qx - px, qy - py
    norm = math.hypot(dx, dy)
    if norm <= 0:
        raise ValueError("degenerate side")
    m1 = (px + 0.25 * dx, py + 0.25 * dy)
    m2 = (px + 0.75 * dx, py + 0.75 * dy)
    height = (epsilon ** (2.0 / 3.0)) * side.length / 8.0
    ox, oy = dy / norm, -dx / norm  # outward normal for a CCW polygon
    apex = (px + 0.5 * dx + height * ox, py + 0.5 * dy + height * oy)
    return (m1, apex, m2)


def rasterize(shape_vertices, spec: BoxSpec | None = None) -> set[Site]:
    """Lattice sites whose center lies strictly inside the shape, with
    boundary centers resolved by nudging toward +x, +y (half-open rule)."""
    poly = ShapelyPolygon(shape_vertices)
    if poly.area == 0:
        return set()
    minx, miny, maxx, maxy = poly.bounds
    xs = np.arange(math.floor(minx), math.ceil(maxx) + 1)
    ys = np.arange(math.floor(miny), math.ceil(maxy) + 1)
    if len(xs) == 0 or len(ys) == 0:
        return set()
    gx, gy = np.meshgrid(xs, ys)
    inside = shapely.contains_xy(
        poly, gx.ravel() + _RASTER_NUDGE, gy.ravel() + _RASTER_NUDGE
    )
    sites = {
        (int(x), int(y)) for x, y, ok in zip(gx.ravel(), gy.ravel(), inside) if ok
    }
    if spec is not None:
        sites = {s for s in sites if spec.contains(s)}
    return sites


def raster_weight(field: FieldRealization, shape_vertices) -> float:
    sites = rasterize(shape_vertices, spec=field.spec)
    if not sites:
        return 0.0
    totals = field.site_totals()
    return float(sum(totals[field.spec.index(s)] for s in sites))


def _in_box(points, half_box: float) -> bool:
    return all(abs(x) <= half_box and abs(y) <= half_box for x, y in points)


def refine_step(
    P: Polygon,
    field: FieldRealization,
    variant: str = "deterministic",
    seed: int = 0,
) -> Polygon:
    """One growth level: per side, append its triangle or split in four.

    A side grows iff its triangle's rasterized weight is strictly positive
    (zero counts as rejection), the triangle stays inside [-N, N]^2, it does
    not cut back into the polygon or a triangle already accepted in this
    step, and in the stochastic variant an independent fair coin comes up
    heads. Rejected sides are split into four equal segments.
    """
    if variant not in ("deterministic", "stochastic"):
        raise ValueError(f"unknown variant {variant!r}")
    rng = np.random.Generator(np.random.Philox(seed))
    coins = rng.random(len(P.sides))
    poly_shape = P.shape()
    accepted_tris: list[ShapelyPolygon] = []

    new_vertices: list[Point] = []
    new_sides: list[Side] = []
    for side, coin in zip(P.sides, coins):
        tri = triangle_for_side(side, field.epsilon)
        w = raster_weight(field, tri)
        accept = w > 0.0
        if variant == "stochastic":
            accept = accept and coin < 0.5
        if accept and not _in_box(tri, P.half_box):
            accept = False
        tri_shape = None
        if accept:
            tri_shape = ShapelyPolygon(tri)
            if not tri_shape.is_valid or poly_shape.intersection(tri_shape).area > 1e-12:
                accept = False
            elif any(tri_shape.intersection(t).area > 1e-12 for t in accepted_tris):
                accept = False
        px, py = side.p
        qx, qy = side.q
        child_len = side.length / 4.0
        if accept:
            m1, apex, m2 = tri
            accepted_tris.append(tri_shape)
            pts = [side.p, m1, apex, m2]
            segs = [(side.p, m1), (m1, apex), (apex, m2), (m2, side.q)]
        else:
            s1 = (px + 0.25 * (qx - px), py + 0.25 * (qy - py))
            s2 = (px + 0.50 * (qx - px), py + 0.50 * (qy - py))
            s3 = (px + 0.75 * (qx - px), py + 0.75 * (qy - py))
            pts = [side.p, s1, s2, s3]
            segs = [(side.p, s1), (s1, s2), (s2, s3), (s3, side.q)]
        new_vertices.extend(pts)
        new_sides.extend(Side(p=a, q=b, length=child_len) for a, b in segs)
    return Polygon(
        vertices=tuple(new_vertices),
        level=P.level + 1,
        sides=tuple(new_sides),
        half_box=P.half_box,
    )


@dataclass(frozen=True)
class LevelRecord:
    polygon: Polygon
    weight: float  # w(rasterization of the polygon)
    side_count: int


def run_construction(
    field: FieldRealization,
    epsilon: float | None = None,
    max_level: int = 4,
    variant: str = "deterministic",
    seed: int = 0,
) -> list[LevelRecord]:
    """Grow P_1 .. P_max_level; stops early once every nominal side length
    drops below 2 (sub-lattice resolution). ``epsilon`` defaults to the
    field's strength parameter."""
    if max_level < 1:
        raise ValueError("max_level must be >= 1")
    if not isinstance(field.spec, BoxSpec):
        raise ValueError("polygon construction needs a centered box field")
    if epsilon is not None and epsilon != field.epsilon:
        raise ValueError("epsilon disagrees with the field realization")
    P = init_polygon(field.spec)
    records = [
        LevelRecord(
            polygon=P,
            weight=raster_weight(field, P.vertices),
            side_count=P.side_count(),
        )
    ]
    for level in range(2, max_level + 1):
        if all(s.length < 2.0 for s in P.sides):
            break
        P = refine_step(P, field, variant=variant, seed=seed + level)
        records.append(
            LevelRecord(
                polygon=P,
                weight=raster_weight(field, P.vertices),
                side_count=P.side_count(),
            )
        )
    return records


def check_polygon_invariants(P: Polygon) -> None:
    """Raise AssertionError on any violated level invariant."""
    shape = P.shape()
    assert shape.is_valid and shape.is_simple, "polygon is not simple"
    assert signed_area(P.vertices) > 0, "polygon is not counterclockwise"
    assert _in_box(P.vertices, P.half_box), "polygon escapes the outer box"
    n0 = P.half_box
    for s in P.sides:
        ratio = n0 / s.length
        m = math.log2(ratio)
        assert abs(m - round(m)) < 1e-9 and round(m) >= 0, (
            f"side length {s.length} not of the form N*2^-m"
        )


def polygon_trace_lines(records: list[LevelRecord]) -> list[str]:
    """Trace format: ``level side_count area weight`` per line."""
    return [
        f"{r.polygon.level} {r.side_count} {r.polygon.area():.17g} {r.weight:.17g}"
        for r in records
    ]


def polygon_svg(P: Polygon, width: int = 600) -> str:
    """Minimal standalone SVG of the polygon inside its box."""
    n = P.half_box
    scale = width / (2 * n)
    pts = " ".join(
        f"{(x + n) * scale:.3f},{(n - y) * scale:.3f}" for x, y in P.vertices
    )
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{width}" '
        f'viewBox="0 0 {width} {width}">\n'
        f'<rect x="0" y="0" width="{width}" height="{width}" fill="white" '
        f'stroke="black"/>\n'
        f'<polygon points="{pts}" fill="none" stroke="crimson" stroke-width="1"/>\n'
        f"</svg>\n"
    )
