"""Exact planar geometry for half-plane indicators on square cells.

Half-planes are the two-parameter interface family used everywhere else:
membership is {x : n.(x - anchor) >= c} with unit normal
n = (cos theta, sin theta).  Areas of half-planes intersected with convex
polygons are computed by Sutherland-Hodgman clipping plus the shoelace
formula, so they are exact up to double-precision roundoff.

A closed-form evaluator for the area fraction of a square cut by a line
(`halfplane_square_fraction`) is provided for hot loops; it computes the
same quantity as the clip route and the two are cross-checked in the test
suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

TWO_PI = 2.0 * math.pi

# Vertices closer than this (coordinates are unit-domain scale) are merged
# after clipping.
MERGE_TOL = 1e-14

# cos(pi/2) etc. carry ~1e-16 residue; snap so axis-aligned half-planes
# behave exactly.
_AXIS_SNAP = 1e-15


class Point(NamedTuple):
    x: float
    y: float


def _unit_normal(theta: float) -> tuple[float, float]:
    nx = math.cos(theta)
    ny = math.sin(theta)
    if abs(nx) < _AXIS_SNAP:
        nx = 0.0
    if abs(ny) < _AXIS_SNAP:
        ny = 0.0
    return nx, ny


@dataclass(frozen=True)
class HalfPlane:
    """Closed half-plane {x : n.(x - anchor) >= c} with n = (cos theta, sin theta).

    theta is normalized into [0, 2*pi).  c is the signed offset of the
    boundary line from the anchor, measured along the normal.
    """

    theta: float
    c: float
    anchor: Point = Point(0.0, 0.0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "theta", float(self.theta) % TWO_PI)
        object.__setattr__(self, "c", float(self.c))
        ax, ay = self.anchor
        object.__setattr__(self, "anchor", Point(float(ax), float(ay)))

    def normal(self) -> tuple[float, float]:
        return _unit_normal(self.theta)

    def side(self, p: Point | tuple[float, float]) -> float:
        """Signed membership value n.(p - anchor) - c (>= 0 means inside)."""
        nx, ny = self.normal()
        return nx * (p[0] - self.anchor.x) + ny * (p[1] - self.anchor.y) - self.c

    def contains(self, p: Point | tuple[float, float]) -> bool:
        return self.side(p) >= 0.0

    def complement(self) -> "HalfPlane":
        """Half-plane with the same boundary line and the opposite side."""
        return HalfPlane(self.theta + math.pi, -self.c, self.anchor)

    def offset_at(self, point: Point | tuple[float, float]) -> float:
        """Offset c' such that membership reads n.(x - point) >= c'."""
        nx, ny = self.normal()
        return self.c - (nx * (point[0] - self.anchor.x) + ny * (point[1] - self.anchor.y))


@dataclass(frozen=True)
class ConvexPolygon:
    """Convex polygon with vertices in counter-clockwise order.

    The empty polygon (no vertices) is allowed and has area zero.
    """

    vertices: tuple[Point, ...]

    @staticmethod
    def square(center: Point | tuple[float, float], side: float) -> "ConvexPolygon":
        cx, cy = center
        r = side / 2.0
        return ConvexPolygon(
            (
                Point(cx - r, cy - r),
                Point(cx + r, cy - r),
                Point(cx + r, cy + r),
                Point(cx - r, cy + r),
            )
        )

    def is_empty(self) -> bool:
        return len(self.vertices) == 0


@dataclass(frozen=True)
class Cell:
    """Grid cell [(i-1)h, ih] x [(j-1)h, jh] with 1-based indices."""

    i: int
    j: int
    h: float

    @property
    def center(self) -> Point:
        return Point((self.i - 0.5) * self.h, (self.j - 0.5) * self.h)

    def polygon(self) -> ConvexPolygon:
        return ConvexPolygon.square(self.center, self.h)


def _clip_loop(
    verts: tuple[Point, ...] | list[Point],
    nx: float,
    ny: float,
    rhs: float,
) -> list[Point]:
    """Sutherland-Hodgman step keeping {p : nx*px + ny*py >= rhs}."""
    m = len(verts)
    if m == 0:
        return []
    out: list[Point] = []
    fs = [nx * v[0] + ny * v[1] - rhs for v in verts]
    for k in range(m):
        px, py = verts[k]
        qx, qy = verts[(k + 1) % m]
        fp, fq = fs[k], fs[(k + 1) % m]
        if fp >= 0.0:
            out.append(Point(px, py))
            if fq < 0.0:
                t = fp / (fp - fq)
                out.append(Point(px + t * (qx - px), py + t * (qy - py)))
        elif fq >= 0.0:
            t = fp / (fp - fq)
            out.append(Point(px + t * (qx - px), py + t * (qy - py)))
    return out


def _merge_vertices(verts: list[Point]) -> tuple[Point, ...]:
    """Drop consecutive duplicates (within MERGE_TOL) and collinear spurs."""
    if len(verts) < 3:
        return ()
    dedup: list[Point] = []
    for p in verts:
        if dedup and abs(p.x - dedup[-1].x) <= MERGE_TOL and abs(p.y - dedup[-1].y) <= MERGE_TOL:
            continue
        dedup.append(p)
    while len(dedup) >= 2 and abs(dedup[0].x - dedup[-1].x) <= MERGE_TOL and abs(dedup[0].y - dedup[-1].y) <= MERGE_TOL:
        dedup.pop()
    if len(dedup) < 3:
        return ()
    out: list[Point] = []
    n = len(dedup)
    for k in range(n):
        a = dedup[k - 1]
        b = dedup[k]
        c = dedup[(k + 1) % n]
        e1x, e1y = b.x - a.x, b.y - a.y
        e2x, e2y = c.x - b.x, c.y - b.y
        cross = e1x * e2y - e1y * e2x
        scale = math.hypot(e1x, e1y) * math.hypot(e2x, e2y)
        if abs(cross) <= MERGE_TOL * scale:
            continue
        out.append(b)
    if len(out) < 3:
        return ()
    return tuple(out)


def clip(poly: ConvexPolygon, hp: HalfPlane) -> ConvexPolygon:
    """Clip a convex polygon by a half-plane.

    Returns a convex polygon in counter-clockwise order; the result may be
    empty.  Touching or collinear vertices are merged at tolerance 1e-14.
    """
    if poly.is_empty():
        return ConvexPolygon(())
    nx, ny = hp.normal()
    rhs = hp.c + nx * hp.anchor.x + ny * hp.anchor.y
    kept = _clip_loop(poly.vertices, nx, ny, rhs)
    return ConvexPolygon(_merge_vertices(kept))


def _shoelace(verts) -> float:
    m = len(verts)
    if m < 3:
        return 0.0
    acc = 0.0
    px, py = verts[-1]
    for q in verts:
        qx, qy = q
        acc += px * qy - qx * py
        px, py = qx, qy
    return 0.5 * acc


def area(poly: ConvexPolygon) -> float:
    """Shoelace area; counter-clockwise input gives a nonnegative value."""
    return max(_shoelace(poly.vertices), 0.0)


def _square_halfplane_area(cx: float, cy: float, side: float, hp: HalfPlane) -> float:
    """Exact |square ∩ hp| via clipping, without polygon object overhead."""
    nx, ny = hp.normal()
    rhs = hp.c + nx * hp.anchor.x + ny * hp.anchor.y
    r = side / 2.0
    verts = (
        Point(cx - r, cy - r),
        Point(cx + r, cy - r),
        Point(cx + r, cy + r),
        Point(cx - r, cy + r),
    )
    return max(_shoelace(_clip_loop(verts, nx, ny, rhs)), 0.0)


def square_fraction(hp: HalfPlane, center: Point | tuple[float, float], side: float) -> float:
    """Fraction of an axis-aligned square covered by a half-plane (clip route)."""
    a = _square_halfplane_area(center[0], center[1], side, hp)
    frac = a / (side * side)
    if frac < 0.0:
        return 0.0
    if frac > 1.0:
        return 1.0
    return frac


def cell_fraction(hp: HalfPlane, cell: Cell) -> float:
    """Exact area fraction |T ∩ hp| / h^2 for a grid cell T."""
    cxy = cell.center
    return square_fraction(hp, cxy, cell.h)


def sym_diff_area(a: HalfPlane, b: HalfPlane, region: ConvexPolygon) -> float:
    """Exact area of the symmetric difference of two half-planes within a region."""
    pa = clip(region, a)
    pb = clip(region, b)
    term1 = area(clip(pa, b.complement()))
    term2 = area(clip(pb, a.complement()))
    return term1 + term2


def crosses_cell(hp: HalfPlane, cell: Cell) -> bool:
    """Whether the boundary line of hp meets the closed cell.

    Uses the support-function criterion with the offset re-anchored at the
    cell center: |c'| <= (h/2) * (|cos theta| + |sin theta|).
    """
    nx, ny = hp.normal()
    c_prime = hp.offset_at(cell.center)
    return abs(c_prime) <= (cell.h / 2.0) * (abs(nx) + abs(ny))


def line_segment_in_box(
    hp: HalfPlane, center: Point | tuple[float, float], side: float
) -> tuple[Point, Point] | None:
    """Segment of the boundary line of hp inside an axis-aligned square.

    Returns None when the line misses the square.  Used for rendering
    reconstructed interfaces.
    """
    nx, ny = hp.normal()
    c_prime = hp.offset_at(center)
    # Point on the line closest to the square center, direction along the line.
    px = center[0] + c_prime * nx
    py = center[1] + c_prime * ny
    dx, dy = -ny, nx
    r = side / 2.0
    tmin, tmax = -math.inf, math.inf
    for d, p0, lo, hi in ((dx, px, center[0] - r, center[0] + r), (dy, py, center[1] - r, center[1] + r)):
        if abs(d) < 1e-300:
            if p0 < lo - MERGE_TOL or p0 > hi + MERGE_TOL:
                return None
            continue
        t0 = (lo - p0) / d
        t1 = (hi - p0) / d
        if t0 > t1:
            t0, t1 = t1, t0
        tmin = max(tmin, t0)
        tmax = min(tmax, t1)
    if not (tmin <= tmax):
        return None
    return Point(px + tmin * dx, py + tmin * dy), Point(px + tmax * dx, py + tmax * dy)


# ---------------------------------------------------------------------------
# Closed-form square/half-plane fraction.  Same quantity as the clip route;
# used in performance-sensitive loops and cross-checked against clipping.
# ---------------------------------------------------------------------------


def _lowfrac(a: float, b: float, t: float) -> float:
    """Fraction of the unit square (centered at 0) with a*x + b*y <= t.

    Requires a, b >= 0 and a^2 + b^2 = 1.
    """
    hi = 0.5 * (a + b)
    if t <= -hi:
        return 0.0
    if t >= hi:
        return 1.0
    if a < 1e-12:
        return 0.5 + t / b
    if b < 1e-12:
        return 0.5 + t / a
    s = t + hi
    acc = s * s
    d = s - a
    if d > 0.0:
        acc -= d * d
    d = s - b
    if d > 0.0:
        acc -= d * d
    return acc / (2.0 * a * b)


def halfplane_square_fraction(theta: float, c_rel: float, side: float) -> float:
    """Closed-form fraction of a square covered by {n.(x - center) >= c_rel}.

    c_rel is the line offset measured from the square center.  Equals the
    clip-route `square_fraction` up to roundoff.
    """
    nx, ny = _unit_normal(theta)
    return 1.0 - _lowfrac(abs(nx), abs(ny), c_rel / side)


def lowfrac_batch(a_abs: np.ndarray, b_abs: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Vectorized `_lowfrac` for arrays of nonnegative unit-normal components."""
    a_abs, b_abs, t = np.broadcast_arrays(a_abs, b_abs, t)
    hi = 0.5 * (a_abs + b_abs)
    s = np.clip(t + hi, 0.0, a_abs + b_abs)
    small = np.minimum(a_abs, b_abs) < 1e-12
    big = np.maximum(a_abs, b_abs)
    lin = np.clip(0.5 + t / np.where(big > 0.0, big, 1.0), 0.0, 1.0)
    denom = 2.0 * a_abs * b_abs
    da = np.clip(s - a_abs, 0.0, None)
    db = np.clip(s - b_abs, 0.0, None)
    quad = (s * s - da * da - db * db) / np.where(denom > 0.0, denom, 1.0)
    return np.where(small, lin, np.clip(quad, 0.0, 1.0))
