"""Exact-enough primitives: 3D vectors, rays, boxes, great-circle arcs.

Points and directions are plain numpy ``float64`` arrays of shape (3,).
All functions are pure; nothing here mutates its arguments.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_EPS, EpsilonConfig
from .errors import DegenerateProjection, OverlappingArcs

Vec3 = np.ndarray


def vec(x: float, y: float, z: float) -> Vec3:
    return np.array([x, y, z], dtype=np.float64)


def norm(v: Vec3) -> float:
    return float(np.sqrt(v @ v))


def normalize(v: Vec3) -> Vec3:
    n = norm(v)
    if n == 0.0:
        raise ZeroDivisionError("cannot normalize the zero vector")
    return v / n


def is_unit(v: Vec3, tol: float = DEFAULT_EPS.unit_norm) -> bool:
    return abs(norm(v) - 1.0) <= tol


def any_orthonormal(v: Vec3) -> Vec3:
    """Some unit vector orthogonal to unit ``v``."""
    a = np.array([1.0, 0.0, 0.0]) if abs(v[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    return normalize(np.cross(v, a))


@dataclass(frozen=True)
class Ray:
    origin: Vec3
    direction: Vec3  # unit

    def __post_init__(self):
        if not is_unit(self.direction):
            object.__setattr__(self, "direction", normalize(self.direction))

    def at(self, t: float) -> Vec3:
        return self.origin + t * self.direction


@dataclass(frozen=True)
class Aabb:
    min_corner: Vec3
    max_corner: Vec3

    def __post_init__(self):
        if np.any(self.min_corner > self.max_corner):
            raise ValueError("Aabb min corner must be <= max corner componentwise")

    @property
    def diag(self) -> float:
        return norm(self.max_corner - self.min_corner)

    @staticmethod
    def of_points(points: np.ndarray) -> "Aabb":
        pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
        return Aabb(pts.min(axis=0), pts.max(axis=0))

    def union(self, other: "Aabb") -> "Aabb":
        return Aabb(
            np.minimum(self.min_corner, other.min_corner),
            np.maximum(self.max_corner, other.max_corner),
        )

    def contains(self, p: Vec3, slack: float = 0.0) -> bool:
        return bool(
            np.all(p >= self.min_corner - slack) and np.all(p <= self.max_corner + slack)
        )


@dataclass(frozen=True)
class GreatArc:
    """Directed geodesic segment on the unit sphere, shorter than pi.

    ``pole`` is the unit normal of the arc's great-circle plane, oriented so
    travel from ``start`` to ``end`` is counter-clockwise around it.  The
    central projection of a straight 3D segment is such an arc once split
    below pi.
    """

    start: Vec3
    end: Vec3
    pole: Vec3
    length: float = field(default=0.0)

    def __post_init__(self):
        if self.length == 0.0:
            object.__setattr__(self, "length", arc_angle(self.start, self.end, self.pole))

    def point_at(self, angle: float) -> Vec3:
        """Point at the given angle from ``start`` along the arc."""
        # rotate start around pole: start*cos + (pole x start)*sin
        return self.start * np.cos(angle) + np.cross(self.pole, self.start) * np.sin(angle)

    def tangent_at(self, p: Vec3) -> Vec3:
        """Unit travel direction at point ``p`` of the arc."""
        return np.cross(self.pole, p)

    def reversed(self) -> "GreatArc":
        return GreatArc(self.end, self.start, -self.pole, self.length)


def make_arc(start: Vec3, end: Vec3) -> GreatArc:
    """Arc between two non-antipodal unit vectors, CCW around its pole."""
    c = np.cross(start, end)
    n = norm(c)
    if n < 1e-14:
        raise ValueError("arc endpoints are parallel or antipodal; split first")
    return GreatArc(start, end, c / n)


def arc_angle(start: Vec3, end: Vec3, pole: Vec3) -> float:
    """Angle from ``start`` to ``end`` going CCW around ``pole``, in [0, 2pi)."""
    a = float(np.arctan2(np.cross(start, end) @ pole, start @ end))
    return a if a >= 0.0 else a + 2.0 * np.pi


def angle_on_arc(arc: GreatArc, p: Vec3) -> float:
    """Signed angle of ``p`` along the arc's circle, measured from ``start``.

    Result is in (-pi, pi]; points on the arc itself land in [0, arc.length].
    """
    return float(np.arctan2(np.cross(arc.start, p) @ arc.pole, arc.start @ p))


def project_to_sphere(center: Vec3, x: Vec3, eps: EpsilonConfig = DEFAULT_EPS) -> Vec3:
    """Central projection of ``x`` onto the unit sphere around ``center``."""
    d = x - center
    n = norm(d)
    if n <= eps.degenerate:
        raise DegenerateProjection(f"point {x} coincides with projection center {center}")
    return d / n


def arc_intersections(
    a: GreatArc, b: GreatArc, eps: EpsilonConfig = DEFAULT_EPS
) -> list[Vec3]:
    """Transversal intersection points interior to both arcs.

    Endpoint hits follow the half-open convention: a crossing exactly at an
    arc's start belongs to that arc, one at its end does not, so polyline
    joints are counted once.  Coplanar arcs that share points raise
    :class:`OverlappingArcs`.
    """
    d = np.cross(a.pole, b.pole)
    nd = norm(d)
    if nd < eps.arc_coplanar:
        # same great circle (either orientation); overlap check via angles
        if _coplanar_arcs_share_points(a, b, eps):
            raise OverlappingArcs("coplanar arcs share points")
        return []
    d = d / nd
    out = []
    for cand in (d, -d):
        if _on_arc_half_open(a, cand, eps) and _on_arc_half_open(b, cand, eps):
            out.append(cand)
    return out


def _on_arc_half_open(arc: GreatArc, p: Vec3, eps: EpsilonConfig) -> bool:
    phi = angle_on_arc(arc, p)
    return -eps.on_arc <= phi < arc.length - eps.on_arc


def on_arc_closed(arc: GreatArc, p: Vec3, tol: float) -> bool:
    """Point on the arc including both endpoints, within angular ``tol``."""
    if abs(p @ arc.pole) > tol:
        return False
    phi = angle_on_arc(arc, p)
    return -tol <= phi <= arc.length + tol


def _coplanar_arcs_share_points(a: GreatArc, b: GreatArc, eps: EpsilonConfig) -> bool:
    for p in (b.start, b.end, a.start, a.end):
        arc = a if p is b.start or p is b.end else b
        phi = angle_on_arc(arc, p)
        if -eps.on_arc <= phi <= arc.length + eps.on_arc and abs(p @ arc.pole) < eps.on_arc:
            return True
    return False


def ray_aabb_clip(r: Ray, box: Aabb) -> tuple[float, float] | None:
    """Slab-method parameter window of the ray inside the box, cut to t >= 0.

    Returns ``None`` when the ray misses the box entirely.
    """
    t_min, t_max = 0.0, np.inf
    for k in range(3):
        o, d = r.origin[k], r.direction[k]
        lo, hi = box.min_corner[k], box.max_corner[k]
        if d == 0.0:
            if o < lo or o > hi:
                return None
            continue
        inv = 1.0 / d
        t0, t1 = (lo - o) * inv, (hi - o) * inv
        if t0 > t1:
            t0, t1 = t1, t0
        t_min = max(t_min, t0)
        t_max = min(t_max, t1)
        if t_max < t_min:
            return None
    return (t_min, t_max)
