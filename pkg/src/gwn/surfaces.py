"""Surface backends with a uniform contract.

Every backend exposes oriented boundary loops, an axis-aligned bounding box,
and all-hits ray intersection returning :class:`IntersectionRecord` entries
(with surface normals and tangency flags).  Meshes use a BVH; parametric
patches (cubic Bezier triangles, Coons patches) use a clipped multi-start
nonlinear solve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import root

from . import _kernels
from .config import DEFAULT_EPS, EpsilonConfig
from .errors import (
    DegenerateNormal,
    NonManifoldEdge,
    NonOrientable,
    OpenChain,
)
from .geometry import Aabb, Ray, Vec3, normalize, ray_aabb_clip

# ---------------------------------------------------------------------------
# shared record types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IntersectionRecord:
    """One ray-surface hit.

    ``sign`` is +1 when the ray direction aligns with the surface normal
    (entering from the back) and -1 otherwise; it is meaningful only when
    ``tangency`` is false.  ``grazing`` marks hits too close to a triangle
    edge or a patch boundary to trust the count; the engine re-shoots.
    """

    t: float
    point: Vec3
    normal: Vec3
    sign: int
    tangency: bool
    grazing: bool = False


@dataclass(frozen=True)
class BoundaryLoop:
    """Closed oriented polyline: the last point connects back to the first."""

    points: np.ndarray  # (N, 3)
    patch_id: int = 0

    def __post_init__(self):
        pts = np.ascontiguousarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 3 or pts.shape[0] < 3:
            raise ValueError("a boundary loop needs at least 3 points of shape (N, 3)")
        object.__setattr__(self, "points", pts)

    def reversed(self) -> "BoundaryLoop":
        return BoundaryLoop(self.points[::-1].copy(), self.patch_id)


# ---------------------------------------------------------------------------
# BVH
# ---------------------------------------------------------------------------


@dataclass
class Bvh:
    node_min: np.ndarray
    node_max: np.ndarray
    node_left: np.ndarray
    node_right: np.ndarray
    node_start: np.ndarray
    node_count: np.ndarray
    tri_order: np.ndarray
    V0: np.ndarray
    E1: np.ndarray
    E2: np.ndarray
    NN: np.ndarray  # |e1 x e2|
    NH: np.ndarray  # unit normals
    C: np.ndarray   # centroids
    R2: np.ndarray  # squared circumscribing radii around centroids


def build_bvh(vertices: np.ndarray, triangles: np.ndarray, leaf_size: int = 8) -> Bvh:
    """Median-split BVH over triangle centroids."""
    V = np.ascontiguousarray(vertices, dtype=np.float64)
    T = np.ascontiguousarray(triangles, dtype=np.int64)
    F = len(T)
    p0, p1, p2 = V[T[:, 0]], V[T[:, 1]], V[T[:, 2]]
    tmin = np.minimum(np.minimum(p0, p1), p2)
    tmax = np.maximum(np.maximum(p0, p1), p2)
    cent = (p0 + p1 + p2) / 3.0

    node_min, node_max = [], []
    node_left, node_right, node_start, node_count = [], [], [], []
    order = np.arange(F, dtype=np.int64)

    def new_node():
        node_min.append(np.zeros(3))
        node_max.append(np.zeros(3))
        node_left.append(-1)
        node_right.append(-1)
        node_start.append(0)
        node_count.append(0)
        return len(node_min) - 1

    root_id = new_node()
    stack = [(root_id, 0, F)]
    while stack:
        node, lo, hi = stack.pop()
        ids = order[lo:hi]
        node_min[node] = tmin[ids].min(axis=0)
        node_max[node] = tmax[ids].max(axis=0)
        if hi - lo <= leaf_size:
            node_start[node] = lo
            node_count[node] = hi - lo
            continue
        ext = cent[ids].max(axis=0) - cent[ids].min(axis=0)
        axis = int(np.argmax(ext))
        mid = (lo + hi) // 2
        part = np.argsort(cent[ids, axis], kind="stable")
        order[lo:hi] = ids[part]
        left = new_node()
        right = new_node()
        node_left[node] = left
        node_right[node] = right
        stack.append((left, lo, mid))
        stack.append((right, mid, hi))

    e1 = p1 - p0
    e2 = p2 - p0
    n = np.cross(e1, e2)
    nn = np.linalg.norm(n, axis=1)
    nn_safe = np.where(nn > 0, nn, 1.0)
    nh = n / nn_safe[:, None]
    r2 = np.maximum(
        np.maximum(
            np.einsum("ij,ij->i", p0 - cent, p0 - cent),
            np.einsum("ij,ij->i", p1 - cent, p1 - cent),
        ),
        np.einsum("ij,ij->i", p2 - cent, p2 - cent),
    )
    return Bvh(
        np.ascontiguousarray(node_min, dtype=np.float64),
        np.ascontiguousarray(node_max, dtype=np.float64),
        np.asarray(node_left, dtype=np.int64),
        np.asarray(node_right, dtype=np.int64),
        np.asarray(node_start, dtype=np.int64),
        np.asarray(node_count, dtype=np.int64),
        order,
        np.ascontiguousarray(p0),
        np.ascontiguousarray(e1),
        np.ascontiguousarray(e2),
        np.ascontiguousarray(nn),
        np.ascontiguousarray(nh),
        np.ascontiguousarray(cent),
        np.ascontiguousarray(r2),
    )


# ---------------------------------------------------------------------------
# triangle meshes
# ---------------------------------------------------------------------------


@dataclass
class MeshSurface:
    vertices: np.ndarray  # (V, 3)
    triangles: np.ndarray  # (F, 3) int
    patch_id: int = 0
    _bvh: Bvh | None = field(default=None, repr=False)
    _boundary: list[BoundaryLoop] | None = field(default=None, repr=False)

    def __post_init__(self):
        self.vertices = np.ascontiguousarray(self.vertices, dtype=np.float64)
        self.triangles = np.ascontiguousarray(self.triangles, dtype=np.int64)
        if self.triangles.size and self.triangles.max() >= len(self.vertices):
            raise ValueError("triangle index out of range")

    @property
    def bvh(self) -> Bvh:
        if self._bvh is None:
            self._bvh = build_bvh(self.vertices, self.triangles)
        return self._bvh

    def aabb(self) -> Aabb:
        return Aabb.of_points(self.vertices)

    def boundary_loops(self) -> list[BoundaryLoop]:
        if self._boundary is None:
            self._boundary = extract_mesh_boundary(self)
        return self._boundary

    def all_hits(self, ray: Ray, t_window=(0.0, np.inf),
                 eps: EpsilonConfig = DEFAULT_EPS) -> list[IntersectionRecord]:
        return intersect_ray_mesh(self, ray, t_window, eps)

    def flipped(self) -> "MeshSurface":
        return MeshSurface(self.vertices.copy(), self.triangles[:, ::-1].copy(),
                           self.patch_id)


def _edge_map(triangles: np.ndarray) -> dict[tuple[int, int], list[tuple[int, int]]]:
    """Undirected edge -> list of (triangle, +1/-1 direction as stored)."""
    edges: dict[tuple[int, int], list[tuple[int, int]]] = {}
    for f, (a, b, c) in enumerate(triangles):
        for u, v in ((a, b), (b, c), (c, a)):
            key = (u, v) if u < v else (v, u)
            edges.setdefault(key, []).append((f, 1 if u < v else -1))
    return edges


def extract_mesh_boundary(mesh: MeshSurface) -> list[BoundaryLoop]:
    """Chain edges used by exactly one triangle into closed oriented loops."""
    edges = _edge_map(mesh.triangles)
    succ: dict[int, list[int]] = {}
    n_boundary = 0
    for (u, v), uses in edges.items():
        if len(uses) > 2:
            raise NonManifoldEdge(f"edge {(u, v)} used by {len(uses)} triangles")
        if len(uses) == 1:
            # orient the boundary edge as the triangle traverses it
            a, b = (u, v) if uses[0][1] == 1 else (v, u)
            succ.setdefault(a, []).append(b)
            n_boundary += 1

    loops = []
    consumed = 0
    while succ:
        start = min(succ)
        chain = [start]
        cur = start
        while True:
            nxts = succ.get(cur)
            if not nxts:
                raise OpenChain(f"boundary chain broke at vertex {cur}")
            nxt = nxts.pop()
            if not nxts:
                del succ[cur]
            consumed += 1
            if nxt == start:
                break
            chain.append(nxt)
            cur = nxt
        if len(chain) < 3:
            raise OpenChain("degenerate boundary loop with fewer than 3 vertices")
        loops.append(BoundaryLoop(mesh.vertices[np.asarray(chain)], mesh.patch_id))
    if consumed != n_boundary:
        raise OpenChain("boundary edges left over after chaining")
    return loops


def orient_consistently(mesh: MeshSurface) -> MeshSurface:
    """Flip triangle windings so every interior edge is traversed once per
    direction.  Each connected component is anchored at its lowest-index
    triangle, which keeps its stored winding.
    """
    T = mesh.triangles.copy()
    F = len(T)
    edges = _edge_map(T)
    for key, uses in edges.items():
        if len(uses) > 2:
            raise NonManifoldEdge(f"edge {key} used by {len(uses)} triangles")
    # adjacency: triangle -> (neighbour, same_direction_as_stored)
    adj: dict[int, list[tuple[int, bool]]] = {f: [] for f in range(F)}
    for uses in edges.values():
        if len(uses) == 2:
            (f0, d0), (f1, d1) = uses
            adj[f0].append((f1, d0 == d1))
            adj[f1].append((f0, d0 == d1))

    flip = np.zeros(F, dtype=bool)
    seen = np.zeros(F, dtype=bool)
    for f0 in range(F):
        if seen[f0]:
            continue
        seen[f0] = True
        queue = [f0]
        while queue:
            f = queue.pop()
            for g, same_dir in adj[f]:
                # consistent orientation requires opposite traversal, i.e.
                # same stored direction iff exactly one of the two is flipped
                want = flip[f] if not same_dir else not flip[f]
                if not seen[g]:
                    seen[g] = True
                    flip[g] = want
                    queue.append(g)
                elif flip[g] != want:
                    raise NonOrientable("orientation conflict while flooding")
    if np.any(flip):
        T[flip] = T[flip][:, ::-1]
    return MeshSurface(mesh.vertices.copy(), T, mesh.patch_id)


def intersect_ray_mesh(mesh: MeshSurface, ray: Ray, t_window=(0.0, np.inf),
                       eps: EpsilonConfig = DEFAULT_EPS) -> list[IntersectionRecord]:
    """All ray hits in the window, ascending in t, with geometric normals."""
    t_lo, t_hi = t_window
    if t_lo < 0.0:
        raise ValueError("t window must start at 0 or later")
    bvh = mesh.bvh
    plane_tol = 1e-10 * (1.0 + mesh.aabb().diag)
    ts, tris, dotdn, us, vs = _kernels.bvh_ray_all_hits(
        bvh, ray.origin, ray.direction, t_lo, t_hi, eps.tangent_parametric, plane_tol
    )
    order = np.argsort(ts, kind="stable")
    records = []
    for k in order:
        f = int(tris[k])
        nrm = bvh.NH[f]
        dd = float(dotdn[k])
        tangent = abs(dd) <= eps.tangent_parametric
        bary_min = min(us[k], vs[k], 1.0 - us[k] - vs[k])
        records.append(
            IntersectionRecord(
                t=float(ts[k]),
                point=ray.at(float(ts[k])),
                normal=nrm.copy(),
                sign=1 if dd > 0 else -1,
                tangency=bool(tangent),
                grazing=bool(bary_min < eps.edge_graze),
            )
        )
    return records


# ---------------------------------------------------------------------------
# Bezier curves (for Coons boundaries)
# ---------------------------------------------------------------------------


def elevate_quadratic(ctrl: np.ndarray) -> np.ndarray:
    """Degree-elevate a quadratic Bezier curve (basis (1-t)^2, 2t(1-t), t^2)
    to the cubic used everywhere else."""
    q = np.asarray(ctrl, dtype=np.float64)
    if q.shape != (3, 3):
        raise ValueError("quadratic curve needs 3 control points")
    return np.array([q[0], (q[0] + 2 * q[1]) / 3, (2 * q[1] + q[2]) / 3, q[2]])


def cubic_point(ctrl: np.ndarray, t):
    """Point(s) on a cubic Bezier curve; ``t`` may be scalar or array."""
    t = np.asarray(t, dtype=np.float64)[..., None]
    s = 1.0 - t
    return (
        s**3 * ctrl[0]
        + 3 * s**2 * t * ctrl[1]
        + 3 * s * t**2 * ctrl[2]
        + t**3 * ctrl[3]
    )


def cubic_deriv(ctrl: np.ndarray, t):
    t = np.asarray(t, dtype=np.float64)[..., None]
    s = 1.0 - t
    return 3 * (
        s**2 * (ctrl[1] - ctrl[0])
        + 2 * s * t * (ctrl[2] - ctrl[1])
        + t**2 * (ctrl[3] - ctrl[2])
    )


# ---------------------------------------------------------------------------
# cubic Bezier triangle
# ---------------------------------------------------------------------------


def _bezier_tri_basis(u, v):
    s = u + v - 1.0
    return np.array([
        -s**3,
        3.0 * v * s**2,
        3.0 * u * s**2,
        -3.0 * v**2 * s,
        -6.0 * u * v * s,
        -3.0 * u**2 * s,
        v**3,
        3.0 * u * v**2,
        3.0 * u**2 * v,
        u**3,
    ])


def _bezier_tri_basis_du(u, v):
    s = u + v - 1.0
    return np.array([
        -3.0 * s**2,
        6.0 * v * s,
        3.0 * s**2 + 6.0 * u * s,
        -3.0 * v**2,
        -6.0 * v * s - 6.0 * u * v,
        -6.0 * u * s - 3.0 * u**2,
        0.0,
        3.0 * v**2,
        6.0 * u * v,
        3.0 * u**2,
    ])


def _bezier_tri_basis_dv(u, v):
    s = u + v - 1.0
    return np.array([
        -3.0 * s**2,
        3.0 * s**2 + 6.0 * v * s,
        6.0 * u * s,
        -6.0 * v * s - 3.0 * v**2,
        -6.0 * u * s - 6.0 * u * v,
        -3.0 * u**2,
        3.0 * v**2,
        6.0 * u * v,
        3.0 * u**2,
        0.0,
    ])


#: parameter positions where each basis function of the cubic triangle peaks
BEZIER_TRI_NODES = np.array([
    [0.0, 0.0], [0.0, 1 / 3], [1 / 3, 0.0], [0.0, 2 / 3], [1 / 3, 1 / 3],
    [2 / 3, 0.0], [0.0, 1.0], [1 / 3, 2 / 3], [2 / 3, 1 / 3], [1.0, 0.0],
])


@dataclass
class BezierTrianglePatch:
    control: np.ndarray  # (10, 3)
    patch_id: int = 0
    may_self_intersect: bool = False

    def __post_init__(self):
        self.control = np.ascontiguousarray(self.control, dtype=np.float64)
        if self.control.shape != (10, 3):
            raise ValueError("a cubic Bezier triangle has exactly 10 control points")

    def point(self, u: float, v: float) -> Vec3:
        return _bezier_tri_basis(u, v) @ self.control

    def partials(self, u: float, v: float) -> tuple[Vec3, Vec3]:
        return (
            _bezier_tri_basis_du(u, v) @ self.control,
            _bezier_tri_basis_dv(u, v) @ self.control,
        )

    def aabb(self) -> Aabb:
        # convex-hull property: the patch lies inside its control box
        return Aabb.of_points(self.control)

    def domain_edges(self):
        # counter-clockwise around the simplex
        return [
            lambda t: (t, 0.0),
            lambda t: (1.0 - t, t),
            lambda t: (0.0, 1.0 - t),
        ]

    def domain_contains(self, u: float, v: float, tol: float) -> bool:
        return u >= -tol and v >= -tol and u + v <= 1.0 + tol

    def domain_boundary_dist(self, u: float, v: float) -> float:
        return min(u, v, 1.0 - u - v)

    def domain_center(self):
        return (1.0 / 3.0, 1.0 / 3.0)

    def boundary_loops(self, samples_per_edge: int = 200) -> list[BoundaryLoop]:
        return [patch_boundary(self, samples_per_edge)]

    def all_hits(self, ray: Ray, t_window=(0.0, np.inf),
                 eps: EpsilonConfig = DEFAULT_EPS) -> list[IntersectionRecord]:
        return intersect_ray_bezier(self, ray, eps, t_window)


def eval_bezier_triangle(patch: BezierTrianglePatch, u: float, v: float,
                         eps: EpsilonConfig = DEFAULT_EPS) -> tuple[Vec3, Vec3]:
    """Point and unit normal of the patch at simplex coordinates (u, v)."""
    if u < 0 or v < 0 or u + v > 1.0 + 1e-12:
        raise ValueError("(u, v) outside the unit simplex")
    p = patch.point(u, v)
    fu, fv = patch.partials(u, v)
    n = np.cross(fu, fv)
    nn = math.sqrt(n @ n)
    if nn < eps.degenerate:
        raise DegenerateNormal(f"degenerate normal at (u, v) = ({u}, {v})")
    return p, n / nn


# ---------------------------------------------------------------------------
# Coons patches
# ---------------------------------------------------------------------------


@dataclass
class CoonsPatch:
    """Bilinear blend of four cubic Bezier boundary curves.

    ``c0`` runs along v=0, ``c1`` along v=1 (both in +u); ``d0`` along u=0,
    ``d1`` along u=1 (both in +v).  Corners must agree within 1e-9.
    """

    c0: np.ndarray
    c1: np.ndarray
    d0: np.ndarray
    d1: np.ndarray
    patch_id: int = 0
    may_self_intersect: bool = False

    def __post_init__(self):
        for name in ("c0", "c1", "d0", "d1"):
            cur = np.ascontiguousarray(getattr(self, name), dtype=np.float64)
            if cur.shape == (3, 3):
                cur = elevate_quadratic(cur)
            if cur.shape != (4, 3):
                raise ValueError(f"curve {name} must have 3 or 4 control points")
            setattr(self, name, cur)
        corners = [
            (self.c0[0], self.d0[0]),
            (self.c0[3], self.d1[0]),
            (self.c1[0], self.d0[3]),
            (self.c1[3], self.d1[3]),
        ]
        for a, b in corners:
            if np.linalg.norm(a - b) > 1e-9:
                raise ValueError("Coons patch corners do not meet within 1e-9")

    def point(self, u: float, v: float) -> Vec3:
        p00, p10 = self.c0[0], self.c0[3]
        p01, p11 = self.c1[0], self.c1[3]
        ruled_u = (1 - v) * cubic_point(self.c0, u) + v * cubic_point(self.c1, u)
        ruled_v = (1 - u) * cubic_point(self.d0, v) + u * cubic_point(self.d1, v)
        bilin = (
            (1 - u) * (1 - v) * p00
            + u * (1 - v) * p10
            + (1 - u) * v * p01
            + u * v * p11
        )
        return (ruled_u + ruled_v - bilin).reshape(3)

    def partials(self, u: float, v: float) -> tuple[Vec3, Vec3]:
        p00, p10 = self.c0[0], self.c0[3]
        p01, p11 = self.c1[0], self.c1[3]
        du = (
            (1 - v) * cubic_deriv(self.c0, u)
            + v * cubic_deriv(self.c1, u)
            + (cubic_point(self.d1, v) - cubic_point(self.d0, v))
            - (-(1 - v) * p00 + (1 - v) * p10 - v * p01 + v * p11)
        )
        dv = (
            (cubic_point(self.c1, u) - cubic_point(self.c0, u))
            + (1 - u) * cubic_deriv(self.d0, v)
            + u * cubic_deriv(self.d1, v)
            - (-(1 - u) * p00 - u * p10 + (1 - u) * p01 + u * p11)
        )
        return du.reshape(3), dv.reshape(3)

    def aabb(self) -> Aabb:
        pts = np.vstack([self.c0, self.c1, self.d0, self.d1])
        return Aabb.of_points(pts)

    def domain_edges(self):
        # counter-clockwise around the unit square
        return [
            lambda t: (t, 0.0),
            lambda t: (1.0, t),
            lambda t: (1.0 - t, 1.0),
            lambda t: (0.0, 1.0 - t),
        ]

    def domain_contains(self, u: float, v: float, tol: float) -> bool:
        return -tol <= u <= 1.0 + tol and -tol <= v <= 1.0 + tol

    def domain_boundary_dist(self, u: float, v: float) -> float:
        return min(u, 1.0 - u, v, 1.0 - v)

    def domain_center(self):
        return (0.5, 0.5)

    def boundary_loops(self, samples_per_edge: int = 200) -> list[BoundaryLoop]:
        return [patch_boundary(self, samples_per_edge)]

    def all_hits(self, ray: Ray, t_window=(0.0, np.inf),
                 eps: EpsilonConfig = DEFAULT_EPS) -> list[IntersectionRecord]:
        return intersect_ray_coons(self, ray, eps, t_window)


def eval_coons(patch: CoonsPatch, u: float, v: float,
               eps: EpsilonConfig = DEFAULT_EPS) -> tuple[Vec3, Vec3]:
    """Point and unit normal of the Coons patch at (u, v) in the unit square."""
    if not (0.0 <= u <= 1.0 and 0.0 <= v <= 1.0):
        raise ValueError("(u, v) outside the unit square")
    p = patch.point(u, v)
    fu, fv = patch.partials(u, v)
    n = np.cross(fu, fv)
    nn = math.sqrt(n @ n)
    if nn < eps.degenerate:
        raise DegenerateNormal(f"degenerate normal at (u, v) = ({u}, {v})")
    return p, n / nn


# ---------------------------------------------------------------------------
# boundary sampling
# ---------------------------------------------------------------------------


def patch_boundary(patch, samples_per_edge: int = 200) -> BoundaryLoop:
    """Sample the patch's domain edges into one closed loop.

    Edges are walked counter-clockwise in the domain, so the loop follows
    the right-hand rule around the patch normal.  Each edge contributes
    ``samples_per_edge - 1`` points (its last sample is the next edge's
    first).
    """
    if samples_per_edge < 2:
        raise ValueError("need at least 2 samples per edge")
    pts = []
    for edge in patch.domain_edges():
        for t in np.linspace(0.0, 1.0, samples_per_edge)[:-1]:
            u, v = edge(float(t))
            pts.append(patch.point(u, v))
    return BoundaryLoop(np.asarray(pts), patch.patch_id)


# ---------------------------------------------------------------------------
# multi-start ray intersection for parametric patches
# ---------------------------------------------------------------------------


def _multistart_ray_roots(patch, ray: Ray, eps: EpsilonConfig, t_window,
                          tangent_eps: float) -> list[IntersectionRecord]:
    box = patch.aabb()
    clip = ray_aabb_clip(ray, box)
    if clip is None:
        return []
    t_lo = max(clip[0], t_window[0])
    t_hi = min(clip[1], t_window[1])
    if t_hi < t_lo:
        return []
    diag = max(box.diag, 1e-12)
    n_seeds = max(2, math.ceil(30.0 * (t_hi - t_lo) / diag))
    if getattr(patch, "may_self_intersect", False):
        n_seeds *= 4
    u0, v0 = patch.domain_center()
    O, D = ray.origin, ray.direction

    def fun(x):
        return patch.point(x[0], x[1]) - O - x[2] * D

    def jac(x):
        fu, fv = patch.partials(x[0], x[1])
        return np.column_stack([fu, fv, -D])

    roots: list[np.ndarray] = []
    for k in range(n_seeds):
        t_seed = t_lo + (k + 0.5) * (t_hi - t_lo) / n_seeds
        sol = root(fun, np.array([u0, v0, t_seed]), jac=jac, method="hybr",
                   options={"xtol": 1e-14})
        x = sol.x
        res = fun(x)
        if math.sqrt(res @ res) > eps.residual:
            continue  # diverged seed, silently dropped
        u, v, t = float(x[0]), float(x[1]), float(x[2])
        if not patch.domain_contains(u, v, 1e-9):
            continue
        if t < -1e-12:
            continue
        pt = O + t * D
        if any(np.linalg.norm(pt - (O + r[2] * D)) < eps.dedup for r in roots):
            continue
        roots.append(np.array([u, v, t]))

    records = []
    for u, v, t in roots:
        if t < t_window[0] - 1e-12 or t > t_window[1] + 1e-12:
            continue
        fu, fv = patch.partials(u, v)
        n = np.cross(fu, fv)
        nn = math.sqrt(n @ n)
        if nn < eps.degenerate:
            # undefined normal: treat as a tangent contact so callers retry
            records.append(IntersectionRecord(t, ray.at(t), D.copy(), 1, True, True))
            continue
        nh = n / nn
        dd = float(D @ nh)
        records.append(
            IntersectionRecord(
                t=float(t),
                point=ray.at(float(t)),
                normal=nh,
                sign=1 if dd > 0 else -1,
                tangency=bool(abs(dd) <= tangent_eps),
                grazing=bool(patch.domain_boundary_dist(u, v) < eps.edge_graze),
            )
        )
    records.sort(key=lambda r: r.t)
    return records


def intersect_ray_bezier(patch: BezierTrianglePatch, ray: Ray,
                         eps: EpsilonConfig = DEFAULT_EPS,
                         t_window=(0.0, np.inf)) -> list[IntersectionRecord]:
    """All ray hits on a cubic Bezier triangle via clipped multi-start solves."""
    return _multistart_ray_roots(patch, ray, eps, t_window, eps.tangent_parametric)


def intersect_ray_coons(patch: CoonsPatch, ray: Ray,
                        eps: EpsilonConfig = DEFAULT_EPS,
                        t_window=(0.0, np.inf)) -> list[IntersectionRecord]:
    """All ray hits on a Coons patch; same contract as the Bezier variant."""
    return _multistart_ray_roots(patch, ray, eps, t_window, eps.tangent_parametric)
