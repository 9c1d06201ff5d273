"""Hot numeric kernels: compiled (numba) and pure-numpy twins.

Three workloads dominate runtime and live here:

* the all-pairs search for crossings between great-circle arcs on the
  query sphere (the per-query bottleneck),
* all-hits ray/mesh intersection through a BVH,
* per-triangle signed solid-angle sums (the mesh ground truth).

Plus one specialised batch kernel that evaluates every query point along a
reused ray in one call when the scene has a single boundary loop whose
projection stays simple.  Each public function dispatches on
:func:`gwn._accel.numba_enabled`; the numpy twins return identical results
(up to float associativity) and are what runs under ``GWN_NO_NUMBA=1``.
"""

from __future__ import annotations

import math

import numpy as np

from ._accel import NUMBA_AVAILABLE, njit, numba_enabled

if NUMBA_AVAILABLE:
    from numba import prange
else:  # pragma: no cover
    prange = range

TWO_PI = 2.0 * math.pi
FOUR_PI = 4.0 * math.pi

# ---------------------------------------------------------------------------
# scalar helpers (inlined by numba)
# ---------------------------------------------------------------------------


@njit(inline="always", cache=True)
def _dot(ax, ay, az, bx, by, bz):
    return ax * bx + ay * by + az * bz


@njit(inline="always", cache=True)
def _cross(ax, ay, az, bx, by, bz):
    return ay * bz - az * by, az * bx - ax * bz, ax * by - ay * bz


@njit(inline="always", cache=True)
def _angle_on(sx, sy, sz, px, py, pz, qx, qy, qz):
    # angle of point q along the circle with pole p, measured from start s
    cx, cy, cz = _cross(sx, sy, sz, qx, qy, qz)
    return math.atan2(_dot(cx, cy, cz, px, py, pz), _dot(sx, sy, sz, qx, qy, qz))


# ---------------------------------------------------------------------------
# arc crossings (all-pairs, O(B^2) by design)
# ---------------------------------------------------------------------------


@njit(cache=True)
def _arc_crossings_numba(S, E, P, L, prev_idx, next_idx, on_tol, cop_tol):
    B = S.shape[0]
    cap = 8 * B + 64
    out_i = np.empty(cap, np.int64)
    out_j = np.empty(cap, np.int64)
    out_p = np.empty((cap, 3), np.float64)
    cop_cap = 256
    cop_i = np.empty(cop_cap, np.int64)
    cop_j = np.empty(cop_cap, np.int64)
    n = 0
    ncop = 0
    overflow = 0
    side = 1e-12
    for i in range(B):
        six, siy, siz = S[i, 0], S[i, 1], S[i, 2]
        pix, piy, piz = P[i, 0], P[i, 1], P[i, 2]
        li = L[i]
        for j in range(i + 1, B):
            if j == next_idx[i] or j == prev_idx[i]:
                continue
            # arc j entirely on one side of plane i: no crossing possible
            dsj = _dot(S[j, 0], S[j, 1], S[j, 2], pix, piy, piz)
            dej = _dot(E[j, 0], E[j, 1], E[j, 2], pix, piy, piz)
            if (dsj > side and dej > side) or (dsj < -side and dej < -side):
                continue
            pjx, pjy, pjz = P[j, 0], P[j, 1], P[j, 2]
            dsi = _dot(six, siy, siz, pjx, pjy, pjz)
            dei = _dot(E[i, 0], E[i, 1], E[i, 2], pjx, pjy, pjz)
            if (dsi > side and dei > side) or (dsi < -side and dei < -side):
                continue
            dx, dy, dz = _cross(pix, piy, piz, pjx, pjy, pjz)
            nd = math.sqrt(dx * dx + dy * dy + dz * dz)
            if nd < cop_tol:
                if ncop < cop_cap:
                    cop_i[ncop] = i
                    cop_j[ncop] = j
                    ncop += 1
                else:
                    overflow = 1
                continue
            dx /= nd
            dy /= nd
            dz /= nd
            for s in range(2):
                cx = dx if s == 0 else -dx
                cy = dy if s == 0 else -dy
                cz = dz if s == 0 else -dz
                phi_i = _angle_on(six, siy, siz, pix, piy, piz, cx, cy, cz)
                if phi_i < -on_tol or phi_i > li + on_tol:
                    continue
                phi_j = _angle_on(
                    S[j, 0], S[j, 1], S[j, 2], pjx, pjy, pjz, cx, cy, cz
                )
                if phi_j < -on_tol or phi_j > L[j] + on_tol:
                    continue
                if n < cap:
                    out_i[n] = i
                    out_j[n] = j
                    out_p[n, 0] = cx
                    out_p[n, 1] = cy
                    out_p[n, 2] = cz
                    n += 1
                else:
                    overflow = 1
    return out_i[:n], out_j[:n], out_p[:n], cop_i[:ncop], cop_j[:ncop], overflow


def _arc_crossings_numpy(S, E, P, L, prev_idx, next_idx, on_tol, cop_tol):
    B = S.shape[0]
    side = 1e-12
    # endpoint-vs-plane sign tables; surviving pairs must straddle both planes
    ds = S @ P.T  # ds[j, i] = S[j] . P[i]
    de = E @ P.T
    same_side = ((ds > side) & (de > side)) | ((ds < -side) & (de < -side))
    cand = ~(same_side.T | same_side)
    iu = np.triu_indices(B, k=1)
    mask = cand[iu]
    ii, jj = iu[0][mask], iu[1][mask]
    if ii.size:
        keep = (jj != next_idx[ii]) & (jj != prev_idx[ii])
        ii, jj = ii[keep], jj[keep]
    out_i, out_j, out_p = [], [], []
    cop_i, cop_j = [], []
    for i, j in zip(ii, jj):
        d = np.cross(P[i], P[j])
        nd = math.sqrt(d @ d)
        if nd < cop_tol:
            cop_i.append(i)
            cop_j.append(j)
            continue
        d = d / nd
        for c in (d, -d):
            phi_i = math.atan2(np.cross(S[i], c) @ P[i], S[i] @ c)
            if phi_i < -on_tol or phi_i > L[i] + on_tol:
                continue
            phi_j = math.atan2(np.cross(S[j], c) @ P[j], S[j] @ c)
            if phi_j < -on_tol or phi_j > L[j] + on_tol:
                continue
            out_i.append(i)
            out_j.append(j)
            out_p.append(c)
    pi = np.array(out_i, dtype=np.int64)
    pj = np.array(out_j, dtype=np.int64)
    pp = np.array(out_p, dtype=np.float64).reshape(-1, 3)
    ci = np.array(cop_i, dtype=np.int64)
    cj = np.array(cop_j, dtype=np.int64)
    return pi, pj, pp, ci, cj, 0


def arc_crossings(S, E, P, L, prev_idx, next_idx, on_tol, cop_tol):
    """All transversal crossings between arcs i < j, skipping chain neighbours.

    Returns ``(pair_i, pair_j, points, coplanar_i, coplanar_j)``.  Points
    come back closed-tolerance on both arcs; callers snap them into the
    vertex set.  Coplanar pairs are reported for the caller to resolve.
    """
    if numba_enabled():
        pi, pj, pp, ci, cj, ov = _arc_crossings_numba(
            S, E, P, L, prev_idx, next_idx, on_tol, cop_tol
        )
    else:
        pi, pj, pp, ci, cj, ov = _arc_crossings_numpy(
            S, E, P, L, prev_idx, next_idx, on_tol, cop_tol
        )
    if ov:
        raise OverflowError("arc crossing buffer overflow")
    if len(pi) > 1:
        order = np.lexsort((pj, pi))
        pi, pj, pp = pi[order], pj[order], pp[order]
    return pi, pj, pp, ci, cj


# ---------------------------------------------------------------------------
# all-hits ray vs triangle mesh
# ---------------------------------------------------------------------------


@njit(cache=True)
def _ray_tris_hits_numba(
    tri_ids, V0, E1, E2, NN, NH, C, R2, ox, oy, oz, dx, dy, dz, t_lo, t_hi,
    tang_eps, plane_tol, ts, tris, dotdn, us, vs, n0,
):
    # appends hits for the given triangle ids into the output buffers
    n = n0
    for k in range(tri_ids.shape[0]):
        f = tri_ids[k]
        v0x, v0y, v0z = V0[f, 0], V0[f, 1], V0[f, 2]
        e1x, e1y, e1z = E1[f, 0], E1[f, 1], E1[f, 2]
        e2x, e2y, e2z = E2[f, 0], E2[f, 1], E2[f, 2]
        hx, hy, hz = _cross(dx, dy, dz, e2x, e2y, e2z)
        a = _dot(e1x, e1y, e1z, hx, hy, hz)
        nn = NN[f]
        if abs(a) <= tang_eps * nn:
            # ray parallel to the triangle plane: tangent contact if the line
            # lies in the plane and passes near the triangle
            pdist = abs(
                _dot(ox - v0x, oy - v0y, oz - v0z, NH[f, 0], NH[f, 1], NH[f, 2])
            )
            if pdist <= plane_tol:
                tcx, tcy, tcz = C[f, 0] - ox, C[f, 1] - oy, C[f, 2] - oz
                tca = _dot(tcx, tcy, tcz, dx, dy, dz)
                d2 = _dot(tcx, tcy, tcz, tcx, tcy, tcz) - tca * tca
                if d2 <= R2[f] and t_lo <= tca <= t_hi:
                    ts[n] = tca
                    tris[n] = f
                    dotdn[n] = 0.0
                    us[n] = 1.0 / 3.0
                    vs[n] = 1.0 / 3.0
                    n += 1
            continue
        inv = 1.0 / a
        sx, sy, sz = ox - v0x, oy - v0y, oz - v0z
        u = inv * _dot(sx, sy, sz, hx, hy, hz)
        if u < -1e-12 or u > 1.0 + 1e-12:
            continue
        qx, qy, qz = _cross(sx, sy, sz, e1x, e1y, e1z)
        v = inv * _dot(dx, dy, dz, qx, qy, qz)
        if v < -1e-12 or u + v > 1.0 + 1e-12:
            continue
        t = inv * _dot(e2x, e2y, e2z, qx, qy, qz)
        if t < t_lo or t > t_hi:
            continue
        ts[n] = t
        tris[n] = f
        dotdn[n] = -a / nn
        us[n] = u
        vs[n] = v
        n += 1
    return n


@njit(cache=True)
def _bvh_ray_all_hits_numba(
    node_min, node_max, node_left, node_right, node_start, node_count, tri_order,
    V0, E1, E2, NN, NH, C, R2, ox, oy, oz, dx, dy, dz, t_lo, t_hi,
    tang_eps, plane_tol,
):
    F = V0.shape[0]
    ts = np.empty(F + 8, np.float64)
    tris = np.empty(F + 8, np.int64)
    dotdn = np.empty(F + 8, np.float64)
    us = np.empty(F + 8, np.float64)
    vs = np.empty(F + 8, np.float64)
    n = 0
    stack = np.empty(128, np.int64)
    stack[0] = 0
    top = 1
    while top > 0:
        top -= 1
        node = stack[top]
        tmin = t_lo
        tmax = t_hi
        hit = True
        for k in range(3):
            o = ox if k == 0 else (oy if k == 1 else oz)
            d = dx if k == 0 else (dy if k == 1 else dz)
            lo = node_min[node, k]
            hi = node_max[node, k]
            if d == 0.0:
                if o < lo or o > hi:
                    hit = False
                    break
            else:
                inv = 1.0 / d
                t0 = (lo - o) * inv
                t1 = (hi - o) * inv
                if t0 > t1:
                    t0, t1 = t1, t0
                if t0 > tmin:
                    tmin = t0
                if t1 < tmax:
                    tmax = t1
                if tmax < tmin:
                    hit = False
                    break
        if not hit:
            continue
        if node_left[node] < 0:
            ids = tri_order[node_start[node] : node_start[node] + node_count[node]]
            n = _ray_tris_hits_numba(
                ids, V0, E1, E2, NN, NH, C, R2, ox, oy, oz, dx, dy, dz,
                t_lo, t_hi, tang_eps, plane_tol, ts, tris, dotdn, us, vs, n,
            )
        else:
            stack[top] = node_left[node]
            top += 1
            stack[top] = node_right[node]
            top += 1
    return ts[:n], tris[:n], dotdn[:n], us[:n], vs[:n]


def _ray_tris_hits_numpy(
    V0, E1, E2, NN, NH, C, R2, origin, direction, t_lo, t_hi, tang_eps, plane_tol
):
    d = direction
    h = np.cross(np.broadcast_to(d, E2.shape), E2)
    a = np.einsum("ij,ij->i", E1, h)
    s = origin - V0
    parallel = np.abs(a) <= tang_eps * NN
    ts, tris, dd, us, vs = [], [], [], [], []
    reg = ~parallel
    if np.any(reg):
        inv = np.zeros_like(a)
        inv[reg] = 1.0 / a[reg]
        u = inv * np.einsum("ij,ij->i", s, h)
        q = np.cross(s, E1)
        v = inv * (q @ d)
        t = inv * np.einsum("ij,ij->i", E2, q)
        ok = (
            reg
            & (u >= -1e-12)
            & (u <= 1.0 + 1e-12)
            & (v >= -1e-12)
            & (u + v <= 1.0 + 1e-12)
            & (t >= t_lo)
            & (t <= t_hi)
        )
        for f in np.nonzero(ok)[0]:
            ts.append(t[f])
            tris.append(f)
            dd.append(-a[f] / NN[f])
            us.append(u[f])
            vs.append(v[f])
    par_idx = np.nonzero(parallel)[0]
    if par_idx.size:
        pdist = np.abs(np.einsum("ij,ij->i", s[par_idx], NH[par_idx]))
        tc = C[par_idx] - origin
        tca = tc @ d
        d2 = np.einsum("ij,ij->i", tc, tc) - tca * tca
        ok = (pdist <= plane_tol) & (d2 <= R2[par_idx]) & (tca >= t_lo) & (tca <= t_hi)
        for k in np.nonzero(ok)[0]:
            ts.append(tca[k])
            tris.append(par_idx[k])
            dd.append(0.0)
            us.append(1.0 / 3.0)
            vs.append(1.0 / 3.0)
    return (
        np.asarray(ts, dtype=np.float64),
        np.asarray(tris, dtype=np.int64),
        np.asarray(dd, dtype=np.float64),
        np.asarray(us, dtype=np.float64),
        np.asarray(vs, dtype=np.float64),
    )


def bvh_ray_all_hits(bvh, origin, direction, t_lo, t_hi, tang_eps, plane_tol):
    """All ray hits against a prebuilt BVH; unsorted raw arrays.

    The numpy fallback brute-forces every triangle; results are identical.
    """
    if numba_enabled():
        return _bvh_ray_all_hits_numba(
            bvh.node_min, bvh.node_max, bvh.node_left, bvh.node_right,
            bvh.node_start, bvh.node_count, bvh.tri_order,
            bvh.V0, bvh.E1, bvh.E2, bvh.NN, bvh.NH, bvh.C, bvh.R2,
            origin[0], origin[1], origin[2],
            direction[0], direction[1], direction[2],
            t_lo, t_hi, tang_eps, plane_tol,
        )
    return _ray_tris_hits_numpy(
        bvh.V0, bvh.E1, bvh.E2, bvh.NN, bvh.NH, bvh.C, bvh.R2,
        origin, direction, t_lo, t_hi, tang_eps, plane_tol,
    )


# ---------------------------------------------------------------------------
# signed solid angle sums (van Oosterom / Strackee)
# ---------------------------------------------------------------------------


@njit(cache=True)
def _solid_angle_numba(V, T, px, py, pz, guard):
    total = 0.0
    on_surface = False
    for f in range(T.shape[0]):
        i0, i1, i2 = T[f, 0], T[f, 1], T[f, 2]
        ax, ay, az = V[i0, 0] - px, V[i0, 1] - py, V[i0, 2] - pz
        bx, by, bz = V[i1, 0] - px, V[i1, 1] - py, V[i1, 2] - pz
        cx, cy, cz = V[i2, 0] - px, V[i2, 1] - py, V[i2, 2] - pz
        la = math.sqrt(ax * ax + ay * ay + az * az)
        lb = math.sqrt(bx * bx + by * by + bz * bz)
        lc = math.sqrt(cx * cx + cy * cy + cz * cz)
        if la < guard or lb < guard or lc < guard:
            on_surface = True
            continue
        crx, cry, crz = _cross(bx, by, bz, cx, cy, cz)
        num = _dot(ax, ay, az, crx, cry, crz)
        den = (
            la * lb * lc
            + _dot(ax, ay, az, bx, by, bz) * lc
            + _dot(bx, by, bz, cx, cy, cz) * la
            + _dot(cx, cy, cz, ax, ay, az) * lb
        )
        if abs(num) < guard * la * lb * lc and den <= 0.0:
            # coplanar with the triangle and inside its rim: on the surface
            on_surface = True
            continue
        total += 2.0 * math.atan2(num, den)
    return total, on_surface


def _solid_angle_numpy(V, T, p, guard):
    a = V[T[:, 0]] - p
    b = V[T[:, 1]] - p
    c = V[T[:, 2]] - p
    la = np.linalg.norm(a, axis=1)
    lb = np.linalg.norm(b, axis=1)
    lc = np.linalg.norm(c, axis=1)
    num = np.einsum("ij,ij->i", a, np.cross(b, c))
    den = (
        la * lb * lc
        + np.einsum("ij,ij->i", a, b) * lc
        + np.einsum("ij,ij->i", b, c) * la
        + np.einsum("ij,ij->i", c, a) * lb
    )
    near = (la < guard) | (lb < guard) | (lc < guard)
    near |= (np.abs(num) < guard * la * lb * lc) & (den <= 0.0)
    on_surface = bool(np.any(near))
    omega = 2.0 * np.arctan2(num, den)
    return float(np.sum(omega[~near])), on_surface


def solid_angle_sum(V, T, p, guard=1e-12):
    """Total signed solid angle of the triangles as seen from ``p``.

    The boolean in the result reports that ``p`` is on (or numerically
    indistinguishable from) the surface.
    """
    if numba_enabled():
        return _solid_angle_numba(V, T, p[0], p[1], p[2], guard)
    return _solid_angle_numpy(V, T, p, guard)


@njit(cache=True, parallel=True)
def _solid_angle_many_numba(V, T, P, guard):
    K = P.shape[0]
    out = np.empty(K, np.float64)
    flags = np.zeros(K, np.bool_)
    for k in prange(K):
        tot, flag = _solid_angle_numba(V, T, P[k, 0], P[k, 1], P[k, 2], guard)
        out[k] = tot
        flags[k] = flag
    return out, flags


def solid_angle_many(V, T, P, guard=1e-12):
    """Signed solid-angle totals for many query points at once."""
    P = np.ascontiguousarray(P, dtype=np.float64)
    if numba_enabled():
        return _solid_angle_many_numba(V, T, P, guard)
    out = np.empty(len(P), np.float64)
    flags = np.zeros(len(P), np.bool_)
    for k in range(len(P)):
        out[k], flags[k] = _solid_angle_numpy(V, T, P[k], guard)
    return out, flags


# ---------------------------------------------------------------------------
# single-loop batch evaluation along a reused ray
# ---------------------------------------------------------------------------


@njit(cache=True)
def _first_crossing_from(mx, my, mz, px, py, pz, skip, U, PL, L, on_tol):
    """Smallest angle > 0 at which the path m*cos(a) + p*sin(a) meets an arc.

    ``p`` must be orthonormal to ``m``.  ``skip`` excludes the arc ``m``
    sits on.  Returns 2*pi when nothing is hit, 0.0 when an arc passes
    through the start point itself.
    """
    rx, ry, rz = _cross(mx, my, mz, px, py, pz)
    best = TWO_PI
    B = U.shape[0]
    for j in range(B):
        if j == skip:
            continue
        jn = j + 1 if j + 1 < B else 0
        qx, qy, qz = _cross(rx, ry, rz, PL[j, 0], PL[j, 1], PL[j, 2])
        nq = math.sqrt(qx * qx + qy * qy + qz * qz)
        if nq < 1e-12:
            # path runs along this arc's circle: blocked immediately if the
            # arc contains the start point's vicinity
            phi0 = _angle_on(
                U[j, 0], U[j, 1], U[j, 2], PL[j, 0], PL[j, 1], PL[j, 2], mx, my, mz
            )
            if -on_tol <= phi0 <= L[j] + on_tol:
                return 0.0
            continue
        qx /= nq
        qy /= nq
        qz /= nq
        for s in range(2):
            cx = qx if s == 0 else -qx
            cy = qy if s == 0 else -qy
            cz = qz if s == 0 else -qz
            phi = _angle_on(
                U[j, 0], U[j, 1], U[j, 2], PL[j, 0], PL[j, 1], PL[j, 2], cx, cy, cz
            )
            if phi < -on_tol or phi > L[j] + on_tol:
                continue
            ang = math.atan2(
                _dot(cx, cy, cz, px, py, pz), _dot(cx, cy, cz, mx, my, mz)
            )
            if ang < 0.0:
                ang += TWO_PI
            if ang < 1e-9 or ang > TWO_PI - 1e-9:
                return 0.0
            if ang < best:
                best = ang
    return best


@njit(cache=True)
def _project_loop(loop_pts, px, py, pz, U):
    B = loop_pts.shape[0]
    for i in range(B):
        vx = loop_pts[i, 0] - px
        vy = loop_pts[i, 1] - py
        vz = loop_pts[i, 2] - pz
        nv = math.sqrt(vx * vx + vy * vy + vz * vz)
        if nv < 1e-12:
            return False
        U[i, 0] = vx / nv
        U[i, 1] = vy / nv
        U[i, 2] = vz / nv
    return True


@njit(cache=True)
def _loop_arcs(U, PL, L, MID):
    """Arc poles/lengths/midpoints; returns max midpoint-to-endpoint radius.

    Negative return flags a degenerate or over-long arc.
    """
    B = U.shape[0]
    max_r = 0.0
    for i in range(B):
        jn = i + 1 if i + 1 < B else 0
        cx, cy, cz = _cross(U[i, 0], U[i, 1], U[i, 2], U[jn, 0], U[jn, 1], U[jn, 2])
        nc = math.sqrt(cx * cx + cy * cy + cz * cz)
        dotij = _dot(U[i, 0], U[i, 1], U[i, 2], U[jn, 0], U[jn, 1], U[jn, 2])
        ang = math.atan2(nc, dotij)
        if nc < 1e-13 or ang > 2.5:
            return -1.0
        PL[i, 0] = cx / nc
        PL[i, 1] = cy / nc
        PL[i, 2] = cz / nc
        L[i] = ang
        mx = U[i, 0] + U[jn, 0]
        my = U[i, 1] + U[jn, 1]
        mz = U[i, 2] + U[jn, 2]
        nm = math.sqrt(mx * mx + my * my + mz * mz)
        MID[i, 0] = mx / nm
        MID[i, 1] = my / nm
        MID[i, 2] = mz / nm
        r = math.sqrt(
            (U[i, 0] - MID[i, 0]) ** 2
            + (U[i, 1] - MID[i, 1]) ** 2
            + (U[i, 2] - MID[i, 2]) ** 2
        )
        if r > max_r:
            max_r = r
    return max_r


@njit(cache=True)
def _pair_crosses(U, PL, L, i, j, on_tol):
    """1 = arcs i and j cross, 0 = they do not, -1 = coplanar (unreliable)."""
    B = U.shape[0]
    side = 1e-12
    jn = j + 1 if j + 1 < B else 0
    dsj = _dot(U[j, 0], U[j, 1], U[j, 2], PL[i, 0], PL[i, 1], PL[i, 2])
    dej = _dot(U[jn, 0], U[jn, 1], U[jn, 2], PL[i, 0], PL[i, 1], PL[i, 2])
    if (dsj > side and dej > side) or (dsj < -side and dej < -side):
        return 0
    inn = i + 1 if i + 1 < B else 0
    dsi = _dot(U[i, 0], U[i, 1], U[i, 2], PL[j, 0], PL[j, 1], PL[j, 2])
    dei = _dot(U[inn, 0], U[inn, 1], U[inn, 2], PL[j, 0], PL[j, 1], PL[j, 2])
    if (dsi > side and dei > side) or (dsi < -side and dei < -side):
        return 0
    dx, dy, dz = _cross(PL[i, 0], PL[i, 1], PL[i, 2], PL[j, 0], PL[j, 1], PL[j, 2])
    nd = math.sqrt(dx * dx + dy * dy + dz * dz)
    if nd < 1e-10:
        return -1
    dx /= nd
    dy /= nd
    dz /= nd
    for s in range(2):
        cx = dx if s == 0 else -dx
        cy = dy if s == 0 else -dy
        cz = dz if s == 0 else -dz
        phi_i = _angle_on(
            U[i, 0], U[i, 1], U[i, 2], PL[i, 0], PL[i, 1], PL[i, 2], cx, cy, cz
        )
        if phi_i < -on_tol or phi_i > L[i] + on_tol:
            continue
        phi_j = _angle_on(
            U[j, 0], U[j, 1], U[j, 2], PL[j, 0], PL[j, 1], PL[j, 2], cx, cy, cz
        )
        if phi_j < -on_tol or phi_j > L[j] + on_tol:
            continue
        return 1
    return 0


@njit(cache=True)
def _loop_has_crossing(U, PL, L, MID, max_r, cell_ids, on_tol):
    """Any self-crossing of the projected loop?  Grid broad phase + exact."""
    B = U.shape[0]
    cell = 2.0 * max_r + 1e-7
    if cell < 1e-6:
        cell = 1e-6
    ncell = int(2.0 / cell) + 1
    if ncell > 256:
        ncell = 256
        cell = 2.0 / 255.0
    for i in range(B):
        ci = int((MID[i, 0] + 1.0) / cell)
        cj = int((MID[i, 1] + 1.0) / cell)
        ck = int((MID[i, 2] + 1.0) / cell)
        cell_ids[i] = (ci * ncell + cj) * ncell + ck
    order = np.argsort(cell_ids)
    sorted_ids = cell_ids[order]
    for i in range(B):
        ci = int((MID[i, 0] + 1.0) / cell)
        cj = int((MID[i, 1] + 1.0) / cell)
        ck = int((MID[i, 2] + 1.0) / cell)
        for oi in range(-1, 2):
            for oj in range(-1, 2):
                for ok in range(-1, 2):
                    tid = ((ci + oi) * ncell + (cj + oj)) * ncell + (ck + ok)
                    lo = np.searchsorted(sorted_ids, tid)
                    hi = np.searchsorted(sorted_ids, tid + 1)
                    for q in range(lo, hi):
                        j = order[q]
                        if j <= i:
                            continue
                        if j == i + 1 or (i == 0 and j == B - 1):
                            continue
                        if _pair_crosses(U, PL, L, i, j, on_tol) != 0:
                            return True
    return False


@njit(cache=True)
def _side_of_loop(dx, dy, dz, U, PL, L, MID, on_tol):
    """1 if the direction lies in the region left of the loop, 0 if right,
    -1 when the test is numerically unreliable."""
    B = U.shape[0]
    delta = _first_crossing_from(
        MID[0, 0], MID[0, 1], MID[0, 2], PL[0, 0], PL[0, 1], PL[0, 2],
        0, U, PL, L, on_tol,
    )
    disp = 0.1
    if 0.25 * L[0] < disp:
        disp = 0.25 * L[0]
    if 0.45 * delta < disp:
        disp = 0.45 * delta
    if disp < 1e-8:
        return -1
    refx = MID[0, 0] * math.cos(disp) + PL[0, 0] * math.sin(disp)
    refy = MID[0, 1] * math.cos(disp) + PL[0, 1] * math.sin(disp)
    refz = MID[0, 2] * math.cos(disp) + PL[0, 2] * math.sin(disp)

    gx, gy, gz = _cross(dx, dy, dz, refx, refy, refz)
    ng = math.sqrt(gx * gx + gy * gy + gz * gz)
    if ng < 1e-9:
        return -1
    gx /= ng
    gy /= ng
    gz /= ng
    glen = math.atan2(ng, _dot(dx, dy, dz, refx, refy, refz))
    vtol = 10.0 * on_tol
    ncross = 0
    for j in range(B):
        qx, qy, qz = _cross(gx, gy, gz, PL[j, 0], PL[j, 1], PL[j, 2])
        nq = math.sqrt(qx * qx + qy * qy + qz * qz)
        if nq < 1e-10:
            return -1  # geodesic coplanar with an arc
        qx /= nq
        qy /= nq
        qz /= nq
        for s in range(2):
            cx = qx if s == 0 else -qx
            cy = qy if s == 0 else -qy
            cz = qz if s == 0 else -qz
            phi_g = _angle_on(dx, dy, dz, gx, gy, gz, cx, cy, cz)
            if phi_g < -on_tol or phi_g > glen + on_tol:
                continue
            phi_a = _angle_on(
                U[j, 0], U[j, 1], U[j, 2], PL[j, 0], PL[j, 1], PL[j, 2], cx, cy, cz
            )
            if phi_a < -vtol or phi_a > L[j] + vtol:
                continue
            if phi_a < vtol or phi_a > L[j] - vtol:
                return -1  # crossing at a loop vertex: ambiguous
            if phi_g < vtol or phi_g > glen - vtol:
                return -1  # crossing at either geodesic endpoint
            ncross += 1
    return 1 if ncross % 2 == 0 else 0


@njit(cache=True)
def _single_loop_batch_numba(
    loop_pts, ox, oy, oz, dx, dy, dz, hit_ts, hit_signs, query_ts,
    on_tol, t_eps, w_out, ok_out,
):
    B = loop_pts.shape[0]
    K = query_ts.shape[0]
    U = np.empty((B, 3), np.float64)
    PL = np.empty((B, 3), np.float64)
    L = np.empty(B, np.float64)
    MID = np.empty((B, 3), np.float64)
    cell_ids = np.empty(B, np.int64)

    for k in range(K):
        ok_out[k] = 0
        w_out[k] = 0.0
        t = query_ts[k]
        px = ox + t * dx
        py = oy + t * dy
        pz = oz + t * dz

        if not _project_loop(loop_pts, px, py, pz, U):
            continue
        max_r = _loop_arcs(U, PL, L, MID)
        if max_r < 0.0:
            continue
        if _loop_has_crossing(U, PL, L, MID, max_r, cell_ids, on_tol):
            continue

        # area of the region left of the loop (Gauss-Bonnet, geodesic sides)
        turn = 0.0
        bad = False
        for i in range(B):
            jn = i + 1 if i + 1 < B else 0
            tix, tiy, tiz = _cross(
                PL[i, 0], PL[i, 1], PL[i, 2], U[jn, 0], U[jn, 1], U[jn, 2]
            )
            tox, toy, toz = _cross(
                PL[jn, 0], PL[jn, 1], PL[jn, 2], U[jn, 0], U[jn, 1], U[jn, 2]
            )
            cxx, cyy, czz = _cross(tix, tiy, tiz, tox, toy, toz)
            ang = math.atan2(
                _dot(cxx, cyy, czz, U[jn, 0], U[jn, 1], U[jn, 2]),
                _dot(tix, tiy, tiz, tox, toy, toz),
            )
            if abs(ang) > math.pi - 1e-6:
                bad = True
                break
            turn += ang
        if bad:
            continue
        area_left = TWO_PI - turn
        if area_left <= 0.0 or area_left >= FOUR_PI:
            continue

        # chi of the face containing the ray direction, from cached hits
        chi_q = 0
        clash = False
        for h in range(hit_ts.shape[0]):
            if abs(hit_ts[h] - t) <= t_eps:
                clash = True
                break
            if hit_ts[h] > t:
                chi_q += hit_signs[h]
        if clash:
            continue

        side = _side_of_loop(dx, dy, dz, U, PL, L, MID, on_tol)
        if side < 0:
            continue
        if side == 1:
            w = (chi_q * area_left + (chi_q - 1) * (FOUR_PI - area_left)) / FOUR_PI
        else:
            w = ((chi_q + 1) * area_left + chi_q * (FOUR_PI - area_left)) / FOUR_PI
        w_out[k] = w
        ok_out[k] = 1


def single_loop_batch(loop_pts, origin, direction, hit_ts, hit_signs, query_ts,
                      on_tol, t_eps):
    """Fast path: winding numbers for points along one ray, one-loop scenes.

    Returns ``(w, ok)``; entries with ``ok == 0`` must be recomputed through
    the generic per-point path.  Only available with numba; returns ``None``
    otherwise so callers take the generic path wholesale.
    """
    if not numba_enabled():
        return None
    K = len(query_ts)
    w = np.zeros(K, np.float64)
    ok = np.zeros(K, np.int8)
    _single_loop_batch_numba(
        np.ascontiguousarray(loop_pts, dtype=np.float64),
        origin[0], origin[1], origin[2],
        direction[0], direction[1], direction[2],
        np.ascontiguousarray(hit_ts, dtype=np.float64),
        np.ascontiguousarray(hit_signs, dtype=np.int64),
        np.ascontiguousarray(query_ts, dtype=np.float64),
        on_tol, t_eps, w, ok,
    )
    return w, ok
