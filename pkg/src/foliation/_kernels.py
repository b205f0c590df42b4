"""Hot numeric kernels: routed map energy and Gauss-Seidel relaxation.

Kernels are compiled with numba when available; setting the environment
variable ``FOLIATION_NUMBA=0`` (or uninstalling numba) selects the pure
numpy/Python fallback, which runs the identical code uncompiled and
produces bit-identical results.  ``bench/bench_relax.py`` compares the two.

State encoding
--------------
Every vertex image is anchored to a graph edge: ``(pe[v], pt[v])`` with
``0 <= pt <= w``; endpoint parameters represent nodes.  Each undirected
mesh edge ``m = (i, j)`` additionally carries the homotopy route of its
image path: ``route_x[m] == -1`` means the path runs inside the common
edge (direct), otherwise the path exits edge ``pe[i]`` through end
``route_x[m]`` (0 = first endpoint) into a node and enters ``pe[j]``
through end ``route_y[m]``.  Tracking routes keeps the relaxation inside
the initial homotopy class: without them, winding around a self-loop
(e.g. the torus pipeline) would unravel to the zero-energy constant map.

Each Gauss-Seidel move minimizes the routed local energy in closed form:
along a candidate edge every neighbor term is the square of a linear
function of the parameter, so each candidate contributes one quadratic.
Candidates are the current edge (slide) plus all edges reachable through
either endpoint node; moves whose composed routes would cross two nodes
are skipped.
"""

import os

import numpy as np


def _want_jit():
    flag = os.environ.get("FOLIATION_NUMBA", "1").strip().lower()
    return flag not in ("0", "false", "off", "no")


USING_NUMBA = False
if _want_jit():
    try:
        from numba import njit

        USING_NUMBA = True
    except ImportError:  # pragma: no cover
        pass

if not USING_NUMBA:

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def deco(fn):
            return fn

        return deco


STATUS_CONVERGED = 0
STATUS_MAX_SWEEPS = 1
STATUS_NONFINITE = 2


@njit(cache=True)
def _delta(t, w, end):
    return t if end == 0 else w - t


@njit(cache=True)
def route_length(ei, ti, ej, tj, x, y, edge_w):
    if x < 0:
        return abs(ti - tj)
    return _delta(ti, edge_w[ei], x) + _delta(tj, edge_w[ej], y)


@njit(cache=True)
def routed_energy(pe, pt, me_i, me_j, me_w, route_x, route_y, edge_w):
    E = 0.0
    for m in range(len(me_i)):
        L = route_length(
            pe[me_i[m]], pt[me_i[m]], pe[me_j[m]], pt[me_j[m]], route_x[m], route_y[m], edge_w
        )
        E += me_w[m] * L * L
    return E


@njit(cache=True)
def point_distance(e1, t1, e2, t2, edge_u, edge_v, edge_w, D):
    """Shortest distance between two anchored points."""
    best = np.inf
    if e1 == e2:
        best = abs(t1 - t2)
    w1 = edge_w[e1]
    w2 = edge_w[e2]
    for x in range(2):
        d1 = _delta(t1, w1, x)
        n1 = edge_u[e1] if x == 0 else edge_v[e1]
        for y in range(2):
            d2 = _delta(t2, w2, y)
            n2 = edge_u[e2] if y == 0 else edge_v[e2]
            c = d1 + D[n1, n2] + d2
            if c < best:
                best = c
    return best


@njit(cache=True)
def shortest_energy(pe, pt, me_i, me_j, me_w, edge_u, edge_v, edge_w, D):
    E = 0.0
    for m in range(len(me_i)):
        d = point_distance(
            pe[me_i[m]], pt[me_i[m]], pe[me_j[m]], pt[me_j[m]], edge_u, edge_v, edge_w, D
        )
        E += me_w[m] * d * d
    return E


@njit(cache=True)
def map_vertex_distances(peA, ptA, peB, ptB, edge_u, edge_v, edge_w, D):
    out = np.empty(len(peA))
    for v in range(len(peA)):
        out[v] = point_distance(peA[v], ptA[v], peB[v], ptB[v], edge_u, edge_v, edge_w, D)
    return out


@njit(cache=True)
def relax_sweeps(
    pe,
    pt,
    route_x,
    route_y,
    me_i,
    me_j,
    me_w,
    ve_ptr,
    ve_idx,
    edge_u,
    edge_v,
    edge_w,
    ne_ptr,
    ne_idx,
    tol,
    max_sweeps,
    trace,
    disp,
):
    """In-place Gauss-Seidel relaxation.

    Returns ``(sweeps, status, skipped, bad_vertex)``; ``bad_vertex`` is the
    vertex whose move produced a non-finite energy (-1 otherwise).

    ``trace[s]`` is the routed energy after sweep ``s`` (index 0 holds the
    initial energy), accumulated from per-move deltas that are accepted only
    when strictly negative, so the trace is exactly non-increasing.
    """
    nV = len(pe)
    E = routed_energy(pe, pt, me_i, me_j, me_w, route_x, route_y, edge_w)
    trace[0] = E
    disp[0] = 0.0
    status = STATUS_MAX_SWEEPS
    sweeps = 0
    skipped = 0
    for sweep in range(1, max_sweeps + 1):
        E_prev = E
        maxd = 0.0
        for v in range(nV):
            lo = ve_ptr[v]
            hi = ve_ptr[v + 1]
            if lo == hi:
                continue
            totw = 0.0
            for k in range(lo, hi):
                totw += me_w[ve_idx[k]]
            if totw <= 0.0:
                skipped += 1
                continue
            e0 = pe[v]
            t0 = pt[v]
            w0 = edge_w[e0]

            F_cur = 0.0
            for k in range(lo, hi):
                m = ve_idx[k]
                if me_i[m] == v:
                    j = me_j[m]
                    x = route_x[m]
                    y = route_y[m]
                else:
                    j = me_i[m]
                    x = route_y[m]
                    y = route_x[m]
                L = route_length(e0, t0, pe[j], pt[j], x, y, edge_w)
                F_cur += me_w[m] * L * L

            best_F = F_cur
            best_mode = -1
            best_e = e0
            best_t = t0
            best_y = 0
            best_z = 0

            # slide within the current edge
            qb = 0.0
            qc = 0.0
            for k in range(lo, hi):
                m = ve_idx[k]
                w = me_w[m]
                if me_i[m] == v:
                    j = me_j[m]
                    x = route_x[m]
                    y = route_y[m]
                else:
                    j = me_i[m]
                    x = route_y[m]
                    y = route_x[m]
                tj = pt[j]
                if x < 0:
                    qb -= 2.0 * w * tj
                    qc += w * tj * tj
                else:
                    dj = _delta(tj, edge_w[pe[j]], y)
                    if x == 0:
                        qb += 2.0 * w * dj
                        qc += w * dj * dj
                    else:
                        cc = w0 + dj
                        qb -= 2.0 * w * cc
                        qc += w * cc * cc
            ts = -qb / (2.0 * totw)
            if ts < 0.0:
                ts = 0.0
            if ts > w0:
                ts = w0
            F = (totw * ts + qb) * ts + qc
            if F < best_F:
                best_F = F
                best_mode = 0
                best_e = e0
                best_t = ts

            # hop through an endpoint node onto an incident edge
            for z in range(2):
                node_m = edge_u[e0] if z == 0 else edge_v[e0]
                for kk in range(ne_ptr[node_m], ne_ptr[node_m + 1]):
                    ep = ne_idx[kk]
                    wp = edge_w[ep]
                    for yp in range(2):
                        endn = edge_u[ep] if yp == 0 else edge_v[ep]
                        if endn != node_m:
                            continue
                        if ep == e0 and yp == z:
                            continue  # same class as the slide candidate
                        feasible = True
                        qb = 0.0
                        qc = 0.0
                        for k in range(lo, hi):
                            m = ve_idx[k]
                            w = me_w[m]
                            if me_i[m] == v:
                                j = me_j[m]
                                x = route_x[m]
                                y = route_y[m]
                            else:
                                j = me_i[m]
                                x = route_y[m]
                                y = route_x[m]
                            tj = pt[j]
                            ej = pe[j]
                            if x < 0:
                                dj = _delta(tj, w0, z)
                            else:
                                if x != z:
                                    feasible = False  # composed route crosses 2 nodes
                                    break
                                if ej == ep and y == yp:
                                    qb -= 2.0 * w * tj  # spur cancels: direct again
                                    qc += w * tj * tj
                                    continue
                                dj = _delta(tj, edge_w[ej], y)
                            if yp == 0:
                                qb += 2.0 * w * dj
                                qc += w * dj * dj
                            else:
                                cc = wp + dj
                                qb -= 2.0 * w * cc
                                qc += w * cc * cc
                        if not feasible:
                            continue
                        ts = -qb / (2.0 * totw)
                        if ts < 0.0:
                            ts = 0.0
                        if ts > wp:
                            ts = wp
                        F = (totw * ts + qb) * ts + qc
                        if F < best_F:
                            best_F = F
                            best_mode = 1
                            best_e = ep
                            best_t = ts
                            best_y = yp
                            best_z = z

            if best_mode < 0:
                continue
            dF = best_F - F_cur
            if not np.isfinite(dF):
                trace[sweep] = E
                disp[sweep] = maxd
                return sweep, STATUS_NONFINITE, skipped, v
            if dF >= 0.0:
                continue

            if best_mode == 0:
                d = abs(best_t - t0)
                pt[v] = best_t
            else:
                for k in range(lo, hi):
                    m = ve_idx[k]
                    if me_i[m] == v:
                        j = me_j[m]
                        x = route_x[m]
                        y = route_y[m]
                        v_is_i = True
                    else:
                        j = me_i[m]
                        x = route_y[m]
                        y = route_x[m]
                        v_is_i = False
                    if x < 0:
                        nx = best_y
                        ny = best_z
                    elif pe[j] == best_e and y == best_y:
                        nx = -1
                        ny = -1
                    else:
                        nx = best_y
                        ny = y
                    if v_is_i:
                        route_x[m] = nx
                        route_y[m] = ny
                    else:
                        route_x[m] = ny
                        route_y[m] = nx
                d = _delta(t0, w0, best_z) + _delta(best_t, edge_w[best_e], best_y)
                pe[v] = best_e
                pt[v] = best_t
            if d > maxd:
                maxd = d
            E += dF

        trace[sweep] = E
        disp[sweep] = maxd
        sweeps = sweep
        if not np.isfinite(E):
            return sweep, STATUS_NONFINITE, skipped, -1
        if E_prev <= 0.0:
            status = STATUS_CONVERGED
            break
        if (E_prev - E) / E_prev < tol:
            status = STATUS_CONVERGED
            break
    return sweeps, status, skipped, -1
