"""Slice a converged map into cylinders; measure and flatten them.

The preimage of every graph node is a level set of the map.  Mesh edges
whose image route passes through a node are split at the linearly
interpolated crossing; triangles with corners in three different edge
directions around a node get a center point and a three-way split.  Each
resulting piece belongs to exactly one graph edge, and the pieces of edge
``k`` assemble into a topological annulus with the pullback ``u`` running
from 0 to the prescribed height.

All sub-edge lengths are computed from a 2D layout of the parent triangle
(exact for the given metric, intrinsic or embedded), so cylinder areas
partition the surface area to rounding error.
"""

from dataclasses import dataclass, field
import warnings

import numpy as np

from .errors import (
    DegenerateCylinder,
    NonPositiveCircumference,
    PeriodMismatchWarning,
)
from .mesh import TriMesh, cotangent_weights

__all__ = ["Cylinder", "FlatCoords", "slice_cylinders", "circumference", "flatten_cylinder"]


@dataclass
class Cylinder:
    """A topological annulus cut out around one admissible curve."""

    mesh: TriMesh
    edge: int
    h: float
    u: np.ndarray
    parent_vertex: np.ndarray  # original vertex id, -1 for cut points
    area: float
    l: float = None

    @property
    def module(self):
        return self.h / self.l


@dataclass
class FlatCoords:
    """Flat cylinder coordinates: u in [0, h], v real modulo l."""

    u: np.ndarray
    v: np.ndarray
    v_raw: np.ndarray
    l: float
    period_raw: float
    scale: float


def _delta(t, w, end):
    return t if end == 0 else w - t


class _Builder:
    def __init__(self, h):
        self.h = h
        self.key_id = {}
        self.pos = []
        self.u = []
        self.parent = []
        self.tris = []
        self.lengths = {}

    def vertex(self, key, pos, u, parent=-1):
        vid = self.key_id.get(key)
        if vid is None:
            vid = len(self.pos)
            self.key_id[key] = vid
            self.pos.append(pos)
            self.u.append(u)
            self.parent.append(parent)
        return vid

    def triangle(self, pts, layout):
        ids = [self.vertex(*p) for p in pts]
        self.tris.append(ids)
        for s in range(3):
            a, b = ids[s], ids[(s + 1) % 3]
            key = (a, b) if a < b else (b, a)
            d = layout[(s + 1) % 3] - layout[s]
            self.lengths[key] = float(np.hypot(d[0], d[1]))

    def build(self, edge):
        if not self.tris:
            raise DegenerateCylinder("cylinder %d received no triangles" % edge)
        mesh = TriMesh(np.asarray(self.pos), np.asarray(self.tris, dtype=np.int64))
        lengths = np.empty(mesh.n_edges)
        for e, (a, b) in enumerate(mesh.edges):
            lengths[e] = self.lengths[(int(a), int(b))]
        mesh = TriMesh(np.asarray(self.pos), np.asarray(self.tris, dtype=np.int64), edge_lengths=lengths)
        return Cylinder(
            mesh=mesh,
            edge=edge,
            h=self.h,
            u=np.asarray(self.u),
            parent_vertex=np.asarray(self.parent, dtype=np.int64),
            area=mesh.surface_area(),
        )


def _layout_triangle(sides):
    """2D coordinates of a triangle from its side lengths (positive orientation)."""
    c, a, b = sides[0], sides[1], sides[2]  # side s runs corner s -> s+1
    x2 = (b * b + c * c - a * a) / (2.0 * c)
    y2 = np.sqrt(max(b * b - x2 * x2, 0.0))
    return np.array([[0.0, 0.0], [c, 0.0], [x2, y2]])


def slice_cylinders(mesh, gmap, G):
    """Cut the mapped surface into one cylinder per graph edge.

    Raises DegenerateCylinder if a graph edge receives no triangles, if a
    triangle's image spans a whole graph edge (non-convergence), or if a
    cylinder fails its annulus checks (chi 0, two boundary loops carrying
    u = 0 and u = h).
    """
    pe, pt = gmap.pe, gmap.pt
    edge_w = G.edge_w
    T = mesh.triangles
    me_i = mesh.edges[:, 0]
    me_j = mesh.edges[:, 1]

    # per mesh edge: interior crossing data
    M = mesh.n_edges
    crossing = np.zeros(M, dtype=bool)
    lam = np.zeros(M)
    for m in range(M):
        x, y = gmap.route_x[m], gmap.route_y[m]
        if x < 0:
            continue
        i, j = me_i[m], me_j[m]
        di = _delta(pt[i], edge_w[pe[i]], x)
        dj = _delta(pt[j], edge_w[pe[j]], y)
        if di > 0.0 and dj > 0.0:
            crossing[m] = True
            lam[m] = di / (di + dj)

    def at_node(v):
        return pt[v] == 0.0 or pt[v] == edge_w[pe[v]]

    def node_of(v):
        return int(G.edge_u[pe[v]] if pt[v] == 0.0 else G.edge_v[pe[v]])

    def corner_side_from_route(vn, vi, m):
        # end of edge pe[vi] through which node-corner vn attaches, given
        # mesh edge m joining them: the exit end of the interior side
        x, y = gmap.route_x[m], gmap.route_y[m]
        if x < 0:  # same edge: the node corner sits at one end of it
            return 0 if pt[vn] == 0.0 else 1
        return int(x) if me_i[m] == vi else int(y)

    builders = {e: _Builder(float(edge_w[e])) for e in range(G.n_edges)}
    he_edge = mesh.he_edge.reshape(-1, 3)
    all_sides = mesh.triangle_side_lengths()

    for f in range(len(T)):
        cs = [int(T[f, s]) for s in range(3)]
        ms = [int(he_edge[f, s]) for s in range(3)]  # edge of corner s -> s+1
        xm = [bool(crossing[m]) for m in ms]
        nx = sum(xm)
        layout = _layout_triangle(all_sides[f])

        def frac(s):
            # crossing fraction along corner s -> s+1
            m = ms[s]
            return float(lam[m]) if me_i[m] == cs[s] else 1.0 - float(lam[m])

        def side_of(s, m):
            # (edge, end) the image of corner s retreats into across edge m
            v = cs[s]
            x, y = gmap.route_x[m], gmap.route_y[m]
            end = int(x) if me_i[m] == v else int(y)
            return int(pe[v]), end

        def end_u(e, end):
            return 0.0 if end == 0 else float(edge_w[e])

        def interior_pt(s):
            return (("v", cs[s]), mesh.vertices[cs[s]], float(pt[cs[s]]), cs[s])

        def node_pt(s, e, end):
            return (("vn", cs[s], e, end), mesh.vertices[cs[s]], end_u(e, end), cs[s])

        def cross_pt(s, e, end):
            m = ms[s]
            lm = frac(s)
            pos = (1.0 - lm) * mesh.vertices[cs[s]] + lm * mesh.vertices[cs[(s + 1) % 3]]
            return (("x", m, e, end), pos, end_u(e, end), -1)

        def lay_corner(s):
            return layout[s]

        def lay_cross(s):
            lm = frac(s)
            return (1.0 - lm) * layout[s] + lm * layout[(s + 1) % 3]

        if nx == 0:
            interior = [s for s in range(3) if not at_node(cs[s])]
            if not interior:
                nodes = {node_of(cs[s]) for s in range(3)}
                spans = [
                    abs(pt[cs[s]] - pt[cs[(s + 1) % 3]])
                    for s in range(3)
                    if gmap.route_x[ms[s]] < 0
                ]
                if len(nodes) > 1 or any(sp > 0 for sp in spans):
                    raise DegenerateCylinder(
                        "triangle %d spans whole graph edges (map not converged)" % f
                    )
                raise DegenerateCylinder(
                    "triangle %d maps entirely to a graph node" % f
                )
            e = int(pe[cs[interior[0]]])
            if any(int(pe[cs[s]]) != e for s in interior):
                raise DegenerateCylinder("triangle %d straddles edges without a crossing" % f)
            pts = []
            for s in range(3):
                if at_node(cs[s]):
                    m = ms[s] if not at_node(cs[(s + 1) % 3]) else ms[(s + 2) % 3]
                    other = cs[(s + 1) % 3] if not at_node(cs[(s + 1) % 3]) else cs[(s + 2) % 3]
                    end = corner_side_from_route(cs[s], other, m)
                    pts.append(node_pt(s, e, end))
                else:
                    pts.append(interior_pt(s))
            builders[e].triangle(pts, [lay_corner(0), lay_corner(1), lay_corner(2)])

        elif nx == 1:
            s = xm.index(True)
            k = (s + 2) % 3
            if not at_node(cs[k]):
                raise DegenerateCylinder(
                    "triangle %d has one crossing but no node corner" % f
                )
            eA, endA = side_of(s, ms[s])
            n_cross = int(G.edge_u[eA] if endA == 0 else G.edge_v[eA])
            if node_of(cs[k]) != n_cross:
                raise DegenerateCylinder(
                    "triangle %d node corner sits away from the crossing node" % f
                )
            eB, endB = side_of((s + 1) % 3, ms[s])
            X_A = cross_pt(s, eA, endA)
            X_B = cross_pt(s, eB, endB)
            builders[eA].triangle(
                [interior_pt(s), X_A, node_pt(k, eA, endA)],
                [lay_corner(s), lay_cross(s), lay_corner(k)],
            )
            builders[eB].triangle(
                [X_B, interior_pt((s + 1) % 3), node_pt(k, eB, endB)],
                [lay_cross(s), lay_corner((s + 1) % 3), lay_corner(k)],
            )

        elif nx == 2:
            # apex corner belongs to both crossing edges
            free = xm.index(False)  # edge (free, free+1) has no crossing
            a = (free + 2) % 3
            s1 = a  # crossing a -> a+1
            s2 = (a + 2) % 3  # crossing a+2 -> a
            eA, endA = side_of(a, ms[s1])
            eA2, endA2 = side_of(a, ms[s2])
            if (eA, endA) != (eA2, endA2):
                raise DegenerateCylinder("triangle %d apex retreats to two ends" % f)
            b1, b2 = (a + 1) % 3, (a + 2) % 3
            eB, endB = side_of(b1, ms[s1])
            eB2, endB2 = side_of(b2, ms[s2])
            if eB != eB2 or endB != endB2:
                raise DegenerateCylinder("triangle %d far side is inconsistent" % f)
            XA1, XA2 = cross_pt(s1, eA, endA), cross_pt(s2, eA, endA)
            XB1, XB2 = cross_pt(s1, eB, endB), cross_pt(s2, eB, endB)
            builders[eA].triangle(
                [interior_pt(a), XA1, XA2],
                [lay_corner(a), lay_cross(s1), lay_cross(s2)],
            )
            builders[eB].triangle(
                [XB1, interior_pt(b1), interior_pt(b2)],
                [lay_cross(s1), lay_corner(b1), lay_corner(b2)],
            )
            builders[eB].triangle(
                [XB1, interior_pt(b2), XB2],
                [lay_cross(s1), lay_corner(b2), lay_cross(s2)],
            )

        else:  # nx == 3: three-way corner of the critical graph
            d = [
                _delta(
                    pt[cs[s]],
                    edge_w[pe[cs[s]]],
                    side_of(s, ms[s])[1],
                )
                for s in range(3)
            ]
            mu = np.array([d[1] * d[2], d[2] * d[0], d[0] * d[1]])
            mu = mu / mu.sum()
            cpos = mu[0] * mesh.vertices[cs[0]] + mu[1] * mesh.vertices[cs[1]] + mu[2] * mesh.vertices[cs[2]]
            clay = mu[0] * layout[0] + mu[1] * layout[1] + mu[2] * layout[2]
            for s in range(3):
                e, end = side_of(s, ms[s])
                e2, end2 = side_of(s, ms[(s + 2) % 3])
                if (e, end) != (e2, end2):
                    raise DegenerateCylinder("triangle %d corner %d sides disagree" % (f, s))
                C = (("c", f, e, end), cpos, end_u(e, end), -1)
                X1 = cross_pt(s, e, end)
                X2 = cross_pt((s + 2) % 3, e, end)
                builders[e].triangle(
                    [interior_pt(s), X1, C],
                    [lay_corner(s), lay_cross(s), clay],
                )
                builders[e].triangle(
                    [interior_pt(s), C, X2],
                    [lay_corner(s), clay, lay_cross((s + 2) % 3)],
                )

    cylinders = []
    for e in range(G.n_edges):
        cyl = builders[e].build(e)
        _check_annulus(cyl)
        cylinders.append(cyl)
    return cylinders


def _check_annulus(cyl):
    topo = cyl.mesh.topology()
    if topo.chi != 0 or topo.genus != 0 or topo.n_boundaries != 2:
        raise DegenerateCylinder(
            "cylinder %d is not an annulus (chi=%d, g=%d, b=%d)"
            % (cyl.edge, topo.chi, topo.genus, topo.n_boundaries)
        )
    ends = []
    for loop in topo.boundary_loops:
        vals = {float(cyl.u[v]) for v in loop}
        if len(vals) != 1:
            raise DegenerateCylinder(
                "cylinder %d has a mixed-level boundary loop" % cyl.edge
            )
        ends.append(vals.pop())
    if sorted(ends) != [0.0, cyl.h]:
        raise DegenerateCylinder(
            "cylinder %d boundary levels are %s, expected {0, h}" % (cyl.edge, sorted(ends))
        )
    umin, umax = float(cyl.u.min()), float(cyl.u.max())
    if umin < 0.0 or umax > cyl.h:
        raise DegenerateCylinder("cylinder %d pullback leaves [0, h]" % cyl.edge)


def circumference(cyl, weights=None):
    """Circumference from the Dirichlet energy of the pullback: l = E / h.

    On the flat cylinder the pullback has unit gradient, so its energy is
    (height) x (circumference); dividing by the prescribed height recovers
    the circumference.
    """
    if weights is None:
        weights = cotangent_weights(cyl.mesh)
    du = cyl.u[cyl.mesh.edges[:, 0]] - cyl.u[cyl.mesh.edges[:, 1]]
    E = float(np.sum(weights.values * du * du))
    l = E / cyl.h
    if not np.isfinite(l) or l <= 0.0:
        raise NonPositiveCircumference("cylinder %d has l=%g" % (cyl.edge, l))
    cyl.l = l
    return l


def flatten_cylinder(cyl, weights=None):
    """Conjugate coordinate by integrating the rotated pullback gradient.

    Per-triangle gradients live in each triangle's own 2D layout; edge
    increments average the two adjacent triangles and are integrated over a
    BFS spanning tree rooted at the smallest-index vertex of the u = 0
    boundary.  The raw period around the cylinder is rescaled to ``l`` (a
    deviation beyond 5% is reported as a PeriodMismatchWarning).
    """
    mesh = cyl.mesh
    if cyl.l is None:
        circumference(cyl, weights)
    u = cyl.u

    sides = mesh.triangle_side_lengths()
    T = mesh.triangles
    dv = np.zeros(mesh.n_edges)
    cnt = np.zeros(mesh.n_edges)
    for f in range(len(T)):
        lay = _layout_triangle(sides[f])
        e1 = lay[1] - lay[0]
        e2 = lay[2] - lay[0]
        du1 = u[T[f, 1]] - u[T[f, 0]]
        du2 = u[T[f, 2]] - u[T[f, 0]]
        det = e1[0] * e2[1] - e1[1] * e2[0]
        gx = (du1 * e2[1] - du2 * e1[1]) / det
        gy = (du2 * e1[0] - du1 * e2[0]) / det
        cg = np.array([-gy, gx])  # +90 degree rotation: the conjugate direction
        for s in range(3):
            a, b = int(T[f, s]), int(T[f, (s + 1) % 3])
            vec = lay[(s + 1) % 3] - lay[s]
            inc = cg[0] * vec[0] + cg[1] * vec[1]
            m = int(mesh.he_edge[3 * f + s])
            if a > b:
                inc = -inc  # store increments from the smaller endpoint
            dv[m] += inc
            cnt[m] += 1.0
    dv /= np.maximum(cnt, 1.0)

    topo = mesh.topology()
    zero_loop = None
    for loop in topo.boundary_loops:
        if float(cyl.u[loop[0]]) == 0.0:
            zero_loop = loop
            break
    root = min(zero_loop)

    # BFS spanning tree integration
    nbr = [[] for _ in range(mesh.n_vertices)]
    for m, (a, b) in enumerate(mesh.edges):
        nbr[a].append((int(b), m, 1.0))
        nbr[b].append((int(a), m, -1.0))
    v_raw = np.full(mesh.n_vertices, np.nan)
    v_raw[root] = 0.0
    queue = [root]
    qi = 0
    while qi < len(queue):
        a = queue[qi]
        qi += 1
        for b, m, sgn in sorted(nbr[a]):
            if np.isnan(v_raw[b]):
                v_raw[b] = v_raw[a] + sgn * dv[m]
                queue.append(b)

    period = 0.0
    cyc = list(zero_loop) + [zero_loop[0]]
    for a, b in zip(cyc[:-1], cyc[1:]):
        m = mesh.edge_id(a, b)
        period += dv[m] if a < b else -dv[m]
    period_raw = abs(float(period))
    if period_raw == 0.0:
        raise NonPositiveCircumference("cylinder %d has zero flattening period" % cyl.edge)
    if abs(period_raw - cyl.l) > 0.05 * cyl.l:
        warnings.warn(
            "cylinder %d: flattening period %.6g deviates from circumference %.6g"
            % (cyl.edge, period_raw, cyl.l),
            PeriodMismatchWarning,
        )
    scale = cyl.l / period_raw
    v_scaled = v_raw * scale
    v = np.mod(v_scaled, cyl.l)
    return FlatCoords(
        u=u.copy(),
        v=v,
        v_raw=v_scaled,
        l=cyl.l,
        period_raw=period_raw,
        scale=scale,
    )
