"""Discrete harmonic maps: initial map construction and relaxation.

The map sends every mesh vertex to a point of the decomposition graph.
Vertices on admissible curve ``k`` start at the midpoint of graph edge
``k`` and all other vertices of a cut component start at its node; the
homotopy class is pinned by per-mesh-edge routes derived from the cut
(see ``_kernels`` for the encoding), so relaxation can spread the map
without unwinding it.
"""

import numpy as np

from . import _kernels as K
from .curves import build_decomposition_graph, cut_surface
from .errors import NonFiniteEnergy
from .metric_graph import GraphPoint

__all__ = ["GraphMap", "initial_map", "energy", "routed_energy", "relax", "map_distance"]


class GraphMap:
    """Vertex images on a metric graph, with homotopy routes and diagnostics.

    Attributes
    ----------
    pe, pt : arrays
        Anchored image per vertex: edge id and parameter in [0, w].
    route_x, route_y : int8 arrays
        Per-mesh-edge image path class; -1/-1 means within-edge.
    trace : array
        Relaxation energy per sweep (index 0 = initial); non-increasing.
    """

    def __init__(self, mesh, graph, pe, pt, route_x, route_y, trace=None, diagnostics=None):
        self.mesh = mesh
        self.graph = graph
        self.pe = pe
        self.pt = pt
        self.route_x = route_x
        self.route_y = route_y
        self.trace = np.asarray([]) if trace is None else trace
        self.displacement = None
        self.diagnostics = diagnostics or {}

    def copy(self):
        out = GraphMap(
            self.mesh,
            self.graph,
            self.pe.copy(),
            self.pt.copy(),
            self.route_x.copy(),
            self.route_y.copy(),
            trace=self.trace.copy(),
            diagnostics=dict(self.diagnostics),
        )
        out.displacement = None if self.displacement is None else self.displacement.copy()
        return out

    def point(self, v):
        """Canonical GraphPoint image of vertex v."""
        return self.graph.point_on_edge(int(self.pe[v]), float(self.pt[v]))

    def points(self):
        return [self.point(v) for v in range(len(self.pe))]


def _graph_arrays(G):
    ne_idx = np.concatenate([np.asarray(es, dtype=np.int64) for es in G.node_edges])
    ne_ptr = np.zeros(G.n_nodes + 1, dtype=np.int64)
    for n, es in enumerate(G.node_edges):
        ne_ptr[n + 1] = ne_ptr[n] + len(es)
    return G.edge_u, G.edge_v, G.edge_w, G.node_dist, ne_ptr, ne_idx


def _vertex_edge_csr(mesh):
    ends = np.concatenate([mesh.edges[:, 0], mesh.edges[:, 1]])
    eid = np.tile(np.arange(mesh.n_edges, dtype=np.int64), 2)
    order = np.argsort(ends, kind="stable")
    ptr = np.searchsorted(ends[order], np.arange(mesh.n_vertices + 1))
    return ptr.astype(np.int64), eid[order]


def initial_map(mesh, cset, graph=None, cut=None, curve_fraction=0.5):
    """Map each component to its node and each curve onto its edge.

    Vertices of curve ``k`` go to parameter ``curve_fraction * h_k`` of edge
    ``k`` (measured from the left-side node); every other vertex goes to its
    component's node.  Mesh-edge routes are derived from which side of each
    curve the edge leaves, which places the map in the intended homotopy
    class by construction.
    """
    if cut is None:
        cut = cut_surface(mesh, cset)
    if graph is None:
        graph = build_decomposition_graph(cut, cset).metric()
    if not 0.0 < curve_fraction < 1.0:
        raise ValueError("curve_fraction must be in (0, 1)")

    V = mesh.n_vertices
    curve_of = np.full(V, -1, dtype=np.int64)
    for k, path in enumerate(cset.curves):
        curve_of[list(path)] = k

    # anchor representation of each node: smallest incident edge
    anchor_e = np.empty(graph.n_nodes, dtype=np.int64)
    anchor_end = np.empty(graph.n_nodes, dtype=np.int64)
    for n in range(graph.n_nodes):
        e = graph.node_edges[n][0]
        anchor_e[n] = e
        anchor_end[n] = 0 if graph.edge_u[e] == n else 1

    comp_of = cut.vertex_component[:V].copy()  # originals keep their ids when sliced
    pe = np.empty(V, dtype=np.int64)
    pt = np.empty(V, dtype=np.float64)
    for v in range(V):
        k = curve_of[v]
        if k >= 0:
            pe[v] = k
            pt[v] = curve_fraction * graph.edge_w[k]
        else:
            c = comp_of[v]
            pe[v] = anchor_e[c]
            pt[v] = 0.0 if anchor_end[c] == 0 else graph.edge_w[anchor_e[c]]

    slicedT = cut.sliced.triangles

    def side_end(v, tri):
        # which end of curve edge `curve_of[v]` the mesh leaves v through,
        # looking from triangle `tri`: 0 = left copy, 1 = right copy
        slot = int(np.flatnonzero(mesh.triangles[tri] == v)[0])
        _k, side = cut.side_of_copy[int(slicedT[tri, slot])]
        return side

    M = mesh.n_edges
    route_x = np.full(M, -1, dtype=np.int8)
    route_y = np.full(M, -1, dtype=np.int8)
    for m in range(M):
        i, j = int(mesh.edges[m, 0]), int(mesh.edges[m, 1])
        ki, kj = curve_of[i], curve_of[j]
        if ki < 0 and kj < 0:
            continue  # both at the same node anchor: within-edge, length 0
        if ki >= 0 and kj >= 0 and ki == kj:
            continue  # chord of one curve: both at the same edge point
        h = mesh.halfedge_id(i, j)
        tri = h // 3
        if ki >= 0:
            x = side_end(i, tri)
        else:
            x = int(anchor_end[comp_of[i]])
        if kj >= 0:
            y = side_end(j, tri)
        else:
            y = int(anchor_end[comp_of[j]])
        route_x[m] = x
        route_y[m] = y

    return GraphMap(mesh, graph, pe, pt, route_x, route_y, trace=np.asarray([]))


def energy(gmap, weights):
    """Harmonic energy: cotan-weighted sum of squared graph distances."""
    mesh, G = gmap.mesh, gmap.graph
    return float(
        K.shortest_energy(
            gmap.pe,
            gmap.pt,
            mesh.edges[:, 0].astype(np.int64),
            mesh.edges[:, 1].astype(np.int64),
            weights.values,
            G.edge_u,
            G.edge_v,
            G.edge_w,
            G.node_dist,
        )
    )


def routed_energy(gmap, weights):
    """Energy with distances measured along the stored homotopy routes."""
    return float(
        K.routed_energy(
            gmap.pe,
            gmap.pt,
            gmap.mesh.edges[:, 0].astype(np.int64),
            gmap.mesh.edges[:, 1].astype(np.int64),
            weights.values,
            gmap.route_x,
            gmap.route_y,
            gmap.graph.edge_w,
        )
    )


def relax(gmap, weights, tol=1e-9, max_sweeps=10000, diagnostics_csv=None):
    """Gauss-Seidel relaxation to the discrete harmonic map.

    Sequential sweeps in vertex-index order move each vertex to the routed
    local minimizer; stops when the relative energy decrease drops below
    ``tol`` or after ``max_sweeps``.  A ``tol >= 1`` is satisfied by any
    sweep, so only the initial bookkeeping runs and the map is returned
    unchanged.  Vertices whose neighbor weights sum to <= 0 are skipped
    (counted in diagnostics) to keep the descent sound.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    out = gmap.copy()
    mesh, G = gmap.mesh, gmap.graph
    E0 = routed_energy(gmap, weights)
    if tol >= 1.0:
        out.trace = np.asarray([E0])
        out.displacement = np.asarray([0.0])
        out.diagnostics = {"converged": True, "sweeps": 0, "skipped_moves": 0}
        return out

    edge_u, edge_v, edge_w, D, ne_ptr, ne_idx = _graph_arrays(G)
    ve_ptr, ve_idx = _vertex_edge_csr(mesh)
    me_i = mesh.edges[:, 0].astype(np.int64)
    me_j = mesh.edges[:, 1].astype(np.int64)
    trace = np.zeros(max_sweeps + 1)
    disp = np.zeros(max_sweeps + 1)
    sweeps, status, skipped, bad_v = K.relax_sweeps(
        out.pe,
        out.pt,
        out.route_x,
        out.route_y,
        me_i,
        me_j,
        weights.values,
        ve_ptr,
        ve_idx,
        edge_u,
        edge_v,
        edge_w,
        ne_ptr,
        ne_idx,
        float(tol),
        int(max_sweeps),
        trace,
        disp,
    )
    if status == K.STATUS_NONFINITE:
        raise NonFiniteEnergy(
            "energy became non-finite during sweep %d (vertex %d)" % (sweeps, bad_v)
        )
    out.trace = trace[: sweeps + 1]
    out.displacement = disp[: sweeps + 1]
    out.diagnostics = {
        "converged": status == K.STATUS_CONVERGED,
        "sweeps": int(sweeps),
        "skipped_moves": int(skipped),
    }
    if diagnostics_csv:
        with open(diagnostics_csv, "w", encoding="ascii") as f:
            f.write("sweep,energy,max_displacement\n")
            for s in range(sweeps + 1):
                f.write("%d,%s,%s\n" % (s, repr(float(trace[s])), repr(float(disp[s]))))
    return out


def map_distance(a, b):
    """Per-vertex graph distance between two maps on the same mesh/graph."""
    G = a.graph
    return K.map_vertex_distances(a.pe, a.pt, b.pe, b.pt, G.edge_u, G.edge_v, G.edge_w, G.node_dist)


def curve_image_edges(gmap, cset):
    """For each curve, the set of graph objects its vertices image into.

    Used to assert the converged map keeps curve k inside edge k's closure:
    every vertex of curve k must sit on edge k or at one of its endpoint
    nodes.
    """
    G = gmap.graph
    ok = []
    for k, path in enumerate(cset.curves):
        good = True
        for v in path:
            p = gmap.point(int(v))
            if p.kind == "edge":
                good &= p.index == k
            else:
                good &= p.index in (int(G.edge_u[k]), int(G.edge_v[k]))
        ok.append(bool(good))
    return ok
