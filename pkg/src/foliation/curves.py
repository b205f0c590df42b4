"""Admissible curves, surface cutting, and the decomposition graph.

Admissible curves are simple, pairwise vertex-disjoint closed edge-cycles
whose complement contains no disk and no annulus bounded by two *different*
curves (which would make those curves isotopic).  An annulus bounded by both
copies of a single curve is legitimate: that is the torus cut along its
meridian.
"""

import heapq
from dataclasses import dataclass

import numpy as np

from .errors import (
    CurveNotSimple,
    CurvesIntersect,
    DisconnectedGraph,
    InessentialCurve,
    NonPositiveHeight,
)
from .metric_graph import MetricGraph

__all__ = [
    "AdmissibleCurveSet",
    "CutComponent",
    "CutResult",
    "DecompositionGraph",
    "validate_curves",
    "cut_surface",
    "build_decomposition_graph",
    "snap_polyline",
]


@dataclass(frozen=True)
class AdmissibleCurveSet:
    """Validated disjoint essential curves with their prescribed heights."""

    curves: tuple  # tuple of vertex tuples (closed cycles)
    heights: np.ndarray

    @property
    def n_curves(self):
        return len(self.curves)


@dataclass(frozen=True)
class CutComponent:
    triangles: np.ndarray  # triangle ids (shared with the uncut mesh)
    chi: int
    boundary_curves: tuple  # (curve id, side) pairs, side 0 = left


@dataclass
class CutResult:
    """Cut components plus enough provenance to build maps deterministically.

    ``sliced`` shares triangle order with the input mesh; ``orig_vertex``
    maps sliced vertex ids back, ``vertex_component`` labels sliced vertices,
    and ``side_of_copy`` tags each duplicated curve vertex with its
    (curve id, side) where side 0 is the left copy under curve orientation.
    """

    sliced: object
    orig_vertex: np.ndarray
    tri_component: np.ndarray
    vertex_component: np.ndarray
    components: list
    curve_sides: list  # per curve: (left component, right component)
    side_of_copy: dict  # sliced vid -> (curve id, side)
    left_copies: list  # per curve: sliced vids of the left copy, in curve order
    right_copies: list


def validate_curves(mesh, curves, heights):
    """Check curves are simple, disjoint and essential; return the set.

    Raises CurveNotSimple / CurvesIntersect / NonPositiveHeight for local
    violations and InessentialCurve when cutting leaves a disk component or
    an annulus bounded by two different curves (isotopic pair).
    """
    heights = np.asarray(heights, dtype=np.float64)
    if len(heights) != len(curves):
        raise NonPositiveHeight("need one height per curve")
    if np.any(heights <= 0) or not np.all(np.isfinite(heights)):
        raise NonPositiveHeight("heights must be positive and finite")
    seen = {}
    for k, path in enumerate(curves):
        path = [int(v) for v in path]
        if len(set(path)) != len(path) or len(path) < 3:
            raise CurveNotSimple("curve %d repeats a vertex or is too short" % k)
        for v in path:
            if v in seen:
                raise CurvesIntersect("curves %d and %d share vertex %d" % (seen[v], k, v))
            seen[v] = k
    cset = AdmissibleCurveSet(curves=tuple(tuple(int(v) for v in p) for p in curves), heights=heights)
    cut = cut_surface(mesh, cset)
    for comp in cut.components:
        b = len(comp.boundary_curves)
        if comp.chi > 0:
            raise InessentialCurve(
                "cutting leaves a component with chi=%d (contractible curve)" % comp.chi
            )
        if comp.chi == 0 and b == 2:
            (k1, _s1), (k2, _s2) = comp.boundary_curves
            if k1 != k2:
                raise InessentialCurve(
                    "curves %d and %d bound an annulus (isotopic pair)" % (k1, k2)
                )
        elif comp.chi == 0:
            raise InessentialCurve("cutting leaves a chi=0 component that is not an annulus")
    return cset


def cut_surface(mesh, cset):
    """Cut along all curves and label the resulting components.

    Component ids are assigned by the smallest sliced-vertex id they contain,
    so identical inputs give identical labels.
    """
    sliced, info = mesh.slice_along_curves([(list(p), True) for p in cset.curves])

    # connected components over sliced triangles
    F = sliced.n_triangles
    parent = np.arange(F, dtype=np.int64)

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for h in range(3 * F):
        t = sliced.twin[h]
        if t >= 0:
            a, b = find(h // 3), find(t // 3)
            if a != b:
                parent[max(a, b)] = min(a, b)
    raw = np.array([find(t) for t in range(F)])

    # order components by their smallest vertex id
    comp_min_vertex = {}
    for t in range(F):
        r = raw[t]
        m = int(sliced.triangles[t].min())
        comp_min_vertex[r] = min(comp_min_vertex.get(r, m), m)
    roots = sorted(comp_min_vertex, key=lambda r: comp_min_vertex[r])
    relabel = {r: i for i, r in enumerate(roots)}
    tri_comp = np.array([relabel[r] for r in raw], dtype=np.int64)

    vertex_comp = np.full(sliced.n_vertices, -1, dtype=np.int64)
    for t in range(F):
        vertex_comp[sliced.triangles[t]] = tri_comp[t]

    side_of_copy = {}
    left_copies, right_copies, curve_sides = [], [], []
    for k, (left, right) in enumerate(info.sides):
        for v in left:
            side_of_copy[int(v)] = (k, 0)
        for v in right:
            side_of_copy[int(v)] = (k, 1)
        left_copies.append(list(left))
        right_copies.append(list(right))
        curve_sides.append((int(vertex_comp[left[0]]), int(vertex_comp[right[0]])))

    components = []
    n_comp = len(roots)
    he_edge = sliced.he_edge.reshape(-1, 3)
    for c in range(n_comp):
        tris = np.flatnonzero(tri_comp == c)
        nv = len(np.unique(sliced.triangles[tris]))
        ne = len(np.unique(he_edge[tris]))
        chi = nv - ne + len(tris)
        bc = []
        for k in range(len(cset.curves)):
            if curve_sides[k][0] == c:
                bc.append((k, 0))
            if curve_sides[k][1] == c:
                bc.append((k, 1))
        components.append(CutComponent(triangles=tris, chi=int(chi), boundary_curves=tuple(bc)))

    return CutResult(
        sliced=sliced,
        orig_vertex=info.orig_vertex,
        tri_component=tri_comp,
        vertex_component=vertex_comp,
        components=components,
        curve_sides=curve_sides,
        side_of_copy=side_of_copy,
        left_copies=left_copies,
        right_copies=right_copies,
    )


@dataclass(frozen=True)
class DecompositionGraph:
    """Weighted multigraph: a node per cut component, an edge per curve."""

    n_nodes: int
    edge_nodes: tuple  # per curve: (left node, right node)
    weights: np.ndarray  # per curve: prescribed height

    def metric(self):
        return MetricGraph(
            self.n_nodes,
            [(u, v, w) for (u, v), w in zip(self.edge_nodes, self.weights)],
        )


def build_decomposition_graph(cut, cset):
    """Graph with one node per component, one edge per curve (weight = height).

    Edge ``k`` joins the components carrying curve ``k``'s left and right
    boundary copies; self-loops appear when both sides land in one component.
    """
    n = len(cut.components)
    edges = tuple((int(l), int(r)) for l, r in cut.curve_sides)
    reached = {0}
    frontier = [0]
    adj = [[] for _ in range(n)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    while frontier:
        u = frontier.pop()
        for v in adj[u]:
            if v not in reached:
                reached.add(v)
                frontier.append(v)
    if len(reached) != n:
        raise DisconnectedGraph("decomposition graph is disconnected (disconnected surface?)")
    return DecompositionGraph(n_nodes=n, edge_nodes=edges, weights=np.asarray(cset.heights))


def snap_polyline(mesh, points, closed):
    """Snap a position polyline to mesh vertices joined by shortest edge paths.

    Each sample snaps to its nearest vertex (smallest index on ties);
    consecutive snaps are connected with Dijkstra over edge lengths, ties
    again broken toward smaller vertex indices.  Returns the vertex path.
    """
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    snapped = []
    for p in points:
        d = np.linalg.norm(mesh.vertices - p[None, :], axis=1)
        v = int(np.argmin(d))  # argmin takes the first (smallest) index on ties
        if not snapped or snapped[-1] != v:
            snapped.append(v)
    if closed and len(snapped) > 1 and snapped[0] == snapped[-1]:
        snapped.pop()
    if len(snapped) < 2:
        raise CurveNotSimple("polyline snaps to fewer than 2 distinct vertices")

    hops = list(zip(snapped, snapped[1:]))
    if closed:
        hops.append((snapped[-1], snapped[0]))
    path = [snapped[0]]
    for a, b in hops:
        seg = _shortest_vertex_path(mesh, a, b)
        path.extend(seg[1:])
    if path[0] == path[-1]:
        path.pop()
    return path


def _shortest_vertex_path(mesh, src, dst):
    dist = {src: 0.0}
    prev = {}
    heap = [(0.0, src)]
    edges = mesh.edges
    lengths = mesh.edge_lengths
    # adjacency on demand from the edge list
    order = np.argsort(edges[:, 0], kind="stable")
    ptr0 = np.searchsorted(edges[order, 0], np.arange(mesh.n_vertices + 1))
    order1 = np.argsort(edges[:, 1], kind="stable")
    ptr1 = np.searchsorted(edges[order1, 1], np.arange(mesh.n_vertices + 1))

    def neighbors(v):
        out = []
        for e in order[ptr0[v] : ptr0[v + 1]]:
            out.append((int(edges[e, 1]), float(lengths[e])))
        for e in order1[ptr1[v] : ptr1[v + 1]]:
            out.append((int(edges[e, 0]), float(lengths[e])))
        return sorted(out)

    done = set()
    while heap:
        d, v = heapq.heappop(heap)
        if v in done:
            continue
        done.add(v)
        if v == dst:
            break
        for u, w in neighbors(v):
            nd = d + w
            if u not in dist or nd < dist[u] or (nd == dist[u] and v < prev.get(u, mesh.n_vertices)):
                dist[u] = nd
                prev[u] = v
                heapq.heappush(heap, (nd, u))
    if dst not in done:
        raise CurveNotSimple("no edge path between snapped vertices %d and %d" % (src, dst))
    out = [dst]
    while out[-1] != src:
        out.append(prev[out[-1]])
    return out[::-1]
