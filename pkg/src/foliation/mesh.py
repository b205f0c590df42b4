"""Triangle mesh core: connectivity, topology, cotangent weights, cutting.

The mesh is stored as flat numpy arrays with implicit halfedges
(halfedge ``h = 3*f + k`` runs from corner ``k`` to corner ``k+1`` of
triangle ``f``).  Geometry may be intrinsic: an optional per-edge length
array overrides Euclidean distances, which is how flat tori and flat
cylinders (not embeddable in R^3) are represented exactly.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AlreadyClosed,
    CurveNotEmbedded,
    DegenerateTriangle,
    EdgeNotInMesh,
    EmptyMesh,
    NonManifold,
    NonOrientable,
)

__all__ = [
    "TriMesh",
    "TopologyInfo",
    "CotanWeights",
    "SliceInfo",
    "cotangent_weights",
]


@dataclass(frozen=True)
class TopologyInfo:
    """Euler characteristic, genus and boundary loops of a mesh."""

    chi: int
    genus: int
    boundary_loops: tuple

    @property
    def n_boundaries(self):
        return len(self.boundary_loops)

    def to_json(self):
        return {
            "chi": int(self.chi),
            "genus": int(self.genus),
            "boundaries": int(self.n_boundaries),
        }


@dataclass(frozen=True)
class CotanWeights:
    """Per-edge cotangent weights ``w = (cot a + cot b) / 2``.

    Boundary edges keep the single existing cotangent halved.  Negative
    weights (obtuse opposite angles) are kept, not clamped; their count is
    reported for diagnostics.
    """

    values: np.ndarray
    n_negative: int
    obtuse_edge_fraction: float


@dataclass
class SliceInfo:
    """Provenance of a cut: vertex origins and per-curve boundary copies.

    ``sides[k]`` holds the (left, right) vertex sequences (new mesh ids)
    produced by curve ``k``; the left copy is listed first.
    """

    orig_vertex: np.ndarray
    sides: list


class TriMesh:
    """Oriented manifold triangle mesh (boundary allowed).

    Parameters
    ----------
    vertices : (V, 3) float array
        Vertex positions, millimetres.
    triangles : (F, 3) int array
        Corner indices, counter-clockwise and globally consistent.
    edge_lengths : (E,) float array, optional
        Intrinsic metric override, aligned with :attr:`edges` (which is
        lexicographically sorted).  When absent, Euclidean lengths are used.

    Raises
    ------
    EmptyMesh, NonManifold, NonOrientable
        When the connectivity is not a consistently oriented surface with
        disk or half-disk vertex stars.
    """

    def __init__(self, vertices, triangles, edge_lengths=None):
        self.vertices = np.ascontiguousarray(vertices, dtype=np.float64)
        self.triangles = np.ascontiguousarray(triangles, dtype=np.int64)
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 3:
            raise EmptyMesh("vertices must be an (V, 3) array")
        if self.triangles.size == 0 or self.vertices.size == 0:
            raise EmptyMesh("mesh has no triangles or no vertices")
        if self.triangles.ndim != 2 or self.triangles.shape[1] != 3:
            raise NonManifold("triangles must be an (F, 3) array")
        if self.triangles.min() < 0 or self.triangles.max() >= len(self.vertices):
            raise NonManifold("triangle corner index out of range")
        self._build_connectivity()
        if edge_lengths is None:
            d = self.vertices[self.edges[:, 0]] - self.vertices[self.edges[:, 1]]
            self.edge_lengths = np.sqrt((d * d).sum(axis=1))
            self.is_intrinsic = False
        else:
            edge_lengths = np.asarray(edge_lengths, dtype=np.float64)
            if edge_lengths.shape != (len(self.edges),):
                raise NonManifold(
                    "edge_lengths has %d entries, mesh has %d edges"
                    % (edge_lengths.size, len(self.edges))
                )
            if np.any(edge_lengths <= 0):
                raise NonManifold("edge lengths must be positive")
            self.edge_lengths = edge_lengths
            self.is_intrinsic = True
        self._check_vertex_stars()

    # -- construction ---------------------------------------------------

    def _build_connectivity(self):
        T = self.triangles
        V = len(self.vertices)
        F = len(T)
        if np.any(T[:, 0] == T[:, 1]) or np.any(T[:, 1] == T[:, 2]) or np.any(T[:, 2] == T[:, 0]):
            raise NonManifold("triangle with a repeated corner")

        self.he_src = np.concatenate([T[:, 0:1], T[:, 1:2], T[:, 2:3]], axis=1).reshape(-1)
        self.he_dst = np.concatenate([T[:, 1:2], T[:, 2:3], T[:, 0:1]], axis=1).reshape(-1)
        H = 3 * F

        key = self.he_src * V + self.he_dst
        order = np.argsort(key, kind="stable")
        skey = key[order]
        ukey = np.minimum(self.he_src, self.he_dst) * V + np.maximum(self.he_src, self.he_dst)
        _, counts = np.unique(ukey, return_counts=True)
        if np.any(counts > 2):
            raise NonManifold("an edge borders more than 2 triangles")
        if np.any(skey[1:] == skey[:-1]):
            raise NonOrientable("two triangles traverse a shared edge in the same direction")

        rkey = self.he_dst * V + self.he_src
        pos = np.searchsorted(skey, rkey)
        pos = np.clip(pos, 0, H - 1)
        hit = skey[pos] == rkey
        self.twin = np.where(hit, order[pos], -1).astype(np.int64)

        # undirected edges, lexicographically sorted
        pairs = np.stack(
            [np.minimum(self.he_src, self.he_dst), np.maximum(self.he_src, self.he_dst)], axis=1
        )
        self.edges, inv = np.unique(pairs, axis=0, return_inverse=True)
        self.he_edge = inv.reshape(-1).astype(np.int64)

        self.boundary_he = np.flatnonzero(self.twin < 0)
        self.is_closed = self.boundary_he.size == 0
        bnd_src = self.he_src[self.boundary_he]
        if len(np.unique(bnd_src)) != len(bnd_src):
            raise NonManifold("vertex with more than one boundary fan")
        self._bnd_out = np.full(V, -1, dtype=np.int64)
        self._bnd_out[bnd_src] = self.boundary_he

        used = np.zeros(V, dtype=bool)
        used[T.reshape(-1)] = True
        if not used.all():
            raise NonManifold("isolated vertex (not part of any triangle)")

        # vertex -> outgoing halfedges (CSR, sorted by halfedge id)
        o = np.argsort(self.he_src, kind="stable")
        self._v_out = o
        self._v_out_ptr = np.searchsorted(self.he_src[o], np.arange(V + 1))

    def _check_vertex_stars(self):
        # umbrella walk: star of every vertex must be one fan
        prev = lambda h: h - h % 3 + (h % 3 + 2) % 3
        twin = self.twin
        for v in range(len(self.vertices)):
            out = self._v_out[self._v_out_ptr[v] : self._v_out_ptr[v + 1]]
            start = self._bnd_out[v] if self._bnd_out[v] >= 0 else out[0]
            n = 0
            h = start
            while True:
                n += 1
                t = twin[prev(h)]
                if t < 0 or t == start:
                    break
                h = t
                if n > out.size:
                    break
            if n != out.size:
                raise NonManifold("vertex %d star is not a single fan" % v)

    # -- basic quantities -------------------------------------------------

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_edges(self):
        return len(self.edges)

    @property
    def n_triangles(self):
        return len(self.triangles)

    @property
    def chi(self):
        return self.n_vertices - self.n_edges + self.n_triangles

    def edge_id(self, a, b):
        """Index of undirected edge (a, b), or -1 if absent."""
        lo, hi = (a, b) if a < b else (b, a)
        i = np.searchsorted(self.edges[:, 0], lo)
        while i < len(self.edges) and self.edges[i, 0] == lo:
            if self.edges[i, 1] == hi:
                return int(i)
            i += 1
        return -1

    def halfedge_id(self, a, b):
        """Index of directed halfedge a -> b, or -1."""
        for h in self._v_out[self._v_out_ptr[a] : self._v_out_ptr[a + 1]]:
            if self.he_dst[h] == b:
                return int(h)
        return -1

    def triangle_side_lengths(self):
        """(F, 3) side lengths; side k runs from corner k to corner k+1."""
        return self.edge_lengths[self.he_edge.reshape(-1, 3)]

    def triangle_areas(self):
        s = self.triangle_side_lengths()
        a, b, c = s[:, 0], s[:, 1], s[:, 2]
        p = 0.5 * (a + b + c)
        val = p * (p - a) * (p - b) * (p - c)
        return np.sqrt(np.maximum(val, 0.0))

    def surface_area(self):
        """Total surface area (mm^2)."""
        return float(self.triangle_areas().sum())

    def boundary_loops(self):
        """Boundary loops as vertex cycles, deterministically ordered.

        Loops are sorted by their smallest vertex index and each loop is
        rotated to start at that vertex; traversal follows the boundary
        halfedge orientation.
        """
        loops = []
        seen = np.zeros(len(self.he_src), dtype=bool)
        for h0 in self.boundary_he:
            if seen[h0]:
                continue
            loop = []
            h = h0
            while not seen[h]:
                seen[h] = True
                loop.append(int(self.he_src[h]))
                h = self._bnd_out[self.he_dst[h]]
            k = int(np.argmin(loop))
            loops.append(tuple(loop[k:] + loop[:k]))
        loops.sort(key=lambda lp: lp[0])
        return loops

    def topology(self):
        """Euler characteristic, genus and boundary loops."""
        loops = self.boundary_loops()
        chi = self.chi
        b = len(loops)
        genus2 = 2 - chi - b
        if genus2 % 2 != 0 or genus2 < 0:
            raise NonOrientable("chi=%d with %d boundaries is not orientable" % (chi, b))
        return TopologyInfo(chi=chi, genus=genus2 // 2, boundary_loops=tuple(loops))

    # -- differential quantities -----------------------------------------

    def _triangle_cotangents(self):
        """(F, 3) cot of the angle at corner k (law of cosines / Heron)."""
        s = self.triangle_side_lengths()
        A = self.triangle_areas()
        mean_a = A.mean()
        if np.any(A < 1e-12 * mean_a):
            bad = int(np.argmin(A))
            raise DegenerateTriangle("triangle %d has near-zero area" % bad)
        s2 = s * s
        # angle at corner k is opposite side k+1, adjacent to sides k and k-1
        cot = np.empty_like(s)
        for k in range(3):
            cot[:, k] = (s2[:, k] + s2[:, (k + 2) % 3] - s2[:, (k + 1) % 3]) / (4.0 * A)
        return cot

    def mean_curvature_feature(self):
        """Area-weighted mean of the cotangent mean-curvature magnitude (1/mm).

        Extrinsic: uses embedded vertex positions.  Interior vertices only,
        so plane patches average to ~0; intended for closed meshes.
        """
        if self.is_intrinsic:
            raise DegenerateTriangle(
                "mean curvature is extrinsic; not defined for an intrinsic-metric mesh"
            )
        V = len(self.vertices)
        cot = self._triangle_cotangents()
        A = self.triangle_areas()
        s2 = self.triangle_side_lengths() ** 2

        lap = np.zeros((V, 3))
        area = np.zeros(V)
        T = self.triangles
        P = self.vertices
        obtuse = cot < 0
        any_obtuse = obtuse.any(axis=1)
        for k in range(3):
            i = T[:, k]
            j = T[:, (k + 1) % 3]
            o = T[:, (k + 2) % 3]
            c = cot[:, (k + 2) % 3]  # angle opposite edge (i, j)
            d = P[i] - P[j]
            np.add.at(lap, i, 0.5 * c[:, None] * d)
            np.add.at(lap, j, -0.5 * c[:, None] * d)
            # Meyer mixed area for corner k
            amix = 0.125 * (s2[:, (k + 2) % 3] * cot[:, (k + 1) % 3] + s2[:, k] * cot[:, (k + 2) % 3])
            amix = np.where(any_obtuse, np.where(obtuse[:, k], A / 2.0, A / 4.0), amix)
            np.add.at(area, T[:, k], amix)

        interior = np.ones(V, dtype=bool)
        interior[self.he_src[self.boundary_he]] = False
        interior &= area > 0
        h = np.linalg.norm(lap, axis=1)[interior] / (2.0 * area[interior])
        w = area[interior]
        return float((h * w).sum() / w.sum())

    # -- cutting -----------------------------------------------------------

    def _curve_edge_ids(self, path, closed):
        path = [int(v) for v in path]
        if len(set(path)) != len(path):
            raise CurveNotEmbedded("curve repeats a vertex")
        if max(path) >= self.n_vertices or min(path) < 0:
            raise EdgeNotInMesh("curve vertex index out of range")
        pairs = list(zip(path, path[1:]))
        if closed:
            if len(path) < 3:
                raise CurveNotEmbedded("closed curve needs at least 3 vertices")
            pairs.append((path[-1], path[0]))
        elif len(path) < 2:
            raise CurveNotEmbedded("open curve needs at least 2 vertices")
        ids = []
        for a, b in pairs:
            e = self.edge_id(a, b)
            if e < 0:
                raise EdgeNotInMesh("curve step (%d, %d) is not a mesh edge" % (a, b))
            ids.append(e)
        return ids, pairs

    def slice_along_curves(self, curves):
        """Cut along disjoint simple curves, duplicating their interiors.

        Parameters
        ----------
        curves : list of (path, closed)
            Vertex paths / cycles along existing mesh edges.  Curves must be
            pairwise vertex-disjoint.

        Returns
        -------
        (TriMesh, SliceInfo)
            The cut mesh (triangle count and order preserved) and the
            provenance of each curve's left/right boundary copies.
        """
        cut_edges = set()
        curve_pairs = []
        touched = {}
        for k, (path, closed) in enumerate(curves):
            ids, pairs = self._curve_edge_ids(path, closed)
            for v in path:
                if v in touched:
                    raise CurveNotEmbedded(
                        "curves %d and %d share vertex %d" % (touched[v], k, v)
                    )
                touched[v] = k
            cut_edges.update(ids)
            curve_pairs.append((list(path), bool(closed), pairs))

        newT = self.triangles.copy()
        orig = list(range(self.n_vertices))
        next_id = self.n_vertices
        prev = lambda h: h - h % 3 + (h % 3 + 2) % 3

        order = [(k, v) for k, (path, _c, _p) in enumerate(curve_pairs) for v in path]
        for _k, v in order:
            out = self._v_out[self._v_out_ptr[v] : self._v_out_ptr[v + 1]]
            tris = out // 3
            parent = {int(t): int(t) for t in tris}

            def find(x):
                while parent[x] != x:
                    parent[x] = parent[parent[x]]
                    x = parent[x]
                return x

            for h in out:
                t = self.twin[h]
                if t >= 0 and self.he_edge[h] not in cut_edges:
                    a, b = find(int(h // 3)), find(int(t // 3))
                    if a != b:
                        parent[max(a, b)] = min(a, b)
                # also union across the incoming edge (prev halfedge)
                ph = prev(h)
                t2 = self.twin[ph]
                if t2 >= 0 and self.he_edge[ph] not in cut_edges:
                    a, b = find(int(h // 3)), find(int(t2 // 3))
                    if a != b:
                        parent[max(a, b)] = min(a, b)

            fans = {}
            for t in sorted(int(x) for x in tris):
                fans.setdefault(find(t), []).append(t)
            roots = sorted(fans)
            for r in roots[1:]:
                vid = next_id
                next_id += 1
                orig.append(v)
                for t in fans[r]:
                    slot = np.flatnonzero(self.triangles[t] == v)[0]
                    newT[t, slot] = vid

        orig = np.asarray(orig, dtype=np.int64)
        newV = self.vertices[orig]
        sliced = TriMesh(newV, newT)
        if self.is_intrinsic:
            sliced = TriMesh(newV, newT, edge_lengths=self._transfer_lengths(sliced, orig))

        sides = []
        for k, (path, closed, pairs) in enumerate(curve_pairs):
            left, right = [], []
            for a, b in pairs:
                h = self.halfedge_id(a, b)
                if h < 0:
                    # the halfedge runs b -> a only; swap roles
                    h2 = self.halfedge_id(b, a)
                    fl, fr = self.twin[h2] // 3 if self.twin[h2] >= 0 else -1, h2 // 3
                else:
                    fl, fr = h // 3, self.twin[h] // 3 if self.twin[h] >= 0 else -1
                la = _corner_of(newT, self.triangles, fl, a) if fl >= 0 else a
                ra = _corner_of(newT, self.triangles, fr, a) if fr >= 0 else a
                left.append(la)
                right.append(ra)
            if not closed:
                a, b = pairs[-1]
                left.append(b)
                right.append(b)
            sides.append((left, right))
        return sliced, SliceInfo(orig_vertex=orig, sides=sides)

    def slice_along_curve(self, path, closed):
        """Cut along a single simple curve (see :meth:`slice_along_curves`)."""
        return self.slice_along_curves([(path, closed)])

    def _transfer_lengths(self, sliced, orig):
        lookup = {}
        for e, (a, b) in enumerate(self.edges):
            lookup[(int(a), int(b))] = self.edge_lengths[e]
        out = np.empty(len(sliced.edges))
        for e, (a, b) in enumerate(sliced.edges):
            oa, ob = int(orig[a]), int(orig[b])
            out[e] = lookup[(min(oa, ob), max(oa, ob))]
        return out

    def double_cover(self):
        """Glue a mirrored copy along every boundary loop.

        Returns
        -------
        (TriMesh, ndarray)
            Closed mesh with chi' = 2 chi and genus 2g + b - 1, plus the
            mirror involution (boundary vertices are fixed points).
        """
        if self.is_closed:
            raise AlreadyClosed("mesh has no boundary to double along")
        V = self.n_vertices
        on_bnd = np.zeros(V, dtype=bool)
        on_bnd[self.he_src[self.boundary_he]] = True
        bnd_edge = np.zeros(self.n_edges, dtype=bool)
        bnd_edge[self.he_edge[self.boundary_he]] = True
        both = on_bnd[self.edges[:, 0]] & on_bnd[self.edges[:, 1]] & ~bnd_edge
        if both.any():
            e = int(np.flatnonzero(both)[0])
            raise NonManifold(
                "interior edge (%d, %d) joins two boundary vertices; its mirror "
                "copy would collide -- refine near the boundary before doubling"
                % tuple(self.edges[e])
            )
        mirror = np.arange(V, dtype=np.int64)
        interior = np.flatnonzero(~on_bnd)
        mirror[interior] = V + np.arange(len(interior))

        newV = np.concatenate([self.vertices, self.vertices[interior]], axis=0)
        T = self.triangles
        mT = np.stack([mirror[T[:, 0]], mirror[T[:, 2]], mirror[T[:, 1]]], axis=1)
        newT = np.concatenate([T, mT], axis=0)

        lengths = None
        if self.is_intrinsic:
            pre = np.concatenate([np.arange(V), interior])
            tmp = TriMesh(newV, newT)
            lookup = {}
            for e, (a, b) in enumerate(self.edges):
                lookup[(int(a), int(b))] = self.edge_lengths[e]
            lengths = np.empty(len(tmp.edges))
            for e, (a, b) in enumerate(tmp.edges):
                oa, ob = int(pre[a]), int(pre[b])
                lengths[e] = lookup[(min(oa, ob), max(oa, ob))]

        doubled = TriMesh(newV, newT, edge_lengths=lengths)
        inv = np.empty(doubled.n_vertices, dtype=np.int64)
        inv[: V] = mirror
        inv[mirror[interior]] = interior
        return doubled, inv

    def scaled(self, c):
        """New mesh with positions (and intrinsic lengths) scaled by c."""
        lengths = self.edge_lengths * c if self.is_intrinsic else None
        return TriMesh(self.vertices * c, self.triangles, edge_lengths=lengths)


def _corner_of(newT, oldT, f, v):
    slot = np.flatnonzero(oldT[f] == v)[0]
    return int(newT[f, slot])


def cotangent_weights(mesh):
    """Cotangent weights per undirected mesh edge.

    ``w_ij = (cot a + cot b) / 2`` over the angles opposite edge (i, j);
    boundary edges keep the single cotangent halved.  Weights depend only on
    triangle shape, so they are invariant under scaling and rigid motion.
    """
    cot = mesh._triangle_cotangents()
    # halfedge h = 3f + k has the opposite corner k + 2
    opp = np.concatenate([cot[:, 2:3], cot[:, 0:1], cot[:, 1:2]], axis=1).reshape(-1)
    w = np.zeros(mesh.n_edges)
    np.add.at(w, mesh.he_edge, 0.5 * opp)
    n_neg = int(np.count_nonzero(w < 0))
    return CotanWeights(
        values=w,
        n_negative=n_neg,
        obtuse_edge_fraction=n_neg / mesh.n_edges,
    )
