"""The target domain: points on a weighted multigraph, distance, barycenter.

Edges carry positive lengths; self-loops and parallel edges are allowed.
A point is either a node or an interior point of an edge at parameter
``t`` measured from the edge's first endpoint (t in the open interval
(0, w)); endpoint parameters canonicalize to nodes.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DisconnectedGraph, UnboundedObjective

__all__ = ["GraphPoint", "MetricGraph", "StarSubgraph"]


@dataclass(frozen=True)
class GraphPoint:
    """A node, or a point at parameter t inside edge ``index``."""

    kind: str  # "node" | "edge"
    index: int
    t: float = 0.0

    @staticmethod
    def node(i):
        return GraphPoint("node", int(i), 0.0)

    def __repr__(self):
        if self.kind == "node":
            return "node(%d)" % self.index
        return "edge(%d, t=%.6g)" % (self.index, self.t)


@dataclass(frozen=True)
class StarSubgraph:
    node: int
    edges: tuple


class MetricGraph:
    """Weighted multigraph with a precomputed node distance matrix.

    Parameters
    ----------
    n_nodes : int
    edges : sequence of (u, v, weight)
        Weight is the metric length of the edge; must be positive.
    """

    def __init__(self, n_nodes, edges):
        self.n_nodes = int(n_nodes)
        if self.n_nodes < 1 or not len(edges):
            raise DisconnectedGraph("graph needs at least one node and one edge")
        self.edge_u = np.asarray([e[0] for e in edges], dtype=np.int64)
        self.edge_v = np.asarray([e[1] for e in edges], dtype=np.int64)
        self.edge_w = np.asarray([e[2] for e in edges], dtype=np.float64)
        if np.any(self.edge_w <= 0):
            raise DisconnectedGraph("edge weights must be positive")
        if self.edge_u.min() < 0 or max(self.edge_u.max(), self.edge_v.max()) >= self.n_nodes:
            raise DisconnectedGraph("edge endpoint out of range")

        D = np.full((self.n_nodes, self.n_nodes), np.inf)
        np.fill_diagonal(D, 0.0)
        for u, v, w in zip(self.edge_u, self.edge_v, self.edge_w):
            if u != v:
                D[u, v] = min(D[u, v], w)
                D[v, u] = min(D[v, u], w)
        for k in range(self.n_nodes):  # Floyd-Warshall; graphs are tiny
            D = np.minimum(D, D[:, k : k + 1] + D[k : k + 1, :])
        if np.isinf(D).any():
            raise DisconnectedGraph("graph is not connected")
        self.node_dist = D

        self.node_edges = [[] for _ in range(self.n_nodes)]
        for e in range(len(self.edge_w)):
            self.node_edges[self.edge_u[e]].append(e)
            if self.edge_v[e] != self.edge_u[e]:
                self.node_edges[self.edge_v[e]].append(e)
        self.node_edges = [tuple(sorted(set(es))) for es in self.node_edges]

    @property
    def n_edges(self):
        return len(self.edge_w)

    # -- points ------------------------------------------------------------

    def point_on_edge(self, e, t):
        """Canonical point at parameter t of edge e (endpoints become nodes)."""
        e = int(e)
        w = float(self.edge_w[e])
        t = float(t)
        if not 0.0 <= t <= w:
            raise ValueError("t=%g outside [0, %g] on edge %d" % (t, w, e))
        if t == 0.0:
            return GraphPoint.node(self.edge_u[e])
        if t == w:
            return GraphPoint.node(self.edge_v[e])
        return GraphPoint("edge", e, t)

    def _node_to_point(self, n, q):
        """Distance from node n to point q."""
        if q.kind == "node":
            return float(self.node_dist[n, q.index])
        e, t = q.index, q.t
        du = self.node_dist[n, self.edge_u[e]] + t
        dv = self.node_dist[n, self.edge_v[e]] + self.edge_w[e] - t
        return float(min(du, dv))

    def distance(self, p, q):
        """Exact shortest-path distance between two canonical points."""
        if p.kind == "node":
            return self._node_to_point(p.index, q)
        if q.kind == "node":
            return self._node_to_point(q.index, p)
        e1, t1 = p.index, p.t
        e2, t2 = q.index, q.t
        w1 = self.edge_w[e1]
        a1, b1 = self.edge_u[e1], self.edge_v[e1]
        a2, b2 = self.edge_u[e2], self.edge_v[e2]
        w2 = self.edge_w[e2]
        best = np.inf
        if e1 == e2:
            best = abs(t1 - t2)
        for d1, n1 in ((t1, a1), (w1 - t1, b1)):
            for d2, n2 in ((t2, a2), (w2 - t2, b2)):
                best = min(best, d1 + self.node_dist[n1, n2] + d2)
        return float(best)

    def star_subgraph(self, node):
        """The node plus all incident edges (self-loops listed once)."""
        if not 0 <= node < self.n_nodes:
            raise ValueError("node %d out of range" % node)
        return StarSubgraph(node=int(node), edges=self.node_edges[node])

    # -- barycenter -----------------------------------------------------------

    def _candidate_edges(self, current):
        if current.kind == "node":
            return list(self.node_edges[current.index])
        e = current.index
        cand = set(self.node_edges[self.edge_u[e]]) | set(self.node_edges[self.edge_v[e]])
        cand.add(e)
        return sorted(cand)

    def _objective(self, p, neighbors):
        return sum(w * self.distance(p, q) ** 2 for q, w in neighbors)

    def barycenter(self, current, neighbors):
        """Weighted squared-distance minimizer over the local candidate region.

        The candidate region is the edge containing ``current`` plus every
        edge incident to its endpoint nodes (the one-ring), which keeps
        relaxation moves local.  Each neighbor contributes a piecewise
        quadratic along a candidate edge; breakpoints are found exactly and
        each piece is minimized in closed form.  Ties break toward the
        smaller edge id, then the smaller parameter.

        Raises
        ------
        UnboundedObjective
            If the neighbor weights sum to a negative value (the quadratic
            coefficient on every candidate edge).
        """
        if not neighbors:
            raise ValueError("neighbor list must be nonempty")
        total_w = sum(w for _q, w in neighbors)
        if total_w < 0:
            raise UnboundedObjective(
                "net-negative neighbor weight %g makes the move unbounded" % total_w
            )

        best_val = self._objective(current, neighbors)
        best_pt = current
        for e in self._candidate_edges(current):
            a_n, b_n = self.edge_u[e], self.edge_v[e]
            w_e = float(self.edge_w[e])
            lines = []  # per neighbor: (weight, A, B, s or None)
            cuts = {0.0, w_e}
            for q, wt in neighbors:
                A = self._node_to_point(a_n, q)
                B = self._node_to_point(b_n, q)
                s = q.t if (q.kind == "edge" and q.index == e) else None
                lines.append((wt, A, B, s))
                for c in self._piece_cuts(A, B, s, w_e):
                    if 0.0 < c < w_e:
                        cuts.add(c)
            grid = sorted(cuts)
            for ta, tb in zip(grid[:-1], grid[1:]):
                tm = 0.5 * (ta + tb)
                qa = qb = qc = 0.0
                for wt, A, B, s in lines:
                    sig, c0 = self._active_piece(tm, A, B, s, w_e)
                    qa += wt
                    qb += 2.0 * wt * sig * c0
                    qc += wt * c0 * c0
                if qa > 0:
                    ts = min(max(-qb / (2.0 * qa), ta), tb)
                elif qb >= 0:
                    ts = ta
                else:
                    ts = tb
                val = (qa * ts + qb) * ts + qc
                if val < best_val or (
                    val == best_val
                    and best_pt.kind == "edge"
                    and (e, ts) < (best_pt.index, best_pt.t)
                ):
                    best_val = val
                    best_pt = self.point_on_edge(e, ts)
        return best_pt

    @staticmethod
    def _piece_cuts(A, B, s, w_e):
        cuts = [0.5 * (w_e + B - A)]
        if s is not None:
            cuts += [s, 0.5 * (s - A), 0.5 * (s + w_e + B)]
        return cuts

    @staticmethod
    def _active_piece(t, A, B, s, w_e):
        """Slope and intercept of the active linear piece of d(t) at t."""
        d_up = t + A
        d_dn = (w_e - t) + B
        sig, c0, d = 1.0, A, d_up
        if d_dn < d:
            sig, c0, d = -1.0, w_e + B, d_dn
        if s is not None:
            if t >= s and t - s < d:
                sig, c0, d = 1.0, -s, t - s
            if t < s and s - t < d:
                sig, c0, d = -1.0, s, s - t
        return sig, c0
