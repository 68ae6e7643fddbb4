"""Metric graphs treated as compact length spaces.

A metric graph is a finite multigraph (loops and parallel edges allowed)
whose edges carry positive lengths.  Its points are the vertices together
with all interior points of edges; distances are infima of route lengths.
Interior-point distances use the closed-form endpoint decomposition, and
the continuous diameter is maximised over a provably sufficient finite
candidate set, so no mesh appears outside of test oracles.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra as _sp_dijkstra

from .errors import DisconnectedGraphError

__all__ = [
    "Edge",
    "EdgePoint",
    "RouteLeg",
    "PathRoute",
    "MetricGraph",
    "DistanceMatrix",
    "DiameterResult",
    "SubdivisionMap",
    "vertex_apsp",
    "point_distance",
    "continuous_diameter",
    "subdivide",
    "shortest_route",
    "vertex_route",
    "points_coincide",
    "point_vertex",
    "validate_route",
    "concat_routes",
    "load_metric_graph",
    "metric_graph_from_json",
    "metric_graph_to_json",
]

_EPS = 1e-12
_TOL = 1e-9


@dataclass(frozen=True)
class Edge:
    id: str
    u: str
    v: str
    length: float


@dataclass(frozen=True)
class EdgePoint:
    """A point of the graph: an offset along an edge, measured from endpoint u.

    Offsets 0 and length(edge) identify with the endpoint vertices.
    """

    edge: str
    offset: float


@dataclass(frozen=True)
class RouteLeg:
    """A monotone traversal of one edge from offset ``start`` to ``end``."""

    edge: str
    start: float
    end: float

    @property
    def length(self) -> float:
        return abs(self.end - self.start)

    def reversed(self) -> "RouteLeg":
        return RouteLeg(self.edge, self.end, self.start)


@dataclass(frozen=True)
class PathRoute:
    """A rectifiable route: a chain of edge-portions with matching endpoints.

    ``anchor`` carries the position of a zero-length route; it is ignored
    when ``legs`` is nonempty.
    """

    legs: tuple[RouteLeg, ...]
    anchor: EdgePoint | None = None

    @staticmethod
    def empty(at: EdgePoint) -> "PathRoute":
        return PathRoute((), at)

    @staticmethod
    def from_legs(legs: Iterable[RouteLeg], anchor_if_empty: EdgePoint | None = None) -> "PathRoute":
        legs = tuple(l for l in legs if l.start != l.end)
        if legs:
            return PathRoute(legs, None)
        if anchor_if_empty is None:
            raise ValueError("an empty route needs an anchor point")
        return PathRoute((), anchor_if_empty)

    @property
    def is_empty(self) -> bool:
        return not self.legs

    @property
    def start(self) -> EdgePoint:
        if self.legs:
            return EdgePoint(self.legs[0].edge, self.legs[0].start)
        assert self.anchor is not None
        return self.anchor

    @property
    def end(self) -> EdgePoint:
        if self.legs:
            return EdgePoint(self.legs[-1].edge, self.legs[-1].end)
        assert self.anchor is not None
        return self.anchor

    @property
    def length(self) -> float:
        return float(sum(l.length for l in self.legs))

    def reversed(self) -> "PathRoute":
        return PathRoute(tuple(l.reversed() for l in reversed(self.legs)), self.anchor)

    def point_at(self, arclength: float) -> EdgePoint:
        """Point at the given arclength from the start (clamped to the route)."""
        if not self.legs:
            assert self.anchor is not None
            return self.anchor
        remaining = max(0.0, arclength)
        for leg in self.legs:
            if remaining <= leg.length:
                frac = remaining / leg.length if leg.length > 0 else 0.0
                return EdgePoint(leg.edge, leg.start + (leg.end - leg.start) * frac)
            remaining -= leg.length
        return self.end

    def split_at(self, arclengths: Sequence[float]) -> tuple["PathRoute", ...]:
        """Split into consecutive sub-routes at strictly increasing interior arclengths."""
        cuts = list(arclengths)
        if any(b <= a for a, b in zip(cuts, cuts[1:])):
            raise ValueError("arclengths must be strictly increasing")
        if cuts and (cuts[0] <= 0 or cuts[-1] >= self.length + _EPS):
            raise ValueError("arclengths must lie strictly inside the route")
        pieces: list[PathRoute] = []
        current: list[RouteLeg] = []
        acc = 0.0
        cut_iter = iter(cuts + [math.inf])
        next_cut = next(cut_iter)
        last_point = self.start
        for leg in self.legs:
            pos = 0.0  # consumed portion of this leg
            while next_cut <= acc + leg.length - _EPS:
                local = next_cut - acc
                frac = local / leg.length
                mid = leg.start + (leg.end - leg.start) * frac
                piece_leg = RouteLeg(leg.edge, leg.start + (leg.end - leg.start) * (pos / leg.length), mid)
                current.append(piece_leg)
                pieces.append(PathRoute.from_legs(current, anchor_if_empty=last_point))
                last_point = EdgePoint(leg.edge, mid)
                current = []
                pos = local
                next_cut = next(cut_iter)
            start_off = leg.start + (leg.end - leg.start) * (pos / leg.length)
            current.append(RouteLeg(leg.edge, start_off, leg.end))
            acc += leg.length
            if abs(next_cut - acc) <= _EPS:
                pieces.append(PathRoute.from_legs(current, anchor_if_empty=last_point))
                last_point = EdgePoint(leg.edge, leg.end)
                current = []
                next_cut = next(cut_iter)
        pieces.append(PathRoute.from_legs(current, anchor_if_empty=last_point))
        return tuple(pieces)


class MetricGraph:
    """Immutable weighted multigraph with positive edge lengths."""

    def __init__(
        self,
        vertices: Iterable[str],
        edges: Iterable[Edge | tuple | dict],
        *,
        require_connected: bool = True,
    ):
        vs = [str(v) for v in vertices]
        if len(set(vs)) != len(vs):
            raise ValueError("duplicate vertex ids")
        if not vs:
            raise ValueError("a metric graph needs at least one vertex")
        self.vertices: tuple[str, ...] = tuple(sorted(vs))
        self._vindex = {v: i for i, v in enumerate(self.vertices)}

        norm: list[Edge] = []
        for e in edges:
            if isinstance(e, Edge):
                pass
            elif isinstance(e, dict):
                e = Edge(str(e["id"]), str(e["u"]), str(e["v"]), float(e["length"]))
            else:
                eid, u, v, length = e
                e = Edge(str(eid), str(u), str(v), float(length))
            if e.u not in self._vindex or e.v not in self._vindex:
                raise ValueError(f"edge {e.id!r} references an unknown vertex")
            if not (e.length > 0) or not math.isfinite(e.length):
                raise ValueError(f"edge {e.id!r} has nonpositive length {e.length}")
            norm.append(e)
        ids = [e.id for e in norm]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate edge ids")
        self.edges: tuple[Edge, ...] = tuple(sorted(norm, key=lambda e: e.id))
        self._eindex = {e.id: e for e in self.edges}

        incident: dict[str, list[tuple[Edge, str]]] = {v: [] for v in self.vertices}
        for e in self.edges:
            incident[e.u].append((e, "u"))
            incident[e.v].append((e, "v"))
        self._incident = {
            v: tuple(sorted(ends, key=lambda t: (t[0].id, t[1]))) for v, ends in incident.items()
        }

        self.is_connected = self._check_connected()
        if require_connected and not self.is_connected:
            raise DisconnectedGraphError("metric graph is not connected")

        self._apsp_cache: DistanceMatrix | None = None
        self._sssp_cache: dict[str, tuple[dict[str, float], dict[str, tuple[str, str]]]] = {}

    # -- basic access -------------------------------------------------

    def edge(self, eid: str) -> Edge:
        try:
            return self._eindex[eid]
        except KeyError:
            raise ValueError(f"unknown edge id {eid!r}") from None

    def has_vertex(self, v: str) -> bool:
        return v in self._vindex

    def vertex_index(self, v: str) -> int:
        return self._vindex[v]

    def incident(self, v: str) -> tuple[tuple[Edge, str], ...]:
        """Edge-ends at v; a loop contributes both of its ends."""
        return self._incident[v]

    def neighbors(self, v: str) -> Iterator[tuple[Edge, str]]:
        """(edge, opposite endpoint) for every edge-end at v, in sorted order."""
        for e, side in self._incident[v]:
            yield e, (e.v if side == "u" else e.u)

    def check_point(self, p: EdgePoint) -> Edge:
        e = self.edge(p.edge)
        if not (-_TOL <= p.offset <= e.length + _TOL):
            raise ValueError(
                f"offset {p.offset} out of range [0, {e.length}] on edge {p.edge!r}"
            )
        return e

    def vertex_point(self, v: str) -> EdgePoint:
        """A canonical EdgePoint representation of a vertex."""
        ends = self._incident[v]
        if not ends:
            raise ValueError(f"vertex {v!r} has no incident edge")
        e, side = ends[0]
        return EdgePoint(e.id, 0.0 if side == "u" else e.length)

    def _check_connected(self) -> bool:
        seen = {self.vertices[0]}
        stack = [self.vertices[0]]
        while stack:
            v = stack.pop()
            for _, w in self.neighbors(v):
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == len(self.vertices)

    # -- shortest paths -----------------------------------------------

    def apsp(self) -> "DistanceMatrix":
        if self._apsp_cache is None:
            n = len(self.vertices)
            best: dict[tuple[int, int], float] = {}
            for e in self.edges:
                i, j = self._vindex[e.u], self._vindex[e.v]
                if i == j:
                    continue
                key = (min(i, j), max(i, j))
                if key not in best or e.length < best[key]:
                    best[key] = e.length
            if best:
                rows, cols, data = zip(*((i, j, l) for (i, j), l in best.items()))
                mat = csr_matrix((data, (rows, cols)), shape=(n, n))
            else:
                mat = csr_matrix((n, n))
            values = _sp_dijkstra(mat, directed=False)
            self._apsp_cache = DistanceMatrix(self.vertices, values)
        return self._apsp_cache

    def vertex_distance(self, u: str, v: str) -> float:
        return self.apsp().get(u, v)

    def single_source(self, source: str) -> tuple[dict[str, float], dict[str, tuple[str, str]]]:
        """Deterministic Dijkstra with parent edges: parent[v] = (edge id, previous vertex)."""
        if source in self._sssp_cache:
            return self._sssp_cache[source]
        if source not in self._vindex:
            raise ValueError(f"unknown vertex {source!r}")
        dist: dict[str, float] = {source: 0.0}
        parent: dict[str, tuple[str, str]] = {}
        done: set[str] = set()
        heap: list[tuple[float, str]] = [(0.0, source)]
        while heap:
            d, v = heapq.heappop(heap)
            if v in done:
                continue
            done.add(v)
            for e, w in self.neighbors(v):
                nd = d + e.length
                if w not in dist or nd < dist[w]:
                    dist[w] = nd
                    parent[w] = (e.id, v)
                    heapq.heappush(heap, (nd, w))
        self._sssp_cache[source] = (dist, parent)
        return dist, parent

    # -- serialization ------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "vertices": list(self.vertices),
            "edges": [
                {"id": e.id, "u": e.u, "v": e.v, "length": e.length} for e in self.edges
            ],
        }


@dataclass(frozen=True)
class DistanceMatrix:
    """Vertex all-pairs shortest-path distances, indexed by sorted vertex order."""

    vertices: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "_idx", {v: i for i, v in enumerate(self.vertices)})

    def get(self, u: str, v: str) -> float:
        return float(self.values[self._idx[u], self._idx[v]])


def vertex_apsp(g: MetricGraph) -> DistanceMatrix:
    """All-pairs shortest-path distances between vertices."""
    return g.apsp()


# -- point utilities ---------------------------------------------------


def point_vertex(g: MetricGraph, p: EdgePoint, tol: float = _TOL) -> str | None:
    """The vertex a point sits on, or None for interior points."""
    e = g.check_point(p)
    if abs(p.offset) <= tol:
        return e.u
    if abs(p.offset - e.length) <= tol:
        return e.v
    return None


def points_coincide(g: MetricGraph, p: EdgePoint, q: EdgePoint, tol: float = _TOL) -> bool:
    """Whether two edge points denote the same point of the length space."""
    if p.edge == q.edge and abs(p.offset - q.offset) <= tol:
        return True
    vp, vq = point_vertex(g, p, tol), point_vertex(g, q, tol)
    return vp is not None and vp == vq


def point_distance(g: MetricGraph, x: EdgePoint, y: EdgePoint) -> float:
    """Exact length-space distance between two points of the graph."""
    ex = g.check_point(x)
    ey = g.check_point(y)
    best = math.inf
    if x.edge == y.edge:
        best = abs(x.offset - y.offset)
    dm = g.apsp()
    for vx, cx in ((ex.u, x.offset), (ex.v, ex.length - x.offset)):
        for vy, cy in ((ey.u, y.offset), (ey.v, ey.length - y.offset)):
            cand = cx + dm.get(vx, vy) + cy
            if cand < best:
                best = cand
    return best


# -- routes ------------------------------------------------------------


def validate_route(g: MetricGraph, route: PathRoute, tol: float = _TOL) -> None:
    """Check that a route is a well-chained sequence of edge portions of g."""
    if route.is_empty:
        g.check_point(route.start)
        return
    prev_end: EdgePoint | None = None
    for leg in route.legs:
        g.check_point(EdgePoint(leg.edge, leg.start))
        g.check_point(EdgePoint(leg.edge, leg.end))
        here = EdgePoint(leg.edge, leg.start)
        if prev_end is not None and not points_coincide(g, prev_end, here, tol):
            raise ValueError(f"route legs do not chain at {prev_end} -> {here}")
        prev_end = EdgePoint(leg.edge, leg.end)


def concat_routes(g: MetricGraph, *routes: PathRoute) -> PathRoute:
    """Concatenate routes whose consecutive endpoints coincide."""
    routes = tuple(r for r in routes)
    if not routes:
        raise ValueError("nothing to concatenate")
    legs: list[RouteLeg] = []
    for prev, nxt in zip(routes, routes[1:]):
        if not points_coincide(g, prev.end, nxt.start):
            raise ValueError(f"routes do not chain: {prev.end} -> {nxt.start}")
    for r in routes:
        legs.extend(r.legs)
    return PathRoute.from_legs(legs, anchor_if_empty=routes[0].start)


def vertex_route(g: MetricGraph, a: str, b: str) -> PathRoute:
    """A shortest route between two vertices, as explicit full-edge legs."""
    dist, parent = g.single_source(a)
    if b not in dist:
        raise DisconnectedGraphError(f"no route from {a!r} to {b!r}")
    legs: list[RouteLeg] = []
    v = b
    while v != a:
        eid, prev = parent[v]
        e = g.edge(eid)
        if e.u == prev and (e.v == v or e.u == e.v):
            legs.append(RouteLeg(eid, 0.0, e.length))
        else:
            legs.append(RouteLeg(eid, e.length, 0.0))
        v = prev
    legs.reverse()
    anchor = g.vertex_point(a) if not legs else None
    return PathRoute.from_legs(legs, anchor_if_empty=anchor)


def shortest_route(g: MetricGraph, x: EdgePoint, y: EdgePoint) -> PathRoute:
    """An explicit shortest route between two points; length equals point_distance."""
    ex = g.check_point(x)
    ey = g.check_point(y)
    dm = g.apsp()

    candidates: list[tuple[float, int]] = []
    if x.edge == y.edge:
        candidates.append((abs(x.offset - y.offset), -1))
    exits_x = ((ex.u, x.offset, 0.0), (ex.v, ex.length - x.offset, ex.length))
    exits_y = ((ey.u, y.offset, 0.0), (ey.v, ey.length - y.offset, ey.length))
    for i, (vx, cx, _) in enumerate(exits_x):
        for j, (vy, cy, _) in enumerate(exits_y):
            candidates.append((cx + dm.get(vx, vy) + cy, 2 * i + j))
    best_len, best_kind = min(candidates, key=lambda t: (t[0], t[1]))
    if best_kind == -1:
        return PathRoute.from_legs([RouteLeg(x.edge, x.offset, y.offset)], anchor_if_empty=x)
    i, j = divmod(best_kind, 2)
    vx, _, off_x = exits_x[i]
    vy, _, off_y = exits_y[j]
    legs = [RouteLeg(x.edge, x.offset, off_x)]
    legs.extend(vertex_route(g, vx, vy).legs)
    legs.append(RouteLeg(y.edge, off_y, y.offset))
    return PathRoute.from_legs(legs, anchor_if_empty=x)


# -- continuous diameter ------------------------------------------------


@dataclass(frozen=True)
class DiameterResult:
    value: float
    witness: tuple[EdgePoint, EdgePoint] | None


def _corner_distances(dm: np.ndarray, vidx, edges, ii, jj):
    """Arrays A,B,C,E of endpoint distances for the edge pairs (ii, jj)."""
    u = np.array([vidx[e.u] for e in edges])
    v = np.array([vidx[e.v] for e in edges])
    A = dm[u[ii], u[jj]]
    B = dm[u[ii], v[jj]]
    C = dm[v[ii], u[jj]]
    E = dm[v[ii], v[jj]]
    return A, B, C, E


def _cross_lines(A, B, C, E, Li, Lj, zeros):
    # Equality lines of the four corner-route linear pieces, plus the
    # rectangle sides; every breakpoint of the min lies on two of these.
    return [
        (0.0, 1.0, (B + Lj - A) / 2.0),
        (0.0, 1.0, (E + Lj - C) / 2.0),
        (1.0, 0.0, (C + Li - A) / 2.0),
        (1.0, 0.0, (E + Li - B) / 2.0),
        (1.0, 1.0, (E - A + Li + Lj) / 2.0),
        (1.0, -1.0, (C - B + Li - Lj) / 2.0),
        (1.0, 0.0, zeros),
        (1.0, 0.0, Li),
        (0.0, 1.0, zeros),
        (0.0, 1.0, Lj),
    ]


def _cross_eval(A, B, C, E, Li, Lj, s, t):
    f1 = s + t + A
    f2 = s - t + B + Lj
    f3 = -s + t + C + Li
    f4 = -s - t + E + Li + Lj
    return np.minimum(np.minimum(f1, f2), np.minimum(f3, f4))


def _iter_cross_candidates(A, B, C, E, Li, Lj):
    """Yield (s, t, value) arrays for every candidate point of the edge pairs."""
    zeros = np.zeros_like(Li)
    lines = _cross_lines(A, B, C, E, Li, Lj, zeros)
    for a in range(len(lines)):
        p1, q1, r1 = lines[a]
        for b in range(a + 1, len(lines)):
            p2, q2, r2 = lines[b]
            det = p1 * q2 - p2 * q1
            if abs(det) < 1e-14:
                continue
            s = (r1 * q2 - r2 * q1) / det
            t = (p1 * r2 - p2 * r1) / det
            mask = (s >= -_TOL) & (s <= Li + _TOL) & (t >= -_TOL) & (t <= Lj + _TOL)
            if not mask.any():
                continue
            s = np.clip(s, 0.0, Li)
            t = np.clip(t, 0.0, Lj)
            val = np.where(mask, _cross_eval(A, B, C, E, Li, Lj, s, t), -np.inf)
            yield s, t, val


def _same_edge_candidates(e: Edge, d_uv: float):
    """Candidate (s, t, value) list for both points on one edge."""
    L = e.length
    # coefficient triples (a, b, c) meaning a*s + b*t + c
    fns = [
        (1.0, 1.0, 0.0),          # exit u / enter u
        (1.0, -1.0, d_uv + L),    # exit u / enter v
        (-1.0, 1.0, d_uv + L),    # exit v / enter u
        (-1.0, -1.0, 2.0 * L),    # exit v / enter v
        (1.0, -1.0, 0.0),         # direct, s >= t branch
        (-1.0, 1.0, 0.0),         # direct, t >= s branch
    ]
    lines = []
    for i in range(len(fns)):
        a1, b1, c1 = fns[i]
        for j in range(i + 1, len(fns)):
            a2, b2, c2 = fns[j]
            da, db, dc = a1 - a2, b1 - b2, c1 - c2
            if abs(da) < 1e-14 and abs(db) < 1e-14:
                continue
            lines.append((da, db, -dc))
    lines.extend([(1.0, 0.0, 0.0), (1.0, 0.0, L), (0.0, 1.0, 0.0), (0.0, 1.0, L)])

    def value(s: float, t: float) -> float:
        corners = min(s + t, s - t + d_uv + L, -s + t + d_uv + L, 2 * L - s - t)
        return min(corners, abs(s - t))

    out = []
    for a in range(len(lines)):
        p1, q1, r1 = lines[a]
        for b in range(a + 1, len(lines)):
            p2, q2, r2 = lines[b]
            det = p1 * q2 - p2 * q1
            if abs(det) < 1e-14:
                continue
            s = (r1 * q2 - r2 * q1) / det
            t = (p1 * r2 - p2 * r1) / det
            if -_TOL <= s <= L + _TOL and -_TOL <= t <= L + _TOL:
                s = min(max(s, 0.0), L) + 0.0
                t = min(max(t, 0.0), L) + 0.0
                out.append((s, t, value(s, t)))
    return out


_PAIR_CHUNK = 200_000


def continuous_diameter(g: MetricGraph) -> DiameterResult:
    """Maximum distance over all point pairs, edge interiors included.

    Per edge pair the distance is a min of linear functions of the two
    offsets; its maximum over the offset rectangle is attained at a corner
    or at a crossing of two of the defining lines, so evaluating that
    finite candidate set is exact.
    """
    if not g.is_connected:
        raise DisconnectedGraphError("continuous diameter needs a connected graph")
    m = len(g.edges)
    if m == 0:
        return DiameterResult(0.0, None)

    dm = g.apsp().values
    vidx = g._vindex
    edges = g.edges
    Lall = np.array([e.length for e in edges])

    best = -math.inf
    # cross-edge pairs, vectorised in chunks
    ii_all, jj_all = np.triu_indices(m, k=1)
    for lo in range(0, len(ii_all), _PAIR_CHUNK):
        ii = ii_all[lo : lo + _PAIR_CHUNK]
        jj = jj_all[lo : lo + _PAIR_CHUNK]
        A, B, C, E = _corner_distances(dm, vidx, edges, ii, jj)
        Li, Lj = Lall[ii], Lall[jj]
        for _, _, val in _iter_cross_candidates(A, B, C, E, Li, Lj):
            vmax = float(val.max())
            if vmax > best:
                best = vmax
    # same-edge pairs
    for e in edges:
        d_uv = float(dm[vidx[e.u], vidx[e.v]])
        for _, _, val in _same_edge_candidates(e, d_uv):
            if val > best:
                best = val

    # second pass: gather near-optimal witnesses, break ties lexicographically
    witnesses: list[tuple[tuple[str, float], tuple[str, float]]] = []
    thresh = best - 1e-12
    for lo in range(0, len(ii_all), _PAIR_CHUNK):
        ii = ii_all[lo : lo + _PAIR_CHUNK]
        jj = jj_all[lo : lo + _PAIR_CHUNK]
        A, B, C, E = _corner_distances(dm, vidx, edges, ii, jj)
        Li, Lj = Lall[ii], Lall[jj]
        for s, t, val in _iter_cross_candidates(A, B, C, E, Li, Lj):
            hits = np.nonzero(val >= thresh)[0]
            for k in hits:
                a = (edges[ii[k]].id, float(s[k]) + 0.0)
                b = (edges[jj[k]].id, float(t[k]) + 0.0)
                witnesses.append((a, b) if a <= b else (b, a))
    for e in edges:
        d_uv = float(dm[vidx[e.u], vidx[e.v]])
        for s, t, val in _same_edge_candidates(e, d_uv):
            if val >= thresh:
                a, b = (e.id, s), (e.id, t)
                witnesses.append((a, b) if a <= b else (b, a))

    wa, wb = min(witnesses)
    witness = (EdgePoint(wa[0], wa[1]), EdgePoint(wb[0], wb[1]))
    value = point_distance(g, witness[0], witness[1])
    assert abs(value - best) <= 1e-9
    return DiameterResult(value, witness)


# -- subdivision --------------------------------------------------------


class SubdivisionMap:
    """Point correspondence between a graph and its subdivision."""

    def __init__(self, base: MetricGraph, refined: MetricGraph,
                 pieces: dict[str, tuple[str, ...]], piece_length: dict[str, float]):
        self.base = base
        self.refined = refined
        self._pieces = pieces
        self._piece_length = piece_length
        self._parent: dict[str, tuple[str, int]] = {}
        for eid, subs in pieces.items():
            for k, sub in enumerate(subs):
                self._parent[sub] = (eid, k)

    def pieces(self, eid: str) -> tuple[str, ...]:
        return self._pieces[eid]

    def parent(self, sub_eid: str) -> tuple[str, int]:
        return self._parent[sub_eid]

    def map_point(self, p: EdgePoint) -> EdgePoint:
        """The same point, in coordinates of the refined graph."""
        self.base.check_point(p)
        subs = self._pieces[p.edge]
        if len(subs) == 1:
            return EdgePoint(subs[0], p.offset)
        h = self._piece_length[p.edge]
        k = min(int(p.offset / h), len(subs) - 1)
        return EdgePoint(subs[k], min(max(p.offset - k * h, 0.0), h))

    def point_to_base(self, p: EdgePoint) -> EdgePoint:
        """The same point, in coordinates of the base graph."""
        self.refined.check_point(p)
        eid, k = self._parent[p.edge]
        h = self._piece_length[eid]
        return EdgePoint(eid, k * h + p.offset)

    def route_to_base(self, route: PathRoute) -> PathRoute:
        """Rewrite a route of the refined graph in base-graph coordinates."""
        if route.is_empty:
            return PathRoute.empty(self.point_to_base(route.start))
        legs: list[RouteLeg] = []
        for leg in route.legs:
            eid, k = self._parent[leg.edge]
            h = self._piece_length[eid]
            a, b = k * h + leg.start, k * h + leg.end
            if legs and legs[-1].edge == eid and legs[-1].end == a and (
                (legs[-1].end - legs[-1].start) * (b - a) > 0
            ):
                legs[-1] = RouteLeg(eid, legs[-1].start, b)
            else:
                legs.append(RouteLeg(eid, a, b))
        return PathRoute.from_legs(legs, anchor_if_empty=self.point_to_base(route.start))


def subdivide(g: MetricGraph, max_piece: float) -> tuple[MetricGraph, SubdivisionMap]:
    """Split every edge into pieces of length at most max_piece.

    Distances between corresponding points are preserved exactly.
    """
    if not (max_piece > 0):
        raise ValueError("max_piece must be positive")
    vertices = list(g.vertices)
    used = set(vertices)
    new_edges: list[Edge] = []
    pieces: dict[str, tuple[str, ...]] = {}
    piece_length: dict[str, float] = {}
    for e in g.edges:
        k = max(1, math.ceil(e.length / max_piece - 1e-12))
        piece_length[e.id] = e.length / k
        if k == 1:
            new_edges.append(e)
            pieces[e.id] = (e.id,)
            continue
        h = e.length / k
        chain = [e.u]
        for i in range(1, k):
            name = f"{e.id}:v{i}"
            while name in used:
                name += "+"
            used.add(name)
            vertices.append(name)
            chain.append(name)
        chain.append(e.v)
        sub_ids = []
        for i in range(k):
            sub_ids.append(f"{e.id}:{i}")
            new_edges.append(Edge(sub_ids[-1], chain[i], chain[i + 1], h))
        pieces[e.id] = tuple(sub_ids)
    refined = MetricGraph(vertices, new_edges, require_connected=g.is_connected)
    return refined, SubdivisionMap(g, refined, pieces, piece_length)


# -- file format ---------------------------------------------------------


def metric_graph_from_json(obj: dict) -> MetricGraph:
    if not isinstance(obj, dict) or "vertices" not in obj or "edges" not in obj:
        raise ValueError("graph file must contain 'vertices' and 'edges'")
    edges = []
    for rec in obj["edges"]:
        try:
            edges.append(Edge(str(rec["id"]), str(rec["u"]), str(rec["v"]), float(rec["length"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed edge record {rec!r}: {exc}") from None
    return MetricGraph(obj["vertices"], edges)


def metric_graph_to_json(g: MetricGraph) -> dict:
    return g.to_json_dict()


def load_metric_graph(path) -> MetricGraph:
    with open(path, "r", encoding="utf-8") as fh:
        return metric_graph_from_json(json.load(fh))
