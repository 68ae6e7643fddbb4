"""Finite covers of metric graphs via permutation voltages.

Traversing a base edge e from u to v sends sheet s to sigma_e(s); the
derived graph has vertices (v, s) and edges (e, s) of the same length as
e, named "v@s" and "e@s".  Unique path lifting, deck transformations, the
n-times-diameter bound check, and the constructive route shortening all
live here.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import DisconnectedCoverError, PathNotLongEnough
from .metric_graph import (
    DiameterResult,
    Edge,
    EdgePoint,
    MetricGraph,
    PathRoute,
    RouteLeg,
    concat_routes,
    continuous_diameter,
    points_coincide,
    point_vertex,
    shortest_route,
    validate_route,
)

__all__ = [
    "Voltage",
    "CoveringGraph",
    "ConnectivityReport",
    "DeckTransformation",
    "CoverBoundReport",
    "ShorteningTrace",
    "derive_cover",
    "is_connected_cover",
    "lift_path",
    "lift_path_ending_at",
    "deck_transformations",
    "verify_diameter_bound",
    "pigeonhole_shorten",
    "shorten_until_bound",
    "voltage_from_json",
    "voltage_to_json",
    "load_voltage",
]

_TOL = 1e-9


class Voltage:
    """A permutation of {0..n-1} per base edge."""

    def __init__(self, sheets: int, assignment: Mapping[str, Sequence[int]]):
        if sheets < 1:
            raise ValueError("sheet count must be at least 1")
        self.sheets = int(sheets)
        perms: dict[str, tuple[int, ...]] = {}
        for eid, perm in assignment.items():
            perm = tuple(int(x) for x in perm)
            if sorted(perm) != list(range(self.sheets)):
                raise ValueError(f"voltage for edge {eid!r} is not a permutation of 0..{self.sheets - 1}")
            perms[str(eid)] = perm
        self.assignment = perms

    def perm(self, eid: str) -> tuple[int, ...]:
        return self.assignment[eid]

    def inverse_perm(self, eid: str) -> tuple[int, ...]:
        perm = self.assignment[eid]
        inv = [0] * self.sheets
        for i, img in enumerate(perm):
            inv[img] = i
        return tuple(inv)


def voltage_from_json(obj: dict) -> Voltage:
    try:
        return Voltage(int(obj["sheets"]), obj["voltages"])
    except KeyError as exc:
        raise ValueError(f"malformed voltage file: missing {exc}") from None


def voltage_to_json(v: Voltage) -> dict:
    return {"sheets": v.sheets, "voltages": {e: list(p) for e, p in sorted(v.assignment.items())}}


def load_voltage(path) -> Voltage:
    with open(path, "r", encoding="utf-8") as fh:
        return voltage_from_json(json.load(fh))


class CoveringGraph:
    """Derived graph of a voltage assignment, with projection and lifts."""

    def __init__(self, base: MetricGraph, voltage: Voltage, graph: MetricGraph,
                 vlift: dict, elift: dict, vproj: dict, eproj: dict):
        self.base = base
        self.voltage = voltage
        self.sheets = voltage.sheets
        self.graph = graph
        self._vlift = vlift
        self._elift = elift
        self._vproj = vproj
        self._eproj = eproj
        self._base_diameter: DiameterResult | None = None

    # -- naming and projection ---------------------------------------

    def lift_vertex(self, v: str, sheet: int) -> str:
        return self._vlift[(v, sheet)]

    def lift_edge(self, e: str, sheet: int) -> str:
        return self._elift[(e, sheet)]

    def project_vertex(self, dv: str) -> tuple[str, int]:
        return self._vproj[dv]

    def project_edge(self, de: str) -> tuple[str, int]:
        return self._eproj[de]

    def project_point(self, p: EdgePoint) -> EdgePoint:
        self.graph.check_point(p)
        return EdgePoint(self._eproj[p.edge][0], p.offset)

    def lift_point(self, p: EdgePoint, sheet: int) -> EdgePoint:
        """The preimage of p on the derived copy (edge, sheet)."""
        self.base.check_point(p)
        return EdgePoint(self.lift_edge(p.edge, sheet), p.offset)

    def project_route(self, route: PathRoute) -> PathRoute:
        legs = [RouteLeg(self._eproj[l.edge][0], l.start, l.end) for l in route.legs]
        anchor = self.project_point(route.anchor) if route.anchor is not None else None
        return PathRoute(tuple(legs), anchor)

    def fiber_sheet(self, p: EdgePoint) -> int:
        """Index of a derived point within the fiber of its projection.

        Interior points are indexed by the sheet of their derived edge,
        vertex points by the sheet of their derived vertex; either way, two
        points in one fiber coincide iff their indices agree.
        """
        v = point_vertex(self.graph, p)
        if v is not None:
            return self._vproj[v][1]
        return self._eproj[p.edge][1]

    def base_diameter(self) -> DiameterResult:
        if self._base_diameter is None:
            self._base_diameter = continuous_diameter(self.base)
        return self._base_diameter


def derive_cover(g: MetricGraph, v: Voltage) -> CoveringGraph:
    """Build the derived graph; connectivity is reported separately."""
    missing = [e.id for e in g.edges if e.id not in v.assignment]
    if missing:
        raise ValueError(f"voltage missing assignment for edges {missing}")
    unknown = [eid for eid in v.assignment if eid not in {e.id for e in g.edges}]
    if unknown:
        raise ValueError(f"voltage assigns unknown edges {unknown}")
    for name in list(g.vertices) + [e.id for e in g.edges]:
        if "@" in name:
            raise ValueError(f"base id {name!r} must not contain '@'")

    n = v.sheets
    vlift = {}
    vproj = {}
    vertices = []
    for base_v in g.vertices:
        for s in range(n):
            name = f"{base_v}@{s}"
            vlift[(base_v, s)] = name
            vproj[name] = (base_v, s)
            vertices.append(name)
    elift = {}
    eproj = {}
    edges = []
    for e in g.edges:
        perm = v.perm(e.id)
        for s in range(n):
            name = f"{e.id}@{s}"
            elift[(e.id, s)] = name
            eproj[name] = (e.id, s)
            edges.append(Edge(name, vlift[(e.u, s)], vlift[(e.v, perm[s])], e.length))
    derived = MetricGraph(vertices, edges, require_connected=False)
    cover = CoveringGraph(g, v, derived, vlift, elift, vproj, eproj)
    _check_cover_invariants(cover)
    return cover


def _check_cover_invariants(c: CoveringGraph) -> None:
    n = c.sheets
    assert len(c.graph.vertices) == n * len(c.base.vertices)
    assert len(c.graph.edges) == n * len(c.base.edges)
    for e in c.graph.edges:
        assert e.length == c.base.edge(c.project_edge(e.id)[0]).length
    # the star of each derived vertex maps bijectively onto the base star
    for dv in c.graph.vertices:
        base_v, _ = c.project_vertex(dv)
        derived_star = sorted(
            (c.project_edge(e.id)[0], side) for e, side in c.graph.incident(dv)
        )
        base_star = sorted((e.id, side) for e, side in c.base.incident(base_v))
        assert derived_star == base_star, f"star at {dv} does not project bijectively"


@dataclass(frozen=True)
class ConnectivityReport:
    connected: bool
    orbits: tuple[tuple[int, ...], ...]


def is_connected_cover(c: CoveringGraph) -> ConnectivityReport:
    """Connectivity of the derived graph, with the sheet orbit structure.

    Sheets s, t share an orbit iff the fiber points over the root vertex
    lie in one component; the cover is connected iff there is one orbit
    (the monodromy action is transitive).
    """
    comp: dict[str, int] = {}
    next_id = 0
    for start in c.graph.vertices:
        if start in comp:
            continue
        comp[start] = next_id
        stack = [start]
        while stack:
            x = stack.pop()
            for _, y in c.graph.neighbors(x):
                if y not in comp:
                    comp[y] = next_id
                    stack.append(y)
        next_id += 1
    root = c.base.vertices[0]
    orbit_members: dict[int, list[int]] = {}
    for s in range(c.sheets):
        orbit_members.setdefault(comp[c.lift_vertex(root, s)], []).append(s)
    orbits = tuple(tuple(sorted(v)) for _, v in sorted(orbit_members.items()))
    return ConnectivityReport(next_id == 1, orbits)


# ------------------------------------------------------------- lifting


def _endpoint_side(offset: float, length: float, tol: float = _TOL) -> str | None:
    if abs(offset) <= tol:
        return "u"
    if abs(offset - length) <= tol:
        return "v"
    return None


def _lift_route_at(c: CoveringGraph, route: PathRoute, start: EdgePoint) -> PathRoute:
    """The unique lift of a base route beginning at the given derived point."""
    validate_route(c.base, route)
    c.graph.check_point(start)
    if not points_coincide(c.base, c.project_point(start), route.start):
        raise ValueError("start point does not project to the route's start")
    if route.is_empty:
        return PathRoute.empty(start)

    # position state: either inside a specific derived edge, or at a derived vertex
    start_edge = c.graph.edge(start.edge)
    side = _endpoint_side(start.offset, start_edge.length)
    at_vertex: str | None = None
    on_edge: str | None = None
    if side is None:
        on_edge = start.edge
    else:
        at_vertex = start_edge.u if side == "u" else start_edge.v

    legs: list[RouteLeg] = []
    for leg in route.legs:
        base_edge = c.base.edge(leg.edge)
        if on_edge is not None:
            derived_id = on_edge
            if c.project_edge(derived_id)[0] != leg.edge:
                raise ValueError("route leaves an edge interior inconsistently")
        else:
            assert at_vertex is not None
            entry = _endpoint_side(leg.start, base_edge.length)
            if entry is None:
                raise ValueError("route jumps to an edge interior")
            sheet = c.project_vertex(at_vertex)[1]
            if entry == "u":
                derived_id = c.lift_edge(leg.edge, sheet)
            else:
                derived_id = c.lift_edge(leg.edge, c.voltage.inverse_perm(leg.edge)[sheet])
        legs.append(RouteLeg(derived_id, leg.start, leg.end))
        exit_side = _endpoint_side(leg.end, base_edge.length)
        if exit_side is None:
            on_edge, at_vertex = derived_id, None
        else:
            de = c.graph.edge(derived_id)
            on_edge, at_vertex = None, (de.u if exit_side == "u" else de.v)
    return PathRoute.from_legs(legs, anchor_if_empty=start)


def lift_path(c: CoveringGraph, base: PathRoute, start_sheet: int) -> PathRoute:
    """The unique lift starting on the derived copy (first edge, start_sheet).

    Projects back to the input with identical length.
    """
    if not (0 <= start_sheet < c.sheets):
        raise ValueError(f"sheet {start_sheet} out of range")
    start = c.lift_point(base.start, start_sheet)
    return _lift_route_at(c, base, start)


def lift_path_ending_at(c: CoveringGraph, base: PathRoute, end: EdgePoint) -> PathRoute:
    """The unique lift whose endpoint is the given derived point."""
    return _lift_route_at(c, base.reversed(), end).reversed()


# ---------------------------------------------------- deck transformations


@dataclass(frozen=True)
class DeckTransformation:
    """A cover self-isomorphism over the base, as vertex and edge relabelings."""

    vertex_map: dict
    edge_map: dict

    def apply_vertex(self, dv: str) -> str:
        return self.vertex_map[dv]

    def apply_point(self, p: EdgePoint) -> EdgePoint:
        return EdgePoint(self.edge_map[p.edge], p.offset)

    def apply_route(self, route: PathRoute) -> PathRoute:
        legs = tuple(RouteLeg(self.edge_map[l.edge], l.start, l.end) for l in route.legs)
        anchor = self.apply_point(route.anchor) if route.anchor is not None else None
        return PathRoute(legs, anchor)


def deck_transformations(c: CoveringGraph) -> tuple[DeckTransformation, ...]:
    """All automorphisms of the derived graph commuting with the projection.

    Determined by the image of one fiber point and propagated along edges;
    inconsistent candidates are discarded.  For regular covers the count
    equals the sheet number.
    """
    report = is_connected_cover(c)
    if not report.connected:
        raise DisconnectedCoverError("deck transformations need a connected cover")
    root = c.base.vertices[0]
    found: list[DeckTransformation] = []
    for target in range(c.sheets):
        image: dict[str, int] = {c.lift_vertex(root, 0): target}
        queue = [c.lift_vertex(root, 0)]
        ok = True
        while queue and ok:
            dv = queue.pop()
            base_v, _ = c.project_vertex(dv)
            for e, side in c.base.incident(base_v):
                perm = c.voltage.perm(e.id)
                inv = c.voltage.inverse_perm(e.id)
                s_here = c.project_vertex(dv)[1]
                if side == "u":
                    other = c.lift_vertex(e.v, perm[s_here])
                    other_image = perm[image[dv]]
                else:
                    other = c.lift_vertex(e.u, inv[s_here])
                    other_image = inv[image[dv]]
                if other in image:
                    if image[other] != other_image:
                        ok = False
                        break
                else:
                    image[other] = other_image
                    queue.append(other)
        if not ok:
            continue
        vertex_map = {}
        for dv, sheet in image.items():
            base_v, _ = c.project_vertex(dv)
            vertex_map[dv] = c.lift_vertex(base_v, sheet)
        if sorted(vertex_map.values()) != sorted(c.graph.vertices):
            continue
        edge_map = {}
        consistent = True
        for de in c.graph.edges:
            base_e, s = c.project_edge(de.id)
            u_img = vertex_map[de.u]
            img_sheet = c.project_vertex(u_img)[1]
            de_img = c.lift_edge(base_e, img_sheet)
            if vertex_map[de.v] != c.graph.edge(de_img).v:
                consistent = False
                break
            edge_map[de.id] = de_img
        if consistent:
            found.append(DeckTransformation(vertex_map, edge_map))
    return tuple(found)


# ---------------------------------------------------------- bound check


@dataclass(frozen=True)
class CoverBoundReport:
    sheets: int
    d_base: float
    d_cover: float
    bound: float
    holds: bool
    tol: float
    base_witness: tuple[EdgePoint, EdgePoint] | None
    cover_witness: tuple[EdgePoint, EdgePoint] | None

    def to_json_dict(self) -> dict:
        def pt(w):
            return None if w is None else [{"edge": p.edge, "offset": p.offset} for p in w]

        return {
            "sheets": self.sheets,
            "d_base": self.d_base,
            "d_cover": self.d_cover,
            "bound": self.bound,
            "holds": self.holds,
            "tol": self.tol,
            "base_witness": pt(self.base_witness),
            "cover_witness": pt(self.cover_witness),
        }


def verify_diameter_bound(g: MetricGraph, v: Voltage, tol: float = 1e-9) -> CoverBoundReport:
    """Check d(cover) <= sheets * d(base) on the derived graph of (g, v)."""
    cover = derive_cover(g, v)
    if not is_connected_cover(cover).connected:
        raise DisconnectedCoverError("derived graph is disconnected")
    base_res = continuous_diameter(g)
    cover_res = continuous_diameter(cover.graph)
    bound = cover.sheets * base_res.value
    return CoverBoundReport(
        sheets=cover.sheets,
        d_base=base_res.value,
        d_cover=cover_res.value,
        bound=bound,
        holds=cover_res.value <= bound + tol,
        tol=tol,
        base_witness=base_res.witness,
        cover_witness=cover_res.witness,
    )


# ------------------------------------------------------------ shortening


@dataclass(frozen=True)
class ShorteningTrace:
    """Everything produced while shortening one over-long route."""

    partition_arclengths: tuple[float, ...]
    partition_points: tuple[EdgePoint, ...]
    pieces: tuple[PathRoute, ...]
    replacements: tuple[PathRoute, ...]
    lifted_betas: tuple[PathRoute, ...]
    match: tuple[int, int]  # (0, j): input route matches lift j; else lifts (i, j)
    shortened: PathRoute


def pigeonhole_shorten(c: CoveringGraph, route: PathRoute) -> ShorteningTrace:
    """Strictly shorten a route of length > sheets * d(base), same endpoints.

    The route is cut into equal n-ths (each piece longer than the base
    diameter d); each projected piece gets a shortest-path replacement of
    length <= d, giving n strictly shorter comparison curves re-lifted to
    end at the route's endpoint.  Their n+1 start points live in one
    n-element fiber, so two coincide, and splicing at the match yields a
    strictly shorter route with the same endpoints.
    """
    validate_route(c.graph, route)
    n = c.sheets
    d = c.base_diameter().value
    total = route.length
    if not (total > n * d):
        raise PathNotLongEnough(
            f"route length {total} is within the bound {n} * {d} = {n * d}"
        )

    cuts = [total * i / n for i in range(1, n)]
    pieces = route.split_at(cuts) if cuts else (route,)
    partition_points = (route.start,) + tuple(p.end for p in pieces)
    arclengths = (0.0,) + tuple(total * i / n for i in range(1, n)) + (total,)

    proj_points = [c.project_point(p) for p in partition_points]
    proj_pieces = [c.project_route(p) for p in pieces]
    alphas = [
        shortest_route(c.base, proj_points[k], proj_points[k + 1]) for k in range(n)
    ]
    for k in range(n):
        assert alphas[k].length <= d + _TOL
        assert pieces[k].length > d - _TOL

    q = route.end
    betas = []
    lifted = []
    for i in range(1, n + 1):
        parts = alphas[:i] + proj_pieces[i:]
        beta = concat_routes(c.base, *parts)
        betas.append(beta)
        lifted.append(lift_path_ending_at(c, beta, q))

    start_sheets = [c.fiber_sheet(route.start)] + [c.fiber_sheet(b.start) for b in lifted]
    match = None
    for i in range(n + 1):
        for j in range(i + 1, n + 1):
            if start_sheets[i] == start_sheets[j]:
                match = (i, j)
                break
        if match:
            break
    assert match is not None, "pigeonhole failure: fiber has n points but no two of n+1 starts agree"

    i, j = match
    if i == 0:
        sigma = lifted[j - 1]
    else:
        parts = proj_pieces[:i] + alphas[i:j] + proj_pieces[j:]
        sigma_base = concat_routes(c.base, *parts)
        sigma = lift_path_ending_at(c, sigma_base, q)

    assert c.fiber_sheet(sigma.start) == c.fiber_sheet(route.start)
    assert points_coincide(c.graph, sigma.end, route.end)
    assert sigma.length < total
    return ShorteningTrace(
        partition_arclengths=arclengths,
        partition_points=partition_points,
        pieces=tuple(pieces),
        replacements=tuple(alphas),
        lifted_betas=tuple(lifted),
        match=match,
        shortened=sigma,
    )


def shorten_until_bound(
    c: CoveringGraph, route: PathRoute, max_steps: int = 1000
) -> tuple[PathRoute, tuple[ShorteningTrace, ...]]:
    """Iterate pigeonhole_shorten until the route is within sheets * d(base)."""
    traces = []
    current = route
    for _ in range(max_steps):
        try:
            trace = pigeonhole_shorten(c, current)
        except PathNotLongEnough:
            return current, tuple(traces)
        traces.append(trace)
        current = trace.shortened
    raise RuntimeError(f"no convergence within {max_steps} shortening steps")
