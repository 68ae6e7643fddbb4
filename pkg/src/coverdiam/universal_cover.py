"""Universal covers of 2-complexes and the 4*sqrt(n) diameter pipeline.

The cover is built from the regular representation: coset enumeration of
the spanning-tree presentation supplies a sheet permutation per non-tree
edge (tree edges stay put), and vertices, edges and triangles lift
accordingly.  Metric questions are asked of the piecewise-equilateral
model via edgewise subdivision graphs.
"""

from __future__ import annotations

import importlib.resources
import json
import math
from collections import deque
from dataclasses import dataclass
from typing import Hashable

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra as _sp_dijkstra

from .complexes import (
    SimplicialComplex2,
    is_simply_connected,
    nerve2,
    spanning_tree_presentation,
)
from .errors import CoverNotCovering, EnumerationOverflow
from .groups import CosetTable, TrivialityResult, todd_coxeter
from .metric_graph import DiameterResult, Edge, MetricGraph, continuous_diameter
from .separator import cayley_diameter_bound, left_multiplication

__all__ = [
    "CoveringComplex",
    "PEApprox",
    "UniversalBoundReport",
    "NerveReport",
    "build_universal_cover",
    "pe_subdivision_graph",
    "verify_universal_bound",
    "fiber_ball_nerve",
    "pe_projection",
    "final_inequality_holds",
    "rp2_complex",
]

_STAIRCASE_FACTOR = 2.0 / math.sqrt(3.0)


@dataclass(frozen=True)
class CoveringComplex:
    """A simplicial covering built over a base complex.

    Total-complex vertices are pairs (base vertex, sheet).  The deck group
    is stored as sheet permutations (left multiplications of the regular
    representation); it acts freely and transitively on every fiber.
    """

    base: SimplicialComplex2
    total: SimplicialComplex2
    sheets: int
    table: CosetTable
    edge_permutation: dict  # base edge (u, v) sorted -> sheet permutation for u->v
    deck: tuple[tuple[int, ...], ...]
    simply_connected: TrivialityResult

    def lift_vertex(self, v, sheet: int):
        return (v, sheet)

    def project_vertex(self, tv) -> tuple:
        return tv

    def fiber(self, v) -> tuple:
        return tuple((v, s) for s in range(self.sheets))


def _edge_perms(data, table: CosetTable, sheets: int) -> dict:
    perms = {}
    gen_of_edge = {e: i + 1 for i, e in enumerate(data.generator_edges)}
    identity = tuple(range(sheets))
    for e in data.tree_edges:
        perms[e] = identity
    for e, g in gen_of_edge.items():
        perms[e] = tuple(table.act(s, g) for s in range(sheets))
    return perms


def build_universal_cover(k: SimplicialComplex2, budget: int) -> CoveringComplex:
    """Construct the universal cover; raises EnumerationOverflow when the
    fundamental group cannot be realised within the budget."""
    data = spanning_tree_presentation(k)
    table = todd_coxeter(data.presentation, budget)
    n = table.coset_count
    perms = _edge_perms(data, table, n)

    vertices = [(v, s) for v in k.vertices for s in range(n)]
    edges = []
    for (u, v) in k.edges:
        perm = perms[(u, v)]
        for s in range(n):
            edges.append(((u, s), (v, perm[s])))
    triangles = []
    for (a, b, c) in k.triangles:
        p_ab = perms[(a, b)]
        p_ac = perms[(a, c)]
        p_bc = perms[(b, c)]
        for s in range(n):
            sb = p_ab[s]
            sc = p_ac[s]
            assert p_bc[sb] == sc, "triangle boundary fails to close over the cover"
            triangles.append(((a, s), (b, sb), (c, sc)))
    total = SimplicialComplex2(vertices, triangles, edges)

    assert total.f_vector == tuple(n * x for x in k.f_vector)
    if not total.is_connected():
        raise AssertionError("regular-representation cover is disconnected")
    sc = is_simply_connected(total, budget)
    if sc.status == "unknown":
        raise EnumerationOverflow(
            budget, "budget too small to certify the cover simply connected"
        )
    assert sc.status == "yes", "universal cover failed its simple-connectivity check"

    deck = tuple(left_multiplication(table, a) for a in range(n))
    cover = CoveringComplex(
        base=k,
        total=total,
        sheets=n,
        table=table,
        edge_permutation=perms,
        deck=deck,
        simply_connected=sc,
    )
    _check_cover_complex(cover)
    return cover


def _check_cover_complex(c: CoveringComplex) -> None:
    n = c.sheets
    # the star of every lifted vertex maps bijectively onto the base star
    base_star = {v: set() for v in c.base.vertices}
    for (u, v) in c.base.edges:
        base_star[u].add((u, v))
        base_star[v].add((u, v))
    total_star: dict = {tv: set() for tv in c.total.vertices}
    for (x, y) in c.total.edges:
        total_star[x].add((x, y))
        total_star[y].add((x, y))
    for tv in c.total.vertices:
        v, _ = tv
        projected = {tuple(sorted((a[0], b[0]))) for (a, b) in total_star[tv]}
        assert projected == base_star[v]
        assert len(total_star[tv]) == len(base_star[v])
    # deck group: free and transitive on each fiber, commutes with projection
    for lam in c.deck:
        assert sorted(lam) == list(range(n))
    fixed = [lam for lam in c.deck if any(lam[s] == s for s in range(n))]
    assert fixed == [tuple(range(n))]
    reached = {c.deck[a][0] for a in range(n)}
    assert reached == set(range(n))


# ------------------------------------------------- piecewise-flat metric


class PEApprox:
    """Edgewise level-k subdivision graph of a unit-equilateral complex.

    Triangles split into level^2 sub-triangles of side 1/level; shared
    sub-edges are identified.  The graph metric dominates the flat metric
    by at most 2/sqrt(3).
    """

    def __init__(self, complex2: SimplicialComplex2, level: int, graph: MetricGraph,
                 vertex_ids: dict):
        self.complex = complex2
        self.level = level
        self.graph = graph
        self._vertex_ids = vertex_ids
        self._diameter: DiameterResult | None = None

    def vertex_id(self, v) -> str:
        return self._vertex_ids[v]

    def diameter(self) -> DiameterResult:
        if self._diameter is None:
            self._diameter = continuous_diameter(self.graph)
        return self._diameter


def pe_subdivision_graph(k: SimplicialComplex2, level: int) -> PEApprox:
    """Subdivision graph of the unit-equilateral model; rejects other lengths."""
    if level < 1:
        raise ValueError("level must be a positive integer")
    if k.edge_lengths is not None and any(v != 1.0 for v in k.edge_lengths.values()):
        raise ValueError("piecewise-equilateral model needs unit edge lengths")
    L = level
    h = 1.0 / L

    vert_ids = {v: f"v{i}" for i, v in enumerate(k.vertices)}
    edge_index = {e: j for j, e in enumerate(k.edges)}
    names: list[str] = list(vert_ids.values())
    edges_out: list[Edge] = []

    def edge_point(e: tuple, t: int) -> str:
        # t steps from the smaller endpoint along edge e
        if t == 0:
            return vert_ids[e[0]]
        if t == L:
            return vert_ids[e[1]]
        return f"e{edge_index[e]}:{t}"

    for e, j in edge_index.items():
        names.extend(f"e{j}:{t}" for t in range(1, L))
        for t in range(L):
            edges_out.append(
                Edge(f"E{j}:{t}", edge_point(e, t), edge_point(e, t + 1), h)
            )

    for m, (a, b, c) in enumerate(k.triangles):
        e_ab = (a, b)
        e_ac = (a, c)
        e_bc = (b, c)

        def corner_name(x: int, y: int, z: int) -> str:
            # barycentric steps (x, y, z) summing to L; a = (L,0,0) etc.
            if z == 0:
                return edge_point(e_ab, y)
            if y == 0:
                return edge_point(e_ac, z)
            if x == 0:
                return edge_point(e_bc, z)
            return f"t{m}:{x},{y}"

        for x in range(L - 2, 0, -1):
            for y in range(1, L - x):
                names.append(f"t{m}:{x},{y}")

        count = 0
        for x in range(L + 1):
            for y in range(L + 1 - x):
                z = L - x - y
                here = (x, y, z)
                for dx, dy, dz in ((-1, 1, 0), (-1, 0, 1), (0, -1, 1)):
                    nx, ny, nz = x + dx, y + dy, z + dz
                    if nx < 0 or ny < 0 or nz < 0:
                        continue
                    # lattice edges lying on a boundary chain already exist
                    if any(p == 0 and q == 0 for p, q in zip(here, (nx, ny, nz))):
                        continue
                    edges_out.append(
                        Edge(
                            f"T{m}:{x},{y},{z}-{nx},{ny},{nz}",
                            corner_name(x, y, z),
                            corner_name(nx, ny, nz),
                            h,
                        )
                    )
                    count += 1
        assert count == 3 * L * (L - 1) // 2

    graph = MetricGraph(names, edges_out, require_connected=k.is_connected())
    approx = PEApprox(k, level, graph, vert_ids)
    nv, ne, nf = k.f_vector
    assert len(graph.vertices) == nv + (L - 1) * ne + ((L - 1) * (L - 2) // 2) * nf
    assert len(graph.edges) == L * ne + (3 * L * (L - 1) // 2) * nf
    return approx


# ------------------------------------------------------------ bound check


@dataclass(frozen=True)
class UniversalBoundReport:
    sheets: int
    level: int
    d_base: float
    d_cover: float
    bound: float
    ratio: float
    corrected_ratio: float
    holds: bool
    tol: float

    def to_json_dict(self) -> dict:
        return {
            "sheets": self.sheets,
            "level": self.level,
            "d_base": self.d_base,
            "d_cover": self.d_cover,
            "bound": self.bound,
            "ratio": self.ratio,
            "corrected_ratio": self.corrected_ratio,
            "holds": self.holds,
            "tol": self.tol,
        }


def verify_universal_bound(
    k: SimplicialComplex2, level: int, budget: int, tol: float = 1e-9,
    cover: CoveringComplex | None = None,
) -> UniversalBoundReport:
    """Check d(cover) < 4 sqrt(n) d(base) on level-k subdivision graphs.

    The corrected ratio multiplies by 2/sqrt(3), the worst-case factor by
    which the graph metric overestimates flat distances.
    """
    if cover is None:
        cover = build_universal_cover(k, budget)
    d_base = pe_subdivision_graph(k, level).diameter().value
    d_cover = pe_subdivision_graph(cover.total, level).diameter().value
    bound = 4.0 * math.sqrt(cover.sheets) * d_base
    ratio = d_cover / d_base
    return UniversalBoundReport(
        sheets=cover.sheets,
        level=level,
        d_base=d_base,
        d_cover=d_cover,
        bound=bound,
        ratio=ratio,
        corrected_ratio=ratio * _STAIRCASE_FACTOR,
        holds=d_cover < bound + tol,
        tol=tol,
    )


# ------------------------------------------------------------ fiber nerve


@dataclass(frozen=True)
class NerveReport:
    sheets: int
    level: int
    epsilon: float
    radius: float
    d_base: float
    d_cover: float
    nerve: SimplicialComplex2
    nerve_connected: bool
    generator_set: tuple[int, ...]  # deck elements within 2(d + eps) of the basepoint lift
    matches_deck_cayley: bool
    nerve_simply_connected: TrivialityResult
    nerve_diameter: int
    nerve_diameter_bound: float
    nerve_diameter_ok: bool
    fiber_distances: tuple[tuple[float, ...], ...]
    fiber_pair_bound: float
    fiber_pairs_ok: bool
    chain_bound: float  # 2 d + (sqrt(4n+1) - 2) * 2 (d + eps)
    chain_ok: bool
    chain_below_sqrt_bound: bool
    mesh_ok: bool

    def to_json_dict(self) -> dict:
        return {
            "sheets": self.sheets,
            "level": self.level,
            "epsilon": self.epsilon,
            "radius": self.radius,
            "d_base": self.d_base,
            "d_cover": self.d_cover,
            "nerve_edges": [list(e) for e in self.nerve.edges],
            "nerve_triangles": [list(t) for t in self.nerve.triangles],
            "nerve_connected": self.nerve_connected,
            "generator_set": list(self.generator_set),
            "matches_deck_cayley": self.matches_deck_cayley,
            "nerve_simply_connected": self.nerve_simply_connected.status,
            "nerve_diameter": self.nerve_diameter,
            "nerve_diameter_bound": self.nerve_diameter_bound,
            "nerve_diameter_ok": self.nerve_diameter_ok,
            "fiber_pair_bound": self.fiber_pair_bound,
            "fiber_pairs_ok": self.fiber_pairs_ok,
            "chain_bound": self.chain_bound,
            "chain_ok": self.chain_ok,
            "chain_below_sqrt_bound": self.chain_below_sqrt_bound,
            "mesh_ok": self.mesh_ok,
        }


def _graph_csr(g: MetricGraph):
    n = len(g.vertices)
    idx = {v: i for i, v in enumerate(g.vertices)}
    best = {}
    for e in g.edges:
        i, j = idx[e.u], idx[e.v]
        if i == j:
            continue
        key = (min(i, j), max(i, j))
        if key not in best or e.length < best[key]:
            best[key] = e.length
    rows, cols, data = zip(*((i, j, l) for (i, j), l in best.items()))
    return csr_matrix((data, (rows, cols)), shape=(n, n)), idx


def _nerve_bfs_diameter(k: SimplicialComplex2) -> int:
    best = 0
    for src in k.vertices:
        dist = {src: 0}
        queue = deque([src])
        while queue:
            x = queue.popleft()
            for y in k.neighbors(x):
                if y not in dist:
                    dist[y] = dist[x] + 1
                    queue.append(y)
        if len(dist) < len(k.vertices):
            return -1
        best = max(best, max(dist.values()))
    return best


def fiber_ball_nerve(
    c: CoveringComplex,
    p: Hashable,
    epsilon: float,
    level: int,
    budget: int = 100_000,
    radius: float | None = None,
) -> NerveReport:
    """Nerve of the fiber-centred ball cover of the total space.

    Centres are the lifts of the base vertex p; the radius defaults to
    d(base) + epsilon; samples are the subdivision vertices of the total
    space.  Raises CoverNotCovering when some sample is out of reach of
    every centre.
    """
    if p not in set(c.base.vertices):
        raise ValueError(f"unknown base vertex {p!r}")
    if not (epsilon > 0):
        raise ValueError("epsilon must be positive")
    n = c.sheets
    pe_base = pe_subdivision_graph(c.base, level)
    pe_total = pe_subdivision_graph(c.total, level)
    d = pe_base.diameter().value
    r = (d + epsilon) if radius is None else radius
    mesh_ok = epsilon >= 1.0 / level - 1e-12

    mat, idx = _graph_csr(pe_total.graph)
    fiber_vertices = [pe_total.vertex_id((p, s)) for s in range(n)]
    sources = [idx[v] for v in fiber_vertices]
    dists = _sp_dijkstra(mat, directed=False, indices=sources)

    nearest = dists.min(axis=0)
    worst = int(nearest.argmax())
    if not (nearest[worst] < r):
        raise CoverNotCovering(
            f"sample {pe_total.graph.vertices[worst]!r} at distance "
            f"{nearest[worst]} >= radius {r}"
        )

    sample_count = dists.shape[1]
    nerve = nerve2(
        centers=list(range(n)),
        radius=r,
        samples=list(range(sample_count)),
        dist=lambda x, i: dists[i, x],
    )

    nerve_connected = _nerve_bfs_diameter(nerve) >= 0
    # deck elements moving the basepoint lift by less than 2(d + eps)
    fiber_idx = {s: idx[fiber_vertices[s]] for s in range(n)}
    fdist = [[float(dists[i, fiber_idx[j]]) for j in range(n)] for i in range(n)]
    threshold = 2 * (d + epsilon) if radius is None else 2 * r
    gen_set = tuple(
        a for a in range(1, n) if fdist[0][c.deck[a][0]] < threshold
    )
    # delta(i -> j): the unique deck element with lambda(i) = j
    delta = {}
    for a, lam in enumerate(c.deck):
        for i in range(n):
            delta[(i, lam[i])] = a
    cayley_edges = {
        tuple(sorted((i, j)))
        for i in range(n)
        for j in range(n)
        if i != j and delta[(i, j)] in gen_set
    }
    matches = set(nerve.edges) == cayley_edges

    sc = (
        is_simply_connected(nerve, budget)
        if nerve_connected
        else TrivialityResult("no", "nerve 1-skeleton disconnected")
    )
    nerve_diam = _nerve_bfs_diameter(nerve)
    diam_bound = cayley_diameter_bound(n)
    pair_bound = diam_bound * 2 * (d + epsilon)
    pairs_ok = all(
        fdist[i][j] < pair_bound for i in range(n) for j in range(n) if i != j
    )
    d_cover = pe_total.diameter().value
    chain_bound = 2 * d + diam_bound * 2 * (d + epsilon)
    return NerveReport(
        sheets=n,
        level=level,
        epsilon=epsilon,
        radius=r,
        d_base=d,
        d_cover=d_cover,
        nerve=nerve,
        nerve_connected=nerve_connected,
        generator_set=gen_set,
        matches_deck_cayley=matches,
        nerve_simply_connected=sc,
        nerve_diameter=nerve_diam,
        nerve_diameter_bound=diam_bound,
        nerve_diameter_ok=0 <= nerve_diam <= diam_bound + 1e-9,
        fiber_distances=tuple(tuple(row) for row in fdist),
        fiber_pair_bound=pair_bound,
        fiber_pairs_ok=pairs_ok,
        chain_bound=chain_bound,
        chain_ok=d_cover < chain_bound,
        chain_below_sqrt_bound=chain_bound < 4 * math.sqrt(n) * d if n > 1 else True,
        mesh_ok=mesh_ok,
    )


# ----------------------------------------------- subdivision compatibility


def pe_projection(c: CoveringComplex, level: int) -> dict[str, str]:
    """Vertex map from the total subdivision graph onto the base one.

    Total vertices are (base vertex, sheet) pairs, so sorted simplices over
    the total complex project to sorted simplices of the base and the
    barycentric indexing transfers unchanged.  The map is n-to-1 and sends
    subdivision edges to subdivision edges of equal length.
    """
    pe_base = pe_subdivision_graph(c.base, level)
    pe_total = pe_subdivision_graph(c.total, level)
    base_edge_index = {e: j for j, e in enumerate(c.base.edges)}
    base_tri_index = {t: m for m, t in enumerate(c.base.triangles)}

    mapping: dict[str, str] = {}
    for i, tv in enumerate(pe_total.complex.vertices):
        mapping[f"v{i}"] = pe_base.vertex_id(tv[0])
    for j, te in enumerate(pe_total.complex.edges):
        (u, _), (v, _) = te
        jb = base_edge_index[(u, v)]
        for t in range(1, level):
            mapping[f"e{j}:{t}"] = f"e{jb}:{t}"
    for m, tt in enumerate(pe_total.complex.triangles):
        mb = base_tri_index[tuple(x for x, _ in tt)]
        for x in range(1, level):
            for y in range(1, level - x):
                mapping[f"t{m}:{x},{y}"] = f"t{mb}:{x},{y}"

    # n-to-1 and edge-preserving
    counts: dict[str, int] = {}
    for img in mapping.values():
        counts[img] = counts.get(img, 0) + 1
    assert set(counts) == set(pe_base.graph.vertices)
    assert all(v == c.sheets for v in counts.values())
    base_pairs = {tuple(sorted((e.u, e.v))) for e in pe_base.graph.edges}
    for e in pe_total.graph.edges:
        assert tuple(sorted((mapping[e.u], mapping[e.v]))) in base_pairs
    return mapping


# --------------------------------------------------------- final algebra


def final_inequality_holds(n_max: int) -> bool:
    """For 1 <= n <= n_max: 2 + 2(sqrt(4n+1) - 2) < 4 sqrt(n).

    Equivalent to 4n + 1 < (2 sqrt(n) + 1)^2, i.e. 0 < 4 sqrt(n).
    """
    n = np.arange(1, n_max + 1, dtype=np.float64)
    lhs = 2.0 + 2.0 * (np.sqrt(4.0 * n + 1.0) - 2.0)
    return bool(np.all(lhs < 4.0 * np.sqrt(n)))


# --------------------------------------------------------------- bundled


def rp2_complex() -> SimplicialComplex2:
    """The six-vertex projective plane (antipodal icosahedron quotient)."""
    path = importlib.resources.files("coverdiam").joinpath("data/rp2_complex.json")
    with path.open("r", encoding="utf-8") as fh:
        obj = json.load(fh)
    return SimplicialComplex2(obj["vertices"], obj["triangles"], obj.get("extra_edges", []))
