"""Sphere decompositions of Cayley graphs and the square-root diameter bound.

Along a geodesic from the identity to a farthest element h, layer i is the
set of elements at word distance i and T_i is the connected component of
the geodesic vertex inside that layer.  When the flag filling of the graph
is simply connected, removing any interior T_i separates the identity from
h, each |T_i| is at least min(i+1, m-i+1), and summing the disjoint T_i
forces diam <= sqrt(4|G|+1) - 2.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .complexes import flag_triangles, is_simply_connected
from .groups import (
    CayleyGraph,
    CosetTable,
    Presentation,
    TrivialityResult,
    bfs_distances,
    cayley_graph,
    todd_coxeter,
    word_metric_diameter,
)

__all__ = [
    "SphereDecomposition",
    "SizeBoundReport",
    "CayleyBoundReport",
    "ZooInstance",
    "sphere_decomposition",
    "check_separation",
    "check_size_bounds",
    "translated_copy",
    "left_multiplication",
    "cayley_diameter_bound",
    "verify_cayley_bound",
    "zoo_instances",
    "layer_sum_inequality_holds",
]


@dataclass(frozen=True)
class SphereDecomposition:
    """Layers and geodesic components of a Cayley graph, from the identity."""

    element_count: int
    geodesic: tuple[int, ...]  # g_0 = identity .. g_m = farthest
    layers: tuple[frozenset, ...]  # S_i = elements at distance i
    components: tuple[frozenset, ...]  # T_i = component of g_i inside S_i

    @property
    def diameter(self) -> int:
        return len(self.geodesic) - 1


def sphere_decomposition(c: CayleyGraph) -> SphereDecomposition:
    """Deterministic decomposition: farthest element and geodesic ties go to
    the smallest element index."""
    dist = bfs_distances(c, c.identity)
    m = max(dist)
    h = dist.index(m)
    geodesic = [h]
    while geodesic[-1] != c.identity:
        g = geodesic[-1]
        prev = min(w for w in c.neighbors[g] if dist[w] == dist[g] - 1)
        geodesic.append(prev)
    geodesic.reverse()

    layers = []
    for i in range(m + 1):
        layers.append(frozenset(g for g, d in enumerate(dist) if d == i))

    components = []
    for i, g_i in enumerate(geodesic):
        layer = layers[i]
        comp = {g_i}
        queue = deque([g_i])
        while queue:
            x = queue.popleft()
            for y in c.neighbors[x]:
                if y in layer and y not in comp:
                    comp.add(y)
                    queue.append(y)
        components.append(frozenset(comp))
    return SphereDecomposition(c.element_count, tuple(geodesic), tuple(layers), tuple(components))


def check_separation(c: CayleyGraph, d: SphereDecomposition, i: int) -> bool:
    """Whether removing T_i puts the identity and the farthest element in
    different components."""
    m = d.diameter
    if not (0 < i < m):
        raise IndexError(f"index {i} must be interior to 0..{m}")
    removed = d.components[i]
    source, target = d.geodesic[0], d.geodesic[m]
    seen = {source}
    queue = deque([source])
    while queue:
        x = queue.popleft()
        for y in c.neighbors[x]:
            if y in removed or y in seen:
                continue
            if y == target:
                return False
            seen.add(y)
            queue.append(y)
    return True


@dataclass(frozen=True)
class SizeBoundReport:
    per_index: tuple[tuple[int, int, int, bool], ...]  # (i, |T_i|, min(i+1, m-i+1), ok)
    disjoint: bool
    total: int
    group_order: int
    sum_ok: bool

    @property
    def all_bounds_hold(self) -> bool:
        return all(ok for *_, ok in self.per_index)


def check_size_bounds(d: SphereDecomposition) -> SizeBoundReport:
    m = d.diameter
    rows = []
    for i, t in enumerate(d.components):
        lower = min(i + 1, m - i + 1)
        rows.append((i, len(t), lower, len(t) >= lower))
    seen: set[int] = set()
    disjoint = True
    for t in d.components:
        if seen & t:
            disjoint = False
        seen |= t
    total = sum(len(t) for t in d.components)
    return SizeBoundReport(
        per_index=tuple(rows),
        disjoint=disjoint,
        total=total,
        group_order=d.element_count,
        sum_ok=total <= d.element_count,
    )


def left_multiplication(t: CosetTable, a: int) -> tuple[int, ...]:
    """The permutation g -> a*g, propagated from the identity along the
    right action (left and right multiplication commute)."""
    n = t.coset_count
    image = [-1] * n
    image[0] = a
    queue = deque([0])
    while queue:
        g = queue.popleft()
        for k in range(1, t.generator_count + 1):
            for letter in (k, -k):
                h = t.act(g, letter)
                if image[h] < 0:
                    image[h] = t.act(image[g], letter)
                    queue.append(h)
    assert all(x >= 0 for x in image)
    return tuple(image)


def translated_copy(c: CayleyGraph, t: CosetTable, a: int, s: Iterable[int]) -> frozenset:
    """The image a*s of a vertex set, verified to induce an isomorphic subgraph."""
    lam = left_multiplication(t, a)
    s = frozenset(s)
    image = frozenset(lam[g] for g in s)
    assert len(image) == len(s)
    for g in s:
        for h in s:
            if h in c.neighbors[g]:
                assert lam[h] in c.neighbors[lam[g]], "left multiplication broke an edge"
    return image


def cayley_diameter_bound(n: int) -> float:
    """sqrt(4n + 1) - 2: the diameter cap for simply connected flag fillings."""
    if n < 1:
        raise ValueError("group order must be positive")
    return math.sqrt(4 * n + 1) - 2


@dataclass(frozen=True)
class CayleyBoundReport:
    order: int
    gens: tuple[int, ...]
    simply_connected: TrivialityResult
    diameter: int
    bound: float
    verdict: str  # holds | hypothesis_failed | inconclusive | violated
    cayley: CayleyGraph
    table: CosetTable

    def to_row(self) -> dict:
        return {
            "order": self.order,
            "gens": ";".join(str(g) for g in self.gens),
            "sc_status": self.simply_connected.status,
            "diam": self.diameter,
            "bound": self.bound,
            "verdict": self.verdict,
        }


def verify_cayley_bound(
    p: Presentation, gens: Iterable[int], budget: int
) -> CayleyBoundReport:
    """Check diam <= sqrt(4|G|+1) - 2 whenever the flag filling is certified
    simply connected; otherwise report why the hypothesis is unavailable."""
    table = todd_coxeter(p, budget)
    gens = tuple(sorted(set(int(g) for g in gens)))
    c = cayley_graph(table, gens)
    flag = flag_triangles(c)
    sc = is_simply_connected(flag, budget)
    diam = word_metric_diameter(c).diameter
    bound = cayley_diameter_bound(table.coset_count)
    if sc.status == "yes":
        verdict = "holds" if diam <= bound + 1e-9 else "violated"
    elif sc.status == "no":
        verdict = "hypothesis_failed"
    else:
        verdict = "inconclusive"
    return CayleyBoundReport(
        order=table.coset_count,
        gens=gens,
        simply_connected=sc,
        diameter=diam,
        bound=bound,
        verdict=verdict,
        cayley=c,
        table=table,
    )


# ------------------------------------------------------------------- zoo


@dataclass(frozen=True)
class ZooInstance:
    name: str
    presentation: Presentation
    gens: tuple[int, ...]


def _cyclic_with_powers(k: int) -> Presentation:
    # generators a, b, c with b = a^2, c = a^3
    return Presentation(3, [(1,) * k, (2, -1, -1), (3, -1, -1, -1)])


def zoo_instances() -> tuple[ZooInstance, ...]:
    """The verification zoo: cyclic groups with one, two and three residue
    generators, dihedral groups, two symmetric groups, and the quaternions."""
    out: list[ZooInstance] = []
    for k in range(2, 25):
        pres = _cyclic_with_powers(k)
        out.append(ZooInstance(f"Z{k}|1", pres, (0,)))
        out.append(ZooInstance(f"Z{k}|1,2", pres, (0, 1)))
        out.append(ZooInstance(f"Z{k}|1,2,3", pres, (0, 1, 2)))
    for k in range(3, 9):  # dihedral groups of orders 6..16
        pres = Presentation(2, [(1,) * k, (2, 2), (1, 2, 1, 2)])
        out.append(ZooInstance(f"D{2 * k}", pres, (0, 1)))
    out.append(
        ZooInstance("S3", Presentation(2, [(1, 1), (2, 2), (1, 2) * 3]), (0, 1))
    )
    out.append(
        ZooInstance(
            "S4",
            Presentation(3, [(1, 1), (2, 2), (3, 3), (1, 2) * 3, (2, 3) * 3, (1, 3) * 2]),
            (0, 1, 2),
        )
    )
    out.append(
        ZooInstance(
            "Q8", Presentation(2, [(1,) * 4, (1, 1, -2, -2), (-2, 1, 2, 1)]), (0, 1)
        )
    )
    return tuple(out)


# ------------------------------------------------------- arithmetic check


def layer_sum_inequality_holds(m_max: int, tol: float = 1e-9) -> bool:
    """For every m <= m_max: m <= sqrt(4 * sum_i min(i+1, m-i+1) + 1) - 2 + tol.

    The sum telescopes to t(t+1) for m = 2t-1 and (t+1)^2 for m = 2t.
    """
    m = np.arange(0, m_max + 1, dtype=np.int64)
    t = (m + 1) // 2
    s = np.where(m % 2 == 1, t * (t + 1), (t + 1) * (t + 1))
    rhs = np.sqrt(4.0 * s + 1.0) - 2.0 + tol
    return bool(np.all(m <= rhs))
