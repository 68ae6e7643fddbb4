import random

import pytest

from coverdiam.errors import EnumerationOverflow, NotGeneratingError
from coverdiam.groups import (
    Presentation,
    bfs_distances,
    cayley_graph,
    free_reduce,
    is_trivial,
    parse_word,
    presentation_from_json,
    presentation_to_json,
    todd_coxeter,
    word_metric_diameter,
    word_to_string,
)


def cyclic(k: int) -> Presentation:
    return Presentation(1, [(1,) * k])


# ------------------------------------------------------------- words


def test_parse_word():
    assert parse_word("ABab", 2) == (-1, -2, 1, 2)
    assert parse_word("aa", 1) == (1, 1)
    with pytest.raises(ValueError):
        parse_word("c", 2)
    with pytest.raises(ValueError):
        parse_word("a b", 2)


def test_free_reduction():
    assert free_reduce((1, -1)) == ()
    assert free_reduce((1, 2, -2, -1, 1)) == (1,)
    assert word_to_string((-1, -2, 1, 2)) == "ABab"


def test_presentation_reduces_on_load():
    p = Presentation(2, [(1, 2, -2, 1)])
    assert p.relators == ((1, 1),)


# ------------------------------------------------------- todd_coxeter


def test_enumerate_cyclic_5():
    assert todd_coxeter(cyclic(5), 100).coset_count == 5


def test_enumerate_trivial():
    assert todd_coxeter(Presentation(1, [(1,)]), 10).coset_count == 1


def brute_force_symmetric_group_order():
    # permutation model a=(1 2), b=(2 3) generating S3
    a = (1, 0, 2)
    b = (0, 2, 1)

    def mul(p, q):
        return tuple(p[q[i]] for i in range(3))

    seen = {(0, 1, 2)}
    frontier = [(0, 1, 2)]
    while frontier:
        nxt = []
        for p in frontier:
            for gen in (a, b):
                q = mul(gen, p)
                if q not in seen:
                    seen.add(q)
                    nxt.append(q)
        frontier = nxt
    return len(seen)


def test_enumerate_s3_matches_permutation_model():
    expected = brute_force_symmetric_group_order()
    p = Presentation(2, [(1, 1), (2, 2), (1, 2, 1, 2, 1, 2)])
    assert todd_coxeter(p, 100).coset_count == expected == 6


def test_enumeration_overflow():
    free = Presentation(2, [])
    with pytest.raises(EnumerationOverflow):
        todd_coxeter(free, 50)


def test_table_satisfies_relators():
    for p in [
        cyclic(7),
        Presentation(2, [(1, 1), (2, 2), (1, 2) * 3]),
        Presentation(2, [(1,) * 4, (1, 1, -2, -2), (-2, 1, 2, 1)]),  # Q8
    ]:
        t = todd_coxeter(p, 1000)
        assert t.satisfies(p)
        # every generator acts as a bijection
        for perm in t.action:
            assert sorted(perm) == list(range(t.coset_count))


def test_enumeration_deterministic():
    p = Presentation(2, [(1, 1), (2, 2), (1, 2) * 3])
    t1 = todd_coxeter(p, 100)
    t2 = todd_coxeter(p, 100)
    assert t1.action == t2.action


def test_zero_generator_presentation():
    t = todd_coxeter(Presentation(0, []), 10)
    assert t.coset_count == 1


def test_enumeration_survives_heavy_collapse():
    # b^-1 a b = a^2 and a^-1 b a = b^2 force the trivial group, reached
    # only after long coincidence cascades
    p = Presentation(2, [(-2, 1, 2, -1, -1), (-1, 2, 1, -2, -2)])
    assert todd_coxeter(p, 5000).coset_count == 1


def test_enumeration_against_permutation_models():
    # random quotient presentations checked against the permutation groups
    # their relators were harvested from
    from itertools import product

    def mul(p, q):
        return tuple(p[q[i]] for i in range(len(p)))

    def inv(p):
        out = [0] * len(p)
        for i, x in enumerate(p):
            out[x] = i
        return tuple(out)

    def group_order(gens, n):
        ident = tuple(range(n))
        seen = {ident}
        frontier = [ident]
        while frontier:
            nxt = []
            for p in frontier:
                for g in gens:
                    q = mul(g, p)
                    if q not in seen:
                        seen.add(q)
                        nxt.append(q)
            frontier = nxt
        return len(seen)

    def elem_order(p):
        q, k = p, 1
        while q != tuple(range(len(p))):
            q, k = mul(p, q), k + 1
        return k

    rng = random.Random(2718)
    completed = 0
    for _ in range(12):
        n = rng.randint(3, 5)
        a = tuple(rng.sample(range(n), n))
        b = tuple(rng.sample(range(n), n))
        order = group_order([a, b], n)
        letters = {1: a, -1: inv(a), 2: b, -2: inv(b)}

        def acts_trivially(word):
            cur = tuple(range(n))
            for letter in word:
                cur = mul(cur, letters[letter])
            return cur == tuple(range(n))

        relators = [(1,) * elem_order(a), (2,) * elem_order(b)]
        for length in range(2, 7):
            relators.extend(
                w for w in product([1, -1, 2, -2], repeat=length) if acts_trivially(w)
            )
        try:
            t = todd_coxeter(Presentation(2, relators), 5000)
        except EnumerationOverflow:
            continue
        # the presented group surjects onto the permutation group
        assert t.coset_count % order == 0 and t.coset_count >= order
        completed += 1
    assert completed >= 5


# ------------------------------------------------------- cayley_graph


def test_cayley_z2_is_single_edge():
    c = cayley_graph(todd_coxeter(cyclic(2), 10), {0})
    assert c.element_count == 2
    assert c.neighbors == ((1,), (0,))


def test_cayley_z6_is_cycle():
    c = cayley_graph(todd_coxeter(cyclic(6), 100), {0})
    assert c.element_count == 6
    assert all(c.degree(v) == 2 for v in range(6))
    assert word_metric_diameter(c).diameter == 3


def z5_two_residue_presentation():
    # generators a, b with b = a^2 in Z/5
    return Presentation(2, [(1,) * 5, (2, -1, -1)])


def test_cayley_z5_two_gens_is_complete_graph():
    t = todd_coxeter(z5_two_residue_presentation(), 100)
    c = cayley_graph(t, {0, 1})
    # brute-force adjacency: every nonzero residue is +-1 or +-2 mod 5
    assert c.element_count == 5
    for g in range(5):
        assert set(c.neighbors[g]) == set(range(5)) - {g}


def test_cayley_not_generating():
    # subgroup <a^2> in Z/4 is proper
    p = Presentation(2, [(1,) * 4, (2, -1, -1)])
    t = todd_coxeter(p, 100)
    with pytest.raises(NotGeneratingError):
        cayley_graph(t, {1})


def test_cayley_excludes_identity_generator():
    # b = a^2 is the identity in Z/2
    p = Presentation(2, [(1, 1), (2, -1, -1)])
    t = todd_coxeter(p, 100)
    c = cayley_graph(t, {0, 1})
    assert c.element_count == 2
    assert c.neighbors == ((1,), (0,))
    for g, _label, h in c.labeled_edges:
        assert g != h


def test_cayley_degree_equals_symmetric_set_size():
    for pres, gens in [
        (z5_two_residue_presentation(), {0, 1}),
        (Presentation(2, [(1, 1), (2, 2), (1, 2) * 3]), {0, 1}),
        (cyclic(7), {0}),
    ]:
        c = cayley_graph(todd_coxeter(pres, 500), gens)
        for v in range(c.element_count):
            assert c.degree(v) == len(c.generator_elements)


def test_cayley_labels_consistent():
    t = todd_coxeter(Presentation(2, [(1, 1), (2, 2), (1, 2) * 3]), 100)
    c = cayley_graph(t, {0, 1})
    for g, letter, h in c.labeled_edges:
        assert t.act(g, letter) == h


# ---------------------------------------------- word_metric_diameter


def test_diameter_k2():
    c = cayley_graph(todd_coxeter(cyclic(2), 10), {0})
    assert word_metric_diameter(c).diameter == 1


def test_diameter_six_cycle():
    c = cayley_graph(todd_coxeter(cyclic(6), 100), {0})
    res = word_metric_diameter(c)
    assert res.diameter == 3
    assert res.layer_sizes == (1, 2, 2, 1)
    assert res.farthest == 3


def test_diameter_s3_all_transpositions():
    # a, b, c = three transpositions: c = aba
    p = Presentation(
        3, [(1, 1), (2, 2), (1, 2) * 3, (3, -1, -2, -1)]
    )
    t = todd_coxeter(p, 100)
    c = cayley_graph(t, {0, 1, 2})
    # brute-force BFS oracle over the 6 elements
    res = word_metric_diameter(c)
    brute = max(max(bfs_distances(c, s)) for s in range(c.element_count))
    assert res.diameter == brute == 2


def test_identity_eccentricity_equals_all_pairs_max():
    cases = [
        (cyclic(12), {0}),
        (z5_two_residue_presentation(), {0, 1}),
        (Presentation(2, [(1,) * 8, (2, 2), (2, 1, 2, 1)]), {0, 1}),  # D8
        (Presentation(3, [(1, 1), (2, 2), (3, 3), (1, 2) * 3, (2, 3) * 3, (1, 3) * 2]), {0, 1, 2}),
    ]
    for pres, gens in cases:
        c = cayley_graph(todd_coxeter(pres, 1000), gens)
        assert c.element_count <= 200
        res = word_metric_diameter(c)
        allpairs = max(max(bfs_distances(c, s)) for s in range(c.element_count))
        assert res.diameter == allpairs


def test_vertex_transitivity_spot_check():
    p = Presentation(2, [(1,) * 4, (2, 2), (2, 1, 2, 1)])  # D4, order 8
    c = cayley_graph(todd_coxeter(p, 100), {0, 1})
    ecc0 = max(bfs_distances(c, 0))
    rng = random.Random(5)
    for _ in range(5):
        v = rng.randrange(c.element_count)
        assert max(bfs_distances(c, v)) == ecc0


# ----------------------------------------------------------- triviality


def test_is_trivial_yes():
    assert is_trivial(Presentation(1, [(1,)]), 10).status == "yes"


def test_is_trivial_order_two():
    res = is_trivial(Presentation(1, [(1, 1)]), 10)
    assert res.status == "no"
    assert "order 2" in res.certificate


def test_is_trivial_commutator_rank_certificate():
    res = is_trivial(Presentation(2, [(1, 2, -1, -2)]), 100)
    assert res.status == "no"
    assert "abelianization infinite" in res.certificate


def test_is_trivial_unknown_on_budget():
    # infinite dihedral group: finite abelianization, so the rank shortcut
    # stays silent and enumeration must overflow
    p = Presentation(2, [(1, 1), (2, 2)])
    res = is_trivial(p, 500)
    assert res.status == "unknown"
    assert "budget" in res.certificate


# ------------------------------------------------------------- files


def test_presentation_json_roundtrip():
    p = Presentation(2, [(1, 1), (2, 2), (1, 2) * 3])
    obj = presentation_to_json(p)
    assert obj == {"generators": 2, "relators": ["aa", "bb", "ababab"]}
    assert presentation_from_json(obj) == p
