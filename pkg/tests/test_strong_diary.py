import itertools
import random

import pytest

from brdlab.diary import AC, CODE, SPLIT, LevelType, level_type, level_type_iso, str_of, validate
from brdlab.languages import rado, triangle_free
from brdlab.structures import InputError, embeds, is_member
from brdlab.strong_diary import (NotInPrefix, build_prefix, left_copy, left_safe_failures, lsv_pathological,
                                 rado_adjacent, realize_level_type, realize_level_types, root_fixed_level_maps,
                                 split_predecessor, star_step)

from conftest import lsv, prefix
from sampling import realizable_types


def graph(n, edges):
    from brdlab.structures import FiniteStructure

    return FiniteStructure.build([0] * n, [(a, b, 1) for a, b in edges], label_range=1)


def test_build_prefix_examples():
    R = prefix("rado", 12)
    assert validate(R.diary) == []
    S = str_of(R.diary)
    assert embeds(graph(2, [(0, 1)]), S) and embeds(graph(2, []), S)
    T = prefix("tf", 12)
    assert validate(T.diary) == []
    S = str_of(T.diary)
    assert is_member(S, T.lang) and embeds(graph(3, [(0, 1), (1, 2)]), S)
    for P in (R, T):
        assert P.strong_levels[0] == 0
        assert len(P.strong_levels) == P.depth + 1
        assert list(P.strong_levels) == sorted(set(P.strong_levels))


def test_build_prefix_deterministic():
    a = build_prefix(triangle_free(), 10, seed=3).diary
    b = build_prefix(triangle_free(), 10, seed=3).diary
    assert a == b and a.canonical_bytes() == b.canonical_bytes()
    with pytest.raises(InputError):
        build_prefix(rado(), -1)


def test_gadget_kinds_cycle():
    P = prefix("tf", 12)
    kinds = {g.kind for g in P.gadgets}
    assert kinds == {SPLIT, CODE, AC}
    D = P.diary
    for g in P.gadgets:
        assert g.start in P.strong_levels and g.end in P.strong_levels
        if g.kind == SPLIT:
            assert g.end == g.start + 1 and D.kind(g.start) == SPLIT
        if g.kind == CODE:
            assert D.kind(g.end - 1) == CODE


def test_extend_keeps_prefix():
    P = build_prefix(triangle_free(), 6)
    before = P.diary
    P.extend(3)
    after = P.diary
    assert after.parents[:before.height - 1] == before.parents
    assert validate(after) == []


@pytest.mark.parametrize("name", ["rado", "tf"])
def test_left_safe(name):
    assert left_safe_failures(prefix(name, 12)) == []


def test_left_copy_examples():
    P = prefix("tf", 12)
    D = P.diary
    SL = P.strong_levels
    mu, nu = SL[2], SL[9]
    T = left_copy(P, mu, [], nu, [])
    assert len(T) == D.width(mu)
    assert D.age(nu, T) == D.age(mu)
    assert [D.ancestor(nu, q, mu) for q in T] == list(range(D.width(mu)))
    assert left_copy(P, mu, [], mu, []) == list(range(D.width(mu)))
    assert left_copy(P, mu, [0], mu, [0]) == list(range(D.width(mu)))
    with pytest.raises(InputError):
        left_copy(P, nu, [], mu, [])
    with pytest.raises(InputError):
        left_copy(P, mu + 1 if mu + 1 not in SL else mu, [], nu, []) if mu + 1 not in SL else \
            left_copy(P, mu, [], nu + 1000, [])


def test_left_copy_through_coding_gadget():
    P = prefix("tf", 12)
    D = P.diary
    g = next(g for g in P.gadgets if g.kind == CODE)
    s = next(p for p in range(D.width(g.start)) if p != g.node)
    u = star_step(P, g.start, s, 0)
    T = left_copy(P, g.start, [s], g.end, [u])
    assert D.age(g.end, T) == D.age(g.start)


def test_star_step():
    P = prefix("tf", 12)
    D = P.diary
    g = next(g for g in P.gadgets if g.kind == CODE)
    # the split node's left copy stays uncoded and also has successors
    for s in range(D.width(g.start)):
        assert star_step(P, g.start, s, 0) == P.left(g.start, s, g.end)
    # a TF node that already has an edge to the coded side cannot pass 1 again
    errs = 0
    for g in (g for g in P.gadgets if g.kind == CODE):
        for s in range(D.width(g.start)):
            try:
                u = star_step(P, g.start, s, 1)
            except InputError as e:
                assert "valid" in str(e)
                errs += 1
            else:
                assert D.ancestor(g.end, u, g.start) == s
    assert errs > 0
    with pytest.raises(InputError):
        star_step(P, P.gadgets[0].start if P.gadgets[0].kind != CODE else 10**6, 0, 0)


def test_star_step_rado():
    P = prefix("rado", 12)
    D = P.diary
    g = next(g for g in P.gadgets if g.kind == CODE)
    for s in range(D.width(g.start)):
        u0, u1 = star_step(P, g.start, s, 0), star_step(P, g.start, s, 1)
        assert u0 != u1
        c = D.coding_nodes()
        lvl = next(m for m, _ in c if g.start <= m < g.end)
        up = D.ancestor(g.end, u1, lvl + 1)
        assert D.symbols[lvl][up] == 1


def test_realize_split_single_node():
    P = build_prefix(triangle_free(), 12)
    D = P.diary
    mu = P.strong_levels[3]
    tau = LevelType((D.paths(mu)[0],), (("S",),), D.age(mu, [0]))
    level, T = realize_level_type(P, mu, [0], tau)
    assert level + 1 in P.strong_levels
    g = next(g for g in P.gadgets if g.start == level)
    assert g.kind in (SPLIT, AC) and g.end == g.start + 1


def test_realize_tf_coding_type():
    from brdlab.age_engine import controlled_coding

    P = build_prefix(triangle_free(), 14)
    D = P.diary
    mu = P.strong_levels[4]
    w = D.width(mu)
    ps = [P.table[p] for p in D.paths(mu)]
    for a, b in itertools.permutations(range(w), 2):
        S = sorted([a, b])
        A = D.age(mu, S)
        k = S.index(a)
        pth = [ps[x] for x in S]
        C = controlled_coding(A, k, [1], pth)
        if C is None:
            continue
        mk = tuple(("C",) if i == k else ("P", 1) for i in range(2))
        tau = LevelType(tuple(D.paths(mu)[x] for x in S), mk, C)
        level, T = realize_level_type(P, mu, S, tau)
        assert level_type_iso(level_type(P.diary, level, T), tau)
        return
    pytest.fail("no coding type with passing number 1")


def test_realize_anchored():
    P = prefix("tf", 12)
    D = P.diary
    SL = P.strong_levels
    mu = SL[2]
    S = list(range(D.width(mu)))
    tau = LevelType(tuple(D.paths(mu)), tuple(("P", 0) for _ in S), D.age(mu, S))
    level0 = SL[8] - 1
    T0 = [P.left(mu, 0, level0)]
    level, T = realize_level_types(P, [(mu, S, tau, (level0, T0))], verify=False)[0]
    assert level == level0 and set(T0) <= set(T)
    assert D.age(level, T) == D.age(mu, S)


def test_realize_rejects_unbased():
    P = prefix("tf", 12)
    D = P.diary
    mu = P.strong_levels[2]
    tau = LevelType((D.paths(mu)[0],) * 2, (("S",), ("P", 0)), D.age(mu, [0, 1]) if D.width(mu) > 1 else None)
    with pytest.raises(InputError):
        realize_level_type(P, mu, [0], tau)


def test_realize_without_extension_reports_missing():
    P = build_prefix(triangle_free(), 4)
    D = P.diary
    mu = P.strong_levels[-1]
    tau = LevelType((D.paths(mu)[-1],), (("C",),), P.table[D.paths(mu)[-1]].bottom)
    with pytest.raises(NotInPrefix):
        realize_level_types(P, [(mu, [D.width(mu) - 1], tau)], extend=False)


@pytest.mark.parametrize("name", ["rado", "tf"])
def test_realize_sampled(name):
    P = prefix(name, 14)
    reqs = realizable_types(P, random.Random(5), 15)
    assert {r[2].kind for r in reqs} >= {SPLIT, CODE}
    realize_level_types(P, reqs)


def test_realize_by_extension():
    P = build_prefix(triangle_free(), 8)
    D = P.diary
    mu = P.strong_levels[-1]
    x = D.width(mu) - 1
    tau = LevelType((D.paths(mu)[x],), (("S",),), D.age(mu, [x]))
    level, T = realize_level_type(P, mu, [x], tau)
    assert P.depth > 8
    assert validate(P.diary) == []


# -- the rigid Rado tree -------------------------------------------------------


def test_rado_adjacency():
    assert rado_adjacent(0, 1) == 1 and rado_adjacent(1, 2) == 1 and rado_adjacent(0, 2) == 0
    assert rado_adjacent(2, 0) == rado_adjacent(0, 2)


def test_lsv_level_three():
    D = lsv(25)
    assert D.height == 26
    assert sorted("".join(map(str, D.seq(3, p))) for p in range(D.width(3))) == ["000", "010", "100", "101"]
    assert validate(D) == []


def test_lsv_codes_rado_prefix():
    D = lsv(25)
    S = str_of(D)
    n = S.size
    assert n >= 3
    for a, b in itertools.combinations(range(n), 2):
        assert S.value(b, a) == rado_adjacent(a, b)


def test_lsv_split_predecessors():
    D = lsv(25)
    cn = D.coding_nodes()
    assert split_predecessor(D, *cn[0]) == (0, 0)
    for (m0, _), (m, p) in zip(cn, cn[1:]):
        sp = split_predecessor(D, m, p)
        assert sp is None or sp[0] < m0


def test_lsv_rigid():
    D = lsv(25)
    for m, _ in D.coding_nodes():
        if m < D.height - 1:
            assert root_fixed_level_maps(D, m) == [tuple(range(m + 1))]


def test_lsv_small_depths():
    for d in (0, 1, 2, 3, 4):
        assert lsv_pathological(d).height == d + 1
    with pytest.raises(InputError):
        lsv_pathological(-1)
