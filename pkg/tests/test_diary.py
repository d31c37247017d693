import random

import pytest

from brdlab.diary import (AC, CODE, SPLIT, Diary, DiaryBuilder, Embedding, critical_nodes, embedding_defects,
                          find_embeddings, induced_subdiary, is_diary_embedding, level_type, level_type_iso,
                          str_of, validate)
from brdlab.structures import InputError, is_member

import mutants
from conftest import prefix

EDGE_KEY = ((0, 0), (1,))


def tf_vertex(TF):
    b = DiaryBuilder(TF, (0,))
    b.change([EDGE_KEY])
    return b.build(complete=True)


def rado_pair(RADO, q):
    b = DiaryBuilder(RADO, (0,))
    b.split(0)
    b.code(0, [q])
    return b.build(complete=True)


def test_small_diaries(TF, RADO):
    D = tf_vertex(TF)
    assert validate(D) == []
    assert [D.kind(m) for m in range(D.height)] == [AC, CODE]
    with pytest.raises(InputError):
        Diary(TF, (0,), [()], [()])
    assert str_of(D).size == 1
    E = rado_pair(RADO, 1)
    assert validate(E) == []
    S = str_of(E)
    assert S.size == 2 and S.value(1, 0) == 1
    assert str_of(rado_pair(RADO, 0)).value(1, 0) == 0


def test_tf_vertex_needs_age_change(TF):
    b = DiaryBuilder(TF, (0,))
    with pytest.raises(InputError):
        b.code(0, [])
    (v,) = validate(b.build(complete=True))
    assert v.item == 5 and v.level == 0


def test_language_mismatch(TF, RADO):
    with pytest.raises(InputError):
        validate(tf_vertex(TF), RADO)


def test_shape_errors(TF):
    with pytest.raises(InputError):
        Diary(TF, (0,), [(0, 0)], [(1, 0)])
    with pytest.raises(InputError):
        Diary(TF, (0,), [(1,)], [(0,)])
    with pytest.raises(InputError):
        Diary(TF, (0,), [(0,)], [(0,)], [([((0, 3), (1,))], ()), ((), ())])


@pytest.mark.parametrize("name,depth", [("rado", 12), ("tf", 12)])
def test_prefixes_validate(name, depth):
    D = prefix(name, depth).diary
    assert validate(D) == []
    assert is_member(str_of(D), D.lang)


MUTANTS = mutants.sample(prefix("rado", 10).diary, 40, seed=1) + mutants.sample(prefix("tf", 14).diary, 60, seed=2)


@pytest.mark.parametrize("mu", MUTANTS, ids=[m.label for m in MUTANTS])
def test_mutation_detected(mu):
    found = validate(mu.diary)
    assert len(found) == 1
    assert (found[0].level, found[0].item) == (mu.level, mu.item)


def test_mutation_coverage():
    assert len(MUTANTS) == 100
    assert {m.item for m in MUTANTS} == {1, 3, 4, 5, 6}


def test_all_levels_reports_more():
    D = prefix("tf", 12).diary
    ac = D.levels_of(AC)
    syms = [list(s) for s in D.symbols]
    for m in (ac[1], ac[-2]):
        syms[m][0] = 1
    M = D.with_changes(symbols=syms, strong_levels=None, gadgets=None)
    assert len(validate(M)) == 1
    assert len(validate(M, all_levels=True)) >= 2


def test_induced_subdiary_examples(RADO):
    P = prefix("rado", 12).diary
    cn = P.coding_nodes()
    Th, phi = induced_subdiary(P, [cn[3]])
    assert Th.height == 1 and str_of(Th).size == 1 and validate(Th) == []
    assert phi.coding_image(Th) == [cn[3]]
    E = rado_pair(RADO, 1)
    Th, phi = induced_subdiary(E, E.coding_nodes())
    assert Th.canonical_bytes() == E.canonical_bytes()
    with pytest.raises(InputError):
        induced_subdiary(P, [(0, 0)])
    with pytest.raises(InputError):
        induced_subdiary(P, [])


def test_induced_edge_in_tf():
    P = prefix("tf", 12).diary
    S = str_of(P)
    cn = P.coding_nodes()
    a, b = next((a, b) for b in range(S.size) for a in range(b) if S.value(b, a) == 1)
    Th, phi = induced_subdiary(P, [cn[a], cn[b]])
    assert validate(Th) == []
    assert str_of(Th).value(1, 0) == 1
    assert is_diary_embedding(phi, Th, P)


def test_find_embeddings_vertex(RADO):
    P = prefix("rado", 12).diary
    (V,) = [induced_subdiary(P, [P.coding_nodes()[0]])[0]]
    embs = find_embeddings(V, P)
    assert len(embs) == len(P.coding_nodes())
    assert all(is_diary_embedding(e, V, P) for e in embs)
    with pytest.raises(InputError):
        find_embeddings(P, P)


def test_identity_and_collapse(RADO):
    E = rado_pair(RADO, 1)
    assert is_diary_embedding(Embedding.identity(E), E, E)
    D = prefix("rado", 12).diary
    phi = find_embeddings(E, D)[0]
    m, m1 = phi.level_map[:2]
    assert m1 > m + 1
    # send the splitting node to an ancestor of one branch only
    q = D.ancestor(m1, phi.node_map[1][0], m + 1)
    bad = Embedding((m + 1,) + phi.level_map[1:], ((q,),) + phi.node_map[1:])
    assert embedding_defects(bad, E, D)


def test_embedding_defects_shape():
    D = prefix("tf", 10).diary
    Th, phi = induced_subdiary(D, D.coding_nodes()[:2])
    assert embedding_defects(Embedding(phi.level_map[:-1], phi.node_map[:-1]), Th, D)
    swapped = Embedding(phi.level_map, tuple(tuple(reversed(r)) for r in phi.node_map))
    if any(len(r) > 1 for r in phi.node_map):
        assert embedding_defects(swapped, Th, D)


def test_level_types():
    D = prefix("tf", 12).diary
    m = D.levels_of(SPLIT)[2]
    w = D.width(m)
    t = level_type(D, m, range(w))
    assert level_type_iso(t, t) and t.kind == SPLIT
    c = D.levels_of(CODE)[1]
    tc = level_type(D, c, range(D.width(c)))
    assert tc.kind == CODE
    a = D.levels_of(AC)[0]
    assert level_type(D, a, range(D.width(a))).kind == AC
    # one passing number changed
    mk = list(tc.markers)
    i = next(i for i, x in enumerate(mk) if x[0] == "P")
    mk[i] = ("P", 1 - mk[i][1])
    other = type(tc)(tc.paths, tuple(mk), tc.age, tc.next_age)
    assert not level_type_iso(tc, other)
    with pytest.raises(InputError):
        level_type(D, D.height - 1, [0])


def test_level_type_relabel_invariant():
    """Two nodes of the same level type at different positions give isomorphic types."""
    D = prefix("tf", 14).diary
    seen = {}
    hits = 0
    for m in D.levels_of(AC)[:40]:
        for p in range(D.width(m)):
            t = level_type(D, m, [p])
            k = t.key()
            if k in seen:
                hits += 1
                assert level_type_iso(seen[k], t)
            seen[k] = t
    assert hits > 0


def test_critical_nodes(TF):
    D = prefix("tf", 12).diary
    for m in D.levels_of(SPLIT) + D.levels_of(CODE):
        assert critical_nodes(D, m) == [D.event_node(m)]
    V = tf_vertex(TF)
    assert critical_nodes(V, 0) == [0]
    for m in D.levels_of(AC)[:20]:
        crit = critical_nodes(D, m)
        assert crit and all(0 <= p < D.width(m) for p in crit)
    with pytest.raises(InputError):
        critical_nodes(D, D.height - 1)


def _monoid_pairs(P, rng, n):
    """Pairs (psi: Theta -> Mid, phi: Mid -> D) of verified embeddings."""
    D = P.diary
    cn = D.coding_nodes()
    out = []
    while len(out) < n:
        X = sorted(rng.sample(range(len(cn)), min(4, len(cn))))
        Mid, phi = induced_subdiary(D, [cn[i] for i in X])
        mc = Mid.coding_nodes()
        Y = sorted(rng.sample(range(len(mc)), rng.randint(1, len(mc))))
        Th, _ = induced_subdiary(Mid, [mc[i] for i in Y])
        for psi in find_embeddings(Th, Mid):
            out.append((Th, Mid, psi, phi))
    return out[:n]


def embedding_monoid_check(rng, pairs=200, subsets=100):
    for name, depth, share in (("tf", 14, 0.5), ("rado", 10, 0.5)):
        P = prefix(name, depth)
        D = P.diary
        for Th, Mid, psi, phi in _monoid_pairs(P, rng, int(pairs * share)):
            assert is_diary_embedding(psi, Th, Mid)
            assert is_diary_embedding(phi, Mid, D)
            both = phi.compose(psi)
            assert embedding_defects(both, Th, D) == []
        big = str_of(D)
        cn = D.coding_nodes()
        for _ in range(int(subsets * share)):
            X = sorted(rng.sample(range(len(cn)), rng.randint(1, min(4, len(cn)))))
            Th, phi = induced_subdiary(D, [cn[i] for i in X])
            assert validate(Th) == []
            S = str_of(Th)
            assert S.labels == big.induced(X).labels and S.rel == big.induced(X).rel
            assert phi.coding_image(Th) == [cn[i] for i in X]


def test_embedding_monoid():
    embedding_monoid_check(random.Random(7), pairs=60, subsets=40)
