import itertools

from brdlab.languages import henson
from brdlab.paths import is_free, maximal_paths, path_sort_poset, path_table


def test_maximal_paths(RADO, TF, NE01):
    (r,) = maximal_paths(0, RADO)
    assert len(r.chain) == 1 and r.free
    (t,) = maximal_paths(0, TF)
    assert len(t.chain) == 2 and not t.free
    assert t.top.extras == frozenset() and t.second == t.bottom
    for u in (0, 1):
        (p,) = maximal_paths(u, NE01)
        assert len(p.chain) == 1


def test_henson4_single_long_path():
    (p,) = maximal_paths(0, henson(4))
    assert len(p.chain) == 3 and not p.free


def test_is_free(RADO, TF, NE01):
    assert is_free(0, RADO) == (True, [(0, 1)])
    assert is_free(0, TF) == (False, [])
    ok, pairs = is_free(0, NE01)
    assert ok and (0, 1) in pairs


def test_path_sort_posets(RADO, TF):
    for ids in [(0,), (0, 0), (0, 0, 0)]:
        assert len(path_sort_poset(ids, RADO)) == 1
    assert len(path_sort_poset((0,), TF)) == 2
    assert len(path_sort_poset((0, 0), TF)) == 5


def test_path_sort_poset_is_filter(TF):
    """Consecutiveness in the path-sort poset agrees with the unary-sort poset."""
    table = path_table(TF)
    for ids in [(0, 0), (0, 0, 0)]:
        P = table.path_poset(ids)
        full = table.cat.poset(table.unary_sort(ids))
        full_hasse = {(full.elements[a], full.elements[b]) for a, b in full.hasse}
        for a, b in P.hasse:
            A, B = P.elements[a], P.elements[b]
            assert (A, B) in full_hasse
        for A, B in itertools.combinations(P.elements, 2):
            assert (A & B) in P
