import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from brdlab import _kernels_py, kernels
from brdlab.languages import _clique
from brdlab.structures import (FiniteStructure, InputError, aut_count, embeds, enumerate_structures, is_member,
                               isomorphic)


def graph(n, edges):
    return FiniteStructure.build([0] * n, [(a, b, 1) for a, b in edges], label_range=1)


TRIANGLE = graph(3, [(0, 1), (0, 2), (1, 2)])
P3 = graph(3, [(0, 1), (1, 2)])
EDGE = graph(2, [(0, 1)])
C5 = graph(5, [(i, (i + 1) % 5) for i in range(5)])


def test_embeds_examples():
    assert embeds(EDGE, TRIANGLE)
    assert not embeds(TRIANGLE, C5)
    assert embeds(graph(0, []), C5)


def test_embeds_rejects_label_mismatch():
    with pytest.raises(InputError):
        embeds(FiniteStructure.build([0, 1], label_range=2), EDGE)


def test_membership(TF, RADO):
    assert not is_member(TRIANGLE, TF)
    assert is_member(P3, TF)
    assert is_member(TRIANGLE, RADO)
    assert is_member(graph(4, list(itertools.combinations(range(4), 2))), RADO)


def test_enumerate_structures_counts(RADO):
    assert len(enumerate_structures(RADO, 1, 2)) == 4
    assert len(enumerate_structures(RADO, 1, 0)) == 1
    assert len(enumerate_structures(RADO, 2, 1)) == 3
    # graphs on at most 3 vertices: 1 + 1 + 2 + 4
    assert len(enumerate_structures(RADO, 1, 3)) == 8


def test_enumerate_structures_ignores_forbidden(TF):
    reps = enumerate_structures(TF, 1, 3)
    assert len(reps) == 8
    assert sum(is_member(A, TF) for A in reps) == 7


def test_aut_count():
    assert aut_count(EDGE) == 2
    assert aut_count(TRIANGLE) == 6
    assert aut_count(P3) == 2
    assert aut_count(C5) == 10


def test_structure_validation():
    with pytest.raises(InputError):
        FiniteStructure((0, 0), (1, 0, 0, 0))
    with pytest.raises(InputError):
        FiniteStructure((0,), (0,), label_range=1, k=2).relabel(lambda x: 3, label_range=1)
    with pytest.raises(InputError):
        FiniteStructure.build([0, 0], [(0, 0, 1)])


def test_lang_validation():
    from brdlab.structures import LangSpec

    with pytest.raises(InputError):
        LangSpec(1, 2, (1, 0))
    with pytest.raises(InputError):
        LangSpec(1, 2, (0, 1), (graph(3, [(0, 1)]),))
    assert _clique(3).size == 3


@st.composite
def structures(draw, max_n=6, d=2, k=3):
    n = draw(st.integers(0, max_n))
    labels = draw(st.lists(st.integers(0, d - 1), min_size=n, max_size=n))
    flip = (0, 2, 1) if k == 3 else tuple(range(k))
    pairs = [(a, b, draw(st.integers(0, k - 1))) for a in range(n) for b in range(a + 1, n)]
    return FiniteStructure.build(labels, pairs, label_range=d, k=k, flip=flip)


@settings(max_examples=150, deadline=None)
@given(structures(), st.randoms(use_true_random=False))
def test_canon_invariant_under_relabelling(A, rnd):
    perm = list(range(A.size))
    rnd.shuffle(perm)
    B = A.induced(perm)
    assert A.key == B.key
    assert isomorphic(A, B)
    code, order = kernels.canon(A.labels, A.rel)
    assert sorted(order) == list(range(A.size))
    C = A.induced(order)
    assert kernels.canon(C.labels, C.rel) == (code, tuple(range(A.size)))


@settings(max_examples=100, deadline=None)
@given(structures(max_n=4), structures(max_n=6))
def test_compiled_kernels_match_python(A, B):
    args = (A.labels, A.rel, B.labels, B.rel)
    assert kernels.count_embeddings(*args) == _kernels_py.count_embeddings(*args)
    assert kernels.embeds(*args) == _kernels_py.embeds(*args)
    assert kernels.canon(B.labels, B.rel) == _kernels_py.canon(B.labels, B.rel)


@settings(max_examples=60, deadline=None)
@given(structures(max_n=5, d=1, k=2))
def test_aut_count_matches_permutations(A):
    n = A.size
    brute = sum(1 for p in itertools.permutations(range(n))
                if all(A.value(a, b) == A.value(p[a], p[b]) for a in range(n) for b in range(n)))
    assert aut_count(A) == brute
