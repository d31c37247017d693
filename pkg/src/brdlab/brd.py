"""Diaries coding a finite structure, big Ramsey degrees, and shapes seen in a prefix."""

from __future__ import annotations

import itertools

from brdlab.age_engine import catalog, is_controlled
from brdlab.diary import Diary, DiaryBuilder, induced_subdiary, str_of, validate
from brdlab.structures import FiniteStructure, InputError, LangSpec, aut_count, embeds, is_member, isomorphic

DEFAULT_LIMIT = 3


def shape_key(D: Diary) -> bytes:
    """Counting convention: diaries are identified by their canonical serialization."""
    return D.canonical_bytes()


def _partial(lang, labels, rows):
    """Structure on the coded vertices; ``rows[b][a]`` is the value from ``b`` to earlier ``a``."""
    n = len(labels)
    rel = [0] * (n * n)
    for b in range(n):
        for a in range(b):
            v = rows[b][a]
            rel[b * n + a] = v
            rel[a * n + b] = lang.flip[v]
    return FiniteStructure(tuple(labels), tuple(rel), lang.unary_count, lang.binary_count)


def enumerate_diaries(A: FiniteStructure, lang: LangSpec, limit: int = DEFAULT_LIMIT,
                      jobs: int = 1) -> list[Diary]:
    """Every complete finite diary coding ``A``, one per canonical form, sorted by bytes.

    The search is depth-first over legal level moves: a split while the split
    budget lasts, a controlled coding whose coded prefix still embeds in ``A``,
    or a step down to a cover of the current age. Age steps strictly descend
    in a finite poset and the other moves use up a budget, so it terminates.
    """
    if A.size == 0:
        raise InputError("the structure must have at least one vertex")
    if A.size > limit:
        raise InputError(f"structures with more than {limit} vertices exceed the size limit")
    if not is_member(A, lang):
        raise InputError("the structure is not in the class")
    table = catalog(lang).paths
    need = set(A.labels)
    tasks = [roots for r in range(1, A.size + 1) for roots in itertools.combinations(range(len(table)), r)
             if all(table[p].unary in need for p in roots)]
    if jobs > 1 and len(tasks) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as ex:
            parts = list(ex.map(_from_roots_raw, [(A, lang, roots) for roots in tasks]))
    else:
        parts = [_from_roots_raw((A, lang, roots)) for roots in tasks]
    found: dict[bytes, Diary] = {}
    for part in parts:
        for key, (roots, parents, symbols, deltas) in part:
            found.setdefault(key, Diary(lang, roots, parents, symbols, deltas, complete=True))
    out = [found[key] for key in sorted(found)]
    for D in out:
        bad = validate(D)
        if bad:
            raise AssertionError(f"enumerated an invalid diary: {bad[0]}")
    return out


def _from_roots_raw(args):
    A, lang, roots = args
    found = _from_roots(A, lang, roots)
    return [(key, (D.roots, D.parents, D.symbols, D.deltas)) for key, D in sorted(found.items())]


def _from_roots(A: FiniteStructure, lang: LangSpec, roots) -> dict[bytes, Diary]:
    cat = catalog(lang)
    table = cat.paths
    k = lang.binary_count
    found: dict[bytes, Diary] = {}

    def dfs(b: DiaryBuilder, splits_left, labels, rows, rel_of):
        w = b.width
        paths = [table[p] for p in b.paths]
        age = b.age()
        if w == 1 and splits_left == 0:
            if is_controlled(age, 0, (), paths):
                S = _partial(lang, labels + [paths[0].unary], rows + [rel_of[b.ids[0]]])
                if isomorphic(S, A):
                    D = b.build(complete=True)
                    found.setdefault(shape_key(D), D)
        if splits_left:
            for i in range(w):
                c = b.copy()
                y = c.split(i)
                r = dict(rel_of)
                r[y] = rel_of[b.ids[i]]
                dfs(c, splits_left - 1, labels, rows, r)
        if w >= 2:
            for j in range(w):
                x = b.ids[j]
                lab = labels + [paths[j].unary]
                rw = rows + [rel_of[x]]
                if not embeds(_partial(lang, lab, rw), A):
                    continue
                for phi in itertools.product(range(k), repeat=w - 1):
                    if not is_controlled(age, j, phi, paths):
                        continue
                    c = b.copy()
                    c.code(j, phi)
                    others = [y for y in b.ids if y != x]
                    r = {y: rel_of[y] + (q,) for y, q in zip(others, phi)}
                    dfs(c, splits_left, lab, rw, r)
        P = table.path_poset(tuple(b.paths))
        for B in P.covers_of(age):
            c = b.copy()
            ids = c.ids
            c.change([cat.relabel(key, ids.__getitem__) for key in B.extras])
            dfs(c, splits_left, labels, rows, rel_of)

    b = DiaryBuilder(lang, roots)
    dfs(b, A.size - len(roots), [], [], {x: () for x in b.ids})
    return found


def brd_copy(A: FiniteStructure, lang: LangSpec, limit: int = DEFAULT_LIMIT, jobs: int = 1) -> int:
    return len(enumerate_diaries(A, lang, limit, jobs))


def brd(A: FiniteStructure, lang: LangSpec, limit: int = DEFAULT_LIMIT, jobs: int = 1) -> int:
    return brd_copy(A, lang, limit, jobs) * aut_count(A)


def observed_shapes(prefix, A: FiniteStructure) -> dict[bytes, Diary]:
    """Induced subdiaries of ``prefix`` on coding-node sets whose coded structure is ``A``."""
    D = prefix.diary if hasattr(prefix, "diary") else prefix
    big = str_of(D)
    cn = D.coding_nodes()
    out: dict[bytes, Diary] = {}
    for X in itertools.combinations(range(len(cn)), A.size):
        if not isomorphic(big.induced(X), A):
            continue
        Theta, _ = induced_subdiary(D, [cn[i] for i in X])
        out.setdefault(shape_key(Theta), Theta)
    return dict(sorted(out.items()))
