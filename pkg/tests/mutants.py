"""Single-defect mutants of valid diary prefixes.

Each mutant changes one stored bit, marker or delta and carries the level
and diary item at which the defect must be reported.  Expected items are
read off the tree shape and the path table, never off the validator.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from brdlab.diary import AC, CODE, SPLIT, Diary
from brdlab.paths import path_table

EDGE_KEY = ((0, 0), (1,))


@dataclass
class Mutant:
    label: str
    diary: Diary
    level: int
    item: int


def truncate(D: Diary, h: int) -> Diary:
    return Diary(D.lang, D.roots, D.parents[:h - 1], D.symbols[:h - 1], D.deltas[:h], complete=False)


def _flip(D, m, child, value):
    symbols = [list(s) for s in D.symbols]
    symbols[m][child] = value
    return D.with_changes(symbols=symbols, strong_levels=None, gadgets=None)


def _with_delta(D, m, add=(), rem=()):
    deltas = list(D.deltas)
    a, r = deltas[m]
    deltas[m] = (tuple(a) + tuple(add), tuple(r) + tuple(rem))
    return D.with_changes(deltas=deltas, strong_levels=None, gadgets=None)


def _fresh_key(D, m):
    """An obstruction absent from the age at level ``m``: an edge at a node on a maximal class."""
    table = path_table(D.lang)
    for p in range(D.width(m)):
        path = table[D.paths(m)[p]]
        A = D.age(m, (p,))
        if A == path.top and not any(len(e[0]) == 1 for e in A.extras):
            return ((p, p), (1,))
    return None


def split_mutants(D):
    out = []
    for m in D.levels_of(SPLIT):
        t = D.event_node(m)
        for p, cs in enumerate(D.children(m)):
            if p != t and len(cs) == 1:
                out.append(Mutant(f"split {m}: node {p} appends 1", _flip(D, m, cs[0], 1), m, 4))
                break
        key = _fresh_key(D, m + 1)
        if key is not None:
            out.append(Mutant(f"split {m}: extra age change", _with_delta(D, m + 1, add=[key]), m, 4))
        # a second node with two successors, on the truncated prefix
        T = truncate(D, m + 2)
        for p in range(D.width(m)):
            if p == t:
                continue
            c = D.children(m)[p][0]
            par = [list(x) for x in T.parents]
            sym = [list(x) for x in T.symbols]
            par[m].insert(c + 1, p)
            sym[m].insert(c + 1, 1)
            deltas = list(T.deltas)
            out.append(Mutant(f"split {m}: node {p} also splits",
                              Diary(D.lang, T.roots, par, sym, deltas, complete=False), m, 1))
            break
    return out


def coding_mutants(D):
    table = path_table(D.lang)
    out = []
    for m in D.levels_of(CODE):
        key = _fresh_key(D, m + 1) if m + 1 < D.height else None
        if key is not None:
            out.append(Mutant(f"code {m}: extra age change", _with_delta(D, m + 1, add=[key]), m, 5))
        j = D.event_node(m)
        for p, cs in enumerate(D.children(m)):
            if p == j or D.symbols[m][cs[0]] != 0:
                continue
            path = table[D.paths(m)[p]]
            # a non-free node on its maximal class loses that class when joined to a new vertex
            if not path.free and D.age(m, (p,)) == path.top:
                out.append(Mutant(f"code {m}: node {p} passes 1", _flip(D, m, cs[0], 1), m, 5))
                break
    return out


def ac_mutants(D):
    out = []
    for m in D.levels_of(AC):
        if m + 1 >= D.height:
            continue
        p = len(D.children(m)) - 1
        out.append(Mutant(f"ac {m}: node {p} appends 1", _flip(D, m, D.children(m)[p][0], 1), m, 6))
        deltas = list(D.deltas)
        deltas[m + 1] = ((), ())
        out.append(Mutant(f"ac {m}: no age change", D.with_changes(deltas=deltas, strong_levels=None,
                                                                   gadgets=None), m, 6))
    return out


def root_mutants(D):
    key = _fresh_key(D, 0)
    if key is None:
        return []
    return [Mutant("root: extra obstruction", _with_delta(D, 0, add=[key]), 0, 3)]


def all_mutants(D):
    return root_mutants(D) + split_mutants(D) + coding_mutants(D) + ac_mutants(D)


def sample(D, n, seed=0):
    pool = all_mutants(D)
    rng = random.Random(seed)
    by_item = {}
    for mu in pool:
        by_item.setdefault(mu.item, []).append(mu)
    # keep every item represented, then fill at random
    picked = [rng.choice(v) for _, v in sorted(by_item.items())]
    rest = [mu for mu in pool if mu not in picked]
    rng.shuffle(rest)
    return (picked + rest)[:n]
