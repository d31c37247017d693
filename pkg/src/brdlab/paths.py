"""Rank-1 posets, their maximal chains, free unaries and path-sort posets."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

from brdlab.age_engine import AgeClass, AgePoset, Catalog, Gluing, catalog
from brdlab.structures import LangSpec


@dataclass(frozen=True, eq=False)
class MaxPath:
    id: int
    unary: int
    chain: tuple[AgeClass, ...]  # from max(P_i) strictly down to min(P_i)
    chain_ids: tuple[int, ...]  # positions in P_i
    free: bool

    @cached_property
    def members(self) -> frozenset:
        return frozenset(self.chain)

    def contains_class(self, A: AgeClass) -> bool:
        return A in self.members

    @property
    def top(self) -> AgeClass:
        return self.chain[0]

    @property
    def second(self) -> AgeClass:
        """``max(p')``."""
        return self.chain[1]

    @property
    def bottom(self) -> AgeClass:
        return self.chain[-1]

    def __repr__(self):
        return f"MaxPath(id={self.id}, unary={self.unary}, chain={self.chain_ids}, free={self.free})"


def _maximal_chains(P: AgePoset):
    down = {}
    for a, b in P.hasse:
        down.setdefault(a, []).append(b)
    out = []

    def walk(i, acc):
        nxt = sorted(down.get(i, []))
        if not nxt:
            out.append(tuple(acc))
            return
        for j in nxt:
            walk(j, acc + [j])

    walk(0, [0])
    return out


class PathTable:
    """All maximal paths of a language, in the fixed global order."""

    def __init__(self, cat: Catalog):
        self.cat = cat
        lang = cat.lang
        self.free_pairs = {i: self._free_pairs(i) for i in range(lang.unary_count)}
        paths = []
        for i in range(lang.unary_count):
            P = cat.poset((i,))
            for ids in sorted(_maximal_chains(P)):
                paths.append((i, ids, tuple(P.elements[x] for x in ids)))
        self.paths = tuple(
            MaxPath(n, i, chain, ids, bool(self.free_pairs[i])) for n, (i, ids, chain) in enumerate(paths)
        )
        self._path_posets = {}

    def _free_pairs(self, i):
        lang = self.cat.lang
        top = self.cat.max_class((i,))
        out = []
        for j in range(lang.unary_count):
            X = lang.structure([j])
            for q in range(1, lang.binary_count):
                c = self.cat.class_of_gluing(Gluing(X, (i,), ((q,),)))
                if c == top:
                    out.append((j, q))
        return out

    def __getitem__(self, n) -> MaxPath:
        return self.paths[n]

    def __len__(self):
        return len(self.paths)

    def __iter__(self):
        return iter(self.paths)

    def of_unary(self, i):
        return [p for p in self.paths if p.unary == i]

    def unary_sort(self, path_ids):
        return tuple(self.paths[x].unary for x in path_ids)

    def path_poset(self, path_ids) -> AgePoset:
        path_ids = tuple(path_ids)
        got = self._path_posets.get(path_ids)
        if got is None:
            P = self.cat.poset(self.unary_sort(path_ids))
            ps = [self.paths[x] for x in path_ids]
            elems = tuple(A for A in P if all(ps[i].contains_class(A.at(i)) for i in range(len(ps))))
            got = AgePoset(P.sort, elems)
            self._path_posets[path_ids] = got
        return got


def path_table(lang: LangSpec) -> PathTable:
    return catalog(lang).paths


def maximal_paths(i: int, lang: LangSpec) -> list[MaxPath]:
    return path_table(lang).of_unary(i)


def is_free(i: int, lang: LangSpec):
    pairs = path_table(lang).free_pairs[i]
    return bool(pairs), list(pairs)


def path_sort_poset(path_ids, lang: LangSpec) -> AgePoset:
    return path_table(lang).path_poset(path_ids)
