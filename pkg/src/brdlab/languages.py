"""Built-in languages used throughout the tests and the CLI."""

from __future__ import annotations

from itertools import combinations

from brdlab.structures import FiniteStructure, LangSpec


def _clique(n: int, unaries=None, u_count=1) -> FiniteStructure:
    labels = tuple(unaries) if unaries is not None else (0,) * n
    pairs = [(a, b, 1) for a, b in combinations(range(n), 2)]
    return FiniteStructure.build(labels, pairs, label_range=u_count, k=2)


def rado() -> LangSpec:
    """Graphs with no constraint."""
    return LangSpec(1, 2, (0, 1), (), name="rado")


def henson(n: int) -> LangSpec:
    """Graphs omitting the complete graph on ``n`` vertices."""
    return LangSpec(1, 2, (0, 1), (_clique(n),), name=f"K{n}-free")


def triangle_free() -> LangSpec:
    return LangSpec(1, 2, (0, 1), (_clique(3),), name="triangle-free")


def noedge01() -> LangSpec:
    """Two unaries; an edge joining a 0-vertex to a 1-vertex is forbidden."""
    return LangSpec(2, 2, (0, 1), (_clique(2, (0, 1), 2),), name="noedge01")


BUILTIN = {
    "rado": rado,
    "triangle-free": triangle_free,
    "tf": triangle_free,
    "noedge01": noedge01,
}


def builtin(name: str) -> LangSpec:
    try:
        return BUILTIN[name.lower()]()
    except KeyError:
        raise KeyError(f"unknown built-in language {name!r}") from None


def single_vertex(lang: LangSpec, unary: int = 0) -> FiniteStructure:
    return lang.structure([unary])


def edge(lang: LangSpec, value: int = 1) -> FiniteStructure:
    return lang.structure([0, 0], [(0, 1, value)])


def non_edge(lang: LangSpec) -> FiniteStructure:
    return lang.structure([0, 0])
