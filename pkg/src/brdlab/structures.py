"""Finite structures over a binary relational language.

A structure on ``n`` vertices carries one label per vertex (a unary value, or
a part index for L_d-structures) and a binary value for every ordered pair.
Value ``0`` means "no relation".  The relation is stored flat and row-major,
``rel[a * n + b]`` being the value of the pair ``(a, b)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

from brdlab import kernels


class InputError(ValueError):
    """Raised for malformed or incompatible input."""


@dataclass(frozen=True)
class FiniteStructure:
    labels: tuple[int, ...]
    rel: tuple[int, ...]
    label_range: int = 1
    k: int = 2

    def __post_init__(self):
        n = len(self.labels)
        if len(self.rel) != n * n:
            raise InputError(f"relation table has {len(self.rel)} entries, expected {n * n}")
        for a in range(n):
            if self.rel[a * n + a] != 0:
                raise InputError("self-loops are not allowed")
        for x in self.labels:
            if not 0 <= x < self.label_range:
                raise InputError(f"label {x} outside range {self.label_range}")
        for v in self.rel:
            if not 0 <= v < self.k:
                raise InputError(f"binary value {v} outside range {self.k}")

    @property
    def size(self) -> int:
        return len(self.labels)

    def value(self, a: int, b: int) -> int:
        return self.rel[a * len(self.labels) + b]

    @classmethod
    def build(cls, labels, pairs=(), *, label_range=None, k=2, flip=None):
        """Build from upper pairs ``(a, b, value)``; the reverse is flip-completed."""
        labels = tuple(int(x) for x in labels)
        n = len(labels)
        if flip is None:
            flip = tuple(range(k))
        rel = [0] * (n * n)
        for a, b, v in pairs:
            if a == b or not (0 <= a < n and 0 <= b < n):
                raise InputError(f"bad pair ({a}, {b})")
            rel[a * n + b] = v
            rel[b * n + a] = flip[v]
        if label_range is None:
            label_range = max(labels, default=0) + 1
        return cls(labels, tuple(rel), label_range, k)

    def check_flip(self, flip) -> None:
        n = self.size
        for a in range(n):
            for b in range(a + 1, n):
                if self.rel[a * n + b] != flip[self.rel[b * n + a]]:
                    raise InputError(f"pair ({a}, {b}) is not flip-coherent")

    def induced(self, vertices) -> FiniteStructure:
        vs = list(vertices)
        n = self.size
        rel = tuple(self.rel[a * n + b] for a in vs for b in vs)
        return FiniteStructure(tuple(self.labels[a] for a in vs), rel, self.label_range, self.k)

    def relabel(self, f, label_range=None) -> FiniteStructure:
        """Apply ``f`` to labels, dropping vertices where ``f`` returns None."""
        keep = [a for a in range(self.size) if f(self.labels[a]) is not None]
        sub = self.induced(keep)
        lr = self.label_range if label_range is None else label_range
        return FiniteStructure(tuple(f(x) for x in sub.labels), sub.rel, lr, self.k)

    def upper_pairs(self):
        n = self.size
        return [(a, b, self.rel[a * n + b]) for a in range(n) for b in range(a + 1, n)
                if self.rel[a * n + b] != 0]

    @cached_property
    def key(self):
        return kernels.canon(self.labels, self.rel)[0]

    def __repr__(self):
        return f"FiniteStructure(labels={self.labels}, pairs={self.upper_pairs()})"


@dataclass(frozen=True)
class LangSpec:
    unary_count: int
    binary_count: int
    flip: tuple[int, ...]
    forbidden: tuple[FiniteStructure, ...] = ()
    name: str = field(default="", compare=False)

    def __post_init__(self):
        k = self.binary_count
        if self.unary_count < 1 or k < 1:
            raise InputError("unary and binary counts must be positive")
        if len(self.flip) != k or sorted(self.flip) != list(range(k)):
            raise InputError("flip must be a permutation of the binary values")
        if self.flip[0] != 0 or any(self.flip[self.flip[v]] != v for v in range(k)):
            raise InputError("flip must be an involution fixing 0")
        for F in self.forbidden:
            if F.k != k or F.label_range != self.unary_count:
                raise InputError("forbidden structure over a different language")
            F.check_flip(self.flip)
            n = F.size
            if n < 2:
                raise InputError("forbidden structures must have at least two vertices")
            if any(F.rel[a * n + b] == 0 for a in range(n) for b in range(n) if a != b):
                raise InputError("forbidden structures must be irreducible")

    @property
    def norm(self) -> int:
        return max((F.size for F in self.forbidden), default=0)

    def structure(self, labels, pairs=(), d=None) -> FiniteStructure:
        return FiniteStructure.build(labels, pairs, label_range=self.unary_count if d is None else d,
                                     k=self.binary_count, flip=self.flip)

    @cached_property
    def fingerprint(self) -> str:
        import hashlib
        blob = repr((self.unary_count, self.binary_count, self.flip,
                     sorted(F.key for F in self.forbidden)))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _check_compatible(small: FiniteStructure, big: FiniteStructure):
    if small.label_range != big.label_range or small.k != big.k:
        raise InputError("structures use different label ranges or binary counts")


def embeds(small: FiniteStructure, big: FiniteStructure) -> bool:
    _check_compatible(small, big)
    if small.size == 0:
        return True
    return kernels.embeds(small.labels, small.rel, big.labels, big.rel)


def isomorphic(a: FiniteStructure, b: FiniteStructure) -> bool:
    return a.size == b.size and a.key == b.key


def is_member(A: FiniteStructure, lang: LangSpec) -> bool:
    if A.label_range != lang.unary_count or A.k != lang.binary_count:
        raise InputError("structure is not over the language's unaries")
    return not any(F.size <= A.size and embeds(F, A) for F in lang.forbidden)


def aut_count(A: FiniteStructure) -> int:
    if A.size == 0:
        return 1
    return kernels.count_embeddings(A.labels, A.rel, A.labels, A.rel)


def _raw_structures(d, k, flip, n):
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    for labels in itertools.combinations_with_replacement(range(d), n):
        for values in itertools.product(range(k), repeat=len(pairs)):
            rel = [0] * (n * n)
            for (a, b), v in zip(pairs, values):
                rel[a * n + b] = v
                rel[b * n + a] = flip[v]
            yield labels, tuple(rel)


def enumerate_structures(lang: LangSpec, d: int, max_size: int) -> list[FiniteStructure]:
    """One representative per isomorphism class of L_d-structures, by size then key."""
    if max_size < 0:
        raise InputError("max_size must be non-negative")
    out = []
    for n in range(max_size + 1):
        seen = {kernels.canon(labels, rel)[0]
                for labels, rel in _raw_structures(d, lang.binary_count, lang.flip, n)}
        out.extend(from_key(key, d, lang) for key in sorted(seen))
    return out


def from_key(key, d: int, lang: LangSpec) -> FiniteStructure:
    """Inverse of the canonical key: labels ascending, lower-triangle code."""
    labels, code = key
    n = len(labels)
    rel = [0] * (n * n)
    it = iter(code)
    for p in range(n):
        for q in range(p):
            rel[p * n + q] = next(it)
    for p in range(n):
        for q in range(p):
            rel[q * n + p] = lang.flip[rel[p * n + q]]
    return FiniteStructure(labels, tuple(rel), d, lang.binary_count)
