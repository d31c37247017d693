"""Age classes of gluings and the operators acting on them.

A class ``K·γ`` over a sort ``ρ`` (one unary per label position) is stored as
the maximal class for ``ρ`` minus the upward closure of a finite antichain of
*obstructions*.  An obstruction is an irreducible labelled structure, kept as
its canonical key ``(labels, code)``.  Every class reachable from a gluing has
this shape because forbidden structures are irreducible: a copy of a forbidden
structure that meets the glued part leaves an irreducible remainder with at
most ``‖F‖ - 1`` vertices.  Keys of the minimal antichain are unique, so class
equality is equality of obstruction sets.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

from brdlab import kernels
from brdlab.structures import (
    FiniteStructure,
    InputError,
    LangSpec,
    enumerate_structures,
    is_member,
)


class BoundInsufficient(RuntimeError):
    """The gluing bound did not produce a stable, intersection-closed poset."""


def key_of(labels, rel):
    return kernels.canon(tuple(labels), tuple(rel))[0]


@lru_cache(maxsize=None)
def decode(key):
    """Return ``(labels, rel)`` with the flat relation of a canonical key.

    Only the lower triangle is filled from the code; the caller's flip map is
    needed for the upper triangle, so it is completed lazily by ``Catalog``.
    """
    labels, code = key
    n = len(labels)
    rel = [0] * (n * n)
    it = iter(code)
    for p in range(n):
        for q in range(p):
            rel[p * n + q] = next(it)
    return labels, rel


def labelset(key) -> frozenset:
    return frozenset(key[0])


def key_size(key) -> int:
    return len(key[0])


@dataclass(frozen=True)
class Gluing:
    X: FiniteStructure
    sort: tuple[int, ...]
    eta: tuple[tuple[int, ...], ...]  # eta[i][x]

    def __post_init__(self):
        if len(self.eta) != len(self.sort) or any(len(r) != self.X.size for r in self.eta):
            raise InputError("attachment map must be d x |X|")


class Catalog:
    """Per-language caches: decoded keys, maximal-class membership, posets."""

    def __init__(self, lang: LangSpec):
        self.lang = lang
        self.norm = lang.norm
        self.r = max(self.norm - 1, 1)
        self.trace_size = max(self.norm, 2) + 1
        self._full = {}
        self._max_ok = {}
        self._posets = {}
        self._reps = {}
        self._paths = None

    # -- keys ---------------------------------------------------------------
    def full(self, key):
        """Flat relation for a key, with both triangles filled."""
        got = self._full.get(key)
        if got is None:
            labels, rel = decode(key)
            n = len(labels)
            rel = list(rel)
            flip = self.lang.flip
            for p in range(n):
                for q in range(p):
                    rel[q * n + p] = flip[rel[p * n + q]]
            got = (labels, tuple(rel))
            self._full[key] = got
        return got

    def key_embeds(self, small, big) -> bool:
        if len(small[0]) > len(big[0]):
            return False
        if small == big:
            return True
        sl, sr = self.full(small)
        bl, br = self.full(big)
        pool = list(bl)
        for x in sl:
            try:
                pool.remove(x)
            except ValueError:
                return False
        return kernels.embeds(sl, sr, bl, br)

    def relabel(self, key, f):
        """Image of a key under a label map (vertices mapped to None are dropped)."""
        labels, rel = self.full(key)
        n = len(labels)
        keep = [a for a in range(n) if f(labels[a]) is not None]
        return key_of([f(labels[a]) for a in keep], [rel[a * n + b] for a in keep for b in keep])

    def lifts(self, key, pre):
        """All keys whose vertices relabel onto ``key`` under a map with preimages ``pre``."""
        labels, rel = self.full(key)
        choices = [pre.get(x, ()) for x in labels]
        if any(not c for c in choices):
            return set()
        return {key_of(pick, rel) for pick in itertools.product(*choices)}

    def in_max(self, key, sort) -> bool:
        """Whether the unary image of ``key`` under ``sort`` lies in the class."""
        labels, rel = self.full(key)
        img = key_of([sort[x] for x in labels], rel)
        ok = self._max_ok.get(img)
        if ok is None:
            L = self.lang
            s = FiniteStructure(tuple(sort[x] for x in labels), rel, L.unary_count, L.binary_count)
            ok = is_member(s, L)
            self._max_ok[img] = ok
        return ok

    def implied(self, key, extras) -> bool:
        """Whether ``key`` contains some member of ``extras``."""
        return any(self.key_embeds(e, key) for e in extras)

    def minimize(self, keys) -> frozenset:
        ks = sorted(set(keys), key=lambda k: (len(k[0]), k))
        kept = []
        for k in ks:
            if not any(len(e[0]) < len(k[0]) and self.key_embeds(e, k) for e in kept):
                kept.append(k)
        return frozenset(kept)

    # -- classes ------------------------------------------------------------
    def max_class(self, sort) -> AgeClass:
        return AgeClass(tuple(sort), frozenset(), self)

    def make(self, sort, keys) -> AgeClass:
        sort = tuple(sort)
        return AgeClass(sort, self.minimize(k for k in keys if self.in_max(k, sort)), self)

    def gluing_obstructions(self, g: Gluing):
        """Obstruction keys contributed by forbidden copies meeting ``X``."""
        X, sort, eta = g.X, g.sort, g.eta
        d = len(sort)
        out = set()
        for F in self.lang.forbidden:
            n = F.size
            for m in range(1, n):
                for dom in itertools.combinations(range(n), m):
                    rest = [v for v in range(n) if v not in dom]
                    for img in itertools.permutations(range(X.size), m):
                        if any(F.labels[v] != X.labels[y] for v, y in zip(dom, img)):
                            continue
                        if any(F.value(v, w) != X.value(y, z)
                               for (v, y), (w, z) in itertools.permutations(zip(dom, img), 2)):
                            continue
                        choices = []
                        for v in rest:
                            ok = [i for i in range(d) if sort[i] == F.labels[v]
                                  and all(eta[i][y] == F.value(v, u) for u, y in zip(dom, img))]
                            if not ok:
                                break
                            choices.append(ok)
                        else:
                            rel = [F.value(a, b) for a in rest for b in rest]
                            for pick in itertools.product(*choices):
                                out.add(key_of(pick, rel))
        return out

    def class_of_gluing(self, g: Gluing) -> AgeClass | None:
        """The class ``K·γ``; None when the glued structure itself is forbidden."""
        if g.X.label_range != self.lang.unary_count:
            raise InputError("gluing structure is not over the language's unaries")
        if not is_member(g.X, self.lang):
            return None
        return self.make(g.sort, self.gluing_obstructions(g))

    def gluings(self, sort, size):
        d = len(sort)
        k = self.lang.binary_count
        for X in enumerate_structures(self.lang, self.lang.unary_count, size):
            if X.size != size or not is_member(X, self.lang):
                continue
            for vals in itertools.product(range(k), repeat=d * size):
                eta = tuple(tuple(vals[i * size:(i + 1) * size]) for i in range(d))
                yield Gluing(X, tuple(sort), eta)

    def _closure(self, sort, bound):
        gens = {self.max_class(sort)}
        for size in range(1, bound + 1):
            for g in self.gluings(sort, size):
                c = self.class_of_gluing(g)
                if c is not None and c.admits_all_unaries():
                    gens.add(c)
        elems = set(gens)
        frontier = list(elems)
        while frontier:
            new = []
            for a in frontier:
                for b in list(elems):
                    c = a & b
                    if c not in elems:
                        elems.add(c)
                        new.append(c)
            frontier = new
        return elems

    def poset(self, sort, bound=None, check=True) -> AgePoset:
        sort = tuple(sort)
        cache_key = (sort, bound)
        got = self._posets.get(cache_key)
        if got is not None:
            return got
        b = self.r if bound is None else bound
        elems = self._closure(sort, b)
        if check:
            if self._closure(sort, b + 1) != elems:
                raise BoundInsufficient(f"class set for sort {sort} grows beyond gluing size {b}")
            for x in elems:
                for y in elems:
                    if x & y not in elems:
                        raise BoundInsufficient(f"poset for sort {sort} not intersection-closed")
        P = AgePoset(sort, tuple(self._order(elems)))
        self._posets[cache_key] = P
        return P

    def _order(self, elems):
        elems = list(elems)
        # trace order (max first) where traces are cheap, obstruction order beyond
        if elems and len(elems[0].sort) <= 3:
            return sorted(elems, key=lambda c: (-c.trace_count, c.trace_bytes))
        return sorted(elems, key=lambda c: (len(c.extras), c.ckey))

    def representatives(self, d):
        got = self._reps.get(d)
        if got is None:
            got = enumerate_structures(self.lang, d, self.trace_size)
            self._reps[d] = got
        return got

    @property
    def paths(self):
        if self._paths is None:
            from brdlab.paths import PathTable
            self._paths = PathTable(self)
        return self._paths


_CATALOGS: dict = {}


def catalog(lang: LangSpec) -> Catalog:
    cat = _CATALOGS.get(lang)
    if cat is None:
        cat = Catalog(lang)
        _CATALOGS[lang] = cat
    return cat


@dataclass(frozen=True, eq=False)
class AgeClass:
    sort: tuple[int, ...]
    extras: frozenset
    cat: Catalog = field(repr=False, compare=False)

    def __eq__(self, other):
        return isinstance(other, AgeClass) and self.sort == other.sort and self.extras == other.extras

    def __hash__(self):
        return hash((self.sort, self.extras))

    @property
    def rank(self) -> int:
        return len(self.sort)

    @cached_property
    def ckey(self):
        return (self.sort, tuple(sorted(self.extras)))

    # -- membership -----------------------------------------------------------
    def contains(self, B: FiniteStructure) -> bool:
        if B.label_range != self.rank:
            raise InputError("structure label range does not match the class rank")
        L = self.cat.lang
        img = FiniteStructure(tuple(self.sort[x] for x in B.labels), B.rel, L.unary_count, L.binary_count)
        if not is_member(img, L):
            return False
        for e in self.extras:
            el, er = self.cat.full(e)
            if len(el) <= B.size and kernels.embeds(el, er, B.labels, B.rel):
                return False
        return True

    def admits_all_unaries(self) -> bool:
        return not any(len(e[0]) == 1 for e in self.extras)

    @cached_property
    def trace(self) -> tuple[int, ...]:
        return tuple(int(self.contains(B)) for B in self.cat.representatives(self.rank))

    @property
    def trace_count(self) -> int:
        return sum(self.trace)

    @property
    def trace_bytes(self) -> bytes:
        bits = self.trace
        out = bytearray((len(bits) + 7) // 8)
        for i, b in enumerate(bits):
            if b:
                out[i // 8] |= 0x80 >> (i % 8)
        return bytes(out)

    def trace_hex(self) -> str:
        return self.trace_bytes.hex()

    # -- order ----------------------------------------------------------------
    def __le__(self, other: AgeClass) -> bool:
        if self.sort != other.sort:
            raise InputError("classes over different sorts")
        return all(e in self.extras or self.cat.implied(e, self.extras) for e in other.extras)

    def __ge__(self, other: AgeClass) -> bool:
        return other <= self

    def __lt__(self, other: AgeClass) -> bool:
        return self != other and self <= other

    def __gt__(self, other: AgeClass) -> bool:
        return other < self

    def __and__(self, other: AgeClass) -> AgeClass:
        if self.sort != other.sort:
            raise InputError("classes over different sorts")
        return AgeClass(self.sort, self.cat.minimize(self.extras | other.extras), self.cat)

    # -- restriction ------------------------------------------------------------
    def pull(self, e, d0: int) -> AgeClass:
        """``A·e`` for a partial map ``e`` from ``d0`` into the labels (dict or sequence)."""
        emap = dict(e) if isinstance(e, dict) else {i: v for i, v in enumerate(e) if v is not None}
        for i, v in emap.items():
            if not (0 <= i < d0 and 0 <= v < self.rank):
                raise InputError("partial map out of range")
        pre = {}
        for i in sorted(emap):
            pre.setdefault(emap[i], []).append(i)
        sort0 = []
        for i in range(d0):
            if i in emap:
                sort0.append(self.sort[emap[i]])
            else:
                sort0.append(None)
        keys = set()
        for k in self.extras:
            keys |= self.cat.lifts(k, pre)
        return _Pending(sort0, keys, self.cat)

    def restrict(self, S) -> AgeClass:
        """``A·S`` for an increasing list of positions."""
        S = list(S)
        if S != sorted(set(S)):
            raise InputError("restriction set must be increasing without repeats")
        pos = {x: i for i, x in enumerate(S)}
        keys = [self.cat.relabel(k, pos.get) for k in self.extras if labelset(k) <= pos.keys()]
        return AgeClass(tuple(self.sort[x] for x in S), frozenset(keys), self.cat)

    def at(self, i: int) -> AgeClass:
        return self.restrict([i])

    def restrict_at(self, S, B: AgeClass) -> AgeClass:
        S = list(S)
        if tuple(self.sort[x] for x in S) != B.sort:
            raise InputError("class sort does not match the restricted sort")
        keys = {self.cat.relabel(k, lambda y: S[y]) for k in B.extras}
        return self & AgeClass(self.sort, self.cat.minimize(keys), self.cat)

    def split(self, i: int) -> AgeClass:
        """``A·sp(d, i)``."""
        d = self.rank
        emap = {x: (x if x <= i else x - 1) for x in range(d + 1)}
        return self.pull(emap, d + 1).resolve(tuple(self.sort[emap[x]] for x in range(d + 1)))

    # -- adding a vertex -------------------------------------------------------
    def add_vertex(self, j: int, phi) -> AgeClass:
        """``A·Add_{j, φ}`` over the sort with position ``j`` removed."""
        d = self.rank
        phi = tuple(phi)
        if not 0 <= j < d or len(phi) != d - 1:
            raise InputError("need 0 <= j < d and len(phi) == d - 1")
        down = {x: (x if x < j else x - 1) for x in range(d) if x != j}
        sort1 = tuple(self.sort[x] for x in range(d) if x != j)
        L = self.cat.lang
        keys = set()
        for key in self.extras:
            labels, rel = self.cat.full(key)
            js = [a for a in range(len(labels)) if labels[a] == j]
            if not js:
                keys.add(key_of([down[x] for x in labels], rel))
            elif len(js) == 1:
                c = js[0]
                n = len(labels)
                rest = [a for a in range(n) if a != c]
                if all(rel[a * n + c] == phi[down[labels[a]]] for a in rest):
                    keys.add(key_of([down[labels[a]] for a in rest], [rel[a * n + b] for a in rest for b in rest]))
        uj = self.sort[j]
        for F in L.forbidden:
            n = F.size
            for a in range(n):
                if F.labels[a] != uj:
                    continue
                rest = [v for v in range(n) if v != a]
                choices = []
                for v in rest:
                    ok = [y for y in range(d - 1) if sort1[y] == F.labels[v] and phi[y] == F.value(v, a)]
                    if not ok:
                        break
                    choices.append(ok)
                else:
                    rel = [F.value(p, q) for p in rest for q in rest]
                    for pick in itertools.product(*choices):
                        keys.add(key_of(pick, rel))
        return self.cat.make(sort1, keys)

    def drop(self, j: int) -> AgeClass:
        """``A·(d \\ {j})``."""
        return self.restrict([x for x in range(self.rank) if x != j])


class _Pending:
    """Lifted keys awaiting the target sort (partial maps leave gaps)."""

    def __init__(self, sort0, keys, cat):
        self.sort0 = sort0
        self.keys = keys
        self.cat = cat

    def resolve(self, sort) -> AgeClass:
        sort = tuple(sort)
        for a, b in zip(self.sort0, sort):
            if a is not None and a != b:
                raise InputError("target sort disagrees with the pulled-back sort")
        return self.cat.make(sort, self.keys)


@dataclass(frozen=True)
class AgePoset:
    sort: tuple[int, ...]
    elements: tuple[AgeClass, ...]

    @cached_property
    def index(self):
        return {c: i for i, c in enumerate(self.elements)}

    def __contains__(self, c):
        return c in self.index

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    @cached_property
    def below(self):
        """``below[i]`` = indices j with elements[j] strictly inside elements[i]."""
        E = self.elements
        return tuple(frozenset(j for j in range(len(E)) if j != i and E[j] <= E[i]) for i in range(len(E)))

    @cached_property
    def hasse(self) -> tuple[tuple[int, int], ...]:
        out = []
        for i, low in enumerate(self.below):
            for j in low:
                if not any(j in self.below[m] for m in low):
                    out.append((i, j))
        return tuple(sorted(out))

    @property
    def maximum(self) -> AgeClass:
        return self.elements[0]

    @cached_property
    def minimum(self) -> AgeClass:
        m = self.elements[0]
        for c in self.elements[1:]:
            m = m & c
        return m

    def covers_of(self, c: AgeClass):
        i = self.index[c]
        return [self.elements[j] for a, j in self.hasse if a == i]


# ---------------------------------------------------------------------------
# Module-level operations


def class_of_gluing(g: Gluing, lang: LangSpec) -> AgeClass | None:
    return catalog(lang).class_of_gluing(g)


def admits_all_unaries(A: AgeClass) -> bool:
    return A.admits_all_unaries()


def compute_poset(sort, lang: LangSpec, bound=None, check=True) -> AgePoset:
    return catalog(lang).poset(tuple(sort), bound, check)


def restrict(A: AgeClass, e, sort0=None) -> AgeClass:
    """``A·e`` for ``e`` a sequence over the new positions (None = undefined).

    Undefined positions need a unary; it is taken from ``sort0`` or, for a
    single-unary language, is 0.
    """
    e = list(e)
    if sort0 is None:
        if any(v is None for v in e) and A.cat.lang.unary_count != 1:
            raise InputError("a partial map needs the full target sort")
        sort0 = tuple(0 if v is None else A.sort[v] for v in e)
    emap = {i: v for i, v in enumerate(e) if v is not None}
    return A.pull(emap, len(e)).resolve(sort0)


def restrict_at(A: AgeClass, S, B: AgeClass) -> AgeClass:
    return A.restrict_at(S, B)


def intersect(A: AgeClass, B: AgeClass, poset: AgePoset | None = None) -> AgeClass:
    C = A & B
    if poset is not None and C not in poset:
        raise BoundInsufficient("intersection missing from the computed poset")
    return C


def consecutive_pairs(P: AgePoset) -> set:
    return {(P.elements[i], P.elements[j]) for i, j in P.hasse}


def essential_witnesses(A: AgeClass, B: AgeClass):
    """All minimal members of ``A \\ B`` (as keys)."""
    return sorted(e for e in B.extras if e not in A.extras and not A.cat.implied(e, A.extras))


def essential_set(A: AgeClass, B: AgeClass, poset: AgePoset | None = None):
    if not (B < A):
        raise InputError("pair is not strictly decreasing")
    if poset is not None and (A, B) not in consecutive_pairs(poset):
        raise InputError("pair is not consecutive")
    wits = essential_witnesses(A, B)
    sets = {labelset(w) for w in wits}
    if len(sets) != 1:
        raise AssertionError(f"witnesses carry different label sets: {sorted(map(sorted, sets))}")
    w = wits[0]
    labels, rel = A.cat.full(w)
    S = sorted(sets.pop())
    return S, FiniteStructure(labels, rel, A.rank, A.cat.lang.binary_count)


def add_vertex_class(A: AgeClass, j: int, phi) -> AgeClass:
    return A.add_vertex(j, phi)


def split_class(A: AgeClass, i: int, path_sort) -> AgeClass:
    """``sp(A, i)``; ``path_sort`` gives the maximal path of every position."""
    p = path_sort[i]
    B = A.split(i)
    if not p.free and A.at(i) == p.top:
        B = B.restrict_at([i + 1], p.second)
    return B


def valid_passing_numbers(path_sort, A: AgeClass, j: int) -> list[int]:
    if len(path_sort) != 2 or A.rank != 2:
        raise InputError("valid passing numbers need a rank-2 class")
    other = path_sort[1 - j]
    k = A.cat.lang.binary_count
    return [q for q in range(k) if other.contains_class(A.add_vertex(j, (q,)))]


def in_path_poset(A: AgeClass, path_sort) -> bool:
    return all(path_sort[i].contains_class(A.at(i)) for i in range(A.rank))


def controlled_coding(A: AgeClass, j: int, phi, path_sort=None) -> AgeClass | None:
    """``⟨A, j, φ⟩`` computed by intersecting over the (path-sort) poset."""
    added = A.add_vertex(j, phi)
    if not added.admits_all_unaries():
        return None
    P = A.cat.poset(A.sort)
    out = A
    for D in P:
        if path_sort is not None and not in_path_poset(D, path_sort):
            continue
        if D <= A and D.add_vertex(j, phi) == added:
            out = out & D
    return out


def is_controlled(A: AgeClass, j: int, phi, path_sort=None) -> bool:
    added = A.add_vertex(j, phi)
    if added != A.drop(j):
        return False
    u = A.sort[j]
    if A.at(j) != A.cat.poset((u,)).minimum:
        return False
    return controlled_coding(A, j, phi, path_sort) == A
