"""Ages of wide diary levels, keyed by stable node ids.

Along a diary a node keeps its id while it has a single successor; at a split
the left child keeps the id and the right child gets a fresh one.  The age of a
level is then an obstruction set over ids, and moving one level up touches only
the obstructions mentioning the node where something happened.

Every obstruction of a class in ``P(ρ)`` has at most ``r = max(‖F‖-1, 1)``
vertices, and ``A`` lies in ``P(ρ)`` exactly when it admits all unaries and each
restriction ``A·S`` with ``|S| <= r`` lies in the small poset for ``ρ∘S``
(lift each restriction back and intersect).  The checks below therefore work
one small label set at a time and never build a poset of full rank.
"""

from __future__ import annotations

import itertools
from collections import defaultdict

from brdlab.age_engine import AgeClass, Catalog, key_of, labelset


class AgeState:
    """A mutable class over node ids."""

    __slots__ = ("cat", "table", "path_of", "extras", "by_label", "journal")

    def __init__(self, cat: Catalog, path_of, extras=()):
        self.cat = cat
        self.table = cat.paths
        self.path_of = dict(path_of)
        self.extras = set()
        self.by_label = defaultdict(set)
        self.journal = None
        for k in extras:
            self._add(k)

    def copy(self) -> AgeState:
        new = AgeState.__new__(AgeState)
        new.cat = self.cat
        new.table = self.table
        new.path_of = dict(self.path_of)
        new.extras = set(self.extras)
        new.by_label = defaultdict(set, {x: set(v) for x, v in self.by_label.items() if v})
        new.journal = None
        return new

    def unary(self, x) -> int:
        return self.table[self.path_of[x]].unary

    @property
    def unary_map(self):
        return _UnaryMap(self)

    def _add(self, k):
        if self.journal is not None and k not in self.extras:
            self.journal.append((1, k))
        self.extras.add(k)
        for x in set(k[0]):
            self.by_label[x].add(k)

    def _remove(self, k):
        if self.journal is not None and k in self.extras:
            self.journal.append((0, k))
        self.extras.discard(k)
        for x in set(k[0]):
            s = self.by_label.get(x)
            if s is not None:
                s.discard(k)

    # -- queries ---------------------------------------------------------------
    def touching(self, x):
        return self.by_label.get(x, ())

    def within(self, ids) -> set:
        ids = set(ids)
        out = set()
        for x in ids:
            for k in self.by_label.get(x, ()):
                if labelset(k) <= ids:
                    out.add(k)
        return out

    def implied(self, key) -> bool:
        return any(self.cat.key_embeds(e, key) for e in self.within(labelset(key)))

    def positional(self, ids) -> AgeClass:
        """``Age·S`` for ``ids`` listed in level order."""
        pos = {x: i for i, x in enumerate(ids)}
        keys = frozenset(self.cat.relabel(k, pos.get) for k in self.within(pos))
        return AgeClass(tuple(self.unary(x) for x in ids), keys, self.cat)

    def same_as(self, other: AgeState) -> bool:
        return self.extras == other.extras

    # -- updates ---------------------------------------------------------------
    def insert(self, keys) -> list:
        """Intersect with the classes forbidding ``keys``; return the effective keys."""
        cat = self.cat
        fresh = [k for k in cat.minimize(keys) if not self.implied(k)]
        for E in sorted(fresh, key=lambda k: (len(k[0]), k)):
            ls = labelset(E)
            anchor = min(ls)
            for F in list(self.by_label.get(anchor, ())):
                if F != E and ls <= labelset(F) and cat.key_embeds(E, F):
                    self._remove(F)
            self._add(E)
        return fresh

    def discard(self, keys):
        for k in keys:
            if k in self.extras:
                self._remove(k)

    def split(self, x, y):
        """Right child ``y`` of ``x``: lift obstructions, then the non-free rule."""
        self.path_of[y] = self.path_of[x]
        p = self.table[self.path_of[x]]
        at_max = not any(len(set(k[0])) == 1 for k in self.touching(x))
        for k in list(self.touching(x)):
            ls = set(k[0])
            pre = {z: ((x, y) if z == x else (z,)) for z in ls}
            for new in self.cat.lifts(k, pre):
                if new != k:
                    self._add(new)
        if not p.free and at_max:
            self.insert(self.cat.relabel(k, lambda _z: y) for k in p.second.extras)

    def drop(self, x):
        for k in list(self.touching(x)):
            self._remove(k)
        self.by_label.pop(x, None)
        self.path_of.pop(x, None)


class _UnaryMap:
    __slots__ = ("s",)

    def __init__(self, s):
        self.s = s

    def __getitem__(self, x):
        return self.s.unary(x)


class Overlay:
    """``base`` intersected with extra obstructions, without copying ``base``."""

    def __init__(self, base: AgeState, add=(), remove=()):
        self.base = base
        self.cat = base.cat
        self.add = list(add)
        self.remove = set(remove)
        self.add_by = defaultdict(list)
        for k in self.add:
            for x in set(k[0]):
                self.add_by[x].append(k)

    def unary(self, x):
        return self.base.unary(x)

    def within(self, ids) -> set:
        ids = set(ids)
        out = self.base.within(ids) - self.remove
        for x in ids:
            for k in self.add_by.get(x, ()):
                if labelset(k) <= ids:
                    out.add(k)
        return set(self.cat.minimize(out))

    def positional(self, ids) -> AgeClass:
        pos = {x: i for i, x in enumerate(ids)}
        keys = frozenset(self.cat.relabel(k, pos.get) for k in self.within(pos))
        return AgeClass(tuple(self.unary(x) for x in ids), keys, self.cat)

    def implied(self, key) -> bool:
        return any(self.cat.key_embeds(e, key) for e in self.within(labelset(key)))


def _subsets_over(S0, ids, r, pos):
    others = [x for x in ids if x not in S0]
    for extra in range(0, r - len(S0) + 1):
        for T in itertools.combinations(others, extra):
            yield tuple(sorted(set(S0) | set(T), key=pos.__getitem__))


class LocalRules:
    """Cached small-poset verdicts shared by validation and construction."""

    def __init__(self, cat: Catalog):
        self.cat = cat
        self.table = cat.paths
        self._con = {}
        self._ctrl = {}
        self._lstar = {}
        self._vpn = {}

    # -- consecutive pairs -------------------------------------------------------
    def effective(self, C: AgeState, add, remove):
        cat = self.cat
        new = [k for k in cat.minimize(add) if not C.implied(k)]
        gone = [k for k in remove if k in C.extras]
        return sorted(new), sorted(gone)

    def con_violation(self, C: AgeState, add, remove, ids, pos):
        """Reason why ``C -> C ⊕ delta`` is not a consecutive pair (None if it is)."""
        cat = self.cat
        new, gone = self.effective(C, add, remove)
        for k in gone:
            if not any(cat.key_embeds(e, k) for e in new):
                return "the next age is not contained in the current one"
        if not new:
            return "the age does not change"
        for E in new:
            if len(E[0]) == 1:
                return "the next age does not admit all unaries"
            if len(E[0]) > cat.r:
                return "the next age has an obstruction beyond the size bound"
        Cp = Overlay(C, new)
        seen = set()
        for S0 in sorted({tuple(sorted(labelset(E), key=pos.__getitem__)) for E in new}):
            for S in _subsets_over(S0, ids, cat.r, pos):
                if S in seen:
                    continue
                seen.add(S)
                a = C.positional(S)
                b = Cp.positional(S)
                if a == b:
                    continue
                pth = tuple(C.path_of[x] for x in S)
                spos = {x: i for i, x in enumerate(S)}
                parts = tuple(sorted(cat.relabel(E, spos.get) for E in new))
                ck = (pth, a.ckey, b.ckey, parts)
                verdict = self._con.get(ck)
                if verdict is None:
                    verdict = self._con_local(pth, a, b, parts)
                    self._con[ck] = verdict
                if verdict:
                    return verdict
        return None

    def _con_local(self, pth, a, b, parts):
        cat = self.cat
        if b not in self.table.path_poset(pth):
            return "the next age leaves the path-sort poset"
        Q = cat.poset(a.sort)
        from brdlab.structures import FiniteStructure
        structs = []
        for p in parts:
            labels, rel = cat.full(p)
            structs.append(FiniteStructure(labels, rel, len(a.sort), cat.lang.binary_count))
        for L in Q:
            if b <= L and L != a and L <= a:
                if any(L.contains(s) for s in structs):
                    return "a class lies strictly between the two ages"
        return ""

    # -- adding a vertex ---------------------------------------------------------
    def add_candidates(self, C: AgeState, x, phi, ids):
        """Obstructions of ``A·Add_{x,φ}`` that mention neither ``x`` nor only old ones."""
        cat = self.cat
        L = cat.lang
        out = set()
        for key in C.touching(x):
            labels, rel = cat.full(key)
            js = [a for a in range(len(labels)) if labels[a] == x]
            if len(js) != 1:
                continue
            c = js[0]
            n = len(labels)
            rest = [a for a in range(n) if a != c]
            if all(rel[a * n + c] == phi[labels[a]] for a in rest):
                out.add(key_of([labels[a] for a in rest], [rel[a * n + b] for a in rest for b in rest]))
        ux = C.unary(x)
        buckets = defaultdict(list)
        for y in ids:
            if y != x:
                buckets[(C.unary(y), phi[y])].append(y)
        for F in L.forbidden:
            n = F.size
            for a in range(n):
                if F.labels[a] != ux:
                    continue
                rest = [v for v in range(n) if v != a]
                choices = [buckets.get((F.labels[v], F.value(v, a)), ()) for v in rest]
                if any(not c for c in choices):
                    continue
                rel = [F.value(p, q) for p in rest for q in rest]
                for pick in itertools.product(*choices):
                    out.add(key_of(pick, rel))
        um = C.unary_map
        return [k for k in out if cat.in_max(k, um)]

    def lstar(self, pth, j, phis, a: AgeClass, target: AgeClass) -> AgeClass:
        ck = (pth, j, phis, a.ckey, target.ckey)
        got = self._lstar.get(ck)
        if got is None:
            got = a
            for Lc in self.table.path_poset(pth):
                if Lc <= a and Lc.add_vertex(j, phis) >= target:
                    got = got & Lc
            self._lstar[ck] = got
        return got

    def coding_target(self, C: AgeState, x, phi, ids, pos):
        """Keys to insert into ``C`` to reach ``⟨C, x, φ⟩``; None if Add loses a unary."""
        cat = self.cat
        addk = [k for k in self.add_candidates(C, x, phi, ids) if not C.implied(k)]
        if any(len(k[0]) == 1 for k in cat.minimize(addk)):
            return None
        D1 = Overlay(C, cat.minimize(addk))
        keys = set(addk)
        for S in _subsets_over((x,), ids, cat.r, pos):
            j = S.index(x)
            rest = [y for y in S if y != x]
            a = C.positional(S)
            target = D1.positional(rest)
            pth = tuple(C.path_of[y] for y in S)
            ls = self.lstar(pth, j, tuple(phi[y] for y in rest), a, target)
            if ls != a:
                keys.update(cat.relabel(k, lambda z: S[z]) for k in ls.extras)
        return keys

    def controlled_violation(self, C: AgeState, x, phi, ids, pos):
        cat = self.cat
        for k in self.add_candidates(C, x, phi, ids):
            if not C.implied(k):
                return "adding the coded vertex changes the age (clause 1)"
        if C.positional([x]) != self.table[C.path_of[x]].bottom:
            return "the coded node's age is not the minimum of its unary poset (clause 2)"
        for S in _subsets_over((x,), ids, cat.r, pos):
            j = S.index(x)
            rest = [y for y in S if y != x]
            a = C.positional(S)
            pth = tuple(C.path_of[y] for y in S)
            phis = tuple(phi[y] for y in rest)
            ck = (pth, j, phis, a.ckey)
            ok = self._ctrl.get(ck)
            if ok is None:
                ok = self.lstar(pth, j, phis, a, a.drop(j)) == a
                self._ctrl[ck] = ok
            if not ok:
                return "a smaller class has the same coding data (clause 3)"
        return None

    def passing_numbers(self, C: AgeState, s, u, pos):
        pair = tuple(sorted((s, u), key=pos.__getitem__))
        A = C.positional(pair)
        j = pair.index(u)
        pth = tuple(C.path_of[y] for y in pair)
        ck = (pth, j, A.ckey)
        got = self._vpn.get(ck)
        if got is None:
            from brdlab.age_engine import valid_passing_numbers
            got = tuple(valid_passing_numbers([self.table[p] for p in pth], A, j))
            self._vpn[ck] = got
        return got

    # -- covers --------------------------------------------------------------------
    def cover_toward(self, C: AgeState, target_new, ids, pos):
        """Keys of the least cover of ``C`` that still contains ``C ∩ target``.

        ``target_new`` are the obstructions the target adds to ``C``.  Every
        cover has the form ``C ∩ L·f_S`` with ``S`` small, so the candidates are
        enumerated from the small posets and the maximal ones are the covers.
        """
        cat = self.cat
        T = Overlay(C, target_new)
        cands = {}
        seen = set()
        for S0 in sorted({tuple(sorted(labelset(E), key=pos.__getitem__)) for E in target_new}):
            for S in _subsets_over(S0, ids, cat.r, pos):
                if S in seen:
                    continue
                seen.add(S)
                a = C.positional(S)
                t = T.positional(S)
                if a == t:
                    continue
                pth = tuple(C.path_of[x] for x in S)
                for Lc in self.table.path_poset(pth):
                    if t <= Lc and Lc != a and Lc <= a:
                        keys = [cat.relabel(k, lambda z, S=S: S[z]) for k in Lc.extras]
                        new = tuple(sorted(k for k in cat.minimize(keys) if not C.implied(k)))
                        if new:
                            cands[new] = True
        if not cands:
            return None
        items = sorted(cands)
        maximal = []
        for c in items:
            Oc = Overlay(C, c)
            dominated = False
            for d in items:
                if d == c:
                    continue
                # candidate d strictly above c: every key of d is implied by C ∩ c
                if all(Oc.implied(k) for k in d) and not all(Overlay(C, d).implied(k) for k in c):
                    dominated = True
                    break
            if not dominated:
                maximal.append(c)
        return list(min(maximal))
