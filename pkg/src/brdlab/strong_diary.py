"""Strong diary prefixes built from splitting, age-change and coding gadgets."""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field

from brdlab.age_engine import AgeClass, catalog, essential_set, essential_witnesses, labelset
from brdlab.agestate import Overlay
from brdlab.diary import (
    AC,
    CODE,
    SPLIT,
    Diary,
    DiaryBuilder,
    LevelType,
    level_type,
    level_type_iso,
    rules_for,
)
from brdlab.structures import InputError, LangSpec


@dataclass(frozen=True)
class Gadget:
    kind: str  # split | ac | code
    start: int
    end: int
    node: int | None = None  # position at ``start`` of the split or coded node
    nodes: tuple = ()  # positions at ``start`` for an age-change gadget
    target: tuple = ()  # obstructions of the target class, over ``nodes``
    right: tuple = ()  # positions at ``end`` of the new right copies

    def as_dict(self):
        return {"kind": self.kind, "start": self.start, "end": self.end, "node": self.node,
                "nodes": list(self.nodes), "target": [[list(k[0]), list(k[1])] for k in self.target],
                "right": list(self.right)}


class _Queue:
    """FIFO of obligations; a batch may be a generator expanded on demand."""

    def __init__(self):
        self.items = deque()

    def push(self, ob):
        self.items.append(ob)

    def push_lazy(self, gen):
        self.items.append(_Lazy(gen))

    def pop(self):
        while self.items:
            head = self.items[0]
            if isinstance(head, _Lazy):
                ob = head.next()
                if ob is None:
                    self.items.popleft()
                    continue
                return ob
            return self.items.popleft()
        return None

    def __len__(self):
        return len(self.items)


class _Lazy:
    def __init__(self, gen):
        self.gen = gen

    def next(self):
        return next(self.gen, None)


class StrongDiaryPrefix:
    """A strong diary prefix together with its strong levels and gadget log."""

    def __init__(self, lang: LangSpec, seed: int = 0):
        self.lang = lang
        self.seed = seed
        self.cat = catalog(lang)
        self.table = self.cat.paths
        self.rules = rules_for(lang)
        self.b = DiaryBuilder(lang, range(len(self.table)))
        self.strong_levels = [0]
        self.gadgets: list[Gadget] = []
        self.queue = _Queue()
        self.ids_at = {0: tuple(self.b.ids)}
        self.ids_pre = {}  # ids at the last level of each gadget
        self.fans = {}  # coding gadget start -> (coded id, {id: {q: successor id}})
        self._diary = None
        self._econ = {}
        self._seed_level(set(self.b.ids))

    # -- obligations -------------------------------------------------------------
    def _seed_level(self, new_ids):
        ids = self.b.ids
        fresh = [x for x in ids if x in new_ids]
        for x in fresh:
            self.queue.push(("split", x))
            self.queue.push(("code", x))
        self.queue.push_lazy(self._ac_obligations(tuple(ids), frozenset(new_ids)))

    def econ(self, pth, A: AgeClass):
        ck = (pth, A.ckey)
        got = self._econ.get(ck)
        if got is None:
            P = self.table.path_poset(pth)
            got = []
            if A in P:
                d = len(pth)
                for B in P.covers_of(A):
                    wits = essential_witnesses(A, B)
                    if wits and all(len(labelset(w)) == d for w in wits):
                        got.append(B)
            self._econ[ck] = got
        return got

    def _ranks_with_econ(self):
        out = set()
        n = len(self.table)
        for d in range(1, self.cat.r + 1):
            for pth in itertools.product(range(n), repeat=d):
                P = self.table.path_poset(pth)
                if any(self.econ(pth, A) for A in P):
                    out.add(d)
                    break
        return out

    def _ac_obligations(self, ids, new):
        ranks = getattr(self, "_econ_ranks", None)
        if ranks is None:
            ranks = self._econ_ranks = self._ranks_with_econ()
        for d in sorted(ranks):
            for S in itertools.combinations(ids, d):
                if not new.intersection(S):
                    continue
                st = self.b.state
                A = st.positional(S)
                pth = tuple(st.path_of[x] for x in S)
                for B in self.econ(pth, A):
                    yield ("ac", S, B)

    # -- navigation ----------------------------------------------------------------
    @property
    def diary(self) -> Diary:
        if self._diary is None:
            self._diary = self.b.build(strong_levels=tuple(self.strong_levels),
                                       gadgets=[g.as_dict() for g in self.gadgets])
        return self._diary

    @property
    def depth(self) -> int:
        return len(self.gadgets)

    def pi_s(self, level: int) -> int:
        import bisect
        i = bisect.bisect_right(self.strong_levels, level) - 1
        return self.strong_levels[i]

    def left(self, level: int, pos: int, target: int) -> int:
        """``Left(t, target)`` for the node at ``(level, pos)``."""
        D = self.diary
        if target < level:
            raise InputError("Left needs a level at or above the node")
        m = level
        while m < target:
            ch = D.children(m)[pos]
            if not ch:
                raise InputError("the leftmost branch ends before the requested level")
            pos = ch[0]
            m += 1
        return pos

    def right(self, level: int, pos: int, target: int) -> int:
        D = self.diary
        m = level
        while m < target:
            ch = D.children(m)[pos]
            if not ch:
                raise InputError("the rightmost branch ends before the requested level")
            pos = ch[-1]
            m += 1
        return pos

    # -- gadgets -------------------------------------------------------------------
    def _finish(self, gadget):
        self._diary = None
        self.gadgets.append(gadget)
        self.strong_levels.append(self.b.level)
        before = set(self.ids_at[self.strong_levels[-2]])
        self.ids_at[self.b.level] = tuple(self.b.ids)
        self.ids_pre[self.b.level - 1] = tuple(self.b.prev_ids)
        self._seed_level(set(self.b.ids) - before)

    def splitting_gadget(self, x):
        b = self.b
        start = b.level
        t = b.pos[x]
        y = b.split(t)
        self._finish(Gadget(SPLIT, start, b.level, node=t, right=(b.pos[y],)))

    def ac_gadget(self, S, B: AgeClass):
        b = self.b
        st = b.state
        start = b.level
        pos = b.pos
        S = tuple(sorted(S, key=pos.__getitem__))
        A = st.positional(S)
        pth = tuple(st.path_of[x] for x in S)
        if B not in self.econ(pth, A):
            raise InputError("the target is not an essential consecutive class below the current age")
        spos = tuple(pos[x] for x in S)
        target = tuple(sorted(B.extras))
        if len(S) == 1:
            p = self.table[pth[0]]
            if not p.free and A == p.top:
                if B != p.second:
                    raise AssertionError("a non-free maximal node can only drop to the next class")
                y = b.split(spos[0])
                self._finish(Gadget(AC, start, b.level, nodes=spos, target=target, right=(b.pos[y],)))
                return
        U = [b.split(b.pos[x]) for x in S]
        keys = [self.cat.relabel(k, lambda z: U[z]) for k in B.extras]
        self._descend(keys)
        self._finish(Gadget(AC, start, b.level, nodes=spos, target=target,
                            right=tuple(b.pos[y] for y in U)))

    def coding_gadget(self, x):
        b = self.b
        start = b.level
        t = b.pos[x]
        u = b.split(t)
        pos = b.pos
        others = [y for y in b.ids if y != u]
        fan = self.fans[start] = (u, {})
        fan = fan[1]
        valid = {y: self.rules.passing_numbers(b.state, y, u, pos) for y in others}
        phi = {}
        for y in others:
            I = sorted(valid[y])
            if I[0] != 0:
                raise AssertionError("0 must always be a valid passing number")
            chain = [y]
            for _ in range(len(I) - 1):
                chain.append(b.split(b.pos[chain[-1]]))
            for z, q in zip(chain, I):
                phi[z] = q
            fan[y] = dict(zip(I, chain))
        keys = self.rules.coding_target(b.state, u, phi, b.ids, b.pos)
        if keys is None:
            raise AssertionError("adding the coded vertex loses a unary")
        self._descend(sorted(keys))
        j = b.pos[u]
        b.code(j, [phi[y] for y in b.ids if y != u])
        self._finish(Gadget(CODE, start, b.level, node=t))

    def _descend(self, target_keys):
        """Age-change levels from the current age down to the current age ∩ target."""
        b = self.b
        cat = self.cat
        by_label = {}
        for k in target_keys:
            for z in set(k[0]):
                by_label.setdefault(z, []).append(k)
        pending = deque(sorted(target_keys, key=lambda k: (tuple(sorted(b.pos[z] for z in set(k[0]))), k)))
        while pending:
            st = b.state
            while pending and st.implied(pending[0]):
                pending.popleft()
            if not pending:
                break
            E = pending[0]
            keys = self._greedy_cover(E, by_label)
            if keys is None:
                need = [k for k in pending if not st.implied(k)]
                keys = self.rules.cover_toward(st, need, b.ids, b.pos)
                if keys is None:
                    raise AssertionError("no consecutive class toward the target")
            b.change(keys)

    def _greedy_cover(self, E, by_label):
        b = self.b
        st = b.state
        cat = self.cat
        pos = b.pos
        S = tuple(sorted(set(E[0]), key=pos.__getitem__))
        a = st.positional(S)
        sset = set(S)
        extra = {k for z in S for k in by_label.get(z, ()) if labelset(k) <= sset}
        t = Overlay(st, extra).positional(S)
        pth = tuple(st.path_of[z] for z in S)
        cands = [L for L in self.table.path_poset(pth) if t <= L and L != a and L <= a]
        if not cands:
            return None
        top = [L for L in cands if not any(L < M for M in cands)]
        L = min(top, key=lambda c: c.ckey)
        keys = [cat.relabel(k, lambda z: S[z]) for k in L.extras]
        keys = [k for k in cat.minimize(keys) if not st.implied(k)]
        if self.rules.con_violation(st, keys, [], b.ids, pos) is None:
            return keys
        return None

    # -- scheduling -------------------------------------------------------------------
    def step(self):
        ob = self.queue.pop()
        if ob is None:
            raise AssertionError("the obligation queue ran dry")
        kind = ob[0]
        if kind == "split":
            self.splitting_gadget(ob[1])
        elif kind == "code":
            self.coding_gadget(ob[1])
        else:
            self.ac_gadget(ob[1], ob[2])
        return ob

    def extend(self, gadgets: int):
        for _ in range(gadgets):
            self.step()
        return self


def _row(P: StrongDiaryPrefix, level):
    row = P.ids_at.get(level)
    if row is None:
        row = P.ids_pre.get(level)
    if row is None:
        row = P.diary.history.ids[level]
    return row


def _ids(P: StrongDiaryPrefix, level, positions):
    row = _row(P, level)
    return [row[q] for q in positions]


def _positions(P: StrongDiaryPrefix, level, ids):
    where = {x: q for q, x in enumerate(_row(P, level))}
    try:
        return [where[x] for x in ids]
    except KeyError:
        raise InputError(f"a node does not reach level {level} along its left branch") from None


def _check_strong(P: StrongDiaryPrefix, level):
    if level not in P.strong_levels:
        raise InputError(f"level {level} is not a strong level")


def _end_extends(D: Diary, m0, S0, m1, T0) -> bool:
    if len(S0) != len(T0):
        return False
    up = [D.ancestor(m1, q, m0) for q in T0]
    return up == list(S0) and len(set(T0)) == len(T0)


def left_copy(P: StrongDiaryPrefix, mu: int, S0, nu: int, T0):
    """``T0 ∪ Left(Δ(μ) \\ S0, ν)``, checked to carry the age of ``Δ(μ)``."""
    _check_strong(P, mu)
    _check_strong(P, nu)
    if nu < mu:
        raise InputError("the target level lies below the source level")
    D = P.diary
    S0, T0 = sorted(S0), sorted(T0)
    if not _end_extends(D, mu, S0, nu, T0):
        raise InputError("T0 does not end-extend S0")
    if D.age(mu, S0) != D.age(nu, T0):
        raise InputError("T0 does not carry the age of S0")
    w = len(P.ids_at[mu])
    skip = set(S0)
    rest = [p for p in range(w) if p not in skip]
    # strong-level nodes keep their id along the leftmost branch
    T = sorted(set(T0) | set(_positions(P, nu, _ids(P, mu, rest))))
    if len(T) != w:
        raise AssertionError("left copies collide with T0")
    full = tuple(range(w))
    got = D.ages_on({mu: [full], nu: [tuple(T)]})
    if got[(mu, full)] != got[(nu, tuple(T))]:
        raise AssertionError("the left copy changed the age")
    return T


def left_safe_failures(P: StrongDiaryPrefix):
    """Pairs ``μ < ν`` of strong levels where ``Left(Δ(μ), ν)`` changes the age."""
    D = P.diary
    bad = []
    SL = P.strong_levels
    for i, mu in enumerate(SL):
        full = tuple(range(len(P.ids_at[mu])))
        wanted = {mu: [full]}
        for nu in SL[i + 1:]:
            wanted[nu] = [tuple(_positions(P, nu, P.ids_at[mu]))]
        got = D.ages_on(wanted)
        for nu in SL[i + 1:]:
            if got[(nu, wanted[nu][0])] != got[(mu, full)]:
                bad.append((mu, nu))
    return bad


def _coding_gadget_at(P: StrongDiaryPrefix, start: int) -> Gadget:
    for g in P.gadgets:
        if g.start == start:
            if g.kind != CODE:
                raise InputError(f"the gadget at level {start} is not a coding gadget")
            return g
    raise InputError(f"no gadget starts at level {start}")


def _fan(P: StrongDiaryPrefix, g: Gadget, x):
    """``{q: id}`` of the successors of id ``x`` through the coding gadget ``g``."""
    fans = P.fans[g.start][1]
    if x not in fans:
        raise InputError("the node is coded inside this gadget")
    return fans[x]


def star_step(P: StrongDiaryPrefix, start: int, s: int, q: int) -> int:
    """``s*q``: the successor at the end of the coding gadget at ``start`` that passed ``q``."""
    g = _coding_gadget_at(P, start)
    if not 0 <= s < len(P.ids_at[start]):
        raise InputError("no such node")
    fan = _fan(P, g, _ids(P, start, [s])[0])
    if q not in fan:
        raise InputError(f"{q} is not a valid passing number here; valid: {sorted(fan)}")
    return _positions(P, g.end, [fan[q]])[0]


def _find(P: StrongDiaryPrefix, after: int, pred):
    for g in P.gadgets:
        if g.start >= after and pred(g):
            return g
    return None


def _cover_step(P: StrongDiaryPrefix, A: AgeClass, target: AgeClass, paths):
    """A cover of ``A`` above ``target`` as (essential positions, class on them)."""
    from brdlab.agestate import AgeState

    d = A.rank
    st = AgeState(P.cat, dict(enumerate(paths)), A.extras)
    need = [k for k in target.extras if not st.implied(k)]
    pos = {i: i for i in range(d)}
    keys = P.rules.cover_toward(st, need, list(range(d)), pos)
    if keys is None:
        raise AssertionError("no cover toward the requested age")
    S1 = sorted(set().union(*(labelset(k) for k in keys)))
    C = P.cat.make(A.sort, list(A.extras) + list(keys))
    return S1, C.restrict(S1)


class NotInPrefix(LookupError):
    """A realization needs a gadget the prefix does not contain yet."""


def _ac_here(P: StrongDiaryPrefix, lev, ids, B: AgeClass, extend=True):
    """An age-change gadget at or after ``lev`` on ``ids``, appended if missing."""
    want = tuple(sorted(B.extras))

    def match(g):
        return g.kind == AC and g.target == want and _ids(P, g.start, g.nodes) == list(ids)
    g = _find(P, lev, match)
    if g is None:
        if not extend:
            raise NotInPrefix("age change")
        P.ac_gadget(ids, B)
        g = P.gadgets[-1]
    return g


def _event_here(P: StrongDiaryPrefix, lev, x, kind, extend=True):
    def match(g):
        if kind == SPLIT and g.kind == AC and g.end == g.start + 1:
            return _ids(P, g.start, g.nodes) == [x]
        return g.kind == kind and _ids(P, g.start, [g.node]) == [x]
    g = _find(P, lev, match)
    if g is None:
        if not extend:
            raise NotInPrefix(kind)
        (P.splitting_gadget if kind == SPLIT else P.coding_gadget)(x)
        g = P.gadgets[-1]
    return g


def realize_level_type(P: StrongDiaryPrefix, mu: int, S, tau: LevelType, anchored=None):
    """A level set ``T`` end-extending ``S`` with ``T ≅* τ`` just below a strong level.

    Returns ``(level, positions)``. Gadgets already in the prefix are reused;
    missing ones are appended. With ``anchored = (T0_level, T0)`` the result
    is ``T0`` plus left copies of the rest of ``S``.
    """
    return realize_level_types(P, [(mu, S, tau, anchored)])[0]


def realize_level_types(P: StrongDiaryPrefix, requests, verify: bool = True, extend: bool = True):
    """Several realizations; the prefix is rebuilt once for the final check.

    With ``extend=False`` only gadgets already present are used and
    :class:`NotInPrefix` is raised otherwise.
    """
    out = []
    for req in requests:
        mu, S, tau = req[:3]
        anchored = req[3] if len(req) > 3 else None
        if anchored is not None:
            out.append(_realize_anchored(P, mu, sorted(S), tau, *anchored))
        else:
            out.append(_realize(P, mu, S, tau, extend))
    if verify:
        D = P.diary
        for (level, T), req in zip(out, requests):
            _verified(P, D, level, T, req[2])
    return out


def _realize(P: StrongDiaryPrefix, mu, S, tau, extend=True):
    _check_strong(P, mu)
    st = P.b.state
    S = sorted(S)
    width = len(P.ids_at[mu])
    if not S or any(not 0 <= p < width for p in S):
        raise InputError("S must be a nonempty set of nodes at the strong level")
    cur = _ids(P, mu, S)
    pths = tuple(st.path_of[x] for x in cur)
    if tau.paths != pths or not tau.age <= st.positional(cur):
        raise InputError("the level type is not based on S")
    if tau.kind == "pass":
        raise InputError("the level type is not critical")
    lev = mu
    while True:
        # ages of strong-level ids are read at the top: left is age-safe
        A = P.b.state.positional(cur)
        if A == tau.age:
            break
        S1, B1 = _cover_step(P, A, tau.age, pths)
        g = _ac_here(P, lev, [cur[i] for i in S1], B1, extend)
        for i, y in zip(S1, _ids(P, g.end, g.right)):
            cur[i] = y
        lev = g.end
    if tau.kind == AC:
        S1, _ = essential_set(tau.age, tau.next_age)
        g = _ac_here(P, lev, [cur[i] for i in S1], tau.next_age.restrict(S1), extend)
        for i, y in zip(S1, _ids(P, g.end, g.right)):
            cur[i] = y
        return g.end - 1, sorted(_positions(P, g.end - 1, cur))
    k = next(i for i, mk in enumerate(tau.markers) if mk[0] in "SC")
    if tau.kind == SPLIT:
        g = _event_here(P, lev, cur[k], SPLIT, extend)
        return g.start, sorted(_positions(P, g.start, cur))
    g = _event_here(P, lev, cur[k], CODE, extend)
    u = P.fans[g.start][0]
    ids = []
    for i, x in enumerate(cur):
        if i == k:
            ids.append(u)
            continue
        fan = _fan(P, g, x)
        q = tau.markers[i][1]
        if q not in fan:
            raise InputError(f"passing number {q} is not valid at node {i}; valid: {sorted(fan)}")
        ids.append(fan[q])
    return g.end - 1, sorted(_positions(P, g.end - 1, ids))


def _verified(P, D, level, T, tau):
    T = sorted(T)
    if level + 1 not in P.strong_levels:
        raise AssertionError("the realized level is not just below a strong level")
    got = level_type(D, level, T)
    if not level_type_iso(got, tau):
        raise AssertionError(f"realized type differs: {got.key()} != {tau.key()}")
    return level, T


def _realize_anchored(P, mu, S, tau, level0, T0):
    D = P.diary
    T0 = sorted(T0)
    if level0 + 1 not in P.strong_levels:
        raise InputError("T0 must sit just below a strong level")
    if tau.age != D.age(mu, S):
        raise InputError("the anchored variant needs Age(τ) = Age(S)")
    S0 = [D.ancestor(level0, q, mu) for q in T0]
    if not set(S0) <= set(S) or len(set(S0)) != len(S0):
        raise InputError("T0 does not end-extend a subset of S")
    T = sorted(set(T0) | {P.left(mu, p, level0) for p in S if p not in set(S0)})
    if not _end_extends(D, mu, S, level0, T):
        raise InputError("left copies collide with T0")
    if D.age(level0, T) != D.age(mu, S):
        raise AssertionError("the anchored copy changed the age")
    return level0, T


def build_prefix(lang: LangSpec, depth: int, seed: int = 0) -> StrongDiaryPrefix:
    """A strong diary prefix with ``depth`` gadgets, obligations served first-in first-out.

    ``seed`` is recorded for reproducibility; the schedule itself is deterministic.
    """
    if depth < 0:
        raise InputError("depth must be non-negative")
    return StrongDiaryPrefix(lang, seed).extend(depth)


# ---------------------------------------------------------------------------
# A rigid diary for the Rado graph


def rado_adjacent(i: int, j: int) -> int:
    """The enumerated Rado graph: ``r_i ~ r_j`` (i < j) iff bit ``i`` of ``j`` is set."""
    if i > j:
        i, j = j, i
    return (j >> i) & 1


def lsv_pathological(depth: int) -> Diary:
    """Levels ``0..depth`` of a rigid tree coding the Rado graph.

    Every level has one splitting or one coding node. The first coding node
    is ``100``; each later coding node is grown straight up from a carrier of
    the right type string, so its last right turn happens before the previous
    coding level. Between coding levels, the lex-least carrier of a type with
    fewer than three carriers splits until every type has three.
    """
    from brdlab.languages import rado

    if depth < 0:
        raise InputError("depth must be non-negative")
    b = DiaryBuilder(rado(), [0])
    tau = {}
    coded = None  # id of the node waiting to be coded next
    n = 0  # index of that coding node

    def ready():
        return b.level >= depth

    # 1 | 0 then 0 splits, then 10 splits: {000, 010, 100, 101}
    for step in range(3):
        if ready():
            return b.build()
        if step == 0:
            one = b.split(0)
        elif step == 1:
            b.split(0)
        else:
            b.split(b.pos[one])
    coded = one
    tau = {x: () for x in b.ids if x != coded}
    while not ready():
        sigma = tuple(rado_adjacent(m, n + 1) for m in range(n))
        carriers = [x for x in b.ids if x != coded]
        pstar = next(x for x in carriers if tau[x] == sigma)
        phi = {pstar: rado_adjacent(n, n + 1)}
        seen = {}
        for x in carriers:
            if x != pstar:
                c = seen.get(tau[x], 0)
                phi[x] = c % 2
                seen[tau[x]] = c + 1
        b.code(b.pos[coded], [phi[x] for x in b.ids if x != coded])
        tau = {x: tau[x] + (phi[x],) for x in b.ids if x != pstar}
        coded = pstar
        n += 1
        while not ready():
            count = {}
            for x in b.ids:
                if x != coded:
                    count[tau[x]] = count.get(tau[x], 0) + 1
            short = next((x for x in b.ids if x != coded and count[tau[x]] < 3), None)
            if short is None:
                break
            tau[b.split(b.pos[short])] = tau[short]
    return b.build()


def split_predecessor(D: Diary, m: int, pos: int, branch_only: bool = True):
    """The deepest splitting node below ``(m, pos)``, as ``(level, position)``.

    With ``branch_only`` only splitting nodes from which the node leaves
    through the right child count. ``None`` if there is none.
    """
    level, p = m, pos
    while level > 0:
        parent = D.parents[level - 1][p]
        up = level - 1
        if D.kind(up) == SPLIT and D.event_node(up) == parent:
            if not branch_only or D.symbols[up][p] == 1:
                return up, parent
        level, p = up, parent
    return None


def root_fixed_level_maps(D: Diary, top: int):
    """Level maps of root-fixing embeddings of the levels ``0..top`` of ``D`` into ``D``.

    Only for diaries without age changes. Each source node carries the set of
    its possible images, so a level map is feasible iff no set runs empty;
    under the identity map every set is a singleton.
    """
    H = D.height
    if not 0 <= top < H - 1:
        raise InputError("the top level must have a successor level")
    kinds = [D.kind(m) for m in range(H - 1)]
    if AC in kinds:
        raise InputError("root-fixing search is only for diaries without age changes")
    events = [D.event_node(m) for m in range(H - 1)]

    def down(cands, m, m1):
        """Descendants at ``m1`` of the nodes in ``cands`` at level ``m``."""
        cur = cands
        for lev in range(m, m1):
            ch = D.children(lev)
            cur = {c for q in cur for c in ch[q]}
        return cur

    found = []

    def walk(i, lm, cand):
        M = lm[-1]
        if M >= H - 1:
            return
        kind = kinds[i]
        if kinds[M] != kind or events[M] not in cand[events[i]]:
            return
        cand = list(cand)
        cand[events[i]] = {events[M]}
        ch_src = D.children(i)
        ch_tgt = D.children(M)
        nxt = []
        for a, cs in enumerate(ch_src):
            for c in cs:
                bit = D.symbols[i][c]
                nxt.append({d for q in cand[a] for d in ch_tgt[q] if D.symbols[M][d] == bit})
        if any(not s for s in nxt):
            return
        if i == top:
            found.append(tuple(lm))
            return
        for M1 in range(M + 1, H - 1):
            walk(i + 1, lm + [M1], [down(s, M + 1, M1) for s in nxt])

    walk(0, [0], [{0}])
    return found
