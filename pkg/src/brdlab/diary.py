"""Diaries over a finite prefix of levels.

Storage is positional.  Level ``m`` lists its nodes in lex order; each node at
level ``m + 1`` records the position of its parent and the symbol it appends.
Ages are not stored in full: every level carries a delta (keys to add, keys to
remove, in positional labels) relative to the age forced by the tree shape.
That forced age is ``max`` at level 0, the splitting class at a split, the
restriction at a coding level, and the previous age at an age-change level.
Hence a valid diary has empty deltas except at age-change levels, and every
mutation of the stored data shows up as a nonempty delta or a tree change.
"""

from __future__ import annotations

import bisect
import itertools
from collections import defaultdict, namedtuple
from dataclasses import dataclass, field
from functools import cached_property

from brdlab.age_engine import AgeClass, catalog, labelset, split_class
from brdlab.agestate import AgeState, LocalRules
from brdlab.structures import FiniteStructure, InputError, LangSpec

SPLIT, CODE, AC = "split", "code", "ac"


class Node(namedtuple("Node", "path seq")):
    """A node ``(t^p, t^seq)``."""

    @property
    def level(self) -> int:
        return len(self.seq)


@dataclass(frozen=True)
class Violation:
    level: int
    item: int
    expected: str
    found: str

    def __str__(self):
        return f"level {self.level}: item {self.item}: expected {self.expected}; found {self.found}"


_rules_cache: dict = {}


def rules_for(lang: LangSpec) -> LocalRules:
    got = _rules_cache.get(lang)
    if got is None:
        got = LocalRules(catalog(lang))
        _rules_cache[lang] = got
    return got


class Diary:
    """A finite diary prefix, or a complete finite diary when ``complete``."""

    def __init__(self, lang: LangSpec, roots, parents=(), symbols=(), deltas=None,
                 complete=False, strong_levels=None, gadgets=None):
        self.lang = lang
        self.cat = catalog(lang)
        self.table = self.cat.paths
        self.roots = tuple(int(p) for p in roots)
        self.parents = [tuple(int(x) for x in lv) for lv in parents]
        self.symbols = [tuple(int(x) for x in lv) for lv in symbols]
        h = len(self.parents) + 1
        if deltas is None:
            deltas = [((), ())] * h
        self.deltas = [(tuple(sorted(a)), tuple(sorted(r))) for a, r in deltas]
        self.complete = bool(complete)
        self.strong_levels = None if strong_levels is None else tuple(strong_levels)
        self.gadgets = None if gadgets is None else list(gadgets)
        self._check_shape()

    # -- shape ---------------------------------------------------------------------
    def _check_shape(self):
        k = self.lang.binary_count
        if not self.roots:
            raise InputError("level 0 has no nodes")
        if list(self.roots) != sorted(set(self.roots)):
            raise InputError("level 0 must list distinct paths in increasing order")
        if any(not 0 <= p < len(self.table) for p in self.roots):
            raise InputError("unknown path id at level 0")
        if len(self.symbols) != len(self.parents) or len(self.deltas) != self.height:
            raise InputError("per-level arrays disagree on the height")
        prev = len(self.roots)
        for m, (par, sym) in enumerate(zip(self.parents, self.symbols), start=1):
            if len(par) != len(sym):
                raise InputError(f"level {m}: parent and symbol lists differ in length")
            if not par:
                raise InputError(f"level {m} has no nodes")
            for i, (p, s) in enumerate(zip(par, sym)):
                if not 0 <= p < prev or not 0 <= s < k:
                    raise InputError(f"level {m}: node {i} has an out-of-range parent or symbol")
                if i and (par[i - 1], sym[i - 1]) >= (p, s):
                    raise InputError(f"level {m}: nodes are not in lex order")
            prev = len(par)
        for m, (add, rem) in enumerate(self.deltas):
            w = self.width(m)
            for key in add + rem:
                if any(not 0 <= x < w for x in key[0]):
                    raise InputError(f"level {m}: age delta names a node that does not exist")

    @property
    def height(self) -> int:
        return len(self.parents) + 1

    def width(self, m: int) -> int:
        return len(self.roots) if m == 0 else len(self.parents[m - 1])

    @cached_property
    def _paths(self):
        out = [self.roots]
        for par in self.parents:
            prev = out[-1]
            out.append(tuple(prev[p] for p in par))
        return out

    def paths(self, m: int):
        return self._paths[m]

    def unaries(self, m: int):
        return tuple(self.table[p].unary for p in self._paths[m])

    @cached_property
    def _children(self):
        out = []
        for m in range(self.height):
            ch = [[] for _ in range(self.width(m))]
            if m + 1 < self.height:
                for i, p in enumerate(self.parents[m]):
                    ch[p].append(i)
            out.append(ch)
        return out

    def children(self, m: int):
        return self._children[m]

    def is_terminal(self, m: int, pos: int) -> bool:
        if m == self.height - 1:
            return self.complete
        return not self._children[m][pos]

    def kind(self, m: int):
        """Level kind from the tree shape; None for an open last level, 'mixed' if invalid."""
        if m == self.height - 1 and not self.complete:
            return None
        ch = self._children[m] if m + 1 < self.height else [[] for _ in range(self.width(m))]
        odd = [len(c) for c in ch if len(c) != 1]
        if not odd:
            return AC
        if len(odd) > 1:
            return "mixed"
        return CODE if odd[0] == 0 else (SPLIT if odd[0] == 2 else "mixed")

    def event_node(self, m: int):
        ch = self._children[m] if m + 1 < self.height else [[] for _ in range(self.width(m))]
        for i, c in enumerate(ch):
            if len(c) != 1:
                return i
        return None

    def ancestor(self, m: int, pos: int, m0: int) -> int:
        while m > m0:
            pos = self.parents[m - 1][pos]
            m -= 1
        return pos

    def seq(self, m: int, pos: int):
        out = []
        while m > 0:
            out.append(self.symbols[m - 1][pos])
            pos = self.parents[m - 1][pos]
            m -= 1
        return tuple(reversed(out))

    def node(self, m: int, pos: int) -> Node:
        return Node(self._paths[m][pos], self.seq(m, pos))

    def level_nodes(self, m: int):
        return [self.node(m, i) for i in range(self.width(m))]

    def coding_nodes(self):
        """Terminal nodes as ``(level, position)``, in height order."""
        out = []
        for m in range(self.height):
            if self.kind(m) == CODE:
                out.append((m, self.event_node(m)))
        return out

    def levels_of(self, kind):
        return [m for m in range(self.height) if self.kind(m) == kind]

    # -- ages ------------------------------------------------------------------------
    def _delta_ids(self, m, ids):
        add, rem = self.deltas[m]
        f = ids.__getitem__
        relabel = self.cat.relabel
        return [relabel(k, f) for k in add], [relabel(k, f) for k in rem]

    def _start_state(self):
        ids = list(range(len(self.roots)))
        return ids, AgeState(self.cat, dict(zip(ids, self.roots)))

    def _advance(self, state, ids, m, next_id):
        """Forced transform from level ``m`` to ``m + 1``; returns (ids, next_id)."""
        w = self.width(m + 1) if m + 1 < self.height else 0
        new_ids = [None] * w
        ch = self._children[m]
        for p, cs in enumerate(ch):
            x = ids[p]
            if not cs:
                state.drop(x)
                continue
            new_ids[cs[0]] = x
            for c in cs[1:]:
                new_ids[c] = next_id
                state.split(x, next_id)
                next_id += 1
        return new_ids, next_id

    def _apply_delta(self, state, m, ids):
        add, rem = self._delta_ids(m, ids)
        gone = [k for k in rem if k in state.extras]
        state.discard(gone)
        fresh = state.insert(add)
        return fresh, gone

    @cached_property
    def history(self) -> History:
        ids, state = self._start_state()
        state.journal = []
        self._apply_delta(state, 0, ids)
        all_ids = [tuple(ids)]
        journal = [state.journal]
        next_id = len(ids)
        for m in range(self.height - 1):
            state.journal = []
            ids, next_id = self._advance(state, ids, m, next_id)
            self._apply_delta(state, m + 1, ids)
            all_ids.append(tuple(ids))
            journal.append(state.journal)
        state.journal = None
        return History(self, all_ids, journal, state)

    def ages_on(self, wanted):
        """Positional ages for ``{level: [positions, ...]}``; keys ``(level, positions)``."""
        return self.history.ages_on(wanted)

    def age(self, m: int, positions=None) -> AgeClass:
        if positions is None:
            positions = tuple(range(self.width(m)))
        positions = tuple(positions)
        return self.ages_on({m: [positions]})[(m, positions)]

    # -- misc --------------------------------------------------------------------------
    def normalized(self) -> Diary:
        """Same diary with deltas rewritten as their effective parts."""
        ids, state = self._start_state()
        deltas = []
        next_id = len(ids)
        for m in range(self.height):
            if m:
                ids, next_id = self._advance(state, ids, m - 1, next_id)
            fresh, gone = self._apply_delta(state, m, ids)
            pos = {x: i for i, x in enumerate(ids)}
            deltas.append((tuple(sorted(self.cat.relabel(k, pos.get) for k in fresh)),
                           tuple(sorted(self.cat.relabel(k, pos.get) for k in gone))))
        return Diary(self.lang, self.roots, self.parents, self.symbols, deltas, self.complete,
                     self.strong_levels, self.gadgets)

    def canonical_bytes(self) -> bytes:
        d = self.normalized()
        body = repr((self.lang.fingerprint, d.roots, d.parents, d.symbols, d.deltas, d.complete))
        return body.encode()

    def with_changes(self, **kw) -> Diary:
        args = dict(lang=self.lang, roots=self.roots, parents=self.parents, symbols=self.symbols,
                    deltas=self.deltas, complete=self.complete, strong_levels=self.strong_levels,
                    gadgets=self.gadgets)
        args.update(kw)
        return Diary(**args)

    def __eq__(self, other):
        return (isinstance(other, Diary) and self.lang == other.lang and self.roots == other.roots
                and self.parents == other.parents and self.symbols == other.symbols
                and self.deltas == other.deltas and self.complete == other.complete
                and self.strong_levels == other.strong_levels)

    def __hash__(self):
        return hash((self.roots, len(self.parents)))

    def __repr__(self):
        return (f"Diary(height={self.height}, width0={len(self.roots)}, complete={self.complete}, "
                f"coding_nodes={len(self.coding_nodes())})")


class History:
    """Node ids per level and the journal of obstruction changes."""

    def __init__(self, diary, ids, journal, final_state):
        self.diary = diary
        self.ids = ids
        self.journal = journal
        self.final_state = final_state
        self._index = None

    def _by_id(self):
        if self._index is None:
            idx = defaultdict(list)
            for m, entries in enumerate(self.journal):
                for n, (op, key) in enumerate(entries):
                    for x in set(key[0]):
                        idx[x].append((m, n))
            self._index = idx
        return self._index

    def ages_on(self, wanted):
        D = self.diary
        cat = D.cat
        id_lists = {}
        interest = set()
        for m, lists in wanted.items():
            for positions in lists:
                ids = tuple(self.ids[m][p] for p in positions)
                id_lists[(m, tuple(positions))] = ids
                interest.update(ids)
        idx = self._by_id()
        events = set()
        for x in interest:
            events.update(idx.get(x, ()))
        entries = []
        for m, n in sorted(events):
            op, key = self.journal[m][n]
            if labelset(key) <= interest:
                entries.append((m, op, key))
        keys = set()
        out = {}
        e = 0
        for m in sorted(wanted):
            while e < len(entries) and entries[e][0] <= m:
                _, op, key = entries[e]
                if op:
                    keys.add(key)
                else:
                    keys.discard(key)
                e += 1
            un = D.unaries(m)
            for positions in wanted[m]:
                positions = tuple(positions)
                ids = id_lists[(m, positions)]
                pos = {x: i for i, x in enumerate(ids)}
                ks = frozenset(cat.relabel(k, pos.get) for k in keys if labelset(k) <= pos.keys())
                out[(m, positions)] = AgeClass(tuple(un[p] for p in positions), ks, cat)
        return out


# ---------------------------------------------------------------------------
# Validation


def validate(D: Diary, lang: LangSpec | None = None, all_levels: bool = False) -> list[Violation]:
    """Check the diary conditions; an empty list means the diary is valid.

    By default only the first offending level is reported (later levels are
    usually knock-on effects); ``all_levels`` reports every level.
    """
    if lang is not None and lang != D.lang:
        raise InputError("diary belongs to a different language")
    rules = rules_for(D.lang)
    out: list[Violation] = []
    ids, state = D._start_state()
    fresh, gone = D._apply_delta(state, 0, ids)
    if fresh or gone:
        out.append(Violation(0, 3, "the maximal class at level 0", f"{len(fresh) + len(gone)} extra obstruction(s)"))
        if not all_levels:
            return out
    next_id = len(ids)
    last = D.height if D.complete else D.height - 1
    for m in range(last):
        found = _check_level(D, rules, state, ids, m)
        nxt = m + 1
        ids, next_id = D._advance(state, ids, m, next_id)
        if nxt < D.height:
            fresh, gone = D._apply_delta(state, nxt, ids)
            if (fresh or gone) and D.kind(m) in (SPLIT, CODE) and not found:
                item = 4 if D.kind(m) == SPLIT else 5
                found.append(Violation(m, item, "no age change beyond the forced one",
                                       f"{len(fresh)} added, {len(gone)} removed obstruction(s)"))
        if found:
            out.extend(found)
            if not all_levels:
                return out
    return out


def _check_level(D: Diary, rules: LocalRules, state: AgeState, ids, m):
    ch = D.children(m) if m + 1 < D.height else [[] for _ in range(D.width(m))]
    sizes = [len(c) for c in ch]
    odd = [i for i, s in enumerate(sizes) if s != 1]
    if len(odd) > 1:
        return [Violation(m, 1, "at most one node without exactly one successor",
                          f"{len(odd)} such nodes")]
    if odd and sizes[odd[0]] > 2:
        return [Violation(m, 1, "a splitting node with exactly two successors",
                          f"{sizes[odd[0]]} successors")]
    sym = D.symbols[m] if m + 1 < D.height else ()
    pos = {x: i for i, x in enumerate(ids)}
    if odd and sizes[odd[0]] == 2:
        t = odd[0]
        for i, cs in enumerate(ch):
            want = (0, 1) if i == t else (0,)
            got = tuple(sym[c] for c in cs)
            if got != want:
                return [Violation(m, 4, f"node {i} to have successor symbols {want}", f"{got}")]
        return []
    if odd:
        j = odd[0]
        phi = {ids[i]: sym[cs[0]] for i, cs in enumerate(ch) if i != j}
        why = rules.controlled_violation(state, ids[j], phi, ids, pos)
        if why:
            return [Violation(m, 5, "a controlled coding triple", why)]
        return []
    bad = [i for i, cs in enumerate(ch) if sym[cs[0]] != 0]
    if bad:
        return [Violation(m, 6, "every node to append 0", f"node {bad[0]} appends {sym[ch[bad[0]][0]]}")]
    nxt_ids = [ids[D.parents[m][c]] for c in range(D.width(m + 1))]
    add, rem = D._delta_ids(m + 1, nxt_ids)
    why = rules.con_violation(state, add, rem, ids, pos)
    if why:
        return [Violation(m, 6, "a consecutive pair of ages", why)]
    return []


# ---------------------------------------------------------------------------
# Coded structure


def str_of(D: Diary) -> FiniteStructure:
    """``Str#(Δ)``: coding nodes in height order, later-to-earlier value ``t(ℓ(s))``."""
    lang = D.lang
    cn = D.coding_nodes()
    n = len(cn)
    rel = [0] * (n * n)
    for b, (mb, pb) in enumerate(cn):
        for a in range(b):
            ma = cn[a][0]
            q = D.ancestor(mb, pb, ma + 1)
            v = D.symbols[ma][q]
            rel[b * n + a] = v
            rel[a * n + b] = lang.flip[v]
    labels = tuple(D.table[D.paths(m)[p]].unary for m, p in cn)
    return FiniteStructure(labels, tuple(rel), lang.unary_count, lang.binary_count)


# ---------------------------------------------------------------------------
# Embeddings


@dataclass(frozen=True)
class Embedding:
    """Level map ``φ̃`` and, per source level, the target positions of its nodes."""

    level_map: tuple[int, ...]
    node_map: tuple[tuple[int, ...], ...]

    def __call__(self, i, pos):
        return self.level_map[i], self.node_map[i][pos]

    def compose(self, inner: Embedding) -> Embedding:
        """``self ∘ inner``."""
        lm = tuple(self.level_map[j] for j in inner.level_map)
        nm = tuple(tuple(self.node_map[j][p] for p in inner.node_map[i])
                   for i, j in enumerate(inner.level_map))
        return Embedding(lm, nm)

    def coding_image(self, source: Diary):
        return [self(m, p) for m, p in source.coding_nodes()]

    @classmethod
    def identity(cls, D: Diary) -> Embedding:
        return cls(tuple(range(D.height)), tuple(tuple(range(D.width(m))) for m in range(D.height)))


def induced_subdiary(D: Diary, X):
    """``Δ‖_X`` and the embedding whose coding-node image is ``X``."""
    X = sorted(set((int(m), int(p)) for m, p in X))
    if not X:
        raise InputError("need at least one coding node")
    for m, p in X:
        if not (0 <= m < D.height and 0 <= p < D.width(m)) or D.kind(m) != CODE or D.event_node(m) != p:
            raise InputError(f"({m}, {p}) is not a coding node")
    top = X[-1][0]
    N = [None] * (top + 1)
    cur = {X[-1][1]}
    xs = defaultdict(set)
    for m, p in X:
        xs[m].add(p)
    N[top] = sorted(cur)
    for m in range(top - 1, -1, -1):
        cur = {D.parents[m][q] for q in cur} | xs[m]
        N[m] = sorted(cur)
    # ages of each projection before and after every level
    wanted = defaultdict(list)
    succ = {}
    for m in range(top + 1):
        wanted[m].append(tuple(N[m]))
        if m < top:
            nxt_set = set(N[m + 1])
            s = []
            for p in N[m]:
                s.append([c for c in D.children(m)[p] if c in nxt_set])
            succ[m] = s
            if all(len(c) == 1 for c in s):
                wanted[m + 1].append(tuple(c[0] for c in s))
    ages = D.ages_on(wanted)
    events = []
    for m in range(top + 1):
        if m == top:
            events.append((m, CODE))
            continue
        s = succ[m]
        if D.kind(m) == CODE and D.event_node(m) in xs[m]:
            events.append((m, CODE))
        elif any(len(c) == 2 for c in s):
            events.append((m, SPLIT))
        elif ages[(m, tuple(N[m]))] != ages[(m + 1, tuple(c[0] for c in s))]:
            events.append((m, AC))
    lm = tuple(m for m, _ in events)
    node_map = tuple(tuple(N[m]) for m in lm)
    parents, symbols = [], []
    for i in range(len(lm) - 1):
        m, kind = events[i]
        m1 = lm[i + 1]
        here = {q: a for a, q in enumerate(N[m])}
        par, sym = [], []
        for q in N[m1]:
            anc = D.ancestor(m1, q, m + 1)
            par.append(here[D.parents[m][anc]])
            sym.append(0 if kind == AC else D.symbols[m][anc])
        parents.append(par)
        symbols.append(sym)
    roots = tuple(D.paths(lm[0])[q] for q in N[lm[0]])
    theta_ages = [ages[(m, tuple(N[m]))] for m in lm]
    Theta = _with_ages(D.lang, roots, parents, symbols, theta_ages, [k for _, k in events])
    return Theta, Embedding(lm, node_map)


def _with_ages(lang, roots, parents, symbols, ages, kinds):
    """Assemble a complete finite diary from its tree and positional ages."""
    cat = catalog(lang)
    table = cat.paths
    deltas = []
    paths = list(roots)
    for i, A in enumerate(ages):
        if i == 0:
            expect = cat.max_class(A.sort)
        else:
            prev = ages[i - 1]
            kind = kinds[i - 1]
            prev_paths = paths
            paths = [prev_paths[p] for p in parents[i - 1]]
            if kind == SPLIT:
                par = parents[i - 1]
                t = next(p for p in range(len(prev_paths)) if par.count(p) == 2)
                expect = split_class(prev, t, [table[p] for p in prev_paths])
            elif kind == CODE:
                gone = next(p for p in range(len(prev_paths)) if p not in parents[i - 1])
                expect = prev.drop(gone)
            else:
                expect = prev
        add = tuple(sorted(k for k in A.extras if not cat.implied(k, expect.extras)))
        rem = tuple(sorted(k for k in expect.extras if not cat.implied(k, A.extras)))
        deltas.append((add, rem))
    return Diary(lang, roots, parents, symbols, deltas, complete=True)


def _relaxed_step(D: Diary, m, t, child, age_t):
    """Right child of a non-free splitting node at max, standing in for an age change."""
    p = D.table[D.paths(m)[t]]
    return (D.kind(m) == SPLIT and D.event_node(m) == t and D.symbols[m][child] == 1
            and not p.free and age_t == p.top)


def is_diary_embedding(phi: Embedding, Theta: Diary, D: Diary) -> bool:
    return not embedding_defects(phi, Theta, D)


def embedding_defects(phi: Embedding, Theta: Diary, D: Diary) -> list[str]:
    """Reasons why ``phi`` is not a diary embedding (empty if it is)."""
    lm, nm = phi.level_map, phi.node_map
    h = Theta.height
    if len(lm) != h or len(nm) != h:
        return ["the map does not cover every level"]
    if any(not 0 <= m < D.height for m in lm) or any(lm[i] >= lm[i + 1] for i in range(h - 1)):
        return ["the level map is not strictly increasing inside the target"]
    for i in range(h):
        row = nm[i]
        if len(row) != Theta.width(i) or any(not 0 <= q < D.width(lm[i]) for q in row):
            return [f"level {i}: nodes map outside the target level"]
        if any(row[a] >= row[a + 1] for a in range(len(row) - 1)):
            return [f"level {i}: lex order or injectivity fails"]
        for a, q in enumerate(row):
            if Theta.paths(i)[a] != D.paths(lm[i])[q]:
                return [f"level {i}: node {a} changes path"]
            if Theta.is_terminal(i, a) != D.is_terminal(lm[i], q):
                return [f"level {i}: node {a} coding status differs"]
    wanted = defaultdict(list)
    plus = {}
    for i in range(h):
        wanted[lm[i]].append(tuple(nm[i]))
    ages_t = {}
    for i in range(h - 1):
        m, m1 = lm[i], lm[i + 1]
        ups = [D.ancestor(m1, q, m + 1) for q in nm[i + 1]]
        plus[i] = ups
        wanted[m + 1].append(tuple(ups))
    ages = D.ages_on(wanted)
    for i in range(h):
        if Theta.age(i) != ages[(lm[i], tuple(nm[i]))]:
            return [f"level {i}: ages differ"]
    for i in range(h - 1):
        m = lm[i]
        kind = Theta.kind(i)
        ups = plus[i]
        age_m = None
        for c, q in enumerate(nm[i + 1]):
            a = Theta.parents[i][c]
            if D.parents[m][ups[c]] != nm[i][a]:
                return [f"level {i + 1}: node {c} does not extend the image of its parent"]
            want = Theta.symbols[i][c]
            got = D.symbols[m][ups[c]]
            if want != got:
                if age_m is None:
                    age_m = D.age(m, [nm[i][a]])
                if not (kind == AC and want == 0 and _relaxed_step(D, m, nm[i][a], ups[c], age_m)):
                    return [f"level {i + 1}: node {c} passes {want} but its image passes {got}"]
        if kind == SPLIT:
            t = Theta.event_node(i)
            c0, c1 = Theta.children(i)[t]
            if ups[c0] == ups[c1]:
                return [f"level {i}: the splitting node's children meet above its image"]
        if kind == AC:
            relaxed = any(D.symbols[m][u] == 1 for u in ups)
            if D.kind(m) != AC and not relaxed:
                return [f"level {i}: an age-change level maps to a {D.kind(m)} level"]
            if Theta.age(i + 1) != ages[(m + 1, tuple(ups))]:
                return [f"level {i}: the age change is not carried along"]
    return []


def find_embeddings(Theta: Diary, D: Diary, strong_only: bool = False) -> list[Embedding]:
    """All diary embeddings of a complete finite ``Theta`` into the prefix ``D``.

    An embedding is fixed by its coding-node image, so the search runs over
    increasing tuples of coding nodes whose coded structure matches, then
    compares the induced subdiary with ``Theta``.
    """
    if not Theta.complete:
        raise InputError("the source must be a complete finite diary")
    target = Theta.canonical_bytes()
    S = str_of(Theta)
    n = S.size
    big = str_of(D)
    cn = D.coding_nodes()
    sl = set(D.strong_levels or ())
    out = []

    def extend(chosen):
        b = len(chosen)
        if b == n:
            Th, phi = induced_subdiary(D, [cn[c] for c in chosen])
            if Th.canonical_bytes() == target:
                if not strong_only or all(m + 1 in sl for m in phi.level_map):
                    out.append(phi)
            return
        start = chosen[-1] + 1 if chosen else 0
        for c in range(start, len(cn)):
            if big.labels[c] != S.labels[b]:
                continue
            if any(big.value(c, chosen[a]) != S.value(b, a) for a in range(b)):
                continue
            extend(chosen + [c])

    extend([])
    return out


# ---------------------------------------------------------------------------
# Level types


@dataclass(frozen=True)
class LevelType:
    paths: tuple[int, ...]
    markers: tuple  # ("S",), ("C",) or ("P", q) per node
    age: AgeClass
    next_age: AgeClass | None = None
    base: tuple | None = field(default=None, compare=False)

    @property
    def size(self) -> int:
        return len(self.paths)

    @property
    def kind(self):
        tags = [mk[0] for mk in self.markers]
        if "S" in tags:
            return SPLIT
        if "C" in tags:
            return CODE
        return AC if self.next_age is not None else "pass"

    def key(self):
        return (self.paths, self.markers, self.age.ckey, None if self.next_age is None else self.next_age.ckey)


def level_type(D: Diary, m: int, positions) -> LevelType:
    positions = tuple(sorted(positions))
    if m >= D.height - 1 and not D.complete:
        raise InputError("the last level of an open prefix has no type")
    markers = []
    for p in positions:
        if D.is_terminal(m, p):
            markers.append(("C",))
        else:
            cs = D.children(m)[p]
            markers.append(("S",) if len(cs) == 2 else ("P", D.symbols[m][cs[0]]))
    A = D.age(m, positions)
    nxt = None
    if D.kind(m) == AC:
        B = D.age(m + 1, positions)
        if B != A:
            nxt = B
    return LevelType(tuple(D.paths(m)[p] for p in positions), tuple(markers), A, nxt, (m, positions))


def level_type_iso(t0: LevelType, t1: LevelType) -> bool:
    return t0.key() == t1.key()


def critical_nodes(D: Diary, m: int):
    kind = D.kind(m)
    if kind in (SPLIT, CODE):
        return [D.event_node(m)]
    if kind != AC:
        raise InputError(f"level {m} has no critical nodes (kind {kind})")
    H = D.history
    pos = {x: i for i, x in enumerate(H.ids[m])}
    sets = {labelset(k) for op, k in H.journal[m + 1] if op == 1}
    if not sets:
        return []
    if len(sets) != 1:
        # several new obstructions: keep the minimal ones' common label set
        sets = {min(sets, key=len)}
    return sorted(pos[x] for x in sets.pop())


class DiaryBuilder:
    """Grows a diary one level at a time while tracking ages by node id."""

    def __init__(self, lang: LangSpec, roots):
        self.lang = lang
        self.cat = catalog(lang)
        self.table = self.cat.paths
        self.rules = rules_for(lang)
        self.roots = tuple(roots)
        self.ids = list(range(len(self.roots)))
        self.paths = list(self.roots)
        self.state = AgeState(self.cat, dict(zip(self.ids, self.paths)))
        self.next_id = len(self.ids)
        self.parents, self.symbols = [], []
        self.deltas = [((), ())]
        self.kinds = []
        self.prev_ids = None
        self._pos = None

    def copy(self) -> DiaryBuilder:
        new = DiaryBuilder.__new__(DiaryBuilder)
        new.__dict__.update(self.__dict__)
        new.ids = list(self.ids)
        new.paths = list(self.paths)
        new.state = self.state.copy()
        new.parents = list(self.parents)
        new.symbols = list(self.symbols)
        new.deltas = list(self.deltas)
        new.kinds = list(self.kinds)
        new._pos = None
        return new

    @property
    def level(self) -> int:
        return len(self.parents)

    @property
    def width(self) -> int:
        return len(self.ids)

    @property
    def pos(self):
        if self._pos is None:
            self._pos = {x: i for i, x in enumerate(self.ids)}
        return self._pos

    def unary(self, i):
        return self.table[self.paths[i]].unary

    def age(self, positions=None) -> AgeClass:
        ids = self.ids if positions is None else [self.ids[i] for i in positions]
        return self.state.positional(ids)

    def _push(self, par, sym, ids, paths, kind, delta=((), ())):
        self.prev_ids = self.ids
        self.parents.append(tuple(par))
        self.symbols.append(tuple(sym))
        self.ids = ids
        self.paths = paths
        self.deltas.append(delta)
        self.kinds.append(kind)
        self._pos = None

    def split(self, i: int) -> int:
        """Split the node at position ``i``; returns the id of its right child."""
        par, sym, ids, paths = [], [], [], []
        y = self.next_id
        self.next_id += 1
        for p, x in enumerate(self.ids):
            par.append(p); sym.append(0); ids.append(x); paths.append(self.paths[p])
            if p == i:
                par.append(p); sym.append(1); ids.append(y); paths.append(self.paths[p])
        self.state.split(self.ids[i], y)
        self._push(par, sym, ids, paths, SPLIT)
        return y

    def code(self, j: int, phi) -> None:
        """Code the node at ``j``; ``phi`` lists the passing numbers of the others in order."""
        phi = list(phi)
        if self.width == 1:
            raise InputError("the last node is coded by building a complete diary")
        if len(phi) != self.width - 1:
            raise InputError("need one passing number per other node")
        par, ids, paths = [], [], []
        for p, x in enumerate(self.ids):
            if p != j:
                par.append(p); ids.append(x); paths.append(self.paths[p])
        self.state.drop(self.ids[j])
        self._push(par, phi, ids, paths, CODE)

    def change(self, keys) -> list:
        """An age-change level intersecting with the classes forbidding ``keys`` (id labels)."""
        fresh = self.state.insert(keys)
        pos = self.pos
        delta = (tuple(sorted(self.cat.relabel(k, pos.get) for k in fresh)), ())
        n = self.width
        self._push(range(n), [0] * n, list(self.ids), list(self.paths), AC, delta)
        return fresh

    def build(self, complete=False, strong_levels=None, gadgets=None) -> Diary:
        return Diary(self.lang, self.roots, self.parents, self.symbols, self.deltas,
                     complete=complete, strong_levels=strong_levels, gadgets=gadgets)
