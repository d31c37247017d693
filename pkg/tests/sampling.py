"""Random critical level types over random node sets of a strong prefix."""

from __future__ import annotations

from brdlab.age_engine import controlled_coding, essential_set, valid_passing_numbers
from brdlab.diary import AC, CODE, SPLIT, LevelType
from brdlab.strong_diary import NotInPrefix, realize_level_types


def random_type(P, rng, max_strong=12, max_size=3):
    """``(mu, S, tau)`` or None when the drawn age has no usable cover."""
    D = P.diary
    mu = rng.choice(P.strong_levels[:max_strong])
    w = D.width(mu)
    S = sorted(rng.sample(range(w), rng.randint(1, min(max_size, w))))
    pths = tuple(D.paths(mu)[p] for p in S)
    ps = [P.table[x] for x in pths]
    A = D.age(mu, S)
    kind = rng.choice([SPLIT, CODE, AC])
    k = rng.randrange(len(S))
    if kind == SPLIT:
        mk = tuple(("S",) if i == k else ("P", 0) for i in range(len(S)))
        return mu, S, LevelType(pths, mk, A)
    if kind == CODE:
        phi = []
        for i in range(len(S)):
            if i == k:
                continue
            pair = [i, k] if i < k else [k, i]
            V = valid_passing_numbers([ps[x] for x in pair], A.restrict(pair), pair.index(k))
            phi.append(rng.choice(V))
        C = controlled_coding(A, k, phi, ps)
        it = iter(phi)
        mk = tuple(("C",) if i == k else ("P", next(it)) for i in range(len(S)))
        return mu, S, LevelType(pths, mk, C)
    covers = []
    for B in P.table.path_poset(pths).covers_of(A):
        S1, _ = essential_set(A, B)
        # a non-free node at its maximum drops by splitting, not by an age-change level
        if len(S1) == 1 and not ps[S1[0]].free and A.at(S1[0]) == ps[S1[0]].top:
            continue
        covers.append(B)
    if not covers:
        return None
    B = rng.choice(covers)
    return mu, S, LevelType(pths, tuple(("P", 0) for _ in S), A, B)


def realizable_types(P, rng, n, **kw):
    """``n`` random requests whose gadgets already lie inside the prefix."""
    out = []
    tries = 0
    while len(out) < n:
        tries += 1
        if tries > 200 * n:
            raise RuntimeError("prefix too short for the requested sample")
        req = random_type(P, rng, **kw)
        if req is None:
            continue
        try:
            realize_level_types(P, [req], verify=False, extend=False)
        except NotInPrefix:
            continue
        out.append(req)
    return out
