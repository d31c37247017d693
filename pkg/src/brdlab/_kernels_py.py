"""Pure-Python versions of the hot combinatorial kernels.

Structures are passed in a flat form: ``labels`` is a tuple of vertex labels
and ``rel`` is a flat row-major tuple of length n*n holding the binary value
of every ordered pair (the diagonal is ignored).
"""

from __future__ import annotations


def canon(labels, rel):
    """Return ``(code, order)`` with ``code`` minimal over relabellings.

    Vertices are listed with labels ascending; among those orders the one with
    the lexicographically least lower-triangle relation string wins.  ``order``
    lists original vertex indices in canonical position order.
    """
    n = len(labels)
    if n == 0:
        return ((), ()), ()
    if n == 1:
        return ((labels[0],), ()), (0,)
    if n == 2:
        a, b = labels
        if a < b:
            return ((a, b), (rel[2],)), (0, 1)
        if b < a:
            return ((b, a), (rel[1],)), (1, 0)
        x, y = rel[2], rel[1]
        if x <= y:
            return ((a, a), (x,)), (0, 1)
        return ((a, a), (y,)), (1, 0)
    slabels = tuple(sorted(labels))
    best = None
    best_order = None
    order = [0] * n
    used = [False] * n
    code = []

    def rec(p):
        nonlocal best, best_order
        if p == n:
            c = tuple(code)
            if best is None or c < best:
                best = c
                best_order = tuple(order)
            return
        want = slabels[p]
        for v in range(n):
            if used[v] or labels[v] != want:
                continue
            row = [rel[v * n + order[q]] for q in range(p)]
            mark = len(code)
            code.extend(row)
            if best is not None:
                cur = tuple(code)
                if cur > best[: len(cur)]:
                    del code[mark:]
                    continue
            used[v] = True
            order[p] = v
            rec(p + 1)
            used[v] = False
            del code[mark:]

    rec(0)
    return (slabels, best), best_order


def embeddings(slabels, srel, blabels, brel, limit=-1):
    """Yield injective maps (as tuples) embedding the small structure."""
    n = len(slabels)
    m = len(blabels)
    if n > m:
        return
    img = [0] * n
    used = [False] * m
    count = 0

    def rec(p):
        nonlocal count
        if p == n:
            count += 1
            yield tuple(img)
            return
        for v in range(m):
            if used[v] or blabels[v] != slabels[p]:
                continue
            ok = True
            for q in range(p):
                w = img[q]
                if brel[v * m + w] != srel[p * n + q] or brel[w * m + v] != srel[q * n + p]:
                    ok = False
                    break
            if not ok:
                continue
            used[v] = True
            img[p] = v
            yield from rec(p + 1)
            used[v] = False
            if limit >= 0 and count >= limit:
                return

    yield from rec(0)


def embeds(slabels, srel, blabels, brel):
    for _ in embeddings(slabels, srel, blabels, brel, 1):
        return True
    return False


def count_embeddings(slabels, srel, blabels, brel):
    c = 0
    for _ in embeddings(slabels, srel, blabels, brel):
        c += 1
    return c
