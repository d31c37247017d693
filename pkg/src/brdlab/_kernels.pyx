# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled versions of the hot combinatorial kernels.

Same contract as ``_kernels_py``; structures are small (n <= 16).
"""

DEF MAXN = 16

cdef int _n
cdef int _lab[MAXN]
cdef int _slab[MAXN]
cdef int _rel[MAXN * MAXN]
cdef int _order[MAXN]
cdef int _used[MAXN]
cdef int _code[MAXN * MAXN]
cdef int _best[MAXN * MAXN]
cdef int _best_order[MAXN]
cdef int _have_best
cdef int _code_len


cdef void _canon_rec(int p):
    global _have_best
    cdef int v, q, mark, i, cmp
    if p == _n:
        cmp = 0
        if _have_best:
            for i in range(_code_len):
                if _code[i] != _best[i]:
                    cmp = -1 if _code[i] < _best[i] else 1
                    break
        if not _have_best or cmp < 0:
            for i in range(_code_len):
                _best[i] = _code[i]
            for i in range(_n):
                _best_order[i] = _order[i]
            _have_best = 1
        return
    for v in range(_n):
        if _used[v] or _lab[v] != _slab[p]:
            continue
        mark = p * (p - 1) // 2
        for q in range(p):
            _code[mark + q] = _rel[v * _n + _order[q]]
        if _have_best:
            cmp = 0
            for i in range(mark + p):
                if _code[i] != _best[i]:
                    cmp = -1 if _code[i] < _best[i] else 1
                    break
            if cmp > 0:
                continue
        _used[v] = 1
        _order[p] = v
        _canon_rec(p + 1)
        _used[v] = 0


def canon(labels, rel):
    global _n, _have_best, _code_len
    cdef int n = len(labels)
    cdef int i
    if n <= 2 or n > MAXN:
        from brdlab._kernels_py import canon as pycanon
        return pycanon(labels, rel)
    _n = n
    for i in range(n):
        _lab[i] = labels[i]
        _used[i] = 0
    slabels = tuple(sorted(labels))
    for i in range(n):
        _slab[i] = slabels[i]
    for i in range(n * n):
        _rel[i] = rel[i]
    _have_best = 0
    _code_len = n * (n - 1) // 2
    _canon_rec(0)
    code = tuple([_best[i] for i in range(_code_len)])
    order = tuple([_best_order[i] for i in range(n)])
    return (slabels, code), order


cdef int _sn, _bn
cdef int _sl[MAXN]
cdef int _bl[64]
cdef int _sr[MAXN * MAXN]
cdef int _br[64 * 64]
cdef int _img[MAXN]
cdef int _bused[64]
cdef long _count
cdef long _limit


cdef int _emb_rec(int p):
    global _count
    cdef int v, q, w, ok
    if p == _sn:
        _count += 1
        return 1 if (_limit >= 0 and _count >= _limit) else 0
    for v in range(_bn):
        if _bused[v] or _bl[v] != _sl[p]:
            continue
        ok = 1
        for q in range(p):
            w = _img[q]
            if _br[v * _bn + w] != _sr[p * _sn + q] or _br[w * _bn + v] != _sr[q * _sn + p]:
                ok = 0
                break
        if not ok:
            continue
        _bused[v] = 1
        _img[p] = v
        if _emb_rec(p + 1):
            _bused[v] = 0
            return 1
        _bused[v] = 0
    return 0


cdef int _load(slabels, srel, blabels, brel) except -1:
    global _sn, _bn
    cdef int i
    _sn = len(slabels)
    _bn = len(blabels)
    if _sn > MAXN or _bn > 64:
        return 1
    for i in range(_sn):
        _sl[i] = slabels[i]
    for i in range(_sn * _sn):
        _sr[i] = srel[i]
    for i in range(_bn):
        _bl[i] = blabels[i]
        _bused[i] = 0
    for i in range(_bn * _bn):
        _br[i] = brel[i]
    return 0


def embeds(slabels, srel, blabels, brel):
    global _count, _limit
    if len(slabels) > len(blabels):
        return False
    if _load(slabels, srel, blabels, brel):
        from brdlab._kernels_py import embeds as pyembeds
        return pyembeds(slabels, srel, blabels, brel)
    _count = 0
    _limit = 1
    _emb_rec(0)
    return _count > 0


def count_embeddings(slabels, srel, blabels, brel):
    global _count, _limit
    if len(slabels) > len(blabels):
        return 0
    if _load(slabels, srel, blabels, brel):
        from brdlab._kernels_py import count_embeddings as pycount
        return pycount(slabels, srel, blabels, brel)
    _count = 0
    _limit = -1
    _emb_rec(0)
    return _count


def embeddings(slabels, srel, blabels, brel, limit=-1):
    # enumeration of the maps themselves stays in Python; callers needing
    # only counts or existence use the compiled paths above
    from brdlab._kernels_py import embeddings as pyemb
    return pyemb(slabels, srel, blabels, brel, limit)
