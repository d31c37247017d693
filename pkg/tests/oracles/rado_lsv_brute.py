"""Independent brute-force count of complete finite diaries for the Rado graph.

For the graph language with no forbidden structures every age class is the
full class, so a diary is a finite subtree T of 2^{<h} in which each level has
exactly one node with a number of immediate successors other than one: either
a terminal (coding) node or a node with both children. At a splitting level
every other node appends 0. Coding nodes are the terminal nodes and the coded
graph joins a later coding node t to an earlier one s iff t(|s|) = 1.

This script enumerates all subsets of 2^{<h} directly (no shared code with the
package) and counts diaries coding an edge and a non-edge.
"""

from __future__ import annotations

import itertools


def seqs(h):
    out = []
    for n in range(h):
        out.extend(itertools.product((0, 1), repeat=n))
    return out


def is_diary(T):
    if () not in T:
        return False
    for t in T:
        if t and t[:-1] not in T:
            return False
    height = max(len(t) for t in T) + 1
    coding = []
    for m in range(height):
        level = sorted(t for t in T if len(t) == m)
        if not level:
            return False
        special = []
        for t in level:
            kids = [q for q in (0, 1) if t + (q,) in T]
            if len(kids) != 1:
                special.append((t, kids))
        if len(special) != 1:
            # no age changes exist, so every level must be special
            return False
        t, kids = special[0]
        if kids == [0, 1]:
            for s in level:
                if s != t and s + (0,) not in T:
                    return False
        elif not kids:
            coding.append(t)
        else:
            return False
    return coding


def coded_graph(coding):
    n = len(coding)
    adj = set()
    for a in range(n):
        for b in range(a + 1, n):
            s, t = coding[a], coding[b]
            if t[len(s)] == 1:
                adj.add((a, b))
    return n, adj


def main(h=5):
    universe = seqs(h)
    counts = {"vertex": 0, "edge": 0, "non-edge": 0}
    # grow subsets level by level to keep the search small
    def extend(T, m):
        res = is_diary(T)
        if res:
            n, adj = coded_graph(res)
            if n == 1:
                counts["vertex"] += 1
            elif n == 2:
                counts["edge" if adj else "non-edge"] += 1
        if m >= h - 1:
            return
        level = [t for t in T if len(t) == m]
        opts = []
        for t in level:
            opts.append([(), (t + (0,),), (t + (1,),), (t + (0,), t + (1,))])
        for choice in itertools.product(*opts):
            new = [x for c in choice for x in c]
            if not new or len(new) > 3:
                continue
            extend(T | set(new), m + 1)
    extend({()}, 0)
    return counts


if __name__ == "__main__":
    print(main())
