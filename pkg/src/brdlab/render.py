"""DOT and aligned-text renderings of diaries; the DOT form parses back."""

from __future__ import annotations

import json
import re

from brdlab.diary import AC, CODE, SPLIT, Diary
from brdlab.structures import InputError

_MARK = {SPLIT: "S", CODE: "C", AC: "A", None: "", "mixed": "?"}


def _marker(D: Diary, m: int, p: int) -> str:
    if D.is_terminal(m, p):
        return "C"
    kind = D.kind(m)
    if kind == SPLIT and D.event_node(m) == p:
        return "S"
    return ""


def to_text(D: Diary) -> str:
    """One row per level, top level first, nodes in lex order left to right."""
    rows = []
    for m in range(D.height - 1, -1, -1):
        cells = []
        for p in range(D.width(m)):
            path = D.paths(m)[p]
            mk = _marker(D, m, p)
            cells.append(f"{path}{mk}" if mk else f"{path}.")
        add, rem = D.deltas[m]
        note = f"  +{len(add)}/-{len(rem)}" if add or rem else ""
        kind = D.kind(m) or "open"
        rows.append(f"{m:>5} {kind:<6}| " + " ".join(cells) + note)
    return "\n".join(rows) + "\n"


def _esc(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"')


def to_dot(D: Diary) -> str:
    from brdlab.io import lang_doc

    meta = {"lang": lang_doc(D.lang), "complete": D.complete,
            "deltas": [[[list(k[0]), list(k[1])] for k in add] + [None] + [[list(k[0]), list(k[1])] for k in rem]
                       for add, rem in D.deltas]}
    if D.strong_levels is not None:
        meta["strong_levels"] = list(D.strong_levels)
    out = ["digraph diary {", "  rankdir=BT;", "  node [shape=circle, fontsize=10];",
           f'  brdlab_meta="{_esc(json.dumps(meta, sort_keys=True, separators=(",", ":")))}";']
    for m in range(D.height):
        names = []
        for p in range(D.width(m)):
            mk = _marker(D, m, p)
            shape = ', shape=doublecircle' if mk == "C" else (', style=filled, fillcolor=lightgray' if mk == "S" else "")
            names.append(f'"n{m}_{p}" [label="{D.paths(m)[p]}{mk}", path={D.paths(m)[p]}{shape}];')
        out.append(f"  subgraph level_{m} {{ rank=same; " + " ".join(names) + " }")
    for m in range(D.height - 1):
        for c, (p, s) in enumerate(zip(D.parents[m], D.symbols[m])):
            out.append(f'  "n{m}_{p}" -> "n{m + 1}_{c}" [label="{s}"];')
    out.append("}")
    return "\n".join(out) + "\n"


_NODE = re.compile(r'"n(\d+)_(\d+)" \[label="[^"]*", path=(\d+)')
_EDGE = re.compile(r'"n(\d+)_(\d+)" -> "n(\d+)_(\d+)" \[label="(\d+)"\]')
_META = re.compile(r'brdlab_meta="((?:[^"\\]|\\.)*)"')


def from_dot(text: str) -> Diary:
    """Parse the DOT produced by :func:`to_dot`."""
    from brdlab.io import lang_from

    mm = _META.search(text)
    if mm is None:
        raise InputError("no diary metadata in the DOT text")
    raw = re.sub(r"\\(.)", r"\1", mm.group(1))
    try:
        meta = json.loads(raw)
    except json.JSONDecodeError:
        raise InputError("malformed diary metadata") from None
    lang = lang_from(meta["lang"])
    nodes = {}
    for m, p, path in _NODE.findall(text):
        nodes[(int(m), int(p))] = int(path)
    if not nodes:
        raise InputError("no nodes in the DOT text")
    height = max(m for m, _ in nodes) + 1
    widths = [1 + max(p for (m, p) in nodes if m == lv) for lv in range(height)]
    parents = [[None] * widths[m + 1] for m in range(height - 1)]
    symbols = [[None] * widths[m + 1] for m in range(height - 1)]
    for m, p, m1, c, s in _EDGE.findall(text):
        m, p, m1, c = int(m), int(p), int(m1), int(c)
        if m1 != m + 1:
            raise InputError("edges must join consecutive levels")
        parents[m][c] = p
        symbols[m][c] = int(s)
    if any(x is None for row in parents for x in row):
        raise InputError("a node has no parent edge")
    roots = [nodes[(0, p)] for p in range(widths[0])]
    deltas = []
    for entry in meta["deltas"]:
        cut = entry.index(None)
        conv = [(tuple(a), tuple(b)) for a, b in (x for x in entry[:cut])]
        conv2 = [(tuple(a), tuple(b)) for a, b in (x for x in entry[cut + 1:])]
        deltas.append((conv, conv2))
    return Diary(lang, roots, parents, symbols, deltas, complete=meta["complete"],
                 strong_levels=meta.get("strong_levels"))
