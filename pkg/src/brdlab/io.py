"""JSON file formats for languages, structures, posets, path tables and diaries.

Every document is an object with ``"format": "brdlab"``, an integer
``"version"`` and a ``"kind"``. Documents from a newer version are refused.
"""

from __future__ import annotations

import json
from pathlib import Path

from brdlab.age_engine import AgeClass, AgePoset, catalog, essential_set
from brdlab.diary import Diary
from brdlab.structures import FiniteStructure, InputError, LangSpec

VERSION = 1


def dumps(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def loads(text: str, kind: str | None = None) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise InputError(f"not valid JSON: {e}") from None
    if not isinstance(doc, dict) or doc.get("format") != "brdlab":
        raise InputError("not a brdlab document")
    v = doc.get("version")
    if not isinstance(v, int) or v < 1:
        raise InputError("missing or malformed version")
    if v > VERSION:
        raise InputError(f"document version {v} is newer than supported version {VERSION}")
    if kind is not None and doc.get("kind") != kind:
        raise InputError(f"expected a {kind} document, got {doc.get('kind')!r}")
    return doc


def _doc(kind: str, **body) -> dict:
    return {"format": "brdlab", "version": VERSION, "kind": kind, **body}


def read(path, kind: str | None = None) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from None
    return loads(text, kind)


def write(path, doc: dict) -> None:
    Path(path).write_text(dumps(doc))


def _field(doc, name, typ):
    if name not in doc:
        raise InputError(f"missing field {name!r}")
    val = doc[name]
    if not isinstance(val, typ) or isinstance(val, bool) and typ is not bool:
        raise InputError(f"field {name!r} has the wrong type")
    return val


# -- structures and languages ---------------------------------------------------


def structure_doc(A: FiniteStructure) -> dict:
    n = A.size
    rel = [[a, b, A.value(a, b)] for a in range(n) for b in range(a + 1, n) if A.value(a, b)]
    return _doc("structure", size=n, unary=list(A.labels), rel=rel)


def structure_from(doc: dict, lang: LangSpec) -> FiniteStructure:
    n = _field(doc, "size", int)
    labels = _field(doc, "unary", list)
    if len(labels) != n:
        raise InputError("unary array length differs from size")
    pairs = []
    for item in doc.get("rel", []):
        if not (isinstance(item, list) and len(item) == 3 and all(isinstance(x, int) for x in item)):
            raise InputError("rel entries must be [i, j, value]")
        a, b, v = item
        if a >= b:
            raise InputError("rel entries must have i < j")
        pairs.append((a, b, v))
    A = lang.structure(labels, pairs)
    A.check_flip(lang.flip)
    return A


def lang_doc(lang: LangSpec) -> dict:
    forb = [{k: v for k, v in structure_doc(F).items() if k in ("size", "unary", "rel")} for F in lang.forbidden]
    return _doc("lang", name=lang.name, unary_count=lang.unary_count, binary_count=lang.binary_count,
                flip=list(lang.flip), forbidden=forb, fingerprint=lang.fingerprint)


def lang_from(doc: dict) -> LangSpec:
    d = _field(doc, "unary_count", int)
    k = _field(doc, "binary_count", int)
    flip = tuple(_field(doc, "flip", list))
    if len(flip) != k or sorted(flip) != list(range(k)):
        raise InputError("flip must be a permutation of the binary values")
    forb = []
    for F in doc.get("forbidden", []):
        labels = _field(F, "unary", list)
        pairs = [tuple(x) for x in F.get("rel", [])]
        S = FiniteStructure.build(labels, pairs, label_range=d, k=k, flip=flip)
        forb.append(S)
    lang = LangSpec(d, k, flip, tuple(forb), name=doc.get("name", ""))
    fp = doc.get("fingerprint")
    if fp is not None and fp != lang.fingerprint:
        raise InputError("language fingerprint does not match its content")
    return lang


# -- posets and paths -----------------------------------------------------------


def _keys_out(keys):
    return [[list(k[0]), list(k[1])] for k in sorted(keys)]


def _keys_in(items):
    try:
        return [(tuple(int(x) for x in a), tuple(int(x) for x in b)) for a, b in items]
    except (TypeError, ValueError):
        raise InputError("obstruction keys must be [labels, code] pairs") from None


def poset_doc(P: AgePoset, lang: LangSpec) -> dict:
    classes = [{"id": i, "trace": A.trace_hex(), "obstructions": _keys_out(A.extras)}
               for i, A in enumerate(P.elements)]
    econ = []
    for a, b in P.hasse:
        S, _ = essential_set(P.elements[a], P.elements[b])
        econ.append({"pair": [a, b], "essential": list(S)})
    return _doc("poset", lang=lang.fingerprint, sort=list(P.sort), classes=classes,
                hasse=[list(e) for e in P.hasse], econ=econ)


def poset_from(doc: dict, lang: LangSpec) -> AgePoset:
    if doc.get("lang") != lang.fingerprint:
        raise InputError("poset belongs to a different language")
    cat = catalog(lang)
    sort = tuple(_field(doc, "sort", list))
    elems = []
    for i, c in enumerate(_field(doc, "classes", list)):
        if c.get("id") != i:
            raise InputError("class ids must be consecutive from 0")
        elems.append(AgeClass(sort, frozenset(_keys_in(c.get("obstructions", []))), cat))
    P = AgePoset(sort, tuple(elems))
    if [list(e) for e in P.hasse] != doc.get("hasse"):
        raise InputError("stored Hasse edges disagree with the classes")
    return P


def paths_doc(lang: LangSpec) -> dict:
    table = catalog(lang).paths
    paths = [{"id": p.id, "unary": p.unary, "chain": list(p.chain_ids), "free": p.free,
              "classes": [_keys_out(A.extras) for A in p.chain]} for p in table]
    free = {str(i): [list(x) for x in v] for i, v in sorted(table.free_pairs.items())}
    return _doc("paths", lang=lang.fingerprint, paths=paths, free_pairs=free)


def paths_from(doc: dict, lang: LangSpec) -> list[tuple]:
    """Path records ``(id, unary, chain ids, free, chain classes)``."""
    if doc.get("lang") != lang.fingerprint:
        raise InputError("path table belongs to a different language")
    cat = catalog(lang)
    out = []
    for p in _field(doc, "paths", list):
        chain = tuple(AgeClass((p["unary"],), frozenset(_keys_in(ks)), cat) for ks in p["classes"])
        out.append((p["id"], p["unary"], tuple(p["chain"]), bool(p["free"]), chain))
    return out


def path_records(lang: LangSpec) -> list[tuple]:
    return [(p.id, p.unary, p.chain_ids, p.free, p.chain) for p in catalog(lang).paths]


# -- diaries --------------------------------------------------------------------


def diary_doc(D: Diary) -> dict:
    levels = []
    for m in range(D.height):
        add, rem = D.deltas[m]
        lv = {"kind": D.kind(m), "add": _keys_out(add), "remove": _keys_out(rem)}
        if m:
            lv["parents"] = list(D.parents[m - 1])
            lv["symbols"] = list(D.symbols[m - 1])
        levels.append(lv)
    body = dict(lang=lang_doc(D.lang), roots=list(D.roots), complete=D.complete, height=D.height,
                levels=levels, coding_nodes=[list(c) for c in D.coding_nodes()])
    if D.strong_levels is not None:
        body["strong_levels"] = list(D.strong_levels)
    if D.gadgets is not None:
        body["gadgets"] = D.gadgets
    return _doc("diary", **body)


def diary_from(doc: dict) -> Diary:
    lang = lang_from(_field(doc, "lang", dict))
    levels = _field(doc, "levels", list)
    if not levels:
        raise InputError("a diary needs at least one level")
    parents, symbols, deltas = [], [], []
    for m, lv in enumerate(levels):
        if m:
            parents.append(_field(lv, "parents", list))
            symbols.append(_field(lv, "symbols", list))
        deltas.append((_keys_in(lv.get("add", [])), _keys_in(lv.get("remove", []))))
    D = Diary(lang, _field(doc, "roots", list), parents, symbols, deltas,
              complete=bool(doc.get("complete", False)), strong_levels=doc.get("strong_levels"),
              gadgets=doc.get("gadgets"))
    if doc.get("height", D.height) != D.height:
        raise InputError("stored height disagrees with the levels")
    return D
