"""Command-line interface.

Exit status: 0 on success, 1 when a diary has violations or an embedding
check fails, 2 on malformed input.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from brdlab import io
from brdlab.structures import InputError

log = logging.getLogger("brdlab")


class _Violations(Exception):
    pass


def _lang(arg):
    from brdlab.languages import BUILTIN

    if arg is None:
        raise InputError("--lang is required")
    if not Path(arg).exists() and arg.lower() in BUILTIN:
        return BUILTIN[arg.lower()]()
    return io.lang_from(io.read(arg, "lang"))


def _emit(args, text: str):
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _jobs(args) -> int:
    if args.jobs is not None:
        return args.jobs
    env = os.environ.get("BRDLAB_JOBS")
    if env is None:
        return 1
    try:
        return max(1, int(env))
    except ValueError:
        raise InputError("BRDLAB_JOBS must be an integer") from None


def _load_diary(path):
    return io.diary_from(io.read(path, "diary"))


def cmd_poset(args):
    from brdlab.age_engine import catalog

    lang = _lang(args.lang)
    try:
        sort = tuple(int(x) for x in args.sort.split(",")) if args.sort else (0,)
    except ValueError:
        raise InputError("--sort takes comma-separated unary indices") from None
    if any(not 0 <= i < lang.unary_count for i in sort):
        raise InputError("sort names an unknown unary")
    P = catalog(lang).poset(sort)
    log.info("%d classes, %d covering pairs", len(P), len(P.hasse))
    _emit(args, io.dumps(io.poset_doc(P, lang)))


def cmd_paths(args):
    _emit(args, io.dumps(io.paths_doc(_lang(args.lang))))


def cmd_strong_diary(args):
    from brdlab.strong_diary import build_prefix

    P = build_prefix(_lang(args.lang), args.depth, args.seed)
    log.info("height %d, %d strong levels", P.diary.height, len(P.strong_levels))
    _emit(args, io.dumps(io.diary_doc(P.diary)))


def cmd_lsv(args):
    from brdlab.strong_diary import lsv_pathological

    _emit(args, io.dumps(io.diary_doc(lsv_pathological(args.depth))))


def cmd_validate(args):
    from brdlab.diary import validate

    D = _load_diary(args.diary)
    found = validate(D, all_levels=args.all_levels)
    if not found:
        _emit(args, "valid\n")
        return
    _emit(args, "".join(f"{v}\n" for v in found))
    raise _Violations


def cmd_embed(args):
    from brdlab.diary import find_embeddings

    src, dst = _load_diary(args.source), _load_diary(args.target)
    if src.lang != dst.lang:
        raise InputError("the diaries use different languages")
    if not src.complete:
        raise InputError("the source must be a complete finite diary")
    embs = find_embeddings(src, dst, strong_only=args.strong_only)
    doc = {"count": len(embs),
           "embeddings": [{"level_map": list(e.level_map), "node_map": [list(r) for r in e.node_map]}
                          for e in embs]}
    _emit(args, json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n")
    if not embs:
        raise _Violations


def cmd_brd(args):
    from brdlab.brd import enumerate_diaries
    from brdlab.structures import aut_count

    lang = _lang(args.lang)
    A = io.structure_from(io.read(args.structure, "structure"), lang)
    shapes = enumerate_diaries(A, lang, args.limit, _jobs(args))
    doc = {"brd_copy": len(shapes)}
    if not args.copies_only:
        doc["aut"] = aut_count(A)
        doc["brd"] = len(shapes) * doc["aut"]
    if args.emit_shapes:
        out = Path(args.emit_shapes)
        out.mkdir(parents=True, exist_ok=True)
        for i, D in enumerate(shapes):
            io.write(out / f"shape_{i:04d}.diary", io.diary_doc(D))
    _emit(args, json.dumps(doc, sort_keys=True) + "\n")


def cmd_render(args):
    from brdlab.render import to_dot, to_text

    D = _load_diary(args.diary)
    _emit(args, to_dot(D) if args.format == "dot" else to_text(D))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--seed", type=int, default=0, help="ordering seed")
    common.add_argument("--verbose", "-v", action="store_true")
    common.add_argument("--jobs", type=int, default=None, help="worker processes (default: $BRDLAB_JOBS or 1)")

    p = argparse.ArgumentParser(prog="brdlab", description="Age posets, diaries and big Ramsey degree counts.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("poset", parents=[common], help="dump the age poset of a sort")
    s.add_argument("--lang", required=True, help="language file or built-in name")
    s.add_argument("--sort", default="0", help="comma-separated unary indices")
    s.set_defaults(func=cmd_poset)

    s = sub.add_parser("paths", parents=[common], help="dump the maximal paths")
    s.add_argument("--lang", required=True)
    s.set_defaults(func=cmd_paths)

    s = sub.add_parser("strong-diary", parents=[common], help="build a strong diary prefix")
    s.add_argument("--lang", required=True)
    s.add_argument("--depth", type=int, required=True, help="number of gadgets")
    s.set_defaults(func=cmd_strong_diary)

    s = sub.add_parser("lsv", parents=[common], help="build the rigid tree for the Rado graph")
    s.add_argument("--depth", type=int, required=True, help="number of levels")
    s.set_defaults(func=cmd_lsv)

    s = sub.add_parser("validate", parents=[common], help="check a diary file")
    s.add_argument("diary")
    s.add_argument("--all-levels", action="store_true", help="report every offending level")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("embed", parents=[common], help="find embeddings of a complete diary into a prefix")
    s.add_argument("source")
    s.add_argument("target")
    s.add_argument("--strong-only", action="store_true")
    s.set_defaults(func=cmd_embed)

    s = sub.add_parser("brd", parents=[common], help="count diaries coding a structure")
    s.add_argument("--lang", required=True)
    s.add_argument("--structure", required=True)
    s.add_argument("--copies-only", action="store_true")
    s.add_argument("--emit-shapes", metavar="DIR")
    s.add_argument("--limit", type=int, default=3, help="largest structure size accepted")
    s.set_defaults(func=cmd_brd)

    s = sub.add_parser("render", parents=[common], help="draw a diary")
    s.add_argument("diary")
    s.add_argument("--format", choices=("dot", "text"), default="text")
    s.set_defaults(func=cmd_render)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    try:
        if getattr(args, "depth", 0) is not None and getattr(args, "depth", 0) < 0:
            raise InputError("--depth must be non-negative")
        args.func(args)
    except _Violations:
        return 1
    except (InputError, KeyError) as e:
        print(f"brdlab: error: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
