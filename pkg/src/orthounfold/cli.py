"""Command-line interface.

Exit codes: 0 success, 1 rejected net / invalid model / invariant violation,
2 unreadable or malformed input.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .gen import GenConfig, generate, instance_seed
from .model import (
    InternalInvariantViolation,
    ManifoldError,
    ParseError,
    ValidationError,
    load_voxels,
    validate,
)
from .netplan import records_to_json
from .unfolder import unfold
from .verify import oracle_suite, verify_net

log = logging.getLogger("orthounfold")

FORMATS = """\
voxel input formats:
  coordinates   one cube per line as "x y z" (integers); '#' starts a comment
  blocks        rows of '#' (cube) and '.' (empty); blank lines separate
                layers; the first block is the lowest layer and row 0 is the
                smallest y
net output: JSON with "format", "polycube" (coordinate text) and "cells", a
list of {id, base, normal, col, row, parent, edge} sorted by id
"""

OK, REJECTED, BAD_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _read_model(path: str):
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return load_voxels(text)
    except ParseError as exc:
        raise InputError(f"{path}: {exc}") from None


def _read_net(path: str) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: not JSON ({exc.msg})") from None
    if not isinstance(doc, dict) or not isinstance(doc.get("cells"), list):
        raise InputError(f"{path}: missing 'cells' list")
    return doc


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


# commands ------------------------------------------------------------------


def cmd_validate(args) -> int:
    p = _read_model(args.model)
    report = validate(p)
    sys.stdout.write(report.to_text())
    return OK if report.ok else REJECTED


def cmd_unfold(args) -> int:
    p = _read_model(args.model)
    try:
        result = unfold(p, debug=args.debug, strict=args.strict)
    except (ValidationError, ManifoldError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return BAD_INPUT
    except InternalInvariantViolation as exc:
        print(f"internal invariant violation: {exc}", file=sys.stderr)
        for k, v in sorted(exc.dump.items()):
            print(f"  {k}: {v}", file=sys.stderr)
        return REJECTED
    records = result.records()
    _write(args.output, records_to_json(p.to_text(), records))
    if args.explain:
        _write(args.explain, result.explain())
    if args.svg:
        from .render import write_svg
        write_svg(records, args.svg)
    violations = result.checks.get("P", []) + result.checks.get("I", [])
    for v in violations:
        print(f"property violation: {v}", file=sys.stderr)
    return REJECTED if violations else OK


def cmd_verify(args) -> int:
    p = _read_model(args.model)
    doc = _read_net(args.net)
    try:
        report = verify_net(p, doc["cells"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{args.net}: malformed net record ({exc})") from None
    sys.stdout.write(report.to_text())
    return OK if report.ok else REJECTED


def cmd_render(args) -> int:
    from .render import write_svg

    doc = _read_net(args.net)
    try:
        write_svg(doc["cells"], args.output, title=args.title, labels=args.labels)
    except (KeyError, TypeError) as exc:
        raise InputError(f"{args.net}: malformed net record ({exc})") from None
    return OK


def _config(args) -> GenConfig:
    if args.max_layers < 1 or args.max_extent < 1:
        raise InputError("--max-layers and --max-extent must be at least 1")
    return GenConfig(max_layers=args.max_layers, max_extent=args.max_extent)


def cmd_generate(args) -> int:
    cfg = _config(args)
    if args.count == 1 and not args.outdir:
        _write(None, generate(args.seed, args.index, cfg).to_text())
        return OK
    out = Path(args.outdir or ".")
    out.mkdir(parents=True, exist_ok=True)
    for k in range(args.index, args.index + args.count):
        (out / f"seed{args.seed}_{k:05d}.txt").write_text(generate(args.seed, k, cfg).to_text())
    return OK


def _check_instance(p) -> tuple[bool, str, list[str]]:
    """(accepted, rejection message, property violations) for one instance."""
    try:
        result = unfold(p, debug=True)
    except InternalInvariantViolation as exc:
        return False, f"internal invariant violation: {exc}", []
    report = verify_net(p, result.records())
    if not report.ok:
        return False, f"net rejected at cell {report.first_bad}: {report.message}", []
    lemmas = [f"{k}: {v}" for k, vs in oracle_suite(p, result).items() for v in vs]
    if lemmas:
        return False, "lemma oracle: " + lemmas[0], []
    return True, "", result.checks.get("P", []) + result.checks.get("I", [])


def cmd_fuzz(args) -> int:
    cfg = _config(args)
    if args.count < 0:
        raise InputError("--count must be non-negative")
    corpus = Path(args.corpus) if args.corpus else None
    accepted = 0
    flagged = 0
    for k in range(args.count):
        p = generate(args.seed, k, cfg)
        ok, msg, props = _check_instance(p)
        accepted += ok
        log.info("instance %d: %s", k, "accepted" if ok else "rejected")
        if props:
            flagged += 1
        if not ok or props:
            why = msg or f"{len(props)} property violations, first: {props[0]}"
            print(f"instance {k}: {why}")
            if corpus is not None:
                corpus.mkdir(parents=True, exist_ok=True)
                stem = f"seed{args.seed}_{k:05d}"
                (corpus / f"{stem}.txt").write_text(p.to_text())
                meta = {"seed": args.seed, "index": k, "instance_seed": instance_seed(args.seed, k),
                        "max_layers": cfg.max_layers, "max_extent": cfg.max_extent,
                        "accepted": ok, "reason": msg, "property_violations": props}
                (corpus / f"{stem}.json").write_text(json.dumps(meta, indent=1, sort_keys=True) + "\n")
    print(f"{accepted}/{args.count} accepted")
    print(f"{flagged} instances with property violations")
    return OK if accepted == args.count and not flagged else REJECTED


# parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="orthounfold",
        description="Edge-unfold polycubes with orthogonally convex layers.",
        epilog=FORMATS,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check the unfolding preconditions")
    p.add_argument("model")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("unfold", help="compute an edge unfolding")
    p.add_argument("model")
    p.add_argument("-o", "--output", help="net JSON file (default stdout)")
    p.add_argument("--explain", metavar="FILE", nargs="?", const="-",
                   help="write selections, segment labels and the stage trace (default stdout)")
    p.add_argument("--svg", metavar="FILE", help="also render the net as SVG")
    p.add_argument("--debug", action="store_true", help="evaluate net property checks")
    p.add_argument("--strict", action="store_true", help="fail instead of using fallbacks")
    p.set_defaults(func=cmd_unfold)

    p = sub.add_parser("verify", help="independently check a net against its model")
    p.add_argument("model")
    p.add_argument("net")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("render", help="render a net JSON file as SVG")
    p.add_argument("net")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--title")
    p.add_argument("--labels", action="store_true", help="print cell ids")
    p.set_defaults(func=cmd_render)

    for name, helptext in (("generate", "emit random valid polycubes"),
                           ("fuzz", "generate, unfold and verify random instances")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--seed", type=int, default=42)
        p.add_argument("--count", type=int, default=1 if name == "generate" else 1000)
        p.add_argument("--max-layers", type=int, default=6)
        p.add_argument("--max-extent", type=int, default=10)
        if name == "generate":
            p.add_argument("--index", type=int, default=0, help="first instance index")
            p.add_argument("-o", "--outdir", help="directory for seed<seed>_<index>.txt files")
            p.set_defaults(func=cmd_generate)
        else:
            p.add_argument("--corpus", help="directory receiving failing instances")
            p.set_defaults(func=cmd_fuzz)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return BAD_INPUT if exc.code else OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
