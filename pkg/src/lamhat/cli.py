"""Command-line front end.

Exit codes: 0 success, 1 usage / parse error / open term, 2 semantic failure
(clash, untypable, rule violation, refuted simulation), 3 fuel or search
bound exhausted.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import fixtures
from .classify import is_clash, is_clash_free_nf, nf_class
from .encodings import (
    CounterexampleReport,
    SearchBoundExceeded,
    check_simulation,
    parse_source,
    pretty_source,
    translate,
)
from .reduction import Exceeded, Normal, all_paths_to_nf, evaluate, render_position
from .synthesis import OpenTerm, Typable, Unknown, synthesize
from .syntax import free_vars
from .text import ParseError, parse_program, pretty
from .typesys import check_derivation, dumps, loads, size

EXIT_OK, EXIT_USAGE, EXIT_SEMANTIC, EXIT_FUEL = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _read(args) -> str:
    if args.expr is not None:
        return args.expr
    if args.file is None:
        raise UsageError("give a term file, '-' for stdin, or -e TERM")
    if args.file == "-":
        return sys.stdin.read()
    try:
        return Path(args.file).read_text(encoding="utf-8")
    except OSError as e:
        raise UsageError(str(e)) from e


def _term(args, allow_open: bool):
    t, _ = parse_program(_read(args))
    fv = free_vars(t)
    if fv and not allow_open:
        raise UsageError(f"term has free variables {', '.join(sorted(fv))} (pass --open to allow)")
    return t


def _step_line(s) -> str:
    return f"{s.rule} @ {render_position(s.position)} : {pretty(s.before)} --> {pretty(s.after)}"


def _counters(tr) -> str:
    return "steps=(" + ",".join(map(str, tr.counters)) + ")"


def cmd_eval(args, out) -> int:
    t = _term(args, args.open)
    if args.all_paths:
        try:
            paths = all_paths_to_nf(t, args.fuel)
        except Exceeded as e:
            print(f"exceeded: {e}", file=out)
            return EXIT_FUEL
        lengths = sorted({len(p) for p in paths})
        ends = sorted({pretty(p.steps[-1].after) if p.steps else pretty(t) for p in paths})
        print(f"paths={len(paths)} lengths={lengths}", file=out)
        for e in ends:
            print(f"endpoint: {e}", file=out)
        return EXIT_OK
    res = evaluate(t, args.fuel)
    if args.trace:
        for s in res.trace.steps:
            print(_step_line(s), file=out)
    print(_counters(res.trace), file=out)
    if not isinstance(res, Normal):
        print(f"out of fuel after {len(res.trace)} steps: {pretty(res.term)}", file=out)
        return EXIT_FUEL
    print(f"normal: {pretty(res.term)}", file=out)
    rep = is_clash(res.term)
    if rep:
        print(f"clash: {rep}", file=out)
        return EXIT_SEMANTIC
    return EXIT_OK


def cmd_classify(args, out) -> int:
    t = _term(args, args.open)
    cf = "yes" if is_clash_free_nf(t) else "no"
    print(f"{nf_class(t)}, clash: {is_clash(t)}, clash-free-nf: {cf}", file=out)
    return EXIT_OK


def cmd_encode(args, out) -> int:
    s = parse_source(_read(args), args.source_kind)
    print(pretty(translate(s, args.source_kind)), file=out)
    return EXIT_OK


def cmd_simulate(args, out) -> int:
    s = parse_source(_read(args), args.source_kind)
    try:
        res = check_simulation(s, args.source_kind, args.steps, args.bound, args.liberal)
    except SearchBoundExceeded as e:
        print(f"search bound exceeded: {e}", file=out)
        return EXIT_FUEL
    if isinstance(res, CounterexampleReport):
        print(f"counterexample: {pretty_source(res.source_before)} -> {pretty_source(res.source_after)}", file=out)
        print(f"  {res.reason}", file=out)
        return EXIT_SEMANTIC
    for i, c in enumerate(res, 1):
        print(f"step {i}: {pretty_source(c.source_before)} -> {pretty_source(c.source_after)}", file=out)
        print(f"  certificate: {','.join(c.rules)} ({len(c.rules)} steps)", file=out)
        for st in c.trace.steps:
            print(f"    {_step_line(st)}", file=out)
    if not res:
        print("no source step", file=out)
    return EXIT_OK


def cmd_check(args, out) -> int:
    try:
        d = loads(Path(args.derivation).read_text(encoding="utf-8"))
    except OSError as e:
        raise UsageError(str(e)) from e
    except (ValueError, KeyError) as e:
        raise UsageError(f"malformed derivation file: {e}") from e
    errs = check_derivation(d)
    if errs:
        for v in errs:
            print(f"violation: {v}", file=out)
        print(f"size={size(d)}", file=out)
        return EXIT_SEMANTIC
    print(f"ok size={size(d)}", file=out)
    return EXIT_OK


def cmd_synth(args, out) -> int:
    t = _term(args, False)
    try:
        r = synthesize(t, args.fuel)
    except OpenTerm as e:
        raise UsageError(str(e)) from e
    if isinstance(r, Typable):
        d = r.derivation
        print(f"typable: steps={r.steps} bound={r.bound} type={d.type}", file=out)
        if args.emit:
            Path(args.emit).write_text(dumps(d) + "\n", encoding="utf-8")
            print(f"derivation written to {args.emit}", file=out)
        return EXIT_OK
    if isinstance(r, Unknown):
        print(f"unknown: fuel {r.fuel} exhausted", file=out)
        return EXIT_FUEL
    print(f"untypable: steps={r.steps} clash at {render_position(r.witness)} in {pretty(r.normal_form)}", file=out)
    return EXIT_SEMANTIC


def cmd_examples(args, out) -> int:
    for name, text, note in fixtures.TERMS:
        t, _ = parse_program(text)
        print(f"{name}: {pretty(t)}", file=out)
        print(f"  # {note}", file=out)
    print(f"sigma: derivation of t0, size={size(fixtures.sigma())}", file=out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lamhat", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def term_cmd(name, help_, fuel=10000):
        p = sub.add_parser(name, help=help_)
        p.add_argument("file", nargs="?", help="term file, or '-' for stdin")
        p.add_argument("-e", "--expr", help="term given inline")
        p.add_argument("--fuel", type=int, default=fuel)
        return p

    p = term_cmd("eval", "evaluate with the deterministic strategy")
    p.add_argument("--trace", action="store_true")
    p.add_argument("--all-paths", action="store_true", help="enumerate every path (fuel is the length bound)")
    p.add_argument("--open", action="store_true", help="allow free variables")
    p.set_defaults(run=cmd_eval)

    p = term_cmd("classify", "normal-form class and clash status")
    p.add_argument("--open", action="store_true")
    p.set_defaults(run=cmd_classify)

    for name, run, help_ in (
        ("encode", cmd_encode, "translate a source term"),
        ("simulate", cmd_simulate, "certify source steps by target paths"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("file", nargs="?")
        p.add_argument("-e", "--expr")
        p.add_argument("--from", dest="source_kind", choices=["cbn", "cbv", "bang"], required=True)
        if name == "simulate":
            p.add_argument("--steps", type=int, default=10)
            p.add_argument("--bound", type=int, default=64)
            p.add_argument("--liberal", action="store_true", help="CBV: also step arguments of non-values")
        p.set_defaults(run=run)

    p = sub.add_parser("check", help="check a derivation file")
    p.add_argument("derivation")
    p.set_defaults(run=cmd_check)

    p = term_cmd("synth", "synthesize a derivation for a closed term")
    p.add_argument("--emit", metavar="PATH", help="write the derivation as JSON")
    p.set_defaults(run=cmd_synth)

    p = sub.add_parser("examples", help="print the reference terms")
    p.set_defaults(run=cmd_examples)
    return ap


def main(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE
    try:
        return args.run(args, out)
    except (UsageError, ParseError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
