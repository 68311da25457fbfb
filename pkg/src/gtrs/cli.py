"""Command-line prover."""

from __future__ import annotations

import argparse
import sys
from typing import Optional

from .framework import Apply, Problem, Recurse, Seq, builtin_strategy, run, verdict
from .formats import ParseError, parse, render_proof
from .processors import Context
from .rewriting import Budget
from .systems import classify

PRESET_STRATEGIES = {
    "auto": None,
    "knuth-bendix": Seq(Apply("knuth-bendix"), Recurse()),
    "unravel-shared": Seq(Apply("unravel-shared"), Recurse()),
    "unravel": Seq(Apply("unravel"), Recurse()),
    "orthogonal": Apply("orthogonal"),
    "convective-joinability": Seq(Apply("convective-joinability"), Recurse()),
    "simplify": Seq(Apply("simplify"), Recurse()),
}


def build_arg_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="gtrs-prove",
        description="Decide confluence of a (context-sensitive, conditional) "
        "term rewriting system; prints YES, NO, or MAYBE on the first line.",
    )
    ap.add_argument("input", nargs="?", help="problem file (default: stdin)")
    ap.add_argument(
        "--property",
        choices=["cr", "wcr", "scr"],
        default="cr",
        help="property to decide: confluence, local or strong confluence",
    )
    ap.add_argument("--timeout", type=float, default=120.0, help="overall seconds")
    ap.add_argument(
        "--format",
        choices=["cops", "tpdb", "auto"],
        default="auto",
        help="input format (auto-detected by default)",
    )
    ap.add_argument(
        "--proof",
        choices=["text", "structured", "none"],
        default="text",
        help="proof output style",
    )
    ap.add_argument(
        "--strategy",
        choices=sorted(PRESET_STRATEGIES),
        default="auto",
        help="proof strategy preset",
    )
    ap.add_argument("--feasibility-seconds", type=float, default=2.0)
    ap.add_argument("--termination-seconds", type=float, default=5.0)
    ap.add_argument("--budget-depth", type=int, default=8)
    ap.add_argument("--budget-steps", type=int, default=20000)
    ap.add_argument("--budget-successors", type=int, default=300)
    ap.add_argument("--budget-term-size", type=int, default=100)
    return ap


def main(argv: Optional[list] = None) -> int:
    ap = build_arg_parser()
    args = ap.parse_args(argv)
    try:
        if args.input:
            with open(args.input, "r", encoding="utf-8") as fh:
                text = fh.read()
        else:
            text = sys.stdin.read()
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        system, diags = parse(
            text,
            None if args.format == "auto" else args.format,
            name=args.input or "stdin",
        )
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 2
    for note in diags.notes:
        print(f"note: {note}", file=sys.stderr)
    for block in diags.skipped_blocks:
        print(f"note: skipped block {block}", file=sys.stderr)
    common = dict(
        max_depth=args.budget_depth,
        max_steps=args.budget_steps,
        max_successors=args.budget_successors,
        max_term_size=args.budget_term_size,
    )
    ctx = Context(
        {
            "feasibility": Budget(seconds=args.feasibility_seconds, **common),
            "termination": Budget(seconds=args.termination_seconds, **common),
        }
    )
    problem = Problem(args.property.upper(), system)
    strategy = PRESET_STRATEGIES[args.strategy]
    tree = run(problem, strategy, deadline_seconds=args.timeout, ctx=ctx)
    v = verdict(tree)
    sys.stdout.write(render_proof(v, args.proof))
    return 0


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
