"""Command-line front end.

Subcommands: decide, prove, refute, check-model, filtrate, enumerate.

Exit codes follow the verdict semantics everywhere: 0 = proved / plain
success, 1 = refuted (countermodel found), 2 = inconclusive within budget,
3 = input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import decision, filtration
from .calculus import derivation_to_text
from .formula import (
    ParseError,
    parse,
    parse_sequent,
    render,
    render_sequent,
    sorted_formulas,
    admissible_closure,
)
from .semantics import evaluate, find_failing_world, holds_at
from .structure import (
    MalformedModelError,
    dump_model,
    enumerate_structures,
    load_model,
    model_to_dict,
    model_to_dot,
    validate,
)

EXIT_PROVED = 0
EXIT_REFUTED = 1
EXIT_UNKNOWN = 2
EXIT_INPUT = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qmodal",
        description="Decision procedures for quantum modal logic sequents.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decide", help="prove or refute a sequent")
    p.add_argument("sequent")
    p.add_argument("--max-worlds", type=int, default=4)
    p.add_argument("--max-stage", type=int, default=2)
    p.add_argument("--step-limit", type=int, default=200_000)
    p.add_argument("--timeout", type=float, default=None, help="wall-clock seconds")
    p.add_argument("--literal-delta", action="store_true",
                   help="refute with one countermodel per succedent member")
    p.add_argument("--dedup", action="store_true",
                   help="scan only isomorphism-class representatives")
    p.add_argument("--witness-file", type=Path, default=None)
    p.add_argument("--dot", type=Path, default=None,
                   help="write the countermodel as a GraphViz file")

    p = sub.add_parser("prove", help="search for a derivation only")
    p.add_argument("sequent")
    p.add_argument("--stage", type=int, default=2)
    p.add_argument("--step-limit", type=int, default=200_000)
    p.add_argument("--witness-file", type=Path, default=None)

    p = sub.add_parser("refute", help="search for a countermodel only")
    p.add_argument("sequent")
    p.add_argument("--max-worlds", type=int, default=4)
    p.add_argument("--dedup", action="store_true")
    p.add_argument("--witness-file", type=Path, default=None)
    p.add_argument("--dot", type=Path, default=None)

    p = sub.add_parser("check-model", help="evaluate a sequent in a model file")
    p.add_argument("model", type=Path)
    p.add_argument("--sequent", required=True)
    p.add_argument("--no-validate", action="store_true",
                   help="accept a model file that fails validation")

    p = sub.add_parser("filtrate", help="collapse a model by a formula's admissible closure")
    p.add_argument("model", type=Path)
    p.add_argument("--formula", required=True)
    p.add_argument("--verify", action="store_true",
                   help="check validity, the size bound, and truth preservation")
    p.add_argument("--output", type=Path, default=None,
                   help="write the collapsed model here instead of stdout")

    p = sub.add_parser("enumerate", help="stream all structures of a given size")
    p.add_argument("worlds", type=int)
    p.add_argument("--atoms", default="", help="comma-separated atom names")
    p.add_argument("--dedup", action="store_true")
    p.add_argument("--limit", type=int, default=None)
    return parser


# ---------------------------------------------------------------------------


def _print_verdict(verdict, args) -> int:
    report = verdict.report
    if isinstance(verdict, decision.Theorem):
        print(f"theorem: {args.sequent}")
        text = derivation_to_text(verdict.derivation)
        print("derivation:")
        print(text)
        if report.fmp_bound is not None:
            print(f"collapse bound: {report.fmp_bound} worlds")
        if args.witness_file:
            args.witness_file.write_text(text + "\n")
        return EXIT_PROVED
    if isinstance(verdict, decision.NonTheorem):
        print(f"non-theorem: {args.sequent}")
        for w in verdict.witnesses:
            print(f"countermodel with {w.structure.world_count} world(s), "
                  f"fails {render_sequent(w.target)} at world {w.world}:")
            print(dump_model(w.structure))
        if not verdict.witnesses:
            print("empty succedent is vacuously refutable under the literal reading")
        if args.witness_file:
            payload = [
                {"target": render_sequent(w.target), "world": w.world,
                 "model": model_to_dict(w.structure)}
                for w in verdict.witnesses
            ]
            args.witness_file.write_text(json.dumps(
                payload[0]["model"] if len(payload) == 1 else payload, indent=2) + "\n")
        if getattr(args, "dot", None) and verdict.witnesses:
            args.dot.write_text(model_to_dot(verdict.witnesses[0].structure) + "\n")
        return EXIT_REFUTED
    print(f"unknown: {args.sequent}")
    print(f"  saturation stages completed: {report.stages_completed}")
    print(f"  world counts exhausted: {report.worlds_exhausted}")
    if report.fmp_bound is not None:
        print(f"  collapse bound: {report.fmp_bound} worlds"
              + (" (reached: the sequent is valid)" if report.fmp_certified else ""))
    if report.timed_out:
        print("  wall-clock limit hit")
    return EXIT_UNKNOWN


def _cmd_decide(args) -> int:
    seq = parse_sequent(args.sequent)
    budgets = decision.Budgets(
        max_stage=args.max_stage,
        max_worlds=args.max_worlds,
        step_limit=args.step_limit,
        wall_clock=args.timeout,
    )
    verdict = decision.decide(seq, budgets, literal_delta=args.literal_delta,
                              dedup=args.dedup)
    return _print_verdict(verdict, args)


def _cmd_prove(args) -> int:
    seq = parse_sequent(args.sequent)
    budgets = decision.Budgets(max_stage=args.stage, step_limit=args.step_limit)
    node = decision.prove(seq, budgets)
    if node is None:
        print(f"not found at stage {args.stage}")
        return EXIT_UNKNOWN
    text = derivation_to_text(node)
    print(text)
    if args.witness_file:
        args.witness_file.write_text(text + "\n")
    return EXIT_PROVED


def _cmd_refute(args) -> int:
    seq = parse_sequent(args.sequent)
    hit = decision.refute(seq, args.max_worlds, dedup=args.dedup)
    if hit is None:
        print(f"no countermodel up to {args.max_worlds} worlds")
        return EXIT_UNKNOWN
    s, world = hit
    print(f"countermodel with {s.world_count} world(s), fails at world {world}:")
    print(dump_model(s))
    if args.witness_file:
        args.witness_file.write_text(json.dumps(model_to_dict(s), indent=2) + "\n")
    if args.dot:
        args.dot.write_text(model_to_dot(s) + "\n")
    return EXIT_REFUTED


def _cmd_check_model(args) -> int:
    s = load_model(args.model, validate_model=not args.no_validate)
    seq = parse_sequent(args.sequent)
    columns = sorted_formulas(seq.antecedent) + sorted_formulas(seq.succedent)
    headers = [render(f) for f in columns]
    widths = [max(len(h), 1) for h in headers]
    print("world  " + "  ".join(h for h in headers) + ("  |  sequent" if headers else "sequent"))
    for w in range(s.world_count):
        marks = []
        for f, width in zip(columns, widths):
            mark = "⊨" if evaluate(s, w, f) else "⊭"
            marks.append(mark.ljust(width))
        verdict = "⊨" if holds_at(s, w, seq) else "⊭"
        print(f"{w:5}  " + "  ".join(marks) + (f"  |  {verdict}" if headers else verdict))
    failing = find_failing_world(s, seq)
    if failing is None:
        print(f"holds in model: yes ({render_sequent(seq)})")
    else:
        print(f"holds in model: no (fails at world {failing})")
    return EXIT_PROVED if failing is None else EXIT_REFUTED


def _cmd_filtrate(args) -> int:
    s = load_model(args.model)
    f = parse(args.formula)
    sigma = admissible_closure({f})
    c = filtration.collapse(s, sigma)
    print(f"sigma ({len(sigma)} formulas): "
          + ", ".join(render(g) for g in sorted_formulas(sigma)))
    print(f"classes: {c.result.world_count} "
          f"(class of each source world: {list(c.class_of)})")
    model_text = json.dumps(model_to_dict(c.result), indent=2)
    if args.output:
        args.output.write_text(model_text + "\n")
        print(f"collapsed model written to {args.output}")
    else:
        print(model_text)
    if args.verify:
        report = filtration.verify_collapse(c)
        print(f"result validates: {'yes' if report.result_valid else 'no'}")
        print(f"size bound |W*| <= 2^{len(sigma)}: {'yes' if report.size_bound_ok else 'no'}")
        print(f"truth preserved: {'yes' if report.truth_preserved else 'no'}")
        if not report.ok:
            return EXIT_UNKNOWN
    return EXIT_PROVED


def _cmd_enumerate(args) -> int:
    atoms = tuple(a.strip() for a in args.atoms.split(",") if a.strip())
    n = 0
    for s in enumerate_structures(args.worlds, atoms, dedup=args.dedup):
        print(dump_model(s))
        n += 1
        if args.limit is not None and n >= args.limit:
            break
    print(f"# {n} structure(s)", file=sys.stderr)
    return EXIT_PROVED


_COMMANDS = {
    "decide": _cmd_decide,
    "prove": _cmd_prove,
    "refute": _cmd_refute,
    "check-model": _cmd_check_model,
    "filtrate": _cmd_filtrate,
    "enumerate": _cmd_enumerate,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on bad usage; fold into the input-error code
        return EXIT_INPUT if e.code else 0
    try:
        return _COMMANDS[args.command](args)
    except (ParseError, MalformedModelError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    raise SystemExit(main())
