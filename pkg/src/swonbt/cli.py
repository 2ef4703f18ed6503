"""Command-line interface.

Subcommands: ``check`` evaluates a formula at a point of a model/context
pair, ``decide`` settles validity or satisfiability and writes replayable
counter-model files, ``rewrite`` runs the normal-form pipeline, ``prove``
verifies a derivation file, and ``oracle`` runs the bounded brute-force
search.  Exit codes: 0 for a positive verdict, 1 for a negative one,
2 for any error.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import decide, proofcheck, rewrite, semantics
from .context import context_to_text, load_context
from .formula import Fragment, classify, parse, print_formula
from .model import load_model, model_to_text


def _emit(args, payload: dict, text: str) -> None:
    if args.format == "json":
        print(json.dumps(payload, sort_keys=True))
    else:
        print(text)


def cmd_check(args) -> int:
    model = load_model(args.model)
    context = load_context(args.context, model)
    point = semantics.ContextualizedPoint(model, context, args.timeline, args.clock)
    value = semantics.check(point, parse(args.formula))
    _emit(args, {"command": "check", "verdict": value}, "true" if value else "false")
    return 0 if value else 1


def _write_witness(prefix: str, witness: decide.Witness) -> dict:
    model_path = prefix + ".model"
    context_path = prefix + ".context"
    point_path = prefix + ".point"
    with open(model_path, "w", encoding="utf-8") as fh:
        fh.write(model_to_text(witness.model))
    with open(context_path, "w", encoding="utf-8") as fh:
        fh.write(context_to_text(witness.context))
    with open(point_path, "w", encoding="utf-8") as fh:
        fh.write("at timeline {} clock {}\n".format(witness.timeline, witness.clock))
    return {"model": model_path, "context": context_path, "point": point_path}


def _witness_payload(witness: decide.Witness) -> dict:
    return {
        "model": model_to_text(witness.model),
        "context": context_to_text(witness.context),
        "timeline": witness.timeline,
        "clock": witness.clock,
    }


def cmd_decide(args) -> int:
    phi = parse(args.valid if args.valid is not None else args.sat)
    cap = args.cap if args.cap is not None else decide.default_enum_cap()
    if args.valid is not None:
        result = decide.valid(phi, cap, args.jobs)
        payload = {"command": "decide", "mode": "valid",
                   "verdict": "VALID" if result.valid else "INVALID"}
        lines = [payload["verdict"]]
        if not result.valid:
            payload["counter_model"] = _witness_payload(result.counter_model)
            lines.append("counter-model point: at timeline {} clock {}".format(
                result.counter_model.timeline, result.counter_model.clock))
            if args.out:
                paths = _write_witness(args.out, result.counter_model)
                payload["files"] = paths
                lines.append("written: {} {} {}".format(
                    paths["model"], paths["context"], paths["point"]))
        _emit(args, payload, "\n".join(lines))
        return 0 if result.valid else 1
    verdict = decide.satisfiable(phi, cap, args.jobs)
    payload = {"command": "decide", "mode": "sat",
               "verdict": "SAT" if verdict.satisfiable else "UNSAT"}
    lines = [payload["verdict"]]
    if verdict.satisfiable:
        payload["witness"] = _witness_payload(verdict.witness)
        lines.append("witness point: at timeline {} clock {}".format(
            verdict.witness.timeline, verdict.witness.clock))
        if args.out:
            paths = _write_witness(args.out, verdict.witness)
            payload["files"] = paths
            lines.append("written: {} {} {}".format(
                paths["model"], paths["context"], paths["point"]))
    _emit(args, payload, "\n".join(lines))
    return 0 if verdict.satisfiable else 1


def cmd_rewrite(args) -> int:
    phi = parse(args.formula)
    reduced = rewrite.delta(phi)
    if args.to == "sw1":
        reduced = rewrite.gamma(reduced)
        if Fragment.SW1 not in classify(reduced):
            raise rewrite.FragmentError("rewriting did not reach the unnested fragment")
    else:
        if Fragment.SWXXYY not in classify(reduced):
            raise rewrite.FragmentError("rewriting did not reach the pushed-down fragment")
    text = print_formula(reduced)
    _emit(args, {"command": "rewrite", "to": args.to, "formula": text}, text)
    return 0


def cmd_prove(args) -> int:
    derivation = proofcheck.load_derivation(args.proof)
    result = proofcheck.check_derivation(derivation)
    if result.ok:
        _emit(args, {"command": "prove", "verdict": "OK"}, "OK")
        return 0
    payload = {"command": "prove", "verdict": "REJECTED",
               "line": result.line, "kind": result.kind, "reason": result.reason}
    _emit(args, payload,
          "line {}: {} ({})".format(result.line, result.kind, result.reason))
    return 1


def cmd_oracle(args) -> int:
    phi = parse(args.formula)
    if args.depth is not None or args.leaves is not None or args.clocks is not None:
        base = decide.bounds_for(phi)
        bounds = decide.OracleBounds(
            max_depth=args.depth if args.depth is not None else base.max_depth,
            max_leaves=args.leaves if args.leaves is not None else base.max_leaves,
            max_clock=args.clocks if args.clocks is not None else base.max_clock,
            budget=args.budget,
        )
    else:
        base = decide.bounds_for(phi)
        bounds = decide.OracleBounds(base.max_depth, base.max_leaves,
                                     base.max_clock, args.budget)
    value = decide.brute_force_satisfiable(phi, bounds)
    _emit(args, {"command": "oracle", "verdict": "SAT" if value else "UNSAT"},
          "SAT" if value else "UNSAT")
    return 0 if value else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swonbt",
        description="Branching-time strong/weak ontic necessity toolkit")
    parser.add_argument("--format", choices=["text", "json"], default="text")
    sub = parser.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser("check", help="evaluate a formula at a point")
    p_check.add_argument("--model", required=True)
    p_check.add_argument("--context", required=True)
    p_check.add_argument("--timeline", required=True)
    p_check.add_argument("--clock", type=int, required=True)
    p_check.add_argument("--formula", required=True)
    p_check.set_defaults(func=cmd_check)

    p_decide = sub.add_parser("decide", help="decide validity or satisfiability")
    group = p_decide.add_mutually_exclusive_group(required=True)
    group.add_argument("--valid", metavar="FORMULA")
    group.add_argument("--sat", metavar="FORMULA")
    p_decide.add_argument("--out", metavar="PREFIX",
                          help="write witness/counter-model files with this prefix")
    p_decide.add_argument("--cap", type=int, default=None,
                          help="atomic-sequence enumeration cap")
    p_decide.add_argument("--jobs", type=int, default=1)
    p_decide.set_defaults(func=cmd_decide)

    p_rewrite = sub.add_parser("rewrite", help="rewrite to a normal form")
    p_rewrite.add_argument("--formula", required=True)
    p_rewrite.add_argument("--to", choices=["swxxyy", "sw1"], required=True)
    p_rewrite.set_defaults(func=cmd_rewrite)

    p_prove = sub.add_parser("prove", help="verify a derivation file")
    p_prove.add_argument("--proof", required=True)
    p_prove.set_defaults(func=cmd_prove)

    p_oracle = sub.add_parser("oracle", help="bounded brute-force satisfiability")
    p_oracle.add_argument("--formula", required=True)
    p_oracle.add_argument("--depth", type=int, default=None)
    p_oracle.add_argument("--leaves", type=int, default=None)
    p_oracle.add_argument("--clocks", type=int, default=None)
    p_oracle.add_argument("--budget", type=int, default=50_000_000)
    p_oracle.set_defaults(func=cmd_oracle)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - single reporting point
        print("error: {}".format(exc), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
