"""Command-line front end.

Subcommands: run, wp, pt, wpp, check, prove.  Exit status 0 means the
requested property holds (or printing succeeded), 1 means a counterexample
was found or a derivation was rejected, 2 means bad usage or a parse error.
Defaults can be preloaded from a JSON file named by the PHL_CONFIG
environment variable; explicit flags win.  JSON output is byte-identical for
identical input and configuration.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, replace
from fractions import Fraction

from .core import (
    SubDistribution, UnboundVariable, command_prog_vars, format_fraction,
    formula_prog_vars, prob_prog_vars, real_prog_vars,
)
from .parser import (
    ParseError, parse_command, parse_det_formula, parse_prob_formula,
    parse_real_expr, parse_state, parse_triple,
)
from .semantics import execute
from .assertions import DistFamily, StateWindow, load_dist
from .wp import check_triple_det, wp
from .preterm import check_triple_prob, pt, wp_prob
from .proofsys import check_derivation, load_derivation

CONFIG_ENV = "PHL_CONFIG"


@dataclass
class Config:
    loop_bound: int = 64
    unroll: int = 32
    depth: int = 16
    int_window: tuple[int, int] = (-8, 8)
    quant_window: tuple[int, int] = (-8, 8)
    seed: int = 0
    format: str = "text"


def _parse_window(text: str) -> tuple[int, int]:
    lo, sep, hi = text.partition("..")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected MIN..MAX, got {text!r}")
    try:
        bounds = (int(lo), int(hi))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected MIN..MAX, got {text!r}") from None
    if bounds[0] > bounds[1]:
        raise argparse.ArgumentTypeError(f"empty window {text!r}")
    return bounds


def load_config() -> Config:
    cfg = Config()
    path = os.environ.get(CONFIG_ENV)
    if not path:
        return cfg
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    fields = {}
    for key in ("loop_bound", "unroll", "depth", "seed"):
        if key in data:
            fields[key] = int(data[key])
    for key in ("int_window", "quant_window"):
        if key in data:
            lo, hi = data[key]
            fields[key] = (int(lo), int(hi))
    if "format" in data:
        fields["format"] = str(data["format"])
    return replace(cfg, **fields)


def apply_flags(cfg: Config, args: argparse.Namespace) -> Config:
    fields = {}
    for key in ("loop_bound", "unroll", "depth", "seed",
                "int_window", "quant_window", "format"):
        value = getattr(args, key, None)
        if value is not None:
            fields[key] = value
    return replace(cfg, **fields)


def _emit_json(payload: dict) -> None:
    print(json.dumps(payload, sort_keys=True, separators=(", ", ": ")))


def _dist_json(dist: SubDistribution) -> list[dict]:
    return [{"vars": s.as_dict(), "prob": format_fraction(p)}
            for s, p in sorted(dist.items())]


def _window_for(names, cfg: Config) -> StateWindow:
    lo, hi = cfg.int_window
    return StateWindow.make(names, lo, hi)


def _interp_json(interp) -> dict:
    return {"log": dict(interp.log),
            "real": {k: format_fraction(v) for k, v in interp.real.items()}}


def _triple_verdict_payload(verdict) -> dict:
    payload = {
        "holds": verdict.holds,
        "scope": verdict.scope,
        "inexact": verdict.inexact,
        "residual": format_fraction(verdict.max_residual),
        "counterexample": None,
    }
    if verdict.counterexample is not None:
        witness, interp = verdict.counterexample
        entry = {"interpretation": _interp_json(interp)}
        if hasattr(witness, "as_dict"):
            entry["state"] = witness.as_dict()
        else:
            entry["member"] = str(witness)
        payload["counterexample"] = entry
    return payload


# ---------------------------------------------------------------------------
# Subcommands


def cmd_run(args, cfg: Config) -> int:
    program = parse_command(args.program)
    if (args.state is None) == (args.dists is None):
        raise UsageError("run needs exactly one of --state or --dists")
    if args.state is not None:
        dist = SubDistribution.point(parse_state(args.state))
    else:
        dist = load_dist(args.dists)
    result = execute(program, dist, cfg.loop_bound)
    if cfg.format == "json":
        _emit_json({
            "states": _dist_json(result.output),
            "residual": format_fraction(result.residual_mass),
            "iterations": result.iterations_used,
            "exact": result.exact,
        })
    else:
        for state, p in sorted(result.output.items()):
            print(f"  {format_fraction(p)}  {state}")
        print(f"residual mass: {format_fraction(result.residual_mass)}")
        print(f"iterations used: {result.iterations_used}")
        print(f"exact: {result.exact}")
    return 0


def cmd_wp(args, cfg: Config) -> int:
    program = parse_command(args.program)
    post = parse_det_formula(args.post)
    window = _window_for(command_prog_vars(program) | formula_prog_vars(post), cfg)
    formula, traces = wp(program, post, cfg.unroll, window, cfg.quant_window)
    if cfg.format == "json":
        _emit_json({
            "wp": str(formula),
            "loops": [{
                "converged": t.converged,
                "fixpoint_index": t.fixpoint_index,
                "approximants": [str(a) for a in t.approximants],
            } for t in traces],
        })
    else:
        print(str(formula))
        for i, t in enumerate(traces):
            status = (f"converged at {t.fixpoint_index}" if t.converged
                      else f"no fixpoint within {len(t.approximants) - 1} unrollings")
            print(f"loop {i} ({t.loop.guard}): {status}, "
                  f"{len(t.approximants)} approximants")
    return 0


def cmd_pt(args, cfg: Config) -> int:
    program = parse_command(args.program)
    expr = parse_real_expr(args.term)
    window = _window_for(command_prog_vars(program) | real_prog_vars(expr), cfg)
    term, expansions = pt(program, expr, cfg.unroll, cfg.depth, window,
                          cfg.quant_window)
    if cfg.format == "json":
        _emit_json({
            "preterm": str(term),
            "loops": [{
                "exhaustive": e.exhaustive,
                "unroll": e.unroll,
                "depth": e.depth,
                "sum": str(e.sum_term),
                "tails": [str(t) for t in e.tail_terms],
            } for e in expansions],
        })
    else:
        print(str(term))
        for i, e in enumerate(expansions):
            print(f"loop {i} ({e.loop.guard}): "
                  f"{'exhaustive' if e.exhaustive else 'non-exhaustive'} "
                  f"on {e.window}, {e.unroll} classes, {e.depth} tail terms")
    return 0


def cmd_wpp(args, cfg: Config) -> int:
    program = parse_command(args.program)
    post = parse_prob_formula(args.post)
    window = _window_for(command_prog_vars(program) | prob_prog_vars(post), cfg)
    formula, expansions = wp_prob(program, post, cfg.unroll, cfg.depth, window,
                                  cfg.quant_window)
    if cfg.format == "json":
        _emit_json({
            "wp": str(formula),
            "loops": [{"exhaustive": e.exhaustive, "unroll": e.unroll,
                       "depth": e.depth} for e in expansions],
        })
    else:
        print(str(formula))
        for i, e in enumerate(expansions):
            print(f"loop {i} ({e.loop.guard}): "
                  f"{'exhaustive' if e.exhaustive else 'non-exhaustive'} on {e.window}")
    return 0


def cmd_check(args, cfg: Config) -> int:
    triple = parse_triple(args.triple)
    names = command_prog_vars(triple.command)
    if triple.prob:
        names |= prob_prog_vars(triple.pre) | prob_prog_vars(triple.post)
    else:
        names |= formula_prog_vars(triple.pre) | formula_prog_vars(triple.post)
    window = _window_for(names, cfg)
    if triple.prob:
        extra = [load_dist(args.dists)] if args.dists else []
        family = DistFamily.build(window, cfg.seed, extra=extra)
        verdict = check_triple_prob(triple.pre, triple.command, triple.post,
                                    family, cfg.quant_window, cfg.loop_bound)
    else:
        verdict = check_triple_det(triple.pre, triple.command, triple.post,
                                   window, cfg.quant_window, cfg.loop_bound)
    if cfg.format == "json":
        _emit_json(_triple_verdict_payload(verdict))
    else:
        print(str(verdict))
    return 0 if verdict.holds else 1


def cmd_prove(args, cfg: Config) -> int:
    derivation = load_derivation(args.derivation)
    verdict = check_derivation(derivation, qwindow=cfg.quant_window,
                               unroll=cfg.unroll, depth=cfg.depth,
                               seed=cfg.seed)
    if cfg.format == "json":
        _emit_json({
            "accepted": verdict.accepted,
            "scope": verdict.scope,
            "failures": list(verdict.failures),
        })
    else:
        print(str(verdict))
    return 0 if verdict.accepted else 1


class UsageError(ValueError):
    pass


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--loop-bound", dest="loop_bound", type=int)
    shared.add_argument("--unroll", type=int)
    shared.add_argument("--depth", type=int)
    shared.add_argument("--int-window", dest="int_window", type=_parse_window,
                        metavar="MIN..MAX")
    shared.add_argument("--quant-window", dest="quant_window", type=_parse_window,
                        metavar="MIN..MAX")
    shared.add_argument("--seed", type=int)
    shared.add_argument("--format", choices=("text", "json"))

    top = argparse.ArgumentParser(
        prog="phl",
        description="Exact analysis of probabilistic imperative programs.")
    sub = top.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", parents=[shared],
                         help="execute a program on a state or distribution")
    run.add_argument("--program", required=True)
    run.add_argument("--state")
    run.add_argument("--dists", metavar="FILE")
    run.set_defaults(handler=cmd_run)

    wp_cmd = sub.add_parser("wp", parents=[shared],
                            help="weakest precondition of a deterministic assertion")
    wp_cmd.add_argument("--program", required=True)
    wp_cmd.add_argument("--post", required=True)
    wp_cmd.set_defaults(handler=cmd_wp)

    pt_cmd = sub.add_parser("pt", parents=[shared],
                            help="weakest preterm of a real expression")
    pt_cmd.add_argument("--program", required=True)
    pt_cmd.add_argument("--term", required=True)
    pt_cmd.set_defaults(handler=cmd_pt)

    wpp = sub.add_parser("wpp", parents=[shared],
                         help="weakest precondition of a probabilistic assertion")
    wpp.add_argument("--program", required=True)
    wpp.add_argument("--post", required=True)
    wpp.set_defaults(handler=cmd_wpp)

    check = sub.add_parser("check", parents=[shared],
                           help="check a Hoare triple semantically")
    check.add_argument("--triple", required=True)
    check.add_argument("--dists", metavar="FILE",
                       help="extra distribution added to the test family")
    check.set_defaults(handler=cmd_check)

    prove = sub.add_parser("prove", parents=[shared],
                           help="check a proof derivation from a JSON file")
    prove.add_argument("--derivation", required=True, metavar="FILE")
    prove.set_defaults(handler=cmd_prove)
    return top


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as stop:
        return int(stop.code or 0)
    try:
        cfg = apply_flags(load_config(), args)
        return args.handler(args, cfg)
    except (ParseError, UsageError, UnboundVariable, ValueError, OSError,
            json.JSONDecodeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
