"""Command-line surface over the library.

Commands: gen, simulate, worst-case, brute-force, stability, prob, mc-tau,
fixed-point, check-claims.  All structured output is JSON written to
``--output`` (default stdout); ``mc-tau`` additionally writes a
``trial,seed,tau`` CSV.  Exit status is 0 on success, 1 on a domain error
(stderr carries one line whose first token is a machine-parsable error
code), and 2 on a usage error.

Every artifact embeds the tool version and the resolved run configuration,
so re-running the embedded configuration reproduces the payload byte for
byte; the only non-reproducible field is the ``generated_at`` timestamp.
The master seed defaults to the MAJLAB_SEED environment variable, then 0.
Worker counts never appear in payloads: they shard work without affecting
any output.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .artifacts import (
    TOOL_NAME,
    dumps_json,
    envelope,
    load_opinions,
    mc_csv_text,
    utc_timestamp,
)
from .claims import ALL_SUITES, run_claim_suites
from .dynamics import OpinionVector, stabilise
from .errors import BadTimeError, MajlabError
from .probe import TARGETS, estimate_probability, fixed_point_q, le_t_positive_check, mc_tau
from .stability import (
    EXTENSION_BUDGET,
    is_le_t_stable,
    is_one_close_to_stability,
    is_strongly_t_stable,
    is_weakly_t_stable,
)
from .trees import build_perfect_tree, load_tree, tree_to_text
from .worstcase import BRUTE_FORCE_BUDGET, brute_force_tau, worst_case_tau

STABILITY_KINDS = ("weak", "strong", "le_t", "one_close")


def _resolved_seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    raw = os.environ.get("MAJLAB_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise MajlabError(f"MAJLAB_SEED must be an integer, got {raw!r}") from None


def _config(args, fields: tuple[str, ...]) -> dict:
    cfg = {"command": args.command}
    for name in fields:
        value = getattr(args, name, None)
        if value is not None:
            cfg[name] = value
    return cfg


def _write_text(path: str | None, text: str) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _initial_opinions(tree, args, seed: int) -> OpinionVector:
    if getattr(args, "init", None):
        return load_opinions(args.init)
    return OpinionVector.random(tree.n, np.random.default_rng(seed))


# -- command handlers --------------------------------------------------------


def cmd_gen(args) -> int:
    tree = build_perfect_tree(args.k, args.h)
    comments = [
        f"{TOOL_NAME} {__version__}",
        f"gen k={args.k} h={args.h} n={tree.n} diameter={tree.diameter}",
    ]
    _write_text(args.output, tree_to_text(tree, header_comments=comments))
    return 0


def cmd_simulate(args) -> int:
    tree = load_tree(args.tree)
    seed = _resolved_seed(args)
    xi0 = _initial_opinions(tree, args, seed)
    res = stabilise(tree, xi0, keep_history=bool(args.trace))
    if args.trace:
        lines = [OpinionVector.from_signs(state).to_string() for state in res.history]
        Path(args.trace).write_text("\n".join(lines) + "\n", encoding="utf-8")
    cfg = _config(args, ("tree", "init"))
    cfg["seed"] = seed
    result = {
        "n": tree.n,
        "init": xi0.to_string(),
        "tau": res.tau,
        "steps_executed": res.steps_executed,
        "stable_even": res.stable_even.to_string(),
        "stable_odd": res.stable_odd.to_string(),
        "first_flip": [int(x) for x in res.first_flip],
        "last_flip": [int(x) for x in res.last_flip],
    }
    _write_text(args.output, dumps_json(envelope("simulate", cfg, seed, result)))
    return 0


def cmd_worst_case(args) -> int:
    tree = load_tree(args.tree)
    report = worst_case_tau(tree)
    result = {
        "tau": report.tau,
        "path": [int(v) for v in report.argmax.vertices],
        "t_value": report.argmax.t_value,
        "end_adjacent_to_leaf": report.argmax.end_adjacent_to_leaf,
        "witness": report.witness.to_string(),
        "per_vertex_bound": {
            str(v): bound for v, bound in sorted(report.per_vertex_bound.items())
        },
    }
    cfg = _config(args, ("tree",))
    _write_text(args.output, dumps_json(envelope("worst-case", cfg, None, result)))
    return 0


def cmd_brute_force(args) -> int:
    tree = load_tree(args.tree)
    tau, argmax = brute_force_tau(tree, budget=args.budget)
    result = {"tau": tau, "argmax": argmax.to_string()}
    cfg = _config(args, ("tree", "budget"))
    _write_text(args.output, dumps_json(envelope("brute-force", cfg, None, result)))
    return 0


def cmd_stability(args) -> int:
    tree = load_tree(args.tree)
    seed = _resolved_seed(args)
    xi0 = _initial_opinions(tree, args, seed)
    needs_t = args.kind in ("weak", "strong", "le_t")
    if needs_t and args.t is None:
        raise BadTimeError(f"kind {args.kind!r} requires --t")
    if not needs_t and args.t is not None:
        raise BadTimeError("kind 'one_close' does not take --t")
    if args.kind == "weak":
        verdict = is_weakly_t_stable(tree, xi0, args.vertex, args.t)
    elif args.kind == "strong":
        verdict = is_strongly_t_stable(tree, xi0, args.vertex, args.t, budget=args.budget)
    elif args.kind == "le_t":
        verdict = is_le_t_stable(tree, xi0, args.vertex, args.t, budget=args.budget)
    else:
        verdict = is_one_close_to_stability(tree, xi0, args.vertex, budget=args.budget)
    cfg = _config(args, ("tree", "init", "kind", "vertex", "t", "budget"))
    cfg["seed"] = seed
    result = {
        "kind": verdict.kind,
        "vertex": verdict.vertex,
        "t": verdict.t,
        "verdict": verdict.verdict,
        "method": verdict.method,
        "certificate": None if verdict.certificate is None else verdict.certificate.to_string(),
        "checked": verdict.checked,
        "init": xi0.to_string(),
    }
    _write_text(args.output, dumps_json(envelope("stability", cfg, seed, result)))
    return 0


def cmd_prob(args) -> int:
    seed = _resolved_seed(args)
    if args.xi is not None:
        if args.target != "le_t":
            raise MajlabError("--xi applies only to --target le_t")
        est = le_t_positive_check(
            args.k,
            args.t,
            1 if args.xi == "+" else -1,
            height=args.height,
            method=args.method,
            trials=args.trials,
            seed=seed,
            budget=args.budget,
        )
    else:
        est = estimate_probability(
            args.target,
            args.height,
            args.t,
            k=args.k,
            method=args.method,
            trials=args.trials,
            seed=seed,
            budget=args.budget,
        )
    cfg = _config(args, ("target", "height", "t", "k", "method", "trials", "budget", "xi"))
    cfg["seed"] = seed
    result = {
        "target": est.target,
        "k": est.k,
        "height": est.height,
        "t": est.t,
        "method": est.method,
        "value": est.value,
        "count": est.count,
        "denominator": est.denominator,
        "trials": est.trials,
        "ci_halfwidth": est.ci_halfwidth,
        "xi": est.xi,
        "unresolved": est.unresolved,
    }
    _write_text(args.output, dumps_json(envelope("prob", cfg, seed, result)))
    return 0


def cmd_mc_tau(args) -> int:
    seed = _resolved_seed(args)
    summary = mc_tau(args.k, args.h, trials=args.trials, seed=seed, workers=args.workers)
    cfg = {
        "command": args.command,
        "k": args.k,
        "h": args.h,
        "trials": args.trials,
        "seed": seed,
    }
    if args.csv:
        comments = [
            f"{TOOL_NAME} {__version__}",
            f"mc-tau k={args.k} h={args.h} trials={args.trials} seed={seed}",
            f"generated_at {utc_timestamp()}",
        ]
        rows = [
            (i, summary.trial_seeds[i], summary.taus[i])
            for i in range(len(summary.taus))
        ]
        Path(args.csv).write_text(mc_csv_text(comments, rows), encoding="utf-8")
    result = {
        "k": summary.k,
        "h": summary.h,
        "n": summary.n,
        "diameter": summary.diameter,
        "budget": summary.budget,
        "trials": summary.trials,
        "stats": summary.stats(),
        "taus": summary.taus,
        "trial_seeds": summary.trial_seeds,
    }
    _write_text(args.output, dumps_json(envelope("mc-tau", cfg, seed, result)))
    return 0


def cmd_fixed_point(args) -> int:
    res = fixed_point_q(lower=args.lower, upper=args.upper, tolerance=args.tol)
    cfg = _config(args, ("lower", "upper", "tol"))
    result = {
        "q": res.q,
        "residual": res.residual,
        "lower": res.lower,
        "upper": res.upper,
        "iterations": res.iterations,
        "tolerance": res.tolerance,
    }
    _write_text(args.output, dumps_json(envelope("fixed-point", cfg, None, result)))
    return 0


def cmd_check_claims(args) -> int:
    seed = _resolved_seed(args)
    names = args.suites.split(",") if args.suites else None
    reports = run_claim_suites(names=names, instances=args.instances, seed=seed)
    for report in reports:
        print(report.summary_line())
    if args.output:
        cfg = _config(args, ("suites", "instances"))
        cfg["seed"] = seed
        result = [
            {
                "name": r.name,
                "instances": r.instances,
                "satisfied": r.satisfied,
                "violations": r.violations,
                "passed": r.passed,
                "examples": r.examples,
            }
            for r in reports
        ]
        _write_text(args.output, dumps_json(envelope("check-claims", cfg, seed, result)))
    failing = sum(1 for r in reports if not r.passed)
    if failing:
        print(f"CLAIM_VIOLATION: {failing} suite(s) reported violations", file=sys.stderr)
        return 1
    return 0


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog=TOOL_NAME,
        description="Synchronous majority dynamics on odd-degree trees.",
    )
    top.add_argument(
        "--version", action="version", version=f"{TOOL_NAME} {__version__}"
    )
    sub = top.add_subparsers(dest="command", required=True, metavar="command")

    def add_output(p):
        p.add_argument("-o", "--output", help="output path (default: stdout)")

    def add_seed(p):
        p.add_argument(
            "--seed", type=int, help="master seed (default: $MAJLAB_SEED, then 0)"
        )

    p = sub.add_parser("gen", help="write a perfect k-ary tree file")
    p.add_argument("--k", type=int, required=True, help="even branching factor >= 2")
    p.add_argument("--h", type=int, required=True, help="height >= 1")
    add_output(p)
    p.set_defaults(handler=cmd_gen)

    p = sub.add_parser("simulate", help="run the dynamics to its 2-periodic tail")
    p.add_argument("--tree", required=True, help="tree file")
    p.add_argument("--init", help="opinion file; omitted = uniform random")
    add_seed(p)
    p.add_argument("--trace", help="write one opinion string per time step here")
    add_output(p)
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("worst-case", help="exact worst-case stabilisation time")
    p.add_argument("--tree", required=True)
    add_output(p)
    p.set_defaults(handler=cmd_worst_case)

    p = sub.add_parser("brute-force", help="enumerate all initial vectors")
    p.add_argument("--tree", required=True)
    p.add_argument("--budget", type=int, default=BRUTE_FORCE_BUDGET)
    add_output(p)
    p.set_defaults(handler=cmd_brute_force)

    p = sub.add_parser("stability", help="decide a stability predicate")
    p.add_argument("--tree", required=True)
    p.add_argument("--init", help="opinion file; omitted = uniform random")
    add_seed(p)
    p.add_argument("--kind", choices=STABILITY_KINDS, required=True)
    p.add_argument("--vertex", type=int, required=True)
    p.add_argument("--t", type=int)
    p.add_argument("--budget", type=int, default=EXTENSION_BUDGET)
    add_output(p)
    p.set_defaults(handler=cmd_stability)

    p = sub.add_parser("prob", help="stability probability (exact or Monte Carlo)")
    p.add_argument("--target", choices=TARGETS, required=True)
    p.add_argument("--height", type=int, required=True, help="subject vertex height")
    p.add_argument("--t", type=int)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--method", choices=("auto", "exact", "mc"), default="auto")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument(
        "--xi",
        choices=("+", "-"),
        help="with --target le_t: joint event with this settled opinion",
    )
    p.add_argument("--budget", type=int, default=EXTENSION_BUDGET)
    add_seed(p)
    add_output(p)
    p.set_defaults(handler=cmd_prob)

    p = sub.add_parser("mc-tau", help="Monte Carlo stabilisation times")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--h", type=int, required=True)
    p.add_argument("--trials", type=int, default=200)
    add_seed(p)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--csv", help="write trial,seed,tau CSV here")
    add_output(p)
    p.set_defaults(handler=cmd_mc_tau)

    p = sub.add_parser("fixed-point", help="solve x = P(x) by bisection")
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--lower", type=float, default=1 / 16)
    p.add_argument("--upper", type=float, default=3 / 40)
    add_output(p)
    p.set_defaults(handler=cmd_fixed_point)

    p = sub.add_parser("check-claims", help="run the property suites")
    p.add_argument(
        "--suites",
        help=f"comma-separated subset of: {', '.join(ALL_SUITES)}",
    )
    p.add_argument("--instances", type=int, default=1000)
    add_seed(p)
    add_output(p)
    p.set_defaults(handler=cmd_check_claims)

    return top


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except MajlabError as exc:
        print(f"{exc.code}: {exc.message}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"IO_ERROR: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
