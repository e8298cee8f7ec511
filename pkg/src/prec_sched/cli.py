"""Command-line interface.

Subcommands mirror the library layers: validate, lp, lpls, exact,
bounded, solve, bench, gen. Results are JSON on stdout (rationals as
decimal strings); bench and validate also offer a plain table. Exit
codes: 0 success, 1 usage error, 2 invalid or infeasible input, 3 broken
internal invariant (a bug, e.g. a block escaping its interval).
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from .bounded import solve_bounded
from .decompose import decompose_and_solve
from .errors import (
    InfeasibleScheduleError,
    InvariantViolationError,
    LpIterationLimitError,
    SchedulingError,
    ValidationError,
)
from .exact import EXACT_CAP, exact_opt
from .harness import FAMILIES, GeneratorConfig, bench, generate
from .instance import load_instance, validate
from .listsched import list_schedule_strict, lp_ls
from .lp import TAU_LP, solve_lp
from .util import decimal_str


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default; the contract here is 1
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc


def _build_parser() -> _Parser:
    parser = _Parser(prog="prec-sched", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--output", choices=("json", "table"), default="json")
        return p

    p = add("validate", "check an instance file for structural problems")
    p.add_argument("instance")

    p = add("lp", "solve the completion-time relaxation")
    p.add_argument("instance")
    p.add_argument("--separation", choices=("auto", "exhaustive", "fast"), default="auto")
    p.add_argument("--tol", type=float, default=TAU_LP)

    p = add("lpls", "LP-ordered list scheduling, no guessing")
    p.add_argument("instance")
    p.add_argument("--ls-variant", choices=("available", "strict"), default="available")

    p = add("exact", "exact optimum by subset dynamic program (small n)")
    p.add_argument("instance")
    p.add_argument("--cap", type=int, default=EXACT_CAP)

    p = add("bounded", "guess-and-solve on a bounded instance")
    p.add_argument("instance")
    p.add_argument("--L", required=True, type=_fraction)
    p.add_argument("--beta", required=True, type=_fraction)
    p.add_argument("--epsilon", required=True, type=_fraction)
    p.add_argument("--mode", choices=("exhaustive", "typed", "empty-guess"), default="exhaustive")
    p.add_argument("--budget", type=int)

    p = add("solve", "full decompose-and-solve pipeline")
    p.add_argument("instance")
    p.add_argument("--epsilon", required=True, type=_fraction)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--seed", type=int, help="random offset from this seed")
    group.add_argument("--derandomize", action="store_true", help="best over all offsets (default)")
    p.add_argument("--bounded-mode", choices=("exhaustive", "typed", "empty-guess"), default="exhaustive")
    p.add_argument("--budget", type=int)

    p = add("bench", "ratio benchmark over generated instances")
    p.add_argument("--family", action="append", choices=FAMILIES, default=None)
    p.add_argument("--n", type=int, default=6)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--epsilon", action="append", type=_fraction, default=None)
    p.add_argument("--seed", type=int, default=0)

    p = add("gen", "emit a generated instance as JSON")
    p.add_argument("--family", choices=FAMILIES, default="uniform")
    p.add_argument("--n", type=int, default=6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--p-max", type=int, default=8)
    p.add_argument("--r-max", type=int, default=16)
    p.add_argument("--w-max", type=int, default=6)
    p.add_argument("--density", type=float, default=0.3)
    p.add_argument("--M", type=int, default=10, help="size parameter of the two-job family")
    return parser


def _emit(doc, output: str) -> None:
    if output == "table" and isinstance(doc, dict) and "rows" in doc:
        for row in doc["rows"]:
            print("  ".join(f"{k}={v}" for k, v in row.items()))
        for v in doc.get("violations", ()):
            print(f"VIOLATED: {v}")
        return
    print(json.dumps(doc, indent=2))


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except (ValidationError, InfeasibleScheduleError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error reading input: {exc}", file=sys.stderr)
        return 2
    except (InvariantViolationError, LpIterationLimitError) as exc:
        print(f"internal invariant broken: {exc}", file=sys.stderr)
        return 3
    except (ValueError, SchedulingError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _dispatch(args) -> int:
    cmd = args.command
    if cmd == "validate":
        # report structural findings instead of bailing on the first one
        try:
            inst = load_instance(args.instance)
        except ValidationError as exc:
            findings = list(exc.findings)
        else:
            findings = list(validate(inst).findings)
        if args.output == "table":
            print("ok" if not findings else "\n".join(findings))
        else:
            _emit({"ok": not findings, "findings": findings}, args.output)
        return 0 if not findings else 2

    if cmd == "gen":
        config = GeneratorConfig(
            n=args.n,
            seed=args.seed,
            p_max=args.p_max,
            r_max=args.r_max,
            w_max=args.w_max,
            prec_density=args.density,
            family=args.family,
            m=args.M,
        )
        _emit(generate(config).to_dict(), args.output)
        return 0

    inst = None
    if cmd not in ("bench",):
        inst = load_instance(args.instance, normalize=True)

    if cmd == "lp":
        sol = solve_lp(inst, tau=args.tol, separation=args.separation)
        _emit(
            {
                "C": [decimal_str(c) for c in sol.completion],
                "Z": decimal_str(sol.value),
                "cuts": [list(cut.jobs) for cut in sol.cuts],
            },
            args.output,
        )
        return 0

    if cmd == "lpls":
        run = lp_ls(inst)
        sched = run.schedule
        if args.ls_variant == "strict":
            sched = list_schedule_strict(inst, run.order)
        doc = sched.to_dict(inst)
        doc["lp_Z"] = decimal_str(run.lp.value)
        doc["order"] = list(run.order)
        _emit(doc, args.output)
        return 0

    if cmd == "exact":
        opt, sched = exact_opt(inst, args.cap)
        _emit({"opt": decimal_str(opt), "schedule": sched.to_dict(inst)}, args.output)
        return 0

    if cmd == "bounded":
        res = solve_bounded(
            inst, args.epsilon, L=args.L, beta=args.beta, mode=args.mode, budget=args.budget
        )
        doc = res.schedule.to_dict(inst)
        doc["guesses_tried"] = res.guesses_tried
        doc["best_guess"] = res.best_guess.to_dict()
        _emit(doc, args.output)
        return 0

    if cmd == "solve":
        mode = "random" if args.seed is not None else "derandomized"
        res = decompose_and_solve(
            inst,
            args.epsilon,
            mode=mode,
            seed=args.seed,
            bounded_mode=args.bounded_mode,
            budget=args.budget,
        )
        _emit(res.to_dict(inst), args.output)
        return 0

    if cmd == "bench":
        families = args.family or ["uniform", "p_le_r"]
        epsilons = args.epsilon or [Fraction(1)]
        configs = [
            GeneratorConfig(n=args.n, seed=args.seed, family=fam) for fam in families
        ]
        report = bench(configs, epsilons, args.trials)
        _emit(report, args.output)
        return 3 if report["violations"] else 0

    raise AssertionError(f"unhandled command {cmd}")


if __name__ == "__main__":
    sys.exit(main())
