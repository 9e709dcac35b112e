"""Command-line entry point: ``ccsgames <command> ...``.

Exit codes: 0 pass or success, 1 fail, 2 inconclusive, 3 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import __version__, ccs
from . import presheaf as ps
from .lts import (LState, TermState, ccs_lts, default_state_cap, explore, fragment_dot,
                  interpret_is_strong_bisim, pullback_lts, state_hash, strategy_lts,
                  strategy_pipeline, strategy_state, term_lts, term_pipeline,
                  weak_bisim_bounded)
from .game import individual
from .verdict import Verdict

USAGE_ERROR = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.add_argument("--dot", metavar="PATH", help="write a Graphviz rendering to PATH")
    p.add_argument("--max-arity", type=int, metavar="N", help="largest player arity built")
    p.add_argument("--state-cap", type=int, metavar="N",
                   help="state budget (default: $CCSGAMES_STATE_CAP or 100000)")
    p.add_argument("--jobs", type=int, default=1, metavar="N", help="worker processes")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="ccsgames", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("translate", parents=[common], help="print the strategy of a process")
    p.add_argument("process", help='a process such as "[1] a1.0 + \'a1.tick.0"')
    p.add_argument("--depth", type=int, default=6, help="unfolding depth of the dump")

    p = sub.add_parser("lts", parents=[common], help="explore a transition system")
    p.add_argument("process")
    p.add_argument("--source", choices=("ccs", "terms", "strategies"), default="strategies")
    p.add_argument("--base", choices=("F", "L", "A"), default="A")
    p.add_argument("--depth", type=int, default=6, help="exploration depth")

    p = sub.add_parser("bisim", parents=[common], help="bisimulation checks")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--strong", action="store_true",
                      help="term transitions and strategy transitions match")
    mode.add_argument("--weak", action="store_true", help="weak bisimilarity over CCS labels")
    p.add_argument("--depth", type=int, default=6)
    p.add_argument("--left-ccs", metavar="PROC")
    p.add_argument("--left-strategy", metavar="PROC",
                   help="the strategy of PROC, change-of-based to CCS labels")
    p.add_argument("--right-ccs", metavar="PROC")
    p.add_argument("--right-strategy", metavar="PROC")

    p = sub.add_parser("fairtest", parents=[common], help="fair testing equivalence")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--standard", action="store_true")
    mode.add_argument("--semantic", action="store_true")
    p.add_argument("--left", required=True, metavar="PROC")
    p.add_argument("--right", required=True, metavar="PROC")
    p.add_argument("--gen-depth", type=int, default=2, help="height of generated test trees")
    p.add_argument("--width", type=int, default=2, help="branching of generated test trees")
    p.add_argument("--test", action="append", metavar="BODY",
                   help="explicit test body (repeatable); replaces the generated family")
    p.add_argument("--depth", type=int, default=4, help="semantic search depth k")

    p = sub.add_parser("accept", parents=[common], help="run the acceptance suite")
    p.add_argument("--only", metavar="LIST", help="comma-separated criterion numbers")
    p.add_argument("--report", metavar="DIR", help="write acceptance.csv and acceptance.png")
    return parser


def _process(flag: str, text: str) -> tuple:
    try:
        return ccs.parse_ccs(text)
    except ccs.CcsError as exc:
        raise UsageError(f"{flag}: {exc}") from None


def _emit(args, data: dict, human: str) -> None:
    if args.json:
        print(json.dumps(data, sort_keys=True, ensure_ascii=False))
    else:
        print(human)


def _verdict_text(v: Verdict) -> str:
    lines = [f"verdict: {v.status}{'' if v.exact else ' (bounded)'}"]
    for key in ("depth", "family_size", "budget_used"):
        if getattr(v, key):
            lines.append(f"{key.replace('_', ' ')}: {getattr(v, key)}")
    if v.witness is not None:
        lines.append(f"witness: {json.dumps(v.to_json()['witness'], ensure_ascii=False)}")
    if v.detail:
        lines.append(f"detail: {v.detail}")
    return "\n".join(lines)


def _write_dot(path: str, text: str) -> None:
    with open(path, "w") as fh:
        fh.write(text)


# --------------------------------------------------------------------------


def cmd_translate(args) -> int:
    from .strategies import dump, to_json, translate_ccs
    ctx, p = _process("process", args.process)
    s = translate_ccs(ctx, p)
    data = {"process": ccs.to_text(ctx, p), "strategy": to_json(s, args.depth)}
    _emit(args, data, f"{ccs.to_text(ctx, p)}\n{dump(s, args.depth)}")
    return 0


def _lts_for(source: str, base: str, ctx: int, p):
    if source == "ccs":
        if base != "A":
            raise UsageError("--base: CCS processes have transitions over A only")
        return ccs_lts(), (ctx, p)
    if source == "strategies":
        if base == "A":
            return strategy_pipeline(ctx, p)
        inner = strategy_state(ctx, p)
        raw = strategy_lts()
    else:
        if base == "A":
            return term_pipeline(ctx, p)
        from .strategies import theta
        inner = TermState(individual(ctx), (theta(ctx, p),))
        raw = term_lts()
    if base == "F":
        return raw, inner
    return pullback_lts(raw), LState(tuple(range(1, ctx + 1)), inner)


def cmd_lts(args) -> int:
    ctx, p = _process("process", args.process)
    lts, start = _lts_for(args.source, args.base, ctx, p)
    frag = explore(lts, start, args.state_cap, args.depth)
    rows = [(state_hash(k), str(label), state_hash(k2))
            for k, out in frag.edges.items() for label, k2 in out]
    if args.dot:
        _write_dot(args.dot, fragment_dot(frag))
    data = {"source": args.source, "base": args.base, "start": state_hash(frag.start),
            "states": len(frag.states), "transitions": [list(r) for r in rows],
            "complete": frag.complete}
    width = max((len(r[1]) for r in rows), default=5)
    human = [f"{args.source} over {args.base}: {len(frag.states)} states, {len(rows)} transitions"
             f"{'' if frag.complete else ' (cut at depth or cap)'}",
             f"start {state_hash(frag.start)}"]
    human += [f"{a}  {label:<{width}}  {b}" for a, label, b in rows]
    _emit(args, data, "\n".join(human))
    return 0


def _side(args, side: str):
    c, s = getattr(args, f"{side}_ccs"), getattr(args, f"{side}_strategy")
    if (c is None) == (s is None):
        raise UsageError(f"--{side}-ccs: give exactly one of --{side}-ccs and --{side}-strategy")
    if c is not None:
        ctx, p = _process(f"--{side}-ccs", c)
        return ccs_lts(), (ctx, p)
    ctx, p = _process(f"--{side}-strategy", s)
    return strategy_pipeline(ctx, p)


def cmd_bisim(args) -> int:
    if args.strong:
        if args.left_ccs is None or args.right_ccs or args.right_strategy or args.left_strategy:
            raise UsageError("--strong: takes --left-ccs only")
        from .strategies import theta
        ctx, p = _process("--left-ccs", args.left_ccs)
        v = interpret_is_strong_bisim(individual(ctx), [theta(ctx, p)], args.depth,
                                      state_cap=args.state_cap)
    else:
        l1, s1 = _side(args, "left")
        l2, s2 = _side(args, "right")
        v = weak_bisim_bounded(l1, s1, l2, s2, args.depth, args.state_cap)
    _emit(args, v.to_json(), _verdict_text(v))
    return v.exit_code


def cmd_fairtest(args) -> int:
    from .fairtest import (ccs_subject, ccs_test, fair_equiv_semantic, fair_equiv_standard,
                           gen_tree_tests, TestFamily)
    ctx, p = _process("--left", args.left)
    ctx2, q = _process("--right", args.right)
    if ctx != ctx2:
        raise UsageError(f"--right: context [{ctx2}] differs from --left's [{ctx}]")
    if args.test:
        fam = TestFamily(ctx, [_process("--test", f"[{ctx}] {t}")[1] for t in args.test])
    else:
        if args.gen_depth < 0 or args.width < 0:
            raise UsageError("--gen-depth: depth and width must be non-negative")
        fam = gen_tree_tests(ctx, args.gen_depth, args.width)
    budget = args.state_cap or default_state_cap()
    if args.standard:
        v = fair_equiv_standard(p, q, ctx, fam, budget, jobs=args.jobs)
    else:
        if args.jobs > 1:
            logging.getLogger(__name__).warning("--jobs is ignored by --semantic")
        v = fair_equiv_semantic(ccs_subject(ctx, p), ccs_subject(ctx, q),
                                [ccs_test(ctx, t) for t in fam], args.depth, budget)
        if v.failed:
            v.witness["test_text"] = fam.texts()[v.witness["test"]]
    _emit(args, v.to_json(), _verdict_text(v))
    return v.exit_code


def cmd_accept(args) -> int:
    from .acceptance import CRITERIA, run_all
    only = None
    if args.only:
        try:
            only = {int(x) for x in args.only.split(",") if x.strip()}
        except ValueError:
            raise UsageError(f"--only: expected numbers, got {args.only!r}") from None
        if not only <= set(range(1, len(CRITERIA) + 1)):
            raise UsageError(f"--only: criteria are numbered 1 to {len(CRITERIA)}")
    results = run_all(only, jobs=args.jobs)
    if args.report:
        from .report import write_report
        write_report(results, args.report)
    data = {"criteria": [{"number": r.number, "name": r.name, "passed": r.ok,
                          "detail": r.detail} for r in results],
            "passed": all(r.ok for r in results)}
    _emit(args, data, "\n".join(r.line() for r in results))
    return 0 if data["passed"] else 1


COMMANDS = {"translate": cmd_translate, "lts": cmd_lts, "bisim": cmd_bisim,
            "fairtest": cmd_fairtest, "accept": cmd_accept}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"ccsgames: error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except SystemExit as exc:  # --help, --version
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        for flag in ("depth", "state_cap", "jobs", "max_arity"):
            value = getattr(args, flag, None)
            if value is not None and value < (1 if flag in ("state_cap", "jobs") else 0):
                raise UsageError(f"--{flag.replace('_', '-')}: must not be {value}")
        if args.max_arity is not None:
            ps.set_max_arity(args.max_arity)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"ccsgames: error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
