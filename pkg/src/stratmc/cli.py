"""Command-line front end.

Reports are printed as ``key: value`` lines.  Exit codes:
0 true, 1 false, 2 rejected instance, 3 budget exceeded or unsupported,
4 parse error, 5 unknown (bounded oracle only).
"""

import argparse
import os
import sys
import time

from . import checker, logic, oracle
from .automata.budget import Budget
from .cgs import StrategyContext, outcomes_bounded
from .errors import (BoundExceeded, NotHierarchicalCoalition,
                     NotHierarchicalInstance, NoWitnessAvailable, ParseError,
                     RouteMismatch, StateBudgetExceeded, StratError,
                     UnknownAgent, UnsupportedObjectiveIndex)
from .modelfile import load_model
from .qctl_engine import ENGINE_CAP, mc_ctl_star, run_qctl
from .translate import VARIANTS, build_cks, translate

EXIT_TRUE = 0
EXIT_FALSE = 1
EXIT_REJECT = 2
EXIT_BUDGET = 3
EXIT_PARSE = 4
EXIT_UNKNOWN = 5


def _env_int(name, default):
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise SystemExit(f"{name} must be an integer, got {raw!r}")


def _formula_text(arg):
    if os.path.isfile(arg):
        with open(arg, encoding="utf-8") as fh:
            return fh.read()
    return arg


def _emit(out, key, value):
    print(f"{key}: {value}", file=out)


def _verdict_code(value):
    return EXIT_TRUE if value else EXIT_FALSE


def _budget(args):
    cap = args.budget if args.budget is not None else _env_int("STRATMC_BUDGET", ENGINE_CAP)
    return cap


def _horizon(args):
    if args.horizon is not None:
        return args.horizon
    return _env_int("STRATMC_HORIZON", 4)


def _load(args):
    g = load_model(args.model)
    v = args.position or g.init
    g.check_play((v,))
    return g, v


def _parse_formula(args, g, text=None):
    text = _formula_text(args.formula if text is None else text)
    return logic.parse(text, args.logic, universe=set(g.agents))


def _render_strategy(s):
    states = sorted(set(s.output), key=repr)
    return ", ".join(f"{m}->{s.output[m]}" for m in states)


def _report_witness(out, g, v, query, horizon=checker.REPLAY_HORIZON):
    try:
        profile = checker.extract_witness(query)
    except NoWitnessAvailable as exc:
        _emit(out, "witness", f"unavailable ({exc})")
        return
    if not profile:
        _emit(out, "witness", "empty profile")
        return
    for a in sorted(profile):
        s = profile[a]
        _emit(out, f"witness.{a}.memory", len(s.output))
        _emit(out, f"witness.{a}.output", _render_strategy(s))
    game = query.game
    plays = outcomes_bounded(game, (query.position,), StrategyContext(profile), horizon)
    for p in sorted(plays):
        _emit(out, "witness.outcome", ".".join(p))


def cmd_check(args, out):
    g, v = _load(args)
    f = _parse_formula(args, g)
    cap = _budget(args)
    _emit(out, "logic", args.logic)
    _emit(out, "position", v)
    start = time.perf_counter()
    if args.logic in (logic.LTL, logic.CTLSTAR, logic.QCTLI):
        cks = build_cks(checker._deterministic(g))
        s = cks.state_of[v]
        if args.logic == logic.LTL:
            f = logic.PathA(f)
        if args.logic == logic.QCTLI:
            b = Budget(cap)
            run = run_qctl(cks, s, f, b)
            value, used, route = bool(run.value), b.used, "qctl"
            if args.dump_automata:
                run.dump(args.dump_automata)
        else:
            value, used, route = mc_ctl_star(cks, s, f), 0, "ctl*"
        _emit(out, "route", route)
        _emit(out, "verdict", str(value).lower())
        _emit(out, "time", f"{time.perf_counter() - start:.3f}s")
        _emit(out, "budget", f"{used}/{cap}")
        return _verdict_code(value)
    rep = checker.classify(g, v, f, args.logic)
    _emit(out, "route", rep.route)
    if rep.hierarchy:
        _emit(out, "hierarchical observation", rep.hierarchy)
    if not rep.accepted:
        for d in rep.diagnostics:
            _emit(out, "diagnostic", d)
        _emit(out, "verdict", "reject")
        return EXIT_REJECT
    res = checker.check(g, v, f, args.logic, cap)
    _emit(out, "verdict", str(res.value).lower())
    _emit(out, "time", f"{res.elapsed:.3f}s")
    _emit(out, "budget", f"{res.budget_used}/{cap}")
    for name, (node, where) in res.markings.items():
        places = " ".join(p for p in g.positions if p in where) or "-"
        _emit(out, f"mark.{name}", f"{logic.to_text(node)} @ {{{places}}}")
    if args.dump_automata:
        for label, run in res.runs:
            run.dump(os.path.join(args.dump_automata, label))
        _emit(out, "dump", args.dump_automata)
    if args.witness:
        if res.value and res.query is not None:
            _report_witness(out, g, v, res.query)
        elif res.value and f.kind in ("strat", "bind") and not f.agents:
            _emit(out, "witness", "empty profile")
        else:
            _emit(out, "witness", "unavailable (no single strategic query succeeded)")
    return _verdict_code(res.value)


def cmd_translate(args, out):
    g, v = _load(args)
    f = _parse_formula(args, g)
    tr = translate(checker._deterministic(g), v, f, args.variant)
    out.write(tr.render())
    _emit(out, "state", tr.cks.name(tr.state))
    return EXIT_TRUE


def cmd_classify(args, out):
    g, v = _load(args)
    _emit(out, "hierarchical observation", checker.describe_observation(g))
    if args.formula is None:
        return EXIT_TRUE
    f = _parse_formula(args, g)
    rep = checker.classify(g, v, f, args.logic)
    for line in rep.lines():
        if not line.startswith("hierarchical observation"):
            print(line, file=out)
    return EXIT_TRUE if rep.accepted else EXIT_REJECT


def cmd_solve(args, out):
    g, v = _load(args)
    coalition = [a.strip() for a in args.coalition.split(",") if a.strip()]
    for a in coalition:
        g.check_agent(a)
    objective = logic.parse(_formula_text(args.objective), logic.LTL)
    cap = _budget(args)
    start = time.perf_counter()
    q = checker.solve_strategy(g, v, coalition, objective, Budget(cap))
    _emit(out, "coalition", ",".join(coalition) or "-")
    _emit(out, "verdict", str(q.value).lower())
    _emit(out, "time", f"{time.perf_counter() - start:.3f}s")
    _emit(out, "budget", f"{q.budget_used}/{cap}")
    if args.dump_automata:
        q.run.dump(args.dump_automata)
    if args.witness and q.value:
        _report_witness(out, g, v, q)
    return _verdict_code(q.value)


def cmd_oracle(args, out):
    g, v = _load(args)
    f = _parse_formula(args, g)
    horizon = _horizon(args)
    if args.logic not in (logic.ATLI, logic.ATLSCI):
        raise RouteMismatch("the bounded oracle handles atli and atlsci only")
    verdict = oracle.oracle_bounded_atl(g, v, f, horizon)
    _emit(out, "horizon", horizon)
    _emit(out, "verdict", verdict.value)
    if verdict is oracle.Verdict.UNKNOWN:
        return EXIT_UNKNOWN
    return _verdict_code(verdict is oracle.Verdict.TRUE)


def build_parser():
    p = argparse.ArgumentParser(prog="stratmc", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, formula=True, optional_formula=False):
        sp.add_argument("model", help="model file (.cgs)")
        if formula:
            sp.add_argument("formula", nargs="?" if optional_formula else None,
                            help="formula text or a file containing it")
        sp.add_argument("--logic", choices=logic.LOGICS, default=logic.ATLI)
        sp.add_argument("--position", help="start position (default: the init position)")
        sp.add_argument("--budget", type=int, help="engine state cap")
        sp.add_argument("--horizon", type=int, help="bounded-oracle horizon")
        sp.add_argument("--dump-automata", metavar="DIR")
        sp.add_argument("--witness", action="store_true")

    sp = sub.add_parser("check", help="decide a formula")
    common(sp)
    sp.set_defaults(func=cmd_check)
    sp = sub.add_parser("translate", help="print the compound structure and QCTL*i formula")
    common(sp)
    sp.add_argument("--variant", choices=VARIANTS, default="final")
    sp.set_defaults(func=cmd_translate, logic=logic.ATLSCI)
    sp = sub.add_parser("classify", help="report hierarchy and decision route")
    common(sp, optional_formula=True)
    sp.set_defaults(func=cmd_classify)
    sp = sub.add_parser("solve", help="A-strategy problem for an LTL objective")
    common(sp, formula=False)
    sp.add_argument("--coalition", required=True)
    sp.add_argument("--objective", required=True)
    sp.set_defaults(func=cmd_solve)
    sp = sub.add_parser("oracle", help="bounded reference evaluation")
    common(sp)
    sp.set_defaults(func=cmd_oracle)
    return p


def main(argv=None, out=None):
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    if args.command == "translate" and "--logic" not in (argv or sys.argv[1:]):
        args.logic = logic.ATLSCI
    try:
        return args.func(args, out)
    except (ParseError, UnknownAgent) as exc:
        _emit(out, "error", f"parse: {exc}")
        return EXIT_PARSE
    except (NotHierarchicalInstance, NotHierarchicalCoalition, RouteMismatch) as exc:
        _emit(out, "verdict", "reject")
        _emit(out, "diagnostic", exc)
        return EXIT_REJECT
    except StateBudgetExceeded as exc:
        _emit(out, "verdict", "budget")
        _emit(out, "construction", exc.construction)
        _emit(out, "error", exc)
        return EXIT_BUDGET
    except (UnsupportedObjectiveIndex, BoundExceeded) as exc:
        _emit(out, "verdict", "unsupported")
        _emit(out, "error", exc)
        return EXIT_BUDGET
    except FileNotFoundError as exc:
        _emit(out, "error", f"parse: {exc}")
        return EXIT_PARSE
    except StratError as exc:
        _emit(out, "error", exc)
        return EXIT_REJECT


if __name__ == "__main__":
    sys.exit(main())
