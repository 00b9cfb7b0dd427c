"""Command-line front end.

Exit codes: 0 on success or agreement, 1 when a checked property fails,
2 on bad usage or input.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import corpus
from .collapse import AXIOMS, CollapseError, check_axioms, collapse
from .formula import FormulaError
from .game import build_arena
from .kripke import (
    KripkeModel,
    ModelError,
    close_repair,
    gen_ck,
    gen_is5,
    load_model,
    validate_ck,
    validate_is5,
)
from .semantics import evaluate
from .solver import solve, strategy_file, xcheck
from .syntax import parse, to_text

OK, FAIL, USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False)


def _formula(args):
    if args.formula is not None and args.formula_file is not None:
        raise UsageError("give either --formula or --formula-file, not both")
    if args.formula_file is not None:
        text = Path(args.formula_file).read_text(encoding="utf-8").strip()
    elif args.formula is not None:
        text = args.formula
    else:
        raise UsageError("a formula is required (--formula or --formula-file)")
    return parse(text)


def _closed(f):
    if f.free_vars:
        raise UsageError(f"formula has free variables: {', '.join(sorted(f.free_vars))}")
    return f


def _world(model: KripkeModel, name: str) -> str:
    if name not in model.index:
        raise UsageError(f"unknown world {name!r}")
    return name


def cmd_check(args, out):
    m = load_model(args.model)
    f = _closed(_formula(args))
    w = _world(m, args.world)
    value = m.index[w] in evaluate(m, None, f)
    if args.json:
        out.write(_dump({"world": w, "formula": to_text(f), "holds": value}) + "\n")
    else:
        out.write(("true" if value else "false") + "\n")
    return OK


def cmd_game(args, out):
    m = load_model(args.model)
    f = _formula(args)
    a = build_arena(m, _world(m, args.world), f)
    res = solve(a)
    text = strategy_file(a, res)
    if args.strategy_out:
        Path(args.strategy_out).write_text(text, encoding="utf-8")
    winner = "I" if res.winner(a.initial) == 0 else "II"
    if args.json:
        out.write(text)
    else:
        out.write(f"initial: {a.render(a.initial)}\nwinner: {winner}\npositions: {len(a)}\n")
    return OK


def cmd_xcheck(args, out):
    m = load_model(args.model)
    f = _formula(args)
    worlds = [_world(m, w) for w in args.world] if args.world else None
    rep = xcheck(m, f, worlds)
    out.write((_dump(rep.to_json()) if args.json else rep.to_text()) + "\n")
    return OK if rep.ok else FAIL


def cmd_collapse(args, out):
    tr = collapse(_formula(args))
    if args.json:
        out.write(_dump(tr.to_json()) + "\n")
    elif args.trace:
        out.write(tr.to_text() + "\n")
    else:
        out.write(to_text(tr.output) + "\n")
    return OK


def cmd_validate(args, out):
    with open(args.model, encoding="utf-8") as fh:
        m = KripkeModel.from_dict(json.load(fh))
    if args.repair:
        m = close_repair(m)
    problems = validate_is5(m) if args.is5 else validate_ck(m)
    if args.json:
        payload = {"valid": not problems, "violations": problems}
        if args.repair:
            payload["model"] = m.to_dict()
        out.write(_dump(payload) + "\n")
    else:
        if args.repair:
            out.write(_dump(m.to_dict()) + "\n")
        out.write("valid\n" if not problems else "\n".join(problems) + "\n")
    return OK if not problems else FAIL


def cmd_gen(args, out):
    make = gen_is5 if args.is5 else gen_ck
    m = make(args.seed, args.max_worlds, args.props)
    text = _dump(m.to_dict()) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        if args.json:
            out.write(_dump({"out": args.out, "worlds": len(m.worlds)}) + "\n")
    else:
        out.write(text)
    return OK


def cmd_axioms(args, out):
    m = load_model(args.model)
    names = args.schema or list(AXIOMS)
    if args.is5_only:
        names = [n for n in names if AXIOMS[n].model_class == "IS5"]
    results = check_axioms(m, names, args.depth, Path(args.model).stem)
    if args.json:
        out.write(_dump([r.to_json() for r in results]) + "\n")
    else:
        for r in results:
            out.write(r.to_text() + "\n")
    return OK if all(r.status != "fail" for r in results) else FAIL


def cmd_arena_dot(args, out):
    m = load_model(args.model)
    a = build_arena(m, _world(m, args.world), _formula(args))
    dot = a.to_dot()
    if args.out:
        Path(args.out).write_text(dot, encoding="utf-8")
        if args.json:
            out.write(_dump({"out": args.out, "positions": len(a)}) + "\n")
    else:
        out.write(dot)
    return OK


SUITE_BOUNDS = {
    "thm32": ("max_worlds", "depth", "sample", "random_cases", "seed"),
    "fixpoints": ("max_worlds", "depth", "sample", "seed"),
    "collapse": ("count", "max_worlds", "depth", "sample", "seed"),
    "heredity": ("count", "max_worlds", "depth", "sample", "seed"),
    "axioms": ("count", "max_worlds", "depth", "seed"),
    "frames": ("max_worlds", "count", "seed"),
    "separations": ("max_worlds", "seed"),
}


def cmd_corpus(args, out):
    run = corpus.SUITES[args.suite]
    kwargs = {}
    for k in SUITE_BOUNDS[args.suite]:
        v = getattr(args, k)
        if v is None:
            continue
        if args.suite == "axioms" and k == "count":
            kwargs["ck_count"] = kwargs["is5_count"] = v
        else:
            kwargs[k] = v
    rep = run(**kwargs)
    out.write((_dump(rep.to_json()) if args.json else rep.to_text()) + "\n")
    return OK if rep.ok else FAIL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="cmucalc", description="Model checking for the constructive modal mu-calculus."
    )
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help, formula=False, model=False, world=False):
        sp = sub.add_parser(name, help=help)
        sp.set_defaults(func=func)
        sp.add_argument("--json", action="store_true", help="machine-readable output")
        if model:
            sp.add_argument("--model", required=True, help="model JSON file")
        if world:
            sp.add_argument("--world", required=True)
        if formula:
            sp.add_argument("--formula", help="formula text")
            sp.add_argument("--formula-file", help="file containing the formula")
        return sp

    add("check", cmd_check, "truth of a formula at a world", formula=True, model=True, world=True)
    sp = add("game", cmd_game, "solve the evaluation game", formula=True, model=True, world=True)
    sp.add_argument("--strategy-out", help="write the winner's strategy as JSON")
    sp = add("xcheck", cmd_xcheck, "compare game winner and Kripke truth", formula=True, model=True)
    sp.add_argument("--world", action="append", help="restrict to this world (repeatable)")
    sp = add("collapse", cmd_collapse, "rewrite fixed points away (IS5)", formula=True)
    sp.add_argument("--trace", action="store_true", help="show each rewrite step")
    sp = add("validate-model", cmd_validate, "check CK or IS5 conditions", model=True)
    sp.add_argument("--is5", action="store_true")
    sp.add_argument("--repair", action="store_true", help="close relations and valuations first")
    sp = add("gen", cmd_gen, "generate a random model")
    kind = sp.add_mutually_exclusive_group(required=True)
    kind.add_argument("--is5", action="store_true")
    kind.add_argument("--ck", action="store_true")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--max-worlds", type=int, default=4)
    sp.add_argument("--props", type=int, default=1)
    sp.add_argument("--out")
    sp = add("axioms", cmd_axioms, "check axiom and rule soundness on a model", model=True)
    sp.add_argument("--depth", type=int, default=1)
    sp.add_argument("--is5-only", action="store_true")
    sp.add_argument("--schema", action="append", choices=list(AXIOMS))
    sp = add("arena-dot", cmd_arena_dot, "export the game arena as DOT", formula=True, model=True, world=True)
    sp.add_argument("--out")
    sp = add("corpus", cmd_corpus, "run a property suite")
    sp.add_argument("--suite", required=True, choices=list(corpus.SUITES))
    sp.add_argument("--seed", type=int)
    sp.add_argument("--max-worlds", type=int)
    sp.add_argument("--depth", type=int)
    sp.add_argument("--sample", type=int)
    sp.add_argument("--count", type=int)
    sp.add_argument("--random-cases", type=int)
    return p


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return OK if exc.code == 0 else USAGE
    if getattr(args, "max_worlds", None) is not None and args.max_worlds < 1:
        err.write("error: --max-worlds must be positive\n")
        return USAGE
    if getattr(args, "depth", None) is not None and args.depth < 0:
        err.write("error: --depth must be non-negative\n")
        return USAGE
    try:
        return args.func(args, out)
    except (UsageError, FormulaError, CollapseError, ModelError, OSError, ValueError, KeyError) as exc:
        err.write(f"error: {exc}\n")
        return USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
