"""IS5-specific checks: the fixed-point collapse, heredity and axiom soundness.

On IS5 models every fixed point of a modal body is reached after two
iterations, so ``nu X.psi`` can be replaced by ``psi(psi(top))`` and
``mu X.psi`` by ``psi(psi(bot))``.  Rewriting innermost binders first keeps
every eliminated body free of fixed points.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .formula import (
    BOT,
    TOP,
    And,
    Box,
    Dia,
    Fixpoint,
    Formula,
    FormulaError,
    Imp,
    Mu,
    Neg,
    Nu,
    Or,
    Prop,
    Var,
    binder,
    is_well_named,
    polarity,
    rebuild,
    substitute,
)
from .kripke import KripkeModel, bits, validate_ck, validate_is5
from .semantics import Evaluator, upsets
from .syntax import to_text

SIZE_LIMIT = 10**5


class CollapseError(FormulaError):
    pass


@dataclass(frozen=True)
class CollapseStep:
    """One eliminated binder ``eta X.psi`` with fixed-point-free ``psi``."""

    binder: Fixpoint
    seed: Formula  # top for nu, bot for mu
    once: Formula  # psi(seed)
    output: Formula  # psi(psi(seed))

    @property
    def substitution(self) -> str:
        b = self.binder
        c = to_text(self.seed)
        return f"{b.kind} {b.var}.psi |-> psi(psi({c})) with psi = {to_text(b.body)}"

    def to_json(self) -> dict:
        return {
            "binder": to_text(self.binder),
            "substitution": self.substitution,
            "once": to_text(self.once),
            "output": to_text(self.output),
        }


@dataclass
class CollapseTrace:
    input: Formula
    steps: list[CollapseStep]
    output: Formula

    def to_json(self) -> dict:
        return {
            "input": to_text(self.input),
            "steps": [s.to_json() for s in self.steps],
            "output": to_text(self.output),
        }

    def to_text(self) -> str:
        lines = [f"input: {to_text(self.input)}"]
        for i, s in enumerate(self.steps, 1):
            lines.append(f"step {i}: {to_text(s.binder)}  ~>  {to_text(s.output)}")
        lines.append(f"output: {to_text(self.output)}")
        return "\n".join(lines)


def collapse(phi: Formula, limit: int = SIZE_LIMIT) -> CollapseTrace:
    """Rewrite a closed well-named formula into an equivalent modal one (on IS5).

    A binder whose body has size ``s`` and ``k`` occurrences of its variable
    yields a formula of size at most ``s * (1 + k + k*k)``; the result is
    refused once any intermediate formula exceeds ``limit`` nodes.
    """
    if phi.free_vars:
        raise CollapseError(f"formula has free variables: {sorted(phi.free_vars)}")
    if not is_well_named(phi):
        raise CollapseError(f"formula is not well-named: {to_text(phi)}")
    steps: list[CollapseStep] = []

    def rec(f: Formula) -> Formula:
        if isinstance(f, Fixpoint):
            body = rec(f.body)
            seed = TOP if isinstance(f, Nu) else BOT
            once = substitute(body, f.var, seed)
            out = substitute(body, f.var, once)
            if out.size > limit:
                raise CollapseError(f"collapse exceeds {limit} nodes at binder {f.var}")
            steps.append(CollapseStep(binder(f.kind, f.var, body), seed, once, out))
            return out
        kids = f.children()
        if not kids:
            return f
        return rebuild(f, [rec(c) for c in kids])

    return CollapseTrace(phi, steps, rec(phi))


@dataclass
class CheckResult:
    """One line of a check report: ``{check, model-id, formula, status, witness?}``."""

    check: str
    model_id: str
    formula: str
    status: str = "pass"
    witness: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.status == "pass"

    def fail(self, witness) -> None:
        self.status = "fail"
        self.witness.append(witness)

    def to_json(self) -> dict:
        out = {
            "check": self.check,
            "model-id": self.model_id,
            "formula": self.formula,
            "status": self.status,
        }
        if self.witness:
            out["witness"] = self.witness
        return out

    def to_text(self) -> str:
        line = f"{self.check}\t{self.model_id}\t{self.formula}\t{self.status}"
        if self.witness:
            line += "\t" + "; ".join(map(str, self.witness))
        return line


def _assignments(model: KripkeModel, names: Sequence[str], limit: int, seed: str):
    """Up-closed assignments for ``names``: all of them, or ``limit`` drawn at random."""
    ups = upsets(model)
    total = len(ups) ** len(names)
    if total <= limit:
        for combo in itertools.product(ups, repeat=len(names)):
            yield dict(zip(names, combo))
        return
    rng = random.Random(seed)
    for _ in range(limit):
        yield {v: rng.choice(ups) for v in names}


def check_collapse_semantics(
    model: KripkeModel,
    phi: Formula,
    model_id: str = "model",
    trace: CollapseTrace | None = None,
    limit: int = 64,
) -> CheckResult:
    """Check ``||phi|| = ||collapse(phi)||`` and the two-step equality at every step.

    A step's binder may have free variables bound further out; the step is
    checked under every up-closed assignment to them (or ``limit`` sampled
    ones when there are more).
    """
    trace = trace or collapse(phi)
    res = CheckResult("collapse", model_id, to_text(phi))
    ev = Evaluator(model)
    a, b = ev.mask(phi), ev.mask(trace.output)
    if a != b:
        res.fail({
            "output": to_text(trace.output),
            "value": model.world_set(a).names(model),
            "collapsed": model.world_set(b).names(model),
        })
    for i, step in enumerate(trace.steps):
        names = sorted(step.binder.free_vars)
        for env in _assignments(model, names, limit, f"{model_id}:{i}"):
            x, y = ev.mask(step.binder, env), ev.mask(step.output, env)
            if x != y:
                res.fail({
                    "step": i + 1,
                    "binder": to_text(step.binder),
                    "assignment": {k: model.world_set(v).names(model) for k, v in env.items()},
                    "fixpoint": model.world_set(x).names(model),
                    "two_steps": model.world_set(y).names(model),
                })
                break
    return res


def check_two_step(model: KripkeModel, kind: str, var: str, body: Formula) -> bool:
    """``psi(psi(c)) = psi(psi(psi(c)))`` for the seed ``c`` of ``kind``."""
    seed = TOP if kind == "nu" else BOT
    ev = Evaluator(model)
    f2 = substitute(body, var, substitute(body, var, seed))
    f3 = substitute(body, var, f2)
    return ev.mask(f2) == ev.mask(f3)


def check_heredity(model: KripkeModel, phi: Formula, model_id: str = "model") -> CheckResult:
    """For ``w (pre;R) w'``: ``w |= []phi`` implies ``w' |= []phi``, and likewise for ``<>``."""
    res = CheckResult("heredity", model_id, to_text(phi))
    ev = Evaluator(model)
    for op in (Box, Dia):
        f = op(phi)
        s = ev.mask(f)
        for w in bits(s):
            bad = model.pre_modal[w] & ~s
            for u in bits(bad):
                res.fail({"formula": to_text(f), "from": model.worlds[w], "to": model.worlds[u]})
    return res


# Axiom schemas.  ``A`` and ``B`` are metavariables for arbitrary formulas,
# ``F`` a body in which ``X`` occurs only positively; ``F(G)`` is ``F`` with
# ``X`` replaced by ``G``.

def _app(body: Formula, arg: Formula) -> Formula:
    return substitute(body, "X", arg)


@dataclass(frozen=True)
class Schema:
    name: str
    text: str
    kind: str  # "axiom" or "rule"
    model_class: str  # "CK" or "IS5"
    metavars: tuple[str, ...]
    uses_body: bool
    build: Callable[..., tuple[list[Formula], Formula]]


def _axiom(name, text, cls, metavars, make):
    return Schema(name, text, "axiom", cls, metavars, False, lambda a, b, f: ([], make(a, b)))


AXIOMS: dict[str, Schema] = {
    s.name: s
    for s in [
        _axiom("K[]", "[] (A -> B) -> [] A -> [] B", "CK", ("A", "B"),
               lambda a, b: Imp(Box(Imp(a, b)), Imp(Box(a), Box(b)))),
        _axiom("K<>", "[] (A -> B) -> <> A -> <> B", "CK", ("A", "B"),
               lambda a, b: Imp(Box(Imp(a, b)), Imp(Dia(a), Dia(b)))),
        Schema("nuFP", "nu X. F -> F(nu X. F)", "axiom", "CK", (), True,
               lambda a, b, f: ([], Imp(Nu("X", f), _app(f, Nu("X", f))))),
        Schema("muFP", "F(mu X. F) -> mu X. F", "axiom", "CK", (), True,
               lambda a, b, f: ([], Imp(_app(f, Mu("X", f)), Mu("X", f)))),
        Schema("nuInd", "A -> F(A) / A -> nu X. F", "rule", "CK", ("A",), True,
               lambda a, b, f: ([Imp(a, _app(f, a))], Imp(a, Nu("X", f)))),
        Schema("muInd", "F(A) -> A / mu X. F -> A", "rule", "CK", ("A",), True,
               lambda a, b, f: ([Imp(_app(f, a), a)], Imp(Mu("X", f), a))),
        Schema("Nec", "A / [] A", "rule", "CK", ("A",), False,
               lambda a, b, f: ([a], Box(a))),
        Schema("MP", "A, A -> B / B", "rule", "CK", ("A", "B"), False,
               lambda a, b, f: ([a, Imp(a, b)], b)),
        _axiom("FS", "(<> A -> [] B) -> [] (A -> B)", "IS5", ("A", "B"),
               lambda a, b: Imp(Imp(Dia(a), Box(b)), Box(Imp(a, b)))),
        _axiom("DP", "<> (A \\/ B) -> <> A \\/ <> B", "IS5", ("A", "B"),
               lambda a, b: Imp(Dia(Or(a, b)), Or(Dia(a), Dia(b)))),
        _axiom("N", "~<> bot", "IS5", (), lambda a, b: Neg(Dia(BOT))),
        _axiom("T", "([] A -> A) /\\ (A -> <> A)", "IS5", ("A",),
               lambda a, b: And(Imp(Box(a), a), Imp(a, Dia(a)))),
        _axiom("4", "([] A -> [] [] A) /\\ (<> <> A -> <> A)", "IS5", ("A",),
               lambda a, b: And(Imp(Box(a), Box(Box(a))), Imp(Dia(Dia(a)), Dia(a)))),
        _axiom("5", "(<> A -> [] <> A) /\\ (<> [] A -> [] A)", "IS5", ("A",),
               lambda a, b: And(Imp(Dia(a), Box(Dia(a))), Imp(Dia(Box(a)), Box(a)))),
    ]
}


class AxiomCatalog:
    """Named schemas, instantiable at formulas."""

    def __init__(self, names: Iterable[str] | None = None):
        names = list(AXIOMS) if names is None else list(names)
        unknown = [n for n in names if n not in AXIOMS]
        if unknown:
            raise KeyError(f"unknown schema(s): {', '.join(unknown)}")
        self.schemas = [AXIOMS[n] for n in names]

    def __iter__(self):
        return iter(self.schemas)

    def __len__(self):
        return len(self.schemas)

    @staticmethod
    def instantiate(
        schema: Schema,
        a: Formula | None = None,
        b: Formula | None = None,
        body: Formula | None = None,
    ) -> tuple[list[Formula], Formula]:
        """Premises and conclusion of ``schema`` at the given formulas."""
        if schema.uses_body:
            if body is None:
                raise FormulaError(f"{schema.name} needs a body")
            if not polarity(body, "X").is_positive:
                raise FormulaError(f"X is not positive in {to_text(body)}")
        return schema.build(a, b, body)


def instantiation_grammar(depth: int, atoms: Sequence[Formula] | None = None) -> list[Formula]:
    """Formulas used to instantiate schemas, in a fixed order.

    ``L0`` is the atoms (default ``P, Q, bot, top``); ``L(k+1)`` adds
    ``~a, []a, <>a`` for ``a`` in ``L(k)`` and ``a o b``, ``b o a`` for
    ``a`` in ``L(k)``, ``b`` in ``L0`` and ``o`` one of ``/\\ \\/ ->``.
    """
    atoms = list(atoms) if atoms is not None else [Prop("P"), Prop("Q"), BOT, TOP]
    level = list(atoms)
    seen = set(level)
    for _ in range(depth):
        new = []
        for a in level:
            cands = [Neg(a), Box(a), Dia(a)]
            for b in atoms:
                for op in (And, Or, Imp):
                    cands += [op(a, b), op(b, a)]
            for c in cands:
                if c not in seen:
                    seen.add(c)
                    new.append(c)
        level = level + new
    return level


def body_grammar(depth: int) -> list[Formula]:
    """Bodies for fixed-point schemas: grammar formulas over ``P, Q, bot, top, X``
    in which ``X`` occurs, and only positively."""
    atoms = [Prop("P"), Prop("Q"), BOT, TOP, Var("X")]
    return [
        f
        for f in instantiation_grammar(depth, atoms)
        if "X" in f.free_vars and polarity(f, "X").is_positive
    ]


def check_axioms(
    model: KripkeModel,
    names: Iterable[str] | None = None,
    depth: int = 1,
    model_id: str = "model",
    body_depth: int | None = None,
) -> list[CheckResult]:
    """Check schemas on ``model`` over all instances from the grammar.

    Axioms must hold at every world.  Rules are checked as per-model
    implications: if every premise holds everywhere, so does the conclusion.
    IS5 schemas are skipped (status ``skip``) on models that are not IS5.

    Metavariables ``A`` and ``B`` enter a formula only through their value,
    so each schema is evaluated once per distinct pair of values with ``A``
    and ``B`` read as variables.  Fixed-point bodies are substituted
    syntactically.
    """
    catalog = AxiomCatalog(names)
    ck_ok = not validate_ck(model)
    is5_ok = ck_ok and not validate_is5(model)
    terms = instantiation_grammar(depth)
    bodies = body_grammar(depth if body_depth is None else body_depth)
    ev = Evaluator(model)
    values = sorted({ev.mask(t) for t in terms})
    full = model.full
    results = []
    for schema in catalog:
        res = CheckResult(schema.name, model_id, schema.text)
        results.append(res)
        if not (is5_ok if schema.model_class == "IS5" else ck_ok):
            res.status = "skip"
            continue
        mv = schema.metavars
        va, vb = Var("A"), Var("B")
        for body in bodies if schema.uses_body else [None]:
            prem, concl = catalog.instantiate(schema, va, vb, body)
            for combo in itertools.product(values, repeat=len(mv)):
                env = dict(zip(mv, combo))
                if any(ev.mask(p, env) != full for p in prem):
                    continue
                val = ev.mask(concl, env)
                if val != full:
                    res.fail(_axiom_witness(model, terms, ev, env, body, val))
                    break
            if not res.ok:
                break
    return results


def _axiom_witness(model, terms, ev, env, body, val) -> dict:
    inst = {}
    for k, v in env.items():
        inst[k] = next(to_text(t) for t in terms if ev.mask(t) == v)
    if body is not None:
        inst["F"] = to_text(body)
    inst["fails_at"] = model.world_set(model.full & ~val).names(model)
    return inst
