"""Denotational semantics: the value of a formula in a model.

Fallible worlds satisfy every formula.  This is immediate for ``bot``,
propositions, conjunction, disjunction, implication and the modalities
(given R-serial fallible worlds), but the clause for negation and the
empty first approximant of a least fixed point do not yield it on their own,
so every clause result is joined with the fallible set.  On models without
fallible worlds this changes nothing.
"""
from __future__ import annotations

import itertools
import random
from typing import Mapping

from .formula import (
    And,
    Bot,
    Box,
    Dia,
    Fixpoint,
    Formula,
    FormulaError,
    Imp,
    Mu,
    Neg,
    Or,
    Polarity,
    Prop,
    Top,
    Var,
    polarity,
)
from .kripke import KripkeModel, WorldSet, bits


class EvaluationError(FormulaError):
    pass


Assignment = Mapping[str, "WorldSet | int"]


def _as_mask(value) -> int:
    return value.mask if isinstance(value, WorldSet) else int(value)


class Evaluator:
    """Evaluates formulas in one model under one variable assignment.

    Results are memoised on ``(formula, values of its free variables)``, which
    is sound because evaluation is pure.
    """

    def __init__(self, model: KripkeModel, assignment: Assignment | None = None):
        self.model = model
        self.assignment = {k: _as_mask(v) for k, v in (assignment or {}).items()}
        self._memo: dict = {}
        self._props = model.props
        self._full = model.full
        self._fall = model.fallible
        self._pre = model.pre
        self._modal = model.modal
        self._pre_modal = model.pre_modal

    def value(self, f: Formula) -> WorldSet:
        return WorldSet(self.mask(f), self.model.n)

    def mask(self, f: Formula, env: Mapping[str, int] | None = None) -> int:
        return self._eval(f, self.assignment if env is None else {**self.assignment, **env})

    def _lookup(self, name: str, env: Mapping[str, int]) -> int:
        if name in env:
            return env[name]
        try:
            return self._props[name]
        except KeyError:
            raise EvaluationError(f"no value for {name!r}") from None

    def _eval(self, f: Formula, env: Mapping[str, int]) -> int:
        fv = f.free_vars
        key = (f, tuple(env.get(v) for v in sorted(fv))) if fv else f
        try:
            return self._memo[key]
        except KeyError:
            pass
        out = self._compute(f, env) | self._fall
        self._memo[key] = out
        return out

    def _compute(self, f: Formula, env: Mapping[str, int]) -> int:
        n = self.model.n
        if isinstance(f, Prop):
            return self._lookup(f.name, env)
        if isinstance(f, Var):
            return self._lookup(f.name, env)
        if isinstance(f, Top):
            return self._full
        if isinstance(f, Bot):
            return self._fall
        if isinstance(f, And):
            return self._eval(f.left, env) & self._eval(f.right, env)
        if isinstance(f, Or):
            return self._eval(f.left, env) | self._eval(f.right, env)
        if isinstance(f, Imp):
            bad = self._eval(f.left, env) & ~self._eval(f.right, env)
            pre = self._pre
            return sum(1 << w for w in range(n) if not pre[w] & bad)
        if isinstance(f, Neg):
            a = self._eval(f.arg, env)
            pre = self._pre
            return sum(1 << w for w in range(n) if not pre[w] & a)
        if isinstance(f, Box):
            a = self._eval(f.arg, env)
            pm = self._pre_modal
            return sum(1 << w for w in range(n) if not pm[w] & ~a)
        if isinstance(f, Dia):
            a = self._eval(f.arg, env)
            modal, pre = self._modal, self._pre
            ok = sum(1 << v for v in range(n) if modal[v] & a)
            return sum(1 << w for w in range(n) if not pre[w] & ~ok)
        if isinstance(f, Fixpoint):
            return self.approximants(f, env)[-1]
        raise TypeError(f"not a formula: {f!r}")

    def gamma(self, var: str, body: Formula, a: int, env: Mapping[str, int] | None = None) -> int:
        """The operator ``A |-> value of body with var := A``."""
        env = self.assignment if env is None else env
        return self._eval(body, {**env, var: a})

    def approximants(self, fp: Fixpoint, env: Mapping[str, int] | None = None) -> list[int]:
        """Approximant chain from the empty set (mu) or all worlds (nu).

        The chain ends at the first stage ``A_k`` with ``Gamma(A_k) = A_k``;
        that repeated stage is not listed twice.
        """
        env = self.assignment if env is None else env
        a = 0 if isinstance(fp, Mu) else self._full
        chain = [a]
        while True:
            nxt = self.gamma(fp.var, fp.body, a, env)
            if nxt == a:
                return chain
            chain.append(nxt)
            a = nxt
            if len(chain) > self.model.n + 2:
                raise EvaluationError(f"approximants of {fp} did not stabilise")


def evaluate(model: KripkeModel, assignment: Assignment | None, f: Formula) -> WorldSet:
    return Evaluator(model, assignment).value(f)


def holds(model: KripkeModel, world: str | int, f: Formula, assignment: Assignment | None = None) -> bool:
    i = model.index[world] if isinstance(world, str) else world
    return i in evaluate(model, assignment, f)


def iterate_approximants(
    model: KripkeModel, assignment: Assignment | None, kind: str, var: str, body: Formula
) -> list[WorldSet]:
    from .formula import binder

    fp = binder(kind, var, body)
    ev = Evaluator(model, assignment)
    return [WorldSet(a, model.n) for a in ev.approximants(fp)]


def fixed_points(
    model: KripkeModel, assignment: Assignment | None, var: str, body: Formula
) -> list[WorldSet]:
    """All sets ``A`` with ``Gamma(A) = A``, by enumerating every subset of worlds."""
    ev = Evaluator(model, assignment)
    return [
        WorldSet(a, model.n) for a in range(1 << model.n) if ev.gamma(var, body, a) == a
    ]


def check_monotone(
    model: KripkeModel,
    assignment: Assignment | None,
    var: str,
    body: Formula,
    trials: int | None = None,
    seed: int = 0,
) -> bool:
    """Check that Gamma is monotone (X positive) and/or antitone (X negative).

    Pairs ``A <= B`` are enumerated exhaustively when ``trials`` is None,
    otherwise ``trials`` random pairs are drawn.
    """
    pol = polarity(body, var)
    ev = Evaluator(model, assignment)
    n = model.n
    if trials is None:
        pairs = _subset_pairs(n)
    else:
        rng = random.Random(seed)
        pairs = []
        for _ in range(trials):
            b = rng.getrandbits(n) if n else 0
            pairs.append((b & (rng.getrandbits(n) if n else 0), b))
    for a, b in pairs:
        ga, gb = ev.gamma(var, body, a), ev.gamma(var, body, b)
        if pol & Polarity.POSITIVE and ga & ~gb:
            return False
        if pol & Polarity.NEGATIVE and gb & ~ga:
            return False
    return True


def _subset_pairs(n: int):
    """All pairs ``(A, B)`` of masks over ``n`` worlds with ``A <= B``."""
    for choice in itertools.product(range(3), repeat=n):
        a = b = 0
        for i, c in enumerate(choice):
            if c >= 1:
                b |= 1 << i
            if c == 2:
                a |= 1 << i
        yield a, b


def upsets(model: KripkeModel) -> list[int]:
    """All ``pre``-upward-closed sets of worlds containing the fallible worlds."""
    return [
        s
        for s in range(1 << model.n)
        if s & model.fallible == model.fallible
        and all(not (model.pre[i] & ~s) for i in bits(s))
    ]
