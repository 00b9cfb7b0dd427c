"""Formula and model corpora, and the property suites run over them.

Formula corpus grammar
----------------------
The *depth* of a formula is the nesting depth of ``[]``, ``<>``, ``mu`` and
``nu``; Boolean connectives do not count.  Random formulas are drawn from::

    phi ::= P | top | bot | X     (X bound, unused, guarded, even swap parity)
          | ~phi | phi /\\ phi | phi \\/ phi | phi -> phi     (at most b nested)
          | [] phi | <> phi | mu X. phi | nu X. phi          (at most d nested)

Binders get fresh names, so every sampled formula is closed and well-named
by construction: a bound variable is offered as a leaf at most once, only
under a modality inside its binder, and only where it would occur
positively.  The fixed corpus is a hand-picked list covering negation,
implication, both modalities and alternating fixed points, followed by a
seeded sample from the grammar.
"""
from __future__ import annotations

import itertools
import random
import time
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .collapse import check_axioms, check_collapse_semantics, check_heredity, collapse
from .formula import (
    BOT,
    TOP,
    And,
    Box,
    Dia,
    Fixpoint,
    Formula,
    Imp,
    Mu,
    Neg,
    Nu,
    Or,
    Prop,
    Var,
    is_closed,
    polarity,
    walk,
)
from .game import build_arena_multi
from .kripke import (
    KripkeModel,
    backward_confluence_failures,
    enumerate_models,
    forward_confluence_failures,
    gen_ck,
    gen_is5,
    is_equivalence,
    is_transitive,
    validate_ck,
    validate_is5,
)
from .semantics import Evaluator
from .solver import Strategy, disjoint_union, solve, verify_strategy
from .syntax import parse, to_text

CURATED = [
    "P",
    "top",
    "bot",
    "~P",
    "~~P",
    "P \\/ ~P",
    "P -> P",
    "~P -> bot",
    "[] P",
    "<> P",
    "~<> ~P",
    "[] P -> <> P",
    "<> P -> [] P",
    "<> (P \\/ ~P)",
    "(<> P -> [] bot) -> [] (P -> bot)",
    "[] <> P",
    "<> [] P",
    "~<> bot",
    "nu X. P",
    "mu X. ~P",
    "~mu X. ~P",
    "nu X. [] X",
    "mu X. <> X",
    "mu X. [] X",
    "nu X. <> X",
    "mu X. P \\/ <> X",
    "nu X. P /\\ [] X",
    "mu X. P \\/ [] X",
    "nu X. P /\\ <> X",
    "mu X. ~~<> X",
    "nu X. ~[] X -> P",
    "mu X. (<> X -> P) -> P",
    "mu X. ~[] ~X",
    "nu X. <> ~~X",
    "(mu X. <> X) -> bot",
    "~nu X. <> X",
    "[] mu X. P \\/ <> X",
    "nu X. mu Y. [] (P /\\ X \\/ Y)",
    "mu X. nu Y. <> (P /\\ Y \\/ X)",
    "nu X. mu Y. <> (P /\\ X) \\/ [] Y",
    "(nu X. [] X) /\\ (mu Y. <> Y)",
]


def modal_depth(f: Formula) -> int:
    """Nesting depth of modalities and binders."""
    inc = 1 if isinstance(f, (Box, Dia, Fixpoint)) else 0
    return inc + max((modal_depth(c) for c in f.children()), default=0)


_NAMES = ["X", "Y", "Z", "U", "V", "W"]


def _fresh(i: int) -> str:
    return _NAMES[i] if i < len(_NAMES) else f"X{i}"


def random_formula(
    rng: random.Random,
    depth: int = 3,
    props: Sequence[str] = ("P",),
    bool_depth: int = 3,
    free: tuple[str, int] | None = None,
) -> Formula:
    """Draw a formula from the corpus grammar.

    ``free = (name, parity)`` additionally allows the free variable ``name``
    (any number of times) wherever its swap parity equals ``parity``; 0 makes
    it positive, 1 negative.
    """
    counter = itertools.count()
    used: set[str] = set()

    def leaf(scope, parity) -> Formula:
        avail = [x for x, p, g in scope if g and x not in used and p == parity]
        if free and free[1] == parity:
            avail.append(free[0])
        if avail and rng.random() < 0.6:
            x = rng.choice(avail)
            if not free or x != free[0]:
                used.add(x)
            return Var(x)
        r = rng.random()
        if r < 0.7:
            return Prop(rng.choice(list(props)))
        return TOP if r < 0.85 else BOT

    def gen(d, b, scope, parity) -> Formula:
        ops = []
        if b > 0:
            ops += ["neg", "and", "or", "imp"]
        if d > 0:
            ops += ["box", "dia", "mu", "nu"]
        if not ops or rng.random() < 0.25:
            return leaf(scope, parity)
        op = rng.choice(ops)
        if op == "neg":
            return Neg(gen(d, b - 1, scope, 1 - parity))
        if op in ("and", "or"):
            cls = And if op == "and" else Or
            return cls(gen(d, b - 1, scope, parity), gen(d, b - 1, scope, parity))
        if op == "imp":
            return Imp(gen(d, b - 1, scope, 1 - parity), gen(d, b - 1, scope, parity))
        if op in ("box", "dia"):
            inner = [(x, p, True) for x, p, _ in scope]
            return (Box if op == "box" else Dia)(gen(d - 1, b, inner, parity))
        x = _fresh(next(counter))
        if free and x == free[0]:
            x = _fresh(next(counter))
        body = gen(d - 1, b, scope + [(x, parity, False)], parity)
        return (Mu if op == "mu" else Nu)(x, body)

    return gen(depth, bool_depth, [], 0)


def formula_corpus(
    depth: int = 3, sample: int = 16, seed: int = 0, bool_depth: int = 2
) -> list[Formula]:
    """The curated formulas of depth at most ``depth`` plus ``sample`` drawn ones.

    Drawn formulas contain at least one fixed point whose variable occurs.
    """
    out = [f for f in map(parse, CURATED) if modal_depth(f) <= depth]
    seen = set(out)
    rng = random.Random(f"corpus:{seed}")
    drawn = 0
    while drawn < sample:
        f = random_formula(rng, depth, bool_depth=bool_depth)
        if f in seen or not any(isinstance(g, Var) for g in walk(f)):
            continue
        seen.add(f)
        out.append(f)
        drawn += 1
    return out


def modal_corpus(depth: int = 3, sample: int = 20, seed: int = 0) -> list[Formula]:
    """Fixed-point-free formulas of depth at most ``depth``."""
    out = [f for f in map(parse, CURATED) if modal_depth(f) <= depth and _modal(f)]
    seen = set(out)
    rng = random.Random(f"modal:{seed}")
    drawn = 0
    while drawn < sample:
        f = random_formula(rng, depth)
        f = _strip_binders(f)
        if f in seen or not is_closed(f):
            continue
        seen.add(f)
        out.append(f)
        drawn += 1
    return out


def _modal(f: Formula) -> bool:
    return not any(isinstance(g, Fixpoint) for g in walk(f))


def _strip_binders(f: Formula) -> Formula:
    """Replace each fixed point by its body with the variable read as ``P``."""
    from .formula import rebuild, substitute

    if isinstance(f, Fixpoint):
        return _strip_binders(substitute(f.body, f.var, Prop("P")))
    kids = f.children()
    return rebuild(f, [_strip_binders(c) for c in kids]) if kids else f


def open_corpus(depth: int = 3, sample: int = 30, seed: int = 0, var: str = "X"):
    """Pairs ``(body, sign)`` with ``var`` free and occurring only with the given sign.

    ``sign`` is ``+1`` for positive and ``-1`` for negative bodies.  The curated
    binder bodies come first, then seeded samples alternating sign.
    """
    out = []
    seen = set()
    for f in map(parse, CURATED):
        for g in walk(f):
            if isinstance(g, Fixpoint) and g.body.free_vars == {g.var} and modal_depth(g.body) <= depth:
                body = _rename_free(g.body, g.var, var)
                if body not in seen:
                    seen.add(body)
                    out.append((body, 1))
    rng = random.Random(f"open:{seed}")
    drawn = 0
    while drawn < sample:
        sign = 1 if drawn % 2 == 0 else -1
        f = random_formula(rng, depth, free=(var, 0 if sign > 0 else 1))
        pol = polarity(f, var)
        if var not in f.free_vars or f.free_vars != {var} or f in seen:
            continue
        if (sign > 0 and not pol.is_positive) or (sign < 0 and not pol.is_negative):
            continue
        seen.add(f)
        out.append((f, sign))
        drawn += 1
    return out


def _rename_free(f: Formula, old: str, new: str) -> Formula:
    from .formula import substitute

    return f if old == new else substitute(f, old, Var(new))


# Model corpora.

def ck_models(max_worlds: int = 3, props: int = 1) -> Iterator[tuple[str, KripkeModel]]:
    """Every CK-model up to isomorphism, with and without fallible worlds."""
    for i, m in enumerate(enumerate_models(max_worlds, props=props, up_to_iso=True)):
        yield f"ck-enum:{max_worlds}:{i}", m


def is5_models(
    count: int = 200, max_worlds: int = 5, props: int = 1, seed: int = 0, enum_worlds: int = 3
) -> list[tuple[str, KripkeModel]]:
    """Generated IS5 models plus every IS5 model up to ``enum_worlds`` worlds."""
    out = [(f"is5:{seed + s}", gen_is5(seed + s, max_worlds, props)) for s in range(count)]
    if enum_worlds:
        out += [
            (f"is5-enum:{i}", m)
            for i, m in enumerate(
                enumerate_models(enum_worlds, props=props, is5_only=True, up_to_iso=True)
            )
        ]
    return out


# Suites.  Each returns a SuiteReport; ``failures`` holds JSON-ready records.

@dataclass
class SuiteReport:
    suite: str
    cases: int = 0
    failures: list = field(default_factory=list)
    stats: dict = field(default_factory=dict)
    seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {
            "suite": self.suite,
            "status": "pass" if self.ok else "fail",
            "cases": self.cases,
            "failures": self.failures,
            "stats": self.stats,
        }

    def to_text(self) -> str:
        lines = [f"suite {self.suite}: {self.cases} cases, {len(self.failures)} failures"]
        for k, v in self.stats.items():
            lines.append(f"  {k}: {v}")
        for f in self.failures[:20]:
            lines.append(f"  FAIL {f}")
        return "\n".join(lines)


def thm32_cases(model: KripkeModel, formulas: Sequence[Formula]):
    """Game/Kripke agreement, determinacy and strategy checks for one model.

    Each arena is solved on its own; the extracted strategies are then
    verified on the disjoint union of all arenas for the model, and on
    failure each arena is re-checked alone to name the culprit.  Yields
    failure records.
    """
    arenas = [build_arena_multi(model, None, f, check_model=False) for f in formulas]
    results = [solve(a) for a in arenas]
    ev = Evaluator(model)
    for f, a, res in zip(formulas, arenas, results):
        truth = ev.mask(f)
        for r in a.roots:
            w = a.positions[r].world
            i_wins, ii_wins = r in res.region[0], r in res.region[1]
            if i_wins == ii_wins:
                yield {"kind": "determinacy", "formula": to_text(f), "world": model.worlds[w]}
            if i_wins != bool(truth >> w & 1):
                yield {
                    "kind": "mismatch",
                    "formula": to_text(f),
                    "world": model.worlds[w],
                    "kripke": bool(truth >> w & 1),
                    "winner": "I" if i_wins else "II",
                }
    graph, offsets = disjoint_union(arenas)
    for p in (0, 1):
        choice, region = {}, []
        for res, k in zip(results, offsets):
            choice.update((k + v, k + u) for v, u in res.strategy[p].choice.items())
            region.extend(k + v for v in sorted(res.region[p]))
        if verify_strategy(graph, Strategy(p, choice), region):
            continue
        for f, a, res in zip(formulas, arenas, results):
            if not verify_strategy(a, res.strategy[p], sorted(res.region[p])):
                yield {"kind": "strategy", "player": "I" if p == 0 else "II", "formula": to_text(f)}


def run_thm32(
    max_worlds: int = 3,
    depth: int = 3,
    sample: int = 16,
    random_cases: int = 1000,
    random_worlds: int = 6,
    random_depth: int = 4,
    seed: int = 0,
) -> SuiteReport:
    t0 = time.perf_counter()
    rep = SuiteReport("thm32")
    formulas = formula_corpus(depth, sample, seed)
    models = 0
    for mid, m in ck_models(max_worlds, 1):
        models += 1
        rep.cases += len(formulas)
        for fail in thm32_cases(m, formulas):
            rep.failures.append({"model-id": mid, **fail})
    rng = random.Random(f"thm32:{seed}")
    for i in range(random_cases):
        m = gen_ck(seed + i, random_worlds, 1)
        f = random_formula(rng, random_depth)
        rep.cases += 1
        for fail in thm32_cases(m, [f]):
            rep.failures.append({"model-id": f"ck:{seed + i}", **fail})
    rep.stats = {
        "exhaustive models": models,
        "corpus formulas": len(formulas),
        "random cases": random_cases,
    }
    rep.seconds = time.perf_counter() - t0
    return rep


def run_fixpoints(max_worlds: int = 3, depth: int = 3, sample: int = 30, seed: int = 0) -> SuiteReport:
    """Monotonicity of Gamma and convergence/extremality of approximant chains."""
    t0 = time.perf_counter()
    rep = SuiteReport("fixpoints")
    bodies = open_corpus(depth, sample, seed)
    n_models = 0
    for mid, m in ck_models(max_worlds, 1):
        n_models += 1
        ev = Evaluator(m)
        n = m.n
        for body, sign in bodies:
            rep.cases += 1
            gam = [ev.gamma("X", body, a) for a in range(1 << n)]
            for a in range(1 << n):
                # every superset b of a
                rest = ~a & m.full
                sub = rest
                while True:
                    b = a | sub
                    ga, gb = gam[a], gam[b]
                    bad = ga & ~gb if sign > 0 else gb & ~ga
                    if bad:
                        rep.failures.append({
                            "model-id": mid, "kind": "monotone", "body": to_text(body),
                            "A": a, "B": b,
                        })
                        break
                    if sub == 0:
                        break
                    sub = (sub - 1) & rest
            if sign < 0:
                continue
            fps = [a for a in range(1 << n) if gam[a] == a]
            for cls in (Mu, Nu):
                fp = cls("X", body)
                chain = ev.approximants(fp)
                limit = chain[-1]
                if len(chain) - 1 > n + 1 or gam[limit] != limit:
                    rep.failures.append({"model-id": mid, "kind": "converge", "formula": to_text(fp)})
                extreme = all(limit & ~b == 0 for b in fps) if cls is Mu else all(b & ~limit == 0 for b in fps)
                if not extreme:
                    rep.failures.append({"model-id": mid, "kind": "extremal", "formula": to_text(fp)})
    rep.stats = {"models": n_models, "bodies": len(bodies)}
    rep.seconds = time.perf_counter() - t0
    return rep


# The fallible two-world model used to show that the collapse needs IS5.
CK_COUNTERMODEL = KripkeModel.build(
    ["a", "b"], ["b"], [("a", "a"), ("b", "b")], [("a", "b"), ("b", "b")], {"P": ["b"]}
)
CK_COUNTER_FORMULA = "mu X. <> X"

# A fallible-free chain on which the mu-collapse also fails.
CK_CHAIN_MODEL = KripkeModel.build(
    ["a", "b", "c"],
    [],
    [("a", "a"), ("b", "b"), ("c", "c")],
    [("a", "b"), ("b", "c")],
    {"P": ["c"]},
)
CK_CHAIN_FORMULA = "mu X. P \\/ <> X"


def collapse_counterexample(model: KripkeModel, text: str) -> dict:
    phi = parse(text)
    out = collapse(phi).output
    ev = Evaluator(model)
    a, b = ev.mask(phi), ev.mask(out)
    return {
        "formula": text,
        "collapsed": to_text(out),
        "value": model.world_set(a).names(model),
        "collapsed_value": model.world_set(b).names(model),
        "disagree": a != b,
    }


def run_collapse(count: int = 200, max_worlds: int = 5, depth: int = 3, sample: int = 16, seed: int = 0) -> SuiteReport:
    t0 = time.perf_counter()
    rep = SuiteReport("collapse")
    formulas = formula_corpus(depth, sample, seed)
    traces = [collapse(f) for f in formulas]
    models = is5_models(count, max_worlds, 1, seed)
    for mid, m in models:
        for f, tr in zip(formulas, traces):
            rep.cases += 1
            res = check_collapse_semantics(m, f, mid, tr)
            if not res.ok:
                rep.failures.append(res.to_json())
    rep.stats = {
        "models": len(models),
        "formulas": len(formulas),
        "ck counterexample": collapse_counterexample(CK_COUNTERMODEL, CK_COUNTER_FORMULA),
        "ck chain counterexample": collapse_counterexample(CK_CHAIN_MODEL, CK_CHAIN_FORMULA),
    }
    rep.seconds = time.perf_counter() - t0
    return rep


def heredity_violation(max_worlds: int = 3, formulas: Iterable[str] = ("P",)) -> dict | None:
    """First validated non-IS5 CK-model (in enumeration order) violating heredity."""
    fs = [parse(t) for t in formulas]
    for i, m in enumerate(enumerate_models(max_worlds, props=1, up_to_iso=True)):
        if not validate_is5(m):
            continue
        for f in fs:
            res = check_heredity(m, f, f"ck-enum:{max_worlds}:{i}")
            if not res.ok:
                return {"model": m.to_dict(), **res.to_json()}
    return None


def run_heredity(count: int = 200, max_worlds: int = 5, depth: int = 3, sample: int = 20, seed: int = 0) -> SuiteReport:
    t0 = time.perf_counter()
    rep = SuiteReport("heredity")
    formulas = modal_corpus(depth, sample, seed)
    models = is5_models(count, max_worlds, 1, seed)
    for mid, m in models:
        for f in formulas:
            rep.cases += 1
            res = check_heredity(m, f, mid)
            if not res.ok:
                rep.failures.append(res.to_json())
    rep.stats = {"models": len(models), "formulas": len(formulas), "ck violation": heredity_violation()}
    rep.seconds = time.perf_counter() - t0
    return rep


def find_countermodel(formula: str, max_worlds: int = 3, props: int = 2):
    """First CK-model (enumeration order) with a world refuting ``formula``."""
    f = parse(formula)
    for i, m in enumerate(enumerate_models(max_worlds, props=props)):
        v = Evaluator(m).mask(f)
        if v != m.full:
            w = next(j for j in range(m.n) if not v >> j & 1)
            return {"model-id": f"ck-enum:{max_worlds}:{i}", "world": m.worlds[w], "model": m.to_dict()}
    return None


def find_separation(left: str, right: str, max_worlds: int = 3, props: int = 1):
    """First CK-model (enumeration order) where the two formulas differ."""
    a, b = parse(left), parse(right)
    for i, m in enumerate(enumerate_models(max_worlds, props=props)):
        ev = Evaluator(m)
        x, y = ev.mask(a), ev.mask(b)
        if x != y:
            w = next(j for j in range(m.n) if (x ^ y) >> j & 1)
            return {
                "model-id": f"ck-enum:{max_worlds}:{i}",
                "world": m.worlds[w],
                left: bool(x >> w & 1),
                right: bool(y >> w & 1),
                "model": m.to_dict(),
            }
    return None


def run_axioms(
    ck_count: int = 200, is5_count: int = 200, max_worlds: int = 4, depth: int = 1, seed: int = 0
) -> SuiteReport:
    t0 = time.perf_counter()
    rep = SuiteReport("axioms")
    ck_names = ["K[]", "K<>", "nuFP", "muFP", "nuInd", "muInd", "Nec", "MP"]
    is5_names = ["FS", "DP", "N", "T", "4", "5"]
    models = [(f"ck-enum:2:{i}", m) for i, m in enumerate(enumerate_models(2, props=2, up_to_iso=True))]
    models += [(f"ck:{seed + s}", gen_ck(seed + s, max_worlds, 2)) for s in range(ck_count)]
    is5 = is5_models(is5_count, max_worlds + 1, 2, seed, enum_worlds=2)
    for mid, m in models + is5:
        for res in check_axioms(m, ck_names, depth, mid):
            rep.cases += 1
            if not res.ok:
                rep.failures.append(res.to_json())
    for mid, m in is5:
        for res in check_axioms(m, is5_names, depth, mid):
            rep.cases += 1
            if not res.ok:
                rep.failures.append(res.to_json())
    rep.stats = {
        "ck models": len(models) + len(is5),
        "is5 models": len(is5),
        "DP countermodel": find_countermodel("<> (P \\/ Q) -> <> P \\/ <> Q"),
    }
    rep.seconds = time.perf_counter() - t0
    return rep


def run_frames(max_worlds: int = 3, count: int = 200, gen_worlds: int = 5, seed: int = 0) -> SuiteReport:
    """Transitivity of ``pre;R`` on IS5 models; forward iff backward confluence
    when R is an equivalence and there are no fallible worlds."""
    t0 = time.perf_counter()
    rep = SuiteReport("frames")
    trans = conf = 0
    for i, m in enumerate(enumerate_models(max_worlds, props=0, fallible=False)):
        mid = f"frame-enum:{max_worlds}:{i}"
        if validate_ck(m) or not is_equivalence(m.modal):
            continue
        conf += 1
        fwd = not forward_confluence_failures(m)
        bwd = not backward_confluence_failures(m)
        if fwd != bwd:
            rep.failures.append({"model-id": mid, "kind": "confluence", "forward": fwd, "backward": bwd})
        if not validate_is5(m):
            trans += 1
            if not is_transitive(m.pre_modal):
                rep.failures.append({"model-id": mid, "kind": "transitivity"})
    for s in range(count):
        m = gen_is5(seed + s, gen_worlds, 0)
        trans += 1
        conf += 1
        if not is_transitive(m.pre_modal):
            rep.failures.append({"model-id": f"is5:{seed + s}", "kind": "transitivity"})
        if forward_confluence_failures(m) or backward_confluence_failures(m):
            rep.failures.append({"model-id": f"is5:{seed + s}", "kind": "confluence"})
    rep.cases = trans + conf
    rep.stats = {"transitivity checks": trans, "confluence checks": conf}
    rep.seconds = time.perf_counter() - t0
    return rep


SEPARATIONS = [("~<> ~P", "[] P"), ("P", "~~P")]
EQUIVALENCES = [("nu X. P", "P"), ("~mu X. ~P", "~~P")]


def run_separations(max_worlds: int = 3, seed: int = 0) -> SuiteReport:
    """Non-equivalences found by search; equivalences checked on every model."""
    t0 = time.perf_counter()
    rep = SuiteReport("separations")
    found = {}
    for left, right in SEPARATIONS:
        rep.cases += 1
        sep = find_separation(left, right, max_worlds)
        found[f"{left} vs {right}"] = sep
        if sep is None:
            rep.failures.append({"kind": "no separation", "left": left, "right": right})
    pairs = [(parse(a), parse(b)) for a, b in EQUIVALENCES]
    for mid, m in ck_models(max_worlds, 1):
        ev = Evaluator(m)
        for (a, b), (ta, tb) in zip(pairs, EQUIVALENCES):
            rep.cases += 1
            if ev.mask(a) != ev.mask(b):
                rep.failures.append({"model-id": mid, "kind": "equivalence", "left": ta, "right": tb})
    rep.stats = {"separations": found}
    rep.seconds = time.perf_counter() - t0
    return rep


SUITES = {
    "thm32": run_thm32,
    "fixpoints": run_fixpoints,
    "collapse": run_collapse,
    "heredity": run_heredity,
    "axioms": run_axioms,
    "frames": run_frames,
    "separations": run_separations,
}
