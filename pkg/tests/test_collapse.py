import dataclasses
import itertools

import pytest
from hypothesis import given

from cmucalc.collapse import (
    AXIOMS,
    AxiomCatalog,
    CollapseError,
    check_axioms,
    check_collapse_semantics,
    check_heredity,
    check_two_step,
    collapse,
    body_grammar,
    instantiation_grammar,
)
from cmucalc.corpus import (
    CK_CHAIN_FORMULA,
    CK_CHAIN_MODEL,
    CK_COUNTER_FORMULA,
    CK_COUNTERMODEL,
    collapse_counterexample,
    find_countermodel,
    heredity_violation,
    modal_corpus,
)
from cmucalc.formula import Fixpoint, FormulaError, Var, polarity, walk
from cmucalc.kripke import KripkeModel, enumerate_models, gen_ck, gen_is5, validate_is5
from cmucalc.semantics import Evaluator
from cmucalc.syntax import parse, to_text

from strategies import corpus_formulas, is5_models, open_formula


@pytest.mark.parametrize(
    "text, expected",
    [
        ("nu X. P", "P"),
        ("mu X. P \\/ <> X", "P \\/ <> (P \\/ <> bot)"),
        ("nu X. [] (P /\\ X)", "[] (P /\\ [] (P /\\ top))"),
        ("[] P -> <> P", "[] P -> <> P"),
    ],
)
def test_collapse_examples(text, expected):
    assert to_text(collapse(parse(text)).output) == expected


def test_collapse_is_innermost_first():
    tr = collapse(parse("nu X. [] (X /\\ mu Y. <> (P \\/ Y))"))
    assert [s.binder.var for s in tr.steps] == ["Y", "X"]
    for s in tr.steps:
        assert not any(isinstance(g, Fixpoint) for g in walk(s.binder.body))
    assert tr.to_text().splitlines()[0] == "input: nu X. [] (X /\\ mu Y. <> (P \\/ Y))"
    assert tr.to_text().splitlines()[1].startswith("step 1: mu Y. <> (P \\/ Y)  ~>  ")
    assert tr.to_json()["steps"][0]["substitution"].startswith("mu Y.psi |-> psi(psi(bot))")


@given(corpus_formulas)
def test_collapse_output_modal_and_closed(f):
    out = collapse(f).output
    assert not out.free_vars
    assert not any(isinstance(g, Fixpoint) for g in walk(out))


def test_collapse_rejects_bad_input():
    with pytest.raises(CollapseError):
        collapse(Var("X"))
    with pytest.raises(CollapseError):
        collapse(parse("(mu X. <> X) \\/ nu X. [] X"))
    with pytest.raises(CollapseError):
        collapse(parse("nu X. [] ([] X /\\ <> P) /\\ <> P"), limit=10)


def test_collapse_size_grows_within_bound():
    # One occurrence of X: psi(psi(c)) has at most twice the body's size.
    f = parse("nu X. [] (P /\\ X)")
    assert collapse(f).output.size <= 2 * f.body.size


@given(is5_models, corpus_formulas)
def test_collapse_preserves_meaning_on_is5(m, f):
    res = check_collapse_semantics(m, f)
    assert res.ok, res.to_json()


def test_collapse_semantics_reports_failure_off_is5():
    res = check_collapse_semantics(CK_CHAIN_MODEL, parse(CK_CHAIN_FORMULA), "chain")
    assert not res.ok
    assert res.to_json()["status"] == "fail"
    assert {"output", "value", "collapsed"} <= set(res.witness[0])


def test_chain_counterexample_disagrees():
    out = collapse_counterexample(CK_CHAIN_MODEL, CK_CHAIN_FORMULA)
    assert out["disagree"]
    assert out["value"] == ["a", "b", "c"] and out["collapsed_value"] == ["b", "c"]


def test_fallible_counterexample_values():
    # Fallible worlds satisfy every formula here, so both sides are {a, b}.
    out = collapse_counterexample(CK_COUNTERMODEL, CK_COUNTER_FORMULA)
    assert out["collapsed"] == "<> <> bot"
    assert out["value"] == ["a", "b"] and out["collapsed_value"] == ["a", "b"]


BODIES = [open_formula(t) for t in ["P \\/ <> X", "[] (P /\\ X)", "<> X", "<> (P -> X)", "~~[] X", "Q /\\ <> X \\/ [] P"]]


@pytest.mark.parametrize("body", BODIES, ids=to_text)
@pytest.mark.parametrize("kind", ["mu", "nu"])
def test_two_steps_reach_fixpoint_on_is5(body, kind):
    for s in range(60):
        m = gen_is5(s, 5, 2)
        assert check_two_step(m, kind, "X", body)


def test_two_steps_not_enough_off_is5():
    assert not check_two_step(CK_CHAIN_MODEL, "mu", "X", open_formula("P \\/ <> X"))


def test_heredity_single_world():
    m = KripkeModel.build(["w"], [], [("w", "w")], [("w", "w")], {"P": []})
    assert check_heredity(m, parse("P")).ok


@given(is5_models)
def test_heredity_on_is5(m):
    for f in modal_corpus(3, 10):
        assert check_heredity(m, f).ok


def test_heredity_violation_found_off_is5():
    found = heredity_violation(3)
    assert found is not None and found["status"] == "fail"
    m = KripkeModel.from_dict(found["model"])
    assert validate_is5(m) and m.n <= 3


def test_grammar_sizes():
    assert len(instantiation_grammar(1)) == 64
    assert len(body_grammar(1)) == 25
    assert instantiation_grammar(0) == [parse("P"), parse("Q"), parse("bot"), parse("top")]
    assert all(polarity(b, "X").is_positive and "X" in b.free_vars for b in body_grammar(2))


def test_catalog():
    assert set(AXIOMS) == {"K[]", "K<>", "nuFP", "muFP", "nuInd", "muInd", "Nec", "MP", "FS", "DP", "N", "T", "4", "5"}
    with pytest.raises(KeyError):
        AxiomCatalog(["nope"])
    with pytest.raises(FormulaError):
        AxiomCatalog.instantiate(AXIOMS["nuFP"], body=open_formula("X -> P"))
    prem, concl = AxiomCatalog.instantiate(AXIOMS["nuInd"], parse("P"), None, open_formula("[] X"))
    assert [to_text(p) for p in prem] == ["P -> [] P"] and to_text(concl) == "P -> nu X. [] X"


CK_NAMES = ["K[]", "K<>", "nuFP", "muFP", "nuInd", "muInd", "Nec", "MP"]
IS5_NAMES = ["FS", "DP", "N", "T", "4", "5"]


@pytest.mark.parametrize("seed", range(25))
def test_ck_axioms_hold(seed):
    for r in check_axioms(gen_ck(seed, 4, 2), CK_NAMES):
        assert r.ok, r.to_json()


@pytest.mark.parametrize("seed", range(25))
def test_is5_axioms_hold(seed):
    for r in check_axioms(gen_is5(seed, 5, 2), IS5_NAMES + CK_NAMES):
        assert r.ok, r.to_json()


def test_is5_schemas_skipped_off_is5():
    m = KripkeModel.build(["a"], [], [("a", "a")], [], {"P": [], "Q": []})
    assert {r.status for r in check_axioms(m, IS5_NAMES)} == {"skip"}


def test_dp_countermodel_within_three_worlds():
    found = find_countermodel("<> (P \\/ Q) -> <> P \\/ <> Q", 3, 2)
    assert found is not None
    m = KripkeModel.from_dict(found["model"])
    assert m.n <= 3
    # DP is an IS5 schema, so the countermodel is not IS5 and the check skips it.
    assert validate_is5(m)
    (dp,) = check_axioms(m, ["DP"])
    assert dp.status == "skip"
    assert not explicit_axiom_check(m, "DP")


def explicit_axiom_check(m, name, depth=1):
    """Instantiate the schema syntactically at every grammar term and evaluate."""
    schema = AXIOMS[name]
    terms = instantiation_grammar(depth)
    ev = Evaluator(m)
    bodies = body_grammar(depth) if schema.uses_body else [None]
    for body in bodies:
        for combo in itertools.product(terms, repeat=len(schema.metavars)):
            args = dict(zip(schema.metavars, combo))
            prem, concl = AxiomCatalog.instantiate(schema, args.get("A"), args.get("B"), body)
            if all(ev.mask(p) == m.full for p in prem) and ev.mask(concl) != m.full:
                return False
    return True


def test_value_instantiation_matches_explicit_instances(monkeypatch):
    # Treat the IS5 schemas as CK schemas so that failing instances occur too.
    for name in IS5_NAMES:
        monkeypatch.setitem(AXIOMS, name, dataclasses.replace(AXIOMS[name], model_class="CK"))
    models = [gen_ck(s, 3, 2) for s in range(12)]
    models += list(itertools.islice(enumerate_models(2, props=2, up_to_iso=True), 0, None, 40))
    failures = 0
    for m in models:
        for name in ["K[]", "nuInd", "muInd", "Nec", "MP", "DP", "FS", "T", "5"]:
            explicit = explicit_axiom_check(m, name)
            (r,) = check_axioms(m, [name])
            assert r.ok == explicit, (name, m.to_dict())
            failures += not explicit
    assert failures > 0


def test_two_steps_fail_under_antecedents_on_is5():
    # A five-world IS5 model where the least fixed point needs three steps.
    m = gen_is5(68, 5, 1)
    assert validate_is5(m) == [] and not m.fallible
    body = open_formula("(<> X -> P) -> P")
    ev = Evaluator(m)
    chain = [0]
    while len(chain) < 2 or chain[-1] != chain[-2]:
        chain.append(ev.mask(body, {"X": chain[-1]}))
    assert len(chain) == 5 and chain[2] != chain[3] == m.full
    assert not check_two_step(m, "mu", "X", body)
    res = check_collapse_semantics(m, parse("mu X. (<> X -> P) -> P"), "is5:68")
    assert not res.ok
    assert res.witness[0]["value"] == ["w0", "w1", "w2", "w3", "w4"]
    assert res.witness[0]["collapsed"] == ["w0", "w1", "w2", "w4"]
