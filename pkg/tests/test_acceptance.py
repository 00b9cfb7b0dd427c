"""Acceptance runs: one test per criterion, each printing a PASS/FAIL line.

The suites run at their default bounds, so this module takes several
minutes.  Criterion 5 has two parts that do not hold (see the README); they
are strict xfails so that an unexpected pass is reported.
"""
import pytest

from cmucalc.corpus import (
    CK_CHAIN_FORMULA,
    CK_CHAIN_MODEL,
    CK_COUNTER_FORMULA,
    CK_COUNTERMODEL,
    collapse_counterexample,
    run_axioms,
    run_collapse,
    run_fixpoints,
    run_frames,
    run_heredity,
    run_separations,
    run_thm32,
)


def report(capsys, n, ok, detail):
    with capsys.disabled():
        print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'} ({detail})")


def kinds(rep, *names):
    return [f for f in rep.failures if f.get("kind") in names]


@pytest.fixture(scope="module")
def thm32():
    return run_thm32()


@pytest.fixture(scope="module")
def fixpoints():
    return run_fixpoints()


@pytest.fixture(scope="module")
def collapse_run():
    return run_collapse()


def test_criterion_1_game_matches_kripke(thm32, capsys):
    bad = kinds(thm32, "mismatch")
    report(capsys, 1, not bad, f"{thm32.cases} cases, {len(bad)} mismatches, {thm32.seconds:.0f}s")
    assert not bad, bad[:5]


def test_criterion_2_determinacy_and_strategies(thm32, capsys):
    bad = kinds(thm32, "determinacy", "strategy")
    report(capsys, 2, not bad, f"{thm32.cases} model/formula arenas, {len(bad)} failures")
    assert not bad, bad[:5]


def test_criterion_3_monotonicity(fixpoints, capsys):
    bad = kinds(fixpoints, "monotone")
    report(capsys, 3, not bad, f"{fixpoints.cases} body/model pairs, {len(bad)} failures")
    assert not bad, bad[:5]


def test_criterion_4_approximants(fixpoints, capsys):
    bad = kinds(fixpoints, "converge", "extremal")
    report(capsys, 4, not bad, f"{fixpoints.cases} body/model pairs, {len(bad)} failures")
    assert not bad, bad[:5]


def test_criterion_5_report(collapse_run, capsys):
    ck = collapse_counterexample(CK_COUNTERMODEL, CK_COUNTER_FORMULA)
    chain = collapse_counterexample(CK_CHAIN_MODEL, CK_CHAIN_FORMULA)
    ok = collapse_run.ok and ck["disagree"]
    detail = (
        f"{collapse_run.stats['models']} IS5 models x {collapse_run.stats['formulas']} formulas, "
        f"{len(collapse_run.failures)} collapse failures "
        f"[{', '.join(sorted({f['model-id'] for f in collapse_run.failures}))}]; "
        f"fallible CK example disagrees: {ck['disagree']}; chain example disagrees: {chain['disagree']}"
    )
    report(capsys, 5, ok, detail)
    # The line above carries the verdict; the assertions live in the tests below.
    assert collapse_run.stats["models"] >= 200


@pytest.mark.xfail(strict=True, reason="mu X. (<> X -> P) -> P needs three steps on is5:68 and is5:127")
def test_criterion_5_collapse_on_is5(collapse_run):
    assert collapse_run.ok, collapse_run.failures


@pytest.mark.xfail(strict=True, reason="fallible worlds force both sides to {a, b}")
def test_criterion_5_fallible_ck_counterexample():
    assert collapse_counterexample(CK_COUNTERMODEL, CK_COUNTER_FORMULA)["disagree"]


def test_criterion_5_chain_counterexample():
    assert collapse_counterexample(CK_CHAIN_MODEL, CK_CHAIN_FORMULA)["disagree"]


def test_criterion_6_heredity(capsys):
    rep = run_heredity()
    found = rep.stats["ck violation"]
    ok = rep.ok and found is not None
    where = found["model-id"] if found else "none"
    report(capsys, 6, ok, f"{rep.cases} cases, {len(rep.failures)} failures, CK violation: {where}")
    assert ok, rep.failures[:5]


def test_criterion_7_frames(capsys):
    rep = run_frames()
    report(capsys, 7, rep.ok, f"{rep.cases} checks, {len(rep.failures)} failures")
    assert rep.ok, rep.failures[:5]


def test_criterion_8_axioms(capsys):
    rep = run_axioms()
    dp = rep.stats["DP countermodel"]
    ok = rep.ok and dp is not None
    where = f"{dp['model-id']} at {dp['world']}" if dp else "none"
    report(capsys, 8, ok, f"{rep.cases} checks, {len(rep.failures)} failures, DP countermodel: {where}")
    assert ok, rep.failures[:5]


def test_criterion_9_separations(capsys):
    rep = run_separations()
    found = rep.stats["separations"]
    ok = rep.ok and all(v is not None for v in found.values())
    seps = ", ".join(f"{k}: {v['model-id'] if v else 'none'}" for k, v in found.items())
    report(capsys, 9, ok, f"{rep.cases} checks, {len(rep.failures)} failures, {seps}")
    assert ok, rep.failures[:5]
