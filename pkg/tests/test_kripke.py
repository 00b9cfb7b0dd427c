import json

import pytest
from hypothesis import given

from cmucalc.kripke import (
    KripkeModel,
    ModelError,
    WorldSet,
    backward_confluence_failures,
    close_repair,
    compose_pre_modal,
    enumerate_models,
    forward_confluence_failures,
    gen_ck,
    gen_is5,
    is_equivalence,
    is_transitive,
    load_model,
    save_model,
    validate_ck,
    validate_is5,
)

from strategies import ck_models, is5_models


def refl(*ws):
    return [(w, w) for w in ws]


def test_single_world_is_valid():
    m = KripkeModel.build(["w"], [], refl("w"), [])
    assert validate_ck(m) == []
    assert validate_is5(KripkeModel.build(["w"], [], refl("w"), refl("w"))) == []


def test_missing_reflexivity_reported():
    m = KripkeModel.build(["w", "v"], [], [("v", "v")], [])
    assert validate_ck(m) == ["pre not reflexive at w"]


def test_fallible_not_modal_closed():
    m = KripkeModel.build(["a", "b"], ["a"], refl("a", "b"), [("a", "b")])
    assert validate_ck(m) == ["fallible not R-closed: a R b"]


@pytest.mark.parametrize(
    "kwargs, message",
    [
        (dict(fallible=["a"], modal=[("a", "a")], valuation={"P": []}), "fallible world a not in V(P)"),
        (dict(pre=refl("a", "b") + [("a", "b")], valuation={"P": ["a"]}), "V(P) not monotone"),
        (dict(fallible=["a"], modal=[]), "fallible world a has no R-successor"),
        (dict(fallible=["a"], pre=refl("a", "b") + [("a", "b")], modal=[("a", "a")]), "fallible not pre-closed: a <= b"),
        (dict(pre=[("a", "a"), ("b", "b"), ("a", "b"), ("b", "a"), ("b", "c"), ("c", "c")]), "pre not transitive"),
    ],
)
def test_ck_violations(kwargs, message):
    kwargs.setdefault("pre", refl("a", "b", "c"))
    ws = ["a", "b", "c"] if any("c" in p for p in kwargs["pre"]) else ["a", "b"]
    m = KripkeModel.build(ws, **kwargs)
    assert any(message in v for v in validate_ck(m))


def test_modal_not_symmetric():
    m = KripkeModel.build(["a", "b"], [], refl("a", "b"), refl("a", "b") + [("a", "b")])
    assert any(v.startswith("modal not symmetric: a R b") for v in validate_is5(m))


def test_backward_confluence_failure_reported():
    # Modal classes {w, v} and {v'}; v <= v' but nothing above w sees v'.
    m = KripkeModel.build(
        ["w", "v", "v'"],
        [],
        refl("w", "v", "v'") + [("v", "v'")],
        [("w", "w"), ("w", "v"), ("v", "w"), ("v", "v"), ("v'", "v'")],
    )
    assert validate_ck(m) == []
    assert "backward confluence fails at (w,v,v')" in validate_is5(m)


def test_compose_pre_modal_examples():
    m = KripkeModel.build(["a", "b"], [], refl("a", "b"), [("a", "b")])
    assert ("a", "b") in compose_pre_modal(m)
    assert compose_pre_modal(KripkeModel.build(["a", "b"], [], refl("a", "b"), [])) == set()


def test_close_repair_examples():
    m = close_repair(KripkeModel.build(["w"], [], [], []))
    assert m.pairs(m.pre) == {("w", "w")}
    m = close_repair(KripkeModel.build(["a", "b"], [], [("a", "b")], [], {"P": ["a"]}))
    assert m.world_set(m.props["P"]).names(m) == ["a", "b"]


def test_close_repair_rejects_non_serial_fallible():
    with pytest.raises(ModelError) as info:
        close_repair(KripkeModel.build(["a"], ["a"], [], []))
    assert "fallible world a has no R-successor" in str(info.value)


def test_close_repair_closes_fallible_and_valuation():
    raw = KripkeModel.build(["a", "b", "c"], ["a"], [("a", "b")], [("a", "a"), ("b", "c"), ("c", "c")], {"P": []})
    m = close_repair(raw)
    assert m.world_set(m.fallible).names(m) == ["a", "b", "c"]
    assert m.props["P"] == m.full


@given(ck_models)
def test_close_repair_idempotent(m):
    assert close_repair(m) == m


def test_generators_deterministic_and_valid():
    assert validate_is5(gen_is5(1, 4)) == []
    assert validate_ck(gen_ck(2, 4)) == []
    assert gen_ck(7, 5, 2) == gen_ck(7, 5, 2)
    assert gen_is5(7, 5, 2) == gen_is5(7, 5, 2)


@given(ck_models)
def test_gen_ck_valid(m):
    assert validate_ck(m) == []


@given(is5_models)
def test_gen_is5_valid(m):
    assert validate_is5(m) == []
    assert m.fallible == 0


def test_enumerate_one_world_count():
    assert len(list(enumerate_models(1, props=0, fallible=False))) == 2


def test_enumerate_zero_worlds_is_empty():
    assert list(enumerate_models(0)) == []


def test_enumerate_emits_valid_models():
    ms = list(enumerate_models(2, props=1))
    assert ms and all(validate_ck(m) == [] for m in ms)
    assert len(set(ms)) == len(ms)


def test_enumerate_up_to_iso_is_smaller():
    full = list(enumerate_models(2, props=1))
    iso = list(enumerate_models(2, props=1, up_to_iso=True))
    assert 0 < len(iso) < len(full)


def test_enumerate_is5_only():
    ms = list(enumerate_models(3, is5_only=True))
    assert ms and all(validate_is5(m) == [] for m in ms)


def test_confluence_conditions_coincide_for_equivalences():
    # One condition holds iff the other does, whenever R is an equivalence.
    seen = 0
    for m in enumerate_models(3, fallible=False):
        if not is_equivalence(m.modal):
            continue
        seen += 1
        assert (not forward_confluence_failures(m)) == (not backward_confluence_failures(m))
    assert seen > 0


def test_confluence_conditions_can_differ_without_equivalence():
    differ = [
        m
        for m in enumerate_models(2, fallible=False)
        if bool(forward_confluence_failures(m)) != bool(backward_confluence_failures(m))
    ]
    assert differ


@given(is5_models)
def test_pre_modal_transitive_on_is5(m):
    assert is_transitive(m.pre_modal)


def test_pre_modal_transitive_on_enumerated_is5():
    for m in enumerate_models(3, is5_only=True):
        assert is_transitive(m.pre_modal)


def test_worldset_operations():
    a, b = WorldSet(0b011, 3), WorldSet(0b110, 3)
    assert (a | b).mask == 0b111 and (a & b).mask == 0b010 and (a - b).mask == 0b001
    assert a.complement().mask == 0b100
    assert list(a) == [0, 1] and len(a) == 2 and 1 in a and 2 not in a
    assert WorldSet(0b010, 3) <= a


def test_file_round_trip(tmp_path):
    m = gen_ck(3, 4, 2)
    path = tmp_path / "m.json"
    save_model(m, path)
    assert load_model(path) == m
    assert set(json.loads(path.read_text())) == {"worlds", "fallible", "pre", "modal", "valuation"}


def test_loader_strict_unless_repair(tmp_path):
    path = tmp_path / "raw.json"
    path.write_text(json.dumps({"worlds": ["a"], "fallible": [], "pre": [], "modal": [], "valuation": {}}))
    with pytest.raises(ModelError):
        load_model(path)
    assert validate_ck(load_model(path, repair=True)) == []


def test_loader_rejects_extra_keys():
    with pytest.raises(ModelError):
        KripkeModel.from_dict({"worlds": ["a"], "fallible": [], "pre": [], "modal": [], "valuation": {}, "x": 1})
