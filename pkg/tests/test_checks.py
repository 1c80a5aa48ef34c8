"""Tests for the check registry and check execution."""

import math

import pytest

from wickcalc.checks import (
    CHECKS,
    SUITES,
    CheckContext,
    CheckSpec,
    Measurement,
    list_checks,
    register,
    run_check,
    select_checks,
)
from wickcalc.config import ScenarioConfig
from wickcalc.errors import ErrorCode, WickCalcError
from wickcalc.models import MODEL_NAMES


def test_registry_is_consistent():
    """Every check names registered models and known suites."""
    for check_id, spec in CHECKS.items():
        assert spec.id == check_id
        assert spec.summary
        assert set(spec.models) <= set(MODEL_NAMES)
        assert set(spec.suites) <= set(SUITES)


def test_every_model_has_checks():
    for name in MODEL_NAMES:
        assert "relations" in list_checks(name)


def test_quaternion_suite():
    """Nine products and the Casimir at level 1."""
    selected = select_checks("su2-sphere", "quaternion")
    assert len(selected) == 10
    assert "quaternion-x1x2" in selected
    assert "quaternion-casimir" in selected


def test_list_checks_accepts_alias():
    assert list_checks("su11") == list_checks("su11-variant1")


def test_select_explicit_ids_are_sorted_and_unique():
    selected = select_checks("cylinder", ids=["periodicity", "relations", "periodicity"])
    assert selected == ["periodicity", "relations"]


@pytest.mark.parametrize(
    "kwargs",
    [
        {"ids": ["casimir-1-plus-hbar"]},
        {"suite": "nightly"},
        {"suite": "quaternion"},
    ],
)
def test_select_checks_rejects(kwargs):
    """Unregistered ids, unknown suites and empty suites are configuration errors."""
    with pytest.raises(WickCalcError) as exc:
        select_checks("cylinder", **kwargs)
    assert exc.value.code is ErrorCode.CONFIG_INVALID


def test_select_checks_unknown_model():
    with pytest.raises(WickCalcError) as exc:
        select_checks("torus")
    assert exc.value.code is ErrorCode.UNKNOWN_MODEL


def test_register_rejects_duplicates_and_unknown_suites():
    with pytest.raises(ValueError):
        register("relations", MODEL_NAMES)(lambda ctx: Measurement(0.0, 0.0, 1.0))
    with pytest.raises(ValueError):
        register("never-registered", MODEL_NAMES, ("nightly",))(
            lambda ctx: Measurement(0.0, 0.0, 1.0)
        )
    assert "never-registered" not in CHECKS


def test_measurement_verdict():
    assert Measurement(value=1e-12, target=0.0, tolerance=1e-10).verdict()
    assert not Measurement(value=1e-9, target=0.0, tolerance=1e-10).verdict()
    assert not Measurement(value=math.nan, target=0.0, tolerance=1.0).verdict()
    assert Measurement(value=5.0, target=0.0, tolerance=1.0, passed=True).verdict()


def test_run_check_relations():
    """A passing check returns a serializable result without timing or tables."""
    ctx = CheckContext(ScenarioConfig(model="cylinder"))
    result = run_check("relations", ctx)
    assert result.passed is True
    assert result.model == "cylinder"
    assert result.tables and result.tables[0].name == "relations"
    dumped = result.model_dump()
    assert "runtime_ms" not in dumped
    assert "tables" not in dumped


def test_run_check_turns_errors_into_failures(monkeypatch):
    """A library error fails the check and keeps the message."""

    def explode(ctx):
        raise WickCalcError(ErrorCode.QUADRATURE_FAIL, "integral failed")

    monkeypatch.setitem(CHECKS, "explode", CheckSpec("explode", MODEL_NAMES, (), explode))
    result = run_check("explode", CheckContext(ScenarioConfig()))
    assert result.passed is False
    assert math.isnan(result.value)
    assert "integral failed" in result.detail


def test_context_caches_spaces():
    ctx = CheckContext(ScenarioConfig(model="su2-sphere", params={"N": 3}))
    assert ctx.space() is ctx.space()
    assert ctx.operators() is ctx.operators()
    assert ctx.space().dim == 4


def test_context_rng_is_seeded():
    first = CheckContext(ScenarioConfig(seed=7)).rng(salt=1).normal(size=3)
    second = CheckContext(ScenarioConfig(seed=7)).rng(salt=1).normal(size=3)
    assert (first == second).all()


@pytest.mark.parametrize(
    "check_id", ["e1-invariance", "casimir-1-plus-hbar", "associativity", "casimir-centrality"]
)
def test_cheap_sphere_checks_pass(check_id):
    result = run_check(check_id, CheckContext(ScenarioConfig(model="su2-sphere")))
    assert result.passed, result.detail


@pytest.mark.parametrize("name", MODEL_NAMES)
def test_relations_pass_on_every_model(name):
    """The commutation relations hold on every registered model."""
    result = run_check("relations", CheckContext(ScenarioConfig(model=name)))
    assert result.passed, result.detail


@pytest.mark.parametrize("name", MODEL_NAMES)
def test_properties_suite_on_every_model(name):
    """Each property check registered for a model passes with the default grids."""
    ctx = CheckContext(ScenarioConfig(model=name))
    failures = {}
    for check_id in select_checks(name, "properties"):
        result = run_check(check_id, ctx)
        if not result.passed:
            failures[check_id] = (result.value, result.detail)
    assert failures == {}


@pytest.mark.parametrize(
    "config",
    [
        ScenarioConfig(model="su11-variant2"),
        ScenarioConfig(model="zeeman"),
        ScenarioConfig(model="zeeman", params={"N": 3, "hbar": 0.5, "a2": 1.0}),
    ],
    ids=["su11-variant2", "zeeman", "zeeman-N3"],
)
def test_homomorphism_meets_tolerance(config):
    """Restriction is multiplicative to 1e-7 for twenty random degree-2 pairs."""
    result = run_check("homomorphism", CheckContext(config))
    assert result.passed, result.detail
    assert result.value <= 1e-7


@pytest.mark.parametrize("check_id", ["p-normalization", "resolution-identity", "frobenius"])
def test_zeeman_quadrature_checks_are_tight(check_id):
    """The Euler-integral measure passes at the shipped Zeeman parameters."""
    config = ScenarioConfig(model="zeeman", params={"N": 3, "hbar": 0.5, "a2": 1.0})
    result = run_check(check_id, CheckContext(config))
    assert result.passed, result.detail


def test_plane_p_normalization_runs():
    """p integrates to one on the Bessel plane at the normalization points."""
    result = run_check("p-normalization", CheckContext(ScenarioConfig(model="su11-variant2")))
    assert result.passed, result.detail
