import pytest

from gpcdyn.galerkin import FULL, project
from gpcdyn.golden import (GOLDEN_FILES, GoldenMismatch, check_against_golden, load_golden,
                           safe_eval)
from gpcdyn.models import make_model


@pytest.mark.parametrize("name", sorted(GOLDEN_FILES))
def test_reference_systems_reproduced(name):
    m = make_model(name)
    doc = load_golden(name)
    s = project(m.field, m.family(1), mode=doc["mode"])
    assert check_against_golden(s, name, m.params, tol=1e-12) == []


@pytest.mark.parametrize("name", ["duffing_forced", "duffing_uncertain_ic", "twotime_full"])
def test_reference_holds_under_overrides(name):
    over = {"delta": 0.35, "sigma": 0.27}
    if name == "twotime_full":
        over["eps"] = 0.05
    m = make_model(name, over)
    s = project(m.field, m.family(1), mode=load_golden(name)["mode"])
    assert check_against_golden(s, name, m.params) == []


def test_full_mode_averaged_system_reports_cubic_terms():
    m = make_model("twotime_averaged")
    diff = check_against_golden(project(m.field, m.family(1), mode=FULL), "twotime_averaged",
                                m.params)
    assert diff and all(line.startswith("extra") for line in diff)
    assert any("A_1*B_1*B_1" in line or "B_1*B_1*B_1" in line for line in diff)


def test_wrong_order_or_fixed_parameter():
    m = make_model("duffing_unforced")
    with pytest.raises(GoldenMismatch):
        check_against_golden(project(m.field, m.family(2)), "duffing_unforced", m.params)
    t = make_model("twotime_averaged", {"beta": 2.0})
    with pytest.raises(GoldenMismatch):
        check_against_golden(project(t.field, t.family(1)), "twotime_averaged", t.params)


def test_perturbed_system_is_caught():
    m = make_model("duffing_unforced")
    s = project(m.field, m.family(1))
    terms = list(s.terms)
    t = terms[0]
    terms[0] = type(t)(t.target, t.coeff * (1 + 1e-9), t.factors, t.forcing, t.omega)
    assert len(check_against_golden(s.with_terms(terms), "duffing_unforced", m.params)) == 1


def test_safe_eval():
    assert safe_eval("-lambda0", {"lambda0": -1.0}) == 1.0
    assert safe_eval("3 / 8 * 2", {}) == 0.75
    assert safe_eval("eps * gamma0 ** 2", {"eps": 0.5, "gamma0": 2.0}) == 2.0
    assert safe_eval(2, {}) == 2.0
    for bad in ("__import__('os')", "x", "a[0]", "1 if 1 else 2", "(", "abs(-1)"):
        with pytest.raises(ValueError):
            safe_eval(bad, {"a": [1]})
