from math import factorial, sqrt

import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.polynomial import hermite_e, legendre

from gpcdyn.basis import HERMITE, LEGENDRE, BasisFamily
from gpcdyn.galerkin import (FULL, LINEARIZED, PolynomialVectorField, Term, diff_term_lists,
                             linear_field, moments, project)
from gpcdyn.models import MODEL_NAMES, make_model


def brute_projection(field, kind, r, X, t=0.0, n_nodes=60):
    """E[f(x(lam), lam, t) psi_s] on a wide Gauss rule built from numpy directly."""
    if kind == HERMITE:
        lam, w = hermite_e.hermegauss(n_nodes)
        psi = np.stack([hermite_e.hermeval(lam, np.eye(r + 1)[k]) / sqrt(factorial(k))
                        for k in range(r + 1)], axis=1)
    else:
        lam, w = legendre.leggauss(n_nodes)
        psi = np.stack([sqrt(2 * k + 1) * legendre.legval(lam, np.eye(r + 1)[k])
                        for k in range(r + 1)], axis=1)
    w = w / w.sum()
    n = field.dim
    x = X.reshape(r + 1, n).T @ psi.T
    f = field.evaluate(x, lam, t)
    return ((f * w) @ psi).T.reshape(-1)


def test_unforced_duffing_equations():
    m = make_model("duffing_unforced")
    s = project(m.field, m.family(1))
    l0, sg = m.params["lambda0"], m.params["sigma"]
    rng = np.random.default_rng(0)
    for _ in range(20):
        Q0, P0, Q1, P1 = rng.uniform(-2, 2, 4)
        want = [P0, -l0 * Q0 - sg * Q1 - (Q0**3 + 3 * Q0 * Q1**2),
                P1, -l0 * Q1 - sg * Q0 - 3 * (Q1**3 + Q0**2 * Q1)]
        assert np.allclose(s.rhs_terms(0.0, [Q0, P0, Q1, P1]), want, atol=1e-13)


def test_rhs_examples():
    m = make_model("duffing_unforced")
    s = project(m.field, m.family(1))
    assert np.allclose(s.rhs(0.0, np.array([1.0, 0, 0, 0])), [0, 0, 0, -0.1], atol=1e-15)
    f = make_model("duffing_forced")
    sf = project(f.field, f.family(1))
    assert np.allclose(sf.rhs(0.0, np.zeros(4)), [0, 0.3, 0, 0], atol=1e-15)
    assert np.allclose(sf.rhs_terms(0.0, np.zeros(4)), [0, 0.3, 0, 0], atol=1e-15)


def test_forcing_only_in_mean_row():
    f = make_model("duffing_forced")
    s = project(f.field, f.family(3))
    forced = {s.var_names[t.target] for t in s.terms if t.forcing != "none"}
    assert forced == {"P_0"}


def test_jacobian_examples():
    A = np.array([[0.0, 1.0], [-2.0, -0.3]])
    s = project(linear_field(A), BasisFamily(HERMITE, 0))
    assert np.allclose(s.jacobian(0.0, np.array([0.7, -1.2])), A)
    m = make_model("duffing_unforced")
    s = project(m.field, m.family(1))
    J = s.jacobian(0.0, np.zeros(4))
    assert J[1, 0] == pytest.approx(-m.params["lambda0"])
    assert J[1, 2] == pytest.approx(-m.params["sigma"])


@pytest.mark.parametrize("name", MODEL_NAMES)
@pytest.mark.parametrize("order", [0, 1, 2, 4])
@pytest.mark.parametrize("mode", [FULL, LINEARIZED])
def test_pseudo_spectral_matches_terms(name, order, mode):
    m = make_model(name)
    s = project(m.field, m.family(order), mode=mode)
    rng = np.random.default_rng(order)
    for _ in range(100):
        X = rng.uniform(-1.5, 1.5, s.expanded_dim)
        t = rng.uniform(0, 10)
        a, b = s.rhs(t, X), s.rhs_terms(t, X)
        assert np.max(np.abs(a - b)) <= 1e-12 * max(1.0, np.max(np.abs(b)))


@pytest.mark.parametrize("name", MODEL_NAMES)
@pytest.mark.parametrize("order", [1, 3])
def test_full_projection_matches_brute_force(name, order):
    m = make_model(name)
    s = project(m.field, m.family(order))
    rng = np.random.default_rng(7)
    for _ in range(10):
        X = rng.uniform(-1, 1, s.expanded_dim)
        t = rng.uniform(0, 5)
        want = brute_projection(m.field, m.family_kind, order, X, t)
        assert np.allclose(s.rhs_terms(t, X), want, atol=1e-11)


@pytest.mark.parametrize("name", MODEL_NAMES)
def test_jacobian_matches_finite_differences(name):
    m = make_model(name)
    s = project(m.field, m.family(2))
    rng = np.random.default_rng(3)
    X = rng.uniform(-1, 1, s.expanded_dim)
    J = s.jacobian(0.4, X)
    h = 1e-6
    for j in range(X.size):
        e = np.zeros_like(X)
        e[j] = h
        col = (s.rhs_terms(0.4, X + e) - s.rhs_terms(0.4, X - e)) / (2 * h)
        assert np.allclose(J[:, j], col, rtol=1e-6, atol=1e-7)


@given(st.integers(1, 6))
def test_linear_field_mean_row_independent_of_order(r):
    # dx/dt = -(1 + 0.2 lam) x + y, dy/dt = -x : the mean row couples only to order <= 1 coefficients
    field = PolynomialVectorField(2, (Term(0, -1.0, 0, {0: 1}), Term(0, -0.2, 1, {0: 1}),
                                      Term(0, 1.0, 0, {1: 1}), Term(1, -1.0, 0, {0: 1})))
    base = project(field, BasisFamily(HERMITE, 1))
    s = project(field, BasisFamily(HERMITE, r))
    rows0 = {(t.target, t.factors, round(t.coeff, 14)) for t in s.terms if t.target < 2}
    ref = {(t.target, t.factors, round(t.coeff, 14)) for t in base.terms if t.target < 2}
    assert rows0 == ref


def test_linearized_drops_quadratic_fluctuation_terms():
    m = make_model("twotime_full")
    s = project(m.field, m.family(2), mode=LINEARIZED)
    n = m.field.dim
    for t in s.terms:
        assert sum(j >= n for j in t.factors) <= 1


def test_modes_agree_for_linear_fields():
    A = np.array([[0.0, 1.0], [-1.0, 0.0]])
    field = linear_field(A)
    a = project(field, BasisFamily(LEGENDRE, 3), mode=FULL)
    b = project(field, BasisFamily(LEGENDRE, 3), mode=LINEARIZED)
    assert diff_term_lists(a.to_dict(), b.to_dict()) == []


def test_moments():
    mean, var = moments(np.array([2.0, 0, 0, 0]), 2)
    assert mean.tolist() == [2.0, 0.0] and var.tolist() == [0.0, 0.0]
    mean, var = moments(np.array([1.0, 0, 0.1, 0]), 2)
    assert var[0] == pytest.approx(0.01)
    traj = np.ones((5, 6))
    mean, var = moments(traj, 2)
    assert mean.shape == (5, 2) and np.all(var == 2.0)


def test_moments_match_sampling():
    m = make_model("duffing_uncertain_ic")
    X0 = m.expanded_ic(1)
    mean, var = moments(X0, 2)
    rng = np.random.default_rng(11)
    q = np.array([m.sample_ic(m.uncertain.draw(rng))[0] for _ in range(100_000)])
    assert abs(q.mean() - mean[0]) < 3 * 0.1 / np.sqrt(q.size)
    assert q.var() == pytest.approx(var[0], rel=0.02)


def test_zero_state_gives_zero_without_forcing():
    m = make_model("duffing_unforced")
    s = project(m.field, m.family(3))
    assert np.all(s.rhs(0.0, np.zeros(s.expanded_dim)) == 0.0)


def test_errors():
    m = make_model("duffing_unforced")
    s = project(m.field, m.family(1))
    with pytest.raises(ValueError):
        s.rhs(0.0, np.zeros(3))
    with pytest.raises(ValueError):
        s.jacobian(0.0, np.zeros(5))
    with pytest.raises(ValueError):
        project(m.field, m.family(1), mode="bogus")
    with pytest.raises(ValueError):
        Term(0, 1.0, 0, {0: 1}, "none", 2.0)
    with pytest.raises(ValueError):
        Term(0, 1.0, 0, {0: 0})
    with pytest.raises(ValueError):
        PolynomialVectorField(1, (Term(1, 1.0),))


def test_json_roundtrip_names():
    m = make_model("duffing_forced")
    doc = project(m.field, m.family(1)).to_dict()
    assert doc["variables"] == ["Q_0", "P_0", "Q_1", "P_1"]
    assert doc["version"] == 1
    assert any(t["forcing"] == "cos" and t["target"] == "P_0" for t in doc["terms"])
