import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.polynomial import legendre

from gpcdyn.basis import LEGENDRE, BasisFamily, eval_basis
from gpcdyn.harmonic import (HarmonicSetup, I_ell, I_ell_all, exact_coefficients, exact_state,
                             legendre_B, legendre_B_matrix, liouville_contrast,
                             projected_coefficients, second_moment)

SETUP = HarmonicSetup(1.0, 0.25, 8)


def quad_I(ell, t, setup, n=200):
    x, w = legendre.leggauss(n)
    return float(np.sum(w * x**ell * np.cos((setup.omega0 + setup.alpha * x) * t)))


def test_B_examples():
    assert legendre_B(0, 0) == 1.0
    assert legendre_B(1, 1) == pytest.approx(np.sqrt(3))
    assert legendre_B(1, 0) == 0.0
    # psi_2 = sqrt(5) (3 lam^2 - 1) / 2
    assert legendre_B(2, 2) == pytest.approx(1.5 * np.sqrt(5))
    assert legendre_B(2, 0) == pytest.approx(-0.5 * np.sqrt(5))
    with pytest.raises(ValueError):
        legendre_B(2, 3)


@given(st.integers(0, 8), st.floats(-1, 1))
def test_B_reproduces_basis(k, lam):
    B = legendre_B_matrix(8)
    assert np.polyval(B[k, ::-1], lam) == pytest.approx(eval_basis(BasisFamily(LEGENDRE, 8), k, lam),
                                                        abs=1e-10)


def test_I_closed_forms():
    for t in (0.5, 3.0, 40.0):
        a = SETUP.alpha * t
        assert I_ell(0, t, SETUP) == pytest.approx((np.sin(SETUP.omega2 * t)
                                                    - np.sin(SETUP.omega1 * t)) / a, abs=1e-13)
    assert I_ell(0, 1e-9, SETUP) == pytest.approx(2.0)
    assert I_ell(1, 1e-9, SETUP) == pytest.approx(0.0, abs=1e-9)
    assert I_ell_all(3, 0.0, SETUP).tolist() == pytest.approx([2.0, 0.0, 2 / 3, 0.0])
    with pytest.raises(ValueError):
        I_ell(0, -1.0, SETUP)


@pytest.mark.parametrize("t", [1.0, 10.0, 100.0])
def test_I_against_quadrature(t):
    vals = I_ell_all(10, t, SETUP)
    for ell in range(11):
        assert vals[ell] == pytest.approx(quad_I(ell, t, SETUP), abs=1e-9)


@given(st.floats(0, 500), st.floats(0.01, 1.0))
def test_I_recurrence_and_series_agree_with_quadrature(t, alpha):
    setup = HarmonicSetup(1.0, alpha, 8)
    vals = I_ell_all(8, t, setup)
    want = [quad_I(ell, t, setup, 300) for ell in range(9)]
    assert np.allclose(vals, want, atol=1e-9)


def test_coefficients_at_zero():
    Q, P = exact_coefficients(SETUP, 0.0)
    assert Q == pytest.approx(np.eye(9)[0], abs=1e-14)
    assert P == pytest.approx(np.zeros(9), abs=1e-14)


def test_Q0_closed_form():
    t = 17.0
    Q, _ = exact_coefficients(SETUP, t)
    want = (np.sin(SETUP.omega2 * t) - np.sin(SETUP.omega1 * t)) / (2 * SETUP.alpha * t)
    assert Q[0] == pytest.approx(want, abs=1e-14)


def test_recurrence_coefficients_match_projection_dense():
    worst = max(np.max(np.abs(exact_coefficients(SETUP, t)[0] - projected_coefficients(SETUP, t)[0]))
                for t in np.linspace(0, 500, 1001))
    assert worst < 1e-8


@given(st.floats(0, 200), st.integers(0, 8))
def test_parseval(t, r):
    setup = HarmonicSetup(1.0, 0.25, r)
    Q, _ = exact_coefficients(setup, t)
    assert np.sum(Q**2) <= second_moment(setup, t) + 1e-8


def test_parseval_gap_shrinks_with_order():
    t = 30.0
    gaps = [second_moment(HarmonicSetup(1.0, 0.25, r), t)
            - np.sum(exact_coefficients(HarmonicSetup(1.0, 0.25, r), t)[0] ** 2)
            for r in (2, 4, 8, 16)]
    assert all(b <= a + 1e-12 for a, b in zip(gaps, gaps[1:]))


def test_exact_state_layout():
    X = exact_state(SETUP, 2.0)
    Q, P = exact_coefficients(SETUP, 2.0)
    assert np.array_equal(X[0::2], Q) and np.array_equal(X[1::2], P)


def test_decay_envelope():
    ts = np.linspace(50, 500, 451)
    env = np.array([np.max(np.abs(exact_coefficients(SETUP, t)[0])) * t for t in ts])
    assert np.max(env) < 20.0


def test_invalid_setup():
    with pytest.raises(ValueError):
        HarmonicSetup(1.0, -0.1, 2)
    with pytest.raises(ValueError):
        HarmonicSetup(1.0, 0.1, -1)


def test_liouville_zero_alpha_no_mismatch():
    rep = liouville_contrast(HarmonicSetup(1.0, 0.0, 3), 50.0, n_samples=51)
    assert np.max(rep.mismatch) < 1e-8
    assert rep.t_star is None


def test_liouville_t_star_grows_with_order():
    r4 = liouville_contrast(HarmonicSetup(1.0, 0.25, 4), 300.0)
    r8 = liouville_contrast(HarmonicSetup(1.0, 0.25, 8), 300.0)
    for rep in (r4, r8):
        assert rep.max_det_error < 1e-4
        assert rep.t_star is not None
    assert r8.t_star > r4.t_star
