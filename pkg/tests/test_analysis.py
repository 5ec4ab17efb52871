import numpy as np
import pytest
from hypothesis import given, strategies as st

from gpcdyn.analysis import (EnsembleStats, largest_lyapunov, moment_error, monte_carlo, poincare,
                             sample_variates, section_times)
from gpcdyn.basis import HERMITE, BasisFamily
from gpcdyn.galerkin import PolynomialVectorField, Term, linear_field, project
from gpcdyn.integrate import IntegratorConfig, integrate
from gpcdyn.models import GAUSSIAN, ModelSpec, Uncertainty, make_model

H0 = BasisFamily(HERMITE, 0)


def decay_model(mean=1.0, sd=0.1):
    # x' = -lam x with lam = mean + sd * eta
    field = PolynomialVectorField(1, (Term(0, -mean, 0, {0: 1}), Term(0, -sd, 1, {0: 1})))
    return ModelSpec("decay", field, {}, (1.0,), Uncertainty("parameter", GAUSSIAN, "lam", mean, sd))


def test_section_times():
    assert section_times(2.0, np.pi, 3) == pytest.approx([np.pi / 2, 3 * np.pi / 2, 5 * np.pi / 2])


def test_poincare_autonomous_equals_sampling():
    s = project(linear_field([[0.0, 1.0], [-2.0, 0.0]]), H0)
    cfg = IntegratorConfig()
    sec = poincare(s, cfg, [1.0, 0.0], 1.0, 0.0, 20)
    tr = integrate(s, IntegratorConfig(t_span=(0, sec.times[-1])), [1.0, 0.0], sec.times)
    assert np.array_equal(sec.points, tr.states)
    assert sec.times[0] == 0.0


def test_poincare_edge_cases():
    s = project(linear_field([[0.0, 1.0], [-1.0, 0.0]]), H0)
    assert poincare(s, IntegratorConfig(), [1.0, 0.0], 1.0, 0.0, 0).points.shape == (0, 2)
    with pytest.raises(ValueError):
        poincare(s, IntegratorConfig(), [1.0, 0.0], 0.0)
    sec = poincare(s, IntegratorConfig(), [1.0, 0.0], 2.0, 1.0, 3)
    assert sec.times[0] == 0.5


def test_forced_duffing_attractor_box():
    m = make_model("duffing_forced")
    s = project(m.field, m.family(0))
    sec = poincare(s, IntegratorConfig(), m.expanded_ic(0), 1.0, 0.0, 5000)
    q, p = sec.points[100:, 0], sec.points[100:, 1]
    assert q.min() > -2 and q.max() < 2 and p.min() > -1.5 and p.max() < 1.5
    # spread over both wells rather than a periodic orbit
    assert np.unique(np.round(sec.points[100:], 6), axis=0).shape[0] > 1000


def test_lyapunov_linear_growth():
    s = project(linear_field([[0.3]]), H0)
    est = largest_lyapunov(s, IntegratorConfig(rtol=1e-9, atol=1e-12), [1.0], 200.0)
    assert est.exponent == pytest.approx(0.3, abs=1e-3)


def test_lyapunov_harmonic_is_zero():
    s = project(linear_field([[0.0, 1.0], [-1.0, 0.0]]), H0)
    est = largest_lyapunov(s, IntegratorConfig(), [1.0, 0.0], 1e4)
    assert abs(est.exponent) < 0.02
    assert est.series.size == est.times.size and est.series[-1] == est.exponent


def test_lyapunov_invalid():
    s = project(linear_field([[0.3]]), H0)
    with pytest.raises(ValueError):
        largest_lyapunov(s, IntegratorConfig(), [1.0], 10.0, renorm_dt=0.0)
    with pytest.raises(ValueError):
        largest_lyapunov(s, IntegratorConfig(), [1.0], 10.0, transient=10.0)


def test_lyapunov_invariance_nominal_forced_duffing():
    m = make_model("duffing_forced")
    s = project(m.field, m.family(0))
    X0 = m.expanded_ic(0)
    base = largest_lyapunov(s, IntegratorConfig(), X0, 2e4).exponent
    halved = largest_lyapunov(s, IntegratorConfig(), X0, 2e4, renorm_dt=0.5).exponent
    rotated = largest_lyapunov(s, IntegratorConfig(), X0, 2e4, v0=[1.0, 1.0]).exponent
    assert base > 0.05
    assert halved == pytest.approx(base, rel=0.1)
    assert rotated == pytest.approx(base, rel=0.1)


def test_mc_initial_distribution():
    m = make_model("duffing_uncertain_ic")
    stats = monte_carlo(m, 100_000, 3, [0.0, 1e-9], IntegratorConfig(t_span=(0, 1e-9)))
    assert abs(stats.mean[0, 0] - 1.0) < 3 * 0.1 / np.sqrt(1e5)
    assert stats.std[0, 0] == pytest.approx(0.1, rel=0.01)


def test_mc_lognormal_oracle():
    stats = monte_carlo(decay_model(), 100_000, 5, [0.0, 1.0], IntegratorConfig())
    want = np.exp(-1.0 + 0.005)
    sd = np.sqrt(np.exp(-2 + 2 * 0.01) - want**2)
    assert abs(stats.mean[1, 0] - want) < 4 * sd / np.sqrt(1e5)


def test_mc_single_sample():
    m = decay_model()
    stats = monte_carlo(m, 1, 0, [0.0, 1.0], IntegratorConfig())
    lam = sample_variates(m.uncertain, 1, 0)[0]
    assert stats.mean[1, 0] == pytest.approx(np.exp(-(1.0 + 0.1 * lam)), rel=1e-5)
    assert np.all(stats.std == 0)


def test_mc_determinism_and_workers():
    m = make_model("duffing_forced")
    times = np.linspace(0, 5, 11)
    a = monte_carlo(m, 50, 9, times, IntegratorConfig(t_span=(0, 5)))
    b = monte_carlo(m, 50, 9, times, IntegratorConfig(t_span=(0, 5)), workers=4)
    assert np.array_equal(a.mean, b.mean) and np.array_equal(a.std, b.std)
    c = monte_carlo(m, 50, 10, times, IntegratorConfig(t_span=(0, 5)))
    assert not np.array_equal(a.mean, c.mean)


def test_mc_prefix_stability():
    # sample i uses the same stream regardless of N
    m = decay_model()
    assert np.array_equal(sample_variates(m.uncertain, 5, 2), sample_variates(m.uncertain, 9, 2)[:5])


def test_mc_two_seeds_agree():
    m = make_model("duffing_unforced")
    times = np.linspace(0, 10, 21)
    cfg = IntegratorConfig(t_span=(0, 10))
    a = monte_carlo(m, 1000, 1, times, cfg)
    b = monte_carlo(m, 1000, 2, times, cfg)
    bound = 4 * np.maximum(a.std, b.std) / np.sqrt(1000)
    assert np.all(np.abs(a.mean - b.mean) <= bound + 1e-12)


def test_mc_errors():
    field = PolynomialVectorField(1, (Term(0, -1.0, 0, {0: 1}),))
    with pytest.raises(ValueError):
        monte_carlo(ModelSpec("det", field, {}, (1.0,), None), 10, 0, [0.0, 1.0],
                    IntegratorConfig())
    with pytest.raises(ValueError):
        monte_carlo(decay_model(), 0, 0, [0.0, 1.0], IntegratorConfig())


def test_moment_error_identical_inputs():
    times = np.linspace(0, 1, 5)
    mean = np.sin(times)[:, None]
    std = np.abs(np.cos(times))[:, None]
    mc = EnsembleStats(times, mean, std, 10, 0)
    err = moment_error(times, mean[:, 0], std[:, 0], mc)
    assert np.all(err.mean_error == 0) and np.all(err.std_error == 0)
    assert err.divergence_time is None
    with pytest.raises(ValueError):
        moment_error(times[:-1], mean[:-1, 0], std[:-1, 0], mc)


@given(st.floats(0.05, 2.0))
def test_moment_error_divergence_threshold(threshold):
    times = np.linspace(0, 10, 101)
    mc = EnsembleStats(times, np.zeros((101, 1)), np.zeros((101, 1)), 1, 0)
    err = moment_error(times, 0.1 * times, np.zeros(101), mc, threshold=threshold)
    first = times[np.argmax(0.1 * times > threshold)] if np.any(0.1 * times > threshold) else None
    assert err.divergence_time == first


def test_zero_sigma_gives_zero_error():
    m = make_model("duffing_unforced", {"sigma": 0.0})
    s = project(m.field, m.family(1))
    times = np.linspace(0, 10, 21)
    cfg = IntegratorConfig(t_span=(0, 10))
    tr = integrate(s, cfg, m.expanded_ic(1), times)
    mc = monte_carlo(m, 20, 0, times, cfg)
    err = moment_error(times, tr.states[:, 0], np.abs(tr.states[:, 2]), mc)
    assert np.max(err.mean_error) < 1e-12 and np.max(err.std_error) < 1e-12
