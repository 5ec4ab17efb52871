"""Poincare sections, largest Lyapunov exponents and Monte Carlo baselines."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .integrate import IntegrationError, IntegratorConfig, _STATUS, as_table, integrate


@dataclass
class PoincareSection:
    phase: float
    omega: float
    times: np.ndarray
    points: np.ndarray
    n_rhs_evaluations: int = 0


def section_times(omega: float, phase: float, n_points: int) -> np.ndarray:
    return (2.0 * np.pi * np.arange(n_points) + phase) / omega


def poincare(system, config: IntegratorConfig, X0, omega: float, phase: float = 0.0,
             n_points: int = 1000) -> PoincareSection:
    """Stroboscopic samples at t_n = (2 pi n + phase) / omega, n = 0 .. n_points - 1."""
    if omega <= 0:
        raise ValueError("forcing frequency must be positive")
    times = section_times(omega, phase, n_points)
    X0 = np.asarray(X0, dtype=float)
    if n_points == 0:
        return PoincareSection(phase, omega, times, np.empty((0, X0.size)))
    t0 = config.t_span[0]
    t1 = max(times[-1], t0 + 1e-12)
    if times[0] < t0:
        raise ValueError("first section time precedes the integration start")
    traj = integrate(system, replace(config, t_span=(t0, t1)), X0, t_eval=times)
    return PoincareSection(phase, omega, times, traj.states, traj.n_rhs_evaluations)


@dataclass
class LyapunovEstimate:
    exponent: float
    horizon: float
    renorm_dt: float
    transient: float
    times: np.ndarray
    series: np.ndarray
    n_rhs_evaluations: int = 0


def largest_lyapunov(system, config: IntegratorConfig, X0, horizon: float,
                     renorm_dt: float = 1.0, transient: float | None = None, v0=None
                     ) -> LyapunovEstimate:
    """Benettin estimate of the largest Lyapunov exponent.

    A tangent vector is carried along with the state by the variational
    equations (analytic Jacobian) and renormalised every ``renorm_dt``.
    Log-stretch factors are summed after the ``transient`` (default 5 % of
    the horizon).  Forcing enters through explicit time, which is the same
    as augmenting a phase variable with zero tangent component.
    """
    table = as_table(system)
    d = table.dim
    if renorm_dt <= 0:
        raise ValueError("renorm_dt must be positive")
    if transient is None:
        transient = 0.05 * horizon
    if not 0 <= transient < horizon:
        raise ValueError("transient must lie inside the horizon")
    v = np.zeros(d) if v0 is None else np.asarray(v0, dtype=float).copy()
    if v0 is None:
        v[0] = 1.0
    v /= np.linalg.norm(v)
    y = np.concatenate([np.asarray(X0, dtype=float), v])
    t = float(config.t_span[0])
    n_seg = int(round(horizon / renorm_dt))
    n_skip = int(round(transient / renorm_dt))
    h = config.h0
    total = 0.0
    nfev = 0
    times, series = [], []
    for m in range(n_seg):
        t_next = t + renorm_dt
        t_out = np.array([t_next])
        if config.method == "rk45_adaptive":
            Y, t_reached, h, fev, _, _, status = _kernels.dopri5(
                *table.arrays, d, 1, y, t, t_out, t_next, config.rtol, config.atol, h, np.inf,
                config.max_steps)
            if status != _kernels.OK:
                raise IntegrationError(_STATUS[status], t_reached)
        else:
            Y, fev, _ = _kernels.rk4_fixed(*table.arrays, d, 1, y, t, t_out, config.h)
            if not np.all(np.isfinite(Y)):
                raise IntegrationError("non-finite state", t_next)
        nfev += fev
        y = Y[0].copy()
        norm = np.linalg.norm(y[d:])
        y[d:] /= norm
        t = t_next
        if m >= n_skip:
            total += np.log(norm)
            times.append(t)
            series.append(total / (t - config.t_span[0] - n_skip * renorm_dt))
    exponent = series[-1] if series else float("nan")
    return LyapunovEstimate(float(exponent), horizon, renorm_dt, transient, np.array(times),
                            np.array(series), int(nfev))


@dataclass
class EnsembleStats:
    times: np.ndarray
    mean: np.ndarray  # (T, n)
    std: np.ndarray  # (T, n)
    n_samples: int
    seed: int
    n_rhs_evaluations: int = 0


def sample_variates(uncertain, n: int, seed: int) -> np.ndarray:
    """Standardized draws; sample i uses its own stream spawned from ``seed``."""
    streams = np.random.SeedSequence(seed).spawn(n)
    return np.array([uncertain.draw(np.random.default_rng(s)) for s in streams])


def monte_carlo(model, n_samples: int, seed: int, sample_times, config: IntegratorConfig,
                ic=None, workers: int = 1) -> EnsembleStats:
    """Sample the uncertain input, integrate each realisation, return pointwise mean/std.

    Results do not depend on ``workers``: every sample draws from its own
    seeded stream and the reduction runs in sample order.
    """
    if model.uncertain is None:
        raise ValueError(f"model {model.name!r} has no uncertain input")
    if n_samples < 1:
        raise ValueError("need at least one sample")
    times = np.asarray(sample_times, dtype=float)
    cfg = replace(config, t_span=(config.t_span[0], max(config.t_span[1], times[-1])))
    xis = sample_variates(model.uncertain, n_samples, seed)

    def one(i):
        table = model.sample_table(xis[i])
        x0 = model.sample_ic(xis[i], ic)
        try:
            traj = integrate(table, cfg, x0, t_eval=times)
        except IntegrationError as exc:
            raise IntegrationError(f"sample {i}: {exc}", exc.t) from exc
        return traj.states, traj.n_rhs_evaluations

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(one, range(n_samples)))
    else:
        results = [one(i) for i in range(n_samples)]
    states = np.stack([r[0] for r in results])
    mean = states.mean(axis=0)
    std = states.std(axis=0)
    return EnsembleStats(times, mean, std, n_samples, seed, sum(r[1] for r in results))


@dataclass
class MomentError:
    times: np.ndarray
    mean_error: np.ndarray
    std_error: np.ndarray
    threshold: float
    divergence_time: float | None


def moment_error(times, pc_mean, pc_std, mc: EnsembleStats, coord: int = 0,
                 threshold: float = 0.5) -> MomentError:
    """Absolute deviation of PC moments from the Monte Carlo reference for one coordinate.

    The divergence time is the first sample time at which the mean error
    exceeds ``threshold`` (None if it never does).
    """
    times = np.asarray(times, dtype=float)
    if times.shape != mc.times.shape or not np.allclose(times, mc.times, rtol=0, atol=1e-9):
        raise ValueError("PC and Monte Carlo time grids differ")
    mean_err = np.abs(np.asarray(pc_mean, dtype=float) - mc.mean[:, coord])
    std_err = np.abs(np.asarray(pc_std, dtype=float) - mc.std[:, coord])
    above = np.flatnonzero(mean_err > threshold)
    div = float(times[above[0]]) if above.size else None
    return MomentError(times, mean_err, std_err, threshold, div)
