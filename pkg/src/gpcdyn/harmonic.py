"""Exact gPC coefficients of the harmonic oscillator with uncertain frequency.

With omega = omega0 + alpha * lam, lam ~ U(-1, 1), q(0) = 1, q'(0) = 0 the
true solution is q = cos(omega t).  Its Legendre coefficients decay like
1/t, while the projected (Galerkin) system is Hamiltonian and keeps phase
volume fixed, so no finite expansion can follow the true coefficients for
long.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial, sqrt

import numpy as np

from .basis import LEGENDRE, basis_matrix, gauss_rule
from .galerkin import FULL, project
from .integrate import IntegratorConfig, integrate_variational
from .models import make_model


@dataclass(frozen=True)
class HarmonicSetup:
    omega0: float
    alpha: float
    order: int

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be nonnegative")
        if self.order < 0:
            raise ValueError("order must be nonnegative")

    @property
    def omega1(self) -> float:
        return self.omega0 - self.alpha

    @property
    def omega2(self) -> float:
        return self.omega0 + self.alpha


def _gen_binom(x: Fraction, k: int) -> Fraction:
    out = Fraction(1)
    for i in range(k):
        out *= x - i
    return out / factorial(k)


@lru_cache(maxsize=None)
def legendre_B(k: int, ell: int) -> float:
    """Monomial coefficient of lam**ell in the orthonormal Legendre psi_k."""
    if not 0 <= ell <= k:
        raise ValueError("need 0 <= ell <= k")
    exact = 2**k * comb(k, ell) * _gen_binom(Fraction(k + ell - 1, 2), k)
    return sqrt(2 * k + 1) * float(exact)


def legendre_B_matrix(r: int) -> np.ndarray:
    B = np.zeros((r + 1, r + 1))
    for k in range(r + 1):
        for ell in range(k + 1):
            B[k, ell] = legendre_B(k, ell)
    return B


def _I_series(lmax: int, t: float, omega0: float, a: float) -> np.ndarray:
    # int lam^l exp(i a lam) dlam = sum_m (i a)^m / m! * 2 / (l + m + 1) over even l + m
    ells = np.arange(lmax + 1)
    acc = np.zeros(lmax + 1, dtype=complex)
    term = 1.0 + 0j
    m = 0
    while True:
        even = (ells + m) % 2 == 0
        acc += np.where(even, term * 2.0 / (ells + m + 1), 0.0)
        m += 1
        term *= 1j * a / m
        if abs(term) < 1e-18 and m > a:
            break
    return (np.exp(1j * omega0 * t) * acc).real


def _I_recurrence(lmax: int, t: float, omega0: float, a: float, w1: float, w2: float
                  ) -> np.ndarray:
    s1, s2 = np.sin(w1 * t), np.sin(w2 * t)
    c1, c2 = np.cos(w1 * t), np.cos(w2 * t)
    out = np.empty(lmax + 1)
    out[0] = (s2 - s1) / a
    if lmax >= 1:
        out[1] = (s2 + s1) / a + (c2 - c1) / a**2
    for ell in range(2, lmax + 1):
        sign = (-1) ** ell
        out[ell] = ((s2 - sign * s1) / a + ell * (c2 + sign * c1) / a**2
                    - ell * (ell - 1) / a**2 * out[ell - 2])
    return out


def I_ell_all(lmax: int, t: float, setup: HarmonicSetup) -> np.ndarray:
    """I_l(t) = int_{-1}^{1} lam^l cos((omega0 + alpha lam) t) dlam for l = 0 .. lmax.

    Uses the integrate-by-parts recurrence when alpha * t >= max(2, lmax),
    where it is forward stable, and the power series in alpha * t below.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    a = setup.alpha * t
    if a < max(2.0, float(lmax)):
        return _I_series(lmax, t, setup.omega0, a)
    return _I_recurrence(lmax, t, setup.omega0, a, setup.omega1, setup.omega2)


def I_ell(ell: int, t: float, setup: HarmonicSetup) -> float:
    return float(I_ell_all(ell, t, setup)[ell])


def _quad_nodes(setup: HarmonicSetup, t: float) -> int:
    # enough nodes to resolve alpha * t / pi oscillations of the integrand in lam
    return 64 + setup.order + 2 * int(np.ceil(setup.alpha * t))


def projected_coefficients(setup: HarmonicSetup, t: float, n: int | None = None
                           ) -> tuple[np.ndarray, np.ndarray]:
    """Direct Gauss-Legendre projection of q = cos(omega t) and p = -omega sin(omega t)."""
    rule = gauss_rule(LEGENDRE, n or _quad_nodes(setup, t))
    psi = basis_matrix(LEGENDRE, setup.order, rule.nodes)
    w = setup.omega0 + setup.alpha * rule.nodes
    q = np.cos(w * t)
    p = -w * np.sin(w * t)
    return (q * rule.weights) @ psi, (p * rule.weights) @ psi


def exact_coefficients(setup: HarmonicSetup, t: float) -> tuple[np.ndarray, np.ndarray]:
    """(Q_k(t), P_k(t)) for k = 0 .. order.

    Q_k comes from Q_k = 1/2 sum_l B_kl I_l; P_k is the projection of the
    full velocity -omega sin(omega t) by quadrature.
    """
    r = setup.order
    Q = 0.5 * legendre_B_matrix(r) @ I_ell_all(r, t, setup)
    _, P = projected_coefficients(setup, t)
    return Q, P


def exact_state(setup: HarmonicSetup, t: float) -> np.ndarray:
    """Exact coefficients in the (Q_0, P_0, Q_1, P_1, ...) layout of the Galerkin system."""
    Q, P = exact_coefficients(setup, t)
    return np.column_stack([Q, P]).ravel()


def second_moment(setup: HarmonicSetup, t: float) -> float:
    """E[q(t)^2] for the true solution."""
    a2 = 2 * setup.alpha * t
    ratio = 1.0 if a2 == 0 else np.sin(a2) / a2
    return 0.5 * (1.0 + np.cos(2 * setup.omega0 * t) * ratio)


@dataclass
class LiouvilleReport:
    setup: HarmonicSetup
    times: np.ndarray
    exact_norm: np.ndarray
    pc_norm: np.ndarray
    mismatch: np.ndarray
    det_phi: np.ndarray
    exact: np.ndarray
    pc: np.ndarray
    t_star: float | None
    n_rhs_evaluations: int = 0

    @property
    def max_det_error(self) -> float:
        return float(np.max(np.abs(self.det_phi - 1.0)))


def liouville_contrast(setup: HarmonicSetup, horizon: float, config: IntegratorConfig | None = None,
                       n_samples: int = 601) -> LiouvilleReport:
    """Integrate the full Galerkin system and compare with the exact coefficients.

    ``t_star`` is the first sample time where ||X_pc - X_exact|| exceeds
    half of ||X_pc||.
    """
    if config is None:
        config = IntegratorConfig(rtol=1e-10, atol=1e-12)
    model = make_model("harmonic_uncertain_freq", {"omega0": setup.omega0, "alpha": setup.alpha})
    system = project(model.field, model.family(setup.order), mode=FULL)
    times = np.linspace(0.0, horizon, n_samples)
    cfg = IntegratorConfig(config.method, config.rtol, config.atol, config.h, (0.0, horizon),
                           config.max_steps)
    traj, phi = integrate_variational(system, cfg, model.expanded_ic(setup.order), t_eval=times)
    det = np.linalg.det(phi)
    exact = np.array([exact_state(setup, t) for t in times])
    pc = traj.states
    mismatch = np.linalg.norm(pc - exact, axis=1)
    pc_norm = np.linalg.norm(pc, axis=1)
    over = np.flatnonzero(mismatch > 0.5 * pc_norm)
    t_star = float(times[over[0]]) if over.size else None
    return LiouvilleReport(setup, times, np.linalg.norm(exact, axis=1), pc_norm, mismatch, det,
                           exact, pc, t_star, traj.n_rhs_evaluations)

