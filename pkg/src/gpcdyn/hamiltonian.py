"""Average Hamiltonian of a gPC expansion and numerical structure checks."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .basis import BasisFamily, basis_matrix, gauss_rule, nodes_for_degree
from .galerkin import GalerkinSystem
from .models import HamiltonianSpec


@dataclass(frozen=True)
class AverageHamiltonian:
    """H averaged over the uncertain variable, as a function of the gPC coefficients.

    Quadrature is exact: the node count follows from the polynomial degree
    of H in (state, lam) after substituting order-``order`` expansions.
    """

    source: HamiltonianSpec
    family: BasisFamily
    base_dim: int

    @property
    def order(self) -> int:
        return self.family.max_order

    @cached_property
    def degree_bound(self) -> int:
        r = self.order
        return max(lp + sum(exps.values()) * r for _, lp, exps in self.source.terms)

    @cached_property
    def _rule(self):
        rule = gauss_rule(self.family, nodes_for_degree(self.degree_bound))
        return rule, basis_matrix(self.family.kind, self.order, rule.nodes)

    def __call__(self, X) -> float:
        X = np.asarray(X, dtype=float)
        n, r = self.base_dim, self.order
        if X.shape != (n * (r + 1),):
            raise ValueError(f"coefficient vector has shape {X.shape}, expected ({n * (r + 1)},)")
        rule, psi = self._rule
        x_nodes = X.reshape(r + 1, n).T @ psi.T
        return float(self.source.evaluate(x_nodes, rule.nodes) @ rule.weights)

    def from_qp(self, Q, P) -> float:
        """Evaluate from coefficient arrays of shape (n_dof, r + 1)."""
        Q = np.atleast_2d(np.asarray(Q, dtype=float))
        P = np.atleast_2d(np.asarray(P, dtype=float))
        if Q.shape != P.shape or Q.shape[1] != self.order + 1:
            raise ValueError("Q and P must both have shape (n_dof, r + 1)")
        X = np.zeros(self.base_dim * (self.order + 1))
        for dof, (qi, pi) in enumerate(self.source.canonical):
            X[qi::self.base_dim] = Q[dof]
            X[pi::self.base_dim] = P[dof]
        return self(X)

    def gradient(self, X, h: float = 1e-5) -> np.ndarray:
        """Central finite-difference gradient with respect to every coefficient."""
        X = np.asarray(X, dtype=float)
        g = np.empty_like(X)
        for j in range(X.size):
            e = np.zeros_like(X)
            e[j] = h
            g[j] = (self(X + e) - self(X - e)) / (2 * h)
        return g


def eval_avg_hamiltonian(ah: AverageHamiltonian, Q, P) -> float:
    return ah.from_qp(Q, P)


def average_hamiltonian(model, order: int) -> AverageHamiltonian:
    if model.hamiltonian is None:
        raise ValueError(f"model {model.name!r} has no Hamiltonian")
    return AverageHamiltonian(model.hamiltonian, model.family(order), model.field.dim)


def structure_residual(ah: AverageHamiltonian, system: GalerkinSystem, X, h: float = 1e-5) -> float:
    """max |dH/dP - Q'| and |dH/dQ + P'| at one coefficient state."""
    if system.expanded_dim != ah.base_dim * (ah.order + 1) or system.family != ah.family:
        raise ValueError("system and average Hamiltonian use different bases or dimensions")
    grad = ah.gradient(X, h)
    rate = system.rhs_terms(0.0, X)
    n = ah.base_dim
    res = 0.0
    for qi, pi in ah.source.canonical:
        q_rows = np.arange(qi, X.size, n)
        p_rows = np.arange(pi, X.size, n)
        res = max(res, np.max(np.abs(grad[p_rows] - rate[q_rows])))
        res = max(res, np.max(np.abs(grad[q_rows] + rate[p_rows])))
    return float(res)


def check_hamiltonian_structure(ah: AverageHamiltonian, system: GalerkinSystem, samples: int = 100,
                                h: float = 1e-5, box: float = 2.0, seed: int = 0) -> float:
    """Largest Hamilton-equation residual over random states in [-box, box]^d.

    The rate side uses the symbolic term list, so any altered term shows up
    in the residual.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        X = rng.uniform(-box, box, system.expanded_dim)
        worst = max(worst, structure_residual(ah, system, X, h))
    return worst


def divergence(system, X, t: float = 0.0) -> float:
    return float(np.trace(system.jacobian(t, X)))


def duffing_hpc(X, lambda0: float, sigma: float) -> np.ndarray:
    """Closed-form average Hamiltonian of the r = 1 Duffing expansion.

    ``X`` is ordered (Q0, P0, Q1, P1) and may carry leading time axes.
    """
    X = np.asarray(X, dtype=float)
    Q0, P0, Q1, P1 = X[..., 0], X[..., 1], X[..., 2], X[..., 3]
    return (0.5 * P0**2 + 0.5 * P1**2 + 0.5 * lambda0 * (Q0**2 + Q1**2) + sigma * Q0 * Q1
            + 1.5 * Q0**2 * Q1**2 + 0.25 * Q0**4 + 0.75 * Q1**4)
