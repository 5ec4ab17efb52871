"""Orthonormal polynomial families and matched Gauss quadrature.

Two univariate families are supported:

* ``hermite_gaussian``: psi_k = He_k / sqrt(k!), orthonormal under the
  standard Gaussian density.
* ``legendre_uniform``: psi_k = sqrt(2k + 1) P_k, orthonormal under the
  uniform density 1/2 on [-1, 1].

Quadrature weights always include the density, so they sum to one and
``sum(w * f(nodes))`` is directly an expectation.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import sqrt
from typing import Sequence

import numpy as np
from numpy.polynomial import hermite_e, legendre

HERMITE = "hermite_gaussian"
LEGENDRE = "legendre_uniform"
KINDS = (HERMITE, LEGENDRE)


@dataclass(frozen=True)
class BasisFamily:
    kind: str
    max_order: int

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown basis family {self.kind!r}; expected one of {KINDS}")
        if self.max_order < 0:
            raise ValueError("max_order must be nonnegative")

    @property
    def size(self) -> int:
        return self.max_order + 1

    def with_order(self, r: int) -> "BasisFamily":
        return BasisFamily(self.kind, r)


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray

    def expect(self, values: np.ndarray) -> np.ndarray:
        """Expectation of ``values`` sampled at the nodes (last axis)."""
        return np.asarray(values) @ self.weights


def _check_order(family: BasisFamily, k: int) -> None:
    if not 0 <= k <= family.max_order:
        raise ValueError(f"basis order {k} outside [0, {family.max_order}]")


def basis_matrix(kind: str, r: int, lam) -> np.ndarray:
    """Values psi_0..psi_r at each point of ``lam``; shape ``lam.shape + (r + 1,)``.

    Uses the three-term recurrence of the orthonormal family, which stays
    well conditioned for the orders used here.
    """
    lam = np.asarray(lam, dtype=float)
    out = np.empty(lam.shape + (r + 1,))
    out[..., 0] = 1.0
    if r == 0:
        return out
    if kind == HERMITE:
        out[..., 1] = lam
        for k in range(1, r):
            out[..., k + 1] = (lam * out[..., k] - sqrt(k) * out[..., k - 1]) / sqrt(k + 1)
    elif kind == LEGENDRE:
        # plain Legendre first, then normalise
        out[..., 1] = lam
        for k in range(1, r):
            out[..., k + 1] = ((2 * k + 1) * lam * out[..., k] - k * out[..., k - 1]) / (k + 1)
        out *= np.sqrt(2.0 * np.arange(r + 1) + 1.0)
    else:
        raise ValueError(f"unknown basis family {kind!r}")
    return out


def eval_basis(family: BasisFamily, k: int, lam) -> float | np.ndarray:
    """psi_k(lam) for the orthonormal family."""
    _check_order(family, k)
    vals = basis_matrix(family.kind, k, lam)[..., k]
    return float(vals) if np.ndim(vals) == 0 else vals


@lru_cache(maxsize=None)
def _gauss(kind: str, n: int) -> tuple[np.ndarray, np.ndarray]:
    if kind == HERMITE:
        x, w = hermite_e.hermegauss(n)
    else:
        x, w = legendre.leggauss(n)
    w = w / w.sum()
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_rule(family: BasisFamily | str, n: int) -> QuadratureRule:
    """n-point Gauss rule for the family's density, exact to degree 2n - 1."""
    if n < 1:
        raise ValueError("node count must be at least 1")
    kind = family.kind if isinstance(family, BasisFamily) else family
    if kind not in KINDS:
        raise ValueError(f"unknown basis family {kind!r}")
    x, w = _gauss(kind, n)
    return QuadratureRule(x, w)


def nodes_for_degree(degree: int) -> int:
    """Smallest Gauss node count integrating a degree-``degree`` polynomial exactly."""
    return max(1, degree // 2 + 1)


@lru_cache(maxsize=65536)
def _moment(kind: str, orders: tuple[int, ...], lam_power: int) -> float:
    degree = sum(orders) + lam_power
    # exact zeros: both densities are symmetric, and psi_k is orthogonal to lower degrees
    if degree % 2 or (orders and 2 * max(orders) > degree):
        return 0.0
    rule = gauss_rule(kind, nodes_for_degree(degree))
    top = max(orders) if orders else 0
    psi = basis_matrix(kind, top, rule.nodes)
    f = rule.nodes**lam_power
    for k in orders:
        f = f * psi[:, k]
    return float(f @ rule.weights)


def expectation_moment(family: BasisFamily, orders: Sequence[int], lam_power: int = 0) -> float:
    """E[lam**lam_power * prod_j psi_{orders[j]}(lam)], exact by Gauss quadrature.

    The node count is picked from the total polynomial degree, so the result
    is exact up to round-off.
    """
    if lam_power < 0:
        raise ValueError("lam_power must be nonnegative")
    for k in orders:
        _check_order(family, k)
    return _moment(family.kind, tuple(sorted(orders)), int(lam_power))
