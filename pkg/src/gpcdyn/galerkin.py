"""Polynomial vector fields and their Galerkin (gPC) projection.

A field is a sum of monomial terms in the state, in one standardized
uncertain variable ``lam`` and in an optional harmonic forcing factor.
Projecting onto an orthonormal basis of order r gives a deterministic
system for the coefficients X[k * n + i] of state component i on psi_k,
stored again as an explicit list of monomials.
"""
from __future__ import annotations

import itertools
import json
from collections import defaultdict
from dataclasses import dataclass, field as dc_field, replace
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np

from . import _kernels
from .basis import BasisFamily, basis_matrix, expectation_moment, gauss_rule, nodes_for_degree

FULL = "full"
LINEARIZED = "linearized_fluctuations"
MODES = (FULL, LINEARIZED)

FORCINGS = ("none", "cos", "sin")
_FKIND = {"none": 0, "cos": 1, "sin": 2}

SCHEMA = "gpcdyn.galerkin_system"
SCHEMA_VERSION = 1


def _forcing_value(kind: str, omega: float, t):
    if kind == "cos":
        return np.cos(omega * t)
    if kind == "sin":
        return np.sin(omega * t)
    return 1.0


@dataclass(frozen=True)
class Term:
    """``coeff * lam**lam_power * prod x_j**e_j * forcing(t)`` feeding ``d x_target / dt``."""

    target: int
    coeff: float
    lam_power: int = 0
    exponents: tuple = ()
    forcing: str = "none"
    omega: float = 0.0

    def __post_init__(self):
        exps = self.exponents
        if isinstance(exps, dict):
            exps = exps.items()
        exps = tuple(sorted((int(j), int(e)) for j, e in exps))
        object.__setattr__(self, "exponents", exps)
        object.__setattr__(self, "coeff", float(self.coeff))
        if self.lam_power < 0:
            raise ValueError("lam_power must be nonnegative")
        if any(e <= 0 for _, e in exps):
            raise ValueError("state exponents must be positive")
        if len({j for j, _ in exps}) != len(exps):
            raise ValueError("duplicate state index in exponents")
        if self.forcing not in FORCINGS:
            raise ValueError(f"forcing must be one of {FORCINGS}")
        if self.forcing == "none" and self.omega != 0.0:
            raise ValueError("omega given for an unforced term")
        if not np.isfinite(self.coeff):
            raise ValueError("term coefficient must be finite")

    @property
    def factors(self) -> tuple[int, ...]:
        return tuple(j for j, e in self.exponents for _ in range(e))

    @property
    def degree(self) -> int:
        return sum(e for _, e in self.exponents)


@dataclass(frozen=True)
class PolynomialVectorField:
    dim: int
    terms: tuple[Term, ...]
    param_name: str = "eta"
    names: tuple[str, ...] = ()
    canonical: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if not self.names:
            object.__setattr__(self, "names", tuple(f"x{i}" for i in range(self.dim)))
        if len(self.names) != self.dim:
            raise ValueError("one name per state component required")
        for term in self.terms:
            if not 0 <= term.target < self.dim:
                raise ValueError(f"term target {term.target} outside state dimension {self.dim}")
            if any(not 0 <= j < self.dim for j, _ in term.exponents):
                raise ValueError("term references a state index outside the field")

    @property
    def max_lam_power(self) -> int:
        return max((t.lam_power for t in self.terms), default=0)

    @property
    def is_autonomous(self) -> bool:
        return all(t.forcing == "none" for t in self.terms)

    def evaluate(self, x, lam, t: float = 0.0) -> np.ndarray:
        """Field value; ``x`` has shape (dim, ...) broadcasting against ``lam``."""
        x = np.asarray(x, dtype=float)
        lam = np.asarray(lam, dtype=float)
        out = np.zeros(np.broadcast_shapes(x.shape, (self.dim,) + lam.shape))
        for term in self.terms:
            v = term.coeff * lam**term.lam_power * _forcing_value(term.forcing, term.omega, t)
            for j, e in term.exponents:
                v = v * x[j] ** e
            out[term.target] += v
        return out

    def jacobian(self, x, lam, t: float = 0.0) -> np.ndarray:
        """d f_i / d x_j with shape (dim, dim, ...)."""
        x = np.asarray(x, dtype=float)
        lam = np.asarray(lam, dtype=float)
        tail = np.broadcast_shapes(x.shape[1:], lam.shape)
        out = np.zeros((self.dim, self.dim) + tail)
        for term in self.terms:
            base = term.coeff * lam**term.lam_power * _forcing_value(term.forcing, term.omega, t)
            for j, e in term.exponents:
                v = base * e * x[j] ** (e - 1)
                for jj, ee in term.exponents:
                    if jj != j:
                        v = v * x[jj] ** ee
                out[term.target, j] += v
        return out

    def at(self, lam: float) -> "TermTable":
        """Deterministic table with the uncertain variable fixed at ``lam``."""
        rows = []
        for term in self.terms:
            c = term.coeff * lam**term.lam_power
            if c != 0.0:
                rows.append((term.target, c, term.factors, term.forcing, term.omega))
        return TermTable.build(self.dim, rows)


def linear_field(A, names: Sequence[str] = ()) -> PolynomialVectorField:
    """Field for dx/dt = A x."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    terms = [Term(i, A[i, j], 0, {j: 1}) for i in range(A.shape[0]) for j in range(A.shape[1])
             if A[i, j] != 0.0]
    return PolynomialVectorField(A.shape[0], tuple(terms), names=tuple(names))


class TermTable(NamedTuple):
    """Flattened monomial list in the layout the compiled kernels expect."""

    dim: int
    target: np.ndarray
    coeff: np.ndarray
    fkind: np.ndarray
    omega: np.ndarray
    fptr: np.ndarray
    fidx: np.ndarray

    @classmethod
    def build(cls, dim: int, rows) -> "TermTable":
        rows = list(rows)
        target = np.array([r[0] for r in rows], dtype=np.int64)
        coeff = np.array([r[1] for r in rows], dtype=float)
        fkind = np.array([_FKIND[r[3]] for r in rows], dtype=np.int64)
        omega = np.array([r[4] for r in rows], dtype=float)
        lengths = [len(r[2]) for r in rows]
        fptr = np.zeros(len(rows) + 1, dtype=np.int64)
        fptr[1:] = np.cumsum(lengths)
        fidx = np.array([j for r in rows for j in r[2]], dtype=np.int64)
        return cls(dim, target, coeff, fkind, omega, fptr, fidx)

    @property
    def arrays(self):
        return self.target, self.coeff, self.fkind, self.omega, self.fptr, self.fidx

    @property
    def is_autonomous(self) -> bool:
        return not np.any(self.fkind)

    def rhs(self, t: float, x) -> np.ndarray:
        x = np.ascontiguousarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise ValueError(f"state has shape {x.shape}, expected ({self.dim},)")
        out = np.empty(self.dim)
        _kernels.eval_terms(float(t), x, *self.arrays, out)
        return out

    def jacobian(self, t: float, x) -> np.ndarray:
        x = np.ascontiguousarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise ValueError(f"state has shape {x.shape}, expected ({self.dim},)")
        jac = np.empty((self.dim, self.dim))
        _kernels.jac_terms(float(t), x, *self.arrays, jac)
        return jac

    def select_rows(self, rows) -> "TermTable":
        keep = np.isin(self.target, np.asarray(list(rows), dtype=np.int64))
        out = []
        for m in np.flatnonzero(keep):
            kind = ("none", "cos", "sin")[self.fkind[m]]
            out.append((self.target[m], self.coeff[m],
                        tuple(self.fidx[self.fptr[m]:self.fptr[m + 1]]), kind, self.omega[m]))
        return TermTable.build(self.dim, out)


@dataclass(frozen=True)
class ExpandedTerm:
    target: int
    coeff: float
    factors: tuple[int, ...]
    forcing: str = "none"
    omega: float = 0.0


@dataclass(frozen=True, eq=False)
class GalerkinSystem:
    field: PolynomialVectorField
    family: BasisFamily
    mode: str
    terms: tuple[ExpandedTerm, ...] = dc_field(repr=False)

    @property
    def base_dim(self) -> int:
        return self.field.dim

    @property
    def order(self) -> int:
        return self.family.max_order

    @property
    def expanded_dim(self) -> int:
        return self.base_dim * (self.order + 1)

    def var(self, i: int, k: int) -> int:
        """Flat index of the coefficient of state component i on psi_k."""
        return k * self.base_dim + i

    @property
    def var_names(self) -> list[str]:
        return [f"{name.upper()}_{k}" for k in range(self.order + 1) for name in self.field.names]

    @property
    def canonical_vars(self) -> tuple[list[int], list[int]]:
        """Coefficient indices of (coordinates, momenta) for every canonical pair."""
        qs, ps = [], []
        for k in range(self.order + 1):
            for qi, pi in self.field.canonical:
                qs.append(self.var(qi, k))
                ps.append(self.var(pi, k))
        return qs, ps

    @cached_property
    def table(self) -> TermTable:
        return TermTable.build(self.expanded_dim,
                               ((t.target, t.coeff, t.factors, t.forcing, t.omega)
                                for t in self.terms))

    def with_terms(self, terms) -> "GalerkinSystem":
        return replace(self, terms=tuple(terms))

    def _check(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.shape != (self.expanded_dim,):
            raise ValueError(f"state has shape {X.shape}, expected ({self.expanded_dim},)")
        return X

    @cached_property
    def _pseudo_rule(self):
        r = self.order
        state_deg = max((t.degree for t in self.field.terms), default=0)
        if self.mode == LINEARIZED:
            state_deg = min(state_deg, 1)
        # linearized mode: f(mean) + J(mean) * fluctuation is degree 1 in the fluctuation
        degree = self.field.max_lam_power + state_deg * r + r
        rule = gauss_rule(self.family, nodes_for_degree(degree))
        psi = basis_matrix(self.family.kind, r, rule.nodes)
        return rule, psi

    def rhs(self, t: float, X) -> np.ndarray:
        """Pseudo-spectral evaluation: field at quadrature nodes, projected back.

        With the exact node count this equals the symbolic term list to
        round-off, and serves as an independent route to the same numbers.
        """
        X = self._check(X)
        n, r = self.base_dim, self.order
        rule, psi = self._pseudo_rule
        coef = X.reshape(r + 1, n)
        x_nodes = coef.T @ psi.T
        if self.mode == FULL:
            f = self.field.evaluate(x_nodes, rule.nodes, t)
        else:
            mean = np.broadcast_to(coef[0][:, None], x_nodes.shape)
            f = self.field.evaluate(mean, rule.nodes, t)
            jac = self.field.jacobian(mean, rule.nodes, t)
            f = f + np.einsum("ijm,jm->im", jac, x_nodes - mean)
        proj = (f * rule.weights) @ psi
        return proj.T.reshape(-1)

    def rhs_terms(self, t: float, X) -> np.ndarray:
        return self.table.rhs(t, self._check(X))

    def jacobian(self, t: float, X) -> np.ndarray:
        return self.table.jacobian(t, self._check(X))

    def divergence(self, t: float, X) -> float:
        return float(np.trace(self.jacobian(t, X)))

    def to_dict(self) -> dict:
        names = self.var_names
        return {
            "schema": SCHEMA,
            "version": SCHEMA_VERSION,
            "family": self.family.kind,
            "order": self.order,
            "mode": self.mode,
            "base_dim": self.base_dim,
            "variables": names,
            "terms": [
                {
                    "target": names[t.target],
                    "coeff": t.coeff,
                    "factors": [names[j] for j in t.factors],
                    "forcing": t.forcing,
                    "omega": t.omega,
                }
                for t in self.terms
            ],
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)


def project(field: PolynomialVectorField, family: BasisFamily, order: int | None = None,
            mode: str = FULL, prune: float = 1e-12) -> GalerkinSystem:
    """Galerkin projection of ``field`` onto ``family`` truncated at ``order``.

    For each field term and test function psi_s the product of expanded
    state factors is multiplied out; each resulting monomial gets the
    coefficient ``coeff * E[lam**d * psi_s * prod psi_k]``.  In
    ``linearized_fluctuations`` mode monomials with more than one factor of
    order k >= 1 are dropped.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    r = family.max_order if order is None else order
    if r < 0:
        raise ValueError("order must be nonnegative")
    fam = family.with_order(r)
    n = field.dim
    acc: dict = defaultdict(float)
    scale: dict = defaultdict(float)
    for term in field.terms:
        slots = term.factors
        for s in range(r + 1):
            for ks in itertools.product(range(r + 1), repeat=len(slots)):
                if mode == LINEARIZED and sum(k > 0 for k in ks) > 1:
                    continue
                e = expectation_moment(fam, ks + (s,), term.lam_power)
                if e == 0.0:
                    continue
                factors = tuple(sorted(k * n + j for j, k in zip(slots, ks)))
                key = (s * n + term.target, factors, term.forcing, term.omega)
                acc[key] += term.coeff * e
                scale[key] += abs(term.coeff * e)
    terms = [
        ExpandedTerm(target, value, factors, forcing, omega)
        for (target, factors, forcing, omega), value in sorted(acc.items())
        if abs(value) > prune * scale[(target, factors, forcing, omega)]
    ]
    return GalerkinSystem(field, fam, mode, tuple(terms))


def moments(X, base_dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Mean and variance per base coordinate from coefficient vector(s).

    ``X`` may be a single state or a (time, expanded_dim) array.
    """
    X = np.asarray(X, dtype=float)
    coef = X.reshape(X.shape[:-1] + (-1, base_dim))
    mean = coef[..., 0, :]
    var = np.sum(coef[..., 1:, :] ** 2, axis=-2)
    return mean, var


def term_key_map(doc: dict) -> dict:
    """Map (target, sorted factors, forcing, omega) -> summed coefficient for a term document."""
    out: dict = defaultdict(float)
    for t in doc["terms"]:
        omega = float(t.get("omega", 0.0))
        key = (t["target"], tuple(sorted(t["factors"])), t.get("forcing", "none"), omega)
        out[key] += float(t["coeff"])
    return dict(out)


def diff_term_lists(actual: dict, expected: dict, tol: float = 1e-12) -> list[str]:
    """Term-level differences between two term documents; empty when they agree."""
    a = term_key_map(actual)
    b = term_key_map(expected)
    lines = []
    for key in sorted(set(a) | set(b)):
        va, vb = a.get(key, 0.0), b.get(key, 0.0)
        if abs(va - vb) > tol:
            target, factors, forcing, omega = key
            mono = "*".join(factors) or "1"
            if forcing != "none":
                mono += f"*{forcing}({omega:g} t)"
            if key not in b:
                tag = "extra"
            elif key not in a:
                tag = "missing"
            else:
                tag = "coeff"
            lines.append(f"{tag:8s} d{target}/dt: {mono}  actual={va:.15g} expected={vb:.15g}")
    return lines
