"""Built-in oscillator models with their default parameters.

Every uncertain quantity is an affine map ``mean + scale * lam`` of a
standardized variable: a unit Gaussian for Hermite models, U(-1, 1) for
Legendre models.  Field terms store powers of that standardized variable.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Callable

import numpy as np

from .basis import HERMITE, LEGENDRE, BasisFamily
from .galerkin import PolynomialVectorField, Term

GAUSSIAN = "gaussian"
UNIFORM = "uniform"


@dataclass(frozen=True)
class Uncertainty:
    kind: str  # "parameter" or "initial_condition"
    distribution: str  # "gaussian" or "uniform"
    name: str  # parameter name, or coordinate name for initial conditions
    mean: float
    scale: float  # standard deviation (gaussian) or half-width (uniform)

    @property
    def family_kind(self) -> str:
        return HERMITE if self.distribution == GAUSSIAN else LEGENDRE

    def draw(self, rng: np.random.Generator) -> float:
        """One standardized sample."""
        if self.distribution == GAUSSIAN:
            return float(rng.standard_normal())
        return float(rng.uniform(-1.0, 1.0))


@dataclass(frozen=True)
class HamiltonianSpec:
    """H(q, p; lam) as monomials ``(coeff, lam_power, {state index: power})``."""

    terms: tuple
    canonical: tuple[tuple[int, int], ...]
    separable: bool = True

    def evaluate(self, x, lam) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        lam = np.asarray(lam, dtype=float)
        out = 0.0
        for coeff, lp, exps in self.terms:
            v = coeff * lam**lp
            for j, e in exps.items():
                v = v * x[j] ** e
            out = out + v
        return np.asarray(out)

    def vector_field_terms(self) -> list[Term]:
        """Hamilton's equations q' = dH/dp, p' = -dH/dq as field terms."""
        partner = {}
        for qi, pi in self.canonical:
            partner[pi] = (qi, 1.0)
            partner[qi] = (pi, -1.0)
        terms = []
        for coeff, lp, exps in self.terms:
            for j, e in exps.items():
                row, sign = partner[j]
                new = dict(exps)
                if e == 1:
                    del new[j]
                else:
                    new[j] = e - 1
                terms.append(Term(row, sign * coeff * e, lp, new))
        return terms


@dataclass(frozen=True)
class ModelSpec:
    name: str
    field: PolynomialVectorField
    params: dict
    default_ic: tuple[float, ...]
    uncertain: Uncertainty | None
    hamiltonian: HamiltonianSpec | None = None
    forcing_omega: float | None = None
    builder: Callable | None = dc_field(default=None, repr=False, compare=False)

    @property
    def family_kind(self) -> str:
        return self.uncertain.family_kind if self.uncertain else HERMITE

    def family(self, order: int) -> BasisFamily:
        return BasisFamily(self.family_kind, order)

    def sample_table(self, lam: float):
        """Deterministic term table for one standardized sample."""
        if self.uncertain is not None and self.uncertain.kind == "parameter":
            return self.field.at(lam)
        return self.field.at(0.0)

    def sample_ic(self, lam: float, ic=None) -> np.ndarray:
        x0 = np.array(self.default_ic if ic is None else ic, dtype=float)
        u = self.uncertain
        if u is not None and u.kind == "initial_condition":
            x0[self.field.names.index(u.name)] += u.scale * lam
        return x0

    def expanded_ic(self, order: int, ic=None) -> np.ndarray:
        """gPC coefficients of the initial state: the mean in the psi_0 block.

        An uncertain initial coordinate ``mean + scale * lam`` adds ``scale``
        on psi_1, since psi_1 = lam for both families up to normalisation.
        """
        n = self.field.dim
        X0 = np.zeros(n * (order + 1))
        X0[:n] = self.default_ic if ic is None else ic
        u = self.uncertain
        if u is not None and u.kind == "initial_condition" and order >= 1 and u.scale != 0.0:
            i = self.field.names.index(u.name)
            # lam = psi_1 for Hermite; lam = psi_1 / sqrt(3) for Legendre
            X0[n + i] = u.scale if self.family_kind == HERMITE else u.scale / np.sqrt(3.0)
        return X0


def _duffing_terms(lambda0: float, sigma: float) -> list[Term]:
    # p' = -(lambda0 + sigma lam) q - q^3
    terms = [Term(0, 1.0, 0, {1: 1}), Term(1, -lambda0, 0, {0: 1})]
    if sigma != 0.0:
        terms.append(Term(1, -sigma, 1, {0: 1}))
    terms.append(Term(1, -1.0, 0, {0: 3}))
    return terms


def _duffing_hamiltonian(lambda0: float, sigma: float) -> HamiltonianSpec:
    terms = [(0.5, 0, {1: 2}), (0.5 * lambda0, 0, {0: 2})]
    if sigma != 0.0:
        terms.append((0.5 * sigma, 1, {0: 2}))
    terms.append((0.25, 0, {0: 4}))
    return HamiltonianSpec(tuple(terms), ((0, 1),))


def _duffing_unforced(p):
    terms = _duffing_terms(p["lambda0"], p["sigma"])
    field = PolynomialVectorField(2, tuple(terms), "eta", ("q", "p"), ((0, 1),))
    unc = Uncertainty("parameter", GAUSSIAN, "lambda", p["lambda0"], p["sigma"])
    return field, unc, _duffing_hamiltonian(p["lambda0"], p["sigma"]), None


def _forcing_terms(p) -> list[Term]:
    out = []
    if p["delta"] != 0.0:
        out.append(Term(1, -p["delta"], 0, {1: 1}))
    if p["gamma"] != 0.0:
        out.append(Term(1, p["gamma"], 0, {}, "cos", p["omega"]))
    return out


def _duffing_forced(p):
    terms = _duffing_terms(p["lambda0"], p["sigma"]) + _forcing_terms(p)
    field = PolynomialVectorField(2, tuple(terms), "eta", ("q", "p"), ((0, 1),))
    unc = Uncertainty("parameter", GAUSSIAN, "lambda", p["lambda0"], p["sigma"])
    return field, unc, None, p["omega"]


def _duffing_uncertain_ic(p):
    terms = _duffing_terms(p["lambda0"], 0.0) + _forcing_terms(p)
    field = PolynomialVectorField(2, tuple(terms), "eta", ("q", "p"), ((0, 1),))
    unc = Uncertainty("initial_condition", GAUSSIAN, "q", 1.0, p["sigma"])
    return field, unc, None, p["omega"]


def _harmonic(p):
    # omega(lam) = omega0 + alpha lam, lam ~ U(-1, 1); p' = -omega^2 q
    w0, a = p["omega0"], p["alpha"]
    terms = [Term(0, 1.0, 0, {1: 1}), Term(1, -w0 * w0, 0, {0: 1})]
    hterms = [(0.5, 0, {1: 2}), (0.5 * w0 * w0, 0, {0: 2})]
    if a != 0.0:
        terms += [Term(1, -2.0 * w0 * a, 1, {0: 1}), Term(1, -a * a, 2, {0: 1})]
        hterms += [(w0 * a, 1, {0: 2}), (0.5 * a * a, 2, {0: 2})]
    field = PolynomialVectorField(2, tuple(terms), "lam", ("q", "p"), ((0, 1),))
    unc = Uncertainty("parameter", UNIFORM, "omega", w0, a)
    return field, unc, HamiltonianSpec(tuple(hterms), ((0, 1),)), None


def _twotime_full(p):
    # x' = y; y' = -x - eps delta y - eps beta x^3 + eps (gamma0 + sigma lam) cos(omega t)
    e = p["eps"]
    terms = [Term(0, 1.0, 0, {1: 1}), Term(1, -1.0, 0, {0: 1})]
    if p["delta"] != 0.0:
        terms.append(Term(1, -e * p["delta"], 0, {1: 1}))
    terms.append(Term(1, -e * p["beta"], 0, {0: 3}))
    terms.append(Term(1, e * p["gamma0"], 0, {}, "cos", p["omega"]))
    if p["sigma"] != 0.0:
        terms.append(Term(1, e * p["sigma"], 1, {}, "cos", p["omega"]))
    field = PolynomialVectorField(2, tuple(terms), "eta", ("x", "y"))
    unc = Uncertainty("parameter", GAUSSIAN, "gamma", p["gamma0"], p["sigma"])
    return field, unc, None, p["omega"]


def _twotime_averaged(p):
    # 2A' = -delta A + 3/4 beta B (A^2 + B^2);  2B' = -delta B - 3/4 beta A (A^2 + B^2) + gamma
    d, b = p["delta"], p["beta"]
    terms = []
    if d != 0.0:
        terms += [Term(0, -d / 2, 0, {0: 1}), Term(1, -d / 2, 0, {1: 1})]
    terms += [
        Term(0, 3 * b / 8, 0, {0: 2, 1: 1}),
        Term(0, 3 * b / 8, 0, {1: 3}),
        Term(1, -3 * b / 8, 0, {0: 3}),
        Term(1, -3 * b / 8, 0, {0: 1, 1: 2}),
        Term(1, p["gamma0"] / 2, 0, {}),
    ]
    if p["sigma"] != 0.0:
        terms.append(Term(1, p["sigma"] / 2, 1, {}))
    field = PolynomialVectorField(2, tuple(terms), "eta", ("a", "b"))
    unc = Uncertainty("parameter", GAUSSIAN, "gamma", p["gamma0"], p["sigma"])
    return field, unc, None, None


_REGISTRY = {
    "duffing_unforced": (_duffing_unforced, {"lambda0": -1.0, "sigma": 0.1}, (1.0, 0.0)),
    "duffing_forced": (
        _duffing_forced,
        {"lambda0": -1.0, "sigma": 0.1, "delta": 0.2, "gamma": 0.3, "omega": 1.0},
        (1.0, 0.0),
    ),
    "duffing_uncertain_ic": (
        _duffing_uncertain_ic,
        {"lambda0": -1.0, "sigma": 0.1, "delta": 0.2, "gamma": 0.3, "omega": 1.0},
        (1.0, 0.0),
    ),
    "harmonic_uncertain_freq": (_harmonic, {"omega0": 1.0, "alpha": 0.25}, (1.0, 0.0)),
    "twotime_full": (
        _twotime_full,
        {"eps": 0.01, "delta": 0.0, "beta": 1.0, "gamma0": 1.0, "sigma": 0.1, "omega": 1.0},
        (2.0, 0.0),
    ),
    "twotime_averaged": (
        _twotime_averaged,
        {"eps": 0.01, "delta": 0.0, "beta": 1.0, "gamma0": 1.0, "sigma": 0.1},
        (2.0, 0.0),
    ),
}

MODEL_NAMES = tuple(_REGISTRY)

# values quoted in the source study; reference metadata only
REFERENCE_LYAPUNOV = {"nominal": 0.93, "pc_parameter": 0.73, "pc_initial_condition": 0.85}


def make_model(name: str, overrides: dict | None = None) -> ModelSpec:
    """Build a named model, applying parameter ``overrides`` to its defaults."""
    if name not in _REGISTRY:
        raise KeyError(f"unknown model {name!r}; expected one of {MODEL_NAMES}")
    build, defaults, ic = _REGISTRY[name]
    params = dict(defaults)
    for key, value in (overrides or {}).items():
        if key not in params:
            raise KeyError(f"model {name!r} has no parameter {key!r}")
        params[key] = float(value)
    field, unc, ham, omega = build(params)
    return ModelSpec(name, field, params, ic, unc, ham, omega, build)
