"""Intrusive generalized polynomial chaos for polynomial ODEs with one uncertain input."""
from .basis import HERMITE, LEGENDRE, BasisFamily, QuadratureRule, eval_basis, expectation_moment, gauss_rule
from .galerkin import (FULL, LINEARIZED, GalerkinSystem, PolynomialVectorField, Term, moments,
                       project)
from .models import MODEL_NAMES, ModelSpec, make_model
from .hamiltonian import AverageHamiltonian, average_hamiltonian, check_hamiltonian_structure
from .integrate import (IntegrationError, IntegratorConfig, Trajectory, integrate,
                        integrate_symplectic, integrate_variational)
from .analysis import (EnsembleStats, LyapunovEstimate, PoincareSection, largest_lyapunov,
                       moment_error, monte_carlo, poincare)
from .harmonic import HarmonicSetup, exact_coefficients, legendre_B, liouville_contrast

__all__ = [
    "HERMITE", "LEGENDRE", "BasisFamily", "QuadratureRule", "eval_basis", "expectation_moment",
    "gauss_rule", "FULL", "LINEARIZED", "GalerkinSystem", "PolynomialVectorField", "Term",
    "moments", "project", "MODEL_NAMES", "ModelSpec", "make_model", "AverageHamiltonian",
    "average_hamiltonian", "check_hamiltonian_structure", "IntegrationError", "IntegratorConfig",
    "Trajectory", "integrate", "integrate_symplectic", "integrate_variational", "EnsembleStats",
    "LyapunovEstimate", "PoincareSection", "largest_lyapunov", "moment_error", "monte_carlo",
    "poincare", "HarmonicSetup", "exact_coefficients", "legendre_B", "liouville_contrast",
]
