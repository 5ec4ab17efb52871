"""Time integration of term-table systems.

``rk45_adaptive`` is a Dormand-Prince 5(4) pair with FSAL, weighted RMS
error norm on ``atol + rtol * |x|``, safety 0.9 and step factors clamped to
[0.2, 5].  Output times are hit exactly by shortening the step that would
cross them; nothing is interpolated.
"""
from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels
from .galerkin import GalerkinSystem, TermTable

METHODS = ("rk45_adaptive", "rk4_fixed", "stormer_verlet")


class IntegrationError(RuntimeError):
    def __init__(self, message: str, t: float):
        super().__init__(f"{message} at t = {t:.10g}")
        self.t = t


@dataclass
class IntegratorConfig:
    method: str = "rk45_adaptive"
    rtol: float = 1e-6
    atol: float = 1e-9
    h: float = 0.01
    t_span: tuple[float, float] = (0.0, 1.0)
    max_steps: int = 50_000_000
    h0: float = 0.0  # 0 selects the starting step automatically

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if self.rtol <= 0 or self.atol <= 0:
            raise ValueError("rtol and atol must be positive")
        if self.h <= 0:
            raise ValueError("fixed step h must be positive")
        t0, t1 = self.t_span
        if not t1 > t0:
            raise ValueError("t_span must be increasing")


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    n_rhs_evaluations: int = 0
    n_steps: int = 0
    n_rejected_steps: int = 0
    method: str = ""
    names: list[str] = field(default_factory=list)

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def to_csv(self, path, names=None) -> None:
        names = list(names or self.names or [f"x_{i}" for i in range(self.states.shape[1])])
        write_csv(path, ["t"] + names, np.column_stack([self.times, self.states]))

    def summary(self) -> dict:
        return {
            "method": self.method,
            "n_rhs_evaluations": int(self.n_rhs_evaluations),
            "n_steps": int(self.n_steps),
            "n_rejected_steps": int(self.n_rejected_steps),
            "t_final": float(self.times[-1]),
            "terminal_state": [float(v) for v in self.states[-1]],
        }


def write_csv(path, header, rows) -> None:
    """RFC-4180 CSV with a header row; floats in shortest round-trip form."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) for v in row])


def write_json(path, doc) -> None:
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True, default=_json_default) + "\n")


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if hasattr(obj, "__dataclass_fields__"):
        return asdict(obj)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def as_table(system) -> TermTable:
    if isinstance(system, TermTable):
        return system
    if isinstance(system, GalerkinSystem):
        return system.table
    raise TypeError("expected a GalerkinSystem or TermTable")


def _output_times(config: IntegratorConfig, t_eval) -> np.ndarray:
    t0, t1 = config.t_span
    if t_eval is None:
        return np.array([t0, t1], dtype=float)
    t_eval = np.asarray(t_eval, dtype=float)
    if t_eval.size and (np.any(np.diff(t_eval) <= 0) or t_eval[0] < t0 or t_eval[-1] > t1):
        raise ValueError("t_eval must be strictly increasing inside t_span")
    return t_eval


_STATUS = {
    _kernels.STEP_UNDERFLOW: "step size underflow",
    _kernels.NON_FINITE: "non-finite state",
    _kernels.MAX_STEPS: "maximum number of steps exceeded",
}


def _run(table: TermTable, ncol: int, config: IntegratorConfig, y0, t_eval):
    t_out = _output_times(config, t_eval)
    t0, t1 = config.t_span
    y0 = np.ascontiguousarray(y0, dtype=float)
    if not np.all(np.isfinite(y0)):
        raise ValueError("initial state must be finite")
    if config.method == "rk45_adaptive":
        Y, t, _, nfev, nacc, nrej, status = _kernels.dopri5(
            *table.arrays, table.dim, ncol, y0, float(t0), t_out, float(t1),
            config.rtol, config.atol, config.h0, np.inf, config.max_steps)
        if status != _kernels.OK:
            raise IntegrationError(_STATUS[status], t)
    elif config.method == "rk4_fixed":
        grid = t_out if t_out[-1] == t1 else np.append(t_out, t1)
        Y, nfev, nacc = _kernels.rk4_fixed(*table.arrays, table.dim, ncol, y0, float(t0), grid,
                                           config.h)
        Y = Y[: t_out.size]
        nrej = 0
        if not np.all(np.isfinite(Y)):
            bad = int(np.argmax(~np.all(np.isfinite(Y), axis=1)))
            raise IntegrationError("non-finite state", float(t_out[bad]))
    else:
        raise ValueError("use integrate_symplectic for stormer_verlet")
    return t_out, Y, int(nfev), int(nacc), int(nrej)


def integrate(system, config: IntegratorConfig, X0, t_eval=None) -> Trajectory:
    """Integrate ``system`` over ``config.t_span``.

    ``t_eval`` lists the output times (default: the two endpoints).  The
    integrator always continues to the end of ``t_span`` so counters refer
    to the whole interval.
    """
    if config.method == "stormer_verlet":
        if not isinstance(system, GalerkinSystem):
            raise TypeError("stormer_verlet needs a GalerkinSystem with canonical pairs")
        traj = integrate_symplectic(system, config.h, config.t_span, X0)
        if t_eval is not None:
            idx = np.searchsorted(traj.times, np.asarray(t_eval, dtype=float) - 1e-9 * config.h)
            traj = Trajectory(traj.times[idx], traj.states[idx], traj.n_rhs_evaluations,
                              traj.n_steps, 0, traj.method)
        return traj
    table = as_table(system)
    X0 = np.asarray(X0, dtype=float)
    if X0.shape != (table.dim,):
        raise ValueError(f"initial state has shape {X0.shape}, expected ({table.dim},)")
    t, Y, nfev, nacc, nrej = _run(table, 0, config, X0, t_eval)
    names = system.var_names if isinstance(system, GalerkinSystem) else []
    return Trajectory(t, Y, nfev, nacc, nrej, config.method, names)


def separable_split(system: GalerkinSystem) -> tuple[TermTable, TermTable]:
    """Split into (coordinate rows driven by momenta, momentum rows driven by coordinates)."""
    qs, ps = system.canonical_vars
    if not qs:
        raise ValueError("system has no canonical coordinate pairs")
    qset, pset = set(qs), set(ps)
    if len(qset) + len(pset) != system.expanded_dim:
        raise ValueError("canonical pairs do not cover the state")
    for t in system.terms:
        if t.forcing != "none":
            raise ValueError("symplectic integration needs an autonomous Hamiltonian system")
        drivers = pset if t.target in qset else qset
        if any(j not in drivers for j in t.factors):
            raise ValueError("system is not separable: "
                             f"row {system.var_names[t.target]} depends on its own kind")
    table = system.table
    return table.select_rows(qs), table.select_rows(ps)


def integrate_symplectic(system: GalerkinSystem, h: float, t_span, X0, stride: int = 1
                         ) -> Trajectory:
    """Stormer-Verlet (kick-drift-kick) for a separable Hamiltonian system.

    Records every ``stride``-th step.  A negative ``h`` integrates backwards.
    """
    qtab, ptab = separable_split(system)
    t0, t1 = t_span
    if h == 0:
        raise ValueError("step must be nonzero")
    nsteps = int(round((t1 - t0) / h))
    if nsteps < 0:
        raise ValueError("step sign does not match t_span")
    X0 = np.ascontiguousarray(X0, dtype=float)
    if X0.shape != (system.expanded_dim,):
        raise ValueError("initial state has the wrong dimension")
    T, X, nfev = _kernels.leapfrog(*qtab.arrays, *ptab.arrays, X0, float(t0), float(h), nsteps,
                                   int(stride))
    if not np.all(np.isfinite(X[-1])):
        raise IntegrationError("non-finite state", float(T[-1]))
    return Trajectory(T, X, int(nfev), nsteps, 0, "stormer_verlet", system.var_names)


def integrate_variational(system, config: IntegratorConfig, X0, M0=None, t_eval=None
                          ) -> tuple[Trajectory, np.ndarray]:
    """State and tangent matrix: Phi' = J(x, t) Phi with the analytic Jacobian.

    Returns the trajectory and Phi at each output time, shape (T, d, m).
    """
    table = as_table(system)
    d = table.dim
    M0 = np.eye(d) if M0 is None else np.asarray(M0, dtype=float)
    if M0.ndim == 1:
        M0 = M0[:, None]
    if M0.shape[0] != d:
        raise ValueError("tangent matrix must have one row per state component")
    if config.method == "stormer_verlet":
        raise ValueError("variational integration uses rk45_adaptive or rk4_fixed")
    ncol = M0.shape[1]
    y0 = np.concatenate([np.asarray(X0, dtype=float), M0.ravel()])
    t, Y, nfev, nacc, nrej = _run(table, ncol, config, y0, t_eval)
    names = system.var_names if isinstance(system, GalerkinSystem) else []
    traj = Trajectory(t, Y[:, :d], nfev, nacc, nrej, config.method, names)
    return traj, Y[:, d:].reshape(len(t), d, ncol)
