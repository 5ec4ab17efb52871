"""Config-driven command line runner.

Every command reads an optional TOML config, applies ``--set section.key=value``
overrides, writes CSV data plus a ``summary.json`` that echoes the full
config, and exits with 0 on success, 2 on invalid input and 3 when an
integration fails.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np
import tomli

from .analysis import largest_lyapunov, poincare
from .galerkin import MODES, moments, project
from .golden import GOLDEN_FILES, GoldenMismatch, check_against_golden
from .hamiltonian import average_hamiltonian, check_hamiltonian_structure
from .harmonic import HarmonicSetup, exact_coefficients, liouville_contrast
from .integrate import IntegrationError, IntegratorConfig, integrate, write_csv, write_json
from .models import MODEL_NAMES, REFERENCE_LYAPUNOV, make_model
from .studies import tracking_study, two_time_study

SCHEMA_VERSION = 1
EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3
COMMANDS = ("expand", "run", "compare-mc", "lyapunov", "theorem1", "harmonic")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentSection:
    name: str = "experiment"
    output_dir: str = "runs"


@dataclass
class ModelSection:
    name: str = "duffing_forced"
    overrides: dict = field(default_factory=dict)
    ic: list | None = None


@dataclass
class BasisSection:
    order: int = 1
    mode: str = "full"


@dataclass
class IntegratorSection:
    method: str = "rk45_adaptive"
    rtol: float = 1e-6
    atol: float = 1e-9
    h: float = 0.01
    horizon: float = 100.0


@dataclass
class AnalysisSection:
    n_mc: int = 1000
    seed: int = 0
    phi0: float = 0.0
    n_points: int = 1000
    sample_dt: float = 0.1
    threshold: float = 0.5
    eps_list: list = field(default_factory=lambda: [0.1, 0.01, 0.001])
    chi_max: float = 20.0
    renorm_dt: float = 1.0
    transient_fraction: float = 0.05
    fd_step: float = 1e-5
    samples: int = 100
    orders: list = field(default_factory=lambda: [1, 2, 3])
    n_times: int = 601


_SECTIONS = {
    "experiment": ExperimentSection,
    "model": ModelSection,
    "basis": BasisSection,
    "integrator": IntegratorSection,
    "analysis": AnalysisSection,
}


@dataclass
class ExperimentConfig:
    experiment: ExperimentSection = field(default_factory=ExperimentSection)
    model: ModelSection = field(default_factory=ModelSection)
    basis: BasisSection = field(default_factory=BasisSection)
    integrator: IntegratorSection = field(default_factory=IntegratorSection)
    analysis: AnalysisSection = field(default_factory=AnalysisSection)

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        unknown = set(doc) - set(_SECTIONS)
        if unknown:
            raise ConfigError(f"unknown config section(s): {sorted(unknown)}")
        parts = {}
        for name, section in _SECTIONS.items():
            values = doc.get(name, {})
            if not isinstance(values, dict):
                raise ConfigError(f"[{name}] must be a table")
            allowed = {f.name for f in fields(section)}
            bad = set(values) - allowed
            if bad:
                raise ConfigError(f"unknown key(s) in [{name}]: {sorted(bad)}")
            parts[name] = section(**values)
        cfg = cls(**parts)
        cfg.validate()
        return cfg

    def to_dict(self) -> dict:
        return asdict(self)

    def validate(self) -> None:
        if self.model.name not in MODEL_NAMES:
            raise ConfigError(f"unknown model {self.model.name!r}")
        if self.basis.mode not in MODES:
            raise ConfigError(f"basis.mode must be one of {MODES}")
        if not isinstance(self.basis.order, int) or self.basis.order < 0:
            raise ConfigError("basis.order must be a nonnegative integer")
        if self.integrator.horizon <= 0:
            raise ConfigError("integrator.horizon must be positive")
        if not isinstance(self.model.overrides, dict):
            raise ConfigError("model.overrides must be a table")
        a = self.analysis
        if a.n_mc < 1 or a.samples < 1 or a.n_points < 0 or a.n_times < 2:
            raise ConfigError("analysis counts out of range")
        if a.sample_dt <= 0 or a.renorm_dt <= 0 or a.chi_max <= 0 or a.fd_step <= 0:
            raise ConfigError("analysis step sizes must be positive")
        if not 0 <= a.transient_fraction < 1:
            raise ConfigError("analysis.transient_fraction must lie in [0, 1)")

    def integrator_config(self, t_end: float | None = None) -> IntegratorConfig:
        i = self.integrator
        return IntegratorConfig(i.method, float(i.rtol), float(i.atol), float(i.h),
                                (0.0, float(t_end or i.horizon)))

    def build_model(self):
        try:
            return make_model(self.model.name, self.model.overrides)
        except KeyError as exc:
            raise ConfigError(str(exc.args[0])) from exc

    @property
    def run_dir(self) -> Path:
        return Path(self.experiment.output_dir) / self.experiment.name


def _parse_value(text: str):
    try:
        return tomli.loads(f"v = {text}")["v"]
    except tomli.TOMLDecodeError:
        return text


def apply_overrides(doc: dict, assignments) -> dict:
    """Apply ``section.key=value`` strings; ``model.overrides.lambda0=-2`` reaches nested tables."""
    for item in assignments or ():
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form section.key=value")
        path, value = item.split("=", 1)
        keys = path.strip().split(".")
        if len(keys) < 2:
            raise ConfigError(f"override {item!r} needs a section and a key")
        node = doc
        for k in keys[:-1]:
            node = node.setdefault(k, {})
            if not isinstance(node, dict):
                raise ConfigError(f"override {item!r} descends into a non-table")
        node[keys[-1]] = _parse_value(value.strip())
    return doc


def load_config(path=None, assignments=()) -> ExperimentConfig:
    doc = {}
    if path is not None:
        try:
            with open(path, "rb") as fh:
                doc = tomli.load(fh)
        except (OSError, tomli.TOMLDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        return ExperimentConfig.from_dict(apply_overrides(doc, assignments))
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def _summary(cfg: ExperimentConfig, command: str, results: dict) -> dict:
    return {"schema_version": SCHEMA_VERSION, "command": command, "config": cfg.to_dict(),
            "results": results}


def _finish(cfg, command, results, out: Path) -> dict:
    doc = _summary(cfg, command, results)
    write_json(out / "summary.json", doc)
    return doc


def cmd_expand(cfg: ExperimentConfig, out: Path, check_paper: bool = False) -> int:
    model = cfg.build_model()
    system = project(model.field, model.family(cfg.basis.order), mode=cfg.basis.mode)
    write_json(out / "system.json", system.to_dict())
    results = {"n_terms": len(system.terms), "expanded_dim": system.expanded_dim}
    status = EXIT_OK
    if check_paper:
        if model.name not in GOLDEN_FILES:
            raise ConfigError(f"no reference term list for {model.name!r}")
        try:
            diff = check_against_golden(system, model.name, model.params)
        except GoldenMismatch as exc:
            raise ConfigError(str(exc)) from exc
        results["check_paper"] = {"passed": not diff, "diff": diff}
        print("check-paper:", "PASS" if not diff else "FAIL")
        for line in diff:
            print("  " + line)
        if diff:
            status = EXIT_INVALID
    _finish(cfg, "expand", results, out)
    return status


def cmd_run(cfg: ExperimentConfig, out: Path) -> int:
    model = cfg.build_model()
    r = cfg.basis.order
    system = project(model.field, model.family(r), mode=cfg.basis.mode)
    horizon = cfg.integrator.horizon
    n = int(round(horizon / cfg.analysis.sample_dt))
    times = np.linspace(0.0, horizon, n + 1)
    config = cfg.integrator_config()
    X0 = model.expanded_ic(r, cfg.model.ic)
    traj = integrate(system, config, X0, t_eval=times)
    traj.to_csv(out / "trajectory.csv")
    mean, var = moments(traj.states, model.field.dim)
    names = model.field.names
    header = ["t"] + [f"mean_{v}" for v in names] + [f"std_{v}" for v in names]
    write_csv(out / "moments.csv", header, np.column_stack([times, mean, np.sqrt(var)]))
    results = {"trajectory": traj.summary(), "expanded_initial_state": X0.tolist()}
    if model.forcing_omega:
        n_pts = min(cfg.analysis.n_points,
                    int(np.floor((horizon * model.forcing_omega - cfg.analysis.phi0)
                                 / (2 * np.pi))) + 1)
        sec = poincare(system, config, X0, model.forcing_omega, cfg.analysis.phi0, n_pts)
        write_csv(out / "section.csv", ["t"] + system.var_names,
                  np.column_stack([sec.times, sec.points]))
        results["section"] = {"n_points": int(sec.times.size), "phase": sec.phase,
                              "n_rhs_evaluations": sec.n_rhs_evaluations}
    _finish(cfg, "run", results, out)
    return EXIT_OK


def cmd_compare_mc(cfg: ExperimentConfig, out: Path) -> int:
    a = cfg.analysis
    config = cfg.integrator_config()
    if cfg.model.name.startswith("twotime"):
        points = two_time_study(tuple(float(e) for e in a.eps_list), chi_max=a.chi_max,
                                n_mc=a.n_mc, seed=a.seed, order=cfg.basis.order,
                                mode=cfg.basis.mode, config=config,
                                overrides=cfg.model.overrides, threshold=a.threshold)
        table = []
        for p in points:
            write_csv(out / f"twotime_eps_{p.eps:g}.csv",
                      ["t", "chi", "mean_error_averaged", "std_error_averaged",
                       "mean_error_full", "std_error_full"],
                      np.column_stack([p.times, p.eps * p.times, p.averaged_error.mean_error,
                                       p.averaged_error.std_error, p.full_error.mean_error,
                                       p.full_error.std_error]))
            table.append({"eps": p.eps, "max_mean_error_averaged": p.max_mean_error_averaged,
                          "max_mean_error_full": p.max_mean_error_full,
                          "n_rhs_full": p.n_rhs_full, "n_rhs_averaged": p.n_rhs_averaged})
        write_csv(out / "twotime_summary.csv", ["eps", "max_mean_error_averaged",
                                                "max_mean_error_full", "n_rhs_full",
                                                "n_rhs_averaged"],
                  [[row[k] for k in ("eps", "max_mean_error_averaged", "max_mean_error_full",
                                     "n_rhs_full", "n_rhs_averaged")] for row in table])
        _finish(cfg, "compare-mc", {"two_time": table}, out)
        return EXIT_OK
    res = tracking_study(cfg.model.name, cfg.model.ic, cfg.basis.order, a.n_mc, a.seed,
                         cfg.integrator.horizon, a.sample_dt, a.threshold, config,
                         cfg.model.overrides, cfg.basis.mode)
    e = res.error
    write_csv(out / "moment_error.csv",
              ["t", "pc_mean", "mc_mean", "mean_error", "pc_std", "mc_std", "std_error"],
              np.column_stack([e.times, res.pc_mean, res.mc.mean[:, 0], e.mean_error,
                               res.pc_std, res.mc.std[:, 0], e.std_error]))
    _finish(cfg, "compare-mc", {"divergence_time": e.divergence_time,
                                "max_mean_error": float(np.max(e.mean_error)),
                                "max_std_error": float(np.max(e.std_error)),
                                "n_samples": res.mc.n_samples, "seed": res.mc.seed}, out)
    return EXIT_OK


def cmd_lyapunov(cfg: ExperimentConfig, out: Path) -> int:
    model = cfg.build_model()
    r = cfg.basis.order
    system = project(model.field, model.family(r), mode=cfg.basis.mode)
    horizon = cfg.integrator.horizon
    est = largest_lyapunov(system, cfg.integrator_config(), model.expanded_ic(r, cfg.model.ic),
                           horizon, cfg.analysis.renorm_dt,
                           cfg.analysis.transient_fraction * horizon)
    write_csv(out / "lyapunov_series.csv", ["t", "exponent"],
              np.column_stack([est.times, est.series]))
    _finish(cfg, "lyapunov", {"exponent": est.exponent, "horizon": est.horizon,
                              "renorm_dt": est.renorm_dt, "transient": est.transient,
                              "n_rhs_evaluations": est.n_rhs_evaluations,
                              "reference_values": REFERENCE_LYAPUNOV}, out)
    print(f"largest Lyapunov exponent: {est.exponent:.6g}")
    return EXIT_OK


def cmd_theorem1(cfg: ExperimentConfig, out: Path) -> int:
    model = cfg.build_model()
    if model.hamiltonian is None:
        raise ConfigError(f"model {model.name!r} is not Hamiltonian")
    rows = []
    rng = np.random.default_rng(cfg.analysis.seed)
    for r in cfg.analysis.orders:
        system = project(model.field, model.family(int(r)), mode=cfg.basis.mode)
        ah = average_hamiltonian(model, int(r))
        res = check_hamiltonian_structure(ah, system, cfg.analysis.samples, cfg.analysis.fd_step,
                                          seed=cfg.analysis.seed)
        div = max(abs(system.divergence(0.0, rng.uniform(-2, 2, system.expanded_dim)))
                  for _ in range(cfg.analysis.samples))
        rows.append([int(r), res, div])
        print(f"order {r}: max residual {res:.3e}, max |divergence| {div:.3e}")
    write_csv(out / "theorem1.csv", ["order", "max_residual", "max_abs_divergence"], rows)
    _finish(cfg, "theorem1", {"orders": [
        {"order": o, "max_residual": res, "max_abs_divergence": div} for o, res, div in rows]}, out)
    return EXIT_OK


def cmd_harmonic(cfg: ExperimentConfig, out: Path) -> int:
    model = cfg.build_model()
    if model.name != "harmonic_uncertain_freq":
        raise ConfigError("the harmonic command needs model harmonic_uncertain_freq")
    setup = HarmonicSetup(model.params["omega0"], model.params["alpha"], cfg.basis.order)
    i = cfg.integrator
    rep = liouville_contrast(setup, i.horizon,
                             IntegratorConfig(i.method, i.rtol, i.atol, i.h, (0.0, i.horizon)),
                             cfg.analysis.n_times)
    supQ = np.array([np.max(np.abs(exact_coefficients(setup, t)[0])) for t in rep.times])
    write_csv(out / "harmonic.csv",
              ["t", "exact_norm", "pc_norm", "mismatch", "det_phi", "sup_abs_Q_times_t"],
              np.column_stack([rep.times, rep.exact_norm, rep.pc_norm, rep.mismatch, rep.det_phi,
                               supQ * rep.times]))
    _finish(cfg, "harmonic", {"t_star": rep.t_star, "max_det_error": rep.max_det_error,
                              "final_exact_norm": float(rep.exact_norm[-1]),
                              "initial_exact_norm": float(rep.exact_norm[0]),
                              "min_pc_norm": float(np.min(rep.pc_norm))}, out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gpcdyn", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="TOML experiment config")
        p.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                       help="override a config field (repeatable)")
        p.add_argument("--model", help="shorthand for --set model.name=...")
        p.add_argument("--order", type=int, help="shorthand for --set basis.order=...")
        p.add_argument("--mode", help="shorthand for --set basis.mode=...")
        p.add_argument("--output-dir", help="shorthand for --set experiment.output_dir=...")
        p.add_argument("--name", help="shorthand for --set experiment.name=...")
        if name == "expand":
            p.add_argument("--check-paper", action="store_true",
                           help="diff the term list against the bundled reference system")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    sets = list(args.set)
    for flag, key in (("model", "model.name"), ("order", "basis.order"), ("mode", "basis.mode"),
                      ("output_dir", "experiment.output_dir"), ("name", "experiment.name")):
        value = getattr(args, flag)
        if value is not None:
            sets.append(f"{key}={value}" if flag == "order" else f'{key}="{value}"')
    try:
        cfg = load_config(args.config, sets)
        out = cfg.run_dir
        out.mkdir(parents=True, exist_ok=True)
        if args.command == "expand":
            return cmd_expand(cfg, out, args.check_paper)
        handler = {"run": cmd_run, "compare-mc": cmd_compare_mc, "lyapunov": cmd_lyapunov,
                   "theorem1": cmd_theorem1, "harmonic": cmd_harmonic}[args.command]
        return handler(cfg, out)
    except IntegrationError as exc:
        print(f"error: integration failed: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigError, ValueError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
