"""Split the averaged-PC error of the two-time study into averaging and truncation parts.

For each eps: deterministic averaging error (mean-parameter trajectories),
Monte Carlo of the original versus Monte Carlo of the averaged equations
(averaging error of the statistics), and averaged-PC versus Monte Carlo of
the averaged equations (pure truncation error), all at t = 2 pi n.
"""
import argparse

import numpy as np

from gpcdyn.analysis import monte_carlo
from gpcdyn.galerkin import FULL, LINEARIZED, moments, project
from gpcdyn.integrate import IntegratorConfig, integrate
from gpcdyn.models import make_model


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--eps", type=float, nargs="*", default=[0.1, 0.01])
    p.add_argument("--chi-max", type=float, default=20.0)
    p.add_argument("--n-mc", type=int, default=1000)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--orders", type=int, nargs="*", default=[1, 3, 6])
    args = p.parse_args()
    for eps in args.eps:
        times = 2 * np.pi * np.arange(int(np.floor(args.chi_max / eps / (2 * np.pi))) + 1)
        chi = eps * times
        full = make_model("twotime_full", {"eps": eps})
        avg = make_model("twotime_averaged", {"eps": eps})
        fcfg = IntegratorConfig(t_span=(0.0, times[-1]))
        acfg = IntegratorConfig(t_span=(0.0, chi[-1]))
        det_f = integrate(full.field.at(0.0), fcfg, np.array(full.default_ic), times).states
        det_a = integrate(avg.field.at(0.0), acfg, np.array(avg.default_ic), chi).states
        mc_f = monte_carlo(full, args.n_mc, args.seed, times, fcfg)
        mc_a = monte_carlo(avg, args.n_mc, args.seed, chi, acfg)
        print(f"eps = {eps:g}")
        print(f"  deterministic averaging error   {np.max(np.abs(det_f[:, 0] - det_a[:, 0])):.3f}")
        print(f"  MC original vs MC averaged      mean {np.max(np.abs(mc_f.mean - mc_a.mean)[:, 0]):.3f}"
              f"  std {np.max(np.abs(mc_f.std - mc_a.std)[:, 0]):.3f}")
        for mode in (LINEARIZED, FULL):
            for r in args.orders:
                s = project(avg.field, avg.family(r), mode=mode)
                tr = integrate(s, acfg, avg.expanded_ic(r), chi)
                mean, var = moments(tr.states, 2)
                print(f"  PC averaged ({mode}, r={r}) vs MC averaged  "
                      f"mean {np.max(np.abs(mean[:, 0] - mc_a.mean[:, 0])):.3f}  "
                      f"std {np.max(np.abs(np.sqrt(var[:, 0]) - mc_a.std[:, 0])):.3f}")


if __name__ == "__main__":
    main()
