"""Run every bundled experiment config through the CLI.

Usage: python scripts/reproduce_all.py [--output-dir runs] [--skip twotime ...]
"""
import argparse
from pathlib import Path

from gpcdyn.cli import main

ROOT = Path(__file__).resolve().parents[1]
PLAN = [
    ("expand", "duffing_unforced", ["--model", "duffing_unforced", "--check-paper"]),
    ("expand", "duffing_forced", ["--model", "duffing_forced", "--check-paper"]),
    ("expand", "duffing_uncertain_ic", ["--model", "duffing_uncertain_ic", "--check-paper"]),
    ("expand", "twotime_full", ["--model", "twotime_full", "--mode", "linearized_fluctuations",
                                "--check-paper"]),
    ("expand", "twotime_averaged", ["--model", "twotime_averaged", "--mode",
                                    "linearized_fluctuations", "--check-paper"]),
    ("theorem1", "theorem1", ["--config", "configs/theorem1.toml"]),
    ("harmonic", "harmonic", ["--config", "configs/harmonic.toml"]),
    ("run", "duffing_sections", ["--config", "configs/duffing_sections.toml"]),
    ("lyapunov", "lyapunov", ["--config", "configs/lyapunov.toml"]),
    ("compare-mc", "duffing_tracking_ic1", ["--config", "configs/duffing_tracking_ic1.toml"]),
    ("compare-mc", "duffing_tracking_ic4", ["--config", "configs/duffing_tracking_ic4.toml"]),
    ("compare-mc", "duffing_simple_tracking", ["--config", "configs/duffing_simple_tracking.toml"]),
    ("compare-mc", "twotime", ["--config", "configs/twotime.toml"]),
]


def cli():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--output-dir", default="runs")
    p.add_argument("--skip", nargs="*", default=[], help="experiment names to skip")
    args = p.parse_args()
    failures = []
    for command, name, extra in PLAN:
        if name in args.skip:
            continue
        argv = [command, *[str(ROOT / a) if a.endswith(".toml") else a for a in extra],
                "--output-dir", args.output_dir]
        if "--config" not in extra:
            argv += ["--name", f"expand_{name}"]
        print(f"== {command} {name}", flush=True)
        code = main(argv)
        if code:
            failures.append((name, code))
    for name, code in failures:
        print(f"{name}: exit code {code}")
    return 1 if failures else 0


if __name__ == "__main__":
    raise SystemExit(cli())
