"""Command line front end for the experiment harness.

    entrolab run --config cfg.ini [--out DIR] [--seed N] [--threads N]
    entrolab list

``run`` executes the configured experiment, prints one PASS/FAIL line per
check, and exits 0 exactly when every check passed.
"""

from __future__ import annotations

import argparse
import sys

from . import harness

_DESCRIPTIONS = {
    "core-example": "reflected ball diffusion: binned radial drift and invariant histogram",
    "heat-bath": "one explicit oscillator-bath realization, coarse-grained trajectory",
    "kernel-noise": "bath memory kernel quadrature and fluctuation increment statistics",
    "oscillator-sde": "damped oscillator: deterministic trajectory and stochastic ensemble",
    "particles": "interacting particle ensemble relaxing to its mean-field fixed point",
    "sanov": "combinatorial rate-function checks for empirical measures",
    "rate-functional": "action of trajectories against a quadratic dissipation pair",
    "pde": "entropy gradient-flow PDE relaxing to the Gibbs profile",
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="entrolab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    runp = sub.add_parser("run", help="run one experiment from an INI config")
    runp.add_argument("--config", required=True, help="path to the INI config file")
    runp.add_argument("--out", default=None, help="output directory (overrides config)")
    runp.add_argument("--seed", type=int, default=None, help="seed override")
    runp.add_argument("--threads", type=int, default=1, help="worker threads")

    sub.add_parser("list", help="list the available experiments")

    args = parser.parse_args(argv)
    if args.command == "list":
        for name in harness.experiment_names():
            print(f"{name:16s} {_DESCRIPTIONS.get(name, '')}")
        return 0

    # config mistakes are user errors, not crashes; run-time errors propagate
    try:
        cfg = harness.parse_config_file(args.config)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    cfg = cfg.with_overrides(seed=args.seed, out_dir=args.out)
    manifest = harness.run(cfg, threads=args.threads)
    for name in sorted(manifest.checks):
        c = manifest.checks[name]
        tag = "PASS" if c["passed"] else "FAIL"
        print(f"[{tag}] {cfg.name}:{name} value={c['value']:.6g} target: {c['target']}")
    print(f"artifacts in {cfg.out_dir}: {', '.join(manifest.artifacts)} + manifest.json")
    return 0 if manifest.all_passed else 1


if __name__ == "__main__":
    sys.exit(main())
