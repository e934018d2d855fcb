"""``hwrec`` command line: run, validate, oracle."""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from . import harness
from .dqc1 import estimate_full_table
from .harness import ConfigError
from .hw import hw_expectations_exact
from .validation import check_dqc1_sector

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_THRESHOLD = 0, 1, 2, 3


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hwrec", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment config and write reports")
    run.add_argument("config")
    run.add_argument("--workers", type=int, default=None,
                     help=f"worker processes (default: ${harness.WORKERS_ENV} or CPU count)")
    run.add_argument("--assert", dest="assert_", action="store_true",
                     help="exit 3 if any mean fidelity is below assert_min_fidelity")

    val = sub.add_parser("validate", help="check a config without running it")
    val.add_argument("config")

    orc = sub.add_parser("oracle", help="compare exact and DQC1 expectations for one random state")
    orc.add_argument("--M", type=int, required=True)
    orc.add_argument("--N", type=int, required=True)
    orc.add_argument("--seed", type=int, default=0)
    return p


def _run(args) -> int:
    config = harness.load_config(args.config)
    if args.assert_ and config.assert_min_fidelity is None:
        raise ConfigError("--assert needs assert_min_fidelity in the config")
    result = harness.run_experiment(config, args.workers)
    csv_path, json_path = harness.emit_report(result, config.output_path)
    for a in result.aggregates:
        shots = "exact" if a.N_shot is None else a.N_shot
        print(f"N_shot={shots} dtheta={a.delta_theta} dphi={a.delta_phi} "
              f"mean={a.mean_fidelity:.6f} std={a.std_fidelity:.6f} n={a.n_states}")
    print(f"wrote {csv_path} and {json_path}")
    if args.assert_:
        worst = min(a.mean_fidelity for a in result.aggregates)
        if worst < config.assert_min_fidelity:
            print(f"FAIL: mean fidelity {worst:.6f} < {config.assert_min_fidelity}", file=sys.stderr)
            return EXIT_THRESHOLD
    return EXIT_OK


def _validate(args) -> int:
    config = harness.load_config(args.config)
    n_trials = config.n_states * len(config.shots) * len(config.noise_points)
    print(f"ok: mode={config.mode} M={config.M} N={config.N} trials={n_trials}")
    return EXIT_OK


def _oracle(args) -> int:
    try:
        check_dqc1_sector(args.M, args.N)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    psi = harness.random_pure_state(args.M, args.N, harness.state_rng(args.seed, 0))
    exact = hw_expectations_exact(psi, args.M, args.N)
    dqc1 = estimate_full_table(psi, args.M)
    print(f"{'r':>2} {'k':>3} {'l':>3} {'exact':>14} {'dqc1':>14} {'diff':>10}")
    for r in range(2):
        for k in range(args.M):
            for l in range(args.M):
                if k == 0 and l == 0:
                    continue
                a, b = exact.lam[r, k, l], dqc1.lam[r, k, l]
                print(f"{r:>2} {k:>3} {l:>3} {a:>14.10f} {b:>14.10f} {abs(a - b):>10.2e}")
    worst = float(np.max(np.abs(exact.lam - dqc1.lam)))
    print(f"max |exact - dqc1| = {worst:.3e}")
    return EXIT_OK if worst <= 1e-10 else EXIT_RUNTIME


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handler = {"run": _run, "validate": _validate, "oracle": _oracle}[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - surfaced as a runtime failure
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
