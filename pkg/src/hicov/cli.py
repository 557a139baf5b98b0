"""Command-line interface.

Subcommands:

* ``test``     - run one identity test on a CSV data file (rows = observations).
* ``power``    - print theoretical power for a likelihood distance, a
  rank-one spike, or a single-variance alternative.
* ``simulate`` - run a Monte Carlo campaign; writes CSV, renders a figure,
  optionally emits a standalone plot script.
* ``validate`` - run one of the built-in validation suites.

Exit codes: 0 ok / no rejection, 3 rejection (``test`` only), 64 usage or
parse error, 65 regime violation (p/n outside (0,1)), 66 numerical
singularity, 1 validation-suite failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import harness, identity_tests, models, power, report
from .exceptions import InvalidRegimeError, NotPositiveDefiniteError, NotPSDError

EXIT_OK = 0
EXIT_VALIDATION_FAILED = 1
EXIT_REJECT = 3
EXIT_USAGE = 64
EXIT_REGIME = 65
EXIT_SINGULAR = 66

SEED_ENV_VAR = "HICOV_SEED"


class _Parser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 64."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(prog="hicov", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_test = sub.add_parser("test", help="run one identity test on a data file")
    p_test.add_argument("data", help="headerless CSV, one observation per row (n rows, p columns)")
    p_test.add_argument("--test", required=True, choices=identity_tests.TEST_NAMES, dest="which")
    p_test.add_argument("--alpha", type=float, default=0.05)
    p_test.add_argument("--delta", type=float, default=0.0,
                        help="innovation excess kurtosis used by the lrt centering")

    p_power = sub.add_parser("power", help="print theoretical power")
    p_power.add_argument("--alpha", type=float, default=0.05)
    p_power.add_argument("--y", type=float, help="dimension-to-sample ratio in (0,1)")
    p_power.add_argument("--b", type=float, help="likelihood distance of the alternative")
    p_power.add_argument("--h", type=float, help="rank-one spike strength")
    p_power.add_argument("--rho", type=float, help="single-variance alternative diag(rho,1,...,1)")
    p_power.add_argument("--p", type=int, help="dimension (with --rho)")
    p_power.add_argument("--n", type=int, help="sample size (with --rho)")

    p_sim = sub.add_parser("simulate", help="run a Monte Carlo campaign")
    p_sim.add_argument("--preset", choices=harness.PRESET_NAMES)
    p_sim.add_argument("--config", help="flat key=value config file with repeated grid= lines")
    p_sim.add_argument("--n", type=int)
    p_sim.add_argument("--p", type=int)
    p_sim.add_argument("--alpha", type=float)
    p_sim.add_argument("--reps", type=int)
    p_sim.add_argument("--law", choices=("gaussian", "gamma"))
    p_sim.add_argument("--mean", choices=("zero", "random-fixed"), dest="mean_mode")
    p_sim.add_argument("--tests", help="comma list from {lrt,cm,czz}")
    p_sim.add_argument("--grid", help="comma list of identity | rho:VALUE | h:VALUE")
    p_sim.add_argument("--seed", type=int)
    p_sim.add_argument("--workers", type=int)
    p_sim.add_argument("--out", default="power_curves.csv", help="CSV output path")
    p_sim.add_argument("--plot", help="figure output path (default: CSV path with .png)")
    p_sim.add_argument("--no-plot", action="store_true", help="skip figure rendering")
    p_sim.add_argument("--plot-script", help="also emit a standalone plot script here")

    p_val = sub.add_parser("validate", help="run a validation suite")
    p_val.add_argument("--suite", required=True,
                       choices=("null-clt", "epsilon", "lemma1", "czz-oracle"))
    p_val.add_argument("--seed", type=int)
    p_val.add_argument("--reps", type=int, help="replications (suite-specific default)")
    p_val.add_argument("--law", choices=("gaussian", "gamma"), default="gaussian")
    return parser


def _resolve_seed(seed: int | None) -> int:
    if seed is not None:
        return int(seed)
    env = os.environ.get(SEED_ENV_VAR)
    if env is not None:
        return int(env)
    return int(np.random.SeedSequence().entropy % (1 << 64))


def _load_data(path: str) -> np.ndarray:
    # rows are observations; internal layout is (p, n)
    data = np.loadtxt(path, delimiter=",", ndmin=2, dtype=float)
    return data.T


def _law_from_name(name: str) -> models.InnovationLaw:
    return models.Gaussian() if name == "gaussian" else models.StandardizedGamma(4, 0.5)


# ---------------------------------------------------------------------------
# test
# ---------------------------------------------------------------------------

def _cmd_test(args) -> int:
    try:
        X = _load_data(args.data)
    except (OSError, ValueError) as exc:
        print(f"hicov test: cannot read {args.data}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    p, n = X.shape
    outcome = identity_tests.run_test(args.which, X, args.alpha, delta=args.delta)
    print(f"test:         {outcome.test_name}")
    print(f"data:         n={n} observations, p={p} variables")
    print(f"raw:          {outcome.raw:.10g}")
    print(f"standardized: {outcome.standardized:.10g}")
    print(f"threshold:    {outcome.threshold:.10g}  (alpha={outcome.alpha:g})")
    print(f"decision:     {'REJECT identity' if outcome.reject else 'no rejection'}")
    return EXIT_REJECT if outcome.reject else EXIT_OK


# ---------------------------------------------------------------------------
# power
# ---------------------------------------------------------------------------

def _cmd_power(args) -> int:
    chosen = [name for name, val in (("b", args.b), ("h", args.h), ("rho", args.rho))
              if val is not None]
    if len(chosen) != 1:
        print("hicov power: provide exactly one of --b, --h, --rho", file=sys.stderr)
        return EXIT_USAGE
    if args.rho is not None:
        if args.p is None or args.n is None:
            print("hicov power: --rho needs --p and --n", file=sys.stderr)
            return EXIT_USAGE
        y = args.p / args.n
        if not 0.0 < y < 1.0:
            raise InvalidRegimeError(f"p/n = {y:g} must lie in (0, 1)")
        b = args.rho - math.log(args.rho) - 1.0
        print(f"lrt power (rho={args.rho:g}, y={y:g}, alpha={args.alpha:g}): "
              f"{power.lrt_power(b, y, args.alpha):.4f}")
        return EXIT_OK
    if args.y is None:
        print("hicov power: --b and --h need --y", file=sys.stderr)
        return EXIT_USAGE
    if args.b is not None:
        print(f"lrt power (b={args.b:g}, y={args.y:g}, alpha={args.alpha:g}): "
              f"{power.lrt_power(args.b, args.y, args.alpha):.4f}")
        return EXIT_OK
    print(f"lrt power (h={args.h:g}, y={args.y:g}, alpha={args.alpha:g}): "
          f"{power.lrt_spiked_power(args.h, args.y, args.alpha):.4f}")
    print(f"quadratic-distance power (h={args.h:g}, alpha={args.alpha:g}): "
          f"{power.quadratic_spiked_power(args.h, args.alpha):.4f}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def _parse_grid_token(token: str, p: int, n: int) -> models.CovarianceModel:
    token = token.strip()
    if token == "identity":
        return models.Identity(p=p)
    if token.startswith("rho:"):
        return models.DiagonalSpike(p=p, rho=float(token[4:]))
    if token.startswith("h:"):
        return models.RankOneSpike(p=p, n_ref=n, h=float(token[2:]))
    raise ValueError(f"bad grid token {token!r}; expected identity, rho:VALUE or h:VALUE")


def _parse_config_file(path: str) -> dict:
    opts: dict = {"grid": []}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key == "grid":
            opts["grid"].append(value)
        elif key in ("n", "p", "reps", "seed", "workers"):
            opts[key] = int(value)
        elif key == "alpha":
            opts[key] = float(value)
        elif key in ("law", "mean", "tests"):
            opts[key] = value
        else:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
    return opts


def _configs_from_args(args) -> list[harness.SimulationConfig]:
    """Resolve precedence: command-line flag, then config file, then default."""
    opts = _parse_config_file(args.config) if args.config else {"grid": []}

    def pick(flag, key, default=None):
        return flag if flag is not None else opts.get(key, default)

    seed = args.seed if args.seed is not None else opts.get("seed")
    seed = _resolve_seed(seed)
    workers = pick(args.workers, "workers", 1)
    if args.preset:
        return harness.preset_configs(args.preset, seed=seed, reps=args.reps,
                                      workers=workers)
    n = pick(args.n, "n")
    p = pick(args.p, "p")
    if n is None or p is None:
        raise ValueError("simulate needs --preset, or --config, or at least --n and --p")
    law = _law_from_name(pick(args.law, "law", "gaussian"))
    mean_mode = pick(args.mean_mode, "mean", "zero")
    tests = tuple(t.strip() for t in pick(args.tests, "tests", "lrt,cm,czz").split(",")
                  if t.strip())
    grid_tokens = ([t.strip() for t in args.grid.split(",") if t.strip()]
                   if args.grid else opts["grid"]) or ["identity"]
    grid = tuple(_parse_grid_token(tok, p=p, n=n) for tok in grid_tokens)
    return [
        harness.SimulationConfig(
            n=n, p=p, alpha=pick(args.alpha, "alpha", 0.05),
            reps=pick(args.reps, "reps", harness.DEFAULT_REPS),
            law=law, mean_mode=mean_mode, tests=tests, grid=grid,
            seed=seed, workers=workers,
        )
    ]


def _cmd_simulate(args) -> int:
    configs = _configs_from_args(args)
    seed = configs[0].seed
    curves = [harness.run_campaign(cfg) for cfg in configs]
    out = Path(args.out)
    report.write_csv(curves, out)
    print(report.format_summary(curves))
    print(f"master seed: {seed}")
    print(f"wrote {out}")
    if not args.no_plot:
        plot_path = Path(args.plot) if args.plot else out.with_suffix(".png")
        report.render_figure(curves, plot_path)
        print(f"wrote {plot_path}")
    if args.plot_script:
        image = Path(args.plot) if args.plot else out.with_suffix(".png")
        report.write_plot_script(args.plot_script, out, image)
        print(f"wrote {args.plot_script}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------

def _print_check(label: str, measured: float, bound: float, ok: bool) -> None:
    margin = bound - abs(measured)
    print(f"  {'PASS' if ok else 'FAIL'}  {label}: measured {measured:+.6g}, "
          f"bound {bound:.6g}, margin {margin:+.6g}")


def _cmd_validate(args) -> int:
    seed = _resolve_seed(args.seed)
    print(f"suite: {args.suite} (master seed: {seed})")
    if args.suite == "lemma1":
        samples = args.reps or 200_000
        rep = harness.validate_log_inequality(samples, seed=seed)
        for label, bad in rep.violations.items():
            print(f"  {'PASS' if bad == 0 else 'FAIL'}  {label}: "
                  f"{bad} violations in {samples} samples")
        print(f"  worst margin (min rhs-lhs): {rep.worst_margin:.6g}")
        return EXIT_OK if rep.passed else EXIT_VALIDATION_FAILED
    if args.suite == "czz-oracle":
        rep = harness.czz_oracle_sweep(seed=seed)
        print(f"  {'PASS' if rep.passed else 'FAIL'}  max relative gap over "
              f"{rep.datasets} datasets: {rep.max_rel_gap:.3e} (bound 1e-09)")
        return EXIT_OK if rep.passed else EXIT_VALIDATION_FAILED
    if args.suite == "null-clt":
        reps = args.reps or 10_000
        summary = harness.validate_null_clt(
            n=200, p=50, law=_law_from_name(args.law), reps=reps, seed=seed
        )
        _print_check("mean", summary.mean, summary.mean_bound, summary.mean_ok)
        _print_check("variance - 1", summary.variance - 1.0, summary.var_bound,
                     summary.var_ok)
        print(f"  KS distance to the standard normal: {summary.ks_distance:.4f}")
        return EXIT_OK if summary.passed else EXIT_VALIDATION_FAILED
    # epsilon: centering remainder for a ten-coordinate diagonal bump at 1.2
    reps = args.reps or 10_000
    diag = np.ones(50)
    diag[:10] = 1.2
    cov = models.Explicit(np.diag(diag))
    summary = harness.validate_trace_remainder(
        cov, n=200, law=_law_from_name(args.law), reps=reps, seed=seed
    )
    _print_check("mean", summary.mean, 4.0 * summary.mean_stderr, summary.mean_ok)
    _print_check("variance - exact", summary.variance - summary.exact_variance,
                 4.0 * summary.var_mc_stderr, summary.var_within_exact)
    print(f"  {'PASS' if summary.var_below_bound else 'FAIL'}  variance "
          f"{summary.variance:.6g} <= 1.1 * bound {summary.bound:.6g}")
    return EXIT_OK if summary.passed else EXIT_VALIDATION_FAILED


# ---------------------------------------------------------------------------
# entry points
# ---------------------------------------------------------------------------

def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "test": _cmd_test,
        "power": _cmd_power,
        "simulate": _cmd_simulate,
        "validate": _cmd_validate,
    }
    try:
        return handlers[args.command](args)
    except InvalidRegimeError as exc:
        print(f"hicov {args.command}: regime violation: {exc}", file=sys.stderr)
        return EXIT_REGIME
    except (NotPositiveDefiniteError, NotPSDError) as exc:
        print(f"hicov {args.command}: numerical singularity: {exc}", file=sys.stderr)
        return EXIT_SINGULAR
    except harness.CampaignError as exc:
        print(f"hicov {args.command}: campaign aborted: {exc}", file=sys.stderr)
        return EXIT_SINGULAR
    except (ValueError, OSError) as exc:
        print(f"hicov {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


def run() -> None:  # console-script entry point
    sys.exit(main())


if __name__ == "__main__":
    run()
