"""Command-line driver: ``unimodal-astar {sample,fit,widths,verify,sweep}``.

Settings come from an optional config file (``--config``, see
:mod:`unimodal_astar.config`) and are overridden by command-line flags.
Exit codes: 0 ok, 1 bound violation or failed fit, 2 config error,
3 runtime error. ``UNIMODAL_ASTAR_WORKERS`` sets the default worker count.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, CliConfig, load_config, serialize_config
from .gumbel import ParameterError
from .harness import (
    clear_batch_cache,
    experiment_K,
    experiment_markov_tail,
    experiment_mean_neg_gumbel,
    experiment_N,
    experiment_singlelog,
    experiment_T,
    experiment_zn,
    reports_json,
)
from .measures import AbsoluteContinuityError, InfiniteDivergenceError, StandardizationError
from .sampler import RunawayRunError, ks_critical_value, ks_statistic, run_batch
from .width import numeric_width, width_integral, width_profile_csv

EXIT_OK, EXIT_VIOLATION, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3
WORKERS_ENV = "UNIMODAL_ASTAR_WORKERS"

_CONFIG_ERRORS = (ConfigError, ParameterError, AbsoluteContinuityError, InfiniteDivergenceError, StandardizationError)


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="unimodal-astar", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="config file with [distribution], [experiment], [output] sections")
    common.add_argument("--family", help="built-in family name")
    common.add_argument("--r-max", type=float, dest="r_max")
    common.add_argument("--mean", type=float)
    common.add_argument("--sd", type=float)
    common.add_argument("--mode", type=float, help="mode location for triangle/staircase families")
    common.add_argument("--levels", type=int, help="number of staircase levels")
    common.add_argument("--seed", type=int)
    common.add_argument("--workers", type=int, help=f"worker threads (default ${WORKERS_ENV} or 1)")
    common.add_argument("--dump-config", action="store_true", help="print the merged config and exit")

    p = sub.add_parser("sample", parents=[common], help="draw samples")
    p.add_argument("-n", type=int, dest="n", help="number of samples (default 10)")
    p.add_argument("--trace", action="store_true", help="append the step count T to each sample")
    p.add_argument("-o", "--output", dest="samples", help="output file (default stdout)")

    p = sub.add_parser("fit", parents=[common], help="KS check of samples against the target CDF")
    p.add_argument("--input", help="sample file (first column); omit to draw fresh samples")
    p.add_argument("-n", type=int, dest="n", help="fresh sample count (default 100000)")

    p = sub.add_parser("widths", parents=[common], help="width profile CSV")
    p.add_argument("--grid-size", type=int, dest="grid_size", help="gamma grid points (default 1000)")
    p.add_argument("-o", "--output", dest="samples", help="CSV file (default stdout)")

    for name, text in (("verify", "run the bound experiments"), ("sweep", "total steps across r_max")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--replications", type=int)
        p.add_argument("--r-max-values", type=_floats, dest="r_max_values")
        p.add_argument("--gamma-grid", type=_floats, dest="gamma_grid")
        p.add_argument("--mean-neg-replications", type=int, dest="mean_neg_replications")
        p.add_argument("--out-dir", dest="dir", help="directory for CSV and JSON output")
    return parser


def merge_args(args: argparse.Namespace) -> CliConfig:
    cfg = load_config(args.config, args.command) if args.config else CliConfig(command=args.command)
    for key in ("family", "r_max", "mean", "sd", "mode", "levels"):
        if getattr(args, key, None) is not None:
            cfg.distribution[key] = getattr(args, key)
    for key in ("seed", "workers", "replications", "r_max_values", "gamma_grid", "mean_neg_replications"):
        if getattr(args, key, None) is not None:
            cfg.experiment[key] = getattr(args, key)
    for key in ("samples", "input", "n", "grid_size", "dir"):
        if getattr(args, key, None) is not None:
            cfg.output[key] = getattr(args, key)
    if "workers" not in cfg.experiment and os.environ.get(WORKERS_ENV):
        try:
            cfg.experiment["workers"] = int(os.environ[WORKERS_ENV])
        except ValueError:
            raise ConfigError(f"{WORKERS_ENV} must be an integer") from None
    return cfg


def _seed(cfg: CliConfig, required: bool) -> int:
    if cfg.seed is not None:
        return int(cfg.seed)
    if required:
        raise ConfigError(f"{cfg.command} needs an explicit seed (--seed or [experiment] seed)")
    seed = int(np.random.SeedSequence().entropy % (2**63))
    print(f"seed={seed}", file=sys.stderr)
    return seed


def _open_out(path):
    return open(path, "w", newline="") if path else sys.stdout


def cmd_sample(cfg: CliConfig) -> int:
    target = cfg.target()
    n = int(cfg.output.get("n", 10))
    seed = _seed(cfg, required=False)
    res = run_batch(target, n, seed, workers=cfg.experiment.get("workers", 1))
    out = _open_out(cfg.output.get("samples"))
    try:
        for x, t in zip(res.samples, res.T):
            out.write(f"{format(float(x), '.17g')}\t{int(t)}\n" if cfg.output.get("trace") else f"{format(float(x), '.17g')}\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def read_samples(path) -> np.ndarray:
    values = []
    with open(path) as fh:
        for i, line in enumerate(fh, 1):
            s = line.split()
            if not s:
                continue
            try:
                values.append(float(s[0]))
            except ValueError:
                raise ConfigError(f"{path}:{i}: not a number: {s[0]!r}") from None
    if not values:
        raise ConfigError(f"{path}: no samples")
    return np.asarray(values)


def cmd_fit(cfg: CliConfig) -> int:
    target = cfg.target()
    if cfg.output.get("input"):
        samples = read_samples(cfg.output["input"])
    else:
        seed = _seed(cfg, required=False)
        samples = run_batch(target, int(cfg.output.get("n", 100_000)), seed,
                            workers=cfg.experiment.get("workers", 1)).samples
    ks = ks_statistic(samples, target.q_cdf)
    crit = ks_critical_value(len(samples))
    ok = ks < crit
    print(f"family={target.name} n={len(samples)} ks={ks:.6g} threshold={crit:.6g} {'PASS' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_VIOLATION


def cmd_widths(cfg: CliConfig) -> int:
    target = cfg.target()
    m = int(cfg.output.get("grid_size", 1000))
    if m < 1:
        raise ConfigError("grid_size must be >= 1")
    w = numeric_width(target)
    gammas = np.arange(1, m + 1) / m
    out = _open_out(cfg.output.get("samples"))
    try:
        out.write(width_profile_csv(w, gammas))
    finally:
        if out is not sys.stdout:
            out.close()
    integral = width_integral(target)
    err = abs(integral - 1.0 / target.r_max)
    status = "PASS" if err <= 1e-6 else "FAIL"
    print(f"integral={integral:.17g} 1/r_max={1.0 / target.r_max:.17g} abs_err={err:.3g} {status}", file=sys.stderr)
    return EXIT_OK if err <= 1e-6 else EXIT_VIOLATION


def _write_reports(cfg: CliConfig, exp_cfg, reports) -> int:
    out_dir = Path(cfg.output.get("dir", "results"))
    out_dir.mkdir(parents=True, exist_ok=True)
    for rep in reports:
        (out_dir / f"{rep.experiment}.csv").write_text(rep.to_csv())
    (out_dir / "summary.json").write_text(reports_json(reports, exp_cfg))
    bad = [rep for rep in reports if rep.violations]
    for rep in reports:
        n_bad = len(rep.violations)
        print(f"{rep.experiment}: {len(rep.rows)} rows, {n_bad} violation(s)")
    return EXIT_VIOLATION if bad else EXIT_OK


def _experiment_config(cfg: CliConfig):
    cfg.experiment["seed"] = _seed(cfg, required=True)
    return cfg.experiment_config()


def cmd_verify(cfg: CliConfig) -> int:
    exp = _experiment_config(cfg)
    clear_batch_cache()
    reports = [
        experiment_zn(exp),
        experiment_markov_tail(exp),
        experiment_N(exp),
        experiment_K(exp),
        experiment_mean_neg_gumbel(exp.mass_sequence, exp.mean_neg_replications, exp.seed),
        experiment_singlelog(),
    ]
    clear_batch_cache()
    return _write_reports(cfg, exp, reports)


def cmd_sweep(cfg: CliConfig) -> int:
    if "r_max_values" not in cfg.experiment:
        cfg.experiment["r_max_values"] = [2.0 ** k for k in range(1, 11)]
    exp = _experiment_config(cfg)
    clear_batch_cache()
    rep = experiment_T(exp)
    clear_batch_cache()
    for row in rep.rows:
        if row.quantity.startswith("slope"):
            print(f"slope={row.mean:.6g} se={row.se:.3g} bound={row.bound:.6g}")
    return _write_reports(cfg, exp, [rep])


COMMANDS = {"sample": cmd_sample, "fit": cmd_fit, "widths": cmd_widths, "verify": cmd_verify, "sweep": cmd_sweep}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = merge_args(args)
        if getattr(args, "trace", False):
            cfg.output["trace"] = True
        if args.dump_config:
            cfg.output.pop("trace", None)
            sys.stdout.write(serialize_config(cfg))
            return EXIT_OK
        return COMMANDS[args.command](cfg)
    except _CONFIG_ERRORS as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RunawayRunError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (RuntimeError, ArithmeticError, ValueError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
