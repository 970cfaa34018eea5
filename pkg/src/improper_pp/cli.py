"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 domain or observability
error, 3 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import bernoulli as bern
from . import gaussian as gau
from . import paradox as par
from .conditional import joint_posterior, posterior_draws_csv
from .config import ConfigError, ExperimentConfig
from .errors import ImproperPPError, NotObservableError
from .measure import PatternSampler, PointPattern, SamplingRegion, model_from_spec
from .verify import write_jsonl

EXIT_OK, EXIT_VERIFY, EXIT_DOMAIN, EXIT_USAGE = 0, 1, 2, 3
MUTATION_KEYS = ("gaussian_intensity_scale",)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _global_flags(suppress: bool) -> argparse.ArgumentParser:
    p = _Parser(add_help=False)
    default = argparse.SUPPRESS if suppress else None
    p.add_argument("--config", metavar="PATH", default=default, help="JSON experiment config")
    p.add_argument("--seed", type=int, metavar="U64", default=default, help="master seed")
    p.add_argument("--out", metavar="PATH", default=default, help="output file (default stdout)")
    p.add_argument("--tol", type=float, metavar="REAL", default=default,
                   help="relative quadrature tolerance")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="improper-pp", parents=[_global_flags(False)],
                     description="Improper priors as Poisson point processes.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    shared = [_global_flags(True)]
    sub.add_parser("sample", parents=shared,
                   help="sample point patterns on the configured region (one JSON line each)")
    p = sub.add_parser("posterior", parents=shared, help="per-event posterior draws for a pattern")
    p.add_argument("pattern", metavar="PATTERN", help="pattern JSON written by 'sample'")
    sub.add_parser("extend", parents=shared, help="Gosset or Polya extension limits")
    sub.add_parser("paradox", parents=shared, help="two-posterior report for the ratio model")
    p = sub.add_parser("verify", parents=shared, help="run the acceptance suite")
    p.add_argument("--suite", choices=("smoke", "full"), default="smoke")
    p.add_argument("--mutate", action="append", default=[], metavar="KEY=VALUE",
                   help=f"perturb the implementation (keys: {', '.join(MUTATION_KEYS)})")
    p.add_argument("--checks", metavar="LIST", help="comma-separated criterion numbers")
    p.add_argument("--timings", action="store_true",
                   help="keep wall-clock runtimes in the JSONL (breaks byte-identical reruns)")
    return parser


def _config(args) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    if args.seed is not None:
        if args.seed < 0 or args.seed >= 2**64:
            raise ConfigError("--seed must be an unsigned 64-bit integer")
        cfg.seed = args.seed
    if args.out is not None:
        cfg.out = args.out
    if args.tol is not None:
        if not args.tol > 0:
            raise ConfigError("--tol must be positive")
        cfg.tolerances["quadrature_epsrel"] = args.tol
    return cfg


def _emit(cfg: ExperimentConfig, text: str) -> None:
    if cfg.out:
        Path(cfg.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _model(cfg: ExperimentConfig):
    if "id" not in cfg.model:
        raise ConfigError("config needs model.id")
    try:
        return model_from_spec(cfg.model)
    except TypeError as exc:
        raise ConfigError(f"bad model parameters: {exc}") from exc


def cmd_sample(cfg: ExperimentConfig) -> int:
    model = _model(cfg)
    if cfg.region is None:
        raise ConfigError("'sample' needs a region")
    region = SamplingRegion.from_dict(cfg.region)
    sampler = PatternSampler(model, region, tol=cfg.tol)
    if cfg.replicates <= 1:
        patterns = [sampler.sample(cfg.seed)]
    else:
        patterns = sampler.replicates(cfg.seed, cfg.replicates)
    _emit(cfg, "".join(json.dumps(p.to_dict(), sort_keys=True) + "\n" for p in patterns))
    return EXIT_OK


def cmd_posterior(cfg: ExperimentConfig, pattern_file: str) -> int:
    model = _model(cfg)
    try:
        pattern = PointPattern.from_json(Path(pattern_file).read_text(encoding="utf-8"))
    except (OSError, ValueError, KeyError) as exc:
        raise ConfigError(f"cannot read pattern {pattern_file}: {exc}") from exc
    joint = joint_posterior(model, pattern)
    _emit(cfg, posterior_draws_csv(joint, cfg.draws, cfg.seed, model.param_names))
    return EXIT_OK


def cmd_extend(cfg: ExperimentConfig) -> int:
    model = _model(cfg)
    if cfg.initial is None:
        raise ConfigError("'extend' needs an initial sequence")
    if isinstance(model, gau.GaussianImproperModel):
        res = gau.gosset_limit(model, cfg.initial, steps=cfg.steps, paths=cfg.paths, seed=cfg.seed)
    elif isinstance(model, bern.BernoulliImproperModel):
        res = bern.polya_limit(model, cfg.initial, steps=cfg.steps, paths=cfg.paths, seed=cfg.seed)
    else:
        raise ConfigError("'extend' supports the gaussian and bernoulli models only")
    _emit(cfg, res.to_csv())
    return EXIT_OK


def cmd_paradox(cfg: ExperimentConfig) -> int:
    model = _model(cfg)
    if not isinstance(model, par.ParadoxModel):
        raise ConfigError("'paradox' needs the paradox model")
    opts = dict(cfg.paradox)
    unknown = set(opts) - {"x", "y", "interval", "theta_grid"}
    if unknown:
        raise ConfigError(f"unknown paradox keys: {sorted(unknown)}")
    grid = None
    if "theta_grid" in opts:
        start, stop, num = opts["theta_grid"]
        grid = np.linspace(float(start), float(stop), int(num))
    report = par.paradox_report(model, float(opts.get("x", 1.0)), float(opts.get("y", 1.0)),
                                tuple(opts.get("interval", (0.5, 2.0))), grid)
    _emit(cfg, par.report_json(report) + "\n")
    return EXIT_OK


def _parse_mutations(items) -> dict:
    out = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep or key not in MUTATION_KEYS:
            raise ConfigError(f"bad --mutate {item!r}; known keys: {', '.join(MUTATION_KEYS)}")
        try:
            out[key] = float(value)
        except ValueError:
            raise ConfigError(f"--mutate {key} needs a number") from None
    return out


def _parse_checks(text):
    from .suite import CRITERIA

    if text is None:
        return None
    try:
        checks = sorted({int(t) for t in text.split(",") if t.strip()})
    except ValueError:
        raise ConfigError(f"bad --checks {text!r}") from None
    if not checks or any(c not in CRITERIA for c in checks):
        raise ConfigError(f"--checks must name criteria among {sorted(CRITERIA)}")
    return checks


def cmd_verify(cfg: ExperimentConfig, suite: str, mutate: dict, checks, timings: bool) -> int:
    from .suite import run_suite

    reports = run_suite(suite, cfg.seed, mutate=mutate, checks=checks)
    for r in reports:
        print(r.line(), file=sys.stderr)
    if not timings:
        for r in reports:
            r.runtime_ms = 0
    if cfg.out:
        write_jsonl(reports, cfg.out)
    else:
        for r in sorted(reports, key=lambda r: r.check_id):
            sys.stdout.write(r.to_json() + "\n")
    failed = [r.check_id for r in reports if not r.passed]
    if failed:
        print("verification failed: " + ", ".join(failed), file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = _config(args)
        if args.command == "sample":
            return cmd_sample(cfg)
        if args.command == "posterior":
            return cmd_posterior(cfg, args.pattern)
        if args.command == "extend":
            return cmd_extend(cfg)
        if args.command == "paradox":
            return cmd_paradox(cfg)
        return cmd_verify(cfg, args.suite, _parse_mutations(args.mutate),
                          _parse_checks(args.checks), args.timings)
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NotObservableError as exc:
        print(f"error: {exc.verdict}: region is not observable", file=sys.stderr)
        return EXIT_DOMAIN
    except ImproperPPError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


def run() -> None:
    sys.exit(main())
