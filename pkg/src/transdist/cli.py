"""Command-line entry point: ``transdist fit|synth|diag``."""

import argparse
import json
import logging
import sys
import time
from dataclasses import fields
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import yaml

from . import diagnostics as diag
from . import distributions as dist
from .distributions import DistSpec, FamilyId
from .estimator import TransDistributionalRJMCMC
from .sampler import ConfigError, DegenerateDataError, SamplerConfig

log = logging.getLogger("transdist")

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_DEGENERATE = 3
EXIT_CONFIG = 4

MIN_POINTS = 10
PLOT_POINTS = 512
_RUN_KEYS = {"chains": 40, "jobs": 1, "bins": 100}
_SAMPLER_KEYS = {f.name for f in fields(SamplerConfig)}


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def read_series(path):
    """One real per line; blank lines and lines starting with '#' are skipped."""
    try:
        text = Path(path).read_text()
    except (OSError, UnicodeDecodeError) as exc:
        raise CliError(f"cannot read {path}: {exc}", EXIT_INPUT) from exc
    values = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            values.append(float(line))
        except ValueError:
            raise CliError(f"{path}:{lineno}: not a number: {line!r}", EXIT_INPUT) from None
    x = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(x)):
        raise CliError(f"{path}: non-finite values present", EXIT_INPUT)
    if x.size < MIN_POINTS:
        raise CliError(f"{path}: need at least {MIN_POINTS} values, found {x.size}", EXIT_INPUT)
    return x


def load_config(path):
    if path is None:
        return {}
    try:
        raw = yaml.safe_load(Path(path).read_text())
    except (OSError, yaml.YAMLError) as exc:
        raise CliError(f"cannot load config {path}: {exc}", EXIT_CONFIG) from exc
    if raw is None:
        return {}
    if not isinstance(raw, dict):
        raise CliError("config must be a mapping of option names to values", EXIT_CONFIG)
    unknown = set(raw) - _SAMPLER_KEYS - set(_RUN_KEYS)
    if unknown:
        raise CliError(f"unknown config keys: {sorted(unknown)}", EXIT_CONFIG)
    return raw


def effective_settings(args):
    """Defaults, then the config file, then explicit flags."""
    merged = dict(_RUN_KEYS)
    merged.update(load_config(getattr(args, "config", None)))
    flags = {"chains": getattr(args, "chains", None), "jobs": getattr(args, "jobs", None),
             "bins": getattr(args, "bins", None), "n_iter": getattr(args, "iters", None),
             "burn_in": getattr(args, "burn_in", None), "seed": getattr(args, "seed", None)}
    merged.update({k: v for k, v in flags.items() if v is not None})
    sampler = {k: v for k, v in merged.items() if k in _SAMPLER_KEYS}
    if "n_iter" in sampler and "burn_in" not in sampler:
        sampler["burn_in"] = int(sampler["n_iter"]) // 2
    try:
        cfg = SamplerConfig.from_dict(sampler)
    except ConfigError as exc:
        raise CliError(f"invalid configuration: {exc}", EXIT_CONFIG) from exc
    run = {k: merged[k] for k in _RUN_KEYS}
    for key, val in run.items():
        if not isinstance(val, int) or isinstance(val, bool) or val < (2 if key == "bins" else 1):
            raise CliError(f"invalid {key}: {val!r}", EXIT_CONFIG)
    return cfg, run


def _write_json(path, obj):
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n")


def _write_columns(path, header, *cols):
    rows = np.column_stack(cols)
    lines = [",".join(header)]
    lines.extend(",".join(repr(float(v)) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n")


def _plot_data(out, x, spec, rng, bins):
    grid = np.linspace(x.min(), x.max(), PLOT_POINTS)
    _write_columns(out / "pdf.csv", ("x", "pdf"), grid, np.exp(dist.log_pdf(spec, grid)))
    _write_columns(out / "cdf.csv", ("x", "cdf"), grid, dist.cdf(spec, grid))
    hist = diag.histogram(x, bins)
    _write_columns(out / "histogram.csv", ("x", "mass"), hist.centers, hist.mass)
    qq = diag.qq_points(x, spec, x.size, rng)
    _write_columns(out / "qq.csv", ("data", "model"), qq[:, 0], qq[:, 1])


def _write_traces(out, traces):
    tdir = out / "traces"
    tdir.mkdir(exist_ok=True)
    for i, tr in enumerate(traces):
        lines = ["iter,k,alpha,gamma,move,accepted"]
        lines.extend(f"{it},{k},{a!r},{g!r},{m},{acc}" for it, k, a, g, m, acc in tr.to_rows())
        (tdir / f"chain_{i:03d}.csv").write_text("\n".join(lines) + "\n")


def cmd_fit(args):
    x = read_series(args.input)
    cfg, run = effective_settings(args)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    est = TransDistributionalRJMCMC(
        n_chains=run["chains"], n_jobs=run["jobs"], hist_bins=run["bins"],
        random_state=cfg.seed, **{k: v for k, v in cfg.to_dict().items() if k != "seed"})
    started = datetime.now(timezone.utc)
    t0 = time.perf_counter()
    log.info("fitting %d values with %d chains x %d iterations", x.size, run["chains"], cfg.n_iter)
    try:
        est.fit(x)
    except DegenerateDataError as exc:
        raise CliError(f"degenerate data: {exc}", EXIT_DEGENERATE) from exc
    elapsed = time.perf_counter() - t0

    manifest = est.manifest(input_path=args.input)
    manifest["run"] = {"chains": run["chains"], "bins": run["bins"]}
    _write_json(out / "report.json", manifest)
    # wall-clock data stays out of report.json so reruns are byte-identical
    _write_json(out / "run_info.json", {
        "started": started.isoformat(),
        "finished": datetime.now(timezone.utc).isoformat(),
        "elapsed_seconds": elapsed,
        "jobs": run["jobs"],
    })
    plot_rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(3,)))
    _plot_data(out, x, est.spec_, plot_rng, run["bins"])
    if args.emit_traces:
        _write_traces(out, est.traces_)
    agg = est.report_
    print(f"family={agg['family']} alpha={agg['alpha_hat']:.4f} gamma={agg['gamma_hat']:.4f} "
          f"votes={agg['votes']} KL={agg['diagnostics']['kl']:.4f} "
          f"KS={agg['diagnostics']['ks_score']:.4f} p={agg['diagnostics']['ks_p_value']:.4f}")
    return EXIT_OK


def _spec_from_args(args, cfg):
    try:
        family = FamilyId.parse(args.family)
        spec = DistSpec(family, args.alpha, args.gamma)
    except ValueError as exc:
        raise CliError(f"invalid distribution: {exc}", EXIT_CONFIG) from exc
    if args.alpha > cfg.alpha_max(family):
        raise CliError(f"alpha {args.alpha} above the {family.label} bound "
                       f"{cfg.alpha_max(family)}", EXIT_CONFIG)
    return spec


def cmd_synth(args):
    cfg, _ = effective_settings(args)
    spec = _spec_from_args(args, cfg)
    if args.n < 1:
        raise CliError("n must be at least 1", EXIT_CONFIG)
    x = dist.sample(spec, args.n, np.random.default_rng(cfg.seed))
    if args.output:
        path = Path(args.output)
    else:
        path = Path(args.out_dir) / f"synth_{spec.family.label}_{args.alpha:g}_{args.gamma:g}.txt"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(repr(float(v)) for v in x) + "\n")
    _write_json(path.with_name(path.name + ".json"),
                {"spec": spec.to_dict(), "n": args.n, "seed": cfg.seed})
    print(path)
    return EXIT_OK


def cmd_diag(args):
    x = read_series(args.input)
    cfg, run = effective_settings(args)
    spec = _spec_from_args(args, cfg)
    if not np.ptp(x) > 0:
        raise CliError("degenerate data: all values equal", EXIT_DEGENERATE)
    rng = np.random.default_rng(cfg.seed)
    hist = diag.histogram(x, run["bins"])
    kl = diag.kl_divergence(hist, spec)
    ks = diag.ks_two_sample(x, spec, x.size, rng)
    qq = diag.qq_points(x, spec, x.size, rng)
    xs = np.sort(x)
    result = {
        "input": str(args.input),
        "spec": spec.to_dict(),
        "seed": cfg.seed,
        "kl": {"value": kl, "bins": run["bins"]},
        "ks": {"score": ks.score, "p_value": ks.p_value, "n_effective": ks.n_effective},
        "qq": {"data": qq[:, 0].tolist(), "model": qq[:, 1].tolist()},
        "cdf": {"x": xs.tolist(),
                "empirical": (np.arange(1, xs.size + 1) / xs.size).tolist(),
                "model": np.atleast_1d(dist.cdf(spec, xs)).tolist()},
    }
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "diagnostics.json", result)
    print(f"KL={kl:.4f} KS={ks.score:.4f} p={ks.p_value:.4f}")
    return EXIT_OK


def _add_common(p):
    p.add_argument("--seed", type=int, default=None, help="base seed (default 0)")
    p.add_argument("--config", default=None, help="YAML or JSON file overriding defaults")
    p.add_argument("--out-dir", default=".", help="output directory")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="transdist",
        description="Fit SaS, generalized Gaussian or Student's t models to 1-D data.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="run the sampler on a data file")
    fit.add_argument("input")
    fit.add_argument("--chains", type=int, default=None, help="independent chains (default 40)")
    fit.add_argument("--iters", type=int, default=None, help="iterations per chain (default 5000)")
    fit.add_argument("--burn-in", type=int, default=None, help="discarded iterations (default half)")
    fit.add_argument("--jobs", type=int, default=None, help="parallel chain workers (default 1)")
    fit.add_argument("--bins", type=int, default=None, help="histogram bins for KL (default 100)")
    fit.add_argument("--emit-traces", action="store_true", help="write per-chain traces")
    _add_common(fit)
    fit.set_defaults(func=cmd_fit)

    synth = sub.add_parser("synth", help="draw a synthetic series")
    synth.add_argument("family", help="sas, gg or t")
    synth.add_argument("alpha", type=float)
    synth.add_argument("gamma", type=float)
    synth.add_argument("n", type=int)
    synth.add_argument("--output", "-o", default=None, help="data file path")
    _add_common(synth)
    synth.set_defaults(func=cmd_synth)

    dg = sub.add_parser("diag", help="KL/KS/Q-Q diagnostics of data against a given member")
    dg.add_argument("input")
    dg.add_argument("family")
    dg.add_argument("alpha", type=float)
    dg.add_argument("gamma", type=float)
    dg.add_argument("--bins", type=int, default=None)
    _add_common(dg)
    dg.set_defaults(func=cmd_diag)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
