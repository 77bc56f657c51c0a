"""Batch front end: predict functionals, run simulations, verify predictions, max-field experiment, profile tools."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np
import yaml

from . import ensemble as en
from . import functionals as fl
from . import harness as hn
from . import profile as pf
from . import testfn as tf
from .errors import ConfigError, NumericalError

_QUICK_N = 200
_QUICK_REPLICAS = 20
_QUICK_GRID = 400

_TOP_KEYS = {"ensemble", "testfn", "run", "profile", "output"}
_ENSEMBLE_KEYS = {"beta", "profile", "offdiag", "diag"}
_PROFILE_KEYS = {"type", "N", "params", "seed"}
_PROFILE_PARAM_KEYS = {"flat": set(), "band": {"W"}, "random": {"roughness"}, "csv": {"path"}}
_ENTRY_KEYS = {"family", "p"}
_RUN_KEYS = {"replicas", "master_seed", "lambda_grid", "maxfield", "rigidity"}
_MAXFIELD_KEYS = {"kappa", "grid"}
_OUTPUT_KEYS = {"dir"}


def _need_mapping(obj, ctx: str) -> dict:
    if not isinstance(obj, dict):
        raise ConfigError(f"{ctx} must be a mapping, got {type(obj).__name__}")
    return obj


def _check_keys(d: dict, allowed: set, ctx: str) -> None:
    extra = sorted(set(d) - allowed)
    if extra:
        raise ConfigError(f"unknown keys in {ctx}: {', '.join(map(repr, extra))}")


def load_config(path) -> dict:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc}") from exc
    try:
        if p.suffix == ".json":
            cfg = json.loads(text)
        else:
            cfg = yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot parse {p}: {exc}") from exc
    cfg = _need_mapping(cfg, str(p))
    _check_keys(cfg, _TOP_KEYS, "config")
    return cfg


def _require(cfg: dict, key: str) -> object:
    if key not in cfg:
        raise ConfigError(f"config needs a {key!r} section")
    return cfg[key]


def _profile_from_config(d, quick: bool) -> pf.VarianceProfile:
    d = dict(_need_mapping(d, "profile"))
    _check_keys(d, _PROFILE_KEYS, "profile")
    kind = d.get("type")
    if kind not in _PROFILE_PARAM_KEYS:
        raise ConfigError(f"profile.type must be one of {sorted(_PROFILE_PARAM_KEYS)}, got {kind!r}")
    params = _need_mapping(d.get("params", {}), "profile.params")
    _check_keys(params, _PROFILE_PARAM_KEYS[kind], f"profile.params ({kind})")
    if kind != "csv":
        if "N" not in d:
            raise ConfigError(f"profile.N is required for type {kind!r}")
        if quick:
            d["N"] = min(int(d["N"]), _QUICK_N)
    if kind == "random" and "seed" not in d:
        raise ConfigError("profile.seed is required for type 'random'")
    try:
        return pf.profile_from_descriptor(d)
    except (KeyError, ValueError, OSError) as exc:
        raise ConfigError(f"bad profile: {exc}") from exc


def _entry_from_config(v, ctx: str) -> en.EntryDistribution:
    if isinstance(v, dict):
        _check_keys(v, _ENTRY_KEYS, ctx)
    try:
        return en.entry_from_config(v)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad {ctx}: {exc}") from exc


def _ensemble_from_config(d, quick: bool) -> en.EnsembleSpec:
    d = _need_mapping(d, "ensemble")
    _check_keys(d, _ENSEMBLE_KEYS, "ensemble")
    beta = d.get("beta", 1)
    if beta not in (1, 2):
        raise ConfigError(f"ensemble.beta must be 1 or 2, got {beta!r}")
    profile = _profile_from_config(_require(d, "profile"), quick)
    off = _entry_from_config(d.get("offdiag", "gaussian"), "ensemble.offdiag")
    diag = _entry_from_config(d.get("diag", "gaussian"), "ensemble.diag")
    try:
        return en.EnsembleSpec(int(beta), profile, off, diag)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _testfn_from_config(v) -> tf.TestFunction:
    try:
        return tf.from_name(v)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad testfn: {exc}") from exc


def _run_config(cfg: dict, spec: en.EnsembleSpec, f: tf.TestFunction, args) -> hn.RunConfig:
    d = _need_mapping(_require(cfg, "run"), "run")
    _check_keys(d, _RUN_KEYS, "run")
    replicas = args.replicas if args.replicas is not None else d.get("replicas")
    if replicas is None:
        raise ConfigError("run.replicas is required (or pass --replicas)")
    replicas = int(replicas)
    if args.quick:
        replicas = min(replicas, max(_QUICK_REPLICAS, 4))
    seed = args.seed if args.seed is not None else int(d.get("master_seed", 0))
    lam = d.get("lambda_grid", [0.0, 0.25, 0.5, 1.0])
    maxfield = None
    if d.get("maxfield") is not None:
        m = _need_mapping(d["maxfield"], "run.maxfield")
        _check_keys(m, _MAXFIELD_KEYS, "run.maxfield")
        if "kappa" not in m or "grid" not in m:
            raise ConfigError("run.maxfield needs kappa and grid")
        grid = int(m["grid"])
        if args.quick:
            grid = min(grid, _QUICK_GRID)
        maxfield = (float(m["kappa"]), grid)
    try:
        return hn.RunConfig(
            spec=spec, f=f, replicas=replicas, master_seed=seed,
            lambda_grid=tuple(float(v) for v in lam),
            maxfield=maxfield,
            rigidity=None if d.get("rigidity") is None else float(d["rigidity"]),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad run section: {exc}") from exc


def _outdir(args, cfg: dict) -> Path:
    out = args.out
    if out is None and "output" in cfg:
        section = _need_mapping(cfg["output"], "output")
        _check_keys(section, _OUTPUT_KEYS, "output")
        out = section.get("dir")
    path = Path(out) if out is not None else Path(".")
    path.mkdir(parents=True, exist_ok=True)
    return path


def _warn_lambda_window(rc: hn.RunConfig) -> None:
    win = hn.lambda_window(rc.spec.N)
    outside = [lam for lam in rc.lambda_grid if abs(lam) > win]
    if outside:
        print(f"warning: lambda values {outside} exceed the trusted window "
              f"|lambda| <= {win:.3g} at N = {rc.spec.N}", file=sys.stderr)


def _progress(done: int, total: int) -> None:
    step = max(1, total // 10)
    if done == total or done % step == 0:
        print(f"replicas {done}/{total}", file=sys.stderr)


def cmd_predict(args) -> int:
    cfg = load_config(args.config)
    spec = _ensemble_from_config(_require(cfg, "ensemble"), args.quick)
    f = _testfn_from_config(_require(cfg, "testfn"))
    summary = en.cumulant_summary(spec)
    pred = fl.clt_prediction(f, spec.profile, summary, spec.beta, check_paths=True)
    out = dict(pred.to_dict())
    out["V_integral"] = fl.variance_integral(f, spec.profile, summary, spec.beta)
    text = json.dumps(out, sort_keys=True)
    print(text)
    if args.out is not None or "output" in cfg:
        (_outdir(args, cfg) / "prediction.json").write_text(text + "\n")
    return 0


def _simulate(args):
    cfg = load_config(args.config)
    spec = _ensemble_from_config(_require(cfg, "ensemble"), args.quick)
    f = _testfn_from_config(_require(cfg, "testfn"))
    rc = _run_config(cfg, spec, f, args)
    _warn_lambda_window(rc)
    res = hn.run_ensemble(rc, threads=args.threads, progress=_progress)
    return cfg, res


def cmd_simulate(args) -> int:
    cfg, res = _simulate(args)
    outdir = _outdir(args, cfg)
    hn.samples_to_csv(outdir / "samples.csv", res.lss_samples)
    summary = res.to_dict()
    del summary["lss_samples"]
    summary["samples_csv"] = "samples.csv"
    text = json.dumps(summary, sort_keys=True)
    (outdir / "summary.json").write_text(text + "\n")
    print(text)
    return 0


def cmd_verify(args) -> int:
    cfg, res = _simulate(args)
    if res.kstats is None:
        raise ConfigError("verify needs run.replicas >= 4")
    report = hn.compare(res)
    report["prediction"] = res.prediction.to_dict()
    text = json.dumps(report, sort_keys=True)
    (_outdir(args, cfg) / "report.json").write_text(text + "\n")
    print(text)
    return 0 if report["overall_pass"] else 1


def cmd_maxpoly(args) -> int:
    cfg = load_config(args.config)
    spec = _ensemble_from_config(_require(cfg, "ensemble"), args.quick)
    d = _need_mapping(_require(cfg, "run"), "run")
    _check_keys(d, _RUN_KEYS, "run")
    if d.get("maxfield") is None:
        raise ConfigError("maxpoly needs a run.maxfield section")
    m = _need_mapping(d["maxfield"], "run.maxfield")
    _check_keys(m, _MAXFIELD_KEYS, "run.maxfield")
    kappa, grid = float(m["kappa"]), int(m["grid"])
    replicas = args.replicas if args.replicas is not None else int(d.get("replicas", 20))
    seed = args.seed if args.seed is not None else int(d.get("master_seed", 0))
    if args.quick:
        replicas = min(replicas, _QUICK_REPLICAS)
        grid = min(grid, _QUICK_GRID)
    out = hn.max_field_experiment(spec, kappa, grid, replicas, master_seed=seed,
                                  threads=args.threads, progress=_progress)
    for r, e in out["collisions"]:
        print(f"collision: replica {r} grid point {e!r} nudged by 1e-9", file=sys.stderr)
    outdir = _outdir(args, cfg)
    rows = np.column_stack([out["re_ratio"], out["im_plus_ratio"], out["im_minus_ratio"]])
    np.savetxt(outdir / "ratios.csv", rows, delimiter=",", fmt="%.17g",
               header="re_ratio,im_plus_ratio,im_minus_ratio", comments="")
    summary = {
        "replicas": replicas,
        "median_re": float(np.median(out["re_ratio"])),
        "median_im_plus": float(np.median(out["im_plus_ratio"])),
        "median_im_minus": float(np.median(out["im_minus_ratio"])),
        "collisions": len(out["collisions"]),
        "ratios_csv": "ratios.csv",
    }
    text = json.dumps(summary, sort_keys=True)
    (outdir / "maxpoly.json").write_text(text + "\n")
    print(text)
    return 0


def cmd_profile(args) -> int:
    cfg = load_config(args.config)
    p = _profile_from_config(_require(cfg, "profile"), args.quick)
    checks = {k: float(v) for k, v in pf.validate(p).items()}
    outdir = _outdir(args, cfg)
    pf.profile_to_csv(p, outdir / "profile.csv")
    summary = {"descriptor": p.descriptor, "checks": checks, "matrix_csv": "profile.csv"}
    print(json.dumps(summary, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="wignerlss",
        description="CLT functionals and Monte Carlo experiments for generalized Wigner spectra",
    )
    sub = ap.add_subparsers(dest="command", required=True)
    handlers = {
        "predict": (cmd_predict, "compute (V, E, B) for a config"),
        "simulate": (cmd_simulate, "Monte Carlo run: LSS samples + summary"),
        "verify": (cmd_verify, "simulate and compare against the prediction"),
        "maxpoly": (cmd_maxpoly, "max of the log characteristic polynomial over the bulk"),
        "profile": (cmd_profile, "construct and inspect a variance profile"),
    }
    for name, (func, help_text) in handlers.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="YAML or JSON experiment file")
        p.add_argument("--seed", type=int, default=None, help="override the file master seed")
        p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--quick", action="store_true", help="cap N, replicas, and grids")
        p.add_argument("--replicas", type=int, default=None, help="override run.replicas")
        p.set_defaults(func=func)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
