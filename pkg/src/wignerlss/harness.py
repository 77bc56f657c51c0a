"""Monte Carlo orchestration: replica execution, empirical characteristic function,
k-statistic cumulant estimates, theory-vs-experiment reports, and the max-field experiment."""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np

from . import ensemble as en
from . import functionals as fl
from . import spectral as sp
from .errors import NumericalError
from .testfn import TestFunction

_COLLISION_NUDGE = 1e-9
_CHAR_THRESHOLD_CONST = 10.0   # additive c/N allowance in the CF comparison
_Z_THRESHOLD = 4.0             # z-score gate for mean/variance/third-cumulant items
_LAMBDA_WINDOW_CONST = 0.5


def lambda_window(N: int) -> float:
    """Largest |lambda| the CLT expansion is trusted at for size N; callers warn beyond it."""
    return _LAMBDA_WINDOW_CONST * N ** 0.4


@dataclass(frozen=True)
class RunConfig:
    """One batch: ensemble, test function, replica count, seed, and experiment flags.

    maxfield is (kappa, E_grid_size) or None; rigidity is the bulk fraction kappa or None.
    """

    spec: en.EnsembleSpec
    f: TestFunction
    replicas: int
    master_seed: int
    lambda_grid: tuple = (0.0, 0.25, 0.5, 1.0)
    maxfield: Optional[tuple] = None
    rigidity: Optional[float] = None

    def __post_init__(self):
        if self.replicas < 2:
            raise ValueError("replicas must be >= 2")
        lam = np.asarray(self.lambda_grid, dtype=float)
        if lam.size and not np.all(np.isfinite(lam)):
            raise ValueError("lambda_grid must be finite")
        object.__setattr__(self, "lambda_grid", tuple(float(v) for v in lam))
        if self.maxfield is not None:
            kappa, grid_size = self.maxfield
            if not 0.0 < kappa < 1.0:
                raise ValueError("maxfield kappa must be in (0, 1)")
            if int(grid_size) < 100:
                raise ValueError("maxfield grid must have >= 100 points")
            object.__setattr__(self, "maxfield", (float(kappa), int(grid_size)))
        if self.rigidity is not None and not 0.0 < self.rigidity < 0.5:
            raise ValueError("rigidity kappa must be in (0, 1/2)")

    def descriptor(self) -> dict:
        return {
            "ensemble": self.spec.descriptor(),
            "f": self.f.label,
            "replicas": self.replicas,
            "master_seed": self.master_seed,
            "lambda_grid": list(self.lambda_grid),
            "maxfield": list(self.maxfield) if self.maxfield else None,
            "rigidity": self.rigidity,
        }


class CumulantEstimates(NamedTuple):
    k1: float
    k2: float
    k3: float
    se1: float
    se2: float
    se3: float


@dataclass
class RunResult:
    config: RunConfig
    lss_samples: np.ndarray
    char_emp: np.ndarray
    kstats: Optional[CumulantEstimates]   # None when replicas < 4
    prediction: fl.CltPrediction
    max_re: Optional[np.ndarray] = None
    max_im_plus: Optional[np.ndarray] = None
    max_im_minus: Optional[np.ndarray] = None
    collisions: tuple = ()
    rigidity_max: Optional[np.ndarray] = None
    rigidity_min: Optional[np.ndarray] = None

    def to_dict(self) -> dict:
        out = {
            "config": self.config.descriptor(),
            "prediction": self.prediction.to_dict(),
            "lss_samples": [float(v) for v in self.lss_samples],
            "char": [
                {"lambda": lam, "re": float(c.real), "im": float(c.imag)}
                for lam, c in zip(self.config.lambda_grid, self.char_emp)
            ],
            "char_se": 1.0 / np.sqrt(len(self.lss_samples)),
            "kstats": dict(self.kstats._asdict()) if self.kstats is not None else None,
        }
        if self.max_re is not None:
            out["maxfield"] = {
                "re_ratio": [float(v) for v in self.max_re],
                "im_plus_ratio": [float(v) for v in self.max_im_plus],
                "im_minus_ratio": [float(v) for v in self.max_im_minus],
                "collisions": [[int(r), float(e)] for r, e in self.collisions],
            }
        if self.rigidity_max is not None:
            out["rigidity"] = {
                "max": [float(v) for v in self.rigidity_max],
                "min": [float(v) for v in self.rigidity_min],
            }
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def empirical_char(samples: np.ndarray, lam):
    """R^-1 sum_r exp(i lam X_r), modulus clipped into the unit disk; lam scalar or grid."""
    x = np.asarray(samples, dtype=float)
    scalar_in = np.isscalar(lam) or np.ndim(lam) == 0
    la = np.atleast_1d(np.asarray(lam, dtype=float))
    vals = np.mean(np.exp(1j * np.outer(la, x)), axis=1)
    mod = np.abs(vals)
    vals = np.where(mod > 1.0, vals / mod, vals)
    if scalar_in:
        return complex(vals[0])
    return vals


def cumulant_estimates(samples: np.ndarray) -> CumulantEstimates:
    """Unbiased k-statistics (k1, k2, k3) with delete-1 jackknife standard errors.

    Jackknife replicates come from downdated power sums, so the whole estimate is O(R).
    Samples are pre-centered by their mean (k2, k3 are shift invariant) to keep the
    power sums well conditioned.
    """
    x = np.asarray(samples, dtype=float)
    R = x.size
    if R < 4:
        raise ValueError("cumulant_estimates needs at least 4 samples")
    k1 = float(np.mean(x))
    y = x - k1
    S1, S2, S3 = float(np.sum(y)), float(np.sum(y * y)), float(np.sum(y ** 3))

    def kstats(s1, s2, s3, n):
        m2 = s2 / n - (s1 / n) ** 2
        m3 = s3 / n - 3.0 * s2 * s1 / n ** 2 + 2.0 * (s1 / n) ** 3
        k2 = np.maximum(m2 * n / (n - 1.0), 0.0)
        k3 = m3 * n * n / ((n - 1.0) * (n - 2.0))
        return k2, k3

    k2, k3 = kstats(S1, S2, S3, R)
    mean_i = (R * k1 + S1 - x) / (R - 1.0)
    k2_i, k3_i = kstats(S1 - y, S2 - y * y, S3 - y ** 3, R - 1.0)

    def jack_se(theta):
        return float(np.sqrt((R - 1.0) / R * np.sum((theta - np.mean(theta)) ** 2)))

    return CumulantEstimates(
        k1=k1, k2=float(k2), k3=float(k3),
        se1=jack_se(mean_i), se2=jack_se(k2_i), se3=jack_se(k3_i),
    )


def _max_ratios(sample: sp.SpectralSample, kappa: float, grid_size: int, replica: int):
    """Sup of Re, +Im, -Im of the eta = 0 field over the bulk grid, each over sqrt(2) log N.

    A grid point that lands exactly on an eigenvalue is nudged by 1e-9 and recorded.
    """
    half = 2.0 - kappa
    grid = np.linspace(-half, half, grid_size)
    collisions = []
    for _ in range(8):
        hit = np.isin(grid, sample.eigs)
        if not np.any(hit):
            break
        for e in grid[hit]:
            collisions.append((replica, float(e)))
        grid = np.where(hit, grid + _COLLISION_NUDGE, grid)
    L = sp.log_char_field(sample, grid, 0.0)
    denom = np.sqrt(2.0) * np.log(sample.N)
    return (
        float(np.max(L.real) / denom),
        float(np.max(L.imag) / denom),
        float(np.max(-L.imag) / denom),
        collisions,
    )


def _replica_outputs(config: RunConfig, r: int) -> dict:
    H = en.sample(config.spec, (config.master_seed, r))
    s = sp.eigenvalues(H, source=(config.spec.config_hash(), config.master_seed, r))
    out = {"lss": sp.lss(s, config.f)}
    if config.maxfield is not None:
        out["max"] = _max_ratios(s, config.maxfield[0], config.maxfield[1], r)
    if config.rigidity is not None:
        st = sp.rigidity_stats(s, config.rigidity)
        out["rigidity"] = (st.max_stat, st.min_stat)
    return out


def run_ensemble(config: RunConfig, threads: int = 1,
                 progress: Optional[Callable[[int, int], None]] = None) -> RunResult:
    """Run all replicas, aggregate deterministically in replica order, attach the prediction.

    Per-replica RNG is derived from (master_seed, replica index) by counter, and results
    are collected in index order, so the output is independent of thread count.
    """
    R = config.replicas
    rows = [None] * R
    if threads <= 1:
        for r in range(R):
            try:
                rows[r] = _replica_outputs(config, r)
            except Exception as exc:
                raise NumericalError(
                    f"replica {r} failed (master_seed {config.master_seed}): {exc}") from exc
            if progress is not None:
                progress(r + 1, R)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(_replica_outputs, config, r) for r in range(R)]
            for r, fut in enumerate(futures):
                try:
                    rows[r] = fut.result()
                except Exception as exc:
                    raise NumericalError(
                        f"replica {r} failed (master_seed {config.master_seed}): {exc}") from exc
                if progress is not None:
                    progress(r + 1, R)

    lss_samples = np.array([row["lss"] for row in rows])
    summary = en.cumulant_summary(config.spec)
    prediction = fl.clt_prediction(config.f, config.spec.profile, summary, config.spec.beta)
    result = RunResult(
        config=config,
        lss_samples=lss_samples,
        char_emp=empirical_char(lss_samples, np.asarray(config.lambda_grid)),
        kstats=cumulant_estimates(lss_samples) if R >= 4 else None,
        prediction=prediction,
    )
    if config.maxfield is not None:
        quads = [row["max"] for row in rows]
        result.max_re = np.array([q[0] for q in quads])
        result.max_im_plus = np.array([q[1] for q in quads])
        result.max_im_minus = np.array([q[2] for q in quads])
        result.collisions = tuple(c for q in quads for c in q[3])
    if config.rigidity is not None:
        pairs = [row["rigidity"] for row in rows]
        result.rigidity_max = np.array([p[0] for p in pairs])
        result.rigidity_min = np.array([p[1] for p in pairs])
    return result


def compare(result: RunResult, prediction: Optional[fl.CltPrediction] = None,
            char_const: float = _CHAR_THRESHOLD_CONST,
            z_threshold: float = _Z_THRESHOLD) -> dict:
    """Per-lambda CF distances and z-scores against the prediction; JSON-ready report.

    The third-cumulant item checks |k3| against both 2|B| and |B| and records which
    convention the data supports; it passes if either lands within the z gate.
    """
    if result.kstats is None:
        raise ValueError("compare needs cumulant estimates; run with replicas >= 4")
    pred = prediction if prediction is not None else result.prediction
    R = len(result.lss_samples)
    N = result.config.spec.N
    ks = result.kstats
    char_threshold = 4.0 / np.sqrt(R) + char_const / N

    char_rows = []
    for lam, emp in zip(result.config.lambda_grid, result.char_emp):
        model = fl.predicted_char(lam, pred)
        diff = abs(emp - model)
        char_rows.append({
            "lambda": lam,
            "empirical": [float(emp.real), float(emp.imag)],
            "predicted": [float(model.real), float(model.imag)],
            "abs_diff": float(diff),
            "threshold": float(char_threshold),
            "pass": bool(diff <= char_threshold),
        })

    def zscore(est, target, se):
        if se == 0.0:
            return 0.0 if est == target else float("inf")
        return (est - target) / se

    z_mean = zscore(ks.k1, pred.mean_shift, ks.se1)
    z_var = zscore(ks.k2, pred.variance, ks.se2)
    two_b = 2.0 * abs(pred.cubic)
    one_b = abs(pred.cubic)
    z_k3_two = zscore(abs(ks.k3), two_b, ks.se3)
    z_k3_one = zscore(abs(ks.k3), one_b, ks.se3)
    convention = "2|B|" if abs(z_k3_two) <= abs(z_k3_one) else "|B|"

    report = {
        "char": char_rows,
        "mean": {
            "estimate": ks.k1, "se": ks.se1, "predicted": pred.mean_shift,
            "z": float(z_mean), "threshold": z_threshold,
            "pass": bool(abs(z_mean) <= z_threshold),
        },
        "variance": {
            "estimate": ks.k2, "se": ks.se2, "predicted": pred.variance,
            "z": float(z_var), "threshold": z_threshold,
            "pass": bool(abs(z_var) <= z_threshold),
        },
        "third_cumulant": {
            "estimate": ks.k3, "se": ks.se3,
            "predicted_two_b": two_b, "predicted_one_b": one_b,
            "z_two_b": float(z_k3_two), "z_one_b": float(z_k3_one),
            "convention_supported": convention,
            "empirical_sign": int(np.sign(ks.k3)),
            "threshold": z_threshold,
            "pass": bool(min(abs(z_k3_two), abs(z_k3_one)) <= z_threshold),
        },
    }
    items = [row["pass"] for row in char_rows]
    items += [report["mean"]["pass"], report["variance"]["pass"], report["third_cumulant"]["pass"]]
    report["overall_pass"] = bool(all(items))
    return report


def max_field_experiment(spec: en.EnsembleSpec, kappa: float, E_grid_size: int, R: int,
                         master_seed: int = 0, threads: int = 1,
                         progress: Optional[Callable[[int, int], None]] = None) -> dict:
    """Distribution of sup Re L / (sqrt2 log N) and the two Im analogues over R replicas."""
    if not 0.0 < kappa < 1.0:
        raise ValueError("kappa must be in (0, 1)")
    if E_grid_size < 100:
        raise ValueError("E_grid_size must be >= 100")

    def worker(r):
        H = en.sample(spec, (master_seed, r))
        s = sp.eigenvalues(H, source=(spec.config_hash(), master_seed, r))
        return _max_ratios(s, kappa, E_grid_size, r)

    quads = [None] * R
    if threads <= 1:
        for r in range(R):
            try:
                quads[r] = worker(r)
            except Exception as exc:
                raise NumericalError(f"replica {r} failed (master_seed {master_seed}): {exc}") from exc
            if progress is not None:
                progress(r + 1, R)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(worker, r) for r in range(R)]
            for r, fut in enumerate(futures):
                try:
                    quads[r] = fut.result()
                except Exception as exc:
                    raise NumericalError(f"replica {r} failed (master_seed {master_seed}): {exc}") from exc
                if progress is not None:
                    progress(r + 1, R)
    return {
        "re_ratio": np.array([q[0] for q in quads]),
        "im_plus_ratio": np.array([q[1] for q in quads]),
        "im_minus_ratio": np.array([q[2] for q in quads]),
        "collisions": tuple(c for q in quads for c in q[3]),
    }


def samples_to_csv(path, samples: np.ndarray) -> None:
    """One LSS sample per row."""
    np.savetxt(path, np.asarray(samples, dtype=float), fmt="%.17g", header="lss", comments="")
