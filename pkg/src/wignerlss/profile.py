"""Doubly stochastic variance profiles S: construction, validation, spectral functionals."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import NumericalError

_ROW_SUM_TOL = 1e-10        # construction-time Perron check
_VALIDATE_TOL = 1e-8        # looser validation bound for large-N roundoff
_BAND_BLEND = 1e-3          # flat blend restoring strict positivity of band profiles
_SINKHORN_TOL = 1e-12
_SINKHORN_MAX_ITER = 10_000
_RESOLVENT_GUARD = 1e-10


@dataclass(eq=False)
class VarianceProfile:
    """S = E|H_ij|^2 with its spectral data; immutable after construction."""

    N: int
    S: np.ndarray
    bounds: tuple            # (c_low, c_high): c_low/N <= S_ij <= c_high/N
    spectrum: np.ndarray     # eigenvalues of S, descending; spectrum[0] = 1
    eigvecs: np.ndarray      # orthonormal columns matching spectrum order
    a_spectrum: np.ndarray   # eigenvalues of A = S - ee*/N, descending
    descriptor: dict = field(default_factory=dict)

    @property
    def gap(self) -> float:
        return float(1.0 - self.spectrum[1]) if self.N > 1 else 1.0

    @property
    def trace(self) -> float:
        return float(np.trace(self.S))

    @classmethod
    def from_matrix(cls, S: np.ndarray, descriptor: Optional[dict] = None) -> "VarianceProfile":
        S = np.asarray(S, dtype=float)
        N = S.shape[0]
        if S.shape != (N, N):
            raise ValueError("S must be square")
        if not np.array_equal(S, S.T):
            raise ValueError("S must be exactly symmetric")
        if np.min(S) <= 0.0:
            raise ValueError("S entries must be strictly positive")
        e = np.ones(N)
        if np.max(np.abs(S @ e - e)) > _ROW_SUM_TOL:
            raise ValueError("S must be doubly stochastic: row sums deviate beyond 1e-10")
        vals, vecs = np.linalg.eigh(S)
        order = np.argsort(vals)[::-1]
        vals, vecs = vals[order], vecs[:, order]
        a_vals = np.sort(np.linalg.eigvalsh(S - 1.0 / N))[::-1]
        return cls(
            N=N,
            S=S,
            bounds=(float(N * S.min()), float(N * S.max())),
            spectrum=vals,
            eigvecs=vecs,
            a_spectrum=a_vals,
            descriptor=descriptor or {"type": "matrix", "N": N, "params": {}, "seed": None},
        )


def profile_flat(N: int) -> VarianceProfile:
    """S_ij = 1/N: the classical Wigner profile; A = 0."""
    if N < 2:
        raise ValueError("N must be >= 2")
    return VarianceProfile.from_matrix(
        np.full((N, N), 1.0 / N), {"type": "flat", "N": N, "params": {}, "seed": None}
    )


def profile_band(N: int, W: int) -> VarianceProfile:
    """Circulant band of half-width W, blended with flat to restore strict positivity."""
    if not 1 <= W <= (N - 1) // 2:
        raise ValueError(f"need 1 <= W <= (N-1)/2, got W={W}, N={N}")
    idx = np.arange(N)
    dist = np.abs(idx[:, None] - idx[None, :])
    dist = np.minimum(dist, N - dist)
    band = (dist <= W) / (2.0 * W + 1.0)
    S = (1.0 - _BAND_BLEND) * band + _BAND_BLEND / N
    S = 0.5 * (S + S.T)  # exact symmetry against any roundoff asymmetry
    return VarianceProfile.from_matrix(
        S, {"type": "band", "N": N, "params": {"W": int(W)}, "seed": None}
    )


def profile_random_ds(N: int, seed: int, roughness: float = 0.5) -> VarianceProfile:
    """Symmetric Sinkhorn scaling of exp(roughness * g), g symmetric standard normal."""
    if N < 2:
        raise ValueError("N must be >= 2")
    if not 0.0 <= roughness <= 1.0:
        raise ValueError("roughness must lie in [0, 1]")
    rng = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    G = rng.standard_normal((N, N))
    g = np.triu(G, 1)
    g = g + g.T + np.diag(np.diag(G))
    M = np.exp(roughness * g)

    d = np.ones(N)
    resid = np.inf
    for _ in range(_SINKHORN_MAX_ITER):
        Md = M @ d
        resid = float(np.max(np.abs(d * Md - 1.0)))  # row sums of DMD are d_i (Md)_i
        if resid < _SINKHORN_TOL:
            break
        d = np.sqrt(d / Md)
    else:
        raise NumericalError(f"Sinkhorn did not converge: row-sum residual {resid:.3e}")
    S = d[:, None] * M * d[None, :]
    S = 0.5 * (S + S.T)
    return VarianceProfile.from_matrix(
        S, {"type": "random", "N": N, "params": {"roughness": float(roughness)}, "seed": int(seed)}
    )


def validate(profile_or_S) -> dict:
    """Row-sum error, entry bounds (times N), and spectral gap; raises on hard violations."""
    if isinstance(profile_or_S, VarianceProfile):
        S, spectrum = profile_or_S.S, profile_or_S.spectrum
    else:
        S = np.asarray(profile_or_S, dtype=float)
        spectrum = np.sort(np.linalg.eigvalsh(S))[::-1]
    N = S.shape[0]
    report = {
        "row_sum_err": float(np.max(np.abs(S.sum(axis=1) - 1.0))),
        "min_entry_N": float(N * S.min()),
        "max_entry_N": float(N * S.max()),
        "spectral_gap": float(1.0 - spectrum[1]) if N > 1 else 1.0,
    }
    if report["row_sum_err"] > _VALIDATE_TOL:
        raise ValueError(f"row sums deviate by {report['row_sum_err']:.3e} > {_VALIDATE_TOL}")
    if S.min() <= 0.0:
        raise ValueError("profile has a non-positive entry")
    return report


def trace_powers(profile: VarianceProfile, J: int) -> np.ndarray:
    """tr S^j = sum_i s_i^j for j = 1..J."""
    if J < 1:
        raise ValueError("J must be >= 1")
    out = np.empty(J)
    p = profile.spectrum.copy()
    for j in range(J):
        out[j] = p.sum()
        if j < J - 1:
            p *= profile.spectrum
    return out


def resolvent_trace(profile: VarianceProfile, M):
    """tr(S (1 - M S)^{-1}) = sum_i s_i / (1 - M s_i) for complex |M| <= 1, vectorized over M."""
    scalar_in = np.isscalar(M) or np.ndim(M) == 0
    MM = np.asarray(M, dtype=complex)
    s = profile.spectrum
    denom = 1.0 - MM[..., None] * s
    small = np.abs(denom) <= _RESOLVENT_GUARD
    if small.any():
        i = int(np.argwhere(small)[0][-1])
        raise NumericalError(
            f"resolvent trace singular: |1 - M s_i| <= {_RESOLVENT_GUARD} at eigenvalue s_{i} = {s[i]!r}"
        )
    out = (s / denom).sum(axis=-1)
    return complex(out) if scalar_in else out


def profile_to_csv(profile: VarianceProfile, path) -> None:
    np.savetxt(path, profile.S, delimiter=",", fmt="%.17g")


def profile_from_csv(path) -> VarianceProfile:
    S = np.loadtxt(path, delimiter=",", ndmin=2)
    S = 0.5 * (S + S.T)
    return VarianceProfile.from_matrix(
        S, {"type": "csv", "N": S.shape[0], "params": {"path": str(path)}, "seed": None}
    )


def profile_to_json(profile: VarianceProfile, path) -> None:
    Path(path).write_text(json.dumps(profile.descriptor, sort_keys=True))


def profile_from_descriptor(d: dict) -> VarianceProfile:
    """Rebuild a profile from its {type, N, params, seed} descriptor."""
    kind = d.get("type")
    params = d.get("params", {})
    if kind == "flat":
        return profile_flat(int(d["N"]))
    if kind == "band":
        return profile_band(int(d["N"]), int(params["W"]))
    if kind == "random":
        return profile_random_ds(int(d["N"]), int(d["seed"]), float(params.get("roughness", 0.5)))
    if kind == "csv":
        return profile_from_csv(params["path"])
    raise ValueError(f"unknown profile type {kind!r}")


def profile_from_json(path) -> VarianceProfile:
    return profile_from_descriptor(json.loads(Path(path).read_text()))
