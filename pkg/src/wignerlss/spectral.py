"""Per-sample spectral quantities: eigenvalues, centered linear statistics, the log-determinant field, rigidity."""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import semicircle as sc
from .errors import NumericalError
from .testfn import TestFunction

_CONSERVATION_TOL = 1e-8   # per-size budget for eigensolver trace identities
_SUPPORT_LIMIT = 5.0       # test functions are only guaranteed evaluable here
_CENTERING_NODES = 2048
_HERMITIAN_TOL = 1e-12

_centering_cache: dict = {}


@dataclass(frozen=True)
class SpectralSample:
    """Ascending spectrum of one matrix draw, with the trace data backing conservation checks.

    source carries (config hash, master seed, replica index) when produced by the
    sampling pipeline; synthetic samples may leave it empty.
    """

    eigs: np.ndarray
    trace: float
    frob_sq: float
    source: tuple = ()

    def __post_init__(self):
        eigs = np.asarray(self.eigs, dtype=float)
        eigs.setflags(write=False)
        object.__setattr__(self, "eigs", eigs)
        n = eigs.size
        if n == 0:
            raise ValueError("empty spectrum")
        if np.any(np.diff(eigs) < 0.0):
            raise ValueError("eigenvalues must be ascending")
        err1 = abs(float(np.sum(eigs)) - self.trace)
        err2 = abs(float(np.sum(eigs * eigs)) - self.frob_sq)
        if err1 > _CONSERVATION_TOL * n or err2 > _CONSERVATION_TOL * n:
            raise NumericalError(
                f"spectrum fails conservation checks: |sum l - tr| = {err1:.3e}, "
                f"|sum l^2 - frob^2| = {err2:.3e}, budget {_CONSERVATION_TOL * n:.3e}"
            )

    @property
    def N(self) -> int:
        return self.eigs.size


def eigenvalues(H: np.ndarray, source: tuple = ()) -> SpectralSample:
    """Full ascending spectrum of a Hermitian matrix via a dense symmetric solver."""
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError("H must be square")
    if not np.allclose(H, H.conj().T, rtol=0.0, atol=_HERMITIAN_TOL):
        raise ValueError("H must be Hermitian")
    try:
        eigs = np.linalg.eigvalsh(H)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigenvalue solver failed: {exc}") from exc
    trace = float(np.trace(H).real)
    frob_sq = float(np.sum(np.abs(H) ** 2))
    return SpectralSample(eigs=eigs, trace=trace, frob_sq=frob_sq, source=source)


def lss(sample: SpectralSample, f: TestFunction) -> float:
    """Centered linear statistic sum_i f(eig_i) - N int f d(rho_sc).

    The centering integral uses a 2048-node rule and is cached per test function,
    so sweeping replicas pays for quadrature once.
    """
    eigs = sample.eigs
    if eigs[0] < -_SUPPORT_LIMIT or eigs[-1] > _SUPPORT_LIMIT:
        raise NumericalError(
            f"eigenvalue outside [-{_SUPPORT_LIMIT}, {_SUPPORT_LIMIT}] "
            f"(min {eigs[0]:.6g}, max {eigs[-1]:.6g}); sampling or solver bug"
        )
    key = f.cache_key
    center = _centering_cache.get(key)
    if center is None:
        center = float(sc.integrate_rho_sc(f, nodes=_CENTERING_NODES).real)
        _centering_cache[key] = center
    return float(np.sum(f(eigs)) - sample.N * center)


@functools.lru_cache(maxsize=65536)
def _det_log_potential(E: float, eta: float) -> complex:
    if eta == 0.0:
        return complex(sc.log_potential(E))
    return sc.log_potential_quad(E, eta, nodes=_CENTERING_NODES)


def log_char_field(sample: SpectralSample, E, eta: float):
    """Centered log-determinant field at E + i*eta, principal branch.

    Re part: sum_j (1/2) log((eig_j - E)^2 + eta^2) minus N times the deterministic
    log potential. Im part at eta = 0: pi (#{eig > E} - N (1 - F_sc(E))); at eta > 0
    the principal complex log is used throughout. E may be a scalar or a grid;
    evaluation over a grid is vectorized with output in grid order.
    """
    if eta < 0.0:
        raise ValueError("eta must be >= 0")
    scalar_in = np.isscalar(E) or np.ndim(E) == 0
    Es = np.atleast_1d(np.asarray(E, dtype=float))
    eigs = sample.eigs
    N = sample.N
    if eta == 0.0:
        if np.any(np.abs(Es) >= 2.0):
            raise ValueError("eta = 0 field needs E inside (-2, 2)")
        diff = Es[:, None] - eigs[None, :]
        if np.any(diff == 0.0):
            hit = Es[np.any(diff == 0.0, axis=1)][0]
            raise NumericalError(f"E = {hit!r} collides with an eigenvalue at eta = 0")
        re = np.sum(np.log(np.abs(diff)), axis=1)
        counts = N - np.searchsorted(eigs, Es, side="right")
        im = np.pi * counts.astype(float)
        pot = sc.log_potential(Es)
        out = (re - N * pot.real) + 1j * (im - N * pot.imag)
    else:
        z = Es[:, None] + 1j * eta
        total = np.sum(np.log(z - eigs[None, :]), axis=1)
        pot = np.array([_det_log_potential(float(e), float(eta)) for e in Es])
        out = total - N * pot
    if scalar_in:
        return complex(out[0])
    return out


class RigidityStats(NamedTuple):
    max_stat: float
    min_stat: float


@functools.lru_cache(maxsize=32)
def _classical_all(N: int) -> np.ndarray:
    g = sc.classical_locations(np.arange(1, N + 1), N)
    g.setflags(write=False)
    return g


def _rigidity_vector(sample: SpectralSample, kappa: float) -> np.ndarray:
    """Normalized gaps (pi/sqrt2) rho_sc(g_k) N (eig_k - g_k)/log N over the bulk window."""
    if not 0.0 < kappa < 0.5:
        raise ValueError("kappa must be in (0, 1/2)")
    N = sample.N
    k_lo = int(np.ceil(kappa * N))
    k_hi = int(np.floor((1.0 - kappa) * N))
    if k_lo < 1 or k_lo > k_hi:
        raise ValueError(f"empty bulk window for kappa = {kappa}, N = {N}")
    ks = np.arange(k_lo, k_hi + 1)
    gam = _classical_all(N)[ks - 1]
    lam = sample.eigs[ks - 1]
    return (np.pi / np.sqrt(2.0)) * sc.rho_sc(gam) * N * (lam - gam) / np.log(N)


def rigidity_stats(sample: SpectralSample, kappa: float) -> RigidityStats:
    """Extremes of the normalized eigenvalue-location gaps over the kappa-bulk."""
    v = _rigidity_vector(sample, kappa)
    return RigidityStats(float(np.max(v)), float(np.min(v)))


def empirical_stieltjes(sample: SpectralSample, z):
    """N^-1 sum_j 1/(eig_j - z) for non-real z."""
    scalar_in = np.isscalar(z) or np.ndim(z) == 0
    zz = np.atleast_1d(np.asarray(z, dtype=complex))
    if np.any(zz.imag == 0.0):
        raise ValueError("empirical_stieltjes requires Im z != 0")
    out = np.mean(1.0 / (sample.eigs[None, :] - zz[:, None]), axis=1)
    if scalar_in:
        return complex(out[0])
    return out


def field_to_csv(path, E_grid: np.ndarray, values: np.ndarray) -> None:
    """Dump one replica's field as rows E, Re L, Im L."""
    E_grid = np.asarray(E_grid, dtype=float)
    values = np.asarray(values, dtype=complex)
    if E_grid.shape != values.shape:
        raise ValueError("grid and field shapes differ")
    rows = np.column_stack([E_grid, values.real, values.imag])
    np.savetxt(path, rows, delimiter=",", fmt="%.17g", header="E,ReL,ImL", comments="")
