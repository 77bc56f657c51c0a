"""Test functions and their Chebyshev expansions in the scaled basis T_n(2 cos t) = cos(n t)."""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.polynomial import chebyshev as _npcheb
from numpy.polynomial import polynomial as _nppoly
from scipy.fft import dct
from scipy.integrate import IntegrationWarning, quad

from .semicircle import gauss_cheb_nodes, msc

_FD_STEP = 1e-5  # central-difference step for black-box derivatives


@dataclass(frozen=True, eq=False)
class TestFunction:
    """Evaluator on [-5, 5] with kind metadata and (optional) analytic derivatives."""

    kind: str          # "polynomial" | "smooth" | "log-real" | "log-imag"
    params: tuple
    fn: Callable = field(repr=False)
    deriv: Optional[Callable] = field(default=None, repr=False)
    deriv2: Optional[Callable] = field(default=None, repr=False)
    label: str = ""
    compact_support: bool = True  # treated as supported within [-5, 5]

    def __call__(self, x):
        return self.fn(x)

    @property
    def cache_key(self):
        if self.kind == "smooth":
            return ("smooth", id(self.fn))
        return (self.kind, self.params)

    def derivative(self, d: int) -> Callable:
        """Order-d derivative as a callable; analytic when available, else central differences."""
        if d == 0:
            return self.fn
        if d == 1:
            if self.deriv is not None:
                return self.deriv
            return lambda x: (self.fn(x + _FD_STEP) - self.fn(x - _FD_STEP)) / (2 * _FD_STEP)
        if d == 2:
            if self.deriv2 is not None:
                return self.deriv2
            return lambda x: (self.fn(x + _FD_STEP) - 2 * self.fn(x) + self.fn(x - _FD_STEP)) / _FD_STEP ** 2
        raise ValueError("derivative order must be 0, 1 or 2")


def polynomial(coeffs: Sequence[float], label: str = "") -> TestFunction:
    """Polynomial in monomial coefficients (c0, c1, ...)."""
    c = tuple(float(v) for v in coeffs)
    if not c:
        raise ValueError("polynomial needs at least one coefficient")
    d1 = _nppoly.polyder(c) if len(c) > 1 else np.zeros(1)
    d2 = _nppoly.polyder(c, 2) if len(c) > 2 else np.zeros(1)
    return TestFunction(
        kind="polynomial",
        params=c,
        fn=lambda x, c=c: _nppoly.polyval(x, c),
        deriv=lambda x, d=tuple(d1): _nppoly.polyval(x, d),
        deriv2=lambda x, d=tuple(d2): _nppoly.polyval(x, d),
        label=label or "poly" + str(list(c)),
        compact_support=False,
    )


def smooth(fn: Callable, label: str = "smooth", deriv: Callable = None, deriv2: Callable = None) -> TestFunction:
    return TestFunction(kind="smooth", params=(label,), fn=fn, deriv=deriv, deriv2=deriv2, label=label)


def gauss_bump(center: float, width: float) -> TestFunction:
    """exp(-(x - center)^2 / (2 width^2))."""
    if width <= 0:
        raise ValueError("gauss width must be positive")
    c, w = float(center), float(width)

    def f(x):
        return np.exp(-((x - c) ** 2) / (2 * w * w))

    def f1(x):
        return -(x - c) / (w * w) * f(x)

    def f2(x):
        return (((x - c) / (w * w)) ** 2 - 1.0 / (w * w)) * f(x)

    return TestFunction(kind="smooth", params=("gauss", c, w), fn=f, deriv=f1, deriv2=f2,
                        label=f"gauss({c},{w})")


def log_real(E: float, eta: float) -> TestFunction:
    """f(x) = Re log(z - x) = log((E-x)^2 + eta^2)/2 at z = E + i eta; singular at x = E when eta = 0."""
    E, eta = float(E), float(eta)

    def f(x):
        u = E - x
        return 0.5 * np.log(u * u + eta * eta)

    def f1(x):
        u = E - x
        return -u / (u * u + eta * eta)

    def f2(x):
        u = E - x
        return (u * u - eta * eta) / (u * u + eta * eta) ** 2

    return TestFunction(kind="log-real", params=(E, eta), fn=f, deriv=f1, deriv2=f2,
                        label=f"logre({E},{eta})")


def log_imag(E: float, eta: float) -> TestFunction:
    """f(x) = Im log(z - x) = atan2(eta, E - x) at z = E + i eta, branch theta in (-pi, pi]."""
    E, eta = float(E), float(eta)

    def f(x):
        return np.arctan2(eta, E - x)

    def f1(x):
        u = E - x
        return eta / (u * u + eta * eta)

    def f2(x):
        u = E - x
        return 2.0 * eta * u / (u * u + eta * eta) ** 2

    return TestFunction(kind="log-imag", params=(E, eta), fn=f, deriv=f1, deriv2=f2,
                        label=f"logim({E},{eta})")


_NAME_RE = re.compile(r"^([a-z]+)\(([^)]*)\)$")

_BUILTIN_CTORS = {"gauss": gauss_bump, "logre": log_real, "logim": log_imag}


def from_name(spec) -> TestFunction:
    """Builtins: "x", "x2", "gauss(center,width)", "logre(E,eta)", "logim(E,eta)"; or a coefficient list."""
    if isinstance(spec, TestFunction):
        return spec
    if isinstance(spec, (list, tuple)):
        return polynomial(spec)
    s = str(spec).strip()
    if s == "x":
        return polynomial((0.0, 1.0), label="x")
    if s == "x2":
        return polynomial((0.0, 0.0, 1.0), label="x2")
    m = _NAME_RE.match(s)
    if m and m.group(1) in _BUILTIN_CTORS:
        try:
            args = [float(v) for v in m.group(2).split(",")]
        except ValueError as exc:
            raise ValueError(f"bad test-function arguments in {s!r}") from exc
        return _BUILTIN_CTORS[m.group(1)](*args)
    raise ValueError(f"unknown test function {s!r}")


def cheb_T(n: int, x):
    """Scaled Chebyshev polynomial: T_0 = 1, T_1 = x/2, T_{n+1} = x T_n - T_{n-1}; T_n(2 cos t) = cos(n t)."""
    if n < 0:
        raise ValueError("order must be >= 0")
    scalar_in = np.isscalar(x) or np.ndim(x) == 0
    xx = np.asarray(x, dtype=float)
    prev = np.ones_like(xx)
    if n == 0:
        return prev.item() if scalar_in else prev
    cur = 0.5 * xx
    for _ in range(n - 1):
        prev, cur = cur, xx * cur - prev
    return cur.item() if scalar_in else cur


def cheb_t_fn(n: int) -> TestFunction:
    """T_n as a TestFunction, evaluated stably in the Chebyshev basis (never via monomials)."""
    e = np.zeros(n + 1)
    e[n] = 1.0
    d1 = _npcheb.chebder(e)
    d2 = _npcheb.chebder(e, 2)
    return TestFunction(
        kind="polynomial",
        params=("cheb", n),
        fn=lambda x: _npcheb.chebval(np.asarray(x) / 2.0, e),
        deriv=lambda x: _npcheb.chebval(np.asarray(x) / 2.0, d1) / 2.0,
        deriv2=lambda x: _npcheb.chebval(np.asarray(x) / 2.0, d2) / 4.0,
        label=f"T{n}",
        compact_support=False,
    )


@dataclass(eq=False)
class ChebCoeffs:
    """Coefficients t_0..t_J of f = t_0/2 + sum t_n T_n, with a bound on the dropped tail."""

    t: np.ndarray
    J: int
    tail_estimate: float
    M: int = 0

    def __post_init__(self):
        self.t = np.asarray(self.t)
        if self.t.shape[0] != self.J + 1:
            raise ValueError("coefficient array must have length J + 1")


def _tail_estimate(t: np.ndarray) -> float:
    a = np.abs(np.asarray(t, dtype=complex))
    J = len(a) - 1
    k = max(5, J // 10)
    seg = a[max(1, J + 1 - k):]
    if seg.size == 0 or seg.max() == 0.0:
        return 0.0
    scale = max(a.max(), 1e-300)
    if seg.max() <= 1e-14 * scale:
        # roundoff floor: report the floor itself as the tail bound
        return float(seg.max() * seg.size)
    pos = seg[seg > 0]
    idx = np.arange(seg.size)[seg > 0]
    if pos.size < 3:
        return float(seg.sum())
    slope = np.polyfit(idx, np.log(pos), 1)[0]
    r = np.exp(slope)
    if r < 0.999:
        return float(seg[-1] * r / (1.0 - r))
    return float(seg.sum())


def cheb_coeffs(f, J: int = 256, M: int = 2048) -> ChebCoeffs:
    """Discrete coefficients t_n = (2/M) sum_j f(x_j) cos(n pi (j+1/2)/M) at Gauss-Chebyshev nodes."""
    if M < 2 * J:
        raise ValueError(f"need M >= 2J, got M={M}, J={J}")
    x = gauss_cheb_nodes(M)
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = np.asarray(f(x) if callable(f) else f, dtype=float)
    bad = ~np.isfinite(vals)
    if bad.any():
        j = int(np.argmax(bad))
        raise ValueError(f"test function is singular at quadrature node x_{j} = {x[j]!r}")
    t = dct(vals, type=2)[: J + 1] / M
    return ChebCoeffs(t=t, J=J, tail_estimate=_tail_estimate(t), M=M)


def log_test_coeffs(z: complex, n: int, part: str = "complex"):
    """Coefficients of log(z - .): t_n = 2 (-1)^(n+1) msc(z)^n / n for n >= 1.

    Real/imag parts are the coefficients of the log-real/log-imag test functions at z.
    """
    if n < 1:
        raise ValueError("n = 0 not provided in closed form; compute it by quadrature")
    if np.imag(z) <= 0:
        raise ValueError("log_test_coeffs requires Im z > 0")
    t = 2.0 * (-1.0) ** (n + 1) * msc(complex(z)) ** n / n
    if part == "complex":
        return t
    if part == "real":
        return t.real
    if part == "imag":
        return t.imag
    raise ValueError(f"unknown part {part!r}")


def reconstruct(t, x):
    """Evaluate the truncated series t_0/2 + sum t_n T_n(x) (Clenshaw via the x/2 substitution)."""
    raw = t.t if isinstance(t, ChebCoeffs) else np.asarray(t)
    c = np.array(raw, copy=True)
    c[0] = c[0] / 2.0
    out = _npcheb.chebval(np.asarray(x) / 2.0, c)
    return out.item() if np.isscalar(x) or np.ndim(x) == 0 else out


def weighted_norm(f: TestFunction, d: int = 0, p: float = 1.0) -> float:
    """(int_{-5}^{5} |f^(d)(x)|^p / sqrt|4 - x^2| dx)^(1/p), endpoint singularities substituted away."""
    if p <= 0:
        raise ValueError("p must be positive")
    g = f.derivative(d)

    # |x| < 2: x = 2 sin(t), weight exactly cancels
    def inner(t):
        return np.abs(g(2.0 * np.sin(t))) ** p

    # |x| > 2: x = +-2 cosh(u), weight exactly cancels
    def outer(u, sign):
        return np.abs(g(sign * 2.0 * np.cosh(u))) ** p

    umax = np.arccosh(2.5)
    total = 0.0
    pieces = [
        (inner, -np.pi / 2, np.pi / 2, ()),
        (outer, 0.0, umax, (1.0,)),
        (outer, 0.0, umax, (-1.0,)),
    ]
    for fn, a, b, args in pieces:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", IntegrationWarning)
            val, err = quad(fn, a, b, args=args, limit=200)
        if not np.isfinite(val) or err > 1e-6 + 1e-3 * abs(val):
            raise ValueError("weighted norm integral did not converge (non-integrable singularity?)")
        total += val
    return float(total ** (1.0 / p))
