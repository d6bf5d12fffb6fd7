"""Shared numerical kernels.

Gauss-Jacobi quadrature for endpoint-singular integrands, Chebyshev
expansions with an exact logarithmic-kernel transform, a bracketing
root finder and the extended-precision policy used by the spectrum code.
"""
from __future__ import annotations

import math
from functools import lru_cache
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

import numpy as np
from scipy.fft import dct
from scipy.optimize import brentq
from scipy.special import roots_jacobi

__all__ = [
    "QuadratureError",
    "BracketError",
    "PrecisionPolicy",
    "QuadratureRule",
    "gauss_nodes",
    "integrate_singular",
    "integrate_singular_adaptive",
    "find_root_monotone",
    "ChebyshevExpansion",
    "chebyshev_expansion",
    "log_potential",
    "parse_angle",
    "angle_value",
]

ROOT_TOL = 1e-12


class QuadratureError(RuntimeError):
    """Raised when a quadrature rule could not be constructed."""


class BracketError(ValueError):
    """Raised when a root bracket does not contain a sign change."""

    def __init__(self, lo, hi, glo, ghi):
        super().__init__(
            f"no sign change on [{lo!r}, {hi!r}]: g(lo)={glo!r}, g(hi)={ghi!r}")
        self.lo, self.hi, self.glo, self.ghi = lo, hi, glo, ghi


def _default_scale_rule(n: int, x_max: float) -> int:
    return math.ceil(1.6 * n * max(x_max, 0.0) / math.log(2.0))


def _zero_rule(n, x_max):
    return 0


@dataclass(frozen=True)
class PrecisionPolicy:
    """Map a problem size and the smallest eigenvalue scale to mantissa bits.

    Eigenvalues down to ``exp(-x_max * n)`` need roughly ``x_max * n / ln 2``
    bits below unit scale; the default rule multiplies that by 1.6 and adds
    ``guard_bits``.
    """

    base_bits: int = 128
    guard_bits: int = 64
    scale_rule: Optional[Callable[[int, float], int]] = None

    def __post_init__(self):
        if self.base_bits < 64:
            raise ValueError("base_bits must be at least 64")
        if self.guard_bits < 0:
            raise ValueError("guard_bits must be nonnegative")

    @classmethod
    def fixed(cls, bits: int) -> "PrecisionPolicy":
        """Policy that always returns ``bits``."""
        return cls(base_bits=int(bits), guard_bits=0, scale_rule=_zero_rule)

    def bits(self, n: int, x_max: float) -> int:
        rule = self.scale_rule or _default_scale_rule
        return max(self.base_bits, int(rule(n, x_max)) + self.guard_bits)


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss rule on [-1, 1] for the weight (1-x)**exponent_right * (1+x)**exponent_left."""

    nodes: np.ndarray
    weights: np.ndarray
    exponent_left: float
    exponent_right: float

    @property
    def degree(self) -> int:
        return 2 * len(self.nodes) - 1

    def mapped(self, a: float, b: float):
        """Nodes and weights for the weight (x-a)**e_l * (b-x)**e_r on [a, b]."""
        h = 0.5 * (b - a)
        x = a + h * (self.nodes + 1.0)
        w = self.weights * h ** (1.0 + self.exponent_left + self.exponent_right)
        return x, w


def gauss_nodes(m: int, exponent_left: float = 0.0,
                exponent_right: float = 0.0) -> QuadratureRule:
    """m-point Gauss-Jacobi rule, exact to degree 2m-1 on [-1, 1].

    ``exponent_left`` multiplies ``(1+x)`` and ``exponent_right`` multiplies
    ``(1-x)``.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if exponent_left <= -1 or exponent_right <= -1:
        raise ValueError("exponents must exceed -1")
    return _gauss_nodes(int(m), float(exponent_left), float(exponent_right))


@lru_cache(maxsize=64)
def _gauss_nodes(m, exponent_left, exponent_right):
    if exponent_left == exponent_right == -0.5:
        # Gauss-Chebyshev, closed form
        x = np.cos(math.pi * (np.arange(m, 0, -1) - 0.5) / m)
        w = np.full(m, math.pi / m)
    else:
        x, w = roots_jacobi(m, exponent_right, exponent_left)
        x = np.asarray(x, dtype=float)
        w = np.asarray(w, dtype=float)
    x.flags.writeable = False
    w.flags.writeable = False
    bad = ~(np.isfinite(x) & np.isfinite(w) & (w > 0) & (np.abs(x) < 1))
    if m > 1:
        bad[1:] |= np.diff(x) <= 0
    if bad.any():
        raise QuadratureError(
            f"Gauss-Jacobi node {int(np.argmax(bad))} of {m} failed to converge "
            f"(exponents {exponent_left}, {exponent_right})")
    return QuadratureRule(x, w, float(exponent_left), float(exponent_right))


def integrate_singular(f, a: float, b: float, exponent_left: float,
                       exponent_right: float, m: int) -> float:
    """Approximate the integral of f(x) (x-a)**e_l (b-x)**e_r over [a, b]."""
    if not a < b:
        raise ValueError(f"empty interval [{a}, {b}]")
    x, w = gauss_nodes(m, exponent_left, exponent_right).mapped(a, b)
    return float(np.dot(w, f(x)))


def integrate_singular_adaptive(f, a, b, exponent_left, exponent_right,
                                tol=1e-15, m0=32, m_max=None, strict=True):
    """Double m in :func:`integrate_singular` until successive values agree.

    The cap defaults to 2**20 nodes for the closed-form Chebyshev weight and
    2**12 otherwise; reaching it raises :class:`QuadratureError`, or
    returns the last value when ``strict`` is false.
    """
    if m_max is None:
        m_max = 1 << (20 if exponent_left == exponent_right == -0.5 else 12)
    m = m0
    prev = integrate_singular(f, a, b, exponent_left, exponent_right, m)
    while m < m_max:
        m *= 2
        cur = integrate_singular(f, a, b, exponent_left, exponent_right, m)
        if abs(cur - prev) <= tol * max(1.0, abs(cur)):
            return cur
        prev = cur
    if not strict:
        return prev
    raise QuadratureError(f"no convergence with {m} nodes on [{a}, {b}]")


def find_root_monotone(g, lo: float, hi: float, tol: float = ROOT_TOL) -> float:
    """Root of a continuous monotone function bracketed by [lo, hi].

    Brent's method; it falls back to bisection whenever interpolation
    stalls, so termination is guaranteed.
    """
    glo, ghi = g(lo), g(hi)
    if glo == 0:
        return lo
    if ghi == 0:
        return hi
    if np.sign(glo) == np.sign(ghi):
        raise BracketError(lo, hi, glo, ghi)
    return brentq(g, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=500)


@dataclass(frozen=True)
class ChebyshevExpansion:
    """Chebyshev series of a smooth function on [a, b].

    Coefficients ``c`` satisfy ``g(x) = sum_k c[k] T_k((x - mid)/half)``.
    """

    a: float
    b: float
    coeffs: np.ndarray

    @property
    def integral_dtau(self) -> float:
        # \int_0^pi g(mid + half cos t) dt
        return math.pi * float(self.coeffs[0])

    def __call__(self, x):
        t = (np.asarray(x, dtype=float) - 0.5 * (self.a + self.b)) / (0.5 * (self.b - self.a))
        return np.polynomial.chebyshev.chebval(t, self.coeffs)


def _cheb_coeffs(g, a, b, m):
    tau = math.pi * (np.arange(m) + 0.5) / m
    x = 0.5 * (a + b) + 0.5 * (b - a) * np.cos(tau)
    c = dct(g(x), type=2) / m
    c[0] *= 0.5
    return c


def chebyshev_expansion(g, a: float, b: float, tol: float = 2e-15,
                        m0: int = 64, m_max: int = 1 << 18) -> ChebyshevExpansion:
    """Adaptive Chebyshev interpolant of g on [a, b] (first-kind nodes only).

    Degree doubles until the trailing eighth of the coefficients falls
    below ``tol`` times the largest one.
    """
    m = m0
    while True:
        c = _cheb_coeffs(g, a, b, m)
        scale = np.max(np.abs(c))
        tail = np.max(np.abs(c[-max(m // 8, 4):]))
        if tail <= tol * scale or m >= m_max:
            break
        m *= 2
    # drop negligible trailing terms
    keep = np.nonzero(np.abs(c) > 0.25 * tol * scale)[0]
    c = c[: keep[-1] + 1] if keep.size else c[:1]
    return ChebyshevExpansion(float(a), float(b), c)


def log_potential(exp: ChebyshevExpansion, z) -> np.ndarray:
    """Logarithmic potential of g(x) dx / sqrt((x-a)(b-x)) on [a, b].

    Returns  int_0^pi log(1/|z - x(t)|) g(x(t)) dt  with
    x(t) = mid + half cos t, where g is given by its Chebyshev series.
    Uses log|w - cos t| = log|r/2| - sum_k (2/k) Re(r^-k) cos kt with
    r = w + sqrt(w^2 - 1), |r| >= 1, valid for every complex w including
    points of the segment itself, so no singular quadrature is needed.
    """
    half = 0.5 * (exp.b - exp.a)
    w = (np.asarray(z, dtype=complex) - 0.5 * (exp.a + exp.b)) / half
    # endpoints mapped a few ulps outside [-1, 1] would lose half the digits
    # through sqrt(w -+ 1)
    near = (w.imag == 0) & (np.abs(w.real) > 1) & (np.abs(w.real) < 1 + 1e-13)
    w = np.where(near, np.sign(w.real) + 0j, w)
    r = w + np.sqrt(w - 1) * np.sqrt(w + 1)
    c = exp.coeffs
    out = math.pi * c[0] * (np.log(np.abs(r) / 2) + math.log(half))
    if len(c) > 1:
        rinv = 1.0 / r
        k = np.arange(1, len(c))
        powers = rinv[..., None] ** k
        out = out - math.pi * np.sum(c[1:] / k * powers.real, axis=-1)
    return -out


def parse_angle(text) -> "float | Fraction":
    """Parse an angle given in radians or as a rational multiple of pi.

    ``'pi'``, ``'pi/2'``, ``'2pi/3'``, ``'3*pi/2'`` give an exact
    :class:`~fractions.Fraction` multiple of pi; anything else is read as
    a float number of radians.
    """
    if isinstance(text, Fraction):
        return text
    if isinstance(text, (int, float)):
        return float(text)
    s = str(text).strip().lower().replace(" ", "").replace("*", "")
    if "pi" not in s:
        return float(s)
    num, _, den = s.partition("/")
    coef = num.replace("pi", "")
    coef = Fraction({"": "1", "+": "1", "-": "-1"}.get(coef, coef))
    return coef / Fraction(den or 1)


def angle_value(theta) -> float:
    """Float radians of an angle in any form accepted by :func:`parse_angle`."""
    theta = parse_angle(theta)
    if isinstance(theta, Fraction):
        return float(theta) * math.pi
    return theta
