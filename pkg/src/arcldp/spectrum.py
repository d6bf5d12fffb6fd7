"""Eigenvalues of the arc-restricted sine kernel.

The integral operator with kernel ``sum_{j<n} e^{ij(x-y)}`` on
``L^2([0, theta], dx/2pi)`` has the same nonzero spectrum as the Gram
matrix ``(1/2pi) int_0^theta e^{i(j-k)x} dx``.  Conjugating by
``diag(e^{ij theta/2})`` makes it the real symmetric Toeplitz matrix with
first row ``r_0 = theta/2pi`` and ``r_k = sin(k theta/2)/(pi k)``.

Its small eigenvalues decay like ``e^{-c n}``, far below double
precision, so the matrix is reduced to tridiagonal form by Householder
reflections in mpmath arithmetic and eigenvalues are isolated by Sturm
counts, then polished by safeguarded Newton steps.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

import mpmath
import numpy as np
from mpmath import mp, mpf

from .numerics import PrecisionPolicy, angle_value, parse_angle

__all__ = [
    "PrecisionError",
    "ProlateMatrix",
    "SpectrumResult",
    "CountQuery",
    "build_prolate_matrix",
    "tridiagonalize",
    "sturm_count",
    "eigenvalues",
    "count_eigenvalues_below",
    "counting_G",
    "g_n",
    "nystrom_check",
    "kernel_hs_norm_quadrature",
    "DEFAULT_C",
]

DEFAULT_C = math.e
CERT_REL_BITS = 32
DEFAULT_POLICY = PrecisionPolicy()


class PrecisionError(ArithmeticError):
    """The working precision cannot resolve the requested eigenvalue or count."""

    def __init__(self, message, index=None, bits=None):
        super().__init__(message)
        self.index = index
        self.bits = bits


def _theta_key(theta):
    th = parse_angle(theta)
    return ("pi", th.numerator, th.denominator) if isinstance(th, Fraction) else ("rad", th)


def _theta_mp(key):
    if key[0] == "pi":
        return mpf(key[1]) / key[2] * mp.pi
    return mpf(key[1])


@dataclass(frozen=True)
class ProlateMatrix:
    """n x n symmetric Toeplitz matrix carrying the kernel eigenvalues.

    ``theta`` may be a float in radians or an exact multiple of pi given as
    a :class:`~fractions.Fraction` (as returned by
    :func:`~arcldp.numerics.parse_angle`).
    """

    n: int
    theta: object

    @property
    def theta_value(self) -> float:
        return angle_value(self.theta)

    def first_row(self, bits: int = 53) -> List[mpf]:
        with mp.workprec(bits):
            th = _theta_mp(_theta_key(self.theta))
            row = [th / (2 * mp.pi)]
            row += [mp.sin(k * th / 2) / (mp.pi * k) for k in range(1, self.n)]
        return row

    def entries(self, bits: int = 53) -> List[List[mpf]]:
        r = self.first_row(bits)
        return [[r[abs(i - j)] for j in range(self.n)] for i in range(self.n)]

    def to_numpy(self) -> np.ndarray:
        from scipy.linalg import toeplitz
        return toeplitz(np.array([float(v) for v in self.first_row()]))


def build_prolate_matrix(n: int, theta) -> ProlateMatrix:
    if n < 1:
        raise ValueError("n must be >= 1")
    th = angle_value(theta)
    if not 0.0 < th < 2 * math.pi:
        raise ValueError(f"theta must lie in (0, 2pi), got {th}")
    return ProlateMatrix(int(n), parse_angle(theta))


@lru_cache(maxsize=32)
def _tridiagonal(n, key, bits):
    with mp.workprec(bits):
        A = ProlateMatrix(n, Fraction(key[1], key[2]) if key[0] == "pi" else key[1]).entries(bits)
        for k in range(n - 2):
            x = [A[i][k] for i in range(k + 1, n)]
            alpha = mp.sqrt(mp.fsum(v * v for v in x))
            if alpha == 0:
                continue
            if x[0] > 0:
                alpha = -alpha
            v = list(x)
            v[0] -= alpha
            vnorm2 = mp.fsum(t * t for t in v)
            if vnorm2 == 0:
                continue
            m = len(v)
            sub = range(k + 1, n)
            scale = 2 / vnorm2
            p = [mp.fsum(A[i][j] * v[j - k - 1] for j in sub) * scale for i in sub]
            K = mp.fsum(v[i] * p[i] for i in range(m)) / vnorm2
            w = [p[i] - K * v[i] for i in range(m)]
            for ii in range(m):
                Ai = A[k + 1 + ii]
                vi, wi = v[ii], w[ii]
                for jj in range(ii, m):
                    val = Ai[k + 1 + jj] - (vi * w[jj] + wi * v[jj])
                    Ai[k + 1 + jj] = val
                    A[k + 1 + jj][k + 1 + ii] = val
            A[k + 1][k] = A[k][k + 1] = alpha
        d = tuple(A[i][i] for i in range(n))
        e2 = tuple(A[i + 1][i] ** 2 for i in range(n - 1))
    return d, e2


def tridiagonalize(matrix: ProlateMatrix, bits: int):
    """Diagonal and squared off-diagonal of a tridiagonal form at ``bits``."""
    return _tridiagonal(matrix.n, _theta_key(matrix.theta), int(bits))


def sturm_count(d, e2, t) -> int:
    """Number of eigenvalues below ``t`` (negative LDL^T pivots of T - tI)."""
    count = 0
    tiny = mpf(2) ** (-4 * mp.prec)
    q = d[0] - t
    if q < 0:
        count += 1
    for i in range(1, len(d)):
        if q == 0:
            q = tiny
        q = d[i] - t - e2[i - 1] / q
        if q < 0:
            count += 1
    return count


def _log_det_derivative(d, e2, t):
    """d/dt log det(T - tI) via the pivot recurrence."""
    q = d[0] - t
    if q == 0:
        return mp.inf
    dq = mpf(-1)
    s = dq / q
    for i in range(1, len(d)):
        if q == 0:
            return mp.inf
        dq_new = -1 + e2[i - 1] * dq / (q * q)
        q = d[i] - t - e2[i - 1] / q
        dq = dq_new
        if q == 0:
            return mp.inf
        s += dq / q
    return s


@dataclass(frozen=True)
class SpectrumResult:
    """Eigenvalues p_1 >= ... >= p_n with certified brackets.

    ``eigenvalues`` and ``brackets`` hold mpmath numbers at ``bits_used``
    bits of precision.
    """

    n: int
    theta: object
    eigenvalues: Tuple[mpf, ...]
    bits_used: int
    brackets: Tuple[Tuple[mpf, mpf], ...]
    x_max: float = 0.0

    @property
    def theta_value(self) -> float:
        return angle_value(self.theta)

    @property
    def widths(self) -> Tuple[mpf, ...]:
        return tuple(hi - lo for lo, hi in self.brackets)

    def as_float(self) -> np.ndarray:
        return np.array([float(p) for p in self.eigenvalues])

    def exponents(self, C: float = DEFAULT_C) -> List[mpf]:
        """lambda_j = -log(p_j / C) / n, clipped at 0."""
        with mp.workprec(self.bits_used):
            return [max(mpf(0), -mp.log(p / C) / self.n) for p in self.eigenvalues]

    def to_json(self, C: float = DEFAULT_C) -> dict:
        digits = int(self.bits_used * math.log10(2)) + 1
        return {
            "n": self.n,
            "theta": _theta_text(self.theta),
            "C": C,
            "bits": self.bits_used,
            "x_max": self.x_max,
            "eigenvalues": [mpmath.nstr(p, digits, strip_zeros=False) for p in self.eigenvalues],
            "brackets": [[mpmath.nstr(lo, digits), mpmath.nstr(hi, digits)]
                         for lo, hi in self.brackets],
        }

    @classmethod
    def from_json(cls, payload: dict) -> "SpectrumResult":
        bits = int(payload["bits"])
        with mp.workprec(bits):
            ev = tuple(mpf(s) for s in payload["eigenvalues"])
            br = tuple((mpf(a), mpf(b)) for a, b in payload["brackets"])
        return cls(int(payload["n"]), parse_angle(payload["theta"]), ev, bits, br,
                   float(payload.get("x_max", 0.0)))


def _theta_text(theta) -> str:
    th = parse_angle(theta)
    if isinstance(th, Fraction):
        num = "" if th.numerator == 1 else str(th.numerator)
        return f"{num}pi" + ("" if th.denominator == 1 else f"/{th.denominator}")
    return repr(th)


def eigenvalues(n: int, theta, policy: PrecisionPolicy = DEFAULT_POLICY,
                x_max: float = 3.0) -> SpectrumResult:
    """All eigenvalues of the n x n prolate matrix, largest first.

    Each eigenvalue is first isolated by geometric bisection on Sturm counts
    until its bracket holds exactly one eigenvalue and is narrower than
    ``max(2**-32 p, 1e-3 exp(-x_max n))``; it is then polished by Newton
    steps on log det(T - tI) and, when two Sturm counts confirm it, the
    bracket shrinks to a few ulps of the working precision.
    """
    matrix = build_prolate_matrix(n, theta)
    bits = policy.bits(n, x_max)
    d, e2 = tridiagonalize(matrix, bits)
    with mp.workprec(bits):
        floor = mpf(2) ** (-bits)
        one = mpf(1)
        counts = {}

        def count(t):
            c = counts.get(t)
            if c is None:
                c = counts[t] = sturm_count(d, e2, t)
            return c

        if count(floor) != 0:
            raise PrecisionError(f"an eigenvalue lies below 2^-{bits}", index=n - 1, bits=bits)
        if count(one) != n:
            raise PrecisionError("an eigenvalue is >= 1", index=0, bits=bits)
        abs_tol = mpf(10) ** -3 * mp.exp(-mpf(x_max) * n)
        rel_tol = mpf(2) ** -CERT_REL_BITS
        polish_rel = mpf(2) ** (-(bits - 12))
        values, brackets = [], []
        lo_k = floor
        for k in range(n):
            lo, hi = lo_k, one
            # tighten hi from known counts above lo
            for t in sorted(counts):
                if t > lo and counts[t] >= k + 1:
                    hi = t
                    break
            while True:
                isolated = count(lo) == k and count(hi) == k + 1
                if isolated and hi - lo <= max(rel_tol * lo, abs_tol):
                    break
                mid = mp.sqrt(lo * hi) if hi > 2 * lo else (lo + hi) / 2
                if mid <= lo or mid >= hi:
                    raise PrecisionError(
                        f"bracket for eigenvalue {n - k} cannot shrink at {bits} bits",
                        index=n - k, bits=bits)
                if count(mid) <= k:
                    lo = mid
                else:
                    hi = mid
            t, cert = _polish(d, e2, lo, hi, k, polish_rel, count)
            values.append(t)
            brackets.append(cert)
            lo_k = cert[1]
    return SpectrumResult(n, matrix.theta, tuple(reversed(values)), bits,
                          tuple(reversed(brackets)), float(x_max))


def _polish(d, e2, lo, hi, k, rel, count):
    t = (lo + hi) / 2
    for _ in range(2 * mp.prec):
        # keep the isolating bracket current so a stray step falls back to bisection
        if count(t) <= k:
            lo = t
        else:
            hi = t
        s = _log_det_derivative(d, e2, t)
        t_new = t - 1 / s if s != 0 and not mp.isinf(s) else t
        if abs(t_new - t) <= max(rel * t, rel / 16):
            t = t_new
            break
        if not lo < t_new < hi:
            t_new = (lo + hi) / 2
        t = t_new
    # Householder backward error is absolute, so tiny eigenvalues get an
    # absolute floor on the certified half-width.
    delta = max(rel * t, rel / 16)
    for _ in range(3):
        a, b = t - delta, t + delta
        if count(a) == k and count(b) == k + 1:
            return t, (a, b)
        delta *= 256
    return (lo + hi) / 2, (lo, hi)


def count_eigenvalues_below(matrix: ProlateMatrix, t,
                            policy: PrecisionPolicy = DEFAULT_POLICY) -> int:
    """#{j : p_j < t} from Sturm counts, confirmed at +64 bits.

    Disagreement escalates the precision in 64-bit steps up to four times
    the policy's bits.
    """
    if not t > 0:
        raise ValueError("threshold must be positive")
    n = matrix.n
    x_max = max(0.0, -float(mpmath.log(t)) / n)
    bits = policy.bits(n, x_max)
    limit = 4 * bits
    prev = None
    b = bits
    while b <= limit:
        d, e2 = tridiagonalize(matrix, b)
        with mp.workprec(b):
            c = sturm_count(d, e2, mpf(t))
        if prev is not None and c == prev:
            return c
        prev = c
        b += 64
    raise PrecisionError(f"Sturm counts disagree up to {limit} bits at t={t}", bits=limit)


@dataclass(frozen=True)
class CountQuery:
    x: float
    n: int
    C: float = DEFAULT_C

    def __post_init__(self):
        if not self.C > 1:
            raise ValueError("C must exceed 1")
        if self.n < 1:
            raise ValueError("n must be >= 1")


def counting_G(query: CountQuery, theta, policy: PrecisionPolicy = DEFAULT_POLICY) -> int:
    """|G(x, n)| = #{j : p_j > C e^{-x n}}."""
    with mp.workprec(max(64, policy.bits(query.n, max(query.x, 0.0)))):
        t = mpf(query.C) * mp.exp(-mpf(query.x) * query.n)
        if t >= 1:
            return 0
        return query.n - count_eigenvalues_below(
            build_prolate_matrix(query.n, theta), t, policy)


def g_n(lam: float, n: int, theta, C: float = DEFAULT_C,
        policy: PrecisionPolicy = DEFAULT_POLICY) -> float:
    return counting_G(CountQuery(lam, n, C), theta, policy) / n


def nystrom_check(n: int, theta, m: int) -> np.ndarray:
    """Top n eigenvalues of the kernel sin(n pi u)/sin(pi u) on [-W, W], W = theta/4pi.

    m-point Gauss-Legendre Nystrom discretisation, symmetrised with the
    square roots of the weights.
    """
    if m < n:
        raise ValueError("need m >= n quadrature points")
    W = angle_value(theta) / (4 * math.pi)
    x, w = np.polynomial.legendre.leggauss(m)
    x, w = W * x, W * w
    u = x[:, None] - x[None, :]
    with np.errstate(invalid="ignore", divide="ignore"):
        K = np.sin(n * math.pi * u) / np.sin(math.pi * u)
    K[np.isclose(u, 0.0, atol=1e-15)] = n
    sw = np.sqrt(w)
    ev = np.linalg.eigvalsh(sw[:, None] * K * sw[None, :])
    return ev[::-1][:n]


def kernel_hs_norm_quadrature(n: int, theta, m: int = 200) -> float:
    """(1/4pi^2) int_0^theta int_0^theta K_n(x, y)^2 dx dy by a tensor Gauss rule.

    Equals the sum of p_j^2.
    """
    th = angle_value(theta)
    x, w = np.polynomial.legendre.leggauss(m)
    x = 0.5 * th * (x + 1)
    w = 0.5 * th * w
    u = x[:, None] - x[None, :]
    with np.errstate(invalid="ignore", divide="ignore"):
        K = np.sin(0.5 * n * u) / np.sin(0.5 * u)
    K[np.isclose(u, 0.0, atol=1e-15)] = n
    return float(w @ (K * K) @ w) / (4 * math.pi ** 2)
