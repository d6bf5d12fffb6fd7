"""Finite-n large-deviation quantities built from the kernel spectrum.

The count ``N_theta`` of unitary eigenvalues in an arc of length theta is a
sum of independent Bernoulli(p_j) variables, so its scaled log-MGF and the
counting function ``|G(x, n)|`` are explicit in the spectrum.  As n grows
the log-MGF tends to the Legendre transform Lambda of the rate function
and window averages of ``|G(x, n)| / n`` tend to difference quotients of
Lambda.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from mpmath import mp, mpf

from .numerics import PrecisionPolicy, angle_value
from .spectrum import DEFAULT_C, DEFAULT_POLICY, PrecisionError, SpectrumResult, eigenvalues

__all__ = [
    "MGFResult",
    "log_mgf",
    "log_mgf_derivative",
    "exponents",
    "window_average",
    "VerificationRow",
    "VerificationReport",
    "verify_main",
    "SampleStats",
    "sample_counts",
    "RESIDUAL_PASS",
]

RESIDUAL_PASS = 0.1
SAMPLE_CHUNK = 10_000


def _spectrum_id(spec: SpectrumResult) -> str:
    return f"n={spec.n};theta={angle_value(spec.theta)!r};bits={spec.bits_used}"


@dataclass(frozen=True)
class MGFResult:
    theta: float
    n: int
    lam: float
    value: float
    spectrum_ref: str


def log_mgf(lam: float, spec: SpectrumResult) -> MGFResult:
    """(1/n^2) log E[exp(lam n N)] = (1/n^2) sum log(p_j e^{lam n} + 1 - p_j).

    Evaluated at the spectrum's working precision.
    """
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    n = spec.n
    with mp.workprec(spec.bits_used):
        # log1p keeps lam = 0 exact and avoids cancellation for tiny p
        gm1 = mp.expm1(mpf(lam) * n)
        total = mp.fsum(mp.log1p(p * gm1) for p in spec.eigenvalues)
        value = float(total / (n * n))
    return MGFResult(angle_value(spec.theta), n, float(lam), value, _spectrum_id(spec))


def log_mgf_derivative(lam: float, spec: SpectrumResult) -> float:
    """d/dlam of :func:`log_mgf`: (1/n) sum p e^{lam n}/(p e^{lam n} + 1 - p)."""
    n = spec.n
    with mp.workprec(spec.bits_used):
        g = mp.exp(mpf(lam) * n)
        return float(mp.fsum(p * g / (p * g + 1 - p) for p in spec.eigenvalues) / n)


def exponents(spec: SpectrumResult, C: float = DEFAULT_C) -> np.ndarray:
    """Jump locations lambda_j = -log(p_j / C)/n of x -> |G(x, n)|, clipped at 0."""
    return np.array([float(v) for v in spec.exponents(C)])


def window_average(lam: float, epsilon: float, spec: SpectrumResult,
                   C: float = DEFAULT_C) -> float:
    """(1/2 eps) int_{lam-eps}^{lam+eps} |G(x, n)| dx, exactly.

    ``|G(x, n)|`` is the step function ``sum_j 1[x > lambda_j]``; the
    result lies in [0, n].
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    lj = exponents(spec, C)
    a, b = lam - epsilon, lam + epsilon
    covered = np.maximum(0.0, b - np.maximum(a, lj))
    return float(min(spec.n, math.fsum(covered) / (2 * epsilon)))


@dataclass(frozen=True)
class VerificationRow:
    n: int
    average: float
    normalized: float
    target: float
    residual: float
    bits: int


@dataclass
class VerificationReport:
    """Window averages of g_n along an n-ladder against Lambda difference quotients."""

    theta: float
    lam: float
    epsilon: float
    C: float
    rows: List[VerificationRow] = field(default_factory=list)
    lambda_plus: float = 0.0
    lambda_minus: float = 0.0

    @property
    def residuals(self) -> List[float]:
        return [r.residual for r in self.rows]

    @property
    def passed(self) -> bool:
        res = self.residuals
        if not res:
            return False
        monotone = all(b <= a for a, b in zip(res, res[1:]))
        return monotone and res[-1] < RESIDUAL_PASS

    def to_json(self) -> dict:
        return {
            "theta": self.theta,
            "lambda": self.lam,
            "epsilon": self.epsilon,
            "C": self.C,
            "Lambda_plus": self.lambda_plus,
            "Lambda_minus": self.lambda_minus,
            "status": "PASS" if self.passed else "FAIL",
            "rows": [vars(r) for r in self.rows],
        }

    def csv_rows(self) -> List[Tuple]:
        return [(r.n, r.normalized, r.target, r.residual) for r in self.rows]


def _rung(args):
    n, theta, x_max, policy = args
    return eigenvalues(n, theta, policy, x_max=x_max)


def verify_main(theta, lam: float, epsilon: float, n_ladder: Sequence[int],
                C: float = DEFAULT_C, policy: PrecisionPolicy = DEFAULT_POLICY,
                lambda_fn: Optional[Callable[[float], float]] = None,
                workers: int = 1) -> VerificationReport:
    """Run the window-average check along ``n_ladder``.

    ``A_n / n`` is compared with ``(Lambda(lam+eps) - Lambda(lam-eps))/(2 eps)``.
    ``lambda_fn`` defaults to the tabulated transform for ``theta``.
    The report passes when residuals never increase along the ladder and
    the last one is below 0.1.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    ladder = [int(n) for n in n_ladder]
    if not ladder or any(b <= a for a, b in zip(ladder, ladder[1:])):
        raise ValueError("n ladder must be nonempty and increasing")
    if lambda_fn is None:
        from .rate import build_rate_table, lambda_transform
        lambda_fn = lambda_transform(build_rate_table(angle_value(theta)))
    lp, lm = float(lambda_fn(lam + epsilon)), float(lambda_fn(lam - epsilon))
    target = (lp - lm) / (2 * epsilon)
    x_max = max(3.0, lam + epsilon)
    jobs = [(n, theta, x_max, policy) for n in ladder]
    spectra = []
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_rung, j) for j in jobs]
            for n, fut in zip(ladder, futures):
                try:
                    spectra.append(fut.result())
                except PrecisionError as exc:
                    raise PrecisionError(f"rung n={n}: {exc}", exc.index, exc.bits) from exc
    else:
        for n, job in zip(ladder, jobs):
            try:
                spectra.append(_rung(job))
            except PrecisionError as exc:
                raise PrecisionError(f"rung n={n}: {exc}", exc.index, exc.bits) from exc
    report = VerificationReport(angle_value(theta), float(lam), float(epsilon), float(C),
                                lambda_plus=lp, lambda_minus=lm)
    for n, spec in zip(ladder, spectra):
        avg = window_average(lam, epsilon, spec, C)
        report.rows.append(VerificationRow(n, avg, avg / n, target,
                                           abs(avg / n - target), spec.bits_used))
    return report


@dataclass(frozen=True)
class SampleStats:
    n: int
    theta: float
    reps: int
    seed: int
    histogram: Tuple[int, ...]
    mean: float
    variance: float
    expected_mean: float
    expected_variance: float

    def to_json(self) -> dict:
        d = dict(vars(self))
        d["histogram"] = list(self.histogram)
        return d

    def csv_rows(self) -> List[Tuple[int, float]]:
        return [(k, c / self.reps) for k, c in enumerate(self.histogram)]


def _chunk_histogram(args):
    p, seed, index, size = args
    bitgen = np.random.Philox(seed).jumped(index)
    u = np.random.Generator(bitgen).random((size, p.size))
    counts = (u < p).sum(axis=1)
    return np.bincount(counts, minlength=p.size + 1)


def sample_counts(n: int, theta, reps: int, seed: int,
                  policy: PrecisionPolicy = DEFAULT_POLICY,
                  spec: Optional[SpectrumResult] = None,
                  workers: int = 1) -> SampleStats:
    """Draw ``reps`` copies of N = sum_j Bernoulli(p_j).

    Reps are split into fixed chunks; chunk ``i`` uses the Philox stream
    ``Philox(seed).jumped(i)``, so the histogram depends only on
    ``(seed, reps)`` and not on ``workers``.
    """
    if reps < 1:
        raise ValueError("reps must be >= 1")
    if spec is None:
        spec = eigenvalues(n, theta, policy, x_max=1.0)
    p = spec.as_float()
    jobs = []
    done = 0
    while done < reps:
        size = min(SAMPLE_CHUNK, reps - done)
        jobs.append((p, int(seed), len(jobs), size))
        done += size
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_chunk_histogram, jobs))
    else:
        parts = [_chunk_histogram(j) for j in jobs]
    hist = np.sum(parts, axis=0)
    k = np.arange(n + 1)
    mean = float(hist @ k) / reps
    var = float(hist @ (k - mean) ** 2) / max(reps - 1, 1)
    with mp.workprec(spec.bits_used):
        em = float(mp.fsum(spec.eigenvalues))
        ev = float(mp.fsum(q * (1 - q) for q in spec.eigenvalues))
    return SampleStats(n, angle_value(theta), int(reps), int(seed),
                       tuple(int(h) for h in hist), mean, var, em, ev)
