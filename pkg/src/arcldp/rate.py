"""Energies, the rate function J(q) on the circle and its Legendre transform.

The energy of a solved interval measure is read off its Frostman
constants, ``I = (1 - q) F1 + q F2``, and the circle rate function follows
from the Joukowski relation ``I_interval = 2 I_circle + log 2``.  The
same constants give the slope exactly: ``J'(q) = F2 - F1``, which the
rate table uses for cubic Hermite interpolation.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Optional, Sequence

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicHermiteSpline

from . import __version__
from .equilibrium import (
    DEGENERATE,
    CircleConstraint,
    EquilibriumMeasure,
    IntervalConstraint,
    frostman_residuals,
    interval_measure,
)

__all__ = [
    "UnconvergedMeasureError",
    "RateTable",
    "LambdaTransform",
    "energy_interval",
    "circle_energy_direct",
    "rate_point",
    "rate_J",
    "build_rate_table",
    "legendre_transform",
    "legendre_argmax",
    "threshold_c0",
    "lambda_transform",
]

LOG2 = math.log(2.0)
FROSTMAN_TOL = 1e-6
GRID_DELTA = 1e-3
GOLDEN_TOL = 1e-11


class UnconvergedMeasureError(RuntimeError):
    """The measure fails its equilibrium conditions; its energy is not trusted."""


def energy_interval(mu: EquilibriumMeasure) -> float:
    """Logarithmic energy of a solved measure on [-1, 1].

    Circle measures are accepted and their interval image is used.
    """
    if mu.domain == "circle":
        mu = mu.interval_image()
    fr = frostman_residuals(mu)
    if fr.max_residual > FROSTMAN_TOL or fr.gap_slack < -1e-8:
        raise UnconvergedMeasureError(
            f"Frostman residual {fr.max_residual:.3e}, gap slack {fr.gap_slack:.3e} "
            f"for beta={mu.beta}, q={mu.q}")
    if mu.case == DEGENERATE:
        return fr.F1
    return (1.0 - mu.q) * fr.F1 + mu.q * fr.F2


def circle_energy_direct(nu: EquilibriumMeasure, outer_nodes: int = 24) -> float:
    """Energy of a circle measure by direct double quadrature on the circle.

    Inner potentials use adaptive QUADPACK integration of the chordal log
    kernel with a breakpoint at the singularity; the outer integral is a
    Gauss-Legendre rule.  Both run in the variable tau with
    ``psi = mid + half * cos(tau)`` on each support arc, which absorbs the
    inverse square-root endpoint behaviour.  Independent of the Joukowski
    route used by :func:`rate_J`.
    """
    if nu.domain != "circle":
        raise ValueError("circle_energy_direct needs a circle measure")
    arcs = [(s.left, s.right) for s in nu.support]
    alpha, beta = nu.alpha, nu.beta

    def dens(psi):
        c = np.cos(psi)
        return np.sqrt(np.abs(c - alpha)) / (2 * math.pi * np.sqrt(np.abs(c - beta)))

    def arc_integrand(a, b):
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        return lambda tau: dens(mid + half * math.cos(tau)) * half * math.sin(tau)

    def potential_at(phi):
        total = 0.0
        for a, b in arcs:
            mid, half = 0.5 * (a + b), 0.5 * (b - a)
            w = arc_integrand(a, b)

            def f(tau):
                psi = mid + half * math.cos(tau)
                chord = abs(2 * math.sin(0.5 * (psi - phi)))
                return -math.log(chord) * w(tau) if chord > 0 else 0.0

            # singular point in tau, if phi lies on this arc (mod 2 pi)
            pts = []
            for shift in (0.0, 2 * math.pi, -2 * math.pi):
                t = (phi + shift - mid) / half
                if -1 < t < 1:
                    pts.append(math.acos(t))
            with warnings.catch_warnings():
                # roundoff warnings near the log singularity; accuracy is
                # still far below the 1e-4 this cross-check is used at
                warnings.simplefilter("ignore", integrate.IntegrationWarning)
                val, _ = integrate.quad(f, 0.0, math.pi, points=pts or None,
                                        limit=400, epsabs=1e-13, epsrel=1e-12)
            total += val
        return total

    x, wts = np.polynomial.legendre.leggauss(outer_nodes)
    tau = 0.5 * math.pi * (x + 1)
    wts = 0.5 * math.pi * wts
    energy = 0.0
    for a, b in arcs:
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        w = arc_integrand(a, b)
        for t, wt in zip(tau, wts):
            energy += wt * w(t) * potential_at(mid + half * math.cos(t))
    return energy


def rate_point(theta: float, q: float):
    """(J(q), F1, F2) for the arc of opening ``theta``.

    F1, F2 are the interval-side potential constants; ``F2 - F1 = J'(q)``.
    """
    mu = interval_measure(CircleConstraint(theta, q).interval())
    fr = frostman_residuals(mu)
    if fr.max_residual > FROSTMAN_TOL or fr.gap_slack < -1e-8:
        raise UnconvergedMeasureError(f"unconverged measure at q={q}")
    if mu.case == DEGENERATE:
        return 0.5 * (fr.F1 - LOG2), fr.F1, fr.F2
    energy = (1.0 - q) * fr.F1 + q * fr.F2
    return 0.5 * (energy - LOG2), fr.F1, fr.F2


def rate_J(theta: float, q: float) -> float:
    """Minimal circle energy subject to arc mass ``q``."""
    return rate_point(theta, q)[0]


def _endpoint_fit(eps, values, basis):
    A = np.column_stack([b(eps) for b in basis])
    coef = np.linalg.solve(A, values)
    return float(coef[0])


def _xlogx(e):
    return e * np.log(e)


# J'(1 - e) ~ c0 + e (a log e + b) + e^2 (c log e + d);
# J(1 - e) is its primitive: J1 - c0 e + O(e^2 log e)
_SLOPE_BASIS = (np.ones_like, lambda e: e, _xlogx, lambda e: e * e, lambda e: e * _xlogx(e))
_VALUE_BASIS = (np.ones_like, lambda e: e, lambda e: e * _xlogx(e), lambda e: e * e,
                lambda e: e * e * _xlogx(e))


@dataclass(frozen=True)
class RateTable:
    """Tabulated rate function on a Chebyshev grid in (0, 1).

    ``F_constants[k] = (F1, F2)`` are interval-side potential constants, so
    the slope at each node is ``F2 - F1``.  ``endpoint_extensions`` holds
    J and J' extrapolated to q = 0 and q = 1 from the five outermost nodes.
    """

    theta: float
    q_grid: np.ndarray
    J_values: np.ndarray
    F_constants: np.ndarray
    endpoint_extensions: Dict[str, float]
    meta: Dict[str, object] = field(default_factory=dict, compare=False)

    @property
    def slopes(self) -> np.ndarray:
        return self.F_constants[:, 1] - self.F_constants[:, 0]

    @cached_property
    def _spline(self):
        ext = self.endpoint_extensions
        y = np.concatenate([[0.0], self.q_grid, [1.0]])
        v = np.concatenate([[ext["J0"]], self.J_values, [ext["J1"]]])
        d = np.concatenate([[ext["dJ0"]], self.slopes, [ext["dJ1"]]])
        # convexity repair: slopes of a convex function never decrease
        d = np.maximum.accumulate(d)
        return CubicHermiteSpline(y, v, d)

    def J(self, y):
        """Interpolated rate function on [0, 1]."""
        return self._spline(np.clip(y, 0.0, 1.0))

    def dJ(self, y):
        return self._spline.derivative()(np.clip(y, 0.0, 1.0))

    def second_differences(self) -> np.ndarray:
        """Second divided differences of J on the (nonuniform) grid."""
        q, J = self.q_grid, self.J_values
        d1 = np.diff(J) / np.diff(q)
        return 2 * np.diff(d1) / (q[2:] - q[:-2])

    def to_json(self) -> dict:
        return {
            "theta": self.theta,
            "q_grid": [float(v) for v in self.q_grid],
            "J": [float(v) for v in self.J_values],
            "F1": [float(v) for v in self.F_constants[:, 0]],
            "F2": [float(v) for v in self.F_constants[:, 1]],
            "c0": float(self.endpoint_extensions["dJ1"]),
            "endpoint_extensions": dict(self.endpoint_extensions),
            "meta": dict(self.meta),
        }

    @classmethod
    def from_json(cls, payload: dict) -> "RateTable":
        F = np.column_stack([payload["F1"], payload["F2"]])
        return cls(float(payload["theta"]), np.asarray(payload["q_grid"], dtype=float),
                   np.asarray(payload["J"], dtype=float), F,
                   dict(payload["endpoint_extensions"]), dict(payload.get("meta", {})))


def chebyshev_q_grid(grid_size: int, delta: float = GRID_DELTA) -> np.ndarray:
    k = np.arange(grid_size)
    q = 0.5 - (0.5 - delta) * np.cos(math.pi * k / (grid_size - 1))
    # exact mirror symmetry q_k + q_{N-1-k} = 1
    q[grid_size // 2:] = 1.0 - q[: (grid_size + 1) // 2][::-1]
    return q


def build_rate_table(theta: float, grid_size: int = 41, cache=None,
                     workers: int = 1) -> RateTable:
    """Evaluate J, F1, F2 on a Chebyshev grid over (delta, 1 - delta).

    ``cache`` is an optional :class:`~arcldp.cache.ResultsCache`; tables are
    keyed by (theta, grid_size, version).  ``workers > 1`` evaluates grid
    points in a process pool.
    """
    if grid_size < 21:
        raise ValueError("grid_size must be at least 21")
    params = {"theta": float(theta), "grid_size": int(grid_size)}
    if cache is not None:
        hit = cache.get("rate_table", params)
        if hit is not None:
            return RateTable.from_json(hit)
    q = chebyshev_q_grid(grid_size)
    # J'' has a logarithmic singularity at the unconstrained mass theta/2pi:
    # make it a knot and grade the grid towards it
    q_free = theta / (2 * math.pi)
    extra = q_free + np.concatenate([[0.0], np.outer([-1, 1], 0.02 * 0.5 ** np.arange(5)).ravel()])
    extra = extra[(extra > q[0]) & (extra < q[-1])]
    for e in extra:
        if np.min(np.abs(q - e)) > 2e-4:
            q = np.sort(np.append(q, e))
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(workers) as ex:
            rows = list(ex.map(rate_point, [theta] * len(q), q))
    else:
        rows = []
        for qk in q:
            try:
                rows.append(rate_point(theta, qk))
            except UnconvergedMeasureError as exc:
                raise UnconvergedMeasureError(f"rate table point q={qk}: {exc}") from exc
    rows = np.asarray(rows)
    J, F = rows[:, 0], rows[:, 1:]
    slopes = F[:, 1] - F[:, 0]
    lo, hi = slice(0, 5), slice(-5, None)
    ext = {
        "J0": _endpoint_fit(q[lo], J[lo], _VALUE_BASIS),
        "dJ0": _endpoint_fit(q[lo], slopes[lo], _SLOPE_BASIS),
        "J1": _endpoint_fit(1.0 - q[hi], J[hi], _VALUE_BASIS),
        "dJ1": _endpoint_fit(1.0 - q[hi], slopes[hi], _SLOPE_BASIS),
    }
    if not all(math.isfinite(v) for v in ext.values()):
        raise UnconvergedMeasureError(f"non-finite endpoint extrapolation {ext}")
    meta = {
        "version": __version__,
        "tolerances": {"frostman": FROSTMAN_TOL, "root": 1e-12, "grid_delta": GRID_DELTA},
        "J1_closed_form": -math.log(math.sin(theta / 4)),
        "J0_closed_form": -math.log(math.sin((2 * math.pi - theta) / 4)),
    }
    table = RateTable(float(theta), q, J, F, ext, meta)
    if cache is not None:
        cache.put("rate_table", params, table.to_json())
    return table


def _golden_max(f, a, b, tol=GOLDEN_TOL):
    inv = (math.sqrt(5) - 1) / 2
    c, d = b - inv * (b - a), a + inv * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - inv * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def legendre_argmax(t: RateTable, lam: float) -> float:
    """Maximiser y* in [0, 1] of lam * y - J(y)."""
    if lam < 0:
        return 0.0
    f = lambda y: lam * y - float(t.J(y))
    y, v = _golden_max(f, 0.0, 1.0)
    for end in (0.0, 1.0):
        if f(end) >= v:
            y, v = end, f(end)
    return y


def legendre_transform(t: RateTable, lam: float) -> float:
    """Lambda(lam) = sup over y in [0, 1] of lam * y - J(y).

    Negative ``lam`` returns 0, the convention under which the window
    identity for the counting function holds (G is empty for x <= 0).
    Accuracy is that of the Hermite interpolant of J, roughly
    h^4 max|J''''| / 384 for grid spacing h, plus the endpoint
    extrapolation error recorded in the table metadata.
    """
    if lam < 0:
        return 0.0
    y = legendre_argmax(t, lam)
    return lam * y - float(t.J(y))


def threshold_c0(t: RateTable) -> float:
    """Left derivative J'(1-) extrapolated from the table.

    For lam >= c0 the Legendre maximiser sits at y = 1.
    """
    c0 = t.endpoint_extensions["dJ1"]
    if not math.isfinite(c0):
        raise UnconvergedMeasureError("non-finite slope extrapolation at q = 1")
    return float(c0)


@dataclass(frozen=True)
class LambdaTransform:
    theta: float
    source: RateTable
    c0: float

    def __call__(self, lam: float) -> float:
        return legendre_transform(self.source, lam)

    def argmax(self, lam: float) -> float:
        return legendre_argmax(self.source, lam)


def lambda_transform(t: RateTable) -> LambdaTransform:
    return LambdaTransform(t.theta, t, threshold_c0(t))
