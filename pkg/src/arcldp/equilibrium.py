"""Constrained logarithmic-energy equilibrium measures.

Interval problem: minimise the logarithmic energy over probability
measures on [-1, 1] carrying mass ``q`` on ``[beta, 1]``.  The minimiser
has density

    sqrt|x - alpha| / (pi sqrt|(x + 1)(x - beta)(x - 1)|)

on two intervals separated by a gap ending at the free boundary
``alpha``.  The circle problem (mass ``q`` on the arc |arg z| <= theta/2)
is the pull-back of the interval problem with ``beta = cos(theta/2)``
under ``psi -> cos psi``.

Every support component [a, b] is stored as a Chebyshev expansion of
``g(x) = density(x) * sqrt((x - a)(b - x))``, which is analytic on the
component, so masses and potentials are computed spectrally.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Tuple, Union

import numpy as np

from .numerics import (
    ChebyshevExpansion,
    chebyshev_expansion,
    BracketError,
    find_root_monotone,
    integrate_singular_adaptive,
    log_potential,
)

__all__ = [
    "IntervalConstraint",
    "CircleConstraint",
    "SupportComponent",
    "EquilibriumMeasure",
    "FrostmanReport",
    "CASE_I",
    "CASE_II",
    "DEGENERATE",
    "classify_case",
    "mass_deficit",
    "solve_alpha_interval",
    "interval_measure",
    "circle_measure",
    "potential",
    "frostman_residuals",
]

CASE_I = "case_i"
CASE_II = "case_ii"
DEGENERATE = "degenerate"

TIE_TOL = 1e-14
BRACKET_INSET = 1e-13
LOG2 = math.log(2.0)


@dataclass(frozen=True)
class IntervalConstraint:
    beta: float
    q: float

    def __post_init__(self):
        if not -1.0 < self.beta < 1.0:
            raise ValueError(f"beta must lie in (-1, 1), got {self.beta}")
        if not 0.0 < self.q < 1.0:
            raise ValueError(f"q must lie in (0, 1), got {self.q}")

    @property
    def arcsine_mass(self) -> float:
        """Mass of [beta, 1] under the arcsine law."""
        return math.acos(self.beta) / math.pi


@dataclass(frozen=True)
class CircleConstraint:
    theta: float
    q: float

    def __post_init__(self):
        if not 0.0 < self.theta < 2 * math.pi:
            raise ValueError(f"theta must lie in (0, 2pi), got {self.theta}")
        if not 0.0 < self.q < 1.0:
            raise ValueError(f"q must lie in (0, 1), got {self.q}")

    @property
    def beta(self) -> float:
        # cos(theta/2) written so that theta = pi gives exactly 0
        return math.sin(0.5 * (math.pi - self.theta))

    def interval(self) -> IntervalConstraint:
        return IntervalConstraint(self.beta, self.q)


@dataclass(frozen=True)
class SupportComponent:
    """One interval of the support with its endpoint exponents.

    An exponent of -1/2 marks an inverse square-root blow-up of the density,
    +1/2 a square-root zero.  For circle measures the endpoints are angles.
    """

    left: float
    right: float
    singular_exponents: Tuple[float, float]

    def __post_init__(self):
        if not self.left < self.right:
            raise ValueError(f"empty component [{self.left}, {self.right}]")


def _density_formula(x, alpha, beta):
    x = np.asarray(x, dtype=float)
    return np.sqrt(np.abs(x - alpha)) / (
        math.pi * np.sqrt(np.abs((x + 1) * (x - beta) * (x - 1))))


@dataclass(frozen=True)
class EquilibriumMeasure:
    """A solved constrained minimiser on the interval or the circle."""

    domain: str
    params: Union[IntervalConstraint, CircleConstraint]
    case: str
    alpha: float
    support: Tuple[SupportComponent, ...]
    # interval-side data; circle measures carry their interval image
    _beta: float = field(repr=False)
    _expansions: Tuple[ChebyshevExpansion, ...] = field(repr=False, compare=False)
    _masses: Tuple[float, ...] = field(repr=False, compare=False)

    @property
    def q(self) -> float:
        return self.params.q

    @property
    def beta(self) -> float:
        return self._beta

    @property
    def interval_components(self) -> Tuple[Tuple[float, float], ...]:
        return tuple((e.a, e.b) for e in self._expansions)

    @property
    def component_masses(self) -> Tuple[float, ...]:
        """Masses of the support components, left to right on the interval."""
        return self._masses

    @property
    def total_mass(self) -> float:
        return float(sum(self._masses))

    @property
    def constrained_mass(self) -> float:
        """Mass of [beta, 1] (interval) or of the arc A_theta (circle)."""
        if self.case == DEGENERATE:
            return 1.0 - _arcsine_cdf(self._beta)
        return self._masses[-1]

    def density(self, x):
        """dmu/dx on [-1, 1], or dnu/dpsi on the circle; exactly 0 off support."""
        x = np.asarray(x, dtype=float)
        if self.domain == "circle":
            if self.case == DEGENERATE:
                return np.full(x.shape, 1 / (2 * math.pi))
            c = np.cos(x)
            return np.where(self._on_support(c), _circle_density(c, self.alpha, self._beta), 0.0)
        if self.case == DEGENERATE:
            with np.errstate(divide="ignore"):
                return np.where(np.abs(x) <= 1, 1 / (math.pi * np.sqrt(1 - x * x)), 0.0)
        return np.where(self._on_support(x), _density_formula(x, self.alpha, self._beta), 0.0)

    def _on_support(self, x):
        inside = np.zeros(np.shape(x), dtype=bool)
        for a, b in self.interval_components:
            inside |= (x >= a) & (x <= b)
        return inside

    def cdf(self, x):
        """Distribution function.

        Interval measures give ``mu([-1, x])``.  Circle measures give
        ``nu([-pi, psi])`` for angles wrapped into ``[-pi, pi]``.  Both are
        exact up to the Chebyshev truncation: with ``x = mid + half cos t``
        the tail mass of a component is ``c_0 t + sum_k c_k sin(k t)/k``.
        """
        x = np.asarray(x, dtype=float)
        if self.domain == "circle":
            inside = (x >= -math.pi) & (x <= math.pi)
            psi = np.where(inside, x, np.mod(x + math.pi, 2 * math.pi) - math.pi)
            F = self._interval_cdf(np.cos(psi))
            return np.where(psi <= 0, 0.5 * F, 1.0 - 0.5 * F)
        return self._interval_cdf(x)

    def _interval_cdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for e, m in zip(self._expansions, self._masses):
            mid, half = 0.5 * (e.a + e.b), 0.5 * (e.b - e.a)
            t = np.arccos(np.clip((x - mid) / half, -1.0, 1.0))
            k = np.arange(1, len(e.coeffs))
            tail = e.coeffs[0] * t + np.sin(np.multiply.outer(t, k)) @ (e.coeffs[1:] / k)
            out = out + np.where(x >= e.b, m, np.where(x <= e.a, 0.0, m - tail))
        return out

    def interval_image(self) -> "EquilibriumMeasure":
        """The interval measure whose pull-back under cos is this measure."""
        if self.domain == "interval":
            return self
        return _interval_measure(IntervalConstraint(self._beta, self.q))


def _circle_density(c, alpha, beta):
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.sqrt(np.abs(c - alpha)) / (2 * math.pi * np.sqrt(np.abs(c - beta)))


def _arcsine_cdf(x):
    return 1.0 - math.acos(x) / math.pi


def classify_case(c: IntervalConstraint) -> str:
    """Which branch of the solution applies to the constraint."""
    m2 = c.arcsine_mass
    if abs(c.q - m2) <= TIE_TOL:
        return DEGENERATE
    return CASE_I if c.q > m2 else CASE_II


def _alpha_bracket(case, beta):
    if case == CASE_I:
        return -1.0 + BRACKET_INSET, beta - BRACKET_INSET
    return beta + BRACKET_INSET, 1.0 - BRACKET_INSET


def _left_mass(alpha, beta, case):
    """Mass of the left support component for a trial free boundary.

    Trial points within ~1e-13 of beta converge slowly; there only the sign
    of the deficit matters, so the last quadrature value is accepted.
    """
    if case == CASE_I:
        # [-1, alpha]: the (alpha-x)^{1/2} zero is folded into the smooth part
        # so that the closed-form Chebyshev rule applies
        f = lambda x: (alpha - x) / (math.pi * np.sqrt((beta - x) * (1 - x)))
        return integrate_singular_adaptive(f, -1.0, alpha, -0.5, -0.5, strict=False)
    # [-1, beta]: blow-up at both ends
    f = lambda x: np.sqrt(alpha - x) / (math.pi * np.sqrt(1 - x))
    return integrate_singular_adaptive(f, -1.0, beta, -0.5, -0.5, strict=False)


def mass_deficit(alpha: float, c: IntervalConstraint) -> float:
    """Left-component mass for the trial ``alpha`` minus its target ``1 - q``.

    ``alpha`` must lie in (-1, beta] in case i and [beta, 1) in case ii; at
    the degenerate point either side is accepted.  Increasing in ``alpha``.
    """
    case = classify_case(c)
    beta = c.beta
    if case == DEGENERATE:
        case = CASE_I if alpha <= beta else CASE_II
    if case == CASE_I:
        if not -1.0 <= alpha <= beta:
            raise ValueError(f"alpha={alpha} outside (-1, beta={beta}] for case i")
        if alpha == -1.0:
            return -(1.0 - c.q)
        if alpha == beta:
            return _arcsine_cdf(beta) - (1.0 - c.q)
    else:
        if not beta <= alpha <= 1.0:
            raise ValueError(f"alpha={alpha} outside [beta={beta}, 1) for case ii")
        if alpha == beta:
            return _arcsine_cdf(beta) - (1.0 - c.q)
        if alpha == 1.0:
            return 1.0 - (1.0 - c.q)
    return _left_mass(alpha, beta, case) - (1.0 - c.q)


def solve_alpha_interval(c: IntervalConstraint, tol: float = 1e-12) -> float:
    """Free boundary alpha of the constrained interval minimiser."""
    case = classify_case(c)
    if case == DEGENERATE:
        return c.beta
    lo, hi = _alpha_bracket(case, c.beta)
    g = lambda a: mass_deficit(a, c)
    # walk in from the end next to beta; evaluations there are expensive
    width = hi - lo
    for k in range(1, 13):
        if case == CASE_I:
            trial = hi - width * 10.0 ** -k
            if g(trial) <= 0:
                lo = trial
                break
            hi = trial
        else:
            trial = lo + width * 10.0 ** -k
            if g(trial) >= 0:
                hi = trial
                break
            lo = trial
    try:
        return find_root_monotone(g, lo, hi, tol=tol)
    except BracketError:
        # root inside the inset next to beta: q is within ~1e-13 of the
        # arcsine mass and alpha within BRACKET_INSET of beta
        edge = hi if case == CASE_I else lo
        if abs(edge - c.beta) > 2 * BRACKET_INSET:
            raise
        return 0.5 * (edge + c.beta)


def _component_g(a, b, alpha, beta):
    """density * sqrt((x-a)(b-x)) written without cancelling singular factors."""
    # exponent of |x - e| in the density, raised by 1/2 when e is an endpoint
    powers = []
    for e, p in ((-1.0, -0.5), (alpha, 0.5), (beta, -0.5), (1.0, -0.5)):
        n = p + 0.5 * (e == a) + 0.5 * (e == b)
        if n != 0:
            powers.append((e, n))
    if a not in (-1.0, alpha, beta, 1.0) or b not in (-1.0, alpha, beta, 1.0):
        raise ValueError("component endpoints must be among -1, alpha, beta, 1")

    def g(x):
        out = np.full(np.shape(x), 1.0 / math.pi)
        for e, n in powers:
            out = out * np.abs(x - e) ** n
        return out

    return g


def _interval_measure(c: IntervalConstraint) -> EquilibriumMeasure:
    case = classify_case(c)
    alpha = solve_alpha_interval(c)
    beta = c.beta
    if case == DEGENERATE:
        comps = [(-1.0, 1.0)]
        exps = [(-0.5, -0.5)]
        expansions = (ChebyshevExpansion(-1.0, 1.0, np.array([1.0 / math.pi])),)
    else:
        if case == CASE_I:
            comps = [(-1.0, alpha), (beta, 1.0)]
            exps = [(-0.5, 0.5), (-0.5, -0.5)]
        else:
            comps = [(-1.0, beta), (alpha, 1.0)]
            exps = [(-0.5, -0.5), (0.5, -0.5)]
        expansions = tuple(
            chebyshev_expansion(_component_g(a, b, alpha, beta), a, b) for a, b in comps)
    masses = tuple(e.integral_dtau for e in expansions)
    support = tuple(SupportComponent(a, b, ex) for (a, b), ex in zip(comps, exps))
    return EquilibriumMeasure("interval", c, case, alpha, support, beta, expansions, masses)


def interval_measure(c: IntervalConstraint) -> EquilibriumMeasure:
    """Constrained equilibrium measure on [-1, 1] with mu([beta, 1]) = q."""
    return _interval_measure(c)


def circle_measure(c: CircleConstraint) -> EquilibriumMeasure:
    """Constrained equilibrium measure on the unit circle with nu(A_theta) = q.

    Support components are angle intervals; the component through
    ``psi = pi`` is reported as ``[acos(alpha), 2 pi - acos(alpha)]`` (case i)
    or ``[theta/2, 2 pi - theta/2]`` (case ii).
    """
    mu = _interval_measure(c.interval())
    h = c.theta / 2
    if mu.case == DEGENERATE:
        support = (SupportComponent(-math.pi, math.pi, (0.0, 0.0)),)
    else:
        t = math.acos(min(1.0, max(-1.0, mu.alpha)))
        if mu.case == CASE_I:
            support = (SupportComponent(-h, h, (-0.5, -0.5)),
                       SupportComponent(t, 2 * math.pi - t, (0.5, 0.5)))
        else:
            support = (SupportComponent(-t, t, (0.5, 0.5)),
                       SupportComponent(h, 2 * math.pi - h, (-0.5, -0.5)))
    return EquilibriumMeasure("circle", c, mu.case, mu.alpha, support, mu.beta,
                              mu._expansions, mu._masses)


def _interval_potential(mu: EquilibriumMeasure, z):
    total = 0.0
    for e in mu._expansions:
        total = total + log_potential(e, z)
    return np.real_if_close(total)


def potential(mu: EquilibriumMeasure, z):
    """Logarithmic potential U(z) = int log(1/|z - t|) dmu(t).

    For interval measures ``z`` may be any (complex) point.  For circle
    measures ``z`` is an angle ``phi`` (or a unit complex number) and the
    value follows from the interval potential at ``cos phi`` through
    ``U_interval(cos phi) = 2 U_circle(e^{i phi}) + log 2``.
    """
    if mu.domain == "interval":
        out = _interval_potential(mu, z)
        return float(out) if np.ndim(out) == 0 else np.asarray(out, dtype=float)
    z = np.asarray(z)
    phi = np.angle(z) if np.iscomplexobj(z) else z
    out = 0.5 * (np.asarray(_interval_potential(mu, np.cos(phi)), dtype=float) - LOG2)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class FrostmanReport:
    """Potential constants and residuals of the equilibrium conditions.

    ``F1`` and ``F2`` are the component means of the potential on the
    left and right support components (equal in the degenerate case);
    ``residuals`` holds the max deviation from the mean per component and
    ``gap_slack`` the minimum of U - F over the gap (inf when there is no
    gap).
    """

    F1: float
    F2: float
    residuals: Tuple[float, ...]
    gap_slack: float

    @property
    def max_residual(self) -> float:
        return max(self.residuals)


def _chebyshev_points(a, b, m):
    t = math.pi * (np.arange(m) + 0.5) / m
    return 0.5 * (a + b) - 0.5 * (b - a) * np.cos(t)


def frostman_residuals(mu: EquilibriumMeasure, samples_per_component: int = 64,
                       gap_samples: int = 100) -> FrostmanReport:
    """Check that the potential is constant on each component and >= F on the gap.

    For circle measures the constants refer to the circle potential.
    """
    to_circle = mu.domain == "circle"
    means, residuals = [], []
    for a, b in mu.interval_components:
        x = np.concatenate([[a, b], _chebyshev_points(a, b, samples_per_component)])
        u = np.asarray(_interval_potential(mu, x), dtype=float)
        if to_circle:
            u = 0.5 * (u - LOG2)
        means.append(float(np.mean(u)))
        residuals.append(float(np.max(np.abs(u - np.mean(u)))))
    if mu.case == DEGENERATE:
        return FrostmanReport(means[0], means[0], tuple(residuals), math.inf)
    gl, gr = (mu.alpha, mu.beta) if mu.case == CASE_I else (mu.beta, mu.alpha)
    xg = np.linspace(gl, gr, gap_samples + 2)[1:-1]
    ug = np.asarray(_interval_potential(mu, xg), dtype=float)
    if to_circle:
        ug = 0.5 * (ug - LOG2)
    # the gap belongs to [-1, beta] in case i and to [beta, 1] in case ii
    ref = means[0] if mu.case == CASE_I else means[1]
    return FrostmanReport(means[0], means[1], tuple(residuals), float(np.min(ug - ref)))
