"""Brute-force check of the constrained equilibrium problem.

The circle is discretised by ``m`` equispaced nodes and the logarithmic
energy of a weight vector ``w`` becomes the quadratic form ``w^T K w`` with

    K_ij = log(1/|z_i - z_j|),   K_ii = log(1/delta),   delta = cell/(2e).

The diagonal choice makes the uniform grid measure reproduce the
continuum energy 0 up to ``log(e/pi)/m``.  Minimising over weights with
mass ``q`` on the arc nodes is a convex quadratic program on a product of
two scaled simplices, solved by monotone accelerated projected gradient.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .equilibrium import CircleConstraint, EquilibriumMeasure, circle_measure
from .numerics import angle_value

__all__ = [
    "GridMeasure",
    "OracleResult",
    "circle_grid",
    "interval_grid",
    "energy_matrix",
    "discrete_energy",
    "project_simplex",
    "minimize_constrained",
    "compare_to_analytic",
    "oracle_table",
    "CDF_POINTS",
]

CDF_POINTS = 1000
GRAD_TOL = 1e-6


@dataclass(frozen=True)
class GridMeasure:
    """Weighted nodes on the circle (angles) or on [-1, 1].

    ``arc_mask`` marks nodes in the constrained set: the arc
    ``|psi| <= theta/2`` on the circle or ``[beta, 1]`` on the interval.
    ``cell`` holds the length of each node's cell (arc length on the
    circle).
    """

    nodes: np.ndarray
    weights: np.ndarray
    arc_mask: np.ndarray
    cell: np.ndarray
    domain: str = "circle"
    theta: Optional[float] = None

    def __post_init__(self):
        if self.nodes.shape != self.weights.shape or self.nodes.shape != self.arc_mask.shape:
            raise ValueError("nodes, weights and mask must have equal shapes")
        if np.any(self.weights < 0):
            raise ValueError("weights must be nonnegative")
        key = np.mod(self.nodes, 2 * math.pi) if self.domain == "circle" else self.nodes
        if np.unique(np.round(key, 14)).size < key.size or np.any(self.cell <= 0):
            raise ValueError("coincident nodes")

    @property
    def m(self) -> int:
        return self.nodes.size

    @property
    def points(self) -> np.ndarray:
        return np.exp(1j * self.nodes) if self.domain == "circle" else self.nodes

    @property
    def arc_mass(self) -> float:
        return float(math.fsum(self.weights[self.arc_mask]))

    def with_weights(self, w: np.ndarray) -> "GridMeasure":
        return GridMeasure(self.nodes, np.asarray(w, dtype=float), self.arc_mask,
                           self.cell, self.domain, self.theta)


def circle_grid(m: int, theta, weights=None) -> GridMeasure:
    """Nodes ``-pi + 2 pi (i + 1/2)/m``; uniform weights by default."""
    th = angle_value(theta)
    nodes = -math.pi + 2 * math.pi * (np.arange(m) + 0.5) / m
    mask = np.abs(nodes) <= th / 2
    w = np.full(m, 1.0 / m) if weights is None else np.asarray(weights, dtype=float)
    return GridMeasure(nodes, w, mask, np.full(m, 2 * math.pi / m), "circle", th)


def interval_grid(m: int, beta: float = 0.0, weights: str = "arcsine") -> GridMeasure:
    """Cell midpoints of an equispaced partition of [-1, 1].

    ``weights="arcsine"`` gives each node the arcsine mass of its cell.
    """
    edges = np.linspace(-1.0, 1.0, m + 1)
    nodes = 0.5 * (edges[1:] + edges[:-1])
    if weights == "arcsine":
        F = 1.0 - np.arccos(edges) / math.pi
        w = np.diff(F)
    else:
        w = np.full(m, 1.0 / m)
    return GridMeasure(nodes, w, nodes >= beta, np.diff(edges), "interval", None)


def energy_matrix(gm: GridMeasure) -> np.ndarray:
    """Kernel matrix with log(1/|z_i - z_j|) off the diagonal and log(2e/cell_i) on it."""
    if gm.domain == "circle":
        d = np.abs(2.0 * np.sin(0.5 * (gm.nodes[:, None] - gm.nodes[None, :])))
    else:
        d = np.abs(gm.nodes[:, None] - gm.nodes[None, :])
    np.fill_diagonal(d, 1.0)
    if np.any(d == 0):
        raise ValueError("coincident nodes")
    K = -np.log(d)
    np.fill_diagonal(K, np.log(2 * math.e / gm.cell))
    return K


def discrete_energy(gm: GridMeasure, K: Optional[np.ndarray] = None) -> float:
    """Sum_{i != j} w_i w_j log(1/|z_i - z_j|) + sum_i w_i^2 log(1/delta_i)."""
    if K is None:
        K = energy_matrix(gm)
    w = gm.weights
    return float(w @ K @ w)


def project_simplex(v: np.ndarray, total: float) -> np.ndarray:
    """Euclidean projection of ``v`` onto {w >= 0, sum w = total} (sort-based)."""
    if total <= 0:
        return np.zeros_like(v)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - total
    ind = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / ind > 0)[0][-1]
    tau = css[rho] / (rho + 1)
    return np.maximum(v - tau, 0.0)


def _project(v, mask, q):
    out = np.empty_like(v)
    out[mask] = project_simplex(v[mask], q)
    out[~mask] = project_simplex(v[~mask], 1.0 - q)
    return out


@dataclass
class OracleResult:
    grid: GridMeasure
    energy: float
    iterations: int
    converged: bool
    gradient_map_norm: float
    history: List[float] = field(default_factory=list, repr=False)
    step_rule: str = "accelerated, step 1/L with L = 2 lambda_max(K), adaptive restart"

    @property
    def flag(self) -> str:
        return "OK" if self.converged else "WARN"


def minimize_constrained(m: int, theta, q: float, iters: int = 5000,
                         tol: float = GRAD_TOL) -> OracleResult:
    """Minimise the discrete energy with mass ``q`` on the arc nodes.

    Monotone FISTA with gradient-based restart: the accepted iterate never increases the energy, and
    the best iterate is returned.  Convergence means the gradient mapping
    ``L |w - P(w - grad/L)|`` fell below ``tol`` within ``iters`` steps;
    otherwise the result carries a WARN flag.
    """
    if m < 200:
        raise ValueError("m must be at least 200")
    if not 0.0 < q < 1.0:
        raise ValueError("q must lie in (0, 1)")
    grid = circle_grid(m, theta)
    mask = grid.arc_mask
    K = energy_matrix(grid)
    L = 2.0 * float(np.linalg.eigvalsh(K)[-1])
    w = np.where(mask, q / mask.sum(), (1.0 - q) / (~mask).sum())
    Ew = float(w @ K @ w)
    y, t = w.copy(), 1.0
    history = [Ew]
    gnorm = math.inf
    converged = False
    k = 0
    for k in range(1, iters + 1):
        z = _project(y - (2.0 * K @ y) / L, mask, q)
        Ez = float(z @ K @ z)
        # restart the momentum when it points uphill
        if Ez > Ew or float((y - z) @ (z - w)) > 0.0:
            t = 1.0
        t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        if Ez <= Ew:
            w_new, E_new = z, Ez
        else:
            w_new, E_new = w, Ew
        y = w_new + (t / t_new) * (z - w_new) + ((t - 1.0) / t_new) * (w_new - w)
        w, Ew, t = w_new, E_new, t_new
        history.append(Ew)
        if k % 25 == 0 or k == iters:
            gnorm = L * float(np.linalg.norm(w - _project(w - (2.0 * K @ w) / L, mask, q)))
            if gnorm <= tol:
                converged = True
                break
    return OracleResult(grid.with_weights(w), Ew, k, converged, gnorm, history)


def compare_to_analytic(gm: GridMeasure, mu: EquilibriumMeasure,
                        points: int = CDF_POINTS) -> float:
    """Sup distance between the grid CDF and the analytic CDF on [-pi, pi]."""
    if gm.domain != "circle" or mu.domain != "circle":
        raise ValueError("both measures must live on the circle")
    if gm.theta is not None and abs(gm.theta - mu.params.theta) > 1e-12:
        raise ValueError("theta mismatch between grid and analytic measure")
    if abs(gm.arc_mass - mu.q) > 1e-9:
        raise ValueError("arc mass mismatch between grid and analytic measure")
    psi = np.linspace(-math.pi, math.pi, points)
    order = np.argsort(gm.nodes)
    cum = np.concatenate([[0.0], np.cumsum(gm.weights[order])])
    grid_cdf = cum[np.searchsorted(gm.nodes[order], psi, side="right")]
    return float(np.max(np.abs(grid_cdf - mu.cdf(psi))))


def oracle_table(result: OracleResult, mu: Optional[EquilibriumMeasure] = None
                 ) -> List[Tuple[float, float, float]]:
    """Rows (node, weight, analytic density at node) for overlay plots."""
    gm = result.grid
    dens = mu.density(gm.nodes) if mu is not None else np.full(gm.m, np.nan)
    return [(float(a), float(b), float(c)) for a, b, c in zip(gm.nodes, gm.weights, dens)]
