"""Constrained equilibrium measures and the rate function J(q).

Run with ``python3 demos/rate_function_tour.py``.  Cells are marked with
``# %%`` so the file also opens as a notebook in editors that support it.
"""
# %%
import math

import numpy as np

from arcldp.equilibrium import CircleConstraint, circle_measure, frostman_residuals
from arcldp.rate import build_rate_table, lambda_transform, rate_J

# %% [markdown]
# Pin 75% of the mass on the half circle |psi| <= pi/2.  Uniform measure puts
# only half there, so the solution piles up on the arc and opens a gap on
# each side of it.

# %%
nu = circle_measure(CircleConstraint(math.pi, 0.75))
print("case", nu.case, "alpha", nu.alpha)
for arc in nu.support:
    print(f"support arc [{arc.left:+.4f}, {arc.right:+.4f}]")
fr = frostman_residuals(nu)
print("potential constants", fr.F1, fr.F2, "residual", fr.max_residual)

# %%
psi = np.linspace(-math.pi, math.pi, 9)
print(np.column_stack([psi, nu.density(psi), nu.cdf(psi)]))

# %% [markdown]
# J vanishes at the free mass theta/2pi and is symmetric about 1/2 when
# theta = pi.  Its endpoint value is -log sin(theta/4).

# %%
for q in (0.1, 0.25, 0.5, 0.75, 0.9, 0.999):
    print(f"J({q}) = {rate_J(math.pi, q):.10f}")
print("limit at q=1:", -math.log(math.sin(math.pi / 4)))

# %%
table = build_rate_table(math.pi)
L = lambda_transform(table)
print("saturation threshold c0 =", L.c0, "closed form", math.acosh(3.0))
for lam in (0.25, 0.5, 1.0, 2.0):
    print(f"Lambda({lam}) = {L(lam):.8f}  argmax y = {L.argmax(lam):.6f}")
