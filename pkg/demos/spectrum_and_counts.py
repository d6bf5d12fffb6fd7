"""Kernel eigenvalues, the counting function and the window-average ladder.

Run with ``python3 demos/spectrum_and_counts.py`` (about half a minute).
"""
# %%
from fractions import Fraction

import mpmath
import numpy as np

from arcldp.ldp import log_mgf, sample_counts, verify_main, window_average
from arcldp.rate import build_rate_table, lambda_transform
from arcldp.spectrum import CountQuery, counting_G, eigenvalues

PI = Fraction(1)

# %% [markdown]
# Half the eigenvalues of the 32 x 32 prolate matrix sit near 1 and half
# near 0; the small ones decay like exp(-c n) and need extended precision.

# %%
spec = eigenvalues(32, PI, x_max=3.0)
print("bits", spec.bits_used)
for j in (0, 15, 16, 31):
    print(j + 1, mpmath.nstr(spec.eigenvalues[j], 20))
print("exponents", np.round(spec.as_float()[:3], 6), "...")

# %%
for x in (0.0, 0.1, 0.5, 1.0, 2.0):
    print(f"|G({x}, 32)| =", counting_G(CountQuery(x, 32), PI))

# %% [markdown]
# The scaled log-MGF and the window averages approach their limits along
# a ladder of sizes.

# %%
L = lambda_transform(build_rate_table(3.141592653589793))
for n in (16, 32, 64):
    s = spec if n == 32 else eigenvalues(n, PI, x_max=3.0)
    print(n, "log-MGF(1) =", log_mgf(1.0, s).value, " Lambda(1) =", L(1.0),
          " A_n/n =", window_average(1.0, 0.25, s) / n)

report = verify_main(PI, 1.0, 0.25, [16, 32, 64], lambda_fn=L)
print("residuals", report.residuals, "PASS" if report.passed else "FAIL")

# %%
stats = sample_counts(16, PI, 100_000, seed=7)
print("mean", stats.mean, "variance", stats.variance, "expected", stats.expected_variance)
