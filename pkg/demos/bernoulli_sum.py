"""The sum of bernoulli1(2**k x) over k = 1..n.

Its Rademacher expansion gives the exact moment generating function and a
closed form for the variance.  Its distribution function is computed exactly
from binary digit counts.
"""

import math

import numpy as np

from lacunary.charfn import mgf_bernoulli_exact
from lacunary.limits import BernoulliSumLaw
from lacunary.series import bernoulli_expansion_weights, bernoulli_variance

for n in (1, 2, 8, 20):
    s = bernoulli_expansion_weights(n, 64).sum_of_squares()
    print(f"n = {n:2d}: sum of squared weights {s:.15f}, closed form {bernoulli_variance(n):.15f}")

z = np.linspace(-1, 1, 201)
print("\nmod-Gaussian residual with t_n = sqrt(n)/4 and limit exp(-z^4/192)")
prev = None
for n in (256, 1024, 4096):
    res = mgf_bernoulli_exact(n, z * n**-0.25) * np.exp(-math.sqrt(n) * z**2 / 8)
    err = float(np.max(np.abs(res - np.exp(-(z**4) / 192))))
    note = f"  (ratio {prev / err:.2f})" if prev else ""
    print(f"n = {n:5d}: sup error {err:.3e}{note}")
    prev = err

print("\nKolmogorov distance to the normal law")
for n in (64, 256, 1024):
    law = BernoulliSumLaw(n)
    print(f"n = {n:5d}: std {law.std:.4f}, d_Kol {law.kolmogorov_distance():.3e}")
