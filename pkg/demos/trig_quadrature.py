"""Characteristic functions of lacunary cosine sums.

A single cosine gives the Bessel function J_0.  Geometric frequencies go
through a transfer operator, which keeps the cost linear in n.
"""


import numpy as np
from scipy.special import j0

from lacunary.charfn import char_fn_quadrature, weak_modgauss_l1_check
from lacunary.series import CoefficientTriangle, TrigSum, power_sequence, trig_sum

lam = np.array([0.5, 1.0, 2.405, 5.0])
print("E exp(i lam cos 2 pi x) vs J_0:", np.max(np.abs(char_fn_quadrature(TrigSum((1,), (1.0,)), lam) - j0(lam))))

coeffs = CoefficientTriangle.flat(0.4, "trig")
n = 1024
S = trig_sum(power_sequence(2, n), coeffs, n)
t = np.array([0.5, 1.0, 2.0]) / coeffs.A(n)
print(f"n = {n}: phi(t / A_n) =", np.round(char_fn_quadrature(S, t).real, 6),
      "Gaussian", np.round(np.exp(-(t * coeffs.A(n)) ** 2 / 2), 6))

res = weak_modgauss_l1_check(
    lambda n, t: char_fn_quadrature(trig_sum(power_sequence(2, n), coeffs, n), t),
    coeffs.A, 2.0, [2**k for k in range(6, 11)],
)
print("L1 errors:", ", ".join(f"{e:.3e}" for e in res.errors), "decreasing:", res.decreasing)
