"""Walsh sums along m_k = 2**k are sums of independent signs.

With coefficients n**-0.25 the exact law is binomial, so the distance to the
normal law can be computed without sampling.  The distance decays like
A_n**-2, and the mod-Gaussian residual approaches exp(-z**4 / 12).
"""

import numpy as np

from lacunary.charfn import limiting_function, mgf_walsh_exact
from lacunary.limits import berry_esseen_rate_fit, kolmogorov_distance, walsh_law
from lacunary.series import CoefficientTriangle, power_sequence

coeffs = CoefficientTriangle.flat(0.25)

print("n        A_n       d_Kol")
points = []
for k in range(8, 15, 2):
    n = 2**k
    law = walsh_law(power_sequence(2, n), coeffs, n)
    d = kolmogorov_distance(law, scale=coeffs.A(n))
    points.append((coeffs.A(n), d))
    print(f"{n:<8d} {coeffs.A(n):8.3f}  {d:.3e}")
print(f"fitted slope of log d_Kol against log A_n: {berry_esseen_rate_fit(points):.3f}")

# residual phi_n(z) exp(-A_n**2 z**2 / 2) against the limit
z = np.linspace(-1.5, 1.5, 61)
for n in (2**8, 2**12):
    phi = mgf_walsh_exact(coeffs, n, z, seq=power_sequence(2, n))
    res = phi * np.exp(-coeffs.A(n) ** 2 * z**2 / 2)
    err = np.max(np.abs(res - limiting_function("walsh", z, coeffs.kappa4(n))))
    print(f"n = {n}: sup |residual - exp(-z^4/12)| = {err:.2e}")
