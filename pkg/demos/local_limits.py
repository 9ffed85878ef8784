"""Window probabilities and tails for the Walsh flat(1/4) family at n = 2**16."""

import math

from lacunary.limits import llt_statistic, normal_tail, tail_ratio_extended_clt, walsh_law
from lacunary.series import CoefficientTriangle, power_sequence

coeffs = CoefficientTriangle.flat(0.25)
n = 2**16
law = walsh_law(power_sequence(2, n), coeffs, n)
A = coeffs.A(n)

stat = llt_statistic(law, A, 0.0, (-0.5, 0.5))
print(f"A_n P[S in [-1/2, 1/2)) = {stat:.6f}, Gaussian value {1 / math.sqrt(2 * math.pi):.6f}")

for y in (0.5, 1.0, 2.0):
    r = tail_ratio_extended_clt(law, A, y)
    print(f"y = {y}: P[S/A_n >= y] = {law.prob_ge(A * y):.5e}, Gaussian {normal_tail(y):.5e}, ratio {r:.4f}")
