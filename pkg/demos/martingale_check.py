"""Dyadic martingale decomposition of cos(2 pi x) and bernoulli1.

The remainder phi_r = f - E[f | D_r] decays like 2**-r for Lipschitz f.  The
quadratic inequality for sums of phi_r(2**k x) is checked on a small grid.
"""

from lacunary.martingale import (
    bernoulli1_correlation,
    build_decomposition,
    decay_exponent,
    martingale_inequality_check,
    sigma_estimate,
)
from lacunary.series import BERNOULLI1, COS2PI, bernoulli1

for f in (COS2PI, BERNOULLI1):
    dec = build_decomposition(f, depth=20, keep=12)
    print(f"{f.name}: fitted decay exponent {decay_exponent(dec):.4f}")
    for r in (2, 5, 8):
        chk = martingale_inequality_check(f, r, 8, decomposition=dec)
        print(f"  r = {r}, n = 8: lhs {chk.lhs:.3e} <= rhs {chk.rhs:.3e}: {chk.holds}")

est = sigma_estimate(bernoulli1, [4, 16, 64, 256], correlation=bernoulli1_correlation)
print("\nvariance per term of the bernoulli1 sum:", ", ".join(f"{v:.6f}" for v in est.values))
print(f"extrapolated limit {est.limit:.6f} (exact 1/4)")
