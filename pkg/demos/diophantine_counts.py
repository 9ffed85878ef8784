"""Counting solutions of signed and XOR equations in lacunary frequencies.

For m_k = 3**k no XOR combination vanishes.  The interleaved sequence
2, 3, 4, 6, 8, 12, ... has ratio 4/3, and its count of vanishing signed sums
grows with n.
"""

from lacunary.diophantine import count_signed_solutions, count_xor_solutions
from lacunary.series import interleaved_sequence, power_sequence

seq = power_sequence(3, 18)
zeros = sum(count_xor_solutions(seq, 18, l).zero_count for l in range(1, 7))
print(f"3**k, n = 18, l <= 6: vanishing XOR combinations = {zeros}")

inter = interleaved_sequence(48)
print("\ninterleaved sequence, l = 3, r = 1, A = 0")
for n in (12, 24, 48):
    print(f"n = {n:2d}: {count_signed_solutions(inter, n, 3, 1)[0].count(0)} solutions")

print("\nlargest buckets against the bound for 3**k, n = 16, l = 3, r = 2")
for klass, rep in count_signed_solutions(power_sequence(3, 16), 16, 3, 2).items():
    print(f"class (p2, p3) = {klass}: max count {rep.max_count:4d}, bound {rep.bound:.3g}, ok {rep.verdict}")
