"""Laws of partial sums and the statistics of the limit theorems.

Two kinds of law share one small interface (``cdf``, ``cdf_left``,
``prob_interval``, ``prob_ge``, ``prob_le``):

* :class:`DiscreteLaw` - finitely many atoms with exact rational masses,
  stored as integer counts over a common denominator;
* :class:`BernoulliSumLaw` - the continuous law of
  ``sum_{k=1}^n bernoulli1(2**k x)``, with an exact CDF.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import accumulate

import numpy as np
from scipy.special import ndtr
from scipy.stats import binom

from .errors import BudgetError, DomainError, RangeError
from .series import (
    CoefficientTriangle,
    DyadicStepFunction,
    LacunarySequence,
    bernoulli_variance,
    walsh_partial_sum,
)

SQRT2PI = math.sqrt(2 * math.pi)


def normal_cdf(x):
    return ndtr(x)


def normal_tail(y: float) -> float:
    """``P[N(0,1) >= y]`` without cancellation."""
    return float(ndtr(-y))


# ---------------------------------------------------------------------------
# Discrete laws
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DiscreteLaw:
    """Atoms ``values[i]`` with exact masses ``counts[i] / denominator``."""

    values: np.ndarray
    counts: tuple
    denominator: int
    source: str = "dyadic-cells"
    _cum: tuple = field(init=False, repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        counts = tuple(int(c) for c in self.counts)
        if vals.ndim != 1 or vals.size != len(counts) or vals.size == 0:
            raise DomainError("values and counts must be nonempty and of equal length")
        if np.any(np.diff(vals) <= 0):
            raise DomainError("atom values must be strictly increasing")
        if any(c <= 0 for c in counts):
            raise DomainError("atom masses must be positive")
        cum = (0,) + tuple(accumulate(counts))
        if cum[-1] != self.denominator:
            raise DomainError("masses must sum to one")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "_cum", cum)

    @property
    def atoms(self) -> list[tuple[float, Fraction]]:
        return [(float(v), Fraction(c, self.denominator)) for v, c in zip(self.values, self.counts)]

    @property
    def masses(self) -> np.ndarray:
        return np.array([c / self.denominator for c in self.counts])

    def _mass_between(self, i: int, j: int) -> Fraction:
        return Fraction(self._cum[j] - self._cum[i], self.denominator)

    def cdf(self, x) -> float:
        """``P[X <= x]`` (right-continuous)."""
        i = int(np.searchsorted(self.values, x, side="right"))
        return self._cum[i] / self.denominator

    def cdf_left(self, x) -> float:
        """``P[X < x]``."""
        i = int(np.searchsorted(self.values, x, side="left"))
        return self._cum[i] / self.denominator

    def interval_mass(self, lo: float, hi: float) -> Fraction:
        """Exact ``P[lo <= X < hi]``."""
        i = int(np.searchsorted(self.values, lo, side="left"))
        j = int(np.searchsorted(self.values, hi, side="left"))
        return self._mass_between(i, max(i, j))

    def prob_interval(self, lo: float, hi: float) -> float:
        return float(self.interval_mass(lo, hi))

    def prob_ge(self, x: float) -> float:
        i = int(np.searchsorted(self.values, x, side="left"))
        return (self.denominator - self._cum[i]) / self.denominator

    def prob_le(self, x: float) -> float:
        return self.cdf(x)

    def cdf_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """``(F(x-), F(x))`` at every atom, as floats."""
        F = np.array([c / self.denominator for c in self._cum])
        return F[:-1], F[1:]

    def mean(self) -> float:
        return float(np.dot(self.masses, self.values))

    def variance(self) -> float:
        m = self.mean()
        return float(np.dot(self.masses, (self.values - m) ** 2))


def _group(values: np.ndarray, rtol: float) -> tuple[np.ndarray, list[int]]:
    v = np.sort(np.asarray(values, dtype=float))
    scale = max(1.0, float(np.max(np.abs(v))))
    cuts = np.flatnonzero(np.diff(v) > rtol * scale) + 1
    starts = np.concatenate(([0], cuts))
    ends = np.concatenate((cuts, [v.size]))
    reps = v[starts]
    return reps, [int(e - s) for s, e in zip(starts, ends)]


def exact_law(S: DyadicStepFunction, rtol: float = 1e-12) -> DiscreteLaw:
    """Pushforward of Lebesgue measure under a step function.

    Cell values closer than ``rtol * max(1, max|S|)`` are merged; this only
    absorbs rounding in the summation that built the values.
    """
    reps, counts = _group(S.values, rtol)
    return DiscreteLaw(reps, counts, 1 << S.resolution, "dyadic-cells")


def binomial_law(n: int, scale: float) -> DiscreteLaw:
    """Law of ``scale * sum_{k=1}^n eps_k`` for independent fair signs."""
    if n < 1:
        return DiscreteLaw(np.zeros(1), (1,), 1, "binomial")
    counts = [1]
    c = 1
    for j in range(n):
        c = c * (n - j) // (j + 1)
        counts.append(c)
    vals = scale * (2.0 * np.arange(n + 1) - n)
    if scale < 0:
        vals, counts = vals[::-1], counts[::-1]
    return DiscreteLaw(vals, counts, 1 << n, "binomial")


def sign_sum_law(a: Sequence[float], max_atoms: int = 1 << 22) -> DiscreteLaw:
    """Exact law of ``sum_k a_k eps_k`` with independent fair signs.

    Equal coefficients use the binomial closed form; otherwise atoms are
    convolved one coefficient at a time with exact rational keys.
    """
    a = [float(x) for x in a if x != 0.0]
    if not a:
        return DiscreteLaw(np.zeros(1), (1,), 1, "walsh-exact")
    if all(x == a[0] for x in a):
        return binomial_law(len(a), abs(a[0]))
    dist = {Fraction(0): 1}
    for x in a:
        fx = Fraction(x)
        nxt: dict = {}
        for v, c in dist.items():
            nxt[v + fx] = nxt.get(v + fx, 0) + c
            nxt[v - fx] = nxt.get(v - fx, 0) + c
        dist = nxt
        if len(dist) > max_atoms:
            raise BudgetError(f"law has more than {max_atoms} atoms", configurations=len(dist))
    keys = sorted(dist)
    vals = np.array([float(k) for k in keys])
    counts = [dist[k] for k in keys]
    # rational sums of rounded coefficients can differ below float resolution
    scale = max(1.0, float(np.max(np.abs(vals))))
    cuts = np.flatnonzero(np.diff(vals) > 1e-12 * scale) + 1
    starts = np.concatenate(([0], cuts)).astype(int)
    ends = np.concatenate((cuts, [vals.size])).astype(int)
    merged = [sum(counts[s:e]) for s, e in zip(starts, ends)]
    return DiscreteLaw(vals[starts], merged, 1 << len(a), "walsh-exact")


def walsh_law(seq: LacunarySequence, coeffs: CoefficientTriangle, n: int) -> DiscreteLaw:
    """Exact law of the Walsh partial sum.

    Gap ratio >= 2 makes the Walsh terms independent fair signs; otherwise the
    law is read off the exact step function.
    """
    if seq.certifies(2):
        seq.require_integral(n)
        return sign_sum_law(coeffs.row(n))
    return exact_law(walsh_partial_sum(seq, coeffs, n))


def monte_carlo_law(func: Callable, N: int = 1 << 22, seed: int = 0, chunk: int = 1 << 18) -> DiscreteLaw:
    """Stratified sample law: one uniform point in each ``[j/N, (j+1)/N)``.

    Handles exposing ``sample`` whose frequencies reach ``2**40`` are sampled
    along their orbit instead, since double inputs lose all information there.
    """
    if hasattr(func, "sample") and getattr(func, "max_frequency", 0) >= 1 << 40:
        vals, counts = np.unique(func.sample(N, seed), return_counts=True)
        return DiscreteLaw(vals, counts.tolist(), N, f"orbit-sample(seed={seed}, N={N})")
    rng = np.random.default_rng(seed)
    out = np.empty(N)
    for s in range(0, N, chunk):
        m = min(chunk, N - s)
        x = (np.arange(s, s + m) + rng.random(m)) / N
        out[s : s + m] = func(np.minimum(x, np.nextafter(1.0, 0.0)))
    vals, counts = np.unique(out, return_counts=True)
    return DiscreteLaw(vals, counts.tolist(), N, f"monte-carlo(seed={seed}, N={N})")


# ---------------------------------------------------------------------------
# Exact law of the geometric Bernoulli sum
# ---------------------------------------------------------------------------

_LN2 = math.log(2)


def _log_comb(i: int, j: int) -> float:
    return math.lgamma(i + 1) - math.lgamma(j + 1) - math.lgamma(i - j + 1)


def _ratio(a: int, n: int) -> float:
    """``a / 2**n`` for arbitrarily large integers."""
    sh = max(a.bit_length() - 60, 0)
    return math.ldexp(a >> sh, sh - n)


def _prefix(T: int, n: int, k: int) -> tuple[float, float]:
    """``(P[m < T, pop(m) = k], E[m / 2**n; m < T, pop(m) = k])`` for uniform ``m < 2**n``.

    The scan over the set bits of ``T`` stops once the unscanned part carries
    less than ``2**-62`` of probability.
    """
    if k < 0 or k > n:
        return 0.0, 0.0
    if T >= 1 << n:
        c = math.exp(_log_comb(n, k) - n * _LN2)
        s = 0.0
        if k >= 1:
            s = math.exp(_log_comb(n - 1, k - 1) - n * _LN2) * (1 - math.ldexp(1.0, -n))
        return c, s
    cnt = sm = 0.0
    ones = 0
    rest = T
    high = 0
    floor_bit = n - 64
    while rest and ones <= k:
        i = rest.bit_length() - 1
        if i < floor_bit:
            break
        rest ^= 1 << i
        j = k - ones
        if j <= i:
            c = math.exp(_log_comb(i, j) - n * _LN2)
            cnt += c
            sm += c * _ratio(high, n)
            if j >= 1:
                sm += math.exp(_log_comb(i - 1, j - 1) + (i - 2 * n) * _LN2) * (1 - math.ldexp(1.0, -i))
        high |= 1 << i
        ones += 1
    return cnt, sm


class BernoulliSumLaw:
    """Law of ``S_n = sum_{k=1}^n bernoulli1(2**k x)`` under Lebesgue measure.

    Writing the binary digits of ``x`` as ``b_1 b_2 ...``,
    ``S_n + n/2 = pop(m) - m / 2**n + (1 - 2**-n) U`` where ``m`` is the integer
    with digits ``b_2 .. b_{n+1}`` (uniform on ``[0, 2**n)``) and ``U`` is an
    independent uniform variable on ``[0, 1)``.  The CDF is assembled from
    prefix counts of ``m`` with a given popcount.  Absolute accuracy is about
    ``1e-10`` for ``n`` up to ``2**14`` (limited by ``lgamma``).
    """

    def __init__(self, n: int):
        if n < 1:
            raise DomainError("n must be at least 1")
        self.n = int(n)
        self.variance = bernoulli_variance(self.n)
        self.std = math.sqrt(self.variance)
        self._w = Fraction(1) - Fraction(1, 1 << self.n)
        self._wf = 1 - math.ldexp(1.0, -self.n)

    def _cdf_shifted(self, s: float) -> float:
        n = self.n
        N = 1 << n
        k0 = math.floor(s)
        tot = float(binom.cdf(k0 - 1, n, 0.5)) if k0 >= 1 else 0.0
        d = s - k0
        if 0 <= k0 <= n:
            T = min(max(math.floor((self._w - Fraction(d)) * N) + 1, 0), N)
            c_lo, s_lo = _prefix(T, n, k0)
            c_all, _ = _prefix(N, n, k0)
            tot += (d * c_lo + s_lo) / self._wf + (c_all - c_lo)
        k1 = k0 + 1
        if 0 <= k1 <= n:
            d = s - k1
            T = min(max(math.ceil(Fraction(-d) * N), 0), N)
            c_lo, s_lo = _prefix(T, n, k1)
            c_all, s_all = _prefix(N, n, k1)
            tot += (d * (c_all - c_lo) + (s_all - s_lo)) / self._wf
        return min(max(tot, 0.0), 1.0)

    def cdf(self, x) -> float | np.ndarray:
        """``P[S_n <= x]``; vectorised over ``x``."""
        xa = np.asarray(x, dtype=float)
        out = np.array([self._cdf_shifted(float(v) + self.n / 2) for v in xa.reshape(-1)])
        return out.reshape(xa.shape) if xa.ndim else float(out[0])

    cdf_left = cdf  # continuous law

    def prob_interval(self, lo: float, hi: float) -> float:
        return float(self.cdf(hi) - self.cdf(lo))

    def prob_ge(self, x: float) -> float:
        if x > 0:
            return float(self.cdf(-x))  # symmetric law
        return 1.0 - float(self.cdf(x))

    def prob_le(self, x: float) -> float:
        return float(self.cdf(x))

    def kolmogorov_distance(self, scale: float | None = None, points: int = 4001, refine: int = 3) -> float:
        """``sup_x |P[S_n / scale <= x] - Phi(x)|`` (scale defaults to the exact std).

        The CDF is continuous, so a grid over ``[-6, 6]`` followed by local
        refinement around the largest deviations suffices.
        """
        scale = self.std if scale is None else scale
        x = np.linspace(-6.0, 6.0, points)
        h = x[1] - x[0]
        dev = np.abs(self.cdf(x * scale) - ndtr(x))
        best = float(dev.max())
        centres = x[np.argsort(dev)[-4:]]
        for _ in range(refine):
            new = []
            for c in centres:
                xs = np.linspace(c - h, c + h, 41)
                dv = np.abs(self.cdf(xs * scale) - ndtr(xs))
                j = int(np.argmax(dv))
                best = max(best, float(dv[j]))
                new.append(xs[j])
            centres = new
            h /= 20
        return best


# ---------------------------------------------------------------------------
# Statistics
# ---------------------------------------------------------------------------


def kolmogorov_distance(law, reference: Callable | None = None, scale: float = 1.0) -> float:
    """Kolmogorov distance between the law of ``X / scale`` and ``reference``.

    For a discrete law both one-sided limits ``F(x-)`` and ``F(x)`` are
    compared with the reference CDF at every atom.
    """
    ref = normal_cdf if reference is None else reference
    if isinstance(law, BernoulliSumLaw):
        if reference is not None:
            raise DomainError("continuous laws are compared with the standard normal only")
        return law.kolmogorov_distance(scale)
    Fm, F = law.cdf_arrays()
    P = np.asarray(ref(law.values / scale), dtype=float)
    return float(max(np.max(np.abs(Fm - P)), np.max(np.abs(F - P))))


def _window(B) -> list[tuple[float, float]]:
    if isinstance(B, tuple) and len(B) == 2 and not isinstance(B[0], (tuple, list)):
        B = [B]
    ivs = [(float(lo), float(hi)) for lo, hi in B]
    if any(hi < lo for lo, hi in ivs) or sum(hi - lo for lo, hi in ivs) <= 0:
        raise DomainError("window B must have positive length")
    return ivs


def window_length(B) -> float:
    return sum(hi - lo for lo, hi in _window(B))


def llt_statistic(law, A_n: float, y: float, B, delta: float = 0.5, t_n: float | None = None,
                  gamma: float | None = None) -> float:
    """Scaled window probability ``t**delta P[S / A_n - y in t**(-delta) B]``.

    ``t`` defaults to ``A_n**2``; with ``delta = 1/2`` and ``y = 0`` this is the
    weak form ``A_n P[S in B]``.  ``B`` is a half-open interval ``(lo, hi)`` or
    a list of disjoint ones.  The target value is ``|B| / sqrt(2 pi)``.
    When ``gamma`` is given, ``delta`` must lie in ``(0, gamma + 1/2)``.
    """
    ivs = _window(B)
    if delta <= 0 or (gamma is not None and delta >= gamma + 0.5):
        raise DomainError("delta outside the admissible range")
    t = A_n**2 if t_n is None else t_n
    shrink = t ** (-delta)
    if isinstance(law, DiscreteLaw):
        p = sum(law.interval_mass(A_n * (y + shrink * lo), A_n * (y + shrink * hi)) for lo, hi in ivs)
        return t**delta * float(p)
    p = sum(law.prob_interval(A_n * (y + shrink * lo), A_n * (y + shrink * hi)) for lo, hi in ivs)
    return t**delta * p


def tail_ratio_extended_clt(law, A_n: float, y: float) -> float:
    """``P[S / A_n >= y]`` divided by the Gaussian tail at ``y``."""
    if y < 0:
        raise DomainError("y must be nonnegative")
    q = normal_tail(y)
    if q < 1e-300:
        raise RangeError(f"Gaussian tail underflows at y={y}")
    return law.prob_ge(A_n * y) / q


def moderate_deviation_check(law, A_n: float, y: float, psi: Callable, t_n: float | None = None,
                             scale: float = 1.0) -> tuple[float, float]:
    """Observed and predicted moderate-deviation probabilities.

    With ``X = S / scale`` and ``t = t_n`` (default ``A_n**2``), the observed
    value is ``P[X >= t y]`` for ``y > 0`` and ``P[X <= t y]`` for ``y < 0``;
    the prediction is ``exp(-t y**2/2) / (|y| sqrt(2 pi t)) psi(|y|)``.
    """
    if y == 0:
        raise DomainError("y must be nonzero")
    t = A_n**2 if t_n is None else t_n
    thr = scale * t * y
    observed = law.prob_ge(thr) if y > 0 else law.prob_le(thr)
    ay = abs(y)
    predicted = math.exp(-t * ay * ay / 2) / (ay * math.sqrt(2 * math.pi * t)) * float(np.real(psi(ay)))
    return observed, predicted


def berry_esseen_rate_fit(distances: Sequence[tuple[float, float]]) -> float:
    """Least-squares slope of ``log d_Kol`` against ``log A_n``."""
    if len(distances) < 3:
        raise DomainError("need at least three points")
    A = np.array([p[0] for p in distances], dtype=float)
    d = np.array([p[1] for p in distances], dtype=float)
    if np.any(d <= 0):
        raise DomainError("distances must be positive")
    if np.any(np.diff(A) <= 0):
        raise DomainError("A_n must be increasing")
    return float(np.polyfit(np.log(A), np.log(d), 1)[0])
