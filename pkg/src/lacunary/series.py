"""Lacunary sequences, coefficient arrays and the basic partial sums.

Frequencies are kept as Python integers whenever they are integral so that
very long geometric sequences such as ``2**4096`` never overflow.  Dyadic
objects are right-continuous on half-open cells ``[j/2**L, (j+1)/2**L)``.
"""

from __future__ import annotations

import math
import operator
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import accumulate, repeat
from pathlib import Path
from typing import Any

import numpy as np

from .errors import ConstraintError, DomainError, IntegralityError, PrecisionError, SizeError

SEQUENCE_KINDS = ("power", "interleaved-example", "big-gap", "custom")


def _as_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, (int, np.integer)):
        return Fraction(int(v))
    return Fraction(float(v))


# ---------------------------------------------------------------------------
# Sequences
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LacunarySequence:
    """Strictly increasing positive frequencies with a certified ratio bound.

    Parameters
    ----------
    terms : tuple
        ``m_1 < m_2 < ...``.  Integers are stored as Python ints.
    q : float or Fraction
        Declared lower bound for ``m_{k+1} / m_k``.  Checked exactly.
    kind : str
        One of ``power``, ``interleaved-example``, ``big-gap``, ``custom``.
    """

    terms: tuple
    q: Any
    kind: str = "custom"
    integral: bool = field(init=False)

    def __post_init__(self):
        if self.kind not in SEQUENCE_KINDS:
            raise DomainError(f"unknown sequence kind {self.kind!r}")
        terms = tuple(int(t) if _is_integral(t) else float(t) for t in self.terms)
        if not terms:
            raise DomainError("a sequence needs at least one term")
        if any(t <= 0 for t in terms):
            raise ConstraintError("frequencies must be positive")
        qf = _as_fraction(self.q)
        if qf <= 1:
            raise ConstraintError(f"ratio bound q={self.q} must exceed 1")
        num, den = qf.numerator, qf.denominator
        for k in range(len(terms) - 1):
            a, b = terms[k], terms[k + 1]
            if isinstance(a, int) and isinstance(b, int):
                # integer fast path: b >= q a  <=>  b den >= num a
                if b <= a:
                    raise ConstraintError(f"terms not strictly increasing at index {k + 1}")
                if b * den < num * a:
                    raise ConstraintError(
                        f"ratio m[{k + 2}]/m[{k + 1}] = {b / a:.6g} below q = {float(qf):.6g}"
                    )
                continue
            a, b = _as_fraction(a), _as_fraction(b)
            if b <= a:
                raise ConstraintError(f"terms not strictly increasing at index {k + 1}")
            if b < qf * a:
                raise ConstraintError(
                    f"ratio m[{k + 2}]/m[{k + 1}] = {float(b / a):.6g} below q = {float(qf):.6g}"
                )
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "integral", all(isinstance(t, int) for t in terms))

    def __len__(self) -> int:
        return len(self.terms)

    @property
    def q_value(self) -> float:
        return float(_as_fraction(self.q))

    def head(self, n: int) -> tuple:
        """First ``n`` terms; raises :class:`SizeError` when unavailable."""
        if n < 0 or n > len(self.terms):
            raise SizeError(f"requested {n} terms, sequence has {len(self.terms)}")
        return self.terms[:n]

    def require_integral(self, n: int | None = None) -> tuple:
        terms = self.terms if n is None else self.head(n)
        if not all(isinstance(t, int) for t in terms):
            raise IntegralityError("integer frequencies required")
        return terms

    def certifies(self, q_min) -> bool:
        """True when the declared bound is at least ``q_min``."""
        return _as_fraction(self.q) >= _as_fraction(q_min)


def _is_integral(t) -> bool:
    if isinstance(t, (int, np.integer)):
        return True
    if isinstance(t, Fraction):
        return t.denominator == 1
    return False


def power_sequence(base: int, n: int) -> LacunarySequence:
    """``m_k = base**k`` for ``k = 1..n``."""
    base = int(base)
    if base < 2:
        raise ConstraintError("base must be at least 2")
    terms = tuple(accumulate(repeat(base, n), operator.mul))
    return LacunarySequence(terms, q=base, kind="power")


def interleaved_sequence(n: int) -> LacunarySequence:
    """Powers of two interleaved with their three-halves.

    The terms are ``2, 3, 4, 6, 8, 12, ...``: ``m_{2j} = 2**j`` and
    ``m_{2j+1} = 2**j + 2**(j-1)`` for ``j >= 1``, renumbered from 1.
    The ratio alternates between 3/2 and 4/3.
    """
    terms = []
    j = 1
    while len(terms) < n:
        terms.append(2**j)
        if len(terms) < n:
            terms.append(2**j + 2 ** (j - 1))
        j += 1
    return LacunarySequence(tuple(terms), q=Fraction(4, 3), kind="interleaved-example")


def big_gap_sequence(b: Sequence[int]) -> LacunarySequence:
    """``m_1 = 1`` and ``m_{k+1} = b_k m_k``."""
    terms = [1]
    for bk in b:
        if int(bk) != bk or bk < 2:
            raise ConstraintError(f"gap factors must be integers >= 2, got {bk}")
        terms.append(terms[-1] * int(bk))
    q = min(b) if len(b) else 2
    return LacunarySequence(tuple(terms), q=int(q), kind="big-gap")


def parse_sequence(spec: str, n: int) -> LacunarySequence:
    """Parse the sequence mini-language.

    ``pow:B``, ``example:interleaved``, ``biggap:b1,b2,...`` or
    ``file:PATH`` (one integer per line).  At least ``n`` terms are built.
    """
    kind, _, arg = spec.partition(":")
    if kind == "pow":
        try:
            base = int(arg)
        except ValueError:
            raise DomainError(f"bad power base in {spec!r}") from None
        return power_sequence(base, n)
    if kind == "example" and arg == "interleaved":
        return interleaved_sequence(n)
    if kind == "biggap":
        try:
            b = [int(s) for s in arg.split(",") if s.strip()]
        except ValueError:
            raise DomainError(f"bad gap list in {spec!r}") from None
        return big_gap_sequence(b)
    if kind == "file":
        try:
            vals = [int(s) for s in Path(arg).read_text().split()]
        except ValueError:
            raise DomainError(f"non-integer entry in {arg!r}") from None
        if len(vals) < 2:
            raise DomainError("sequence file needs at least two integers")
        q = min(Fraction(vals[k + 1], vals[k]) for k in range(len(vals) - 1))
        return LacunarySequence(tuple(vals), q=q, kind="custom")
    raise DomainError(f"unknown sequence spec {spec!r}")


# ---------------------------------------------------------------------------
# Coefficients
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CoefficientTriangle:
    """Triangular array ``a_{k,n}`` with an explicit normalisation convention.

    ``convention='walsh'`` uses ``A_n**2 = sum a**2``; ``convention='trig'``
    uses ``A_n**2 = sum a**2 / 2``.
    """

    scheme: str
    alpha: float = 0.0
    convention: str = "walsh"
    custom: Any = None

    def __post_init__(self):
        if self.scheme not in ("flat", "unit", "custom"):
            raise DomainError(f"unknown coefficient scheme {self.scheme!r}")
        if self.convention not in ("walsh", "trig"):
            raise DomainError(f"unknown convention {self.convention!r}")
        if self.scheme == "custom" and self.custom is None:
            raise DomainError("custom scheme needs rows")

    @classmethod
    def flat(cls, alpha: float, convention: str = "walsh") -> "CoefficientTriangle":
        return cls("flat", float(alpha), convention)

    @classmethod
    def unit(cls, convention: str = "walsh") -> "CoefficientTriangle":
        return cls("unit", 0.0, convention)

    @classmethod
    def from_rows(cls, rows, convention: str = "walsh") -> "CoefficientTriangle":
        """Custom coefficients.

        ``rows`` is either a mapping ``n -> row`` or one sequence whose first
        ``n`` entries serve as row ``n``.
        """
        if isinstance(rows, Mapping):
            data = {int(k): tuple(float(v) for v in r) for k, r in rows.items()}
        else:
            data = tuple(float(v) for v in rows)
        return cls("custom", 0.0, convention, data)

    def with_convention(self, convention: str) -> "CoefficientTriangle":
        return CoefficientTriangle(self.scheme, self.alpha, convention, self.custom)

    def row(self, n: int) -> np.ndarray:
        if n < 0:
            raise SizeError("n must be nonnegative")
        if self.scheme == "flat":
            return np.full(n, float(n) ** (-self.alpha) if n else 0.0)
        if self.scheme == "unit":
            return np.ones(n)
        if isinstance(self.custom, dict):
            if n not in self.custom:
                raise SizeError(f"no coefficient row for n={n}")
            r = self.custom[n]
            if len(r) != n:
                raise SizeError(f"row {n} has {len(r)} entries")
            return np.array(r, dtype=float)
        if n > len(self.custom):
            raise SizeError(f"requested {n} coefficients, only {len(self.custom)} available")
        return np.array(self.custom[:n], dtype=float)

    def A(self, n: int) -> float:
        """Normaliser ``A_n`` under the active convention."""
        s = float(np.sum(self.row(n) ** 2))
        return math.sqrt(s / 2 if self.convention == "trig" else s)

    def d(self, n: int) -> float:
        r = self.row(n)
        return float(np.max(np.abs(r))) if n else 0.0

    def c(self, n: int) -> np.ndarray:
        A = self.A(n)
        if A == 0:
            raise DomainError("all coefficients vanish; A_n = 0")
        return self.row(n) / A

    def kappa4(self, n: int) -> float:
        """Fourth-moment functional ``sum a**4`` under the Walsh convention."""
        return float(np.sum(self.row(n) ** 4))


def parse_coefficients(spec: str, convention: str = "walsh") -> CoefficientTriangle:
    """Parse ``flat:ALPHA``, ``unit`` or ``file:PATH`` (one real per line)."""
    kind, _, arg = spec.partition(":")
    if kind == "flat":
        try:
            return CoefficientTriangle.flat(float(arg), convention)
        except ValueError:
            raise DomainError(f"bad exponent in {spec!r}") from None
    if kind == "unit" and not arg:
        return CoefficientTriangle.unit(convention)
    if kind == "file":
        try:
            vals = [float(s) for s in Path(arg).read_text().split()]
        except ValueError:
            raise DomainError(f"non-numeric entry in {arg!r}") from None
        return CoefficientTriangle.from_rows(vals, convention)
    raise DomainError(f"unknown coefficient spec {spec!r}")


# ---------------------------------------------------------------------------
# Dyadic objects
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DyadicStepFunction:
    """Function constant on the ``2**resolution`` half-open dyadic cells."""

    resolution: int
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (1 << self.resolution,):
            raise DomainError(f"need {1 << self.resolution} values, got shape {vals.shape}")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __call__(self, x):
        x = _check_unit(x)
        idx = np.floor(np.ldexp(x, self.resolution)).astype(np.int64)
        out = self.values[idx]
        return out if out.ndim else float(out)

    def law(self) -> dict[float, Fraction]:
        """Exact pushforward of Lebesgue measure: value -> cell measure."""
        vals, counts = np.unique(self.values, return_counts=True)
        N = 1 << self.resolution
        return {float(v): Fraction(int(c), N) for v, c in zip(vals, counts)}

    def mean(self) -> float:
        return float(np.mean(self.values))

    def refine(self, resolution: int) -> "DyadicStepFunction":
        if resolution < self.resolution:
            raise DomainError("cannot refine to a coarser resolution")
        return DyadicStepFunction(resolution, np.repeat(self.values, 1 << (resolution - self.resolution)))

    def coarsen(self, resolution: int) -> "DyadicStepFunction":
        """Cell averages at a coarser resolution (conditional expectation)."""
        if resolution > self.resolution:
            raise DomainError("cannot coarsen to a finer resolution")
        v = self.values
        for _ in range(self.resolution - resolution):
            v = 0.5 * (v[0::2] + v[1::2])
        return DyadicStepFunction(resolution, v)


def _check_unit(x):
    x = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(x)) or np.any(x < 0) or np.any(x >= 1):
        raise DomainError("x must lie in [0, 1)")
    return x


def _digit(n: int, x: np.ndarray) -> np.ndarray:
    """Binary digit ``n+1`` of each entry of ``x`` (0 or 1)."""
    if n + 1 > 1100:
        # a double has no nonzero binary digits this deep
        return np.zeros(x.shape, dtype=np.int64)
    y = np.floor(np.ldexp(x, n + 1))
    return np.mod(y, 2).astype(np.int64)


def rademacher(n: int, x):
    """``r_n(x) = r_0(2**n x)``: +1 if binary digit ``n+1`` of x is 0, else -1."""
    if n < 0:
        raise DomainError("Rademacher index must be nonnegative")
    xa = _check_unit(x)
    out = 1 - 2 * _digit(int(n), xa)
    return out if out.ndim else int(out)


def walsh(m: int, x):
    """Walsh function: product of ``r_i`` over the set bits ``i`` of ``m``."""
    m = int(m)
    if m < 0:
        raise DomainError("Walsh index must be nonnegative")
    xa = _check_unit(x)
    parity = np.zeros(xa.shape, dtype=np.int64)
    i = 0
    while m:
        if m & 1:
            parity ^= _digit(i, xa)
        m >>= 1
        i += 1
    out = 1 - 2 * parity
    return out if out.ndim else int(out)


def dyadic_xor(k: int, l: int) -> int:
    """Carry-free binary addition."""
    if k < 0 or l < 0:
        raise DomainError("xor is defined on nonnegative integers")
    return int(k) ^ int(l)


def walsh_cell_values(m: int, resolution: int) -> np.ndarray:
    """Values of ``W_m`` on the cells of the given resolution."""
    if m.bit_length() > resolution:
        raise DomainError("resolution too coarse for this Walsh index")
    j = np.arange(1 << resolution, dtype=np.int64)
    parity = np.zeros_like(j)
    i = 0
    while m:
        if m & 1:
            # digit i+1 of x in cell j is bit (resolution-1-i) of j
            parity ^= (j >> (resolution - 1 - i)) & 1
        m >>= 1
        i += 1
    return (1 - 2 * parity).astype(float)


def walsh_partial_sum(seq: LacunarySequence, coeffs: CoefficientTriangle, n: int) -> DyadicStepFunction:
    """Exact step function of ``sum_k a_{k,n} W_{m_k}``."""
    terms = seq.require_integral(n)
    a = coeffs.row(n)
    L = 1 + (terms[-1].bit_length() if n else 0)
    vals = np.zeros(1 << L)
    for ak, mk in zip(a, terms):
        vals += ak * walsh_cell_values(mk, L)
    return DyadicStepFunction(L, vals)


# ---------------------------------------------------------------------------
# Periodic functions and sums
# ---------------------------------------------------------------------------


def bernoulli1(x):
    """First periodic Bernoulli function ``x - floor(x) - 1/2``."""
    xa = np.asarray(x, dtype=float)
    out = xa - np.floor(xa) - 0.5
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class PeriodicFunction:
    """1-periodic function with Hölder data ``|f(x)-f(y)| <= h |x-y|**alpha``.

    ``tail_constant`` is the constant ``C`` in ``||f - E[f|D_r]|| <= C 2**(-r beta)``
    (defaults to ``h``).
    """

    func: Callable
    h: float
    alpha: float
    name: str = "f"
    tail_constant: float | None = None

    def __call__(self, x):
        return self.func(x)

    @property
    def C(self) -> float:
        return self.h if self.tail_constant is None else self.tail_constant


def _cos2pi(x):
    return np.cos(2 * np.pi * np.asarray(x, dtype=float))


BERNOULLI1 = PeriodicFunction(bernoulli1, h=1.0, alpha=1.0, name="bernoulli1", tail_constant=1.0)
COS2PI = PeriodicFunction(_cos2pi, h=2 * np.pi, alpha=1.0, name="cos")


def fourier_function(modes: Sequence[tuple[int, float, float]], name: str = "fourier") -> PeriodicFunction:
    """Finite Fourier series ``sum a_m cos(2 pi m x) + b_m sin(2 pi m x)``.

    The Lipschitz constant ``2 pi sum m (|a_m| + |b_m|)`` is used as ``h``.
    """
    modes = tuple((int(m), float(a), float(b)) for m, a, b in modes)
    if any(m < 1 for m, _, _ in modes):
        raise DomainError("Fourier modes must be positive integers")

    def f(x):
        xa = np.asarray(x, dtype=float)
        out = np.zeros(xa.shape)
        for m, a, b in modes:
            out = out + a * np.cos(2 * np.pi * m * xa) + b * np.sin(2 * np.pi * m * xa)
        return out

    h = 2 * np.pi * sum(m * (abs(a) + abs(b)) for m, a, b in modes)
    return PeriodicFunction(f, h=h if h > 0 else 1.0, alpha=1.0, name=name)


def _frac_times(m, x: np.ndarray) -> np.ndarray:
    """Fractional part of ``m * x``, exact for integer ``m`` of any size."""
    if isinstance(m, int) and m.bit_length() > 52:
        out = np.empty(x.shape)
        flat = out.reshape(-1)
        for i, xi in enumerate(x.reshape(-1)):
            flat[i] = float((Fraction(float(xi)) * m) % 1)
        return out
    y = float(m) * x
    return y - np.floor(y)


_MAX_MULTIPLIER = 1 << 20


def _orbit_plan(frequencies) -> tuple[int, list[int], list[int]]:
    """Write ``m_k = c_k * B**e_k`` with a common base ``B`` and small ``c_k``."""
    fr = list(frequencies)
    if not fr or not all(isinstance(m, int) and m >= 1 for m in fr):
        raise PrecisionError("orbit sampling needs positive integer frequencies")
    if len(fr) >= 2 and fr[1] % fr[0] == 0 and fr[1] // fr[0] >= 2:
        B = fr[1] // fr[0]
        if all(fr[k + 1] == B * fr[k] for k in range(len(fr) - 1)) and fr[0] < _MAX_MULTIPLIER:
            return B, list(range(len(fr))), [fr[0]] * len(fr)
    exps, mults = [], []
    for m in fr:
        e = (m & -m).bit_length() - 1
        exps.append(e)
        mults.append(m >> e)
    if max(mults) >= _MAX_MULTIPLIER:
        raise PrecisionError("frequencies are not small multiples of powers of a common base")
    return 2, exps, mults


def orbit_sample(g: Callable, frequencies, coefficients, N: int, seed: int = 0, chunk: int = 1 << 16) -> np.ndarray:
    """Sample ``sum a_k g(frac(m_k x))`` for uniform ``x`` at full precision.

    A double ``x`` is a dyadic rational, so ``frac(2**k x)`` vanishes once ``k``
    passes the mantissa width.  Instead the orbit ``y_e = frac(B**e x)`` is drawn
    backwards: ``y_E`` is uniform and ``y_e = (d_{e+1} + y_{e+1}) / B`` with fresh
    uniform digits, which has the exact joint law and keeps every ``y_e``
    accurate to machine precision.  The leading digits of ``x`` are stratified.
    """
    B, exps, mults = _orbit_plan(frequencies)
    a = np.asarray(coefficients, dtype=float)
    by_exp: dict[int, list[tuple[float, int]]] = {}
    for ak, e, c in zip(a, exps, mults):
        by_exp.setdefault(e, []).append((float(ak), c))
    E = max(exps)
    depth = 0
    while B ** (depth + 1) <= N:
        depth += 1
    # the first L digits of x are stratified; leftover strata refine y_E
    L = min(depth, E)
    extra = B ** (depth - L)
    rng = np.random.default_rng(seed)
    out = np.empty(N)
    for s in range(0, N, chunk):
        m = min(chunk, N - s)
        cell = (np.arange(s, s + m, dtype=np.int64) * B**depth) // N
        stratum = cell // extra
        y = (cell % extra + rng.random(m)) / extra
        acc = np.zeros(m)
        for e in range(E, -1, -1):
            for ak, c in by_exp.get(e, ()):
                z = c * y if c > 1 else y
                acc += ak * g(z - np.floor(z))
            if e == 0:
                break
            # digit e of x in base B
            if e <= L:
                d = (stratum // B ** (L - e)) % B
            else:
                d = rng.integers(0, B, m)
            y = (d + y) / B
        out[s : s + m] = acc
    return out


def trig_partial_sum(seq: LacunarySequence, coeffs: CoefficientTriangle, n: int, x):
    """``sum_{k<=n} a_{k,n} cos(2 pi m_k x)``."""
    return trig_sum(seq, coeffs, n)(x)


@dataclass(frozen=True, eq=False)
class TrigSum:
    """Handle on ``x -> sum a_k cos(2 pi m_k x)`` with the frequency data attached."""

    frequencies: tuple
    coefficients: np.ndarray

    def __call__(self, x):
        xa = np.asarray(x, dtype=float)
        out = np.zeros(xa.shape)
        for a, m in zip(self.coefficients, self.frequencies):
            out = out + a * np.cos(2 * np.pi * _frac_times(m, xa))
        return out if out.ndim else float(out)

    @property
    def max_frequency(self):
        return max(self.frequencies) if self.frequencies else 0

    def sample(self, N: int, seed: int = 0) -> np.ndarray:
        return orbit_sample(lambda u: np.cos(2 * np.pi * u), self.frequencies, self.coefficients, N, seed)

    def geometric_base(self) -> tuple[int, int] | None:
        """``(c, B)`` when ``m_k = c * B**(k-1)`` with integers ``c >= 1, B >= 2``."""
        fr = self.frequencies
        if len(fr) < 2 or not all(isinstance(m, int) for m in fr):
            return None
        if fr[1] % fr[0]:
            return None
        B = fr[1] // fr[0]
        if B < 2 or any(fr[k + 1] != B * fr[k] for k in range(len(fr) - 1)):
            return None
        return fr[0], B


def trig_sum(seq: LacunarySequence, coeffs: CoefficientTriangle, n: int) -> TrigSum:
    return TrigSum(seq.head(n), coeffs.row(n))


@dataclass(frozen=True, eq=False)
class HolderSum:
    """Handle on ``x -> sum a_k f(m_k x)`` for a periodic ``f``."""

    f: PeriodicFunction
    frequencies: tuple
    coefficients: np.ndarray

    def __call__(self, x):
        xa = np.asarray(x, dtype=float)
        out = np.zeros(xa.shape)
        for a, m in zip(self.coefficients, self.frequencies):
            out = out + a * self.f(_frac_times(m, xa))
        return out if out.ndim else float(out)

    @property
    def max_frequency(self):
        return max(self.frequencies) if self.frequencies else 0

    def sample(self, N: int, seed: int = 0) -> np.ndarray:
        return orbit_sample(self.f, self.frequencies, self.coefficients, N, seed)


def holder_partial_sum(f: PeriodicFunction, seq: LacunarySequence, coeffs: CoefficientTriangle, n: int, x):
    """``sum_{k<=n} a_{k,n} f(m_k x)``."""
    if n == 0:
        xa = np.asarray(x, dtype=float)
        return np.zeros(xa.shape) if xa.ndim else 0.0
    return HolderSum(f, seq.head(n), coeffs.row(n))(x)


# ---------------------------------------------------------------------------
# Rademacher expansion of geometric Bernoulli sums
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RademacherExpansion:
    """Weights ``w_p`` on binary digits ``p`` (digit ``p`` is read by ``r_{p-1}``)."""

    n: int
    tail: int
    digits: np.ndarray
    weights: np.ndarray

    def __call__(self, x):
        xa = _check_unit(x)
        out = np.zeros(xa.shape)
        for p, w in zip(self.digits, self.weights):
            out = out + w * (1 - 2 * _digit(int(p) - 1, xa))
        return out if out.ndim else float(out)

    def sum_of_squares(self) -> float:
        return float(math.fsum(self.weights**2))


def bernoulli_expansion_weights(n: int, tail: int = 64) -> RademacherExpansion:
    """Expansion of ``sum_{k=1}^n bernoulli1(2**k x)`` in Rademacher functions.

    ``w_p = -(1/2 - 2**-p)`` for ``2 <= p <= n+1`` and
    ``w_p = -(2**(n-p) - 2**-p)`` for ``n+2 <= p <= n+1+tail``.
    Truncation costs at most ``2**-tail`` pointwise.
    """
    if tail < 1:
        raise DomainError("tail must be at least 1")
    if n == 0:
        return RademacherExpansion(0, tail, np.zeros(0, dtype=np.int64), np.zeros(0))
    p = np.arange(2, n + 2 + tail, dtype=np.int64)
    head = p <= n + 1
    w = np.empty(p.size)
    w[head] = -(0.5 - np.ldexp(1.0, -p[head]))
    w[~head] = -(np.ldexp(1.0, n - p[~head]) - np.ldexp(1.0, -p[~head]))
    return RademacherExpansion(n, tail, p, w)


def bernoulli_weight_fractions(n: int, tail: int) -> list[Fraction]:
    """The same weights as exact rationals."""
    out = []
    for p in range(2, n + 2 + tail):
        if p <= n + 1:
            out.append(-(Fraction(1, 2) - Fraction(1, 2**p)))
        else:
            out.append(-(Fraction(1, 2 ** (p - n)) - Fraction(1, 2**p)))
    return out


def bernoulli_variance(n: int) -> float:
    """``n/4 - 1/3 + 1/(3 * 2**n)``: variance of the geometric Bernoulli sum."""
    return n / 4 - 1 / 3 + math.ldexp(1 / 3, -n)


# ---------------------------------------------------------------------------
# Step approximation
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class StepApproximation:
    """Piecewise-constant approximation on ``b`` equal cells."""

    b: int
    values: np.ndarray
    error_bound: float

    def __call__(self, x):
        xa = np.asarray(x, dtype=float)
        frac = xa - np.floor(xa)
        idx = np.minimum(np.floor(frac * self.b).astype(np.int64), self.b - 1)
        out = self.values[idx]
        return out if out.ndim else float(out)


def step_approximation(f: PeriodicFunction, b: int, sample_rule: str = "midpoint") -> StepApproximation:
    """Sample ``f`` once per cell ``[j/b, (j+1)/b)``.

    ``sample_rule`` is ``midpoint`` or ``left``.  The reported bound is
    ``h * b**(-alpha)``; for ``f`` with jumps at integers the bound holds away
    from the jump, which is where the Hölder data are meant to apply.
    """
    if int(b) != b or b < 2:
        raise DomainError("b must be an integer >= 2")
    b = int(b)
    j = np.arange(b, dtype=float)
    if sample_rule == "midpoint":
        nodes = (j + 0.5) / b
    elif sample_rule == "left":
        nodes = j / b
    else:
        raise DomainError(f"unknown sample rule {sample_rule!r}")
    vals = np.asarray(f(nodes), dtype=float) * np.ones(b)
    return StepApproximation(b, vals, f.h * b ** (-f.alpha))
