"""Dyadic martingale decomposition of periodic functions.

For ``f`` on ``[0, 1)`` let ``f_r`` be its average over the dyadic cells of
length ``2**-r``, ``phi_r = f - f_r`` the remainder and ``Delta_r = f_r - f_{r-1}``
the martingale increments.  The module computes these objects, the
quadratic inequality used in the central limit theorem for ``f(2**k x)``
and the variance-per-term sequence of those sums.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, DomainError, PrecisionError
from .series import DyadicStepFunction, PeriodicFunction

_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gauss(nodes: int) -> tuple[np.ndarray, np.ndarray]:
    if nodes not in _GL_CACHE:
        x, w = np.polynomial.legendre.leggauss(nodes)
        _GL_CACHE[nodes] = ((x + 1) / 2, w / 2)
    return _GL_CACHE[nodes]


def _cell_averages(f: Callable, r: int, start: int, stop: int, nodes: int) -> np.ndarray:
    """Gauss-Legendre averages of ``f`` over cells ``start..stop-1`` at resolution ``r``."""
    x, w = _gauss(nodes)
    h = math.ldexp(1.0, -r)
    left = np.arange(start, stop, dtype=float) * h
    pts = left[:, None] + h * x[None, :]
    return np.asarray(f(pts), dtype=float) @ w


def _gl_integral(g: Callable, resolution: int, nodes: int = 8, chunk: int = 1 << 16) -> float:
    """``int_0^1 g`` by Gauss-Legendre on every cell of the given resolution."""
    total = 0.0
    ncell = 1 << resolution
    h = math.ldexp(1.0, -resolution)
    for s in range(0, ncell, chunk):
        total += h * float(np.sum(_cell_averages(g, resolution, s, min(s + chunk, ncell), nodes)))
    return total


def dyadic_condexp(f, r: int, rtol: float = 1e-10, max_split: int = 8, chunk: int = 1 << 16) -> DyadicStepFunction:
    """``E[f | D_r]`` as a step function on ``2**r`` cells.

    Step-function inputs are averaged exactly.  Callables are integrated with
    8- and 16-point Gauss-Legendre per cell; cells where the two disagree by
    more than ``rtol * max(1, |average|)`` are split into subcells, up to
    ``max_split`` extra binary levels.
    """
    if r < 0 or r > 30:
        raise DomainError("resolution must lie in 0..30")
    if isinstance(f, DyadicStepFunction):
        return f.coarsen(r) if r <= f.resolution else f.refine(r)
    ncell = 1 << r
    out = np.empty(ncell)
    for s in range(0, ncell, chunk):
        e = min(s + chunk, ncell)
        for split in range(max_split + 1):
            lo = _cell_averages(f, r + split, s << split, e << split, 8)
            hi = _cell_averages(f, r + split, s << split, e << split, 16)
            if split:
                lo = lo.reshape(-1, 1 << split).mean(axis=1)
                hi = hi.reshape(-1, 1 << split).mean(axis=1)
            if np.all(np.abs(hi - lo) <= rtol * np.maximum(1.0, np.abs(hi))):
                out[s:e] = hi
                break
        else:
            raise ConvergenceError(f"cell averages did not converge at resolution {r}", previous=lo, last=hi)
    return DyadicStepFunction(r, out)


def norm_series_tail(C: float, beta: float, r: int) -> float:
    """``sum_{s > r} C 2**(-s beta) = C 2**(-(r+1) beta) / (1 - 2**-beta)``."""
    if beta <= 0:
        raise DomainError("beta must be positive")
    return C * 2.0 ** (-(r + 1) * beta) / (1 - 2.0**-beta)


@dataclass(frozen=True, eq=False)
class DyadicDecomposition:
    """Martingale decomposition of ``f`` up to depth ``R``.

    ``levels[r]`` holds ``f_r`` for ``r <= keep``; ``increment_energy[k]`` is
    ``E[Delta_k**2]`` for ``k = 1..R`` (index 0 unused); ``phi_norms[r]`` is
    ``||phi_r||_2`` for ``r = 0..R``.
    """

    f: Callable
    depth: int
    keep: int
    levels: dict
    increment_energy: np.ndarray
    phi_norms: np.ndarray
    residual_energy: float
    mean: float
    norm2: float

    def level(self, r: int) -> DyadicStepFunction:
        if r in self.levels:
            return self.levels[r]
        return dyadic_condexp(self.f, r)

    def increment(self, r: int) -> DyadicStepFunction:
        """``Delta_r = f_r - f_{r-1}`` on ``2**r`` cells."""
        if r < 1:
            raise DomainError("increments start at r = 1")
        fine = self.level(r).values
        coarse = np.repeat(self.level(r - 1).values, 2)
        return DyadicStepFunction(r, fine - coarse)

    def phi(self, r: int) -> Callable:
        fr = self.level(r)

        def remainder(x):
            xa = np.asarray(x, dtype=float)
            frac = xa - np.floor(xa)
            return np.asarray(self.f(frac)) - fr(np.minimum(frac, np.nextafter(1.0, 0.0)))

        return remainder

    def norm_series(self, r: int) -> float:
        """``sum_{s=r+1}^{R} ||phi_s||_2``."""
        return float(np.sum(self.phi_norms[r + 1 : self.depth + 1]))


def build_decomposition(f: Callable, depth: int = 24, keep: int = 12, nodes: int = 16) -> DyadicDecomposition:
    """Compute ``f_r``, increment energies and remainder norms up to ``depth``.

    Only cell averages at the finest level are integrated; coarser levels
    follow by pairwise averaging, and the increment energy at level ``k`` is
    accumulated from pair differences, ``E[Delta_k**2] = 2**-k sum (a - b)**2 / 2``,
    which avoids cancellation between nearly equal norms.
    """
    if keep > depth:
        keep = depth
    fine_per_kept = 1 << (depth - keep)
    chunk = max(fine_per_kept, 1 << 16)
    ncell = 1 << depth
    energy = np.zeros(depth + 1)
    kept_top = np.empty(1 << keep)
    resid = 0.0
    x, w = _gauss(nodes)
    h = math.ldexp(1.0, -depth)
    for s in range(0, ncell, chunk):
        e = min(s + chunk, ncell)
        left = np.arange(s, e, dtype=float) * h
        vals = np.asarray(f(left[:, None] + h * x[None, :]), dtype=float)
        avg = vals @ w
        resid += h * float(np.sum(((vals - avg[:, None]) ** 2) @ w))
        a = avg
        for k in range(depth, keep, -1):
            d = a[0::2] - a[1::2]
            energy[k] += math.ldexp(float(np.dot(d, d)) / 2, -k)
            a = 0.5 * (a[0::2] + a[1::2])
        kept_top[s // fine_per_kept : e // fine_per_kept] = a
    levels = {keep: DyadicStepFunction(keep, kept_top)}
    a = kept_top
    for k in range(keep, 0, -1):
        d = a[0::2] - a[1::2]
        energy[k] += math.ldexp(float(np.dot(d, d)) / 2, -k)
        a = 0.5 * (a[0::2] + a[1::2])
        levels[k - 1] = DyadicStepFunction(k - 1, a)
    mean = float(a[0])
    phi2 = np.empty(depth + 1)
    phi2[depth] = resid
    for r in range(depth - 1, -1, -1):
        phi2[r] = phi2[r + 1] + energy[r + 1]
    norm2 = mean * mean + phi2[0]
    return DyadicDecomposition(
        f=f, depth=depth, keep=keep, levels=levels, increment_energy=energy,
        phi_norms=np.sqrt(phi2), residual_energy=resid, mean=mean, norm2=norm2,
    )


@dataclass(frozen=True)
class InequalityCheck:
    """Both sides of ``(1/n)||sum_{k<n} phi_r(2**k x)||**2 <= rhs``."""

    r: int
    n: int
    lhs: float
    rhs: float
    tail_bound: float
    phi_norm: float
    series: float

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs

    def to_dict(self) -> dict:
        return {
            "r": self.r, "n": self.n, "lhs": self.lhs, "rhs": self.rhs,
            "margin": self.margin, "tail_bound": self.tail_bound, "holds": self.holds,
        }


def _lag_correlation(g: Callable, d: int, base_resolution: int, nodes: int = 8) -> float:
    """``int_0^1 g(x) g(2**d x) dx`` with cells fine enough for both factors."""

    def integrand(x):
        y = np.ldexp(x, d)
        return g(x) * g(y - np.floor(y))

    return _gl_integral(integrand, base_resolution + d, nodes)


def quadratic_sum_direct(g: Callable, n: int, resolution: int, nodes: int = 8) -> float:
    """``(1/n) int_0^1 (sum_{k<n} g(2**k x))**2 dx`` by direct quadrature."""

    def integrand(x):
        s = np.zeros(np.shape(x))
        for k in range(n):
            y = np.ldexp(x, k)
            s = s + g(y - np.floor(y))
        return s * s

    return _gl_integral(integrand, resolution, nodes) / n


def martingale_inequality_check(
    f: PeriodicFunction,
    r: int,
    n: int,
    depth: int = 24,
    decomposition: DyadicDecomposition | None = None,
    direct: bool = False,
) -> InequalityCheck:
    """Evaluate both sides of the quadratic inequality for ``phi_r``.

    The left side uses stationarity of ``x -> 2x``:
    ``||phi_r||**2 + (2/n) sum_{d=1}^{n-1} (n-d) int phi_r(x) phi_r(2**d x) dx``,
    each correlation integrated on cells of resolution ``r + d`` where both
    factors are smooth.  ``direct=True`` instead integrates the square of the
    sum on cells of resolution ``r + n + 4``.  The norm series on the right is
    truncated at ``depth`` and completed with :func:`norm_series_tail`.
    """
    if n < 1 or r < 0:
        raise DomainError("need n >= 1 and r >= 0")
    if decomposition is not None:
        depth = decomposition.depth
    if r >= depth:
        raise DomainError("r must be below the decomposition depth")
    dec = decomposition or build_decomposition(f, depth=depth, keep=min(depth, max(12, r)))
    phi_r = dec.phi(r)
    pn = float(dec.phi_norms[r])
    if direct:
        lhs = quadratic_sum_direct(phi_r, n, r + n + 4)
    else:
        lhs = pn * pn
        for d in range(1, n):
            lhs += 2.0 * (n - d) / n * _lag_correlation(phi_r, d, r)
    tail = norm_series_tail(f.C, f.alpha, dec.depth)
    series = dec.norm_series(r)
    if pn > 0 and tail > series:
        raise PrecisionError(f"truncation bound {tail:.3g} exceeds the measured series {series:.3g}")
    rhs = pn * pn + 2 * pn * (series + tail)
    return InequalityCheck(r=r, n=n, lhs=lhs, rhs=rhs, tail_bound=tail, phi_norm=pn, series=series)


@dataclass(frozen=True)
class SigmaEstimate:
    """Variance-per-term values ``(1/n)||sum_{k<n} f(2**k x)||**2``."""

    n_list: tuple
    values: tuple
    limit: float
    truncation: float
    degenerate: bool
    correlations: tuple = field(default=())


def sigma_estimate(
    f: Callable,
    n_list: Sequence[int],
    correlation: Callable[[int], float] | None = None,
    max_lag: int = 16,
    resolution: int = 8,
    decay: tuple[float, float] | None = None,
) -> SigmaEstimate:
    """Variance per term of ``sum_{k<n} f(2**k x)`` for each ``n``.

    Uses ``||f||**2 + (2/n) sum_{d=1}^{n-1} (n - d) c_d`` with
    ``c_d = int f(x) f(2**d x) dx``.  When ``correlation`` (a closed form
    for ``c_d``) is supplied it is used for every lag; otherwise ``c_d`` is
    integrated numerically for ``d <= max_lag`` and dropped beyond, with the
    bound ``|c_d| <= ||f|| C 2**(-d beta)`` reported as ``truncation`` when
    ``decay = (C, beta)`` is given.

    The limit is the intercept of a fit of the values against ``1/n`` over
    the last entries; it is flagged degenerate when it vanishes relative to
    the values themselves.
    """
    n_list = tuple(int(n) for n in n_list)
    if not n_list or min(n_list) < 1:
        raise DomainError("n_list must contain positive sizes")
    mean = _gl_integral(lambda x: f(x), resolution + 3)
    if abs(mean) > 1e-10:
        raise DomainError(f"f must have mean zero (got {mean:.3g})")
    norm2 = _gl_integral(lambda x: np.asarray(f(x)) ** 2, resolution + 3)
    nmax = max(n_list)
    if correlation is not None:
        corr = [float(correlation(d)) for d in range(1, nmax)]
        truncation = 0.0
    else:
        lags = min(nmax - 1, max_lag)
        corr = [_lag_correlation(f, d, 3) for d in range(1, lags + 1)]
        corr += [0.0] * (nmax - 1 - lags)
        truncation = 0.0
        if decay is not None and nmax - 1 > max_lag:
            C, beta = decay
            truncation = 2 * math.sqrt(norm2) * norm_series_tail(C, beta, max_lag)
    c = np.array(corr)
    values = []
    for n in n_list:
        d = np.arange(1, n)
        values.append(norm2 + 2.0 / n * float(np.dot(n - d, c[: n - 1])))
    tail = sorted(zip(n_list, values))[-min(len(n_list), 4):]
    if len(tail) >= 2:
        inv = np.array([1.0 / t[0] for t in tail])
        v = np.array([t[1] for t in tail])
        limit = float(np.polyfit(inv, v, 1)[1])
    else:
        limit = values[-1]
    scale = max(abs(v) for v in values)
    degenerate = abs(limit) <= 1e-8 * max(scale, 1e-300)
    return SigmaEstimate(n_list, tuple(values), limit, truncation, degenerate, tuple(corr))


def bernoulli1_correlation(d: int) -> float:
    """``int bernoulli1(x) bernoulli1(2**d x) dx = 2**-d / 12``."""
    return math.ldexp(1 / 12, -d)


def fourier_correlation(modes: Sequence[tuple[int, float, float]]) -> Callable[[int], float]:
    """Closed-form lag correlation of a finite Fourier series."""
    table = {int(m): (float(a), float(b)) for m, a, b in modes}

    def corr(d: int) -> float:
        s = 0.0
        for m, (a, b) in table.items():
            a2, b2 = table.get(m << d, (0.0, 0.0))
            s += (a * a2 + b * b2) / 2
        return s

    return corr


def decay_exponent(dec: DyadicDecomposition, r_min: int = 4, r_max: int | None = None) -> float:
    """Fitted ``beta`` in ``||phi_r|| ~ C 2**(-r beta)``."""
    r_max = dec.depth - 2 if r_max is None else r_max
    r = np.arange(r_min, r_max + 1)
    y = dec.phi_norms[r]
    ok = y > 0
    if ok.sum() < 2:
        return math.inf
    return float(-np.polyfit(r[ok], np.log2(y[ok]), 1)[0])
