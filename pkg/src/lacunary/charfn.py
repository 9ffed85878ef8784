"""Characteristic and moment generating functions, mod-Gaussian residuals.

Three evaluation paths are available for ``E[exp(i lam S)]`` under Lebesgue
measure on ``[0, 1)``:

* exact cell summation for :class:`~lacunary.series.DyadicStepFunction`;
* a transfer-operator recursion for cosine sums along integer geometric
  frequencies ``c, cB, cB**2, ...`` (exact up to rounding, for any size of
  the top frequency);
* a periodic trapezoid rule with node doubling for everything else.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, DomainError, PreconditionError, SizeError
from .series import (
    CoefficientTriangle,
    DyadicStepFunction,
    LacunarySequence,
    TrigSum,
    bernoulli_expansion_weights,
)

NONVANISHING_FLOOR = 1e-6


@dataclass(frozen=True, eq=False)
class ComplexGridFunction:
    """Sampled values of a characteristic or moment generating function."""

    grid: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        g = np.asarray(self.grid)
        v = np.asarray(self.values, dtype=complex)
        if g.shape != v.shape or g.ndim != 1:
            raise DomainError("grid and values must be 1-d arrays of equal length")
        if not np.iscomplexobj(g) and g.size > 1 and np.any(np.diff(g) <= 0):
            raise DomainError("real grids must be strictly increasing")
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "values", v)

    @property
    def t_n(self):
        return self.meta.get("t_n")

    def __len__(self):
        return self.grid.size


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------


def _transfer_charfn(lam: np.ndarray, coeffs: np.ndarray, base: int, width: int = 64) -> np.ndarray:
    """``int_0^1 prod_k exp(i lam a_k cos(2 pi B**(k-1) y)) dy``.

    Uses the recursion ``rho_1 = h_1``, ``rho_j = h_j * L rho_{j-1}`` where
    ``L`` is the transfer operator of ``y -> B y mod 1``; on Fourier
    coefficients ``(L g)^(p) = g^(B p)``.  Products are taken on a grid of
    ``width`` points, ``L`` is applied on the FFT.  Coefficients above the grid
    Nyquist frequency are dropped; they are of size ``(lam a)**(width/2)/(width/2)!``.
    """
    lam = np.asarray(lam, dtype=float)[:, None]
    y = np.arange(width) / width
    c = np.cos(2 * np.pi * y)[None, :]
    freqs = np.fft.fftfreq(width, 1.0 / width).astype(np.int64)
    src = base * freqs
    keep = np.abs(src) < width // 2
    src_idx = np.mod(src, width)
    rho = np.exp(1j * lam * coeffs[0] * c)
    for a in coeffs[1:]:
        R = np.fft.fft(rho, axis=1)
        LR = np.zeros_like(R)
        LR[:, keep] = R[:, src_idx[keep]]
        rho = np.fft.ifft(LR, axis=1) * np.exp(1j * lam * a * c)
    return rho.mean(axis=1)


def _transfer_width(lam_max: float, a_max: float) -> int:
    # the integrand's Fourier tail decays like (x/2)^p/p! with x = lam*a;
    # pick the grid so that p = width/2 is far into the tail
    x = abs(lam_max * a_max)
    p = 16
    while p * math.log(p / (math.e * max(x, 1e-300) / 2)) < 45 and p < 1 << 14:
        p *= 2
    return max(64, 2 * p)


def _trapezoid(S: Callable, lam: np.ndarray, tol: float, start: int, max_nodes: int) -> np.ndarray:
    N = start
    prev = None
    while True:
        x = np.arange(N) / N
        s = np.asarray(S(x), dtype=float)
        cur = np.exp(1j * np.outer(lam, s)).mean(axis=1)
        if prev is not None and np.max(np.abs(cur - prev)) < tol:
            return cur
        if 2 * N > max_nodes:
            raise ConvergenceError(
                f"trapezoid rule did not reach tol={tol} with {N} nodes", previous=prev, last=cur
            )
        prev = cur
        N *= 2


def char_fn_quadrature(S, lam, tol: float = 1e-12, max_nodes: int = 1 << 22):
    """``int_0^1 exp(i lam S(x)) dx``.

    Parameters
    ----------
    S : DyadicStepFunction, TrigSum or callable
        Step functions are summed exactly over their cells.  Cosine sums
        along integer geometric frequencies go through the transfer operator.
        Anything else is integrated by the trapezoid rule with node doubling,
        starting from ``64 * (1 + bit_length(max_frequency))`` nodes.
    lam : float or array_like
    tol : float
        Target absolute error for the trapezoid path.

    Returns
    -------
    complex or ndarray of complex
    """
    if tol <= 0:
        raise DomainError("tol must be positive")
    lam_arr = np.atleast_1d(np.asarray(lam, dtype=float))
    scalar = np.ndim(lam) == 0
    if isinstance(S, DyadicStepFunction):
        law = S.law()
        vals = np.array(list(law.keys()))
        mass = np.array([float(m) for m in law.values()])
        out = np.exp(1j * np.outer(lam_arr, vals)) @ mass
    elif isinstance(S, TrigSum) and S.geometric_base() is not None:
        _, base = S.geometric_base()
        coeffs = np.asarray(S.coefficients, dtype=float)
        width = _transfer_width(float(np.max(np.abs(lam_arr))), float(np.max(np.abs(coeffs))))
        out = _transfer_charfn(lam_arr, coeffs, base, width)
    else:
        mf = getattr(S, "max_frequency", 1)
        mf = mf if isinstance(mf, int) else int(math.ceil(mf))
        start = 64 * (1 + mf.bit_length())
        out = _trapezoid(S, lam_arr, tol, start, max_nodes)
    out[lam_arr == 0] = 1.0
    return complex(out[0]) if scalar else out


def char_fn_grid(S, lam, tol: float = 1e-12, **meta) -> ComplexGridFunction:
    """:func:`char_fn_quadrature` on a grid, wrapped with metadata."""
    lam = np.asarray(lam, dtype=float)
    return ComplexGridFunction(lam, char_fn_quadrature(S, lam, tol), dict(meta))


# ---------------------------------------------------------------------------
# Exact product formulas
# ---------------------------------------------------------------------------


def _clog1p(u: np.ndarray) -> np.ndarray:
    # numpy's complex log1p loses the small-|u| accuracy of the real one
    x, y = u.real, u.imag
    return 0.5 * np.log1p(2 * x + x * x + y * y) + 1j * np.arctan2(y, 1 + x)


def _log_cosh(w: np.ndarray) -> np.ndarray:
    # log cosh w = log1p(2 sinh(w/2)**2), accurate near w = 0; the branch of
    # each term does not matter once the sum is exponentiated
    return _clog1p(2 * np.sinh(w / 2) ** 2)


def _cosh_product(z: np.ndarray, a: np.ndarray, chunk: int = 4096) -> np.ndarray:
    """``prod_k cosh(z a_k)`` summed in log space.

    A direct product of ``n`` factors carries ``n`` roundings; summing
    logarithms keeps the relative error near machine precision, which
    matters when the result is later multiplied by ``exp(t z**2 / 2)``.
    """
    z = z.astype(complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        if a.size and np.all(a == a[0]):
            return np.exp(a.size * _log_cosh(z * a[0]))
        total = np.zeros(z.shape, dtype=complex)
        for i in range(0, a.size, chunk):
            total += np.sum(_log_cosh(np.multiply.outer(z, a[i : i + chunk])), axis=-1)
    return np.exp(total)


def mgf_walsh_exact(coeffs: CoefficientTriangle, n: int, z, *, seq: LacunarySequence | None = None):
    """``prod_k cosh(z a_{k,n})``, the MGF of a Walsh sum with gap ratio >= 2.

    The product form relies on the Walsh terms being independent, which is
    guaranteed when ``m_{k+1} >= 2 m_k``.  ``seq`` must certify that.
    """
    if seq is None or not seq.certifies(2):
        raise PreconditionError("product formula needs a sequence certified with q >= 2")
    if n > len(seq):
        raise SizeError(f"sequence has {len(seq)} terms, requested {n}")
    za = np.asarray(z, dtype=complex)
    out = _cosh_product(np.atleast_1d(za), coeffs.row(n))
    return complex(out[0]) if za.ndim == 0 else out.reshape(za.shape)


def mgf_bernoulli_exact(n: int, z, tail: int = 64):
    """MGF of ``sum_{k=1}^n bernoulli1(2**k x)`` via its Rademacher expansion."""
    if tail < 40:
        raise DomainError("tail must be at least 40")
    za = np.asarray(z, dtype=complex)
    w = bernoulli_expansion_weights(n, tail).weights
    out = _cosh_product(np.atleast_1d(za), w)
    return complex(out[0]) if za.ndim == 0 else out.reshape(za.shape)


def log_mgf_sign_sum(a: np.ndarray, z: np.ndarray) -> np.ndarray:
    """``sum_k log cosh(z a_k)`` for real ``z``, computed stably."""
    x = np.abs(np.multiply.outer(np.asarray(z, dtype=float), a))
    # log cosh x = x + log1p(exp(-2x)) - log 2
    return np.sum(x + np.log1p(np.exp(-2 * x)) - math.log(2), axis=-1)


# ---------------------------------------------------------------------------
# Residuals and limiting functions
# ---------------------------------------------------------------------------


def mod_gaussian_residual(phi: ComplexGridFunction, t_n: float) -> ComplexGridFunction:
    """Pointwise ``phi(z) exp(-t_n z**2 / 2)``."""
    if t_n <= 0:
        raise DomainError("t_n must be positive")
    z = np.asarray(phi.grid, dtype=complex)
    meta = dict(phi.meta)
    meta["t_n"] = t_n
    return ComplexGridFunction(phi.grid, phi.values * np.exp(-t_n * z**2 / 2), meta)


def limiting_function(kind: str, z, kappa4: float = 1.0):
    """Limiting function ``psi``.

    ``walsh``: ``exp(-kappa4 z**4 / 12)``; ``bernoulli``: ``exp(-z**4 / 192)``;
    ``trivial``: ``1``.
    """
    za = np.asarray(z, dtype=complex)
    if kind == "walsh":
        if kappa4 < 0:
            raise DomainError("kappa4 must be nonnegative")
        out = np.exp(-kappa4 * za**4 / 12)
    elif kind == "bernoulli":
        out = np.exp(-(za**4) / 192)
    elif kind == "trivial":
        out = np.ones(za.shape, dtype=complex)
    else:
        raise DomainError(f"unknown limiting function {kind!r}")
    return complex(out) if za.ndim == 0 else out


def check_nonvanishing(kind: str, kappa4: float = 1.0, half_width: float = 2.0, points: int = 81) -> float:
    """Minimum of ``|psi|`` over the square window ``|Re z|, |Im z| <= half_width``.

    Raises :class:`DomainError` when the minimum drops below ``1e-6``.
    """
    s = np.linspace(-half_width, half_width, points)
    Z = s[:, None] + 1j * s[None, :]
    m = float(np.min(np.abs(limiting_function(kind, Z, kappa4))))
    if m < NONVANISHING_FLOOR:
        raise DomainError(f"limiting function nearly vanishes on the window (min |psi| = {m:.3g})")
    return m


def residual_rows(phi: ComplexGridFunction, t_n: float, psi: Callable) -> list[dict]:
    """Per-point rows for plotting: grid, phi, residual, target and error."""
    res = mod_gaussian_residual(phi, t_n)
    z = np.asarray(phi.grid, dtype=complex)
    target = np.asarray(psi(z), dtype=complex) * np.ones(z.shape)
    rows = []
    for zi, ph, r, tg in zip(z, phi.values, res.values, target):
        rows.append(
            {
                "n": phi.meta.get("n"),
                "t_n": t_n,
                "z_re": zi.real,
                "z_im": zi.imag,
                "phi_re": ph.real,
                "phi_im": ph.imag,
                "residual_re": r.real,
                "residual_im": r.imag,
                "target_psi_re": tg.real,
                "target_psi_im": tg.imag,
                "abs_error": abs(r - tg),
            }
        )
    return rows


# ---------------------------------------------------------------------------
# Zone of control
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ZoneOfControlReport:
    """Fitted constants for ``|phi_n(i lam) exp(t_n lam**2/2) - 1| <= K1 |lam|**v exp(K2 |lam|**w)``."""

    v: float
    w: float
    gamma: float
    D: float
    K1: float
    K2: float
    n_list: tuple
    K1_per_n: tuple
    z1_holds: bool
    growth_ok: bool
    offending: tuple | None = None

    @property
    def gamma_ok(self) -> bool:
        if self.w < 2:
            return False
        upper = math.inf if self.w == 2 else 1.0 / (self.w - 2)
        return -0.5 <= self.gamma <= upper

    @property
    def D_limit(self) -> float:
        """Largest radius coefficient allowed by the exponent condition."""
        if self.K2 <= 0:
            return math.inf
        base = 1.0 / (4.0 * self.K2)
        if self.w == 2:
            return math.inf if base > 1 else (1.0 if base == 1 else 0.0)
        return base ** (1.0 / (self.w - 2))

    @property
    def z2_holds(self) -> bool:
        return self.gamma_ok and self.D <= self.D_limit

    @property
    def verdict(self) -> bool:
        return self.z1_holds and self.growth_ok and self.z2_holds

    def to_dict(self) -> dict:
        return {
            "v": self.v,
            "w": self.w,
            "gamma": self.gamma,
            "D": self.D,
            "K1": self.K1,
            "K2": self.K2,
            "n_list": list(self.n_list),
            "K1_per_n": list(self.K1_per_n),
            "z1": self.z1_holds,
            "z2": self.z2_holds,
            "growth_ok": self.growth_ok,
            "offending": list(self.offending) if self.offending else None,
            "verdict": self.verdict,
        }


def _values_of(result) -> np.ndarray:
    if isinstance(result, ComplexGridFunction):
        return result.values
    return np.asarray(result, dtype=complex)


def _zone_residual(phi_builder, n, t, lam) -> np.ndarray:
    phi = _values_of(phi_builder(n, lam))
    # combine in log space so an underflowing phi and an overflowing Gaussian
    # factor do not meet as 0 * inf
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        R = np.abs(np.expm1(np.log(phi) + t * lam**2 / 2))
    R[phi == 0] = np.inf
    return R


def zone_of_control_check(
    phi_builder: Callable,
    t_n: Callable[[int], float],
    v: float,
    w: float,
    gamma: float,
    D: float,
    n_list: Sequence[int],
    points: int = 256,
    growth_factor: float = 2.0,
) -> ZoneOfControlReport:
    """Fit and verify zone-of-control constants.

    ``phi_builder(n, lam)`` returns ``E[exp(i lam X_n)]`` on an array of real
    ``lam`` (either an array or a :class:`ComplexGridFunction`).  For each
    ``n`` a geometric grid of ``points`` values in ``(0, D t_n**gamma]`` is used;
    ``|R(-lam)| = |R(lam)|`` by conjugate symmetry.

    ``K2`` comes from a least-squares fit of ``log|R| - v log lam`` against
    ``lam**w`` (clipped at 0); ``K1`` is then the smallest constant making the
    bound hold on a grid four times denser, jointly over ``n_list``.  The
    residual counts as growing without bound when the per-``n`` constant
    increases monotonically along ``n_list`` by more than ``growth_factor``.
    """
    if w < 2:
        raise DomainError("w must be at least 2")
    n_list = tuple(int(n) for n in n_list)
    xs, ys = [], []
    for n in n_list:
        t = t_n(n)
        zmax = D * t**gamma
        lam = np.geomspace(zmax * 1e-3, zmax, points)
        R = _zone_residual(phi_builder, n, t, lam)
        ok = np.isfinite(R) & (R > 1e-13)
        xs.append(lam[ok] ** w)
        ys.append(np.log(R[ok]) - v * np.log(lam[ok]))
    x = np.concatenate(xs)
    y = np.concatenate(ys)
    if x.size >= 2 and np.ptp(x) > 0:
        K2 = max(float(np.polyfit(x, y, 1)[0]), 0.0)
    else:
        K2 = 0.0

    K1_per_n = []
    argmax = []
    offending = None
    for n in n_list:
        t = t_n(n)
        zmax = D * t**gamma
        lam = np.geomspace(zmax * 1e-3, zmax, 4 * points)
        R = _zone_residual(phi_builder, n, t, lam)
        if not np.all(np.isfinite(R)):
            bad = int(np.argmax(~np.isfinite(R)))
            offending = offending or (n, float(lam[bad]))
            K1_per_n.append(math.inf)
            argmax.append(float(lam[bad]))
            continue
        ratio = R / (lam**v * np.exp(K2 * lam**w))
        j = int(np.argmax(ratio))
        K1_per_n.append(float(ratio[j]))
        argmax.append(float(lam[j]))
    finite = offending is None
    K1 = max(K1_per_n) if K1_per_n else 0.0
    growth_ok = True
    if finite and len(K1_per_n) >= 2 and K1_per_n[0] > 0:
        increasing = all(b > a for a, b in zip(K1_per_n, K1_per_n[1:]))
        if increasing and K1_per_n[-1] > growth_factor * K1_per_n[0]:
            growth_ok = False
            offending = (n_list[-1], argmax[-1])
    return ZoneOfControlReport(
        v=v,
        w=w,
        gamma=gamma,
        D=D,
        K1=K1,
        K2=K2,
        n_list=n_list,
        K1_per_n=tuple(K1_per_n),
        z1_holds=finite,
        growth_ok=growth_ok,
        offending=offending,
    )


# ---------------------------------------------------------------------------
# L1 check
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class L1CheckResult:
    n_list: tuple
    errors: tuple

    @property
    def decreasing(self) -> bool:
        e = self.errors
        return all(b < a for a, b in zip(e, e[1:]))


def weak_modgauss_l1_check(
    phi_builder: Callable,
    A_n: Callable[[int], float],
    K: float,
    n_list: Sequence[int],
    nodes: int = 200,
) -> L1CheckResult:
    """``int_{-K A_n}^{K A_n} |phi_n(lam / A_n) - exp(-lam**2/2)| dlam`` per ``n``.

    ``phi_builder(n, t)`` returns ``E[exp(i t S_n)]`` on an array ``t``.
    Gauss-Legendre on ``[0, K A_n]`` with ``nodes`` points, doubled by the
    conjugate symmetry of characteristic functions.
    """
    if K <= 0:
        raise DomainError("K must be positive")
    g, wts = np.polynomial.legendre.leggauss(nodes)
    errors = []
    for n in n_list:
        A = A_n(n)
        half = K * A / 2
        lam = half * (g + 1)
        phi = _values_of(phi_builder(n, lam / A))
        err = np.abs(phi - np.exp(-(lam**2) / 2))
        errors.append(float(2 * half * np.dot(wts, err)))
    return L1CheckResult(tuple(int(n) for n in n_list), tuple(errors))
