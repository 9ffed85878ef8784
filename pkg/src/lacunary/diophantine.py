"""Exhaustive counting of signed and XOR Diophantine solutions.

Signed equations are ``e_1 m_{k_1} +- e_2 m_{k_2} +- ... +- e_l m_{k_l} = A``
with ``k_1 > k_2 > ... > k_l``, ``e_i in {1..r}`` and a fixed leading sign.
XOR equations replace the signed sum by carry-free binary addition.

Configurations are enumerated with numpy in int64 after an explicit
overflow check; solutions are bucketed by the value ``A`` and by a class
describing how many coefficients exceed one.
"""

from __future__ import annotations

import math
from collections.abc import Iterable
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product

import numpy as np

from .errors import BudgetError, DomainError
from .series import LacunarySequence, _as_fraction

DEFAULT_BUDGET = 10**9
_INT64_SAFE = 1 << 62


def _log_q(x: float, q: float) -> float:
    return math.log(x) / math.log(q)


def bound_lemma31(l: int, p: int, q, n: int, r: int) -> float:
    """``(8 n log_q(r l) log_q(2 r**2 l q / (q-1)**2))**((l+p)/3)`` for ``1 < q <= 2``."""
    qf = float(q)
    if not 1 < _as_fraction(q) <= 2:
        raise DomainError("q must lie in (1, 2]")
    if l < 2 or not 0 <= p <= l or r < 1:
        raise DomainError("need l >= 2, 0 <= p <= l, r >= 1")
    base = 8 * n * _log_q(r * l, qf) * _log_q(2 * r * r * l * qf / (qf - 1) ** 2, qf)
    return base ** ((l + p) / 3)


def bound_lemma32(l: int, p2: int, p3: int, q, n: int, r: int, variant: str = "statement") -> float:
    """Bound for ``q > 2`` with exponent ``l/4 + p2/4 + p3/2``.

    ``variant='statement'`` uses the logarithms
    ``log_q(2lr) log_q(qlr/(q-2)) log_q(4 l**2 q**2 r**3/(q-2))``;
    ``variant='proof'`` uses
    ``log_q(2lrq/(q-2)) log_q(qlr) log_q(4 l**2 q**2 r**2/(q-2))``.
    """
    qf = float(q)
    if not _as_fraction(q) > 2:
        raise DomainError("q must exceed 2")
    if l < 1 or p2 < 0 or p3 < 0 or p2 + p3 > l or r < 1:
        raise DomainError("need l >= 1, p2, p3 >= 0, p2 + p3 <= l, r >= 1")
    if variant == "statement":
        logs = (
            _log_q(2 * l * r, qf)
            * _log_q(qf * l * r / (qf - 2), qf)
            * _log_q(4 * l * l * qf * qf * r**3 / (qf - 2), qf)
        )
    elif variant == "proof":
        logs = (
            _log_q(2 * l * r * qf / (qf - 2), qf)
            * _log_q(qf * l * r, qf)
            * _log_q(4 * l * l * qf * qf * r**2 / (qf - 2), qf)
        )
    else:
        raise DomainError(f"unknown variant {variant!r}")
    return (20 * n * logs) ** (l / 4 + p2 / 4 + p3 / 2)


def xor_gamma(q) -> int:
    """Integer ``gamma >= 1`` with ``1 + 2**-gamma <= q < 1 + 2**-(gamma-1)``."""
    qf = _as_fraction(q)
    if not 1 < qf < 2:
        raise DomainError("q must lie in (1, 2)")
    g = 1
    while Fraction(1, 2**g) > qf - 1:
        g += 1
    return g


def bound_lemma42(l: int, q, n: int) -> float:
    """``(2 (gamma + 7) n log_q(2)**2)**(l/3)`` for ``1 < q < 2``."""
    g = xor_gamma(q)
    qf = float(q)
    return (2 * (g + 7) * n * _log_q(2, qf) ** 2) ** (l / 3)


@dataclass(frozen=True)
class SolutionCountReport:
    """Solution counts per value ``A`` for one equation class.

    ``klass`` is ``p`` (number of coefficients different from 1),
    ``(p2, p3)`` (coefficients equal to 2, coefficients at least 3), or
    ``None`` for XOR equations.  ``bound`` is ``None`` when no bound applies.
    For XOR counts ``zero_count`` holds the ``A = 0`` bucket, which is kept
    out of ``per_A``.
    """

    n: int
    l: int
    klass: object
    r: int
    per_A: dict
    bound: float | None
    mode: str = "signed"
    zero_count: int | None = None
    zero_must_vanish: bool = False
    bound_name: str | None = None
    q: float | None = None
    extra: dict = field(default_factory=dict)

    @property
    def max_count(self) -> int:
        return max(self.per_A.values(), default=0)

    @property
    def verdict(self) -> bool | None:
        """Recomputed on access; ``None`` when nothing is asserted."""
        checks = []
        if self.bound is not None:
            checks.append(self.max_count <= self.bound)
        if self.zero_must_vanish:
            checks.append(self.zero_count == 0)
        if not checks:
            return None
        return all(checks)

    def top_buckets(self, k: int = 10) -> list[tuple[int, int]]:
        items = sorted(self.per_A.items(), key=lambda t: (-t[1], t[0]))
        return items[:k]

    def count(self, A: int) -> int:
        if self.mode == "xor" and A == 0:
            return self.zero_count or 0
        return self.per_A.get(A, 0)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "l": self.l,
            "class": list(self.klass) if isinstance(self.klass, tuple) else self.klass,
            "r": self.r,
            "mode": self.mode,
            "max_count": self.max_count,
            "bound": self.bound,
            "bound_name": self.bound_name,
            "zero_count": self.zero_count,
            "verdict": self.verdict,
            "top_buckets": [list(t) for t in self.top_buckets()],
        }


def _terms(seq: LacunarySequence, n: int) -> np.ndarray:
    terms = seq.require_integral(n)
    return terms


def _index_tuples(n: int, l: int) -> np.ndarray:
    """Strictly decreasing index tuples, sorted by their leading index."""
    if l < 1 or l > n:
        raise DomainError("need 1 <= l <= n")
    idx = np.array(list(combinations(range(n - 1, -1, -1), l)), dtype=np.int64).reshape(-1, l)
    order = np.argsort(idx[:, 0], kind="stable")
    return idx[order]


def _coefficient_sign_table(l: int, r: int, leading_sign: int | None) -> tuple[np.ndarray, np.ndarray]:
    eps = np.array(list(product(range(1, r + 1), repeat=l)), dtype=np.int64).reshape(-1, l)
    if leading_sign is None:
        signs = np.array(list(product((1, -1), repeat=l)), dtype=np.int64).reshape(-1, l)
    else:
        rows = list(product((1, -1), repeat=l - 1))
        tail = np.array(rows, dtype=np.int64).reshape(len(rows), l - 1)
        signs = np.hstack([np.full((tail.shape[0], 1), leading_sign, dtype=np.int64), tail])
    E = (eps[:, None, :] * signs[None, :, :]).reshape(-1, l)
    E_eps = np.repeat(eps, signs.shape[0], axis=0)
    return E, E_eps


def _class_labels(E_eps: np.ndarray, grouping: str) -> list:
    if grouping == "p":
        return [int(v) for v in np.sum(E_eps != 1, axis=1)]
    return [(int(a), int(b)) for a, b in zip(np.sum(E_eps == 2, axis=1), np.sum(E_eps >= 3, axis=1))]


def _default_grouping(seq: LacunarySequence) -> str:
    return "p" if not seq.certifies(Fraction(2) + Fraction(1, 10**12)) else "p2p3"


def _signed_bound(seq, grouping, l, klass, n, r, variant):
    q = seq.q
    try:
        if grouping == "p" and 1 < _as_fraction(q) <= 2 and l >= 2:
            return bound_lemma31(l, klass, q, n, r), "lemma31"
        if grouping == "p2p3" and _as_fraction(q) > 2:
            return bound_lemma32(l, klass[0], klass[1], q, n, r, variant), f"lemma32-{variant}"
    except DomainError:
        pass
    return None, None


def count_signed_solutions(
    seq: LacunarySequence,
    n: int,
    l: int,
    r: int,
    budget: int = DEFAULT_BUDGET,
    grouping: str | None = None,
    leading_sign: int | None = 1,
    variant: str = "statement",
) -> dict:
    """Count solutions of the signed equation, bucketed by class and ``A``.

    Parameters
    ----------
    seq : LacunarySequence
        Integral frequencies; the first ``n`` terms are used.
    n, l, r : int
        Index range, equation length and largest coefficient.
    budget : int
        Maximum number of configurations ``C(n, l) r**l 2**(l-1)``.
    grouping : {'p', 'p2p3'}, optional
        Class labels.  Defaults to ``p`` for ``q <= 2`` and ``p2p3`` otherwise.
    leading_sign : {1, -1, None}
        Sign of the leading term; ``None`` lets it range over both signs.
    variant : str
        Which form of the ``q > 2`` bound to attach.

    Returns
    -------
    dict
        Class label -> :class:`SolutionCountReport`.
    """
    if r < 1:
        raise DomainError("r must be at least 1")
    grouping = grouping or _default_grouping(seq)
    if grouping not in ("p", "p2p3"):
        raise DomainError(f"unknown grouping {grouping!r}")
    terms = _terms(seq, n)
    n_signs = 2 ** (l if leading_sign is None else l - 1)
    configs = math.comb(n, l) * r**l * n_signs if 1 <= l <= n else 0
    if configs > budget:
        raise BudgetError(f"{configs} configurations exceed the budget of {budget}", configurations=configs)
    if l * r * max(terms) >= _INT64_SAFE:
        raise BudgetError("values would overflow 64-bit accumulation", configurations=configs)
    idx = _index_tuples(n, l)
    M = np.array(terms, dtype=np.int64)[idx]
    E, E_eps = _coefficient_sign_table(l, r, leading_sign)
    labels = _class_labels(E_eps, grouping)
    values = M @ E.T
    reports = {}
    for klass in sorted(set(labels)):
        cols = [j for j, c in enumerate(labels) if c == klass]
        A, cnt = np.unique(values[:, cols], return_counts=True)
        bound, name = _signed_bound(seq, grouping, l, klass, n, r, variant)
        reports[klass] = SolutionCountReport(
            n=n, l=l, klass=klass, r=r,
            per_A={int(a): int(c) for a, c in zip(A, cnt)},
            bound=bound, bound_name=name, q=float(_as_fraction(seq.q)),
        )
    return reports


def max_counts_by_n(
    seq: LacunarySequence, n_max: int, l: int, r: int, grouping: str | None = None,
    budget: int = DEFAULT_BUDGET,
) -> dict:
    """Largest bucket per class for every ``n = l .. n_max`` in one enumeration.

    Equivalent to calling :func:`count_signed_solutions` for each ``n`` and
    keeping ``max_count``, but reuses the enumeration at ``n_max``: index
    tuples are sorted by their leading index, so the configurations for ``n``
    form a prefix.
    """
    grouping = grouping or _default_grouping(seq)
    terms = _terms(seq, n_max)
    configs = math.comb(n_max, l) * r**l * 2 ** (l - 1)
    if configs > budget:
        raise BudgetError(f"{configs} configurations exceed the budget of {budget}", configurations=configs)
    if l * r * max(terms) >= _INT64_SAFE:
        raise BudgetError("values would overflow 64-bit accumulation", configurations=configs)
    idx = _index_tuples(n_max, l)
    M = np.array(terms, dtype=np.int64)[idx]
    E, E_eps = _coefficient_sign_table(l, r, 1)
    labels = _class_labels(E_eps, grouping)
    values = M @ E.T
    lead = idx[:, 0]
    out: dict = {}
    for klass in sorted(set(labels)):
        cols = [j for j, c in enumerate(labels) if c == klass]
        sub = values[:, cols]
        per_n = {}
        for n in range(l, n_max + 1):
            rows = int(np.searchsorted(lead, n, side="left"))
            _, cnt = np.unique(sub[:rows], return_counts=True)
            per_n[n] = int(cnt.max()) if cnt.size else 0
        out[klass] = per_n
    return out


def count_xor_solutions(seq: LacunarySequence, n: int, l: int, budget: int = DEFAULT_BUDGET) -> SolutionCountReport:
    """Count ``m_{k_1} xor ... xor m_{k_l} = A`` over strictly decreasing indices.

    For ``q >= 2`` the ``A = 0`` bucket must be empty.  For ``1 < q < 2`` the
    buckets ``A > 0`` are compared with :func:`bound_lemma42` and the
    ``A = 0`` bucket is reported without a verdict.
    """
    terms = _terms(seq, n)
    configs = math.comb(n, l) if 1 <= l <= n else 0
    if configs > budget:
        raise BudgetError(f"{configs} configurations exceed the budget of {budget}", configurations=configs)
    if max(terms) >= _INT64_SAFE:
        raise BudgetError("terms exceed 64-bit range", configurations=configs)
    idx = _index_tuples(n, l)
    M = np.array(terms, dtype=np.int64)[idx]
    vals = np.bitwise_xor.reduce(M, axis=1)
    A, cnt = np.unique(vals, return_counts=True)
    per_A = {int(a): int(c) for a, c in zip(A, cnt) if a != 0}
    zero = int(cnt[A == 0].sum())
    qf = _as_fraction(seq.q)
    bound = name = None
    if 1 < qf < 2:
        bound, name = bound_lemma42(l, seq.q, n), "lemma42"
    return SolutionCountReport(
        n=n, l=l, klass=None, r=1, per_A=per_A, bound=bound, mode="xor",
        zero_count=zero, zero_must_vanish=qf >= 2, bound_name=name, q=float(qf),
    )


def merge_counts(parts: Iterable[dict]) -> dict:
    """Add per-``A`` maps; order-independent."""
    out: dict = {}
    for part in parts:
        for a, c in part.items():
            out[a] = out.get(a, 0) + c
    return out
