"""Vacuum expectation values of Wick power series of a free field.

A Wick power series ``rho(x) = sum_n a_n :phi(x)^n: / n!`` is stored as its
coefficient prefix.  For fields at points ``x_1..x_k`` with two-point
contractions ``t_ij``, the multi-index formula

    <rho_1 ... rho_k> = sum_{r_ij >= 0} A(R) T^R / R!

with ``R_i = sum_j r_ij``, ``A(R) = prod_i a^(i)_{R_i}``,
``T^R = prod t_ij^r_ij`` and ``R! = prod r_ij!`` is evaluated by summing
multi-indices in order of total degree.  The brute-force oracles enumerate
perfect matchings of labelled legs instead and share no code with it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from .errors import BudgetError, EmptyWindowError, MissingChannelError, SizeMismatchError

LEG_BUDGET = 16
DEFAULT_ORDER = 64


@dataclass(frozen=True)
class WickSeries:
    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(complex(c) for c in self.coeffs))

    def __getitem__(self, n: int) -> complex:
        return self.coeffs[n] if 0 <= n < len(self.coeffs) else 0j

    def __len__(self):
        return len(self.coeffs)

    @classmethod
    def monomial(cls, n: int) -> "WickSeries":
        """The field ``:phi^n:`` itself (``a_n = n!``)."""
        c = [0j] * (n + 1)
        c[n] = float(math.factorial(n))
        return cls(c)

    @classmethod
    def exp_linear(cls, g: complex, order: int = DEFAULT_ORDER) -> "WickSeries":
        """``:exp(g phi):``, i.e. ``a_n = g^n``."""
        return cls([complex(g) ** n for n in range(order + 1)])

    @classmethod
    def exp_square(cls, g: complex, order: int = DEFAULT_ORDER) -> "WickSeries":
        """``:exp(i g phi^2):`` with ``a_2n = (i g)^n (2n)!/n!``, odd terms zero."""
        c = [0j] * (order + 1)
        for k in range(order // 2 + 1):
            c[2 * k] = (1j * g) ** k * (math.factorial(2 * k) / math.factorial(k))
        return cls(c)


class PairingMatrix:
    """Symmetric contractions ``t_ij`` with optional derivative channels.

    ``dt[i, j, mu]`` is the contraction of ``d_mu phi`` at point ``i`` with
    ``phi`` at point ``j``.
    """

    def __init__(self, t, dt=None):
        t = np.array(t, dtype=complex)
        if t.ndim != 2 or t.shape[0] != t.shape[1]:
            raise SizeMismatchError("pairing matrix must be square")
        if not np.allclose(t, t.T, rtol=0, atol=0):
            raise ValueError("pairing matrix must be symmetric")
        if np.any(np.diag(t) != 0):
            raise ValueError("pairing matrix must have zero diagonal")
        self.t = t
        if dt is not None:
            dt = np.array(dt, dtype=complex)
            if dt.shape[:2] != t.shape:
                raise SizeMismatchError("derivative channels must be (n, n, dim)")
        self.dt = dt

    @property
    def size(self) -> int:
        return self.t.shape[0]

    @classmethod
    def from_upper(cls, values, n: int) -> "PairingMatrix":
        """Build from the ``i < j`` entries listed row by row."""
        t = np.zeros((n, n), dtype=complex)
        it = iter(values)
        for i in range(n):
            for j in range(i + 1, n):
                t[i, j] = t[j, i] = next(it)
        return cls(t)

    @classmethod
    def translation_invariant(cls, t, dt_upper) -> "PairingMatrix":
        """Channels for contractions that depend on ``x_i - x_j`` only.

        ``dt_upper[i, j]`` (``i < j``) is the derivative at ``i``; the
        derivative at ``j`` of the same contraction is its negative.
        """
        t = np.asarray(t, dtype=complex)
        dt_upper = np.asarray(dt_upper, dtype=complex)
        n = t.shape[0]
        dt = np.zeros_like(dt_upper)
        for i in range(n):
            for j in range(i + 1, n):
                dt[i, j] = dt_upper[i, j]
                dt[j, i] = -dt_upper[i, j]
        return cls(t, dt)

    def pairs(self):
        n = self.size
        return [(i, j) for i in range(n) for j in range(i + 1, n)]


def _compositions(total: int, parts: int) -> Iterator[tuple]:
    """All tuples of ``parts`` non-negative ints summing to ``total``, lexicographic."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def contraction_indices(n: int, trunc: int) -> Iterator[tuple]:
    """Multi-indices ``r_ij`` (``i < j`` row-major), by degree then lexicographic."""
    npairs = n * (n - 1) // 2
    for d in range(trunc + 1):
        yield from _compositions(d, npairs)


def _check_sizes(series, t):
    if len(series) != t.size:
        raise SizeMismatchError(f"{len(series)} series for a {t.size}-point pairing matrix")


def _term(series, pairs, tvals, r, n):
    R = [0] * n
    for (i, j), rij in zip(pairs, r):
        R[i] += rij
        R[j] += rij
    a = 1.0 + 0j
    for s, Ri in zip(series, R):
        a *= s[Ri]
        if a == 0:
            return 0j, R
    for tv, rij in zip(tvals, r):
        if rij:
            a *= tv**rij / math.factorial(rij)
    return a, R


def jaffe_degree_sums(series: Sequence[WickSeries], t: PairingMatrix, trunc: int) -> list:
    """Contribution of each total contraction degree ``0..trunc``."""
    _check_sizes(series, t)
    if trunc < 0:
        raise ValueError("trunc must be non-negative")
    n = t.size
    pairs = t.pairs()
    tvals = [t.t[i, j] for i, j in pairs]
    out = []
    for d in range(trunc + 1):
        acc = 0j
        for r in _compositions(d, len(pairs)):
            acc += _term(series, pairs, tvals, r, n)[0]
        out.append(acc)
    return out


def jaffe_vev(series: Sequence[WickSeries], t: PairingMatrix, trunc: int) -> complex:
    """Truncated multi-index sum over all ``r`` with ``sum r_ij <= trunc``."""
    return complex(sum(jaffe_degree_sums(series, t, trunc)))


def jaffe_partial_sums(series, t, trunc) -> np.ndarray:
    return np.cumsum(jaffe_degree_sums(series, t, trunc))


def mixed_jaffe_vev(series: Sequence[WickSeries], t: PairingMatrix, deriv_point: int,
                    mu: int, trunc: int) -> complex:
    """Multi-index sum when the field at ``deriv_point`` carries one derivative.

    That field is ``sum_n a_n :(d_mu phi) phi^(n-1): / (n-1)!`` (the
    termwise derivative of the plain series).  The tagged leg contracts with
    point ``j`` in a fraction ``r_ij / R_i`` of the matchings, so each
    multi-index contributes ``A(R)/R! * sum_j r_ij dt_ij T^(R - e_ij)``.
    """
    _check_sizes(series, t)
    if t.dt is None:
        raise MissingChannelError("derivative channels required")
    n = t.size
    pairs = t.pairs()
    tvals = [t.t[i, j] for i, j in pairs]
    total = 0j
    for r in contraction_indices(n, trunc):
        R = [0] * n
        for (i, j), rij in zip(pairs, r):
            R[i] += rij
            R[j] += rij
        a = 1.0 + 0j
        for s, Ri in zip(series, R):
            a *= s[Ri]
        if a == 0:
            continue
        for rij in r:
            a /= math.factorial(rij)
        chan = 0j
        for k, ((i, j), rij) in enumerate(zip(pairs, r)):
            if rij == 0 or deriv_point not in (i, j):
                continue
            other = j if i == deriv_point else i
            prod = rij * t.dt[deriv_point, other, mu]
            for kk, (tv, rr) in enumerate(zip(tvals, r)):
                e = rr - 1 if kk == k else rr
                if e:
                    prod *= tv**e
            chan += prod
        total += a * chan
    return complex(total)


# --- brute-force oracles ----------------------------------------------------

def _legs(degrees):
    return [p for p, d in enumerate(degrees) for _ in range(d)]


def _check_budget(degrees):
    if any(d < 0 for d in degrees):
        raise ValueError("degrees must be non-negative")
    total = sum(degrees)
    if total > LEG_BUDGET:
        raise BudgetError(f"{total} legs exceed the enumeration budget of {LEG_BUDGET}")
    return total


def _matchings_sum(legs, weight):
    """Sum over perfect matchings (no same-point pairs) of products of weights."""

    def rec(free):
        if not free:
            return 1.0 + 0j
        a = free[0]
        acc = 0j
        for k in range(1, len(free)):
            b = free[k]
            if legs[a][0] == legs[b][0]:
                continue
            w = weight(legs[a], legs[b])
            if w == 0:
                continue
            acc += w * rec(free[1:k] + free[k + 1:])
        return acc

    return rec(list(range(len(legs))))


def monomial_vev_oracle(degrees: Sequence[int], t: PairingMatrix) -> complex:
    """``<:phi^n1:(x1) ... :phi^nk:(xk)>`` by enumerating leg matchings."""
    if len(degrees) != t.size:
        raise SizeMismatchError("one degree per point required")
    total = _check_budget(degrees)
    if total % 2:
        return 0j
    legs = [(p, False, None) for p in _legs(degrees)]
    return complex(_matchings_sum(legs, lambda a, b: t.t[a[0], b[0]]))


def mixed_monomial_vev_oracle(degrees: Sequence[int], deriv_flags: Sequence, t: PairingMatrix) -> complex:
    """Matching sum where point ``i`` holds ``:(d_mu phi) phi^(n_i - 1):``.

    ``deriv_flags[i]`` is ``None`` for a plain monomial or the direction
    ``mu`` of the single derivative leg.  A derivative leg contracting a plain
    leg uses the channel ``t.dt``; two derivative legs meeting has no channel
    and raises :class:`MissingChannelError`.
    """
    if len(degrees) != t.size or len(deriv_flags) != t.size:
        raise SizeMismatchError("one degree and one flag per point required")
    total = _check_budget(degrees)
    flagged = [i for i, f in enumerate(deriv_flags) if f is not None]
    for i in flagged:
        if degrees[i] < 1:
            raise ValueError(f"point {i} has a derivative flag but no legs")
    if flagged and t.dt is None:
        raise MissingChannelError("derivative channels required for flagged points")
    if total % 2:
        return 0j
    legs = []
    for p, d in enumerate(degrees):
        for k in range(d):
            tagged = k == 0 and deriv_flags[p] is not None
            legs.append((p, tagged, deriv_flags[p] if tagged else None))

    def weight(a, b):
        if a[1] and b[1]:
            raise MissingChannelError(
                f"derivative legs at points {a[0]} and {b[0]} would contract")
        if a[1]:
            return t.dt[a[0], b[0], a[2]]
        if b[1]:
            return t.dt[b[0], a[0], b[2]]
        return t.t[a[0], b[0]]

    return complex(_matchings_sum(legs, weight))


def exp_vev_closed(g: Sequence[complex], t: PairingMatrix) -> complex:
    """``<:e^{g_1 phi}: ... :e^{g_k phi}:> = exp(sum_{i<j} g_i g_j t_ij)``."""
    if len(g) != t.size:
        raise SizeMismatchError("one coupling per point required")
    s = sum(g[i] * g[j] * t.t[i, j] for i, j in t.pairs())
    return complex(np.exp(s))


class SigmaEstimate(NamedTuple):
    sigma: float
    ell: float


def sigma_growth(series: WickSeries, window: tuple[int, int]) -> SigmaEstimate:
    """Estimate ``limsup (|a_n|^2 / n!)^(1/n)`` as the maximum over ``window``.

    ``ell = sqrt(sigma) / (2 pi)`` is reported alongside.
    """
    lo, hi = window
    if max(lo, 1) > hi:
        raise EmptyWindowError(f"window {window} holds no coefficients")
    vals = []
    # degrees past the stored prefix are zero and cannot raise the estimate
    for n in range(max(lo, 1), min(hi, len(series) - 1) + 1):
        a = abs(series[n])
        if a == 0:
            continue
        vals.append(math.exp((2.0 * math.log(a) - math.lgamma(n + 1)) / n))
    sigma = max(vals) if vals else 0.0
    return SigmaEstimate(sigma, math.sqrt(sigma) / (2.0 * math.pi))


def convergence_margin(g: float, t: PairingMatrix) -> float:
    """``1/(2g) - sum_{i<j} |t_ij|``; positive certifies absolute convergence."""
    return 1.0 / (2.0 * abs(g)) - sum(abs(t.t[i, j]) for i, j in t.pairs())
