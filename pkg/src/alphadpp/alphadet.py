"""alpha-determinants of square matrices.

    det_alpha(A) = sum over permutations s of alpha**(n - nu(s)) * prod_i A[i, s(i)]

where nu(s) counts the cycles of s.  alpha = -1 gives the determinant,
alpha = 1 the permanent.  Two independent evaluators are provided: a full
permutation sum (``det_alpha_naive``) and a cycle-expansion subset DP
(``det_alpha_dp``); each is the other's oracle.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Integral, Rational

import numpy as np

from . import _backend
from .errors import ContractViolation, InadmissibleAlpha, ResourceLimitError

NAIVE_MAX_N = 10
DP_MAX_N = 22
HERMITIAN_TOL = 1e-12


@dataclass(frozen=True)
class AlphaParam:
    """An admissible alpha, stored as an exact rational.

    Only values 2/m and -1/m (m = 1, 2, ...) are accepted; floats are
    refused outright so a rounded alpha can never slip through.
    """

    value: Fraction

    def __post_init__(self):
        v = self.value
        if isinstance(v, bool) or not isinstance(v, (Integral, Rational)):
            raise InadmissibleAlpha(
                f"alpha must be an exact rational, got {type(v).__name__} {v!r}"
            )
        v = Fraction(v)
        object.__setattr__(self, "value", v)
        if not _admissible(v):
            raise InadmissibleAlpha(
                f"alpha={v} is not admissible; expected 2/m or -1/m for a positive integer m"
            )

    @classmethod
    def parse(cls, text) -> "AlphaParam":
        """Parse '2', '-1', '-1/3', '2/5' and similar."""
        if isinstance(text, AlphaParam):
            return text
        if isinstance(text, (Integral, Fraction)) and not isinstance(text, bool):
            return cls(Fraction(text))
        if not isinstance(text, str):
            raise InadmissibleAlpha(f"alpha must be given as a rational string, got {text!r}")
        s = text.strip()
        num, sep, den = s.partition("/")
        try:
            p = int(num)
            q = int(den) if sep else 1
        except ValueError:
            raise InadmissibleAlpha(
                f"cannot parse alpha {text!r}; use an integer or p/q (admissible: 2/m or -1/m)"
            ) from None
        if q == 0:
            raise InadmissibleAlpha(f"alpha {text!r} has zero denominator")
        return cls(Fraction(p, q))

    @property
    def m(self) -> int:
        """The integer m in alpha = 2/m or alpha = -1/m."""
        if self.value < 0:
            return int(-1 / self.value)
        return int(2 / self.value)

    @property
    def negative(self) -> bool:
        return self.value < 0

    @property
    def spectral_bound(self) -> float:
        """Upper end of the admissible spectrum: -1/alpha if alpha < 0, else inf."""
        return float(-1 / self.value) if self.negative else float("inf")

    def __float__(self):
        return float(self.value)

    def __str__(self):
        return str(self.value)


def _admissible(v: Fraction) -> bool:
    if v == 0:
        return False
    if v < 0:
        return v.numerator == -1
    return v.numerator in (1, 2)


def _alpha_value(alpha) -> float:
    if isinstance(alpha, AlphaParam):
        return float(alpha.value)
    return float(AlphaParam.parse(alpha).value)


def as_square_matrix(a, hermitian: bool = False) -> np.ndarray:
    """Coerce to a complex square array, checking Hermitian symmetry if asked."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ContractViolation(f"expected a square matrix, got shape {m.shape}")
    if hermitian and m.size:
        err = np.max(np.abs(m - m.conj().T))
        if err > HERMITIAN_TOL:
            raise ContractViolation(f"matrix is not Hermitian (max asymmetry {err:.3g})")
    return m


def cycle_count(sigma) -> int:
    """Number of disjoint cycles of a permutation, fixed points included.

    ``sigma`` lists images of 1..n (one-based, as in ``(2, 3, 4, 1)``) or of
    0..n-1; the base is inferred from the smallest entry.
    """
    perm = list(sigma)
    n = len(perm)
    if n == 0:
        return 0
    base = min(perm)
    if base not in (0, 1) or sorted(perm) != list(range(base, base + n)):
        raise ContractViolation(f"{tuple(sigma)} is not a permutation of 0..n-1 or 1..n")
    perm = [p - base for p in perm]
    seen = [False] * n
    cycles = 0
    for start in range(n):
        if seen[start]:
            continue
        cycles += 1
        j = start
        while not seen[j]:
            seen[j] = True
            j = perm[j]
    return cycles


@lru_cache(maxsize=None)
def permutation_table(n: int) -> tuple[np.ndarray, np.ndarray]:
    """All permutations of range(n) with their cycle counts.

    Built by inserting the new element n-1 either as a fixed point (one
    more cycle) or after element i inside i's cycle (same count).
    """
    perms = np.zeros((1, 0), dtype=np.int8)
    cycles = np.zeros(1, dtype=np.int8)
    for k in range(n):
        blocks = [np.hstack([perms, np.full((perms.shape[0], 1), k, dtype=np.int8)])]
        counts = [cycles + 1]
        for i in range(k):
            p = np.hstack([perms, np.zeros((perms.shape[0], 1), dtype=np.int8)])
            p[:, k] = perms[:, i]
            p[:, i] = k
            blocks.append(p)
            counts.append(cycles)
        perms = np.vstack(blocks)
        cycles = np.concatenate(counts)
    perms.setflags(write=False)
    cycles.setflags(write=False)
    return perms, cycles


def det_alpha_naive(a, alpha, max_n: int = NAIVE_MAX_N) -> complex:
    """Full permutation sum; the ground truth for small n."""
    m = as_square_matrix(a)
    n = m.shape[0]
    if n > max_n:
        raise ResourceLimitError(f"det_alpha_naive: n={n} exceeds guard {max_n} (n! terms)")
    if n == 0:
        return 1 + 0j
    al = _alpha_value(alpha)
    perms, cycles = permutation_table(n)
    weights = al ** (n - cycles.astype(np.int64))
    rows = np.arange(n)
    total = 0j
    chunk = 1 << 16
    for lo in range(0, perms.shape[0], chunk):
        p = perms[lo:lo + chunk]
        total += complex(np.dot(weights[lo:lo + chunk], m[rows, p].prod(axis=1)))
    return total


def det_alpha_dp(a, alpha, max_n: int = DP_MAX_N) -> complex:
    """Subset DP over cycle covers, O(2**n n**2).

    Cycles are opened at the smallest uncovered index, which makes every
    cycle cover appear exactly once; a cycle of length k carries weight
    alpha**(k-1), and these multiply to alpha**(n - nu).
    """
    m = as_square_matrix(a)
    n = m.shape[0]
    if n > max_n:
        raise ResourceLimitError(f"det_alpha_dp: n={n} exceeds guard {max_n} (2**n states)")
    return _backend.det_alpha_dp(np.ascontiguousarray(m), _alpha_value(alpha))


def det_alpha(a, alpha) -> complex:
    """Default evaluator (subset DP)."""
    return det_alpha_dp(a, alpha)


def det_alpha_batch(mats, alpha) -> np.ndarray:
    """alpha-determinants of a stack of small (B, m, m) matrices, m <= 8."""
    mats = np.asarray(mats, dtype=np.complex128)
    if mats.ndim != 3 or mats.shape[1] != mats.shape[2]:
        raise ContractViolation(f"expected a (B, m, m) stack, got {mats.shape}")
    n = mats.shape[1]
    if n > 8:
        raise ResourceLimitError(f"det_alpha_batch: m={n} exceeds guard 8")
    if n == 0:
        return np.ones(mats.shape[0], dtype=np.complex128)
    al = _alpha_value(alpha)
    perms, cycles = permutation_table(n)
    rows = np.arange(n)
    out = np.zeros(mats.shape[0], dtype=np.complex128)
    for p, c in zip(perms, cycles):
        out += al ** (n - int(c)) * mats[:, rows, p].prod(axis=1)
    return out


def permanent_ryser(a) -> complex:
    """Permanent by Ryser's inclusion-exclusion formula with Gray-code updates."""
    m = as_square_matrix(a)
    n = m.shape[0]
    if n == 0:
        return 1 + 0j
    row_sums = np.zeros(n, dtype=np.complex128)
    total = 0j
    subset = 0
    for k in range(1, 1 << n):
        j = (k & -k).bit_length() - 1
        if subset >> j & 1:
            row_sums -= m[:, j]
        else:
            row_sums += m[:, j]
        subset ^= 1 << j
        size = bin(subset).count("1")
        total += (-1) ** size * np.prod(row_sums)
    return (-1) ** n * total

