"""Dyadic partitions, binary tree indices and the Haar-type basis on R.

Level-l cells have length 2**(1 - l).  A tree index (j1; j2 ... jr) names
the level-r cell starting at j1 + sum_{n>=2} j_n 2**-(n-1); appending a bit
selects the left (0) or right (1) half.

A basis function at level l is labelled by a tree index of rank >= l:

* rank-1 (index of rank exactly l): the normalised indicator of that cell;
* rank r >= 2 (index of rank l + r - 1, last bit 0): the unit-norm Haar
  function on the parent cell, positive on the left half.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation

_LABEL = re.compile(r"^\((-?\d+)(?:;([01]*))?\)$")


@dataclass(frozen=True, order=True)
class TreeIndex:
    root: int
    tail: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "root", int(self.root))
        tail = tuple(int(b) for b in self.tail)
        if any(b not in (0, 1) for b in tail):
            raise ContractViolation(f"tail bits must be 0/1, got {self.tail!r}")
        object.__setattr__(self, "tail", tail)

    @classmethod
    def of(cls, *entries) -> "TreeIndex":
        """TreeIndex.of(0, 1, 1) == TreeIndex(0, (1, 1))."""
        return cls(entries[0], tuple(entries[1:]))

    @classmethod
    def parse(cls, label: str) -> "TreeIndex":
        m = _LABEL.match(label.strip())
        if not m:
            raise ContractViolation(f"bad tree index label {label!r}")
        return cls(int(m.group(1)), tuple(int(c) for c in (m.group(2) or "")))

    @property
    def rank(self) -> int:
        return 1 + len(self.tail)

    @property
    def entries(self) -> tuple:
        return (self.root,) + self.tail

    def parent(self) -> "TreeIndex":
        if not self.tail:
            raise ContractViolation("a rank-1 index has no parent")
        return TreeIndex(self.root, self.tail[:-1])

    def truncate(self, rank: int) -> "TreeIndex":
        if not 1 <= rank <= self.rank:
            raise ContractViolation(f"cannot truncate rank-{self.rank} index to rank {rank}")
        return TreeIndex(self.root, self.tail[: rank - 1])

    def label(self) -> str:
        if not self.tail:
            return f"({self.root})"
        return f"({self.root};{''.join(map(str, self.tail))})"

    def __str__(self):
        return self.label()


@dataclass(frozen=True)
class Window:
    """Half-open interval [a, b) with dyadic endpoints."""

    a: float
    b: float

    def __post_init__(self):
        a, b = float(self.a), float(self.b)
        if not a < b:
            raise ContractViolation(f"window needs a < b, got [{a}, {b})")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def length(self) -> float:
        return self.b - self.a

    def aligned(self, level: int) -> bool:
        scale = 2.0 ** (level - 1)
        return float(self.a * scale).is_integer() and float(self.b * scale).is_integer()

    def require_aligned(self, level: int) -> None:
        if not self.aligned(level):
            raise ContractViolation(
                f"window [{self.a}, {self.b}) is not aligned to level-{level} cells "
                f"(length {2.0 ** (1 - level)})"
            )

    def cell_range(self, level: int) -> tuple[int, int]:
        """Integer cell numbers k (cell = [k h, (k+1) h)) covering the window."""
        self.require_aligned(level)
        scale = 2.0 ** (level - 1)
        return int(self.a * scale), int(self.b * scale)

    def cells(self, level: int) -> list[TreeIndex]:
        lo, hi = self.cell_range(level)
        return [cell_index(k, level) for k in range(lo, hi)]

    def contains(self, lo: float, hi: float) -> bool:
        return self.a <= lo and hi <= self.b


def cell_index(k: int, level: int) -> TreeIndex:
    """Tree index of the k-th level-l cell [k 2**(1-l), (k+1) 2**(1-l))."""
    nbits = level - 1
    root = k >> nbits
    rest = k - (root << nbits)
    tail = tuple((rest >> (nbits - 1 - n)) & 1 for n in range(nbits))
    return TreeIndex(root, tail)


def cell_number(i: TreeIndex) -> int:
    """Inverse of ``cell_index``: the integer k of the cell named by i."""
    k = i.root
    for b in i.tail:
        k = 2 * k + b
    return k


def cell_of(level: int, i: TreeIndex) -> tuple[float, float]:
    """The level-l cell [J, J + 2**(1-l)) named by a rank-l index."""
    if i.rank != level:
        raise ContractViolation(f"cell_of: index {i} has rank {i.rank}, level is {level}")
    start = float(i.root) + sum(b * 2.0 ** -(n + 1) for n, b in enumerate(i.tail))
    return start, start + 2.0 ** (1 - level)


def cell_at(x: float, level: int) -> TreeIndex:
    return cell_index(math.floor(x * 2.0 ** (level - 1)), level)


def children(level: int, i: TreeIndex) -> tuple[TreeIndex, TreeIndex]:
    if i.rank != level:
        raise ContractViolation(f"children: index {i} has rank {i.rank}, level is {level}")
    return TreeIndex(i.root, i.tail + (0,)), TreeIndex(i.root, i.tail + (1,))


@dataclass(frozen=True)
class ShiftedIndex:
    """Element of the level-l shifted index set: a root block plus a binary tail."""

    block: tuple
    tail: tuple = ()

    @property
    def level(self) -> int:
        return len(self.block)

    @property
    def rank(self) -> int:
        return 1 + len(self.tail)


def theta_shift(level: int, j: TreeIndex) -> ShiftedIndex:
    """Regroup (j1..j_{l+r-1}) as ((j1..jl), j_{l+1}, ..., j_{l+r-1})."""
    if j.rank < level:
        raise ContractViolation(f"theta_shift: rank {j.rank} < level {level}")
    e = j.entries
    return ShiftedIndex(e[:level], e[level:])


def theta_inverse(s: ShiftedIndex) -> TreeIndex:
    e = tuple(s.block) + tuple(s.tail)
    return TreeIndex(e[0], e[1:])


@dataclass(frozen=True, order=True)
class BasisIndex:
    """Basis function label at a given level."""

    level: int
    index: TreeIndex

    def __post_init__(self):
        if self.level < 1:
            raise ContractViolation(f"level must be >= 1, got {self.level}")
        if self.index.rank < self.level:
            raise ContractViolation(
                f"index {self.index} has rank {self.index.rank} < level {self.level}"
            )
        if self.index.rank > self.level and self.index.tail[-1] != 0:
            raise ContractViolation(
                f"index {self.index} at level {self.level}: rank >= 2 requires last bit 0"
            )

    @classmethod
    def parse(cls, level: int, label: str) -> "BasisIndex":
        return cls(level, TreeIndex.parse(label))

    @property
    def rank(self) -> int:
        return self.index.rank - self.level + 1

    @property
    def cell(self) -> TreeIndex:
        """The level-l cell this function lives in."""
        return self.index.truncate(self.level)

    @property
    def support(self) -> tuple[float, float]:
        if self.rank == 1:
            return cell_of(self.level, self.index)
        parent = self.index.parent()
        return cell_of(parent.rank, parent)

    @property
    def amplitude(self) -> float:
        lo, hi = self.support
        return 1.0 / math.sqrt(hi - lo)

    def shifted(self) -> ShiftedIndex:
        return theta_shift(self.level, self.index)

    def label(self) -> str:
        return self.index.label()

    def __str__(self):
        return self.label()


def basis_indices(level: int, max_rank: int, window: Window) -> list[BasisIndex]:
    """All basis labels of rank <= max_rank whose support lies in the window."""
    if max_rank < 1:
        raise ContractViolation(f"max_rank must be >= 1, got {max_rank}")
    out = []
    for cell in window.cells(level):
        out.append(BasisIndex(level, cell))
        for r in range(2, max_rank + 1):
            nfree = r - 2
            for bits in range(1 << nfree):
                tail = tuple((bits >> (nfree - 1 - n)) & 1 for n in range(nfree))
                out.append(BasisIndex(level, TreeIndex(cell.root, cell.tail + tail + (0,))))
    out.sort()
    return out


def eval_basis(i: BasisIndex, x):
    """Value of the basis function at x (scalar or array)."""
    x = np.asarray(x, dtype=float)
    lo, hi = i.support
    amp = i.amplitude
    inside = (x >= lo) & (x < hi)
    if i.rank == 1:
        val = np.where(inside, amp, 0.0)
    else:
        mid = 0.5 * (lo + hi)
        val = np.where(inside, np.where(x < mid, amp, -amp), 0.0)
    return val if val.ndim else float(val)


def basis_cell_values(indices, fine_level: int, window: Window) -> np.ndarray:
    """Exact piecewise-constant values of each basis function on level-L cells.

    Row p holds the values of ``indices[p]`` on the fine cells of the window,
    left to right.  L must resolve every function (L >= index rank).
    """
    k0, k1 = window.cell_range(fine_level)
    scale = 2.0 ** (fine_level - 1)
    out = np.zeros((len(indices), k1 - k0))
    for p, i in enumerate(indices):
        if i.index.rank > fine_level:
            raise ContractViolation(
                f"fine level {fine_level} does not resolve basis function {i} "
                f"(needs >= {i.index.rank})"
            )
        lo, hi = i.support
        a, b = int(lo * scale) - k0, int(hi * scale) - k0
        if a < 0 or b > k1 - k0:
            raise ContractViolation(f"basis function {i} is not inside the window")
        amp = i.amplitude
        if i.rank == 1:
            out[p, a:b] = amp
        else:
            mid = (a + b) // 2
            out[p, a:mid] = amp
            out[p, mid:b] = -amp
    return out


@dataclass(frozen=True)
class MarkMeasure:
    """Probability law |f|^2 dx of the mark attached to a basis label."""

    basis_index: BasisIndex
    support: tuple
    density: float

    @property
    def total_mass(self) -> float:
        lo, hi = self.support
        return self.density * (hi - lo)


def mark_measure(i: BasisIndex) -> MarkMeasure:
    return MarkMeasure(i, i.support, i.amplitude ** 2)


def sample_mark(i: BasisIndex, rng: np.random.Generator) -> float:
    # |f|^2 is constant on the support, so the law is uniform there.
    lo, hi = i.support
    return float(lo + (hi - lo) * rng.random())
