"""Correlation functions and the continuum/tree Parseval identity.

For level-l cells A_1..A_m,

    int_{A_1 x ... x A_m} det_alpha[K(x_p, x_q)] dx
        = sum over label tuples i_p supported in A_p of det_alpha[K_F(i_p, i_q)].

The left side is computed by tensor Gauss-Legendre on K, the right side by
enumerating label tuples of the truncated projection; their difference is
bounded by ``parseval_tail_bound``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .alphadet import AlphaParam, det_alpha, det_alpha_batch, permutation_table
from .errors import ContractViolation, ResourceLimitError
from .kernels import KernelSpec, trace_on_window
from .projection import (
    MAX_CYCLE_M,
    ProjectedKernel,
    _blocks_for,
    _sigma_value,
    permutation_cycles,
    project_kernel,
)
from .quadrature import QuadratureSpec
from .tree import BasisIndex, TreeIndex, Window, cell_of

MAX_RHO_M = 10
_TUPLE_CHUNK = 1 << 15


@dataclass(frozen=True)
class CorrelationQuery:
    """m level-l cells (repetitions allowed) and an alpha."""

    level: int
    cells: tuple
    alpha: AlphaParam

    def __post_init__(self):
        alpha = AlphaParam.parse(self.alpha)
        object.__setattr__(self, "alpha", alpha)
        cells = []
        h = 2.0 ** (1 - self.level)
        for c in self.cells:
            if isinstance(c, TreeIndex):
                c = cell_of(self.level, c)
            lo, hi = float(c[0]), float(c[1])
            if hi - lo != h or not float(lo / h).is_integer():
                raise ContractViolation(f"[{lo}, {hi}) is not a level-{self.level} cell")
            cells.append((lo, hi))
        if not cells:
            raise ContractViolation("query needs at least one cell")
        if len(cells) > MAX_CYCLE_M:
            raise ResourceLimitError(f"query order m={len(cells)} exceeds guard {MAX_CYCLE_M}")
        object.__setattr__(self, "cells", tuple(cells))

    @property
    def m(self) -> int:
        return len(self.cells)

    def multiplicities(self) -> list[tuple[tuple, int]]:
        """Distinct cells in first-appearance order with their multiplicity."""
        out = {}
        for c in self.cells:
            out[c] = out.get(c, 0) + 1
        return list(out.items())

    def hull(self) -> Window:
        return Window(min(c[0] for c in self.cells), max(c[1] for c in self.cells))


def rho_m(kernel: KernelSpec, alpha, points) -> float:
    """m-point correlation det_alpha[K(x_i, x_j)]."""
    x = np.asarray(points, dtype=float).reshape(-1)
    if x.size > MAX_RHO_M:
        raise ResourceLimitError(f"rho_m: m={x.size} exceeds guard {MAX_RHO_M}")
    mat = kernel.evaluate(x[:, None], x[None, :])
    return _real(det_alpha(mat, AlphaParam.parse(alpha)))


def rho_F_m(proj: ProjectedKernel, alpha, indices) -> float:
    """Tree correlation det_alpha[K_F(i_p, i_q)]."""
    pos = [proj.position(i) for i in indices]
    if len(pos) > MAX_RHO_M:
        raise ResourceLimitError(f"rho_F_m: m={len(pos)} exceeds guard {MAX_RHO_M}")
    return _real(det_alpha(proj.matrix[np.ix_(pos, pos)], AlphaParam.parse(alpha)))


def _real(z: complex, tol: float = 1e-10) -> float:
    z = complex(z)
    if abs(z.imag) > tol * max(1.0, abs(z.real)):
        raise ContractViolation(f"correlation has imaginary residue {z.imag:.3g}; kernel not Hermitian?")
    return z.real


def _alpha_sum(blocks, m: int, alpha: AlphaParam) -> complex:
    al = float(alpha.value)
    perms, cycles = permutation_table(m)
    total = 0j
    for p, c in zip(perms, cycles):
        total += al ** (m - int(c)) * _sigma_value(blocks, [int(v) for v in p])
    return total


def lhs_parseval(kernel: KernelSpec, query: CorrelationQuery, quad: QuadratureSpec | None = None) -> float:
    """int over the cell product of det_alpha[K(x_p, x_q)], via cycle integrals of K."""
    blocks = _blocks_for(kernel, query.cells, quad)
    return _real(_alpha_sum(blocks, query.m, query.alpha), tol=1e-8)


def rhs_parseval(proj: ProjectedKernel, query: CorrelationQuery) -> float:
    """Sum of det_alpha[K_F(i_p, i_q)] over label tuples inside the cells."""
    if proj.level != query.level:
        raise ContractViolation(f"projection level {proj.level} != query level {query.level}")
    groups = [proj.positions_in(lo, hi) for lo, hi in query.cells]
    if any(g.size == 0 for g in groups):
        raise ContractViolation("a query cell lies outside the projection window")
    m = query.m
    grids = np.meshgrid(*groups, indexing="ij")
    tuples = np.stack([g.reshape(-1) for g in grids], axis=1)
    total = 0j
    for lo in range(0, tuples.shape[0], _TUPLE_CHUNK):
        t = tuples[lo:lo + _TUPLE_CHUNK]
        mats = proj.matrix[t[:, :, None], t[:, None, :]]
        total += complex(det_alpha_batch(mats, query.alpha).sum())
    return _real(total, tol=1e-8)


def rhs_by_cycles(proj: ProjectedKernel, query: CorrelationQuery) -> float:
    """Same quantity as ``rhs_parseval``, via sum_sigma alpha^(m-nu) cycle_integral(K_R)."""
    blocks = _blocks_for(proj, query.cells, None)
    return _real(_alpha_sum(blocks, query.m, query.alpha), tol=1e-8)


def parseval_tail_bound(m: int, alpha, tail: float, trace: float) -> float:
    """Upper bound on |lhs - rhs| from the tail trace, for PSD kernels.

    Each cycle integral of length k is bounded by trace**k, and replacing K by
    K_R changes it by at most 2 k sqrt(tail * trace) trace**(k-1).
    """
    al = abs(float(AlphaParam.parse(alpha).value))
    tail = max(tail, 0.0)
    eps = 2.0 * math.sqrt(tail * trace)
    perms, cycles = permutation_table(m)
    total = 0.0
    for p, c in zip(perms, cycles):
        lengths = [len(cy) for cy in permutation_cycles([int(v) for v in p])]
        bound = 0.0
        for a, k in enumerate(lengths):
            others = math.prod(trace ** kk for b, kk in enumerate(lengths) if b != a)
            bound += k * eps * trace ** (k - 1) * others
        total += al ** (m - int(c)) * bound
    return total


@dataclass
class ParsevalReport:
    m: int
    level: int
    rank: int
    alpha: str
    lhs: float
    rhs: float
    gap: float
    tail_bound: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.gap <= self.tolerance

    def to_dict(self):
        return {
            "m": self.m,
            "level": self.level,
            "rank": self.rank,
            "alpha": self.alpha,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "gap": self.gap,
            "tail_bound": self.tail_bound,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


def verify_parseval(
    kernel: KernelSpec,
    query: CorrelationQuery,
    max_rank: int,
    quad: QuadratureSpec | None = None,
    proj: ProjectedKernel | None = None,
    tolerance: float | None = None,
) -> ParsevalReport:
    """Compare the quadrature LHS with the truncated tree RHS.

    The default tolerance is the analytic tail bound plus 1e-9 for quadrature.
    """
    if proj is None:
        proj = project_kernel(kernel, query.level, max_rank, query.hull(), quad)
    lhs = lhs_parseval(kernel, query, quad)
    rhs = rhs_parseval(proj, query)
    trace = trace_on_window(kernel, proj.window, quad)
    tail = trace - float(np.trace(proj.matrix).real)
    bound = parseval_tail_bound(query.m, query.alpha, tail, trace)
    tol = bound + 1e-9 if tolerance is None else tolerance
    return ParsevalReport(
        query.m, query.level, proj.max_rank, str(query.alpha), lhs, rhs, abs(lhs - rhs), bound, tol
    )
