"""Galerkin projection of a kernel onto the level-l tree basis.

    K_F(i, j) = int int K(x, y) f_i(x) f_j(y) dx dy

Integration cells sit at a dyadic level fine enough that every basis
function is constant on each cell; the basis side of the integral is then
exact and only the kernel's own smoothness limits accuracy.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .alphadet import cycle_count
from .errors import ContractViolation, ResourceLimitError
from .kernels import KernelSpec, nystrom_eigenvalues, trace_on_window
from .quadrature import QuadratureSpec, interval_nodes
from .tree import BasisIndex, Window, basis_cell_values, basis_indices, eval_basis

MAX_CYCLE_M = 4
_ROW_BLOCK = 2048


@dataclass(frozen=True)
class ProjectedKernel:
    level: int
    max_rank: int
    window: Window
    indices: tuple
    matrix: np.ndarray = field(repr=False)
    fine_level: int = 0

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.complex128)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "indices", tuple(self.indices))
        object.__setattr__(self, "_pos", {b: p for p, b in enumerate(self.indices)})

    @property
    def dim(self) -> int:
        return len(self.indices)

    def position(self, i: BasisIndex) -> int:
        try:
            return self._pos[i]
        except KeyError:
            raise ContractViolation(f"basis index {i} (level {i.level}) is not in the projection") from None

    def positions_in(self, lo: float, hi: float) -> np.ndarray:
        """Positions of basis functions whose support lies in [lo, hi)."""
        return np.array(
            [p for p, b in enumerate(self.indices) if lo <= b.support[0] and b.support[1] <= hi],
            dtype=np.int64,
        )

    def hermitian_error(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T))) if self.dim else 0.0

    def eigenvalues(self) -> np.ndarray:
        """Descending eigenvalues."""
        return np.sort(np.linalg.eigvalsh(self.matrix))[::-1]

    def to_dict(self) -> dict:
        flat = self.matrix.reshape(-1)
        return {
            "level": self.level,
            "rank": self.max_rank,
            "window": [self.window.a, self.window.b],
            "indices": [b.label() for b in self.indices],
            "entries": [[float(z.real), float(z.imag)] for z in flat],
        }

    def csv_rows(self) -> tuple[list, list]:
        header = ["row", "col", "row_index", "col_index", "re", "im"]
        rows = []
        for p, bp in enumerate(self.indices):
            for q, bq in enumerate(self.indices):
                z = self.matrix[p, q]
                rows.append([p, q, bp.label(), bq.label(), float(z.real), float(z.imag)])
        return header, rows


def cell_integrals(kernel: KernelSpec, window: Window, fine_level: int, order: int) -> np.ndarray:
    """Matrix of int_{c_a} int_{c_b} K over pairs of level-L cells of the window."""
    x, w = interval_nodes(window.a, window.b, fine_level, order)
    ncell, q = x.shape
    xf, wf = x.reshape(-1), w.reshape(-1)
    out = np.empty((ncell, ncell), dtype=np.complex128)
    rows_per_block = max(1, _ROW_BLOCK // q)
    for lo in range(0, ncell, rows_per_block):
        hi = min(ncell, lo + rows_per_block)
        xs = x[lo:hi].reshape(-1)
        ws = w[lo:hi].reshape(-1)
        kb = kernel.evaluate(xs[:, None], xf[None, :]) * ws[:, None] * wf[None, :]
        out[lo:hi] = kb.reshape(hi - lo, q, ncell, q).sum(axis=(1, 3))
    return out


def project_kernel(
    kernel: KernelSpec,
    level: int,
    max_rank: int,
    window: Window,
    quad: QuadratureSpec | None = None,
) -> ProjectedKernel:
    """Projected kernel on all labels of rank <= R supported in the window."""
    quad = quad or QuadratureSpec()
    window.require_aligned(level)
    fine = quad.resolve(level, max_rank, kernel)
    indices = basis_indices(level, max_rank, window)
    phi = basis_cell_values(indices, fine, window)
    cells = cell_integrals(kernel, window, fine, quad.order)
    mat = phi @ cells @ phi.T
    mat = 0.5 * (mat + mat.conj().T)
    return ProjectedKernel(level, max_rank, window, indices, mat, fine)


def truncated_kernel_eval(proj: ProjectedKernel, x, y):
    """K_R(x, y) = sum_{i,j} K_F(i, j) f_i(x) f_j(y) over the truncated set."""
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    fx = np.stack([eval_basis(b, x.reshape(-1)) for b in proj.indices])
    fy = np.stack([eval_basis(b, y.reshape(-1)) for b in proj.indices])
    out = np.einsum("in,ij,jn->n", fx, proj.matrix, fy).reshape(x.shape)
    return complex(out) if out.ndim == 0 else out


def tail_trace(kernel: KernelSpec, proj: ProjectedKernel, quad: QuadratureSpec | None = None) -> float:
    """Trace mass of K on the window not captured by the truncated projection."""
    return trace_on_window(kernel, proj.window, quad) - float(np.trace(proj.matrix).real)


def choose_rank(
    kernel: KernelSpec,
    level: int,
    window: Window,
    rel_threshold: float = 1e-3,
    quad: QuadratureSpec | None = None,
    max_rank: int = 10,
) -> int:
    """Smallest R whose tail trace is at most rel_threshold * trace."""
    total = trace_on_window(kernel, window, quad)
    for r in range(1, max_rank + 1):
        proj = project_kernel(kernel, level, r, window, quad)
        if tail_trace(kernel, proj, quad) <= rel_threshold * max(total, 1e-300):
            return r
    return max_rank


def permutation_cycles(sigma) -> list[tuple]:
    """Disjoint cycles of a permutation (0- or 1-based input), 0-based output."""
    perm = list(sigma)
    cycle_count(perm)  # validates
    base = min(perm) if perm else 0
    perm = [p - base for p in perm]
    seen = [False] * len(perm)
    out = []
    for s in range(len(perm)):
        if seen[s]:
            continue
        cyc = []
        j = s
        while not seen[j]:
            seen[j] = True
            cyc.append(j)
            j = perm[j]
        out.append(tuple(cyc))
    return out


def _as_cells(cells) -> list[tuple[float, float]]:
    out = []
    for c in cells:
        lo, hi = (float(c[0]), float(c[1]))
        if not lo < hi:
            raise ContractViolation(f"bad cell {c}")
        out.append((lo, hi))
    return out


class _KernelBlocks:
    """Quadrature-weighted kernel blocks M[p, q] = K(x^p_i, x^q_j) w^q_j."""

    def __init__(self, kernel, cells, quad):
        self.kernel = kernel
        widths = [hi - lo for lo, hi in cells]
        level = 1 - int(math.floor(math.log2(min(widths))))
        fine = quad.fine_level_for(kernel, floor=level + 5)
        self.nodes = []
        for lo, hi in cells:
            x, w = interval_nodes(lo, hi, fine, quad.order)
            self.nodes.append((x.reshape(-1), w.reshape(-1)))
        self._cache = {}

    def block(self, p, q):
        if (p, q) not in self._cache:
            xp, _ = self.nodes[p]
            xq, wq = self.nodes[q]
            self._cache[(p, q)] = self.kernel.evaluate(xp[:, None], xq[None, :]) * wq[None, :]
        return self._cache[(p, q)]

    def diag_trace(self, p):
        x, w = self.nodes[p]
        return complex(np.sum(w * self.kernel.evaluate(x, x)))


class _ProjectedBlocks:
    def __init__(self, proj, cells):
        self.proj = proj
        self.pos = [proj.positions_in(lo, hi) for lo, hi in cells]

    def block(self, p, q):
        return self.proj.matrix[np.ix_(self.pos[p], self.pos[q])]

    def diag_trace(self, p):
        return complex(np.trace(self.block(p, p)))


def _cycle_value(blocks, cyc, sigma0) -> complex:
    if len(cyc) == 1:
        return blocks.diag_trace(cyc[0])
    prod = None
    for n in cyc:
        b = blocks.block(n, sigma0[n])
        prod = b if prod is None else prod @ b
    return complex(np.trace(prod))


def cycle_integral(kern, cells, sigma, quad: QuadratureSpec | None = None) -> complex:
    """int over A_1 x ... x A_m of prod_n Kern(x_n, x_sigma(n)).

    ``kern`` is either a KernelSpec (tensor Gauss-Legendre on each cell) or a
    ProjectedKernel, in which case K_R is used and the integral collapses to
    sum over label tuples of prod_p K_F(i_p, i_sigma(p)).  Both reduce to
    traces of block products cycle by cycle.
    """
    cells = _as_cells(cells)
    m = len(cells)
    if m > MAX_CYCLE_M:
        raise ResourceLimitError(f"cycle_integral: m={m} exceeds guard {MAX_CYCLE_M}")
    if len(sigma) != m:
        raise ContractViolation(f"permutation of length {len(sigma)} for {m} cells")
    blocks = _blocks_for(kern, cells, quad)
    return _sigma_value(blocks, sigma)


def _blocks_for(kern, cells, quad):
    if isinstance(kern, ProjectedKernel):
        return _ProjectedBlocks(kern, cells)
    if isinstance(kern, KernelSpec):
        return _KernelBlocks(kern, cells, quad or QuadratureSpec())
    raise ContractViolation(f"expected KernelSpec or ProjectedKernel, got {type(kern).__name__}")


def _sigma_value(blocks, sigma) -> complex:
    cycles = permutation_cycles(sigma)
    base = min(sigma)
    sigma0 = [s - base for s in sigma]
    val = 1 + 0j
    for cyc in cycles:
        val *= _cycle_value(blocks, cyc, sigma0)
    return val


def hausdorff(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size == 0 or b.size == 0:
        return 0.0 if a.size == b.size else math.inf
    d = np.abs(a[:, None] - b[None, :])
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


@dataclass
class SpectrumReport:
    projected: np.ndarray
    nystrom: np.ndarray
    distance: float
    threshold: float
    grid_n: int

    @property
    def passed(self) -> bool:
        return self.distance < self.threshold

    def to_dict(self):
        return {
            "projected": [float(v) for v in self.projected],
            "nystrom": [float(v) for v in self.nystrom],
            "hausdorff": self.distance,
            "threshold": self.threshold,
            "grid_n": self.grid_n,
            "passed": self.passed,
        }


def spectrum_check(
    kernel: KernelSpec,
    proj: ProjectedKernel,
    grid_n: int = 512,
    n_leading: int = 5,
    threshold: float = 1e-2,
) -> SpectrumReport:
    """Compare leading eigenvalues of K_F with a Nystrom discretisation of K."""
    if grid_n < proj.dim:
        raise ContractViolation(f"grid_n={grid_n} is smaller than the projection dimension {proj.dim}")
    k = min(n_leading, proj.dim)
    ours = proj.eigenvalues()[:k]
    ref = nystrom_eigenvalues(kernel, proj.window, grid_n)[:k]
    return SpectrumReport(ours, ref, hausdorff(ours, ref), threshold, grid_n)
