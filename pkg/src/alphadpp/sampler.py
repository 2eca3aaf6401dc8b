"""Sampling the tree process, attaching marks and unlabelling.

The discrete process on the truncated label set is built from standard
superposition identities:

* alpha = -1/m: union of m independent determinantal samples with kernel K_F/m;
* alpha = 2/m: union of m independent Cox samples whose intensity at label i
  is g_i**2 for a centred real Gaussian vector g with covariance K_F/m
  (complex K_F with even m: m/2 complex Gaussian fields with covariance 2K_F/m).

Each label then receives an independent mark drawn from |f_i|^2 dx, which
is uniform on the support of f_i.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .alphadet import AlphaParam
from .correlation import CorrelationQuery, lhs_parseval, parseval_tail_bound, rhs_parseval
from .errors import ContractViolation, SpectralViolation
from .kernels import KernelSpec, trace_on_window
from .projection import ProjectedKernel, project_kernel
from .quadrature import QuadratureSpec
from .tree import BasisIndex, Window

CHUNK = 4096
SPEC_TOL = 1e-8
COMPLEX_TOL = 1e-12


def make_rng(seed) -> np.random.Generator:
    """Counter-based generator (Philox) for a seed or SeedSequence."""
    return np.random.Generator(np.random.Philox(seed))


@dataclass(frozen=True)
class DiscreteConfiguration:
    """Finite multiset of basis labels; repeated labels allowed."""

    indices: tuple = ()

    def __len__(self):
        return len(self.indices)


@dataclass(frozen=True)
class LiftedConfiguration:
    """Multiset of (label, mark) pairs, each mark inside its label's support."""

    pairs: tuple = ()

    def __post_init__(self):
        for i, s in self.pairs:
            lo, hi = i.support
            if not lo <= s < hi:
                raise ContractViolation(f"mark {s} outside support [{lo}, {hi}) of {i}")

    def __len__(self):
        return len(self.pairs)


@dataclass(frozen=True)
class ContinuumConfiguration:
    points: tuple = ()

    def __len__(self):
        return len(self.points)


class DiscreteSampler:
    """Prepared sampler for the alpha-determinantal process of a projected kernel."""

    def __init__(self, proj: ProjectedKernel, alpha):
        self.proj = proj
        self.alpha = AlphaParam.parse(alpha)
        self.n_items = proj.dim
        m = self.alpha.m
        mat = proj.matrix
        scale = float(np.max(np.abs(mat))) if mat.size else 0.0
        self.real = scale == 0.0 or float(np.max(np.abs(mat.imag))) <= COMPLEX_TOL * scale
        lam, vecs = np.linalg.eigh(mat if not self.real else mat.real)
        if lam.size and lam.min() < -SPEC_TOL:
            raise SpectralViolation(f"projected kernel has negative eigenvalue {lam.min():.3g}", float(lam.min()))
        if self.alpha.negative:
            lam = lam / m
            if lam.size and lam.max() > 1.0 + SPEC_TOL:
                raise SpectralViolation(
                    f"eigenvalue {lam.max() * m:.12g} of K_F exceeds -1/alpha = {m}", float(lam.max() * m)
                )
            keep = lam > 0.0
            self.copies = m
            self.lam = np.clip(lam[keep], 0.0, 1.0)
            self.vecs = np.ascontiguousarray(vecs[:, keep], dtype=np.complex128)
        else:
            if self.real:
                self.copies = m
                cov_scale = 1.0 / m
            else:
                if m % 2:
                    raise ContractViolation(
                        f"alpha={self.alpha} with a complex kernel needs an even m (got {m})"
                    )
                self.copies = m // 2
                cov_scale = 2.0 / m
            lam = np.where(lam < 0.0, 0.0, lam) * cov_scale
            # rows: g_row = z_row @ root.T with root the symmetric square root
            self.root_t = ((vecs * np.sqrt(lam)) @ vecs.conj().T).T

    def draw(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Label counts, shape (n, n_items)."""
        n_items = self.n_items
        out = np.zeros((n, n_items), dtype=np.int64)
        if n == 0 or n_items == 0:
            return out
        s = n * self.copies
        if self.alpha.negative:
            k = self.lam.size
            if k == 0:
                return out
            sel = (rng.random((s, k)) < self.lam).astype(np.uint8)
            unif = rng.random((s, k))
            flat, counts = _backend.projection_dpp_batch(self.vecs, sel, unif)
            owner = np.repeat(np.arange(s) // self.copies, counts)
            np.add.at(out, (owner, flat), 1)
            return out
        if self.real:
            g = rng.standard_normal((s, n_items)) @ self.root_t
            intensity = g * g
        else:
            z = (rng.standard_normal((s, n_items)) + 1j * rng.standard_normal((s, n_items))) / math.sqrt(2.0)
            g = z @ self.root_t
            intensity = g.real ** 2 + g.imag ** 2
        pts = rng.poisson(intensity)
        return pts.reshape(n, self.copies, n_items).sum(axis=1)


def sample_discrete(proj: ProjectedKernel, alpha, rng: np.random.Generator) -> DiscreteConfiguration:
    counts = DiscreteSampler(proj, alpha).draw(1, rng)[0]
    labels = []
    for p in np.flatnonzero(counts):
        labels.extend([proj.indices[p]] * int(counts[p]))
    return DiscreteConfiguration(tuple(labels))


def attach_marks(d: DiscreteConfiguration, rng: np.random.Generator) -> LiftedConfiguration:
    pairs = []
    for i in d.indices:
        lo, hi = i.support
        pairs.append((i, float(lo + (hi - lo) * rng.random())))
    return LiftedConfiguration(tuple(pairs))


def unlabel(w: LiftedConfiguration) -> ContinuumConfiguration:
    return ContinuumConfiguration(tuple(s for _, s in w.pairs))


def cell_counts(c, level: int, window: Window) -> np.ndarray:
    """Counts per level-l cell of the window (points outside are ignored)."""
    k0, k1 = window.cell_range(level)
    pts = np.asarray(c.points if isinstance(c, ContinuumConfiguration) else c, dtype=float)
    k = np.floor(pts * 2.0 ** (level - 1)).astype(np.int64) - k0
    k = k[(k >= 0) & (k < k1 - k0)]
    return np.bincount(k, minlength=k1 - k0)


def falling_factorial(s, k: int):
    s = np.asarray(s, dtype=np.float64)
    out = np.ones_like(s)
    for j in range(k):
        out = out * (s - j)
    # s(s-1)...(s-k+1) already vanishes for integer s < k; clip guards s < 0
    return np.where(s >= k, out, 0.0)


@dataclass
class MomentEstimate:
    mean: float
    stderr: float
    n: int


def estimate_factorial_moments(samples, cells) -> MomentEstimate:
    """Monte Carlo mean of prod_i s(A_i)! / (s(A_i) - k_i)!.

    ``samples`` is an (n, n_cells) count array; ``cells`` lists
    ``(column, k)`` pairs for disjoint cells.
    """
    samples = np.asarray(samples)
    cols = [c for c, _ in cells]
    if len(set(cols)) != len(cols):
        raise ContractViolation(f"cells must be disjoint, got repeated columns {cols}")
    if samples.ndim != 2:
        raise ContractViolation("samples must be a 2-d array of cell counts")
    n = samples.shape[0]
    vals = np.ones(n)
    for c, k in cells:
        vals = vals * falling_factorial(samples[:, c], k)
    if n == 0:
        return MomentEstimate(float("nan"), float("nan"), 0)
    mean = float(vals.mean())
    stderr = float(vals.std(ddof=1) / math.sqrt(n)) if n > 1 else float("inf")
    return MomentEstimate(mean, stderr, n)


@dataclass
class LiftSamples:
    """Vectorised record of n lifted samples."""

    proj: ProjectedKernel
    level: int
    label_counts: np.ndarray          # (n, n_items)
    offsets: np.ndarray               # (n + 1,)
    point_labels: np.ndarray          # label position of each point
    points: np.ndarray                # marks, grouped by sample
    cell_counts: np.ndarray = field(default=None)   # (n, n_cells)

    @property
    def n(self) -> int:
        return self.label_counts.shape[0]

    def marks_contained(self) -> bool:
        lo, hi = _support_arrays(self.proj)
        return bool(np.all((self.points >= lo[self.point_labels]) & (self.points < hi[self.point_labels])))

    def configuration(self, s: int) -> LiftedConfiguration:
        a, b = self.offsets[s], self.offsets[s + 1]
        return LiftedConfiguration(
            tuple((self.proj.indices[p], float(x)) for p, x in zip(self.point_labels[a:b], self.points[a:b]))
        )


def _support_arrays(proj: ProjectedKernel):
    sup = np.array([b.support for b in proj.indices], dtype=float).reshape(-1, 2)
    return sup[:, 0], sup[:, 1]


def _lift_chunk(sampler, lo_arr, hi_arr, level, window, n, seed_seq):
    rng = make_rng(seed_seq)
    counts = sampler.draw(n, rng)
    per_sample = counts.sum(axis=1)
    owner = np.repeat(np.arange(n), per_sample)
    labels = np.repeat(np.tile(np.arange(counts.shape[1]), n), counts.reshape(-1))
    u = rng.random(labels.size)
    points = lo_arr[labels] + (hi_arr[labels] - lo_arr[labels]) * u
    k0, k1 = window.cell_range(level)
    cell = np.floor(points * 2.0 ** (level - 1)).astype(np.int64) - k0
    ncell = k1 - k0
    cc = np.bincount(owner * ncell + cell, minlength=n * ncell).reshape(n, ncell)
    return counts, per_sample, labels, points, cc


def simulate_lift(
    proj: ProjectedKernel,
    alpha,
    n_samples: int,
    seed: int,
    threads: int = 1,
    chunk: int = CHUNK,
) -> LiftSamples:
    """Draw discrete samples, attach marks, unlabel and count per level-l cell.

    Work is split into fixed-size chunks, each with its own spawned Philox
    stream, so results do not depend on ``threads``.
    """
    sampler = DiscreteSampler(proj, alpha)
    lo_arr, hi_arr = _support_arrays(proj)
    sizes = [min(chunk, n_samples - s) for s in range(0, n_samples, chunk)]
    seqs = np.random.SeedSequence(seed).spawn(len(sizes))
    args = [(sampler, lo_arr, hi_arr, proj.level, proj.window, n, ss) for n, ss in zip(sizes, seqs)]
    if threads > 1 and len(args) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(lambda a: _lift_chunk(*a), args))
    else:
        parts = [_lift_chunk(*a) for a in args]
    ncell = proj.window.cell_range(proj.level)[1] - proj.window.cell_range(proj.level)[0]
    if parts:
        counts = np.vstack([p[0] for p in parts])
        per = np.concatenate([p[1] for p in parts])
        labels = np.concatenate([p[2] for p in parts])
        points = np.concatenate([p[3] for p in parts])
        cc = np.vstack([p[4] for p in parts])
    else:
        counts = np.zeros((0, proj.dim), dtype=np.int64)
        per = np.zeros(0, dtype=np.int64)
        labels = np.zeros(0, dtype=np.int64)
        points = np.zeros(0)
        cc = np.zeros((0, ncell), dtype=np.int64)
    offsets = np.concatenate([[0], np.cumsum(per)]).astype(np.int64)
    return LiftSamples(proj, proj.level, counts, offsets, labels, points, cc)


def query_columns(query: CorrelationQuery, window: Window) -> list[tuple[int, int]]:
    """(cell column, multiplicity) pairs of a query relative to the window's cells."""
    k0, _ = window.cell_range(query.level)
    h = 2.0 ** (1 - query.level)
    return [(int(round(c[0] / h)) - k0, k) for c, k in query.multiplicities()]


@dataclass
class LiftCheck:
    cells: list
    empirical: float
    stderr: float
    analytic: float
    truncated: float
    tail_bound: float

    @property
    def tolerance(self) -> float:
        return 3.0 * self.stderr + self.tail_bound

    @property
    def passed(self) -> bool:
        return abs(self.empirical - self.analytic) <= self.tolerance

    def to_dict(self):
        return {
            "cells": [list(c) for c in self.cells],
            "empirical": self.empirical,
            "stderr": self.stderr,
            "analytic": self.analytic,
            "truncated": self.truncated,
            "tail_bound": self.tail_bound,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


@dataclass
class LiftReport:
    alpha: str
    level: int
    rank: int
    n_samples: int
    seed: int
    marks_contained: bool
    checks: list

    @property
    def passed(self) -> bool:
        return self.marks_contained and all(c.passed for c in self.checks)

    def to_dict(self):
        return {
            "alpha": self.alpha,
            "level": self.level,
            "rank": self.rank,
            "n_samples": self.n_samples,
            "seed": self.seed,
            "marks_contained": self.marks_contained,
            "checks": [c.to_dict() for c in self.checks],
            "passed": self.passed,
        }


def verify_lift(
    kernel: KernelSpec,
    alpha,
    level: int,
    max_rank: int,
    window: Window,
    queries,
    n_samples: int,
    seed: int,
    quad: QuadratureSpec | None = None,
    threads: int = 1,
    samples: LiftSamples | None = None,
) -> LiftReport:
    """Monte Carlo factorial moments of the unlabelled lift against the continuum integrals."""
    alpha = AlphaParam.parse(alpha)
    if isinstance(queries, CorrelationQuery):
        queries = [queries]
    proj = samples.proj if samples is not None else project_kernel(kernel, level, max_rank, window, quad)
    if samples is None:
        samples = simulate_lift(proj, alpha, n_samples, seed, threads)
    trace = trace_on_window(kernel, window, quad)
    tail = max(trace - float(np.trace(proj.matrix).real), 0.0)
    checks = []
    for q in queries:
        if q.level != level or q.alpha != alpha:
            raise ContractViolation("query level/alpha must match the lift being verified")
        for lo, hi in q.cells:
            if not window.contains(lo, hi):
                raise ContractViolation(f"query cell [{lo}, {hi}) is outside the window")
        est = estimate_factorial_moments(samples.cell_counts, query_columns(q, window))
        checks.append(
            LiftCheck(
                list(q.cells),
                est.mean,
                est.stderr,
                lhs_parseval(kernel, q, quad),
                rhs_parseval(proj, q),
                parseval_tail_bound(q.m, alpha, tail, trace),
            )
        )
    return LiftReport(str(alpha), level, proj.max_rank, samples.n, seed, samples.marks_contained(), checks)
