import itertools

import numpy as np
import pytest
from scipy import integrate

from alphadpp.errors import ConfigurationError, ResourceLimitError
from alphadpp.kernels import FiniteRank, Gaussian, RankOneIndicator, SineWindow, nystrom_eigenvalues, trace_on_window
from alphadpp.projection import (
    choose_rank,
    cycle_integral,
    hausdorff,
    permutation_cycles,
    project_kernel,
    spectrum_check,
    tail_trace,
    truncated_kernel_eval,
)
from alphadpp.quadrature import QuadratureSpec
from alphadpp.tree import BasisIndex, TreeIndex, Window, eval_basis

UNIT = Window(0.0, 1.0)
GAUSS = Gaussian(1.0, 0.5)
HAAR2 = FiniteRank(((0.7, {"(0)": 1.0}), (0.3, {"(0;0)": 1.0})))


def gl_tensor_cycle(kernel, cells, sigma, order=24):
    """Independent oracle: one Gauss-Legendre rule of high order per cell, full tensor grid."""
    t, w = np.polynomial.legendre.leggauss(order)
    m = len(cells)
    xs, ws = [], []
    for lo, hi in cells:
        xs.append(lo + (hi - lo) * (t + 1) / 2)
        ws.append(w * (hi - lo) / 2)
    grids = np.meshgrid(*xs, indexing="ij")
    wt = np.ones_like(grids[0])
    for k, wk in enumerate(np.meshgrid(*ws, indexing="ij")):
        wt = wt * wk
    prod = np.ones_like(grids[0], dtype=complex)
    for n in range(m):
        prod = prod * kernel(grids[n], grids[sigma[n]])
    return complex(np.sum(wt * prod))


class TestProjectExamples:
    def test_indicator(self):
        p = project_kernel(RankOneIndicator(), 1, 3, UNIT)
        want = np.zeros((4, 4))
        want[0, 0] = 1.0
        assert p.indices[0] == BasisIndex(1, TreeIndex.of(0))
        assert np.max(np.abs(p.matrix - want)) < 1e-14

    def test_single_haar_eigenfunction(self):
        p = project_kernel(FiniteRank(((0.7, {"(0;0)": 1.0}),)), 1, 3, UNIT)
        pos = p.position(BasisIndex(1, TreeIndex.of(0, 0)))
        want = np.zeros((4, 4))
        want[pos, pos] = 0.7
        assert np.max(np.abs(p.matrix - want)) < 1e-14

    def test_gaussian_trace(self):
        p = project_kernel(GAUSS, 1, 5, UNIT)
        assert abs(np.trace(p.matrix).real - trace_on_window(GAUSS, UNIT)) < 1e-3

    def test_hermitian_and_read_only(self):
        p = project_kernel(SineWindow(2.0), 2, 3, Window(-1.0, 1.0))
        assert p.hermitian_error() < 1e-10
        with pytest.raises(ValueError):
            p.matrix[0, 0] = 1.0

    def test_under_resolved_quadrature(self):
        with pytest.raises(ConfigurationError):
            project_kernel(GAUSS, 1, 4, UNIT, QuadratureSpec(8, refinement_level=3))

    def test_entries_against_dblquad(self):
        p = project_kernel(GAUSS, 1, 3, UNIT)
        for a, b in [(0, 0), (0, 1), (1, 1), (2, 3)]:
            fa, fb = p.indices[a], p.indices[b]
            ref = 0.0
            # integrate piecewise so the oracle never straddles a basis jump
            edges = np.linspace(0, 1, 5)
            for x0, x1 in zip(edges, edges[1:]):
                for y0, y1 in zip(edges, edges[1:]):
                    v, _ = integrate.dblquad(
                        lambda y, x: GAUSS(x, y).real * eval_basis(fa, x) * eval_basis(fb, y),
                        x0, x1, y0, y1, epsabs=1e-13, epsrel=1e-13)
                    ref += v
            assert abs(p.matrix[a, b] - ref) < 1e-10


class TestParsevalRows:
    def test_row_identity(self, rng):
        p = project_kernel(GAUSS, 1, 4, UNIT)
        t, w = np.polynomial.legendre.leggauss(16)
        edges = np.linspace(0, 1, 2 ** 4 + 1)
        x = np.concatenate([(a + (b - a) * (t + 1) / 2) for a, b in zip(edges, edges[1:])])
        wx = np.concatenate([w * (b - a) / 2 for a, b in zip(edges, edges[1:])])
        phi = np.stack([eval_basis(b, x) for b in p.indices])
        kmat = GAUSS(x[:, None], x[None, :])
        for _ in range(5):
            pc = rng.standard_normal(p.dim) + 1j * rng.standard_normal(p.dim)
            qc = rng.standard_normal(p.dim) + 1j * rng.standard_normal(p.dim)
            P, Q = pc @ phi, qc @ phi
            lhs = np.sum(wx[:, None] * wx[None, :] * kmat * np.conj(P)[:, None] * Q[None, :])
            rhs = np.conj(pc) @ p.matrix @ qc
            assert abs(lhs - rhs) < 1e-8

    def test_diagonal_monotone(self):
        prev = -np.inf
        total = trace_on_window(GAUSS, UNIT)
        for r in range(1, 7):
            s = np.trace(project_kernel(GAUSS, 1, r, UNIT).matrix).real
            assert s >= prev - 1e-12 and s <= total + 1e-12
            prev = s


class TestTruncated:
    def test_reproduces_span_kernel(self, rng):
        x, y = rng.random(300), rng.random(300)
        for k, level, r in [(RankOneIndicator(), 1, 1), (HAAR2, 1, 2), (HAAR2, 2, 1)]:
            p = project_kernel(k, level, r, UNIT)
            assert np.max(np.abs(truncated_kernel_eval(p, x, y) - k(x, y))) < 1e-12

    def test_hermitian(self, rng):
        p = project_kernel(SineWindow(2.0), 1, 4, UNIT)
        x, y = rng.random(100), rng.random(100)
        assert np.max(np.abs(truncated_kernel_eval(p, x, y) - np.conj(truncated_kernel_eval(p, y, x)))) < 1e-12

    def test_grid_norm_decreases(self):
        g = (np.arange(64) + 0.5) / 64
        X, Y = np.meshgrid(g, g, indexing="ij")
        errs = [np.linalg.norm(truncated_kernel_eval(project_kernel(GAUSS, 1, r, UNIT), X, Y) - GAUSS(X, Y))
                for r in range(1, 7)]
        assert all(b < a for a, b in zip(errs, errs[1:]))


class TestTail:
    def test_span_kernels_zero(self):
        assert abs(tail_trace(RankOneIndicator(), project_kernel(RankOneIndicator(), 1, 1, UNIT))) < 1e-10
        assert abs(tail_trace(HAAR2, project_kernel(HAAR2, 1, 2, UNIT))) < 1e-10

    def test_gaussian_decreasing(self):
        tails = [tail_trace(GAUSS, project_kernel(GAUSS, 1, r, UNIT)) for r in range(1, 7)]
        assert tails[4] < tails[1]
        assert all(b < a for a, b in zip(tails, tails[1:]))
        assert min(tails) >= -1e-8

    def test_rank_one_tail_oracle(self):
        # R = 1: the only label is the indicator of [0,1); tail = trace - double integral of K
        ref, _ = integrate.dblquad(lambda y, x: GAUSS(x, y).real, 0, 1, 0, 1, epsabs=1e-13)
        got = tail_trace(GAUSS, project_kernel(GAUSS, 1, 1, UNIT))
        assert abs(got - (0.5 - ref)) < 1e-12

    def test_choose_rank(self):
        r = choose_rank(GAUSS, 1, UNIT, 1e-3)
        tr = trace_on_window(GAUSS, UNIT)
        assert tail_trace(GAUSS, project_kernel(GAUSS, 1, r, UNIT)) <= 1e-3 * tr
        assert tail_trace(GAUSS, project_kernel(GAUSS, 1, r - 1, UNIT)) > 1e-3 * tr
        assert choose_rank(RankOneIndicator(), 1, UNIT) == 1


class TestCycles:
    def test_permutation_cycles(self):
        assert permutation_cycles((0, 1, 2)) == [(0,), (1,), (2,)]
        assert sorted(map(len, permutation_cycles((1, 2, 0, 3)))) == [1, 3]

    def test_indicator_examples(self):
        k = RankOneIndicator()
        assert cycle_integral(k, [(0, 1)], (0,)) == pytest.approx(1.0)
        assert cycle_integral(k, [(0, 1), (0, 1)], (1, 0)) == pytest.approx(1.0)
        p = project_kernel(k, 1, 2, UNIT)
        assert cycle_integral(p, [(0, 1), (0, 1)], (1, 0)) == pytest.approx(1.0)

    def test_exact_route_matches_tensor_oracle(self):
        cells = [(0.0, 0.5), (0.5, 1.0), (0.0, 0.5)]
        for m in (1, 2, 3):
            for sigma in itertools.permutations(range(m)):
                got = cycle_integral(GAUSS, cells[:m], sigma)
                ref = gl_tensor_cycle(GAUSS, cells[:m], sigma)
                assert abs(got - ref) < 1e-12

    def test_projected_route_converges(self):
        cells = [(0.0, 1.0)] * 3
        sigma = (1, 2, 0)
        ref = gl_tensor_cycle(GAUSS, cells, sigma)
        gaps = [abs(cycle_integral(project_kernel(GAUSS, 1, r, UNIT), cells, sigma) - ref) for r in range(1, 7)]
        assert gaps[-1] < 1e-3
        assert all(b < a for a, b in zip(gaps, gaps[1:]))

    def test_guard(self):
        with pytest.raises(ResourceLimitError):
            cycle_integral(GAUSS, [(0, 1)] * 5, (0, 1, 2, 3, 4))


class TestSpectrum:
    def test_indicator(self):
        p = project_kernel(RankOneIndicator(), 1, 4, UNIT)
        assert p.eigenvalues()[0] == pytest.approx(1.0, abs=1e-10)
        assert spectrum_check(RankOneIndicator(), p).distance < 1e-8

    def test_span_kernel_exact(self):
        p = project_kernel(HAAR2, 1, 3, UNIT)
        ev = p.eigenvalues()
        assert np.allclose(ev[:2], [0.7, 0.3], atol=1e-14) and np.all(np.abs(ev[2:]) < 1e-14)
        assert spectrum_check(HAAR2, p).distance < 1e-8

    def test_gaussian_leading(self):
        p = project_kernel(GAUSS, 1, 6, UNIT)
        rep = spectrum_check(GAUSS, p, grid_n=512, n_leading=3)
        assert rep.passed and rep.distance < 1e-2

    def test_hausdorff(self):
        assert hausdorff([1, 2], [1, 2.5]) == pytest.approx(0.5)
        assert hausdorff([1], [1, 3]) == pytest.approx(2.0)


class TestExport:
    def test_dict(self):
        p = project_kernel(HAAR2, 1, 2, UNIT)
        d = p.to_dict()
        assert d["indices"] == ["(0)", "(0;0)"]
        assert d["entries"][0] == pytest.approx([0.7, 0.0])
        assert len(d["entries"]) == 4

    def test_csv_rows(self):
        header, rows = project_kernel(HAAR2, 1, 2, UNIT).csv_rows()
        assert header[-2:] == ["re", "im"] and len(rows) == 4
