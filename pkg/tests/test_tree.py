import itertools

import numpy as np
import pytest
from scipy import stats

from alphadpp.errors import ContractViolation
from alphadpp.tree import (
    BasisIndex,
    TreeIndex,
    Window,
    basis_cell_values,
    basis_indices,
    cell_at,
    cell_index,
    cell_of,
    children,
    eval_basis,
    mark_measure,
    sample_mark,
    theta_inverse,
    theta_shift,
)

UNIT = Window(0.0, 1.0)


def T(*e):
    return TreeIndex.of(*e)


class TestCells:
    def test_level_one(self):
        assert cell_of(1, T(5)) == (5.0, 6.0)

    def test_corrected_offset(self):
        assert cell_of(3, T(0, 1, 1)) == (0.75, 1.0)
        assert cell_of(2, T(-1, 1)) == (-0.5, 0.0)

    def test_rank_mismatch(self):
        with pytest.raises(ContractViolation):
            cell_of(2, T(0, 1, 1))

    def test_children(self):
        assert children(1, T(0)) == (T(0, 0), T(0, 1))
        assert children(2, T(0, 1)) == (T(0, 1, 0), T(0, 1, 1))
        lo, hi = cell_of(2, T(0, 1))
        a, b = (cell_of(3, c) for c in children(2, T(0, 1)))
        assert a[0] == lo and a[1] == b[0] and b[1] == hi

    @pytest.mark.parametrize("level", range(1, 7))
    def test_partition(self, level):
        cells = sorted(cell_of(level, c) for c in UNIT.cells(level))
        assert cells[0][0] == 0.0 and cells[-1][1] == 1.0
        for (a, b), (c, d) in zip(cells, cells[1:]):
            assert b == c and b - a == 2.0 ** (1 - level)

    @pytest.mark.parametrize("level", range(1, 6))
    def test_refinement(self, level):
        for c in Window(-2.0, 2.0).cells(level):
            lo, hi = cell_of(level, c)
            kids = [cell_of(level + 1, k) for k in children(level, c)]
            assert kids[0] == (lo, (lo + hi) / 2) and kids[1] == ((lo + hi) / 2, hi)

    def test_cell_at_and_index_round_trip(self):
        for level in range(1, 6):
            for k in range(-8, 8):
                t = cell_index(k, level)
                lo, _ = cell_of(level, t)
                assert cell_at(lo, level) == t


class TestLabels:
    def test_round_trip(self):
        t = TreeIndex.parse("(0;010)")
        assert t == T(0, 0, 1, 0) and t.label() == "(0;010)"
        assert TreeIndex.parse("(-3)").label() == "(-3)"

    def test_parent_truncate(self):
        t = T(2, 1, 0, 1)
        assert t.parent() == T(2, 1, 0)
        assert t.truncate(2) == T(2, 1)
        assert t.rank == 4

    def test_ordering_deterministic(self):
        labels = [T(0, 1), T(0), T(-1, 0, 0), T(0, 0)]
        assert sorted(labels) == sorted(reversed(labels))

    def test_bad_bits(self):
        with pytest.raises(ContractViolation):
            T(0, 2)


class TestShift:
    def test_identity_at_level_one(self):
        s = theta_shift(1, T(3, 0, 1))
        assert s.block == (3,) and s.tail == (0, 1)

    def test_regroup(self):
        s = theta_shift(2, T(0, 1, 0, 1))
        assert s.block == (0, 1) and s.tail == (0, 1) and s.rank == 3

    def test_round_trip(self, rng):
        for _ in range(200):
            r = int(rng.integers(1, 8))
            j = T(int(rng.integers(-5, 5)), *rng.integers(0, 2, r - 1).tolist())
            level = int(rng.integers(1, r + 1))
            assert theta_inverse(theta_shift(level, j)) == j

    def test_rank_too_small(self):
        with pytest.raises(ContractViolation):
            theta_shift(3, T(0, 1))


class TestBasis:
    def test_enumeration_examples(self):
        assert [b.label() for b in basis_indices(1, 1, UNIT)] == ["(0)"]
        assert [b.label() for b in basis_indices(1, 2, UNIT)] == ["(0)", "(0;0)"]
        assert {b.label() for b in basis_indices(1, 3, UNIT)} == {"(0)", "(0;0)", "(0;00)", "(0;10)"}

    @pytest.mark.parametrize("level,rank,window", [(1, 4, Window(0, 1)), (2, 3, Window(0, 2)), (3, 5, Window(-1, 1))])
    def test_count(self, level, rank, window):
        idx = basis_indices(level, rank, window)
        assert len(idx) == int(window.length * 2 ** (level - 1) * 2 ** (rank - 1))
        assert len(set(idx)) == len(idx)
        for b in idx:
            lo, hi = b.support
            assert window.a <= lo and hi <= window.b

    def test_misaligned(self):
        with pytest.raises(ContractViolation):
            basis_indices(2, 2, Window(0.25, 1.0))

    def test_last_bit_rule(self):
        with pytest.raises(ContractViolation):
            BasisIndex(1, T(0, 1))

    def test_values(self):
        assert eval_basis(BasisIndex(1, T(0)), 0.3) == 1.0
        assert eval_basis(BasisIndex(2, T(0, 0)), 0.3) == pytest.approx(np.sqrt(2))
        haar = BasisIndex(1, T(0, 0))
        assert eval_basis(haar, 0.25) == 1.0 and eval_basis(haar, 0.75) == -1.0
        assert eval_basis(haar, 1.0) == 0.0

    def test_support_rule(self):
        # rank >= 2: support is the level-(l+r-2) cell of the truncated index
        b = BasisIndex(2, T(0, 1, 1, 0))
        assert b.rank == 3
        assert b.support == cell_of(3, T(0, 1, 1))

    @pytest.mark.parametrize("level", [1, 2, 3])
    @pytest.mark.parametrize("rank", [1, 2, 3, 4, 5])
    def test_gram(self, level, rank):
        idx = basis_indices(level, rank, UNIT)
        fine = level + rank - 1
        phi = basis_cell_values(idx, fine, UNIT)
        gram = phi @ phi.T * 2.0 ** (1 - fine)
        assert np.max(np.abs(gram - np.eye(len(idx)))) < 1e-12

    @pytest.mark.parametrize("level", [1, 2, 3])
    @pytest.mark.parametrize("rank", [1, 2, 3, 4, 5])
    def test_span_reconstruction(self, level, rank):
        idx = basis_indices(level, rank, UNIT)
        fine = level + rank - 1
        phi = basis_cell_values(idx, fine, UNIT)
        h = 2.0 ** (1 - fine)
        for k in range(phi.shape[1]):
            target = np.zeros(phi.shape[1])
            target[k] = 1.0
            coef = phi @ target * h           # <1_cell, f_i>
            recon = coef @ phi
            assert np.max(np.abs(recon - target)) < 1e-10

    def test_pointwise_matches_cell_values(self, rng):
        idx = basis_indices(2, 4, UNIT)
        fine = 6
        phi = basis_cell_values(idx, fine, UNIT)
        x = rng.random(500)
        k = np.floor(x * 2 ** (fine - 1)).astype(int)
        for p, b in enumerate(idx):
            assert np.array_equal(eval_basis(b, x), phi[p, k])

    @pytest.mark.parametrize("level", [1, 2, 3])
    @pytest.mark.parametrize("rank", [1, 2, 3, 4])
    def test_support_law(self, level, rank):
        """int_A f_i f_j = 1 iff i == j and B_i in A, for every union A of level-l cells."""
        idx = basis_indices(level, rank, UNIT)
        fine = level + rank - 1
        phi = basis_cell_values(idx, fine, UNIT)
        h = 2.0 ** (1 - fine)
        cells = UNIT.cells(level)
        per = 2 ** (fine - level)
        for mask in itertools.product([0, 1], repeat=len(cells)):
            ind = np.repeat(np.array(mask, dtype=float), per)
            got = (phi * ind) @ phi.T * h
            want = np.zeros_like(got)
            for p, b in enumerate(idx):
                lo, hi = b.support
                inside = any(m and cell_of(level, c)[0] <= lo and hi <= cell_of(level, c)[1]
                             for m, c in zip(mask, cells))
                want[p, p] = 1.0 if inside else 0.0
            assert np.array_equal(np.round(got, 12), want)

    def test_level_basis_embeds_in_level_one(self, rng):
        # every rank >= 2 function at level l is a level-1 function of the unshifted label
        x = rng.random(400) * 2 - 1
        for level in (2, 3):
            for b in basis_indices(level, 4, Window(-1, 1)):
                if b.rank < 2:
                    continue
                j = theta_inverse(b.shifted())
                other = BasisIndex(1, j)
                assert other.rank >= 2
                assert np.array_equal(eval_basis(b, x), eval_basis(other, x))


class TestMarks:
    def test_measure(self):
        for b in basis_indices(2, 4, UNIT):
            mm = mark_measure(b)
            assert mm.total_mass == pytest.approx(1.0, abs=1e-15)
            assert mm.density == pytest.approx(eval_basis(b, mm.support[0]) ** 2)

    def test_ranges(self, rng):
        b = BasisIndex(1, T(3))
        xs = [sample_mark(b, rng) for _ in range(1000)]
        assert min(xs) >= 3 and max(xs) < 4

    def test_mean(self, rng):
        b = BasisIndex(1, T(0))
        xs = np.array([sample_mark(b, rng) for _ in range(100_000)])
        se = xs.std() / np.sqrt(xs.size)
        assert abs(xs.mean() - 0.5) < 3 * se

    def test_ks_rank_two(self, rng):
        b = BasisIndex(1, T(0, 0))
        assert b.support == (0.0, 1.0)
        xs = np.array([sample_mark(b, rng) for _ in range(100_000)])
        assert stats.kstest(xs, "uniform").pvalue > 0.01
