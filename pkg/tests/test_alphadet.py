from fractions import Fraction
import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from alphadpp.alphadet import (
    AlphaParam,
    as_square_matrix,
    cycle_count,
    det_alpha,
    det_alpha_batch,
    det_alpha_dp,
    det_alpha_naive,
    permanent_ryser,
)
from alphadpp.errors import ContractViolation, InadmissibleAlpha, ResourceLimitError

from conftest import ADMISSIBLE, random_disk_matrix, random_hermitian


def brute_force(a, alpha):
    """Textbook permutation sum with cycles counted by hand."""
    n = a.shape[0]
    total = 0j
    for perm in itertools.permutations(range(n)):
        seen, nu = set(), 0
        for s in range(n):
            if s not in seen:
                nu += 1
                k = s
                while k not in seen:
                    seen.add(k)
                    k = perm[k]
        prod = 1 + 0j
        for i in range(n):
            prod *= a[i, perm[i]]
        total += float(alpha) ** (n - nu) * prod
    return total


class TestAlphaParam:
    @pytest.mark.parametrize("text,value", [("-1", -1), ("-1/2", Fraction(-1, 2)), ("2", 2), ("2/5", Fraction(2, 5)),
                                            ("1", 1), ("2/3", Fraction(2, 3)), ("-1/7", Fraction(-1, 7))])
    def test_admissible(self, text, value):
        assert AlphaParam.parse(text).value == value

    def test_reduced_two_over_m(self):
        # 1/3 = 2/6 and 1/2 = 2/4 belong to the set {2/m}
        assert AlphaParam.parse("1/3").m == 6
        assert AlphaParam.parse("2/4").value == Fraction(1, 2)

    @pytest.mark.parametrize("text", ["3/4", "-2/3", "0", "3", "-2", "5/2", "x", "1/0", "0.5"])
    def test_rejected(self, text):
        with pytest.raises(InadmissibleAlpha):
            AlphaParam.parse(text)

    def test_float_rejected(self):
        with pytest.raises(InadmissibleAlpha):
            AlphaParam.parse(-0.5)

    def test_m_and_bounds(self):
        a = AlphaParam.parse("-1/4")
        assert a.m == 4 and a.negative and a.spectral_bound == 4
        b = AlphaParam.parse("2/3")
        assert b.m == 3 and not b.negative


class TestCycleCount:
    def test_identity(self):
        assert cycle_count((1, 2, 3, 4, 5)) == 5

    def test_four_cycle(self):
        assert cycle_count((2, 3, 4, 1)) == 1

    def test_transposition(self):
        assert cycle_count((2, 1, 3)) == 2

    def test_zero_based(self):
        assert cycle_count((1, 0, 2)) == 2

    @pytest.mark.parametrize("bad", [(1, 1, 2), (0, 2), (2, 3, 4)])
    def test_not_bijection(self, bad):
        with pytest.raises(ContractViolation):
            cycle_count(bad)


class TestSmallValues:
    A = np.array([[1, 2], [3, 4]])

    def test_one_by_one(self):
        for a in ADMISSIBLE:
            assert det_alpha_naive([[3]], a) == 3
            assert det_alpha_dp([[3]], a) == 3

    @pytest.mark.parametrize("alpha,expected", [("-1", -2), ("-1/2", 1), ("2", 16), ("1", 10)])
    def test_two_by_two(self, alpha, expected):
        assert det_alpha_naive(self.A, alpha) == pytest.approx(expected)
        assert det_alpha_dp(self.A, alpha) == pytest.approx(expected)

    def test_diagonal(self, rng):
        d = rng.standard_normal(7) + 1j * rng.standard_normal(7)
        for a in ADMISSIBLE:
            assert det_alpha_dp(np.diag(d), a) == pytest.approx(np.prod(d), rel=1e-12)

    def test_empty(self):
        assert det_alpha_dp(np.zeros((0, 0)), "-1") == 1


class TestAgreement:
    def test_dp_vs_naive_vs_brute(self, rng):
        for n in range(1, 6):
            a = random_disk_matrix(rng, n)
            for alpha in ADMISSIBLE:
                ref = brute_force(a, AlphaParam.parse(alpha))
                assert abs(det_alpha_naive(a, alpha) - ref) <= 1e-12 * max(1, abs(ref))
                assert abs(det_alpha_dp(a, alpha) - ref) <= 1e-12 * max(1, abs(ref))

    def test_hermitian_six(self, rng):
        a = random_hermitian(rng, 6)
        x, y = det_alpha_dp(a, "-1/3"), det_alpha_naive(a, "-1/3")
        assert abs(x - y) <= 1e-10 * abs(y)

    def test_lu(self, rng):
        for n in range(1, 9):
            a = random_disk_matrix(rng, n)
            ref = np.linalg.det(a)
            assert abs(det_alpha(a, "-1") - ref) <= 1e-10 * max(1, abs(ref))

    def test_ryser(self, rng):
        for n in range(1, 9):
            a = random_disk_matrix(rng, n)
            ref = permanent_ryser(a)
            assert abs(det_alpha(a, "1") - ref) <= 1e-10 * max(1, abs(ref))

    def test_ryser_known(self):
        assert permanent_ryser(np.ones((4, 4))) == pytest.approx(24)
        assert permanent_ryser([[1, 2], [3, 4]]) == pytest.approx(10)

    def test_batch(self, rng):
        mats = np.stack([random_disk_matrix(rng, 3) for _ in range(10)])
        for alpha in ADMISSIBLE:
            got = det_alpha_batch(mats, alpha)
            ref = [det_alpha_naive(m, alpha) for m in mats]
            assert np.allclose(got, ref, atol=1e-13)

    def test_alpha_zero_limit_trend(self, rng):
        # as alpha -> 0 the value approaches the diagonal product
        a = random_disk_matrix(rng, 5)
        diag = np.prod(np.diag(a))
        gaps = [abs(det_alpha_dp(a, f"-1/{m}") - diag) for m in (1, 10, 100, 1000)]
        assert gaps == sorted(gaps, reverse=True)


class TestGuards:
    def test_non_square(self):
        with pytest.raises(ContractViolation):
            det_alpha_naive(np.ones((2, 3)), "-1")
        with pytest.raises(ContractViolation):
            det_alpha_dp(np.ones((2, 3)), "-1")

    def test_naive_guard(self):
        with pytest.raises(ResourceLimitError):
            det_alpha_naive(np.eye(11), "-1")

    def test_naive_guard_configurable(self):
        assert det_alpha_naive(np.eye(3), "-1", max_n=3) == 1
        with pytest.raises(ResourceLimitError):
            det_alpha_naive(np.eye(4), "-1", max_n=3)

    def test_dp_guard(self):
        with pytest.raises(ResourceLimitError):
            det_alpha_dp(np.eye(23), "-1")

    def test_hermitian_flag(self):
        with pytest.raises(ContractViolation):
            as_square_matrix([[1, 2], [3, 4]], hermitian=True)
        as_square_matrix([[1, 2j], [-2j, 4]], hermitian=True)


@st.composite
def matrix_and_perm(draw):
    n = draw(st.integers(1, 6))
    vals = draw(st.lists(st.complex_numbers(max_magnitude=1.0, allow_nan=False, allow_infinity=False),
                         min_size=n * n, max_size=n * n))
    perm = draw(st.permutations(range(n)))
    alpha = draw(st.sampled_from(ADMISSIBLE))
    return np.array(vals, dtype=complex).reshape(n, n), list(perm), alpha


@settings(max_examples=60, deadline=None)
@given(matrix_and_perm())
def test_permutation_invariance(data):
    a, perm, alpha = data
    p = np.eye(len(perm))[perm]
    lhs = det_alpha_dp(p @ a @ p.T, alpha)
    rhs = det_alpha_dp(a, alpha)
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(rhs))


def test_row_linearity(rng):
    for alpha in ADMISSIBLE:
        for row in range(4):
            a = random_disk_matrix(rng, 4)
            u, v = rng.standard_normal(4), rng.standard_normal(4)
            s, t = 0.7 - 0.2j, -1.3
            au, av, aw = a.copy(), a.copy(), a.copy()
            au[row], av[row], aw[row] = u, v, s * u + t * v
            combo = s * det_alpha_dp(au, alpha) + t * det_alpha_dp(av, alpha)
            assert abs(det_alpha_dp(aw, alpha) - combo) <= 1e-12 * max(1.0, abs(combo))
