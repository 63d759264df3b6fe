import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import gammaincc as scipy_gammaincc
from scipy.stats import chi2, chi2_contingency

from lectometer.errors import DegenerateInputError, RangeError, ShapeError
from lectometer.stats import chi2_sf, chi_square_independence, gammaincc, holm_bonferroni


class TestGamma:
    @pytest.mark.parametrize("a", [0.5, 1.0, 1.5, 2.0, 5.0, 12.5, 40.0])
    @pytest.mark.parametrize("x", [1e-6, 0.01, 0.5, 1.0, 2.0, 4.9, 10.0, 35.0, 120.0])
    def test_against_scipy(self, a, x):
        assert gammaincc(a, x) == pytest.approx(scipy_gammaincc(a, x), abs=1e-10)

    def test_domain(self):
        assert gammaincc(2.0, 0.0) == 1.0
        with pytest.raises(RangeError):
            gammaincc(0.0, 1.0)
        with pytest.raises(RangeError):
            gammaincc(1.0, -1.0)

    @settings(max_examples=1000)
    @given(st.floats(0, 200), st.integers(1, 40))
    def test_chi2_sf_oracle(self, stat, dof):
        assert chi2_sf(stat, dof) == pytest.approx(chi2.sf(stat, dof), abs=1e-8)


class TestChiSquare:
    def test_independent(self):
        stat, dof, p = chi_square_independence([[10, 10], [10, 10]])
        assert stat == 0.0 and dof == 1 and p == 1.0

    def test_worked_example(self):
        stat, dof, p = chi_square_independence([[20, 10], [10, 20]])
        # N (ad - bc)^2 / (r1 r2 c1 c2)
        by_hand = 60 * (20 * 20 - 10 * 10) ** 2 / (30 * 30 * 30 * 30)
        assert stat == pytest.approx(by_hand, abs=1e-12)
        assert stat == pytest.approx(6.667, abs=1e-3)
        assert dof == 1
        assert p == pytest.approx(0.0098, abs=5e-4)
        assert p == pytest.approx(chi2.sf(by_hand, 1), abs=1e-10)

    def test_zero_margin(self):
        with pytest.raises(DegenerateInputError):
            chi_square_independence([[0, 0], [3, 4]])

    def test_shape(self):
        with pytest.raises(ShapeError):
            chi_square_independence([[1, 2]])
        with pytest.raises(ShapeError):
            chi_square_independence([[1, 2], [3]])

    tables = st.tuples(st.integers(2, 4), st.integers(2, 4)).flatmap(
        lambda rc: st.lists(st.lists(st.integers(1, 60), min_size=rc[1], max_size=rc[1]),
                            min_size=rc[0], max_size=rc[0]))

    @settings(max_examples=500, deadline=None)
    @given(tables, st.integers(2, 5))
    def test_properties_and_oracle(self, table, k):
        stat, dof, p = chi_square_independence(table)
        ref = chi2_contingency(table, correction=False)
        assert stat == pytest.approx(ref[0], rel=1e-9, abs=1e-9)
        assert dof == ref[2]
        assert p == pytest.approx(ref[1], abs=1e-8)
        assert stat >= 0 and 0 <= p <= 1
        scaled = chi_square_independence([[k * v for v in r] for r in table])[0]
        assert scaled == pytest.approx(k * stat, rel=1e-9, abs=1e-9)


class TestHolm:
    def test_worked_example(self):
        adj, rej = holm_bonferroni([0.01, 0.02, 0.04], 0.05)
        assert adj == pytest.approx([0.03, 0.04, 0.04])
        assert rej == [True, True, True]

    def test_single(self):
        assert holm_bonferroni([1.0]) == ([1.0], [False])

    def test_step_down_stops(self):
        adj, rej = holm_bonferroni([0.001, 0.04, 0.03], 0.05)
        assert rej == [True, False, False]
        assert adj == pytest.approx([0.003, 0.06, 0.06])

    def test_input_order_restored(self):
        adj, _ = holm_bonferroni([0.04, 0.01, 0.02])
        assert adj == pytest.approx([0.04, 0.03, 0.04])

    def test_range(self):
        with pytest.raises(RangeError):
            holm_bonferroni([0.5, 1.2])

    @settings(max_examples=1000)
    @given(st.lists(st.floats(0, 1), min_size=1, max_size=12), st.floats(0.001, 0.2))
    def test_properties(self, ps, alpha):
        adj, rej = holm_bonferroni(ps, alpha)
        assert all(a >= p for a, p in zip(adj, ps))
        assert all(a <= 1.0 for a in adj)
        order = sorted(range(len(ps)), key=lambda k: ps[k])
        sorted_adj = [adj[k] for k in order]
        assert sorted_adj == sorted(sorted_adj)
        flags = [rej[k] for k in order]
        assert flags == sorted(flags, reverse=True)  # rejections form a prefix
        assert all(r == (a < alpha) for r, a in zip(rej, adj))
        if len(ps) == 1:
            assert adj == [ps[0]]
