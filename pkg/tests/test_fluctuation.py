import numpy as np
import pytest

from oracle_reference import fluctuations_reference, poly_residuals_dense
from qmst.fluctuation import (
    FluctuationEngine,
    box_moments,
    detrended_residuals,
    fluctuation,
    partition,
    residual_matrix,
)


class TestPartition:
    def test_divisible(self):
        p = partition(100, 20)
        assert p.m_s == 5
        assert p.n_boxes == 10
        assert p.starts[:5].tolist() == [0, 20, 40, 60, 80]
        assert p.starts[5:].tolist() == [80, 60, 40, 20, 0]

    def test_remainder(self):
        p = partition(105, 20)
        assert p.n_boxes == 10
        assert p.starts[5:].tolist() == [85, 65, 45, 25, 5]

    def test_scale_exceeds_length(self):
        with pytest.raises(ValueError, match="exceeds"):
            partition(10, 20)


class TestDetrendedResiduals:
    def test_constant_box_zero_residual(self):
        x = np.full(40, 3.7)
        res = detrended_residuals(x, 0, 20, m=1)
        np.testing.assert_allclose(res, 0.0, atol=1e-10)

    def test_quadratic_profile_exact_fit(self):
        # increments whose cumsum is exactly quadratic in i
        i = np.arange(1, 21, dtype=float)
        profile = 3.0 * i**2 - 2.0 * i + 5.0
        x = np.diff(np.concatenate([[0.0], profile]))
        res = detrended_residuals(x, 0, 20, m=2)
        assert np.max(np.abs(res)) < 1e-10 * np.max(np.abs(profile))

    def test_matches_dense_least_squares(self):
        rng = np.random.default_rng(7)
        x = rng.standard_normal(8)
        res = detrended_residuals(x, 0, 8, m=2)
        oracle = poly_residuals_dense(np.cumsum(x), 2)
        np.testing.assert_allclose(res, oracle, atol=1e-9)

    def test_global_profile_offset_absorbed(self):
        # restricting the global cumsum to a box only shifts the profile
        # by a constant, which the fitted constant term absorbs
        rng = np.random.default_rng(8)
        x = rng.standard_normal(100)
        s, m = 20, 2
        glob = np.cumsum(x)
        for start in partition(100, s).starts:
            local = detrended_residuals(x, start, s, m)
            seg = glob[start : start + s]
            Q = np.linalg.qr(np.polynomial.chebyshev.chebvander(np.linspace(-1, 1, s), m))[0]
            via_global = seg - Q @ (Q.T @ seg)
            np.testing.assert_allclose(local, via_global, atol=1e-10)

    def test_out_of_bounds(self):
        with pytest.raises(ValueError):
            detrended_residuals(np.zeros(10), 5, 8)


class TestBoxMoments:
    def test_self_case(self):
        r = np.array([1.0, -2.0, 0.5])
        assert box_moments(r, r) == pytest.approx(np.mean(r * r))

    def test_antialigned(self):
        r = np.array([1.0, -2.0, 0.5])
        assert box_moments(r, -r) == pytest.approx(-np.mean(r * r))

    def test_orthogonal(self):
        assert box_moments([1, -1, 1, -1], [1, 1, -1, -1]) == 0.0


class TestFluctuation:
    def test_self_pair_equal_for_all_q(self):
        rng = np.random.default_rng(9)
        x = rng.standard_normal(200)
        for q in (1.0, 2.0, 4.0, 6.0):
            fs = fluctuation(x, x, 20, q)
            assert fs.f_xy == pytest.approx(fs.f_xx, rel=1e-14)

    def test_q2_is_plain_mean(self):
        rng = np.random.default_rng(10)
        x = rng.standard_normal(200)
        y = rng.standard_normal(200)
        eng = FluctuationEngine(np.vstack([x, y]))
        f2 = eng.pair_profile(0, 1, 20)
        fs = fluctuation(x, y, 20, 2.0)
        assert fs.f_xy == pytest.approx(np.mean(f2), rel=1e-14)

    @pytest.mark.parametrize("q", [1.0, 2.0, 3.0, 4.0])
    def test_matches_bruteforce_oracle(self, q):
        rng = np.random.default_rng(11)
        x = rng.standard_normal(200)
        y = rng.standard_normal(200)
        fs = fluctuation(x, y, 20, q)
        oxy, oxx, oyy = fluctuations_reference(x, y, 20, q)
        assert fs.f_xy == pytest.approx(oxy, rel=1e-10)
        assert fs.f_xx == pytest.approx(oxx, rel=1e-10)
        assert fs.f_yy == pytest.approx(oyy, rel=1e-10)

    def test_sign_preservation_under_negation(self):
        rng = np.random.default_rng(12)
        x = rng.standard_normal(200)
        y = rng.standard_normal(200)
        for q in (1.0, 2.0, 3.0, 5.0):
            a = fluctuation(x, y, 20, q)
            b = fluctuation(x, -y, 20, q)
            assert b.f_xy == pytest.approx(-a.f_xy, rel=1e-12)
            assert b.f_yy == pytest.approx(a.f_yy, rel=1e-12)

    def test_large_q_selects_dominant_box(self):
        # the (count/2M_s)^(1/q) prefactor limits convergence, so keep
        # the box count small to meet the 5% tolerance at q=20
        rng = np.random.default_rng(13)
        x = rng.standard_normal(40) * 0.01
        x[:20] = rng.standard_normal(20) * 10.0  # one loud box
        with pytest.warns(UserWarning):
            eng = FluctuationEngine(x[None, :])
            f2 = eng.auto_profile(0, 20)
            fq = eng.auto_fluctuation(0, 20, 20.0)
        limit = np.sqrt(np.max(f2))
        assert abs(fq ** (1 / 20.0) - limit) / limit < 0.05

    def test_cauchy_schwarz_per_box(self):
        rng = np.random.default_rng(14)
        eng = FluctuationEngine(rng.standard_normal((4, 300)))
        for i in range(4):
            for j in range(i + 1, 4):
                f_xy = eng.pair_profile(i, j, 25)
                bound = np.sqrt(eng.auto_profile(i, 25) * eng.auto_profile(j, 25))
                assert np.all(np.abs(f_xy) <= bound * (1 + 1e-12))

    def test_q_zero_rejected(self):
        rng = np.random.default_rng(15)
        x = rng.standard_normal(100)
        with pytest.raises(ValueError, match="q=0"):
            fluctuation(x, x, 20, 0.0)

    def test_degenerate_constant_with_negative_q(self):
        x = np.zeros(100)
        with pytest.raises(ArithmeticError, match="divergent"):
            fluctuation(x, x, 20, -2.0)

    def test_scale_warning(self):
        rng = np.random.default_rng(16)
        x = rng.standard_normal(100)
        with pytest.warns(UserWarning, match="statistically weak"):
            residual_matrix(x, 40, 2)


def test_engine_cache_matches_direct():
    rng = np.random.default_rng(17)
    series = rng.standard_normal((3, 200))
    eng = FluctuationEngine(series)
    for i in range(3):
        direct = fluctuation(series[i], series[i], 20, 3.0)
        assert eng.auto_fluctuation(i, 20, 3.0) == pytest.approx(direct.f_xx, rel=1e-14)
    # cache hit returns the same object
    assert eng.residuals(0, 20) is eng.residuals(0, 20)
    eng.drop_scale(20)
    np.testing.assert_allclose(eng.residuals(0, 20), residual_matrix(series[0], 20, 2))
