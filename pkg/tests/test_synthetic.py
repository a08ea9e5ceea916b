import numpy as np
import pytest
from scipy import stats

from qmst.fluctuation import FluctuationEngine
from qmst.synthetic import (
    ArfimaParams,
    CorrelatedPairParams,
    arfima_panel,
    correlated_pair_panel,
    ma_weights,
)


class TestMaWeights:
    def test_hand_recurrence(self):
        a = ma_weights(0.4, 5)
        assert a[0] == 1.0
        assert a[1] == pytest.approx(0.4)
        assert a[2] == pytest.approx(0.4 * 1.4 / 2)

    def test_d_zero_degenerates(self):
        a = ma_weights(0.0, 10)
        assert a[0] == 1.0
        np.testing.assert_array_equal(a[1:], 0.0)

    def test_positive_and_power_law_decay(self):
        for d in (0.1, 0.3, 0.45):
            a = ma_weights(d, 500)
            assert np.all(a > 0)
            ratios = a[2:] / a[1:-1]
            assert np.all(ratios < 1.0)
            assert np.all(np.diff(ratios) > 0)  # ratio increases toward 1


class TestArfimaPanel:
    def test_invalid_d(self):
        with pytest.raises(ValueError):
            ArfimaParams(0.5, 100)

    def test_d_zero_is_iid_gaussian(self):
        panel = arfima_panel(1, ArfimaParams(0.0, 10**5, seed=3))
        kurt = stats.kurtosis(panel.series[0], fisher=False)
        assert kurt == pytest.approx(3.0, abs=0.2)

    def test_reproducible_and_order_independent(self):
        p1 = arfima_panel(3, ArfimaParams(0.3, 1000, seed=5))
        p2 = arfima_panel(3, ArfimaParams(0.3, 1000, seed=5))
        np.testing.assert_array_equal(p1.series, p2.series)
        # series i depends only on (seed, i), not on panel width
        p_wide = arfima_panel(5, ArfimaParams(0.3, 1000, seed=5))
        np.testing.assert_array_equal(p_wide.series[:3], p1.series)

    def test_hurst_exponent_matches_long_memory(self):
        # DFA slope of a d=0.3 process targets H = d + 0.5 = 0.8
        panel = arfima_panel(1, ArfimaParams(0.3, 2**17, seed=99))
        eng = FluctuationEngine(panel.series)
        scales = [16, 32, 64, 128, 256, 512, 1024]
        F = [np.sqrt(eng.auto_fluctuation(0, s, 2.0)) for s in scales]
        slope = np.polyfit(np.log(scales), np.log(F), 1)[0]
        assert 0.75 <= slope <= 0.85


class TestCorrelatedPairs:
    def test_gamma_one_identical(self):
        panel = correlated_pair_panel(2, CorrelatedPairParams(1.0, 500, seed=1))
        np.testing.assert_allclose(panel.series[0], panel.series[1])
        np.testing.assert_allclose(panel.series[2], panel.series[3])

    def test_gamma_zero_independent(self):
        panel = correlated_pair_panel(1, CorrelatedPairParams(0.0, 10**5, seed=2))
        r = np.corrcoef(panel.series)[0, 1]
        assert abs(r) < 0.02

    def test_gamma_07_sample_correlation(self):
        panel = correlated_pair_panel(1, CorrelatedPairParams(0.7, 10**5, seed=8))
        r = np.corrcoef(panel.series)[0, 1]
        assert r == pytest.approx(0.7, abs=0.02)

    def test_invalid_gamma(self):
        with pytest.raises(ValueError):
            CorrelatedPairParams(1.5, 100)

    def test_labels_interleaved(self):
        panel = correlated_pair_panel(2, CorrelatedPairParams(0.5, 64, seed=0))
        assert panel.labels == ["x000", "y000", "x001", "y001"]
