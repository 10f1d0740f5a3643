import numpy as np
import pytest

from quartercast import (
    FiscalQuarter,
    QuarterlySeries,
    ValidationError,
    ape,
    mape,
    relative_improvement,
    yoy_growth,
)

START = FiscalQuarter(2009, 1)


class TestApe:
    def test_exact_forecast(self):
        assert ape(100.0, 100.0) == 0.0

    def test_ten_percent(self):
        assert ape(100.0, 90.0) == 10.0

    def test_hand_arithmetic(self):
        assert ape(200.0, 207.0) == pytest.approx(3.5, rel=1e-12)

    def test_zero_actual(self):
        with pytest.raises(ValidationError):
            ape(0.0, 5.0)

    def test_nonnegative_and_symmetric_zero(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            a = rng.uniform(-100, 100)
            if a == 0:
                continue
            f = rng.uniform(-100, 100)
            assert ape(a, f) >= 0.0
            assert ape(a, a) == 0.0


class TestMape:
    def test_all_exact(self):
        assert mape([(100.0, 100.0), (50.0, 50.0)]) == 0.0

    def test_symmetric_errors(self):
        assert mape([(100.0, 90.0), (100.0, 110.0)]) == 10.0

    def test_hand_mean(self):
        assert mape([(100.0, 95.0), (200.0, 210.0), (400.0, 420.0)]) == pytest.approx(5.0)

    def test_empty(self):
        with pytest.raises(ValidationError):
            mape([])

    def test_singleton_equals_ape(self):
        rng = np.random.default_rng(9)
        for _ in range(50):
            a, f = rng.uniform(1, 100), rng.uniform(1, 100)
            assert mape([(a, f)]) == ape(a, f)


class TestRelativeImprovement:
    def test_hand_arithmetic(self):
        assert relative_improvement(4.0, 3.0) == 25.0

    def test_equal_errors(self):
        assert relative_improvement(2.0, 2.0) == 0.0

    def test_perfect_candidate(self):
        assert relative_improvement(1.0, 0.0) == 100.0

    def test_zero_baseline(self):
        with pytest.raises(ValidationError):
            relative_improvement(0.0, 1.0)

    def test_scale_invariance(self):
        rng = np.random.default_rng(4)
        for _ in range(100):
            x, y, c = rng.uniform(0.1, 10), rng.uniform(0.0, 10), rng.uniform(0.1, 50)
            assert relative_improvement(c * x, c * y) == pytest.approx(
                relative_improvement(x, y), rel=1e-12
            )


class TestYoyGrowth:
    def _series(self, values):
        return QuarterlySeries("s", START, values)

    def test_ten_percent_growth(self):
        s = self._series([100.0] * 4 + [110.0] * 4)
        assert yoy_growth(s, FiscalQuarter(2010, 1)) == pytest.approx(0.10)

    def test_no_growth(self):
        s = self._series([100.0] * 8)
        assert yoy_growth(s, FiscalQuarter(2010, 2)) == 0.0

    def test_negative_growth(self):
        s = self._series([100.0] * 4 + [75.0] * 4)
        assert yoy_growth(s, FiscalQuarter(2010, 3)) == pytest.approx(-0.25)

    def test_out_of_range(self):
        s = self._series([100.0] * 8)
        with pytest.raises(ValidationError):
            yoy_growth(s, FiscalQuarter(2009, 3))  # no prior-year quarter

    def test_zero_denominator(self):
        s = self._series([0.0] * 4 + [5.0] * 4)
        with pytest.raises(ValidationError):
            yoy_growth(s, FiscalQuarter(2010, 1))

    def test_unit_free(self):
        rng = np.random.default_rng(8)
        values = rng.uniform(50, 150, 12)
        s1 = self._series(values)
        s2 = self._series(values * 7.3)
        for q in [FiscalQuarter(2010, 1), FiscalQuarter(2011, 2)]:
            assert yoy_growth(s2, q) == pytest.approx(yoy_growth(s1, q), rel=1e-12)
