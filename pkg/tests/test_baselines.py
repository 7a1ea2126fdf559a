import numpy as np
import pytest

from models.estimate import EstimationMethod
from modules.baselines import (default_octaves, default_windows, haar_logscale_diagram, max_octave, periodogram,
                               periodogram_estimate, variance_time_plot)
from modules.errors import DegenerateSeriesError, GridError, SeriesError
from modules.series_io import make_series


@pytest.fixture
def white_noise(rng):
    return make_series(rng.standard_normal(65536), 0.01, label="white")


class TestVarianceTimePlot:

    def test_white_noise(self, white_noise):
        table, estimate = variance_time_plot(white_noise)

        assert estimate.method == EstimationMethod.VARIANCE_TIME
        assert estimate.H == pytest.approx(0.5, abs=0.05)
        assert list(table.columns) == ["w", "variance", "blocks"]
        assert table["blocks"].iloc[0] == 65536

    def test_lrd_series(self, lrd_series):
        _, estimate = variance_time_plot(lrd_series(hurst=0.8, n=65536, seed=3))
        assert estimate.H == pytest.approx(0.8, abs=0.1)

    def test_default_windows(self):
        windows = default_windows(65536)
        assert windows[0] == 1
        assert windows[-1] == 1024
        assert np.all(np.diff(windows) > 0)

    def test_window_above_quarter_length(self, white_noise):
        with pytest.raises(GridError):
            variance_time_plot(white_noise, windows=[1, 2, 4, 20000])

    def test_constant_series(self):
        with pytest.raises(DegenerateSeriesError):
            variance_time_plot(make_series(np.ones(4096), 1.0))

    def test_needs_rate_samples(self, white_noise):
        walk = make_series(white_noise.samples.cumsum(), 1.0, role="cumulative")
        with pytest.raises(SeriesError, match="rate samples"):
            variance_time_plot(walk)


class TestPeriodogram:

    def test_frame_drops_dc(self, white_noise):
        table = periodogram(white_noise)
        assert table["f"].iloc[0] == pytest.approx(1.0 / (65536 * 0.01))
        assert table["f"].iloc[-1] == pytest.approx(50.0)
        assert len(table) == 32768

    def test_white_noise(self, white_noise):
        estimate = periodogram_estimate(white_noise)
        assert estimate.H == pytest.approx(0.5, abs=0.05)
        assert estimate.gamma == pytest.approx(-estimate.slope)

    def test_lrd_series(self, lrd_series):
        estimate = periodogram_estimate(lrd_series(hurst=0.8, n=65536, seed=3))
        assert estimate.H == pytest.approx(0.8, abs=0.1)

    def test_short_series(self, rng):
        with pytest.raises(SeriesError):
            periodogram_estimate(make_series(rng.standard_normal(32), 1.0))

    @pytest.mark.parametrize("band", [(0.0, 0.5), (0.3, 0.2), (0.1, 1.5)])
    def test_invalid_band(self, white_noise, band):
        with pytest.raises(GridError):
            periodogram_estimate(white_noise, band)

    def test_constant_series(self):
        with pytest.raises(DegenerateSeriesError):
            periodogram_estimate(make_series(np.full(1024, 2.0), 1.0))


class TestHaarLogscaleDiagram:

    def test_white_noise(self, white_noise):
        table, estimate = haar_logscale_diagram(white_noise)

        assert estimate.method == EstimationMethod.HAAR_LD
        assert estimate.H == pytest.approx(0.5, abs=0.05)
        assert list(table.columns) == ["j", "n_j", "energy", "y", "variance"]
        assert table["n_j"].tolist()[:3] == [32768, 16384, 8192]
        assert estimate.fit_range == (4.0, float(max_octave(65536)))

    def test_lrd_series(self, lrd_series):
        _, estimate = haar_logscale_diagram(lrd_series(hurst=0.8, n=65536, seed=3))
        assert estimate.H == pytest.approx(0.8, abs=0.1)
        assert estimate.lrd_valid

    def test_max_octave(self):
        assert max_octave(1024) == 8
        assert max_octave(65536) == 14

    def test_default_octaves(self):
        assert default_octaves(65536) == (4, 14)
        assert default_octaves(1024) == (4, 8)
        # short series keep three octaves
        assert default_octaves(64) == (2, 4)
        assert default_octaves(16) == (1, 2)

    def test_octave_range_checked(self, white_noise):
        with pytest.raises(GridError):
            haar_logscale_diagram(white_noise, octaves=(3, 15))
        with pytest.raises(GridError):
            haar_logscale_diagram(white_noise, octaves=(5, 5))

    def test_too_short(self, rng):
        with pytest.raises(SeriesError):
            haar_logscale_diagram(make_series(rng.standard_normal(8), 1.0))

    def test_constant_series(self):
        with pytest.raises(DegenerateSeriesError):
            haar_logscale_diagram(make_series(np.full(1024, 5.0), 1.0))
