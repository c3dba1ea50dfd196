import numpy as np
import pytest

from src.model.planes import TimeFreqPlane
from src.model.signal import LfmComponent, Signal
from src.service.reconstruction_service import ReconstructionService, clear_of_bands, rmse


@pytest.fixture
def two_tones():
    n = 512
    t = np.arange(n) / n
    parts = [np.cos(2 * np.pi * 30 * t), np.cos(2 * np.pi * 120 * t)]
    return Signal(parts[0] + parts[1], sample_rate=float(n)), [Signal(p, sample_rate=float(n)) for p in parts]


class TestRmse:
    def test_identical(self, signals):
        x = signals.gen_two_chirps()
        assert rmse(x, x, 0.1, 0.9) == 0.0

    def test_relative_scaling(self, signals):
        x = signals.gen_two_chirps()
        y = Signal(1.1 * x.values, sample_rate=x.sample_rate)
        assert rmse(x, y, 0.0, 1.0) == pytest.approx(0.1)

    def test_zero_reference(self):
        zero = Signal(np.zeros(16), sample_rate=16.0)
        with pytest.raises(ValueError, match="zero"):
            rmse(zero, zero, 0.0, 1.0)

    def test_mismatched_signals(self, signals):
        with pytest.raises(ValueError):
            rmse(signals.gen_two_tones(64), signals.gen_two_tones(128), 0.0, 1.0)


class TestRecoverSignal:
    def test_real_tone_from_cwt(self, cwt, reconstruction, signals):
        x = signals.gen_tone(50.0, 512)
        grid = cwt.make_scale_grid(512, 32, x.dt)
        plane = cwt.adaptive_cwt(x, 1.0, grid)
        recovered = reconstruction.recover_signal(plane, mode="real")
        assert recovered.is_real
        assert rmse(x, recovered, 0.1, 0.9) < 0.02

    def test_analytic_chirp_from_cwt(self, cwt, reconstruction, signals):
        x = signals.gen_lfm(LfmComponent(c=12.0, r=50.0), 256)
        grid = cwt.make_scale_grid(256, 32, x.dt)
        plane = cwt.adaptive_cwt(x, 1.0, grid)
        recovered = reconstruction.recover_signal(plane, mode="analytic")
        assert rmse(x, recovered, 0.2, 0.9) < 0.02

    def test_varying_sigma_uses_per_time_constant(self, cwt, reconstruction, signals):
        x = signals.gen_tone(40.0, 512)
        grid = cwt.make_scale_grid(512, 32, x.dt)
        plane = cwt.adaptive_cwt(x, np.linspace(0.9, 1.8, 512), grid)
        recovered = reconstruction.recover_signal(plane)
        assert rmse(x, recovered, 0.15, 0.85) < 0.02

    @pytest.mark.parametrize("order", [1, 2])
    def test_sst_path_matches_masked_cwt_path(self, cwt, sst, reconstruction, signals, order):
        x = signals.gen_two_chirps()
        grid = cwt.make_scale_grid(len(x), 32, x.dt)
        tf, _, bundle = sst.transform(x, 1.2, grid, order=order)
        from_sst = reconstruction.recover_signal(tf)
        from_cwt = reconstruction.recover_signal(bundle.w, mask=tf.source_mask)
        scale = np.abs(from_cwt.samples).max()
        np.testing.assert_allclose(from_sst.samples, from_cwt.samples, rtol=1e-10, atol=1e-10 * scale)

    def test_zero_plane_gives_zero_signal(self, reconstruction):
        tf = TimeFreqPlane(np.zeros((8, 16), dtype=complex), np.arange(8.0), np.ones(16), 16.0)
        np.testing.assert_array_equal(reconstruction.recover_signal(tf).samples, 0.0)

    def test_unknown_mode(self, reconstruction):
        tf = TimeFreqPlane(np.zeros((8, 16), dtype=complex), np.arange(8.0), np.ones(16), 16.0)
        with pytest.raises(ValueError, match="mode"):
            reconstruction.recover_signal(tf, mode="imaginary")


class TestRidges:
    def test_two_tones_separated(self, cwt, sst, reconstruction, two_tones):
        x, parts = two_tones
        grid = cwt.make_scale_grid(len(x), 32, x.dt)
        tf, _, _ = sst.transform(x, 1.0, grid, order=2)
        ridges = reconstruction.extract_ridges(tf, 2, band=2)
        assert ridges.complete and ridges.count == 2

        interior = slice(100, 412)
        frequencies = sorted(np.median(tf.freq_grid[r[interior]]) for r in ridges.ridges)
        assert frequencies[0] == pytest.approx(30.0, abs=1.0)
        assert frequencies[1] == pytest.approx(120.0, abs=1.0)
        assert np.all(np.abs(ridges.ridges[0] - ridges.ridges[1]) > 4)

        components = sorted(
            (reconstruction.recover_component(tf, r, band=2) for r in ridges.ridges),
            key=lambda comp: np.median(comp.ridge_hz),
        )
        for part, comp in zip(parts, components):
            assert len(comp.samples) == len(x)
            recovered = Signal(comp.samples, sample_rate=x.sample_rate)
            assert rmse(part, recovered, 0.2, 0.8) < 0.05

    def test_single_ridge_on_tone(self, cwt, sst, reconstruction, signals):
        x = signals.gen_tone(25.0, 256)
        grid = cwt.make_scale_grid(256, 32, x.dt)
        tf, _, _ = sst.transform(x, 1.0, grid, order=1)
        ridges = reconstruction.extract_ridges(tf, 1)
        assert ridges.count == 1
        assert np.median(tf.freq_grid[ridges.ridges[0]]) == pytest.approx(25.0, abs=1.0)

    def test_partial_result_on_silent_plane(self, reconstruction):
        tf = TimeFreqPlane(np.zeros((8, 16), dtype=complex), np.arange(8.0), np.ones(16), 16.0)
        ridges = reconstruction.extract_ridges(tf, 2)
        assert not ridges.complete
        assert ridges.count == 0

    def test_gaps_are_interpolated(self, reconstruction):
        data = np.zeros((10, 9), dtype=complex)
        data[4, :] = 1.0
        data[4, 3:6] = 0.0
        tf = TimeFreqPlane(data, np.arange(10.0), np.ones(9), 9.0)
        ridges = reconstruction.extract_ridges(tf, 1, band=0)
        np.testing.assert_array_equal(ridges.ridges[0], 4)
        np.testing.assert_array_equal(np.flatnonzero(ridges.interpolated[0]), [3, 4, 5])

    def test_filled_points_stay_out_of_earlier_bands(self, params):
        data = np.zeros((40, 40), dtype=complex)
        data[20, :] = 1.0
        data[25, :10] = 0.5
        data[15, 30:] = 0.5
        tf = TimeFreqPlane(data, np.arange(40.0), np.ones(40), 40.0)
        ridges = ReconstructionService(params, jump=12).extract_ridges(tf, 2, band=2)
        assert ridges.complete
        np.testing.assert_array_equal(ridges.ridges[0], 20)
        np.testing.assert_array_equal(ridges.ridges[1, :10], 25)
        np.testing.assert_array_equal(ridges.ridges[1, 30:], 15)
        assert ridges.interpolated[1, 10:30].all()
        # a straight fill from bin 25 to bin 15 would cross the first ridge
        assert np.all(np.abs(ridges.ridges[1] - ridges.ridges[0]) > 4)

    def test_clear_of_bands_moves_to_nearest_free_bin(self):
        removed = np.zeros((10, 3), dtype=bool)
        removed[3:7, 1] = True
        np.testing.assert_array_equal(clear_of_bands(np.array([4, 4, 4]), removed), [4, 2, 4])
        np.testing.assert_array_equal(clear_of_bands(np.array([6, 6, 6]), removed), [6, 7, 6])

    def test_invalid_count(self, reconstruction):
        tf = TimeFreqPlane(np.ones((8, 16), dtype=complex), np.arange(8.0), np.ones(16), 16.0)
        with pytest.raises(ValueError):
            reconstruction.extract_ridges(tf, 0)

    def test_component_band_clipped_at_axis_edge(self, reconstruction, caplog):
        data = np.zeros((6, 4), dtype=complex)
        data[0, :] = 1.0
        tf = TimeFreqPlane(data, np.arange(6.0), np.ones(4), 4.0)
        comp = reconstruction.recover_component(tf, np.zeros(4, dtype=int), band=2, mode="analytic")
        assert "clipping" in caplog.text
        expected = 1.0 / reconstruction.wavelets.c_psi(1.0)
        np.testing.assert_allclose(comp.samples, expected)

    def test_ridge_length_mismatch(self, reconstruction):
        tf = TimeFreqPlane(np.ones((8, 16), dtype=complex), np.arange(8.0), np.ones(16), 16.0)
        with pytest.raises(ValueError, match="ridge"):
            reconstruction.recover_component(tf, np.zeros(15, dtype=int))
