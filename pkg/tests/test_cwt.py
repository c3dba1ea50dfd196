import numpy as np
import pytest

from src.model.planes import Kernel, TimeScalePlane
from src.model.signal import LfmComponent
from src.model.tracks import SigmaGrid
from src.service.cwt_service import CwtService, scale_derivative
from src.service.wavelet_service import g_hat
from tests.conftest import ridge_band


class TestScaleGrid:
    def test_dyadic_layout(self, cwt):
        grid = cwt.make_scale_grid(256, n_voices=32, dt=1 / 256)
        assert len(grid) == 32 * 8
        assert grid.values[0] == pytest.approx(2 ** (1 / 32) / 256)
        assert grid.values[-1] == pytest.approx(1.0)
        np.testing.assert_allclose(grid.values[1:] / grid.values[:-1], 2 ** (1 / 32))

    def test_log_weights(self, cwt):
        grid = cwt.make_scale_grid(64, n_voices=8, dt=1.0)
        expected = np.full(len(grid), 2 ** (1 / 8) - 1)
        expected[-1] = 1 - 2 ** (-1 / 8)
        np.testing.assert_allclose(grid.log_weights, expected)

    @pytest.mark.parametrize("n_samples,n_voices", [(1, 32), (64, 0)])
    def test_invalid_arguments(self, cwt, n_samples, n_voices):
        with pytest.raises(ValueError):
            cwt.make_scale_grid(n_samples, n_voices)

    def test_unknown_padding(self, params):
        with pytest.raises(ValueError, match="padding"):
            CwtService(params, padding="reflect")


class TestConstantSigmaCwt:
    def test_tone_magnitude_follows_window(self, cwt, signals):
        c, n = 50.0, 512
        x = signals.gen_tone(c, n, analytic=True)
        grid = cwt.make_scale_grid(n, 32, x.dt)
        plane = cwt.adaptive_cwt(x, 1.0, grid)
        expected = g_hat(1.0 * (1.0 - grid.values[:, None] * c)) * np.ones((1, n))
        band = ~cwt.boundary_mask(plane, factor=2.0) & (expected > 0.5)
        assert band.any()
        np.testing.assert_allclose(np.abs(plane.data)[band], expected[band], rtol=0.01)

        column = np.abs(plane.data[:, n // 2])
        assert grid.values[np.argmax(column)] == pytest.approx(1 / c, rel=0.012)
        assert column.max() == pytest.approx(1.0, abs=0.01)

    def test_chirp_matches_closed_form(self, cwt, signals):
        comp = LfmComponent(A=1.0, c=12.0, r=50.0)
        x = signals.gen_lfm(comp, 256)
        grid = cwt.make_scale_grid(256, 32, x.dt)
        plane = cwt.adaptive_cwt(x, 1.0, grid)
        oracle = cwt.chirp_cwt_closed_form(comp, grid.values[:, None], x.times[None, :], 1.0)

        cells = ridge_band(cwt, plane)
        assert cells.sum() > 100
        error = np.abs(plane.data - oracle)[cells] / np.abs(oracle)[cells]
        assert error.max() < 1e-2
        assert np.median(error) < 1e-3

    def test_g2_plane_of_tone(self, cwt, signals):
        c, sigma = 40.0, 1.5
        x = signals.gen_tone(c, 512, analytic=True)
        grid = cwt.make_scale_grid(512, 32, x.dt)
        w = cwt.adaptive_cwt(x, sigma, grid, Kernel.G)
        w_g2 = cwt.adaptive_cwt(x, sigma, grid, Kernel.G2)
        factor = 4 * np.pi**2 * sigma**2 * (grid.values[:, None] * c - 1.0) ** 2 - 1.0
        cells = ridge_band(cwt, w)
        np.testing.assert_allclose(w_g2.data[cells], (factor * w.data)[cells], rtol=1e-6, atol=1e-9)

    def test_frozen_time_derivative_of_tone(self, cwt, signals):
        c = 30.0
        x = signals.gen_tone(c, 256, analytic=True)
        grid = cwt.make_scale_grid(256, 16, x.dt)
        bundle = cwt.adaptive_bundle(x, 1.0, grid)
        cells = ridge_band(cwt, bundle.w)
        np.testing.assert_allclose(bundle.w_db.data[cells], (2j * np.pi * c * bundle.w.data)[cells],
                                   rtol=1e-8)

    def test_sigma_below_floor_rejected(self, cwt, signals):
        x = signals.gen_two_tones()
        grid = cwt.make_scale_grid(len(x), 8, x.dt)
        with pytest.raises(ValueError, match="below the admissible bound"):
            cwt.constant_sigma_cwt(x, 0.1, grid)

    def test_periodic_padding_exact_for_periodic_tone(self, params, signals):
        service = CwtService(params, padding="periodic")
        x = signals.gen_tone(16.0, 128, analytic=True)
        grid = service.make_scale_grid(128, 16, x.dt)
        plane = service.adaptive_cwt(x, 1.0, grid)
        expected = g_hat(1.0 - grid.values[:, None] * 16.0) * np.exp(2j * np.pi * 16.0 * x.times)[None, :]
        np.testing.assert_allclose(plane.data, expected, atol=1e-12)


class TestAdaptiveCwt:
    def test_constant_track_equals_constant_transform(self, cwt, signals):
        x = signals.gen_two_chirps()
        grid = cwt.make_scale_grid(len(x), 16, x.dt)
        plane = cwt.adaptive_cwt(x, np.full(len(x), 1.25), grid)
        np.testing.assert_allclose(plane.data, cwt.constant_sigma_cwt(x, 1.25, grid), atol=1e-13)
        np.testing.assert_array_equal(plane.sigma_track, 1.25)

    def test_columns_come_from_their_own_sigma(self, cwt, signals):
        x = signals.gen_two_chirps()
        grid = cwt.make_scale_grid(len(x), 16, x.dt)
        track = np.where(np.arange(len(x)) < 100, 0.8, 2.0)
        plane = cwt.adaptive_cwt(x, track, grid, Kernel.G1)
        low = cwt.constant_sigma_cwt(x, 0.8, grid, Kernel.G1)
        high = cwt.constant_sigma_cwt(x, 2.0, grid, Kernel.G1)
        np.testing.assert_allclose(plane.data[:, :100], low[:, :100], atol=1e-13)
        np.testing.assert_allclose(plane.data[:, 100:], high[:, 100:], atol=1e-13)

    def test_sigma_grid_quantizes_track(self, cwt, signals):
        x = signals.gen_two_tones()
        grid = cwt.make_scale_grid(len(x), 8, x.dt)
        sigma_grid = SigmaGrid.from_range(0.5, 2.0, 0.5)
        track = np.linspace(0.6, 1.9, len(x))
        bundle = cwt.adaptive_bundle(x, track, grid, sigma_grid=sigma_grid)
        assert set(np.unique(bundle.sigma_track)) <= set(sigma_grid.values)
        assert np.all(np.abs(bundle.sigma_track - track) <= 0.25 + 1e-12)
        for plane in (bundle.w_db, bundle.w_g1, bundle.w_g2):
            assert plane.aligned_with(bundle.w)

    def test_track_length_mismatch(self, cwt, signals):
        x = signals.gen_two_tones()
        grid = cwt.make_scale_grid(len(x), 8, x.dt)
        with pytest.raises(ValueError, match="sigma track"):
            cwt.adaptive_cwt(x, np.ones(len(x) - 1), grid)

    def test_track_below_floor(self, cwt, signals):
        x = signals.gen_two_tones()
        grid = cwt.make_scale_grid(len(x), 8, x.dt)
        track = np.ones(len(x))
        track[10] = 0.2
        with pytest.raises(ValueError):
            cwt.adaptive_cwt(x, track, grid)


class TestScaleDerivative:
    def test_exact_for_linear_functions(self, cwt):
        grid = cwt.make_scale_grid(256, 16, 1 / 256)
        data = np.repeat(grid.values[:, None], 5, axis=1).astype(complex)
        np.testing.assert_allclose(scale_derivative(data, grid.values), 1.0, atol=1e-10)

    def test_d_scale_keeps_plane_metadata(self, cwt):
        grid = cwt.make_scale_grid(64, 4, 1 / 64)
        plane = TimeScalePlane(np.repeat(3 * grid.values[:, None], 64, axis=1), grid, Kernel.G,
                               np.ones(64), 64.0)
        derivative = cwt.d_scale(plane)
        assert derivative.aligned_with(plane)
        np.testing.assert_allclose(derivative.data, 3.0, atol=1e-10)

    def test_needs_three_scales(self):
        with pytest.raises(ValueError):
            scale_derivative(np.ones((2, 4)), np.array([1.0, 2.0]))


class TestChirpZones:
    def test_simplified_duration_bounds_exact(self, cwt):
        a = np.array([0.01, 0.05, 0.1])
        exact = cwt.chirp_zone_duration(a, 1.0, 50.0, exact=True)
        simplified = cwt.chirp_zone_duration(a, 1.0, 50.0)
        assert np.all(simplified >= exact)
        assert np.all(simplified <= np.sqrt(2) * exact + 1e-12)

    def test_optimal_sigma_minimizes_duration(self, cwt):
        a, r = 0.04, 50.0
        best = cwt.optimal_chirp_sigma(a, r)
        assert best == pytest.approx(1 / (a * np.sqrt(2 * np.pi * r)))
        at_best = cwt.chirp_zone_duration(a, best, r)
        for sigma in (0.8 * best, 0.95 * best, 1.05 * best, 1.25 * best):
            assert cwt.chirp_zone_duration(a, sigma, r) > at_best

    def test_closed_form_reduces_to_tone(self, cwt):
        a = np.array([0.02, 0.025, 0.03])
        b = 0.3
        value = cwt.chirp_cwt_closed_form(LfmComponent(c=40.0, r=0.0), a, b, 1.0)
        np.testing.assert_allclose(value, g_hat(1.0 - 40.0 * a) * np.exp(2j * np.pi * 40.0 * b), atol=1e-14)

    def test_closed_form_requires_constant_amplitude(self, cwt):
        with pytest.raises(ValueError, match="constant-amplitude"):
            cwt.chirp_cwt_closed_form(LfmComponent(c=10.0, r=5.0, p=1.0), 0.1, 0.0, 1.0)

    def test_boundary_mask_shrinks_with_scale(self, cwt, signals):
        x = signals.gen_two_tones(64)
        grid = cwt.make_scale_grid(64, 4, x.dt)
        plane = cwt.adaptive_cwt(x, 1.0, grid)
        mask = cwt.boundary_mask(plane)
        assert mask[:, 0].all() and mask[:, -1].all()
        assert mask.sum(axis=1)[0] <= mask.sum(axis=1)[-1]
