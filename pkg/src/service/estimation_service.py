import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Union

import numpy as np
from scipy.ndimage import convolve1d
from scipy.signal import find_peaks

from src.model.planes import ScaleGrid, TimeFreqPlane, TimeScalePlane
from src.model.signal import Signal
from src.model.tracks import SigmaGrid, SigmaTrack, SupportIntervals
from src.model.wavelet import WaveletParams
from src.service.cwt_service import CwtService
from src.service.separability_service import SeparabilityService
from src.service.sst_service import SstService
from src.utils.config import Config

logger = logging.getLogger(__name__)

PlaneLike = Union[TimeScalePlane, TimeFreqPlane, np.ndarray]


def smoothing_kernel(taps: int = Config.SMOOTHING_TAPS) -> np.ndarray:
    """Uniform low-pass weights 1/taps"""
    if taps < 1:
        raise ValueError(f"smoothing kernel needs at least one tap, got {taps}")
    return np.full(taps, 1.0 / taps)


def renyi_entropy(plane: PlaneLike, t: int, zeta: int = Config.RENYI_HALF_WINDOW,
                  ell: float = Config.RENYI_ORDER) -> float:
    """Renyi entropy of |D| over the columns [t - zeta, t + zeta] clipped to the plane"""
    if ell <= 0 or ell == 1:
        raise ValueError(f"Renyi order must be positive and != 1, got {ell}")
    data = np.abs(getattr(plane, "data", plane))
    lo, hi = max(0, t - zeta), min(data.shape[1], t + zeta + 1)
    window = data[:, lo:hi]
    peak = window.max(initial=0.0)
    if peak == 0.0:
        raise ValueError(f"Renyi entropy undefined: all-zero window around t={t}")
    window = window / peak
    energy = np.sum(window**2)
    return float(np.log2(np.sum(window ** (2 * ell)) / energy**ell) / (1.0 - ell))


def renyi_track(magnitude: np.ndarray, zeta: int = Config.RENYI_HALF_WINDOW,
                ell: float = Config.RENYI_ORDER) -> np.ndarray:
    """renyi_entropy at every column; +inf where the window is all zero"""
    if ell <= 0 or ell == 1:
        raise ValueError(f"Renyi order must be positive and != 1, got {ell}")
    magnitude = np.abs(magnitude)
    peak = magnitude.max(initial=0.0)
    if peak > 0:
        magnitude = magnitude / peak
    box = np.ones(2 * zeta + 1)
    power = np.convolve(np.sum(magnitude ** (2 * ell), axis=0), box, mode="same")
    energy = np.convolve(np.sum(magnitude**2, axis=0), box, mode="same")
    out = np.full(magnitude.shape[1], np.inf)
    nonzero = energy > 0
    out[nonzero] = np.log2(power[nonzero] / energy[nonzero] ** ell) / (1.0 - ell)
    return out


def argmin_smallest_sigma(entropy: np.ndarray) -> np.ndarray:
    """Per column, the grid index of the minimum entropy; ties go to the smallest sigma.

    ``entropy`` has one row per sigma of a decreasing grid, so the smallest
    sigma among tied rows is the last one.
    """
    flipped = entropy[::-1]
    return entropy.shape[0] - 1 - np.argmin(flipped, axis=0)


class EstimationService:
    """Blind selection of the time-varying window parameter sigma(t)"""

    def __init__(self, params: WaveletParams = None, cwt: Optional[CwtService] = None,
                 sst: Optional[SstService] = None, n_voices: int = Config.N_VOICES,
                 search_bins: int = Config.RIDGE_SEARCH_BINS, workers: int = Config.WORKERS):
        self.params = params or WaveletParams()
        self.cwt = cwt or CwtService(self.params, workers=workers)
        self.sst = sst or SstService(self.params, cwt=self.cwt)
        self.zones = SeparabilityService(self.params)
        self.n_voices = n_voices
        self.search_bins = search_bins
        self.workers = max(1, workers)

    def _scales(self, x: Signal, scales: Optional[ScaleGrid]) -> ScaleGrid:
        return scales if scales is not None else self.cwt.make_scale_grid(len(x), self.n_voices, x.dt)

    def build_sigma_stack(self, x: Signal, grid: SigmaGrid, scales: Optional[ScaleGrid] = None) -> np.ndarray:
        """

        W
         of the constant-sigma CWT for every grid sigma, each normalized by its own maximum.

        Returns a float32 array of shape (len(grid), len(scales), len(x)).
        """
        self.params.check_sigma(grid.values)
        scales = self._scales(x, scales)

        def magnitude(sigma: float) -> np.ndarray:
            mag = np.abs(self.cwt.constant_sigma_cwt(x, sigma, scales))
            peak = mag.max(initial=0.0)
            return (mag / peak if peak > 0 else mag).astype(np.float32)

        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            stack = np.stack(list(pool.map(magnitude, grid.values)))
        logger.info(f"Built sigma stack: {len(grid)} sigmas x {len(scales)} scales x {len(x)} samples")
        return stack

    def sigma_u(self, x: Signal, grid: SigmaGrid, t: int, zeta: int = Config.RENYI_HALF_WINDOW,
                ell: float = Config.RENYI_ORDER, cwt_stack: Optional[np.ndarray] = None) -> float:
        """
        Grid sigma whose constant-sigma CWT has the smallest Renyi entropy around t
        """
        stack = cwt_stack if cwt_stack is not None else self.build_sigma_stack(x, grid)
        if stack.shape[0] != len(grid):
            raise ValueError(f"CWT stack covers {stack.shape[0]} sigmas, grid has {len(grid)}")
        entropy = np.array([renyi_track(stack[j], zeta, ell)[t] for j in range(len(grid))])
        return float(grid.values[argmin_smallest_sigma(entropy[:, None])[0]])

    def sigma_u_indices(self, stack: np.ndarray, zeta: int, ell: float) -> np.ndarray:
        entropy = np.stack([renyi_track(plane, zeta, ell) for plane in stack])
        return argmin_smallest_sigma(entropy)

    def _follow_ridge(self, magnitude: np.ndarray, start: int, b: int, stop: int) -> np.ndarray:
        """Greedy ridge from (start, b) to column ``stop`` (inclusive), searching +-search_bins"""
        step = 1 if stop >= b else -1
        n_scales = magnitude.shape[0]
        rows = [start]
        row = start
        for col in range(b + step, stop + step, step):
            lo = max(0, row - self.search_bins)
            hi = min(n_scales, row + self.search_bins + 1)
            row = lo + int(np.argmax(magnitude[lo:hi, col]))
            rows.append(row)
        return np.array(rows)

    def support_intervals(self, magnitude: np.ndarray, b: int, sigma: float, scales: ScaleGrid,
                          gamma3: float = Config.PEAK_THRESHOLD) -> SupportIntervals:
        """Support intervals [g_k, h_k] of the components visible in column b.

        ``magnitude`` is the normalized |W| of the constant-sigma CWT. Each peak
        above gamma3 is followed along its ridge over one wavelet duration, the
        ridge frequency mu/d_k(t) is fitted by c_k + r_k (t - b), and the zone
        bounds of that local chirp give the interval.
        """
        if gamma3 <= 0:
            raise ValueError(f"peak threshold must be positive, got {gamma3}")
        mu, alpha = self.params.mu, self.params.alpha
        column = np.asarray(magnitude[:, b], dtype=float)
        _, props = find_peaks(column, height=gamma3, plateau_size=1)
        peak_rows = props["left_edges"]
        if peak_rows.size == 0:
            return SupportIntervals()

        n_times = magnitude.shape[1]
        a = scales.values
        freq = np.empty(peak_rows.size)
        rate = np.zeros(peak_rows.size)
        for i, row in enumerate(peak_rows):
            reach = int(np.floor(2.0 * np.pi * alpha * sigma * a[row] / scales.dt))
            before = self._follow_ridge(magnitude, row, b, max(0, b - reach))[::-1]
            after = self._follow_ridge(magnitude, row, b, min(n_times - 1, b + reach))
            ridge_rows = np.concatenate([before[:-1], after])
            offsets = (np.arange(ridge_rows.size) - (before.size - 1)) * scales.dt
            if ridge_rows.size >= 2:
                rate[i], freq[i] = np.polyfit(offsets, mu / a[ridge_rows], 1)
            else:
                freq[i] = mu / a[row]

        lower = (mu - alpha / sigma) / freq
        upper = (mu + alpha / sigma) / freq
        chirping = rate != 0
        defined = bool(np.all(freq > 0))
        if defined and chirping.any():
            l, u = self.zones._bounds(freq[chirping], rate[chirping], sigma)
            lower[chirping], upper[chirping] = l, u
            # h_m of the largest-scale interval is never compared
            defined = not bool(np.any(np.isnan(upper[:-1])))
        return SupportIntervals(peaks=a[peak_rows], lower=lower, upper=upper,
                                freq=freq, rate=rate, defined=defined)

    def estimate_sigma(self, x: Signal, grid: SigmaGrid, zeta: int = Config.RENYI_HALF_WINDOW,
                       ell: float = Config.RENYI_ORDER, gamma3: float = Config.PEAK_THRESHOLD,
                       B: Optional[np.ndarray] = None, scales: Optional[ScaleGrid] = None,
                       cwt_stack: Optional[np.ndarray] = None) -> SigmaTrack:
        """Separability parameter estimation.

        For each t, start at sigma_u(t) and step down the grid while the number of
        support intervals stays the same and the intervals stay disjoint. The
        last accepted sigma is C(t); sigma_est is C smoothed with B.
        """
        B = smoothing_kernel() if B is None else np.asarray(B, dtype=float)
        if np.any(B < 0) or not np.isclose(B.sum(), 1.0):
            raise ValueError("smoothing weights must be nonnegative and sum to 1")
        scales = self._scales(x, scales)
        stack = cwt_stack if cwt_stack is not None else self.build_sigma_stack(x, grid, scales)
        start = self.sigma_u_indices(stack, zeta, ell)

        n = len(x)
        C = np.empty(n)
        for t in range(n):
            j = int(start[t])
            intervals = self.support_intervals(stack[j], t, grid.values[j], scales, gamma3)
            if intervals.non_overlapping():
                count = intervals.count
                for k in range(j + 1, len(grid)):
                    trial = self.support_intervals(stack[k], t, grid.values[k], scales, gamma3)
                    if trial.count != count or not trial.non_overlapping():
                        break
                    j = k
            C[t] = grid.values[j]

        sigma_est = convolve1d(C, B, mode="nearest")
        logger.info(f"Estimated sigma track: mean sigma_u={grid.values[start].mean():.3f}, "
                    f"mean sigma_est={sigma_est.mean():.3f}")
        return SigmaTrack(times=x.times, sigma_u=grid.values[start], C=C, sigma_est=sigma_est, B=B)

    def sigma_renyi_sst(self, x: Signal, grid: SigmaGrid, zeta: int = Config.RENYI_HALF_WINDOW,
                        ell: float = Config.RENYI_ORDER, order: int = 1,
                        scales: Optional[ScaleGrid] = None) -> np.ndarray:
        """
        Per t, the grid sigma minimizing the Renyi entropy of the constant-sigma SST.

        ``order`` picks the first- or second-order squeeze; the plain phase
        transformation is used because sigma is constant within each candidate.
        """
        if order not in (1, 2):
            raise ValueError(f"order must be 1 or 2, got {order}")
        scales = self._scales(x, scales)

        def entropy_for(sigma: float) -> np.ndarray:
            tf, _, _ = self.sst.transform(x, sigma, scales, order=order, regular=True)
            return renyi_track(tf.data, zeta, ell)

        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            entropy = np.stack(list(pool.map(entropy_for, grid.values)))
        return grid.values[argmin_smallest_sigma(entropy)]
