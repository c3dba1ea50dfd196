import logging
from typing import Optional, Union

import numpy as np

from src.model.planes import TimeFreqPlane, TimeScalePlane
from src.model.signal import Signal
from src.model.tracks import Component, RidgeSet
from src.model.wavelet import WaveletParams
from src.service.wavelet_service import WaveletService
from src.utils.config import Config

logger = logging.getLogger(__name__)

MODES = ("real", "analytic")


def rmse(a: Signal, b: Signal, t_lo: float, t_hi: float) -> float:
    """Relative error ||a - b|| / ||a|| over samples with t_lo <= t <= t_hi"""
    if len(a) != len(b) or a.sample_rate != b.sample_rate:
        raise ValueError("signals differ in length or sample rate")
    mask = a.interior(t_lo, t_hi)
    reference = np.linalg.norm(a.samples[mask])
    if reference == 0:
        raise ValueError("reference signal is zero over the requested range")
    return float(np.linalg.norm(a.samples[mask] - b.samples[mask]) / reference)


def clear_of_bands(ridge: np.ndarray, removed: np.ndarray) -> np.ndarray:
    """Moves ridge points lying in removed cells to the nearest free bin of their column"""
    ridge = ridge.copy()
    bins = np.arange(removed.shape[0])
    for col in np.flatnonzero(removed[ridge, np.arange(ridge.size)]):
        free = bins[~removed[:, col]]
        if free.size == 0:
            logger.warning(f"No free bin left in column {col}; ridge stays inside a removed band")
            continue
        ridge[col] = free[np.argmin(np.abs(free - ridge[col]))]
    return ridge


class ReconstructionService:
    """Signal and component recovery from CWT and SST planes"""

    def __init__(self, params: WaveletParams = None, jump: int = Config.RIDGE_JUMP,
                 gap_rel: float = Config.RIDGE_GAP_REL):
        self.params = params or WaveletParams()
        self.wavelets = WaveletService(self.params)
        self.jump = jump
        self.gap_rel = gap_rel

    def _finish(self, total: np.ndarray, sigma_of_b: np.ndarray, mode: str) -> np.ndarray:
        if mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
        constants = self.wavelets.c_psi_track(sigma_of_b)
        if mode == "analytic":
            return total / constants
        return np.real(2.0 * total / constants)

    def recover_signal(self, plane: Union[TimeScalePlane, TimeFreqPlane], sigma_of_b=None,
                       mode: str = "real", mask: Optional[np.ndarray] = None) -> Signal:
        """Invert a CWT (sum of W da/a) or SST (sum over bins) plane.

        ``mask`` restricts a CWT plane to selected cells, e.g. the cells a
        squeeze actually reassigned.
        """
        sigma_of_b = plane.sigma_track if sigma_of_b is None else np.asarray(sigma_of_b, dtype=float)
        if isinstance(plane, TimeScalePlane):
            cells = plane.data * plane.grid.log_weights[:, None]
            if mask is not None:
                cells = np.where(mask, cells, 0.0)
            total = cells.sum(axis=0)
        else:
            total = plane.data.sum(axis=0)
        samples = self._finish(total, sigma_of_b, mode)
        return Signal(samples, sample_rate=plane.sample_rate)

    def extract_ridges(self, tf: TimeFreqPlane, n_components: int,
                       band: int = Config.BAND_HALF_WIDTH) -> RidgeSet:
        """Greedy ridge search on |T|, strongest ridge first.

        Each ridge starts at the largest remaining coefficient and is extended
        column by column within +-jump bins of the previous point. Columns with
        nothing above the gap level keep the previous bin and are later filled
        by linear interpolation. A band of +-2*band bins around each found
        ridge is removed before searching for the next one, and filled points
        that land in a removed band are moved to the nearest free bin, so any
        two ridges stay more than 2*band bins apart.
        """
        if n_components < 1:
            raise ValueError(f"n_components must be >= 1, got {n_components}")
        energy = np.abs(tf.data).copy()
        n_bins, n_times = energy.shape
        level = self.gap_rel * energy.max(initial=0.0)
        removed = np.zeros(energy.shape, dtype=bool)

        ridges, interpolated = [], []
        for _ in range(n_components):
            if energy.max(initial=0.0) <= level or energy.max(initial=0.0) == 0.0:
                break
            start_bin, start_col = np.unravel_index(np.argmax(energy), energy.shape)
            ridge = np.empty(n_times, dtype=int)
            gap = np.zeros(n_times, dtype=bool)
            ridge[start_col] = start_bin
            for cols in (range(start_col + 1, n_times), range(start_col - 1, -1, -1)):
                prev = start_bin
                for col in cols:
                    lo, hi = max(0, prev - self.jump), min(n_bins, prev + self.jump + 1)
                    segment = energy[lo:hi, col]
                    if segment.max() > level:
                        prev = lo + int(np.argmax(segment))
                    else:
                        gap[col] = True
                    ridge[col] = prev
            if gap.any() and not gap.all():
                known = np.flatnonzero(~gap)
                ridge[gap] = np.rint(np.interp(np.flatnonzero(gap), known, ridge[known])).astype(int)
            ridge = clear_of_bands(ridge, removed)

            for col in range(n_times):
                removed[max(0, ridge[col] - 2 * band):ridge[col] + 2 * band + 1, col] = True
            energy[removed] = 0.0
            ridges.append(ridge)
            interpolated.append(gap)

        complete = len(ridges) == n_components
        if not complete:
            logger.warning(f"Found {len(ridges)} of {n_components} requested ridges")
        shape = (len(ridges), n_times)
        return RidgeSet(
            ridges=np.array(ridges, dtype=int).reshape(shape),
            band=band,
            interpolated=np.array(interpolated, dtype=bool).reshape(shape),
            complete=complete,
        )

    def recover_component(self, tf: TimeFreqPlane, ridge: np.ndarray, band: int = Config.BAND_HALF_WIDTH,
                          sigma_of_b=None, mode: str = "real") -> Component:
        """
        Integrate T over 
        bin - ridge
         <= band at every time.

        The band is clipped to the frequency axis with a warning. In "real" mode
        the result is 2 Re(sum) / c_psi, in "analytic" mode sum / c_psi.
        """
        ridge = np.asarray(ridge, dtype=int)
        n_bins, n_times = tf.data.shape
        if ridge.size != n_times:
            raise ValueError(f"ridge has {ridge.size} points for a plane of {n_times} columns")
        lo = ridge - band
        hi = ridge + band
        if lo.min() < 0 or hi.max() > n_bins - 1:
            logger.warning(f"Integration band +-{band} exceeds the frequency axis; clipping")
        lo = np.clip(lo, 0, n_bins - 1)
        hi = np.clip(hi, 0, n_bins - 1)

        cumulative = np.vstack([np.zeros((1, n_times), dtype=complex), np.cumsum(tf.data, axis=0)])
        cols = np.arange(n_times)
        total = cumulative[hi + 1, cols] - cumulative[lo, cols]

        sigma_of_b = tf.sigma_track if sigma_of_b is None else np.asarray(sigma_of_b, dtype=float)
        samples = self._finish(total, sigma_of_b, mode)
        return Component(samples=samples, ridge_hz=tf.freq_grid[ridge], times=tf.times)
