import logging
from typing import Optional, Tuple

import numpy as np

from src.model.planes import CwtBundle, Kernel, PhasePlane, TimeFreqPlane, TimeScalePlane
from src.model.signal import Signal
from src.model.tracks import SigmaGrid
from src.model.wavelet import WaveletParams
from src.service.cwt_service import CwtService, scale_derivative
from src.utils.config import Config

logger = logging.getLogger(__name__)


def _check_aligned(*planes: TimeScalePlane) -> None:
    first = planes[0]
    for other in planes[1:]:
        if not first.aligned_with(other):
            raise ValueError(
                f"grid mismatch between {first.kernel.value} and {other.kernel.value} planes"
            )


def sigma_log_rate(sigma_track: np.ndarray, sample_rate: float) -> np.ndarray:
    """sigma'(b) / sigma(b) with central differences, one-sided at the ends"""
    sigma_track = np.asarray(sigma_track, dtype=float)
    if sigma_track.size < 2:
        return np.zeros_like(sigma_track)
    return np.gradient(sigma_track, 1.0 / sample_rate) / sigma_track


class SstService:
    """Phase transformations and synchrosqueezing onto a linear frequency grid"""

    def __init__(self, params: WaveletParams = None, gamma_rel: float = Config.GAMMA_REL,
                 eps_denom_rel: float = Config.EPS_DENOM_REL, cwt: Optional[CwtService] = None):
        if gamma_rel <= 0 or eps_denom_rel <= 0:
            raise ValueError("thresholds must be positive")
        self.params = params or WaveletParams()
        self.gamma_rel = gamma_rel
        self.eps_denom_rel = eps_denom_rel
        self.cwt = cwt or CwtService(self.params)

    def valid_mask(self, w: TimeScalePlane) -> np.ndarray:
        magnitude = np.abs(w.data)
        peak = magnitude.max(initial=0.0)
        if peak == 0.0:
            return np.zeros(magnitude.shape, dtype=bool)
        return magnitude > self.gamma_rel * peak

    @staticmethod
    def _ratio(num: np.ndarray, den: np.ndarray, valid: np.ndarray) -> np.ndarray:
        return np.where(valid, num / np.where(valid, den, 1.0), 0.0)

    def total_time_derivative(self, w: TimeScalePlane, w_db: TimeScalePlane,
                              w_g2: TimeScalePlane) -> np.ndarray:
        """d/db of the adaptive CWT: frozen-sigma derivative plus the sigma(b) chain-rule terms"""
        _check_aligned(w, w_db, w_g2)
        rate = sigma_log_rate(w.sigma_track, w.sample_rate)
        return w_db.data - rate[None, :] * (w.data + w_g2.data)

    def phase_conventional(self, w: TimeScalePlane, w_db: TimeScalePlane) -> PhasePlane:
        """Re[d_b W / (i 2 pi W)] with the frozen-sigma derivative"""
        _check_aligned(w, w_db)
        valid = self.valid_mask(w)
        omega = np.real(self._ratio(w_db.data, w.data, valid) / (2j * np.pi))
        return PhasePlane(omega=omega, valid=valid)

    def phase_regular(self, w: TimeScalePlane, w_db: TimeScalePlane, w_g2: TimeScalePlane) -> PhasePlane:
        """Plain phase transformation applied to the adaptive CWT"""
        valid = self.valid_mask(w)
        d_b = self.total_time_derivative(w, w_db, w_g2)
        omega = np.real(self._ratio(d_b, w.data, valid) / (2j * np.pi))
        return PhasePlane(omega=omega, valid=valid)

    def phase_adaptive(self, w: TimeScalePlane, w_db: TimeScalePlane, w_g2: TimeScalePlane) -> PhasePlane:
        valid = self.valid_mask(w)
        rate = sigma_log_rate(w.sigma_track, w.sample_rate)
        d_b = self.total_time_derivative(w, w_db, w_g2)
        omega = (
            np.real(self._ratio(d_b, w.data, valid) / (2j * np.pi))
            + rate[None, :] * np.real(self._ratio(w_g2.data, w.data, valid) / (2j * np.pi))
        )
        return PhasePlane(omega=omega, valid=valid)

    def _denominator_floor(self, ratio: np.ndarray, valid: np.ndarray) -> float:
        if not valid.any():
            return self.eps_denom_rel
        scale = float(np.median(np.abs(ratio[valid])))
        return self.eps_denom_rel * (scale if scale > 0 else 1.0)

    def phase_adaptive_2nd(self, w: TimeScalePlane, w_db: TimeScalePlane, w_g1: TimeScalePlane,
                           w_g2: TimeScalePlane) -> PhasePlane:
        """Second-order adaptive phase transformation, exact on linear chirps.

        Where d/da(a W^g1 / W) is below the denominator floor the first-order
        value is kept.
        """
        _check_aligned(w, w_db, w_g1, w_g2)
        scales = w.grid.values
        valid = self.valid_mask(w)
        rate = sigma_log_rate(w.sigma_track, w.sample_rate)[None, :]

        q_db = self._ratio(self.total_time_derivative(w, w_db, w_g2), w.data, valid)
        q_g1 = self._ratio(scales[:, None] * w_g1.data, w.data, valid)
        q_g2 = self._ratio(w_g2.data, w.data, valid)

        first = np.real(q_db / (2j * np.pi)) + rate * np.real(q_g2 / (2j * np.pi))

        denom = scale_derivative(q_g1, scales)
        branch = valid & (np.abs(denom) > self._denominator_floor(q_g1, valid))
        numer = scale_derivative(q_db, scales) + rate * scale_derivative(q_g2, scales)
        r0 = self._ratio(numer, denom, branch)

        omega = np.where(branch, first - np.real(q_g1 * r0 / (2j * np.pi)), first)
        return PhasePlane(omega=omega, valid=valid)

    def phase_conventional_2nd(self, w: TimeScalePlane, w_db: TimeScalePlane, w_psi1: TimeScalePlane,
                               w_g2: Optional[TimeScalePlane] = None) -> PhasePlane:
        """Second-order transform built from the psi_1(t) = t psi(t) plane.

        With ``w_g2`` supplied and a time-varying sigma track, the time
        derivative includes the sigma(b) terms (regular second-order variant of
        the adaptive SST).
        """
        _check_aligned(w, w_db, w_psi1)
        scales = w.grid.values
        valid = self.valid_mask(w)
        d_b = w_db.data if w_g2 is None else self.total_time_derivative(w, w_db, w_g2)

        q_db = self._ratio(d_b, w.data, valid) / (2j * np.pi)
        q_psi = self._ratio(scales[:, None] * w_psi1.data, w.data, valid)

        denom = scale_derivative(q_psi, scales)
        branch = valid & (np.abs(denom) > self._denominator_floor(q_psi, valid))
        correction = self._ratio(q_psi * scale_derivative(q_db, scales), denom, branch)

        omega = np.real(q_db) - np.real(correction)
        return PhasePlane(omega=omega, valid=valid)

    def squeeze(self, w: TimeScalePlane, phase: PhasePlane, freq_bins: Optional[int] = None) -> TimeFreqPlane:
        """
        Reassign W * da/a of every valid cell to the frequency bin containing omega.

        The axis covers [0, fs/2) in ``freq_bins`` uniform bins (n/2 by default).
        Cells with omega outside the axis are dropped and left out of ``source_mask``.
        """
        n_times = w.n_times
        freq_bins = freq_bins or n_times // 2
        if freq_bins < 2:
            raise ValueError(f"freq_bins must be >= 2, got {freq_bins}")
        nyquist = 0.5 * w.sample_rate
        width = nyquist / freq_bins
        freq_grid = np.arange(freq_bins) * width

        omega = np.where(phase.valid, phase.omega, -1.0)
        keep = phase.valid & (omega >= 0.0) & (omega < nyquist)
        rows, cols = np.nonzero(keep)
        bins = np.minimum((omega[rows, cols] / width).astype(int), freq_bins - 1)
        weighted = w.data * w.grid.log_weights[:, None]

        tf = np.zeros((freq_bins, n_times), dtype=complex)
        np.add.at(tf, (bins, cols), weighted[rows, cols])
        logger.debug(f"Squeezed {rows.size} of {keep.size} cells into {freq_bins} bins")
        return TimeFreqPlane(tf, freq_grid, w.sigma_track.copy(), w.sample_rate, source_mask=keep)

    def transform(self, x: Signal, sigma_of_b, grid, order: int = 2, regular: bool = False,
                  sigma_grid: Optional[SigmaGrid] = None,
                  freq_bins: Optional[int] = None) -> Tuple[TimeFreqPlane, PhasePlane, CwtBundle]:
        """
        Adaptive SST of the given order.

        ``regular`` selects the plain phase transformation instead of the one
        corrected for sigma(b). Returns the squeezed plane together with the phase
        plane and the CWT bundle it was computed from.
        """
        if order not in (1, 2):
            raise ValueError(f"order must be 1 or 2, got {order}")
        bundle = self.cwt.adaptive_bundle(x, sigma_of_b, grid, sigma_grid=sigma_grid)
        if order == 1:
            phase = (self.phase_regular(bundle.w, bundle.w_db, bundle.w_g2) if regular
                     else self.phase_adaptive(bundle.w, bundle.w_db, bundle.w_g2))
        elif regular:
            w_psi1 = bundle.w_g1.with_data(bundle.sigma_track[None, :] * bundle.w_g1.data, Kernel.PSI1)
            phase = self.phase_conventional_2nd(bundle.w, bundle.w_db, w_psi1, bundle.w_g2)
        else:
            phase = self.phase_adaptive_2nd(bundle.w, bundle.w_db, bundle.w_g1, bundle.w_g2)
        tf = self.squeeze(bundle.w, phase, freq_bins)
        logger.info(f"Computed order-{order} {'regular' if regular else 'adaptive'} SST "
                    f"({len(bundle.w.grid)} scales x {bundle.w.n_times} samples)")
        return tf, phase, bundle
