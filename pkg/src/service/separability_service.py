import logging
from typing import List, Sequence, Tuple

import numpy as np

from src.model.signal import IfLaw
from src.model.tracks import (
    SeparabilityTrack,
    SeparationReport,
    Sigma2Result,
    ZoneCoefficients,
)
from src.model.wavelet import WaveletParams

logger = logging.getLogger(__name__)


class SeparabilityService:
    """Support zones of linear-chirp components and the separating window parameters.

    Components are indexed by increasing instantaneous frequency, so component
    k lives at smaller scales than component k-1. Zone widths use the
    simplified duration 1/(a sigma) + 2 pi |r| a sigma.
    """

    def __init__(self, params: WaveletParams = None):
        self.params = params or WaveletParams()

    def _bounds(self, phi1, phi2, sigma):
        """(l, u) without raising; u is NaN where its radicand is negative"""
        mu, alpha = self.params.mu, self.params.alpha
        phi1 = np.asarray(phi1, dtype=float)
        rate = np.abs(np.asarray(phi2, dtype=float))
        upper_rad = phi1**2 - 8.0 * np.pi * alpha * (alpha + mu * sigma) * rate
        lower_rad = phi1**2 + 8.0 * np.pi * alpha * (mu * sigma - alpha) * rate
        with np.errstate(invalid="ignore"):
            u = 2.0 * (mu + alpha / sigma) / (phi1 + np.sqrt(upper_rad))
            l = 2.0 * (mu - alpha / sigma) / (phi1 + np.sqrt(lower_rad))
        return l, np.where(upper_rad >= 0, u, np.nan)

    def zone_bounds(self, phi1, phi2, sigma: float) -> Tuple[np.ndarray, np.ndarray]:
        """Lower and upper scale boundaries (l, u) of a chirp's support zone"""
        self.params.check_sigma(sigma)
        if np.any(np.asarray(phi1) <= 0):
            raise ValueError("instantaneous frequency must be positive")
        l, u = self._bounds(phi1, phi2, sigma)
        if np.any(np.isnan(u)):
            raise ValueError(f"component zone undefined at sigma={sigma:.6g}: chirp too fast for this window")
        return l, u

    def zone_coefficients(self, phi1_prev, phi2_prev, phi1_k, phi2_k) -> ZoneCoefficients:
        """Quadratic alpha_k sigma^2 - beta_k sigma + gamma_k <= 0 equivalent to u_k <= l_(k-1)"""
        mu, alpha = self.params.mu, self.params.alpha
        rate_prev = np.abs(np.asarray(phi2_prev, dtype=float))
        rate_k = np.abs(np.asarray(phi2_k, dtype=float))
        phi1_prev = np.asarray(phi1_prev, dtype=float)
        phi1_k = np.asarray(phi1_k, dtype=float)

        cross = phi1_k * rate_prev + phi1_prev * rate_k
        alpha_k = 2.0 * np.pi * alpha * mu * (rate_k + rate_prev) ** 2
        beta_k = cross * (phi1_k - phi1_prev) + 4.0 * np.pi * alpha**2 * (rate_k**2 - rate_prev**2)
        gamma_k = (alpha / mu) * (
            cross * (phi1_k + phi1_prev) + 2.0 * np.pi * alpha**2 * (rate_k - rate_prev) ** 2
        )
        upsilon_k = beta_k**2 - 4.0 * alpha_k * gamma_k
        return ZoneCoefficients(alpha_k, beta_k, gamma_k, upsilon_k)

    def upsilon_factored(self, phi1_prev, phi2_prev, phi1_k, phi2_k):
        alpha = self.params.alpha
        rate_prev, rate_k = abs(phi2_prev), abs(phi2_k)
        cross = phi1_k * rate_prev + phi1_prev * rate_k
        return cross**2 * ((phi1_k - phi1_prev) ** 2 - 16.0 * np.pi * alpha**2 * (rate_k + rate_prev))

    @staticmethod
    def _evaluate(laws: Sequence[IfLaw], b: float) -> Tuple[np.ndarray, np.ndarray]:
        phi1 = np.array([float(law.phi1(b)) for law in laws])
        phi2 = np.array([float(law.phi2(b)) for law in laws])
        return phi1, phi2

    def sigma1(self, laws: Sequence[IfLaw], b: float) -> float:
        """Sinusoidal-model choice: max_k (alpha/mu)(phi'_k + phi'_(k-1)) / (phi'_k - phi'_(k-1))"""
        if len(laws) < 2:
            raise ValueError("sigma1 needs at least two components")
        phi1, _ = self._evaluate(laws, b)
        gaps = np.diff(phi1)
        if np.any(gaps <= 0):
            raise ValueError(f"instantaneous frequencies not strictly increasing at b={b}: {phi1}")
        return float(np.max(self.params.sigma_floor * (phi1[1:] + phi1[:-1]) / gaps))

    def sigma2(self, laws: Sequence[IfLaw], b: float) -> Sigma2Result:
        """
        Linear-chirp choice: smallest sigma making every adjacent pair of zones disjoint.

        Each adjacent pair gives a quadratic in sigma whose roots bound the
        separating range; the result is the largest lower root, never below the
        admissible floor. ``separable`` is False when two laws cross or no common
        sigma exists.
        """
        if len(laws) < 2:
            raise ValueError("sigma2 needs at least two components")
        floor = self.params.sigma_floor
        phi1, phi2 = self._evaluate(laws, b)
        gaps = np.diff(phi1)
        if np.any(gaps <= 0):
            pair = int(np.argmax(gaps <= 0)) + 1
            logger.debug(f"Laws cross at b={b} (pair {pair})")
            return Sigma2Result(sigma=float("nan"), separable=False, condition_holds=False, failing_pair=pair)

        rates = np.abs(phi2)
        lower = np.empty(gaps.size)
        upper = np.full(gaps.size, np.inf)
        condition = True
        for i in range(gaps.size):
            k = i + 1
            if rates[k] + rates[k - 1] == 0:
                lower[i] = floor * (phi1[k] + phi1[k - 1]) / gaps[i]
                continue
            coeffs = self.zone_coefficients(phi1[k - 1], phi2[k - 1], phi1[k], phi2[k])
            condition &= bool(4 * self.params.alpha * np.sqrt(np.pi * (rates[k] + rates[k - 1])) <= gaps[i])
            if coeffs.upsilon_k < 0:
                return Sigma2Result(sigma=float("nan"), separable=False, condition_holds=False, failing_pair=k)
            lower[i], upper[i] = (float(r) for r in coeffs.roots)

        sigma = float(max(floor, lower.max()))
        if sigma > upper.min():
            pair = int(np.argmin(upper)) + 1
            logger.debug(f"No common separating sigma at b={b}; pair {pair} closes first")
            return Sigma2Result(sigma=float("nan"), separable=False, condition_holds=condition, failing_pair=pair)
        return Sigma2Result(sigma=sigma, separable=True, condition_holds=condition)

    def check_separated(self, laws: Sequence[IfLaw], sigma: float, b: float,
                        tol: float = 1e-12) -> SeparationReport:
        """Whether u_k <= l_(k-1) for all adjacent pairs, with margins l_(k-1) - u_k.

        Only the upper bounds of components 2..K enter a comparison, so the
        lowest-frequency component may have an unbounded zone.
        """
        self.params.check_sigma(sigma)
        if len(laws) < 2:
            return SeparationReport(separated=True, margins=np.zeros(0))
        phi1, phi2 = self._evaluate(laws, b)
        if np.any(phi1 <= 0):
            raise ValueError("instantaneous frequency must be positive")
        l, u = self._bounds(phi1, phi2, sigma)
        if np.any(np.isnan(u[1:])):
            k = int(np.argmax(np.isnan(u[1:]))) + 2
            raise ValueError(f"component zone undefined at sigma={sigma:.6g} for component {k}")
        margins = l[:-1] - u[1:]
        # tol absorbs rounding at exact tangency
        return SeparationReport(separated=bool(np.all(margins >= -tol)), margins=margins)

    def separability_track(self, laws: Sequence[IfLaw], times: np.ndarray) -> SeparabilityTrack:
        """
        sigma1, sigma2 and the separation margin at sigma2 along the time axis
        """
        times = np.asarray(times, dtype=float)
        s1 = np.full(times.size, np.nan)
        s2 = np.full(times.size, np.nan)
        ok = np.zeros(times.size, dtype=bool)
        margin = np.full(times.size, np.nan)
        notes: List[str] = []
        for i, b in enumerate(times):
            try:
                s1[i] = self.sigma1(laws, b)
            except ValueError as e:
                notes.append(f"t={b:.6g}: {e}")
            result = self.sigma2(laws, b)
            if not result.separable:
                continue
            s2[i] = result.sigma
            try:
                report = self.check_separated(laws, result.sigma, b)
            except ValueError as e:
                notes.append(f"t={b:.6g}: {e}")
                continue
            ok[i] = report.separated
            margin[i] = report.margins.min()
        logger.info(f"Separability track: {int(ok.sum())}/{times.size} samples separable")
        return SeparabilityTrack(times, s1, s2, ok, margin, notes)
