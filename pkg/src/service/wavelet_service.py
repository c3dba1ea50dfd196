import logging
import math
from functools import lru_cache

import numpy as np
from scipy import integrate

from src.model.wavelet import WaveletParams
from src.utils.config import Config

logger = logging.getLogger(__name__)

# integrand exp(-2 pi^2 sigma^2 (xi - mu)^2) drops below 1e-16 beyond this many 1/sigma from mu
_CUT = math.sqrt(math.log(1e16) / (2.0 * math.pi**2))


def g_hat(xi):
    """Fourier transform of the unit Gaussian window, exp(-2 pi^2 xi^2)"""
    return np.exp(-2.0 * np.pi**2 * np.square(xi))


def g_hat_derivative(xi):
    return -4.0 * np.pi**2 * np.asarray(xi) * g_hat(xi)


def g1_hat(xi):
    """Transform of t*g(t): (i / 2 pi) d/dxi g_hat"""
    return 1j / (2.0 * np.pi) * g_hat_derivative(xi)


def g2_hat(xi):
    """Transform of t*g'(t): -g_hat - xi d/dxi g_hat"""
    return -g_hat(xi) - np.asarray(xi) * g_hat_derivative(xi)


def alpha_from_tau0(tau0: float) -> float:
    if not 0.0 < tau0 < 1.0:
        raise ValueError(f"tau0 must lie in (0, 1), got {tau0}")
    return math.sqrt(2.0 * math.log(1.0 / tau0)) / (2.0 * math.pi)


class WaveletService:
    """The simplified Morlet family psi_sigma and its support calculus"""

    def __init__(self, params: WaveletParams = None, floor: float = Config.CPSI_FLOOR):
        self.params = params or WaveletParams()
        self.floor = floor

    def psi_hat(self, xi, sigma: float):
        self.params.check_sigma(sigma)
        return g_hat(sigma * (np.asarray(xi, dtype=float) - self.params.mu))

    def window_duration(self, a, sigma):
        """Duration L = 4 pi alpha sigma a of psi_(a,b)"""
        self.params.check_sigma(sigma)
        if np.any(np.asarray(a) <= 0):
            raise ValueError("scale must be positive")
        return 4.0 * np.pi * self.params.alpha * np.asarray(sigma) * np.asarray(a)

    def c_psi(self, sigma: float) -> float:
        """Reconstruction constant: integral over xi > 0 of psi_hat_sigma(xi) / xi.

        Evaluated with scipy's adaptive quadrature on [max(mu - cut/sigma,
        floor*mu), mu + cut/sigma], where the integrand is below 1e-16 outside
        the cut. The floor removes a neighborhood of the origin where the 1/xi
        factor would otherwise diverge for sigma*mu close to alpha.
        """
        self.params.check_sigma(sigma)
        return _c_psi(float(sigma), self.params.mu, self.floor)

    def c_psi_track(self, sigma_of_b: np.ndarray) -> np.ndarray:
        """c_psi(sigma(b)) per time, evaluated once per distinct sigma"""
        values, inverse = np.unique(np.asarray(sigma_of_b, dtype=float), return_inverse=True)
        constants = np.array([self.c_psi(s) for s in values])
        return constants[inverse]


@lru_cache(maxsize=4096)
def _c_psi(sigma: float, mu: float, floor: float) -> float:
    lower = max(mu - _CUT / sigma, floor * mu)
    upper = mu + _CUT / sigma
    value, error = integrate.quad(
        lambda xi: math.exp(-2.0 * math.pi**2 * sigma**2 * (xi - mu) ** 2) / xi,
        lower, upper, points=[mu], epsabs=0.0, epsrel=1e-12, limit=200,
    )
    if not math.isfinite(value):
        raise ArithmeticError(f"c_psi quadrature failed for sigma={sigma}, mu={mu}")
    logger.debug(f"c_psi(sigma={sigma:.4g}, mu={mu:.4g}) = {value:.10g} (+/- {error:.2g})")
    return value
