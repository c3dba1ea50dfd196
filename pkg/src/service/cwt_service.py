import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, Iterable, Optional

import numpy as np

from src.model.planes import CwtBundle, Kernel, ScaleGrid, TimeScalePlane
from src.model.signal import LfmComponent, Signal
from src.model.tracks import SigmaGrid
from src.model.wavelet import WaveletParams
from src.service.wavelet_service import g1_hat, g2_hat, g_hat
from src.utils.config import Config

logger = logging.getLogger(__name__)

PADDINGS = ("zero", "periodic")


def scale_derivative(data: np.ndarray, scales: np.ndarray) -> np.ndarray:
    """d/da along axis 0 on a non-uniform grid; central in the interior, one-sided at the ends"""
    if data.shape[0] < 3:
        raise ValueError(f"scale derivative needs at least 3 scales, got {data.shape[0]}")
    return np.gradient(data, scales, axis=0, edge_order=1)


class CwtService:
    """Adaptive continuous wavelet transform with the simplified Morlet window.

    For a window parameter sigma the transform of x at scale a and time b is
    computed in the frequency domain as
        W(a, b) = sum_xi X(xi) K(sigma (mu - a xi)) exp(i 2 pi b xi)
    where K is the transform of the requested kernel (g, t g(t), t g'(t)).
    A time-varying sigma(b) is realized column by column from constant-sigma
    transforms, one per distinct sigma value.
    """

    def __init__(self, params: WaveletParams = None, workers: int = Config.WORKERS,
                 padding: str = "zero"):
        if padding not in PADDINGS:
            raise ValueError(f"padding must be one of {PADDINGS}, got {padding!r}")
        self.params = params or WaveletParams()
        self.workers = max(1, workers)
        self.padding = padding

    def make_scale_grid(self, n_samples: int, n_voices: int = Config.N_VOICES,
                        dt: float = 1.0) -> ScaleGrid:
        if n_samples < 2:
            raise ValueError(f"n_samples must be >= 2, got {n_samples}")
        if n_voices < 1:
            raise ValueError(f"n_voices must be >= 1, got {n_voices}")
        count = n_voices * int(np.floor(np.log2(n_samples)))
        j = np.arange(1, count + 1)
        return ScaleGrid(values=2.0 ** (j / n_voices) * dt, n_voices=n_voices, dt=dt)

    def _spectrum(self, x: Signal):
        n = len(x)
        size = n if self.padding == "periodic" else 1 << int(np.ceil(np.log2(2 * n)))
        padded = np.zeros(size, dtype=complex)
        padded[:n] = x.samples
        return np.fft.fft(padded), np.fft.fftfreq(size, d=x.dt)

    def _kernel(self, kernel: Kernel, sigma: float, scales: np.ndarray, xi: np.ndarray) -> np.ndarray:
        arg = sigma * (self.params.mu - scales[:, None] * xi[None, :])
        if kernel == Kernel.G:
            return g_hat(arg)
        if kernel == Kernel.DBG:
            return 2j * np.pi * xi[None, :] * g_hat(arg)
        if kernel == Kernel.G1:
            return g1_hat(arg)
        if kernel == Kernel.G2:
            return g2_hat(arg)
        if kernel == Kernel.PSI1:
            return sigma * g1_hat(arg)
        raise ValueError(f"Unsupported kernel: {kernel}")

    def _transform(self, spectrum: np.ndarray, xi: np.ndarray, n: int, sigma: float,
                   scales: np.ndarray, kernels: Iterable[Kernel]) -> Dict[Kernel, np.ndarray]:
        return {
            k: np.fft.ifft(spectrum[None, :] * self._kernel(k, sigma, scales, xi), axis=1)[:, :n]
            for k in kernels
        }

    def constant_sigma_cwt(self, x: Signal, sigma: float, grid: ScaleGrid,
                           kernel: Kernel = Kernel.G) -> np.ndarray:
        """
        Raw complex matrix of the constant-sigma transform
        """
        self.params.check_sigma(sigma)
        spectrum, xi = self._spectrum(x)
        return self._transform(spectrum, xi, len(x), sigma, grid.values, [kernel])[kernel]

    def quantize_sigma(self, sigma_of_b: np.ndarray, sigma_grid: Optional[SigmaGrid]) -> np.ndarray:
        if sigma_grid is None:
            return np.asarray(sigma_of_b, dtype=float).copy()
        return sigma_grid.values[sigma_grid.nearest(sigma_of_b)]

    def _assemble(self, x: Signal, sigma_of_b, grid: ScaleGrid, kernels,
                  sigma_grid: Optional[SigmaGrid]) -> Dict[Kernel, TimeScalePlane]:
        if np.ndim(sigma_of_b) == 0:
            sigma_of_b = np.full(len(x), float(sigma_of_b))
        sigma_of_b = np.asarray(sigma_of_b, dtype=float)
        if sigma_of_b.size != len(x):
            raise ValueError(f"sigma track has {sigma_of_b.size} values for a signal of length {len(x)}")
        self.params.check_sigma(sigma_of_b)
        used = self.quantize_sigma(sigma_of_b, sigma_grid)
        self.params.check_sigma(used)

        distinct, inverse = np.unique(used, return_inverse=True)
        spectrum, xi = self._spectrum(x)
        n = len(x)

        def columns_for(j: int):
            cols = np.flatnonzero(inverse == j)
            planes = self._transform(spectrum, xi, n, distinct[j], grid.values, kernels)
            return cols, {k: p[:, cols] for k, p in planes.items()}

        out = {k: np.zeros((len(grid), n), dtype=complex) for k in kernels}
        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            for cols, parts in pool.map(columns_for, range(distinct.size)):
                for k, part in parts.items():
                    out[k][:, cols] = part
        logger.debug(f"Assembled adaptive CWT from {distinct.size} sigma slices, kernels={list(kernels)}")
        return {k: TimeScalePlane(out[k], grid, k, used, x.sample_rate) for k in kernels}

    def adaptive_cwt(self, x: Signal, sigma_of_b, grid: ScaleGrid, kernel: Kernel = Kernel.G,
                     sigma_grid: Optional[SigmaGrid] = None) -> TimeScalePlane:
        """
        Adaptive CWT of x for one kernel.

        sigma_of_b is either a scalar (conventional CWT) or one value per sample.
        With ``sigma_grid`` the track is first snapped to the nearest grid values.
        One FFT pass runs per distinct sigma.
        """
        return self._assemble(x, sigma_of_b, grid, [Kernel(kernel)], sigma_grid)[Kernel(kernel)]

    def adaptive_bundle(self, x: Signal, sigma_of_b, grid: ScaleGrid,
                        sigma_grid: Optional[SigmaGrid] = None) -> CwtBundle:
        """
        The g, dBg, g1 and g2 planes sharing one sigma assembly
        """
        planes = self._assemble(x, sigma_of_b, grid, [Kernel.G, Kernel.DBG, Kernel.G1, Kernel.G2], sigma_grid)
        return CwtBundle(w=planes[Kernel.G], w_db=planes[Kernel.DBG],
                         w_g1=planes[Kernel.G1], w_g2=planes[Kernel.G2])

    def d_scale(self, plane: TimeScalePlane) -> TimeScalePlane:
        return plane.with_data(scale_derivative(plane.data, plane.grid.values))

    def chirp_cwt_closed_form(self, comp: LfmComponent, a, b, sigma: float):
        """CWT of A exp(i 2 pi (c t + r t^2 / 2)) in closed form (broadcasts over a and b)"""
        if comp.p != 0 or comp.q != 0:
            raise ValueError("closed form requires a constant-amplitude chirp (p = q = 0)")
        self.params.check_sigma(sigma)
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        if np.any(a <= 0):
            raise ValueError("scale must be positive")
        mu = self.params.mu
        kappa = 2.0 * np.pi * sigma**2 * a**2 * comp.r
        freq = comp.c + comp.r * b
        h = np.exp(
            -2.0 * np.pi**2 * (a * sigma) ** 2 / (1.0 + kappa**2)
            * (freq - mu / a) ** 2 * (1.0 + 1j * kappa)
        )
        carrier = np.exp(2j * np.pi * (comp.c * b + 0.5 * comp.r * b**2))
        return comp.A / np.sqrt(1.0 - 1j * kappa) * carrier * h

    def chirp_zone_duration(self, a, sigma, r, exact: bool = False):
        """Duration of |h| for a chirp of rate r at scale a"""
        alpha = self.params.alpha
        a = np.asarray(a, dtype=float)
        sigma = np.asarray(sigma, dtype=float)
        if exact:
            return 2.0 * alpha * np.sqrt(1.0 / (a * sigma) ** 2 + (2.0 * np.pi * r * a * sigma) ** 2)
        return 2.0 * alpha * (1.0 / (a * sigma) + 2.0 * np.pi * np.abs(r) * a * sigma)

    def optimal_chirp_sigma(self, a, r):
        """sigma minimizing the chirp zone duration at scale a"""
        return 1.0 / (np.asarray(a, dtype=float) * np.sqrt(2.0 * np.pi * np.abs(r)))

    def boundary_mask(self, plane: TimeScalePlane, factor: float = 1.0) -> np.ndarray:
        """True where a cell's column lies within factor * L(a, sigma(b)) of either end"""
        t = plane.times - plane.times[0]
        span = t[-1]
        duration = 4.0 * np.pi * self.params.alpha * plane.grid.values[:, None] * plane.sigma_track[None, :]
        reach = factor * duration
        return (t[None, :] < reach) | (span - t[None, :] < reach)
