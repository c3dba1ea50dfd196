from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np


@dataclass(frozen=True)
class SigmaGrid:
    """Decreasing uniform grid sigma_1 > sigma_2 > ... > sigma_n"""

    values: np.ndarray
    step: float

    @classmethod
    def from_range(cls, sigma_min: float, sigma_max: float, step: float) -> "SigmaGrid":
        if step <= 0:
            raise ValueError(f"sigma step must be positive, got {step}")
        if sigma_min >= sigma_max:
            raise ValueError(f"sigma range [{sigma_min}, {sigma_max}] is empty")
        count = int(np.floor((sigma_max - sigma_min) / step + 1e-9)) + 1
        values = sigma_max - step * np.arange(count)
        return cls(values=values, step=step)

    def __len__(self) -> int:
        return self.values.size

    def nearest(self, sigma: np.ndarray) -> np.ndarray:
        """Index of the grid value closest to each sigma"""
        sigma = np.asarray(sigma, dtype=float)
        return np.abs(self.values[None, :] - sigma.reshape(-1, 1)).argmin(axis=1).reshape(sigma.shape)


@dataclass
class SupportIntervals:
    """Estimated support intervals [g_k, h_k] around each detected peak a_k"""

    peaks: np.ndarray = field(default_factory=lambda: np.zeros(0))
    lower: np.ndarray = field(default_factory=lambda: np.zeros(0))
    upper: np.ndarray = field(default_factory=lambda: np.zeros(0))
    freq: np.ndarray = field(default_factory=lambda: np.zeros(0))
    rate: np.ndarray = field(default_factory=lambda: np.zeros(0))
    defined: bool = True

    @property
    def count(self) -> int:
        return int(self.peaks.size)

    def non_overlapping(self) -> bool:
        """h_k <= g_{k+1} for consecutive intervals sorted by peak scale"""
        if not self.defined:
            return False
        return bool(np.all(self.upper[:-1] <= self.lower[1:]))


@dataclass
class SigmaTrack:
    times: np.ndarray
    sigma_u: np.ndarray
    C: np.ndarray
    sigma_est: np.ndarray
    B: np.ndarray
    sigma1: Optional[np.ndarray] = None
    sigma2: Optional[np.ndarray] = None


@dataclass(frozen=True)
class ZoneCoefficients:
    alpha_k: np.ndarray
    beta_k: np.ndarray
    gamma_k: np.ndarray
    upsilon_k: np.ndarray

    @property
    def roots(self):
        """Lower and upper roots (beta -+ sqrt(upsilon)) / (2 alpha_k); NaN when upsilon < 0"""
        root = np.sqrt(np.where(self.upsilon_k >= 0, self.upsilon_k, np.nan))
        with np.errstate(divide="ignore", invalid="ignore"):
            lower = (self.beta_k - root) / (2.0 * self.alpha_k)
            upper = (self.beta_k + root) / (2.0 * self.alpha_k)
        return lower, upper


@dataclass(frozen=True)
class Sigma2Result:
    sigma: float
    separable: bool
    condition_holds: bool
    failing_pair: Optional[int] = None


@dataclass(frozen=True)
class SeparationReport:
    separated: bool
    margins: np.ndarray


@dataclass
class RidgeSet:
    """Per-component ridges as frequency-bin indices (rows) over time (columns)"""

    ridges: np.ndarray
    band: int
    interpolated: np.ndarray
    complete: bool = True

    @property
    def count(self) -> int:
        return int(self.ridges.shape[0])


@dataclass
class Component:
    samples: np.ndarray
    ridge_hz: np.ndarray
    times: np.ndarray = field(default_factory=lambda: np.zeros(0))


@dataclass
class SeparabilityTrack:
    times: np.ndarray
    sigma1: np.ndarray
    sigma2: np.ndarray
    separable: np.ndarray
    min_margin: np.ndarray
    notes: List[str] = field(default_factory=list)
