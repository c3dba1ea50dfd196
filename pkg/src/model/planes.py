from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np


class Kernel(str, Enum):
    """Window variant used to build a time-scale plane"""

    G = "g"
    G1 = "g1"
    G2 = "g2"
    DBG = "dBg"
    PSI1 = "psi1"


@dataclass(frozen=True)
class ScaleGrid:
    """Dyadic scales a_j = 2^(j/n_voices) * dt, j = 1..n_voices*floor(log2 N)"""

    values: np.ndarray
    n_voices: int
    dt: float

    def __len__(self) -> int:
        return self.values.size

    @property
    def log_weights(self) -> np.ndarray:
        """da_j / a_j with a forward step; the last scale reuses the previous step"""
        a = self.values
        if a.size < 2:
            return np.ones_like(a)
        step = np.diff(a)
        step = np.append(step, step[-1])
        return step / a


@dataclass(frozen=True)
class TimeScalePlane:
    data: np.ndarray
    grid: ScaleGrid
    kernel: Kernel
    sigma_track: np.ndarray
    sample_rate: float

    def __post_init__(self):
        if self.data.shape != (len(self.grid), self.sigma_track.size):
            raise ValueError(
                f"plane shape {self.data.shape} does not match "
                f"{len(self.grid)} scales x {self.sigma_track.size} times"
            )

    @property
    def n_times(self) -> int:
        return self.data.shape[1]

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_times) / self.sample_rate

    def aligned_with(self, other: "TimeScalePlane") -> bool:
        return (
            self.data.shape == other.data.shape
            and np.array_equal(self.grid.values, other.grid.values)
            and np.array_equal(self.sigma_track, other.sigma_track)
        )

    def with_data(self, data: np.ndarray, kernel: Optional[Kernel] = None) -> "TimeScalePlane":
        return TimeScalePlane(data, self.grid, kernel or self.kernel, self.sigma_track, self.sample_rate)


@dataclass(frozen=True)
class CwtBundle:
    """The kernel planes of one adaptive CWT that the phase transforms consume"""

    w: TimeScalePlane
    w_db: TimeScalePlane
    w_g1: TimeScalePlane
    w_g2: TimeScalePlane

    @property
    def sigma_track(self) -> np.ndarray:
        return self.w.sigma_track


@dataclass(frozen=True)
class PhasePlane:
    omega: np.ndarray
    valid: np.ndarray

    def __post_init__(self):
        if self.omega.shape != self.valid.shape:
            raise ValueError("omega and valid mask must have the same shape")


@dataclass(frozen=True)
class TimeFreqPlane:
    """Synchrosqueezed plane; bin k covers [k*dxi, (k+1)*dxi)"""

    data: np.ndarray
    freq_grid: np.ndarray
    sigma_track: np.ndarray
    sample_rate: float
    source_mask: Optional[np.ndarray] = None

    @property
    def bin_width(self) -> float:
        return float(self.freq_grid[1] - self.freq_grid[0])

    @property
    def n_times(self) -> int:
        return self.data.shape[1]

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_times) / self.sample_rate
