from dataclasses import dataclass, field
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class Signal:
    """Uniformly sampled time series.

    Samples are stored as a read-only complex array; ``is_real`` is derived from
    the data so a real signal always has exactly zero imaginary parts.
    """

    samples: np.ndarray
    sample_rate: float
    t0: float = 0.0
    is_real: bool = field(init=False)

    def __post_init__(self):
        data = np.asarray(self.samples)
        if data.ndim != 1 or data.size < 2:
            raise ValueError(f"Signal needs at least 2 samples, got shape {data.shape}")
        if not self.sample_rate > 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        real = not np.iscomplexobj(data) or bool(np.all(data.imag == 0))
        data = np.array(data, dtype=complex)
        if real:
            data.imag = 0.0
        data.setflags(write=False)
        object.__setattr__(self, "samples", data)
        object.__setattr__(self, "is_real", real)

    def __len__(self) -> int:
        return self.samples.size

    @property
    def dt(self) -> float:
        return 1.0 / self.sample_rate

    @property
    def times(self) -> np.ndarray:
        return self.t0 + np.arange(len(self)) / self.sample_rate

    @property
    def values(self) -> np.ndarray:
        """Real array for real signals, complex otherwise"""
        return self.samples.real.copy() if self.is_real else self.samples.copy()

    def interior(self, t_lo: float, t_hi: float) -> np.ndarray:
        """Boolean mask of samples with t_lo <= t <= t_hi"""
        t = self.times
        return (t >= t_lo) & (t <= t_hi)


@dataclass(frozen=True)
class LfmComponent:
    """A*exp(p t + q t^2/2) * exp(i 2 pi (c t + r t^2 / 2))"""

    A: float = 1.0
    c: float = 1.0
    r: float = 0.0
    p: float = 0.0
    q: float = 0.0

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError(f"LFM start frequency must be positive, got {self.c}")

    def evaluate(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        envelope = self.A * np.exp(self.p * t + 0.5 * self.q * t**2)
        return envelope * np.exp(2j * np.pi * (self.c * t + 0.5 * self.r * t**2))

    def law(self) -> "IfLaw":
        c, r = self.c, self.r
        return IfLaw(phi1=lambda t: c + r * np.asarray(t, dtype=float),
                     phi2=lambda t: r + 0.0 * np.asarray(t, dtype=float))


@dataclass(frozen=True)
class IfLaw:
    """Ground-truth instantaneous frequency (Hz) and chirp rate (Hz/s) of one component"""

    phi1: Callable[[np.ndarray], np.ndarray]
    phi2: Callable[[np.ndarray], np.ndarray]
