import logging
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np

from src.model.signal import IfLaw, LfmComponent, Signal
from src.utils.csv_io import read_signal_csv

logger = logging.getLogger(__name__)

# c, r pairs of the two-chirp test signal
TWO_CHIRP_LAWS = ((12.0, 50.0), (34.0, 64.0))


def _unit_interval(n_samples: int) -> np.ndarray:
    if n_samples < 2:
        raise ValueError(f"n_samples must be >= 2, got {n_samples}")
    return np.arange(n_samples) / n_samples


class SignalService:
    """Synthetic test signals, noise injection and CSV ingestion"""

    def gen_two_chirps(self, n_samples: int = 256) -> Signal:
        """Sum of two real linear chirps (c=12, r=50) and (c=34, r=64) on [0, 1)"""
        t = _unit_interval(n_samples)
        x = sum(np.cos(2 * np.pi * (c * t + 0.5 * r * t**2)) for c, r in TWO_CHIRP_LAWS)
        return Signal(x, sample_rate=float(n_samples))

    def gen_three_component(self, n_samples: int = 512) -> Signal:
        t = _unit_interval(n_samples)
        x = (
            np.cos(16 * np.pi * t)
            + np.cos(96 * np.pi * t + 30 * np.cos(4 * np.pi * t))
            + np.cos(180 * np.pi * t + 30 * np.cos(4 * np.pi * t))
        )
        return Signal(x, sample_rate=float(n_samples))

    def three_component_parts(self, n_samples: int = 512) -> List[Signal]:
        """The three modes of gen_three_component, in increasing frequency order"""
        t = _unit_interval(n_samples)
        parts = [
            np.cos(16 * np.pi * t),
            np.cos(96 * np.pi * t + 30 * np.cos(4 * np.pi * t)),
            np.cos(180 * np.pi * t + 30 * np.cos(4 * np.pi * t)),
        ]
        return [Signal(p, sample_rate=float(n_samples)) for p in parts]

    def two_chirp_parts(self, n_samples: int = 256) -> List[Signal]:
        t = _unit_interval(n_samples)
        return [
            Signal(np.cos(2 * np.pi * (c * t + 0.5 * r * t**2)), sample_rate=float(n_samples))
            for c, r in TWO_CHIRP_LAWS
        ]

    def gen_two_tones(self, n_samples: int = 64) -> Signal:
        """cos(2 pi 5 t) + 2 cos(2 pi 25 t)"""
        t = _unit_interval(n_samples)
        return Signal(np.cos(2 * np.pi * 5 * t) + 2 * np.cos(2 * np.pi * 25 * t),
                      sample_rate=float(n_samples))

    def gen_complex_chirps(self, n_samples: int = 128) -> Signal:
        """exp(i 2 pi (9t + 5t^2)) + exp(i 2 pi (13t + 10t^2))"""
        t = _unit_interval(n_samples)
        x = np.exp(2j * np.pi * (9 * t + 5 * t**2)) + np.exp(2j * np.pi * (13 * t + 10 * t**2))
        return Signal(x, sample_rate=float(n_samples))

    def gen_tone(self, freq: float, n_samples: int = 512, amplitude: float = 1.0,
                 analytic: bool = False) -> Signal:
        t = _unit_interval(n_samples)
        x = amplitude * np.exp(2j * np.pi * freq * t)
        return Signal(x if analytic else x.real, sample_rate=float(n_samples))

    def gen_lfm(self, component: LfmComponent, n_samples: int = 256, analytic: bool = True) -> Signal:
        t = _unit_interval(n_samples)
        x = component.evaluate(t)
        return Signal(x if analytic else x.real, sample_rate=float(n_samples))

    def laws_for(self, name: str) -> Optional[List[IfLaw]]:
        """Ground-truth IF laws of a named generator, sorted by frequency; None if unknown"""
        if name == "two-chirps":
            return [LfmComponent(c=c, r=r).law() for c, r in TWO_CHIRP_LAWS]
        if name == "three-component":
            return [
                IfLaw(phi1=lambda t: 8.0 + 0.0 * np.asarray(t), phi2=lambda t: 0.0 * np.asarray(t)),
                IfLaw(phi1=lambda t: 48.0 - 60.0 * np.sin(4 * np.pi * np.asarray(t)),
                      phi2=lambda t: -240.0 * np.pi * np.cos(4 * np.pi * np.asarray(t))),
                IfLaw(phi1=lambda t: 90.0 - 60.0 * np.sin(4 * np.pi * np.asarray(t)),
                      phi2=lambda t: -240.0 * np.pi * np.cos(4 * np.pi * np.asarray(t))),
            ]
        if name == "two-tones":
            return [
                IfLaw(phi1=lambda t: 5.0 + 0.0 * np.asarray(t), phi2=lambda t: 0.0 * np.asarray(t)),
                IfLaw(phi1=lambda t: 25.0 + 0.0 * np.asarray(t), phi2=lambda t: 0.0 * np.asarray(t)),
            ]
        if name == "complex-chirps":
            return [LfmComponent(c=9.0, r=10.0).law(), LfmComponent(c=13.0, r=20.0).law()]
        return None

    def parse_laws(self, text: str) -> List[IfLaw]:
        """Parse ``c1,r1;c2,r2`` into LFM laws sorted by start frequency"""
        laws = []
        position = 0
        for chunk in text.split(";"):
            fields = chunk.split(",")
            if len(fields) != 2:
                raise ValueError(f"Malformed law at position {position}: {chunk!r} (expected 'c,r')")
            try:
                c, r = float(fields[0]), float(fields[1])
            except ValueError:
                raise ValueError(f"Malformed law at position {position}: {chunk!r} is not numeric")
            if c <= 0:
                raise ValueError(f"Malformed law at position {position}: start frequency must be positive")
            laws.append((c, r))
            position += len(chunk) + 1
        laws.sort()
        return [LfmComponent(c=c, r=r).law() for c, r in laws]

    def add_noise(self, x: Signal, snr_db: float, seed: int) -> Signal:
        """Add white Gaussian noise at the given SNR (total signal power).

        Noise is drawn from numpy's PCG64 generator seeded with ``seed`` and then
        rescaled so the realized SNR equals ``snr_db``.
        """
        if not np.isfinite(snr_db):
            raise ValueError(f"snr_db must be finite, got {snr_db}")
        rng = np.random.default_rng(seed)
        data = x.samples
        if x.is_real:
            noise = rng.standard_normal(len(x))
        else:
            noise = (rng.standard_normal(len(x)) + 1j * rng.standard_normal(len(x))) / np.sqrt(2)
        signal_power = np.mean(np.abs(data) ** 2)
        noise_power = np.mean(np.abs(noise) ** 2)
        scale = np.sqrt(signal_power / noise_power * 10 ** (-snr_db / 10))
        noisy = data + scale * noise
        logger.debug(f"Added noise at {snr_db} dB (seed={seed})")
        return Signal(noisy.real if x.is_real else noisy, sample_rate=x.sample_rate, t0=x.t0)

    def load_csv(self, path: Union[str, Path], sample_rate: Optional[float] = None) -> Signal:
        """
        Load a signal CSV; an explicit sample_rate overrides the file header
        """
        samples, header_rate = read_signal_csv(path)
        rate = sample_rate if sample_rate is not None else header_rate
        if rate is None:
            raise ValueError(f"{path}: missing sample rate (add '# sample_rate=<Hz>' or pass one)")
        if samples.size < 2:
            raise ValueError(f"{path}: need at least 2 samples, got {samples.size}")
        logger.info(f"Loaded {samples.size} samples at {rate} Hz from {path}")
        return Signal(samples, sample_rate=rate)

    def generate(self, name: str, n_samples: Optional[int] = None) -> Signal:
        """
        Dispatch by generator name as used on the command line
        """
        generators: Dict[str, tuple] = {
            "two-chirps": (self.gen_two_chirps, 256),
            "three-component": (self.gen_three_component, 512),
            "two-tones": (self.gen_two_tones, 64),
            "complex-chirps": (self.gen_complex_chirps, 128),
        }
        if name not in generators:
            raise ValueError(f"Unknown signal generator: {name}")
        func, default_n = generators[name]
        return func(n_samples or default_n)
