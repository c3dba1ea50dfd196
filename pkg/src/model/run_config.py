from enum import Enum
from pathlib import Path
from typing import Optional

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

from src.model.tracks import SigmaGrid
from src.model.wavelet import WaveletParams
from src.utils.config import Config


class Command(str, Enum):
    TRANSFORM = "transform"
    ESTIMATE = "estimate"
    SEPARATE = "separate"


GENERATORS = ("two-chirps", "three-component", "two-tones", "complex-chirps")


class RunConfig(BaseModel):
    """Validated configuration of one command-line run"""

    command: Command
    signal: Optional[str] = None
    input_path: Optional[Path] = None
    sample_rate: Optional[float] = Field(default=None, gt=0)
    n: Optional[int] = Field(default=None, ge=2)

    mu: float = Field(default=Config.MU, gt=0)
    tau0: float = Field(default=Config.TAU0, gt=0, lt=1)
    n_voices: int = Field(default=Config.N_VOICES, ge=1)
    sigma: float = 1.0
    sigma_min: float = Config.SIGMA_MIN
    sigma_max: float = Config.SIGMA_MAX
    sigma_step: float = Field(default=Config.SIGMA_STEP, gt=0)
    ell: float = Field(default=Config.RENYI_ORDER, gt=0)
    zeta: int = Field(default=Config.RENYI_HALF_WINDOW, ge=0)
    gamma3: float = Field(default=Config.PEAK_THRESHOLD, gt=0)
    band: int = Field(default=Config.BAND_HALF_WIDTH, ge=0)
    gamma_rel: float = Field(default=Config.GAMMA_REL, gt=0)
    smoothing_taps: int = Field(default=Config.SMOOTHING_TAPS, ge=1)
    seed: int = Config.NOISE_SEED
    snr_db: Optional[float] = None

    estimate_sigma: bool = False
    sigma_track_path: Optional[Path] = None
    laws: Optional[str] = None
    renyi_sst: bool = False
    n_components: int = Field(default=2, ge=1)
    plots: bool = True
    output_dir: Path = Path(Config.OUTPUT_DIR)

    @field_validator("signal")
    @classmethod
    def known_generator(cls, value):
        if value is not None and value not in GENERATORS:
            raise ValueError(f"unknown signal generator {value!r}; choose from {GENERATORS}")
        return value

    @field_validator("ell")
    @classmethod
    def renyi_order(cls, value):
        if value == 1:
            raise ValueError("Renyi order must differ from 1")
        return value

    @field_validator("snr_db")
    @classmethod
    def finite_snr(cls, value):
        if value is not None and not np.isfinite(value):
            raise ValueError("SNR must be finite")
        return value

    @model_validator(mode="after")
    def consistent(self):
        if (self.signal is None) == (self.input_path is None):
            raise ValueError("exactly one of --signal or --input is required")
        floor = self.wavelet_params().sigma_floor
        if self.sigma_min < floor:
            raise ValueError(f"sigma_min={self.sigma_min} is below alpha/mu={floor:.5f}")
        if self.sigma < floor:
            raise ValueError(f"sigma={self.sigma} is below alpha/mu={floor:.5f}")
        if self.sigma_min >= self.sigma_max:
            raise ValueError("sigma_min must be smaller than sigma_max")
        return self

    def wavelet_params(self) -> WaveletParams:
        return WaveletParams(mu=self.mu, tau0=self.tau0)

    def sigma_grid(self) -> SigmaGrid:
        return SigmaGrid.from_range(self.sigma_min, self.sigma_max, self.sigma_step)

    def smoothing_weights(self) -> np.ndarray:
        return np.full(self.smoothing_taps, 1.0 / self.smoothing_taps)

    def metadata(self) -> dict:
        """Flat key=value record of the run for CSV headers"""
        return {key: str(value.value if isinstance(value, Enum) else value)
                for key, value in self.model_dump().items()}
