import math

import numpy as np

from pydantic import BaseModel, ConfigDict, Field, computed_field

from src.utils.config import Config


class WaveletParams(BaseModel):
    """Parameters of the simplified Morlet family psi_sigma"""

    model_config = ConfigDict(frozen=True)

    mu: float = Field(default=Config.MU, gt=0)
    tau0: float = Field(default=Config.TAU0, gt=0, lt=1)

    @computed_field
    @property
    def alpha(self) -> float:
        return math.sqrt(2.0 * math.log(1.0 / self.tau0)) / (2.0 * math.pi)

    @property
    def sigma_floor(self) -> float:
        """Smallest admissible sigma, alpha/mu"""
        return self.alpha / self.mu

    def check_sigma(self, sigma) -> None:
        """Raise ValueError if any sigma is below alpha/mu"""
        low = float(np.min(sigma))
        # tolerance for grids built by repeated subtraction
        if low < self.sigma_floor * (1.0 - 1e-12):
            raise ValueError(
                f"sigma={low:.6g} is below the admissible bound alpha/mu={self.sigma_floor:.6g}"
            )
