import logging
from pathlib import Path
from typing import Dict, Optional

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

logger = logging.getLogger(__name__)


def plot_plane(path: Path, data: np.ndarray, axis: np.ndarray, times: np.ndarray, title: str,
               ylabel: str = "Frequency (Hz)", log_axis: bool = False) -> Path:
    """Magnitude heatmap of a time-scale or time-frequency plane"""
    fig, ax = plt.subplots(figsize=(8, 5))
    mesh = ax.pcolormesh(times, axis, np.abs(data), shading="auto", cmap="jet")
    if log_axis:
        ax.set_yscale("log")
    ax.set_xlabel("Time (s)")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    fig.colorbar(mesh, ax=ax, label="Magnitude")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    logger.debug(f"Saved plot {path}")
    return path


def plot_tracks(path: Path, times: np.ndarray, tracks: Dict[str, Optional[np.ndarray]],
                title: str, ylabel: str = "sigma") -> Path:
    fig, ax = plt.subplots(figsize=(8, 4))
    for name, values in tracks.items():
        if values is not None:
            ax.plot(times, values, label=name)
    ax.set_xlabel("Time (s)")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
