"""CSV readers and writers for signals, planes, sigma tracks and recovered components.

Every file starts with ``#``-prefixed metadata lines (``# key=value``) so a CSV
records the configuration that produced it.
"""

import logging
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple, Union

import numpy as np

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _metadata_header(metadata: Optional[Dict]) -> str:
    if not metadata:
        return ""
    return "\n".join(f"{key}={metadata[key]}" for key in sorted(metadata))


def format_complex(values: np.ndarray) -> List[str]:
    """Format complex cells as ``re+imi``"""
    return [f"{z.real:.12e}{z.imag:+.12e}i" for z in np.ravel(values)]


def parse_complex(cell: str) -> complex:
    """Inverse of format_complex"""
    text = cell.strip()
    if not text.endswith("i"):
        raise ValueError(f"Malformed complex cell: {cell!r}")
    return complex(text[:-1] + "j")


def read_signal_csv(path: PathLike) -> Tuple[np.ndarray, Optional[float]]:
    """Read one sample per line (real) or ``re,im`` per line (complex).

    Returns the samples and the sample rate found in a ``# sample_rate=<Hz>``
    header, or None when the header is absent.
    """
    path = Path(path)
    if not path.exists():
        raise ValueError(f"Signal file not found: {path}")

    sample_rate = None
    rows = []
    width = None
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line.lstrip("#").strip().partition("=")
                if key.strip() == "sample_rate":
                    try:
                        sample_rate = float(value)
                    except ValueError:
                        raise ValueError(f"{path}:{line_no}: bad sample_rate header {value!r}")
                continue
            fields = [f.strip() for f in line.split(",")]
            if len(fields) not in (1, 2):
                raise ValueError(f"{path}:{line_no}: expected 1 or 2 columns, got {len(fields)}")
            if width is None:
                width = len(fields)
            elif width != len(fields):
                raise ValueError(f"{path}:{line_no}: column count changed from {width} to {len(fields)}")
            try:
                values = [float(f) for f in fields]
            except ValueError:
                raise ValueError(f"{path}:{line_no}: cannot parse {line!r}")
            rows.append(values[0] + 1j * values[1] if width == 2 else values[0])

    if not rows:
        raise ValueError(f"{path}: no samples found")
    dtype = complex if width == 2 else float
    return np.asarray(rows, dtype=dtype), sample_rate


def write_signal_csv(path: PathLike, samples: np.ndarray, sample_rate: float,
                     metadata: Optional[Dict] = None) -> Path:
    path = Path(path)
    meta = dict(metadata or {})
    meta["sample_rate"] = repr(float(sample_rate))
    if np.iscomplexobj(samples) and np.any(np.imag(samples) != 0):
        data = np.column_stack([np.real(samples), np.imag(samples)])
    else:
        data = np.real(samples)
    np.savetxt(path, data, delimiter=",", fmt="%.12e", header=_metadata_header(meta))
    return path


def write_plane_csv(path: PathLike, data: np.ndarray, axis: np.ndarray, times: np.ndarray,
                    axis_name: str = "scale", metadata: Optional[Dict] = None) -> Path:
    """Write a complex matrix: header row of times, first column the row axis, cells re+imi"""
    path = Path(path)
    lines = [f"# {line}" for line in _metadata_header(metadata).splitlines()]
    lines.append(",".join([axis_name] + [f"{t:.12e}" for t in times]))
    for value, row in zip(axis, data):
        lines.append(",".join([f"{value:.12e}"] + format_complex(row)))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    logger.debug(f"Wrote {data.shape[0]}x{data.shape[1]} plane to {path}")
    return path


def read_plane_csv(path: PathLike) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Read a plane written by write_plane_csv; returns (axis, times, data)"""
    lines = [
        line for line in Path(path).read_text(encoding="utf-8").splitlines()
        if line and not line.startswith("#")
    ]
    times = np.array([float(v) for v in lines[0].split(",")[1:]])
    axis, rows = [], []
    for line in lines[1:]:
        cells = line.split(",")
        axis.append(float(cells[0]))
        rows.append([parse_complex(c) for c in cells[1:]])
    return np.array(axis), times, np.array(rows, dtype=complex)


def write_table_csv(path: PathLike, columns: Dict[str, Iterable], metadata: Optional[Dict] = None) -> Path:
    """Write named real columns (tracks, reports) with a metadata header"""
    path = Path(path)
    names = list(columns)
    data = np.column_stack([np.asarray(columns[name], dtype=float) for name in names])
    header = _metadata_header(metadata)
    header = f"{header}\n{','.join(names)}" if header else ",".join(names)
    np.savetxt(path, data, delimiter=",", fmt="%.12e", header=header)
    return path


def read_table_csv(path: PathLike) -> Dict[str, np.ndarray]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    comment = [line for line in lines if line.startswith("#")]
    names = comment[-1].lstrip("#").strip().split(",")
    data = np.atleast_2d(np.loadtxt(path, delimiter=",", comments="#"))
    return {name: data[:, i] for i, name in enumerate(names)}
