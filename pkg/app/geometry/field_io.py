"""
Field files: one JSON header line followed by little-endian float64 values
in row-major node order. CSV export for plotting.
"""
import csv
import json
import logging
from pathlib import Path
from typing import Dict, Tuple

import numpy as np

from app.core.errors import ConfigError
from app.geometry.grid import MetricGrid

logger = logging.getLogger(__name__)

DTYPE = "<f8"


def write_field(path, values: np.ndarray, grid: MetricGrid, name: str = "u") -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    values = np.asarray(values, dtype=np.float64)
    header = grid.header()
    header.update({"name": name, "dtype": DTYPE, "components": list(values.shape[grid.n:])})
    with open(path, "wb") as f:
        f.write((json.dumps(header, sort_keys=True) + "\n").encode("utf-8"))
        f.write(values.astype(DTYPE).tobytes(order="C"))
    logger.info(f"wrote field '{name}' to {path}")
    return path


def read_field(path) -> Tuple[dict, np.ndarray]:
    """
    Returns:
        (header dict, values with shape grid shape + components)

    Raises:
        ConfigError: If the file is missing, truncated or its header is invalid
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError("field file not found", location=str(path))
    with open(path, "rb") as f:
        line = f.readline()
        payload = f.read()
    try:
        header = json.loads(line.decode("utf-8"))
        shape = tuple(header["shape"]) + tuple(header.get("components", []))
    except (ValueError, KeyError) as e:
        raise ConfigError(f"invalid field header: {e}", location=str(path)) from e
    values = np.frombuffer(payload, dtype=header.get("dtype", DTYPE))
    if values.size != int(np.prod(shape)):
        raise ConfigError(f"payload has {values.size} values, header expects {int(np.prod(shape))}", location=str(path))
    return header, values.reshape(shape).astype(np.float64)


def grid_from_header(header: dict) -> MetricGrid:
    """Flat or conformal grid described by a field header."""
    metric = header.get("metric", "flat")
    if metric.startswith("conformal(") and metric.endswith(")"):
        return MetricGrid.conformal(header["lower"], header["upper"], header["shape"], metric[10:-1], header["periodic"])
    return MetricGrid(header["lower"], header["upper"], header["shape"], header["periodic"])


def export_csv(path, grid: MetricGrid, fields: Dict[str, np.ndarray]) -> Path:
    """One row per node: coordinates followed by each scalar field."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    coords = grid.coords.reshape(-1, grid.n)
    names = list(fields)
    columns = [np.asarray(fields[k], dtype=np.float64).reshape(-1) for k in names]
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["x", "y", "z"][: grid.n] + names)
        for i in range(len(coords)):
            writer.writerow([repr(float(c)) for c in coords[i]] + [repr(float(col[i])) for col in columns])
    logger.info(f"exported {len(names)} field(s) to {path}")
    return path
