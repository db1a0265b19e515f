"""CSV and JSON interchange with atomic writes and full-precision round trips."""

import json
import os
import tempfile
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .exceptions import DataError

# %.17g round-trips IEEE doubles exactly
_FLOAT_FMT = "%.17g"


def _atomic_write_text(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_matrix_csv(path, m: np.ndarray) -> None:
    """Dense matrix as headerless CSV at full decimal precision."""
    m = np.atleast_2d(np.asarray(m, dtype=float))
    rows = [",".join(_FLOAT_FMT % v for v in row) for row in m]
    _atomic_write_text(Path(path), "\n".join(rows) + "\n")


def read_matrix_csv(path) -> np.ndarray:
    """Read a dense headerless CSV matrix."""
    try:
        m = np.loadtxt(path, delimiter=",", ndmin=2)
    except OSError as exc:
        raise DataError(f"cannot read matrix file {path}: {exc}") from exc
    except ValueError as exc:
        raise DataError(f"malformed matrix file {path}: {exc}") from exc
    return m


def write_samples_csv(path, x: np.ndarray, header: Optional[Sequence[str]] = None) -> None:
    """Sample block as CSV, one observation per row, optional header."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    lines = []
    if header is not None:
        if len(header) != x.shape[1]:
            raise ValueError("header length does not match the number of columns")
        lines.append(",".join(header))
    lines.extend(",".join(_FLOAT_FMT % v for v in row) for row in x)
    _atomic_write_text(Path(path), "\n".join(lines) + "\n")


def read_samples_csv(path) -> np.ndarray:
    """Read a sample CSV; a non-numeric first row is treated as a header."""
    try:
        with open(path) as handle:
            first = handle.readline()
    except OSError as exc:
        raise DataError(f"cannot read sample file {path}: {exc}") from exc
    if not first.strip():
        raise DataError(f"sample file {path} is empty")
    skip = 0
    try:
        [float(tok) for tok in first.strip().split(",")]
    except ValueError:
        skip = 1
    try:
        x = np.loadtxt(path, delimiter=",", skiprows=skip, ndmin=2)
    except ValueError as exc:
        raise DataError(f"malformed sample file {path}: {exc}") from exc
    if x.shape[0] < 1:
        raise DataError(f"sample file {path} holds no data rows")
    return x


def write_json(path, obj) -> None:
    """Deterministic JSON: sorted keys, 2-space indent, trailing newline."""
    _atomic_write_text(Path(path), json.dumps(obj, indent=2, sort_keys=True) + "\n")


def write_csv_rows(path, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    """Small tidy-CSV writer for report tables."""
    lines = [",".join(header)]
    for row in rows:
        out = []
        for v in row:
            if isinstance(v, float):
                out.append(_FLOAT_FMT % v)
            else:
                out.append(str(v))
        lines.append(",".join(out))
    _atomic_write_text(Path(path), "\n".join(lines) + "\n")
