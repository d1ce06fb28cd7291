"""Point clouds and the flat CSV formats used throughout the package."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


class FormatError(ValueError):
    pass


def fmt(x: float) -> str:
    """Round-trippable text for a float (17 significant digits)."""
    return format(float(x), ".17g")


@dataclass(frozen=True)
class PointCloud:
    coords: np.ndarray
    values: np.ndarray | None = None
    t: np.ndarray | None = None

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=float)
        if c.ndim == 1:
            c = c[:, None]
        if c.ndim != 2:
            raise FormatError("coords must be an (N, d) array")
        object.__setattr__(self, "coords", c)
        for name in ("values", "t"):
            arr = getattr(self, name)
            if arr is not None:
                arr = np.asarray(arr, dtype=float).reshape(-1)
                if arr.shape[0] != c.shape[0]:
                    raise FormatError(f"{name} length {arr.shape[0]} != {c.shape[0]} points")
                object.__setattr__(self, name, arr)

    def __len__(self) -> int:
        return self.coords.shape[0]

    @property
    def dim(self) -> int:
        return self.coords.shape[1]

    def with_values(self, values) -> "PointCloud":
        return PointCloud(self.coords, values, self.t)

    def subset(self, idx) -> "PointCloud":
        return PointCloud(
            self.coords[idx],
            None if self.values is None else self.values[idx],
            None if self.t is None else self.t[idx],
        )


def write_csv(path: str | Path | None, header: Sequence[str], rows: Iterable[Sequence]) -> str:
    """Write ``rows`` with a header; floats at 17 significant digits, LF endings.

    Returns the text; writes it when ``path`` is given.
    """
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(x) if isinstance(x, (float, np.floating)) else x for x in row])
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


def read_table(path: str | Path) -> tuple[list[str], np.ndarray]:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise FormatError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    body = [r for r in rows[1:] if r and any(cell.strip() for cell in r)]
    try:
        data = np.array([[float(c) for c in r] for r in body], dtype=float)
    except ValueError as exc:
        raise FormatError(f"{path}: non-numeric entry ({exc})") from None
    if data.size == 0:
        data = np.zeros((0, len(header)))
    if data.shape[1] != len(header):
        raise FormatError(f"{path}: rows do not match header width")
    return header, data


def read_pointcloud(path: str | Path, require_values: bool = True) -> PointCloud:
    """Read ``x1,...,xn[,t][,f]``."""
    header, data = read_table(path)
    xs = [h for h in header if h.startswith("x") and h[1:].isdigit()]
    expected = [f"x{i}" for i in range(1, len(xs) + 1)]
    if not xs or header[: len(xs)] != expected:
        raise FormatError(f"{path}: header must start with x1..xn, got {header}")
    rest = header[len(xs):]
    if any(h not in ("t", "f") for h in rest) or len(set(rest)) != len(rest):
        raise FormatError(f"{path}: unexpected columns {rest}")
    if require_values and "f" not in rest:
        raise FormatError(f"{path}: missing value column f")
    col = {h: i for i, h in enumerate(header)}
    coords = data[:, : len(xs)]
    values = data[:, col["f"]] if "f" in col else None
    t = data[:, col["t"]] if "t" in col else None
    return PointCloud(coords, values, t)


def write_pointcloud(path: str | Path | None, cloud: PointCloud) -> str:
    header = [f"x{i}" for i in range(1, cloud.dim + 1)]
    cols = [cloud.coords[:, i] for i in range(cloud.dim)]
    if cloud.t is not None:
        header.append("t")
        cols.append(cloud.t)
    if cloud.values is not None:
        header.append("f")
        cols.append(cloud.values)
    rows = zip(*[[float(v) for v in c] for c in cols]) if cols else []
    return write_csv(path, header, rows)
