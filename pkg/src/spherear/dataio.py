"""Readers and writers for compositional CSV, sample CSV and density-grid JSON series."""
from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import FormatError
from .transforms import (
    Composition,
    DensityGrid,
    Grid,
    estimate_density,
    fpsr,
    psr,
)

log = logging.getLogger(__name__)

ROW_SUM_TOL = 1e-6


@dataclass
class Series:
    """Time-labelled observations ready for fitting.

    ``kind`` is ``"composition"`` or ``"density"``; densities carry their grid.
    """

    kind: str
    times: list
    points: list
    labels: list = field(default_factory=list)
    grid: Grid | None = None
    kappa: float = 1.0

    def __len__(self):
        return len(self.points)

    def head(self, n: int) -> "Series":
        return Series(self.kind, self.times[:n], self.points[:n], self.labels, self.grid, self.kappa)


def _rows(path: Path):
    try:
        with open(path, newline="") as fh:
            rows = [(i, row) for i, row in enumerate(csv.reader(fh), start=1) if any(c.strip() for c in row)]
    except OSError as exc:
        raise FormatError(f"cannot read input: {exc.strerror}", path) from exc
    except (UnicodeDecodeError, csv.Error) as exc:
        raise FormatError(f"cannot parse CSV: {exc}", path) from exc
    if not rows:
        raise FormatError("empty input", path)
    return rows


def _floats(cells, path, line):
    try:
        vals = np.array([float(c) for c in cells])
    except ValueError as exc:
        raise FormatError(f"non-numeric value ({exc})", path, line) from None
    if not np.all(np.isfinite(vals)):
        raise FormatError("non-finite value", path, line)
    return vals


def read_compositions(path) -> Series:
    """Header row, then one row per time: label followed by the parts.

    Rows are closed to sum one; a warning is logged when a row sum is off by more
    than ``ROW_SUM_TOL``.
    """
    path = Path(path)
    rows = _rows(path)
    (_, header), body = rows[0], rows[1:]
    if len(header) < 3:
        raise FormatError("need a time column and at least two parts", path, 1)
    if not body:
        raise FormatError("empty input: header only", path)
    times, points = [], []
    for line, row in body:
        if len(row) != len(header):
            raise FormatError(f"expected {len(header)} columns, got {len(row)}", path, line)
        parts = _floats(row[1:], path, line)
        if np.any(parts < 0):
            raise FormatError("negative composition part", path, line)
        total = parts.sum()
        if total <= 0:
            raise FormatError("composition parts sum to zero", path, line)
        if abs(total - 1.0) > ROW_SUM_TOL:
            log.warning("%s:%d: row sums to %.8g, renormalizing", path, line, total)
        times.append(row[0])
        points.append(psr(Composition.closure(parts)))
    return Series("composition", times, points, labels=[h.strip() for h in header[1:]])


def read_samples(path, grid: Grid | None = None, bandwidth_scale: float = 0.2) -> Series:
    """Columns ``time, coord1[, coord2]``; one density is estimated per time label.

    Without ``grid`` a common grid covering every sample is used so that all
    densities live in the same space.
    """
    path = Path(path)
    rows = _rows(path)
    start = 0
    try:
        float(rows[0][1][1])
    except (ValueError, IndexError):
        start = 1
    body = rows[start:]
    if not body:
        raise FormatError("empty input: header only", path)
    width = len(body[0][1])
    if width not in (2, 3):
        raise FormatError("expected columns time, coord1[, coord2]", path, body[0][0])
    groups: dict = {}
    for line, row in body:
        if len(row) != width:
            raise FormatError(f"expected {width} columns, got {len(row)}", path, line)
        groups.setdefault(row[0], []).append(_floats(row[1:], path, line))
    all_samples = np.vstack([np.vstack(g) for g in groups.values()])
    if grid is None:
        grid = Grid.covering(all_samples)
    elif len(grid.axes) != width - 1:
        raise FormatError(f"grid has {len(grid.axes)} axes but samples have {width - 1} coordinates", path)
    times, points = [], []
    for t, g in groups.items():
        try:
            dens = estimate_density(np.vstack(g), grid, bandwidth_scale)
        except ValueError as exc:
            raise FormatError(f"time {t!r}: {exc}", path) from exc
        times.append(t)
        points.append(fpsr(dens))
    return Series("density", times, points, grid=grid)


def read_density_series(path) -> Series:
    """JSON ``{"axes": [{min, max, cells}, ...], "series": [{"time": t, "values": [...]}, ...]}``."""
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise FormatError(f"cannot read input: {exc.strerror}", path) from exc
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc.msg}", path, exc.lineno) from exc
    try:
        grid = Grid.from_dict(data["axes"])
        entries = data["series"]
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed density series: {exc}", path) from exc
    if not entries:
        raise FormatError("empty input: no densities", path)
    times, points = [], []
    for i, e in enumerate(entries):
        try:
            dens = DensityGrid.normalized(grid, e["values"])
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"series entry {i}: {exc}", path) from exc
        times.append(e.get("time", i))
        points.append(fpsr(dens))
    return Series("density", times, points, grid=grid)


def read_series(path, fmt: str, grid: Grid | None = None, bandwidth_scale: float = 0.2) -> Series:
    if fmt == "composition":
        return read_compositions(path)
    if fmt == "samples":
        return read_samples(path, grid, bandwidth_scale)
    if fmt == "density":
        return read_density_series(path)
    raise ValueError(f"unknown format {fmt!r}")


def write_compositions(path, times, compositions, labels=None) -> None:
    comps = [np.asarray(c.parts if isinstance(c, Composition) else c) for c in compositions]
    d = comps[0].size
    labels = labels or [f"part{i + 1}" for i in range(d)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["time", *labels])
        for t, c in zip(times, comps):
            w.writerow([t, *(repr(float(v)) for v in c)])


def write_density_series(path, grid: Grid, times, densities) -> None:
    data = {
        "axes": grid.to_dict(),
        "series": [{"time": t, "values": np.asarray(d.values).tolist()} for t, d in zip(times, densities)],
    }
    Path(path).write_text(json.dumps(data))


def write_json(path, data) -> None:
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
