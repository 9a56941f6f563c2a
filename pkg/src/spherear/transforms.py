"""Maps from compositions and densities to sphere points, and back.

Compositions go through the componentwise square root (``psr``); densities on a
rectangular grid go through the pointwise square root (``fpsr``) into the
weighted space whose weights are the cell areas. Under this map the geodesic
distance is the Fisher-Rao distance between densities.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionMismatchError, FormatError
from .hilbert import SpherePoint, geodesic_distance

log = logging.getLogger(__name__)

SUM_TOL = 1e-9
DENSITY_TOL = 1e-6
DEFAULT_CELLS = 50
DEFAULT_BANDWIDTH_SCALE = 0.2
KERNEL_TRUNCATION = 3.0


# --------------------------------------------------------------------------
# Compositions


@dataclass(frozen=True, eq=False)
class Composition:
    """Nonnegative parts summing to ``kappa``."""

    parts: np.ndarray
    kappa: float = 1.0

    def __post_init__(self):
        parts = np.array(self.parts, dtype=float).ravel()
        if self.kappa <= 0:
            raise ValueError("kappa must be positive")
        if np.any(parts < 0):
            raise ValueError(f"composition has negative parts: {parts[parts < 0]}")
        if abs(parts.sum() - self.kappa) > SUM_TOL * max(1.0, self.kappa):
            raise ValueError(f"parts sum to {parts.sum()!r}, expected kappa={self.kappa!r}")
        parts.setflags(write=False)
        object.__setattr__(self, "parts", parts)

    @classmethod
    def closure(cls, parts, kappa: float = 1.0) -> "Composition":
        parts = np.asarray(parts, dtype=float)
        total = parts.sum()
        if total <= 0:
            raise ValueError("cannot close a composition with zero total")
        return cls(parts * (kappa / total), kappa)


def psr(c: Composition) -> SpherePoint:
    """``(sqrt(z_1 / kappa), ..., sqrt(z_d / kappa))``."""
    return SpherePoint.normalized(np.sqrt(c.parts / c.kappa))


def psr_inverse(x: SpherePoint, kappa: float = 1.0) -> Composition:
    vals = np.asarray(x.values)
    if np.any(vals < -1e-9):
        raise ValueError("point has negative components; project it into the orthant first")
    sq = np.square(np.maximum(vals, 0.0))
    return Composition(sq * (kappa / sq.sum()), kappa)


def ternary_coordinates(parts) -> np.ndarray:
    """Planar ternary-plot coordinates of 3-part compositions (rows).

    Corner A (first part) sits at (0, 0), B at (1, 0) and C at (1/2, sqrt(3)/2).
    """
    P = np.atleast_2d(np.asarray(parts, dtype=float))
    if P.shape[1] != 3:
        raise DimensionMismatchError(P.shape[1], 3, "composition and ternary plot")
    P = P / P.sum(axis=1, keepdims=True)
    return np.column_stack([P[:, 1] + 0.5 * P[:, 2], P[:, 2] * np.sqrt(3.0) / 2.0])


def spherical_coordinates(points) -> np.ndarray:
    """Longitude and latitude in degrees of points on the unit 2-sphere (rows)."""
    X = np.atleast_2d(np.asarray(points, dtype=float))
    if X.shape[1] != 3:
        raise DimensionMismatchError(X.shape[1], 3, "point and 2-sphere")
    lon = np.degrees(np.arctan2(X[:, 1], X[:, 0]))
    lat = np.degrees(np.arcsin(np.clip(X[:, 2], -1.0, 1.0)))
    return np.column_stack([lon, lat])


# --------------------------------------------------------------------------
# Grids and densities


@dataclass(frozen=True)
class GridAxis:
    min: float
    max: float
    cells: int

    def __post_init__(self):
        if not self.max > self.min:
            raise ValueError(f"grid axis needs max > min, got [{self.min}, {self.max}]")
        if int(self.cells) < 1:
            raise ValueError("grid axis needs at least one cell")
        object.__setattr__(self, "cells", int(self.cells))
        object.__setattr__(self, "min", float(self.min))
        object.__setattr__(self, "max", float(self.max))

    @property
    def width(self) -> float:
        return (self.max - self.min) / self.cells

    @property
    def edges(self) -> np.ndarray:
        return np.linspace(self.min, self.max, self.cells + 1)

    @property
    def centers(self) -> np.ndarray:
        return self.min + (np.arange(self.cells) + 0.5) * self.width

    def to_dict(self) -> dict:
        return {"min": self.min, "max": self.max, "cells": self.cells}


@dataclass(frozen=True)
class Grid:
    """Closed rectangle split into equal cells; values are stored row-major (C order)."""

    axes: tuple

    def __post_init__(self):
        axes = tuple(a if isinstance(a, GridAxis) else GridAxis(**a) for a in self.axes)
        if len(axes) not in (1, 2):
            raise ValueError("only 1-D and 2-D grids are supported")
        object.__setattr__(self, "axes", axes)

    @property
    def shape(self) -> tuple:
        return tuple(a.cells for a in self.axes)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def cell_area(self) -> float:
        return float(np.prod([a.width for a in self.axes]))

    @property
    def cell_weights(self) -> np.ndarray:
        return np.full(self.size, self.cell_area)

    @property
    def centers(self) -> np.ndarray:
        """Cell centers, shape ``(size, D)``, in storage order."""
        mesh = np.meshgrid(*[a.centers for a in self.axes], indexing="ij")
        return np.column_stack([m.ravel() for m in mesh])

    def to_dict(self) -> list:
        return [a.to_dict() for a in self.axes]

    @classmethod
    def from_dict(cls, axes: Sequence[dict]) -> "Grid":
        return cls(tuple(GridAxis(a["min"], a["max"], a["cells"]) for a in axes))

    @classmethod
    def parse(cls, text: str) -> "Grid":
        """Parse ``"AX:min:max:cells[,AX2:min:max:cells]"`` (axis names are labels only)."""
        axes = []
        for part in text.split(","):
            fields = part.strip().split(":")
            if len(fields) != 4:
                raise ValueError(f"bad grid axis {part!r}; expected NAME:min:max:cells")
            _, lo, hi, cells = fields
            axes.append(GridAxis(float(lo), float(hi), int(cells)))
        return cls(tuple(axes))

    @classmethod
    def covering(cls, samples: np.ndarray, cells: int = DEFAULT_CELLS, pad: float = 0.1) -> "Grid":
        """Grid over the sample range widened by ``pad`` of the range on each side."""
        samples = np.atleast_2d(np.asarray(samples, dtype=float))
        if samples.shape[0] == 1:
            samples = samples.T
        axes = []
        for j in range(samples.shape[1]):
            lo, hi = samples[:, j].min(), samples[:, j].max()
            span = hi - lo if hi > lo else 1.0
            axes.append(GridAxis(lo - pad * span, hi + pad * span, cells))
        return cls(tuple(axes))


@dataclass(frozen=True, eq=False)
class DensityGrid:
    """Nonnegative cell values integrating to one over the grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=float).ravel()
        if vals.size != self.grid.size:
            raise DimensionMismatchError(vals.size, self.grid.size, "density values and grid cells")
        if np.any(vals < 0):
            raise ValueError("density has negative values")
        total = float(np.dot(vals, self.grid.cell_weights))
        if abs(total - 1.0) > DENSITY_TOL:
            raise ValueError(f"density integrates to {total!r}, not 1")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def normalized(cls, grid: Grid, values) -> "DensityGrid":
        vals = np.asarray(values, dtype=float).ravel()
        if np.any(vals < 0):
            raise ValueError("density has negative values")
        total = float(np.dot(vals, grid.cell_weights))
        if total <= 0:
            raise ValueError("density has zero mass")
        return cls(grid, vals / total)

    def to_dict(self) -> dict:
        return {"axes": self.grid.to_dict(), "values": self.values.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "DensityGrid":
        try:
            grid = Grid.from_dict(data["axes"])
            return cls.normalized(grid, data["values"])
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"malformed density grid: {exc}") from exc


def fpsr(f: DensityGrid) -> SpherePoint:
    """Square root of the density as a point of the weighted sphere."""
    return SpherePoint.normalized(np.sqrt(f.values), f.grid.cell_weights)


def fpsr_inverse(x: SpherePoint, grid: Grid) -> DensityGrid:
    vals = np.asarray(x.values)
    if vals.size != grid.size:
        raise DimensionMismatchError(vals.size, grid.size, "point and grid")
    if np.any(vals < -1e-9):
        raise ValueError("point has negative components; project it into the orthant first")
    return DensityGrid.normalized(grid, np.square(np.maximum(vals, 0.0)))


def fisher_rao_distance(f: DensityGrid, g: DensityGrid) -> float:
    """``arccos integral sqrt(f g)`` on a shared grid."""
    if f.grid != g.grid:
        raise DimensionMismatchError(f.grid.size, g.grid.size, "densities on different grids")
    return geodesic_distance(fpsr(f), fpsr(g))


def _smoothing_matrix(centers: np.ndarray, h: float) -> np.ndarray:
    """Row-normalized truncated Gaussian weights; each row sums to one inside the grid."""
    n = centers.size
    if h <= 0:
        return np.eye(n)
    diff = centers[:, None] - centers[None, :]
    K = np.exp(-0.5 * (diff / h) ** 2)
    K[np.abs(diff) > KERNEL_TRUNCATION * h] = 0.0
    return K / K.sum(axis=1, keepdims=True)


def estimate_density(
    samples,
    grid: Grid | None = None,
    bandwidth_scale: float = DEFAULT_BANDWIDTH_SCALE,
) -> DensityGrid:
    """Histogram on ``grid`` smoothed by a separable truncated Gaussian kernel.

    The bandwidth on each axis is ``bandwidth_scale`` times the sample range on
    that axis. Kernel weights are renormalized within the grid at every cell,
    which corrects the boundary bias, and the result is rescaled to integrate
    to one. Samples outside the grid are ignored.
    """
    X = np.asarray(samples, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.shape[0] < 2:
        raise ValueError("need at least two samples")
    if X.shape[1] not in (1, 2):
        raise ValueError(f"only 1-D and 2-D samples are supported, got D={X.shape[1]}")
    if np.all(X == X[0]):
        raise ValueError("degenerate sample: all samples identical")
    if grid is None:
        grid = Grid.covering(X)
    if len(grid.axes) != X.shape[1]:
        raise DimensionMismatchError(X.shape[1], len(grid.axes), "sample dimension and grid")
    counts, _ = np.histogramdd(X, bins=[a.edges for a in grid.axes])
    if counts.sum() == 0:
        raise ValueError("no samples fall inside the grid")
    dens = counts / (counts.sum() * grid.cell_area)
    for j, axis in enumerate(grid.axes):
        h = bandwidth_scale * float(X[:, j].max() - X[:, j].min())
        S = _smoothing_matrix(axis.centers, h)
        dens = np.moveaxis(np.tensordot(S, dens, axes=([1], [j])), 0, j)
    return DensityGrid.normalized(grid, np.maximum(dens, 0.0).ravel())
