"""Weighted inner-product spaces and the geometry of their unit spheres.

Vectors carry quadrature weights so that the same code handles ``R^d``
(all-ones weights) and functions sampled on a grid, where
``<f, g> = sum_i w_i f_i g_i`` approximates the L2 integral.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConvergenceError, DimensionMismatchError, GeometryError

UNIT_TOL = 1e-9
# <x1, x2> below -1 + ANTIPODAL_TOL counts as antipodal.
ANTIPODAL_TOL = 1e-12
# Angles below this count as identical points.
IDENTICAL_ANGLE = 1e-14


@dataclass(frozen=True, eq=False)
class AmbientVector:
    """Element of a weighted inner-product space.

    Parameters
    ----------
    values : array_like
        Coordinates, length ``d >= 2``.
    weights : array_like, optional
        Strictly positive quadrature weights. Defaults to all ones.
    """

    values: np.ndarray
    weights: np.ndarray = None

    def __post_init__(self):
        values = np.array(self.values, dtype=float).ravel()
        if self.weights is None:
            weights = np.ones_like(values)
        else:
            weights = np.asarray(self.weights, dtype=float).ravel()
        if values.size < 2:
            raise ValueError(f"ambient dimension must be at least 2, got {values.size}")
        if weights.size != values.size:
            raise DimensionMismatchError(values.size, weights.size, "values and weights")
        if not np.all(weights > 0):
            raise ValueError("quadrature weights must be strictly positive")
        values.setflags(write=False)
        if weights.flags.writeable:
            weights = weights.copy()
            weights.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "weights", weights)

    @property
    def dim(self) -> int:
        return self.values.size

    def norm(self) -> float:
        return float(np.sqrt(max(inner(self, self), 0.0)))

    def __len__(self):
        return self.dim

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.dim}, values={np.array2string(self.values[:6], precision=4)}{'...' if self.dim > 6 else ''})"


class SpherePoint(AmbientVector):
    """Unit-norm ``AmbientVector``; the norm is checked at construction."""

    def __post_init__(self):
        super().__post_init__()
        nrm = self.norm()
        if abs(nrm - 1.0) > UNIT_TOL:
            raise ValueError(f"not a unit vector: weighted norm {nrm!r}")

    @property
    def vector(self) -> AmbientVector:
        return AmbientVector(self.values, self.weights)

    @classmethod
    def normalized(cls, values, weights=None) -> "SpherePoint":
        """Scale ``values`` to unit weighted norm."""
        vec = AmbientVector(values, weights)
        nrm = vec.norm()
        if nrm == 0.0:
            raise GeometryError("cannot normalize the zero vector")
        return cls(vec.values / nrm, vec.weights)


def same_weights(w1: np.ndarray, w2: np.ndarray) -> bool:
    return w1 is w2 or (w1.shape == w2.shape and np.array_equal(w1, w2))


def check_space(x: AmbientVector, y: AmbientVector) -> None:
    if x.dim != y.dim:
        raise DimensionMismatchError(x.dim, y.dim)
    if not same_weights(x.weights, y.weights):
        raise DimensionMismatchError(x.dim, y.dim, "vectors with different quadrature weights")


def inner(x: AmbientVector, y: AmbientVector) -> float:
    """Weighted inner product ``sum_i w_i x_i y_i``."""
    check_space(x, y)
    return float(np.dot(x.weights * x.values, y.values))


def geodesic_distance(x1: SpherePoint, x2: SpherePoint) -> float:
    """Great-circle distance ``arccos <x1, x2>`` in radians.

    Evaluated as ``2 atan2(|x1 - x2|, |x1 + x2|)``, which equals the clamped
    arccos but keeps full precision for nearly identical or antipodal points.
    """
    check_space(x1, x2)
    w = x1.weights
    diff = x1.values - x2.values
    tot = x1.values + x2.values
    return float(2.0 * np.arctan2(np.sqrt(np.dot(w * diff, diff)), np.sqrt(np.dot(w * tot, tot))))


def orthonormal_residual(x1: SpherePoint, x2: SpherePoint):
    """Return ``(theta, u2)``: the angle and the unit vector of ``x2`` orthogonal to ``x1``.

    ``u2`` is None when the points coincide. Antipodal points raise.
    """
    c = inner(x1, x2)
    if c < -1.0 + ANTIPODAL_TOL:
        raise GeometryError("geodesic undefined between antipodal points")
    resid = x2.values - c * x1.values
    nrm = np.sqrt(np.dot(x1.weights * resid, resid))
    theta = float(np.arctan2(nrm, c))
    if theta < IDENTICAL_ANGLE:
        return 0.0, None
    return theta, resid / nrm


def geodesic_point(x1: SpherePoint, x2: SpherePoint, a: float) -> SpherePoint:
    """Point at fraction ``a`` of the way along the minimizing geodesic from x1 to x2."""
    theta, u2 = orthonormal_residual(x1, x2)
    if u2 is None:
        return x1
    t = a * theta
    return SpherePoint(np.cos(t) * x1.values + np.sin(t) * u2, x1.weights)


def log_map(z: SpherePoint, x: SpherePoint) -> np.ndarray:
    """Tangent vector at ``z`` pointing to ``x`` with length ``d(z, x)``."""
    theta, u2 = orthonormal_residual(z, x)
    if u2 is None:
        return np.zeros_like(z.values)
    return theta * u2


def exp_map(z: SpherePoint, v: np.ndarray) -> SpherePoint:
    """Follow the geodesic from ``z`` with initial velocity ``v`` (tangent at ``z``) for unit time."""
    t = float(np.sqrt(np.dot(z.weights * v, v)))
    if t == 0.0:
        return z
    out = np.cos(t) * z.values + (np.sin(t) / t) * v
    return SpherePoint.normalized(out, z.weights)


def _stack(points: Sequence[SpherePoint]):
    first = points[0]
    for p in points[1:]:
        check_space(first, p)
    return np.vstack([p.values for p in points]), first.weights


def _mean_log(z: np.ndarray, X: np.ndarray, w: np.ndarray):
    """Mean of log maps at z of rows of X, and the objective mean d^2."""
    c = X @ (w * z)
    resid = X - np.outer(c, z)
    rn = np.sqrt(np.einsum("ij,ij->i", resid * w, resid))
    theta = np.arctan2(rn, c)
    scale = np.ones_like(theta)
    ok = rn > 0
    scale[ok] = theta[ok] / rn[ok]
    v = (scale[:, None] * resid).mean(axis=0)
    v -= np.dot(w * v, z) * z
    return v, float(np.mean(theta**2))


def frechet_mean(
    points: Sequence[SpherePoint], max_iter: int = 200, tol: float = 1e-10
) -> SpherePoint:
    """Intrinsic (Karcher) mean minimizing the mean squared geodesic distance.

    Gradient descent with the exponential map, unit step halved whenever the
    objective increases. ``tol`` bounds the norm of the mean log map, which is
    half the Riemannian gradient norm of the objective.

    Raises
    ------
    ConvergenceError
        If ``max_iter`` iterations do not reach ``tol``.
    """
    if len(points) == 0:
        raise ValueError("frechet_mean needs at least one point")
    if len(points) == 1:
        return points[0]
    X, w = _stack(points)
    z = X.mean(axis=0)
    nrm = np.sqrt(np.dot(w * z, z))
    z = X[0].copy() if nrm < 1e-8 else z / nrm

    v, obj = _mean_log(z, X, w)
    gnorm = float(np.sqrt(np.dot(w * v, v)))
    for _ in range(max_iter):
        if gnorm <= tol:
            return SpherePoint.normalized(z, w)
        step = 1.0
        while True:
            cand = exp_map(SpherePoint.normalized(z, w), step * v).values
            v_new, obj_new = _mean_log(cand, X, w)
            # Near the optimum the objective changes below rounding; do not count that as an increase.
            if obj_new <= obj + 16 * np.finfo(float).eps * obj or step < 1e-12:
                break
            step *= 0.5
        z, v, obj = cand, v_new, obj_new
        gnorm = float(np.sqrt(np.dot(w * v, v)))
    if gnorm <= tol:
        return SpherePoint.normalized(z, w)
    raise ConvergenceError("Frechet mean iteration did not converge", gnorm)


def frechet_gradient_norm(z: SpherePoint, points: Sequence[SpherePoint]) -> float:
    """Riemannian gradient norm of ``z -> mean_t d^2(z, x_t)``."""
    X, w = _stack(points)
    check_space(z, points[0])
    v, _ = _mean_log(z.values, X, w)
    return 2.0 * float(np.sqrt(np.dot(w * v, v)))
