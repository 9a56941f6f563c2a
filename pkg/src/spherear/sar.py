"""SAR and DSAR models: differencing, Yule-Walker fitting, asymptotics and prediction.

Both models run an ordinary AR(p) recursion on skew-symmetric operators
``R_t``. SAR differences each observation against the Frechet mean; DSAR
differences consecutive observations. Autocovariances use the Hilbert-Schmidt
inner product, computed in a joint orthonormal frame of all atom vectors.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import toeplitz

from .errors import (
    DegenerateAutocovarianceError,
    FormatError,
    GeometryError,
    ModelVersionError,
    ProjectionError,
    StationarityError,
)
from .hilbert import AmbientVector, SpherePoint, frechet_mean, geodesic_distance
from .skew import (
    SkewOperator,
    coordinates,
    compress,
    expm_skew,
    from_coordinates,
    hs_inner,
    joint_basis,
    coefficient_matrix,
    lincomb,
    spherical_log,
)

MODEL_FORMAT = "sar-model/1"
MAX_CONDITION = 1e12
# Coordinate frames larger than this (n * k(k-1)/2 entries) fall back to pairwise inner products.
MAX_COORDINATE_ENTRIES = 20_000_000


class Variant(str, enum.Enum):
    SAR = "sar"
    DSAR = "dsar"


class Projection(str, enum.Enum):
    NONE = "none"
    PROJ1 = "proj1"
    PROJ2 = "proj2"


def default_projection(variant: Variant) -> Projection:
    """Rotate-back for SAR, nearest point for DSAR."""
    return Projection.PROJ1 if Variant(variant) is Variant.SAR else Projection.PROJ2


# --------------------------------------------------------------------------
# Differencing


@dataclass(frozen=True)
class DifferencedSeries:
    """Operators ``R_t`` of a spherical series.

    For SAR, ``operators[t]`` rotates ``base`` (the Frechet mean) onto ``x_t``.
    For DSAR, ``operators[t]`` rotates ``x_t`` onto ``x_{t+1}`` and ``base`` is None.
    """

    variant: Variant
    operators: tuple
    base: SpherePoint | None
    last_observation: SpherePoint

    @property
    def weights(self) -> np.ndarray:
        return self.last_observation.weights

    def __len__(self):
        return len(self.operators)


def build_differenced_series(points: Sequence[SpherePoint], variant) -> DifferencedSeries:
    variant = Variant(variant)
    points = list(points)
    if len(points) < 2:
        raise ValueError("need at least two observations")
    if variant is Variant.SAR:
        base = frechet_mean(points)
        ops = []
        for t, x in enumerate(points):
            try:
                ops.append(spherical_log(base, x))
            except GeometryError:
                raise GeometryError(f"observation {t} is antipodal to the Frechet mean") from None
        return DifferencedSeries(variant, tuple(ops), base, points[-1])
    ops = []
    for t in range(len(points) - 1):
        try:
            ops.append(spherical_log(points[t], points[t + 1]))
        except GeometryError:
            raise GeometryError(f"observations {t} and {t + 1} are antipodal") from None
    return DifferencedSeries(variant, tuple(ops), None, points[-1])


# --------------------------------------------------------------------------
# Autocovariances and Yule-Walker


@dataclass(frozen=True)
class AutocovSequence:
    """Sample autocovariances ``lambda_0 .. lambda_p`` from ``n`` operators."""

    lags: np.ndarray
    n: int

    @property
    def p(self) -> int:
        return self.lags.size - 1

    @property
    def toeplitz(self) -> np.ndarray:
        return toeplitz(self.lags[:-1])


@dataclass(frozen=True)
class CenteredSeries:
    """Centered operators in a joint frame: ``X[t] @ X[s] == <R_t - mu, R_s - mu>``."""

    mean_op: SkewOperator
    basis: np.ndarray | None
    X: np.ndarray | None
    centered_ops: tuple | None = None

    @property
    def n(self) -> int:
        return len(self.X) if self.X is not None else len(self.centered_ops)

    def operator(self, t: int) -> SkewOperator:
        if self.X is not None:
            return from_coordinates(self.X[t], self.basis, self.mean_op.weights)
        return self.centered_ops[t]

    def lagged_inner(self, k: int) -> np.ndarray:
        """``<C_t, C_{t+k}>`` for ``t = 0 .. n-k-1``."""
        if self.X is not None:
            return np.einsum("ij,ij->i", self.X[: self.n - k], self.X[k:])
        ops = self.centered_ops
        return np.array([hs_inner(ops[t], ops[t + k]) for t in range(len(ops) - k)])


def center(operators: Sequence[SkewOperator]) -> CenteredSeries:
    """Subtract the sample mean operator ``mu = (1/n) sum_t R_t``."""
    ops = list(operators)
    n = len(ops)
    if n == 0:
        raise ValueError("empty operator series")
    mean_op = compress(lincomb([(1.0 / n, R) for R in ops], auto_compress=False))
    basis = joint_basis(ops)
    k = basis.shape[0]
    if n * k * (k - 1) // 2 <= MAX_COORDINATE_ENTRIES:
        _, X = coordinates(ops, basis)
        _, mu = coordinates([mean_op], basis)
        return CenteredSeries(mean_op, basis, X - mu[0])
    centered = tuple(lincomb([(1.0, R), (-1.0, mean_op)]) for R in ops)
    return CenteredSeries(mean_op, None, None, centered)


def _as_operators(series) -> list:
    if isinstance(series, DifferencedSeries):
        return list(series.operators)
    return list(series)


def autocovariances_from_coordinates(X: np.ndarray, p: int) -> AutocovSequence:
    """Autocovariances of an already centered coordinate series (divisor ``n - k``)."""
    n = X.shape[0]
    if p >= n:
        raise ValueError(f"order p={p} must be smaller than the series length n={n}")
    lags = np.array([np.einsum("ij,ij->", X[: n - k], X[k:]) / (n - k) for k in range(p + 1)])
    return AutocovSequence(lags, n)


def autocovariances(series, p: int, centered: CenteredSeries | None = None) -> AutocovSequence:
    """Sample autocovariances of the operator series, each lag divided by ``n - k``."""
    ops = _as_operators(series)
    n = len(ops)
    if p < 1:
        raise ValueError("order p must be at least 1")
    if p >= n:
        raise ValueError(f"order p={p} must be smaller than the series length n={n}")
    if centered is None:
        centered = center(ops)
    lags = np.array([centered.lagged_inner(k).sum() / (n - k) for k in range(p + 1)])
    return AutocovSequence(lags, n)


def yule_walker(acov: AutocovSequence) -> np.ndarray:
    """Solve the Toeplitz system ``Lambda alpha = (lambda_1, ..., lambda_p)``."""
    lags = np.asarray(acov.lags, dtype=float)
    if lags[0] <= 0.0 or not np.isfinite(lags).all():
        raise DegenerateAutocovarianceError("degenerate autocovariance: lambda_0 is zero")
    Lam = toeplitz(lags[:-1])
    cond = np.linalg.cond(Lam)
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise DegenerateAutocovarianceError(
            f"degenerate autocovariance: Toeplitz condition number {cond:.3e}"
        )
    return np.linalg.solve(Lam, lags[1:])


# --------------------------------------------------------------------------
# Stationarity and psi weights


@dataclass(frozen=True)
class StationarityReport:
    stationary: bool
    min_root_modulus: float
    roots: np.ndarray

    def to_dict(self) -> dict:
        return {
            "stationary": bool(self.stationary),
            "min_root_modulus": _json_float(self.min_root_modulus),
            "roots": [[float(r.real), float(r.imag)] for r in self.roots],
        }


def ar_roots(alphas) -> np.ndarray:
    """Roots of ``phi(z) = 1 - a_1 z - ... - a_p z^p``."""
    a = np.trim_zeros(np.asarray(alphas, dtype=float), "b")
    if a.size == 0:
        return np.empty(0, dtype=complex)
    C = np.zeros((a.size, a.size))
    C[0] = a
    C[1:, :-1] = np.eye(a.size - 1)
    mu = np.linalg.eigvals(C)
    # phi(z) = prod(1 - mu_i z); a vanishing or subnormal mu_i is a root at infinity.
    roots = np.full(mu.shape, np.inf, dtype=complex)
    nz = mu != 0
    with np.errstate(over="ignore"):
        roots[nz] = 1.0 / mu[nz]
    return roots


def check_stationarity(alphas) -> StationarityReport:
    roots = ar_roots(alphas)
    if roots.size == 0:
        return StationarityReport(True, float("inf"), roots)
    mod = float(np.abs(roots).min())
    return StationarityReport(mod > 1.0, mod, roots)


@dataclass(frozen=True)
class PsiWeights:
    """MA(infinity) weights ``psi_0 .. psi_m`` with ``1/phi(z) = sum_i psi_i z^i``."""

    psi: np.ndarray
    alphas: np.ndarray

    @property
    def m(self) -> int:
        return self.psi.size - 1

    def kappa(self, u: int) -> float:
        u = abs(int(u))
        if u > self.m:
            return 0.0
        return float(np.dot(self.psi[: self.psi.size - u], self.psi[u:]))


def psi_weights(alphas, m: int = 200, tail_tol: float = 1e-12) -> PsiWeights:
    """Recursion ``psi_j = sum_{i<=min(j,p)} a_i psi_{j-i}``, stopped once the last p terms are below ``tail_tol``."""
    alphas = np.asarray(alphas, dtype=float)
    rep = check_stationarity(alphas)
    if not rep.stationary:
        raise StationarityError(
            f"AR polynomial has a root of modulus {rep.min_root_modulus:.6g} <= 1"
        )
    p = alphas.size
    psi = [1.0]
    for j in range(1, m + 1):
        val = 0.0
        for i in range(1, min(j, p) + 1):
            val += alphas[i - 1] * psi[j - i]
        psi.append(val)
        tail = psi[-max(p, 1):]
        if all(abs(v) < tail_tol for v in tail):
            break
    return PsiWeights(np.array(psi), alphas)


# --------------------------------------------------------------------------
# Asymptotic covariance of the autocovariance estimates


@dataclass(frozen=True)
class InnovationMoments:
    """``m1 = E<e1,e1>``, ``m2 = E<e1,e1>^2``, ``c2 = E<e1,e2>^2`` for iid innovations."""

    m1: float
    m2: float
    c2: float

    def to_dict(self) -> dict:
        return {"m1": self.m1, "m2": self.m2, "c2": self.c2}


def _shifted(psi: np.ndarray, s: int, length: int) -> np.ndarray:
    """``out[i] = psi[i + s]`` for ``i < length``, zero outside the support."""
    out = np.zeros(length)
    lo = max(0, -s)
    hi = min(length, psi.size - s)
    if hi > lo:
        out[lo:hi] = psi[lo + s : hi + s]
    return out


def gamma_huv(h: int, u: int, v: int, psi: PsiWeights, moments: InnovationMoments) -> float:
    """Lag-``h`` covariance ``Cov(<C_t, C_{t+u}>, <C_{t+h}, C_{t+h+v}>)``.

    ``(m2 - m1^2 - 2 c2) sum_i psi_i psi_{i+u} psi_{i+h} psi_{i+h+v}
    + c2 (kappa(h) kappa(h+v-u) + kappa(h+v) kappa(h-u))``
    with ``kappa(s) = sum_i psi_i psi_{i+s}`` and ``psi_i = 0`` for ``i < 0``.
    The product of means ``m1^2 kappa(u) kappa(v)`` is subtracted, so the
    terms are summable over ``h``.
    """
    ps = psi.psi
    n = ps.size
    fourth = float(np.dot(ps * _shifted(ps, u, n), _shifted(ps, h, n) * _shifted(ps, h + v, n)))
    k = psi.kappa
    cum = moments.m2 - moments.m1**2 - 2.0 * moments.c2
    return cum * fourth + moments.c2 * (k(h) * k(h + v - u) + k(h + v) * k(h - u))


@dataclass(frozen=True)
class AsymptoticCovariance:
    """Limit covariance ``V`` of ``sqrt(n) (lambda_hat - lambda)`` for lags ``0..p``."""

    V: np.ndarray
    moments: InnovationMoments
    h_max: int
    psi_truncation: int

    def to_dict(self) -> dict:
        return {
            "V": self.V.tolist(),
            "moments": self.moments.to_dict(),
            "h_max": self.h_max,
            "psi_truncation": self.psi_truncation,
        }


def asymptotic_covariance(
    psi: PsiWeights, moments: InnovationMoments, p: int, h_max: int | None = None, tail_tol: float = 1e-12
) -> AsymptoticCovariance:
    """``V[u, v] = sum_{|h| <= h_max} gamma_huv(h, u, v)`` for ``u, v = 0..p``."""
    if h_max is None:
        h_max = 2 * max(psi.m, 1)
    V = np.zeros((p + 1, p + 1))
    tail = 0.0
    for u in range(p + 1):
        for v in range(u, p + 1):
            total = 0.0
            for h in range(-h_max, h_max + 1):
                total += gamma_huv(h, u, v, psi, moments)
            tail = max(
                tail,
                abs(gamma_huv(h_max, u, v, psi, moments)),
                abs(gamma_huv(-h_max, u, v, psi, moments)),
            )
            V[u, v] = V[v, u] = total
    if tail >= tail_tol:
        raise ValueError(f"covariance sum not converged at h_max={h_max}: tail {tail:.3e}")
    return AsymptoticCovariance(V, moments, h_max, psi.m)


def true_autocovariances(psi: PsiWeights, m1: float, p: int) -> np.ndarray:
    """Population ``lambda_k = m1 * kappa(k)`` for ``k = 0..p``."""
    return np.array([m1 * psi.kappa(k) for k in range(p + 1)])


def innovation_moments(residuals: np.ndarray) -> InnovationMoments:
    """Plug-in moments from residual coordinates (rows are innovations)."""
    E = np.asarray(residuals, dtype=float)
    if E.shape[0] < 2:
        raise ValueError("need at least two residuals")
    sq = np.einsum("ij,ij->i", E, E)
    cross = np.einsum("ij,ij->i", E[:-1], E[1:])
    return InnovationMoments(float(sq.mean()), float((sq**2).mean()), float((cross**2).mean()))


# --------------------------------------------------------------------------
# Fitting


@dataclass
class SarModel:
    """Fitted SAR or DSAR model.

    ``history`` holds the last ``p`` centered operators, oldest first.
    """

    variant: Variant
    p: int
    alphas: np.ndarray
    mean_op: SkewOperator
    base: SpherePoint | None
    last_observation: SpherePoint
    history: tuple
    acov: AutocovSequence | None = None
    stationarity: StationarityReport | None = None
    residual_norms: np.ndarray = field(default_factory=lambda: np.empty(0))
    moments: InnovationMoments | None = None
    fit_distances: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    @property
    def weights(self) -> np.ndarray:
        return self.last_observation.weights

    def to_dict(self) -> dict:
        def point(x):
            if x is None:
                return None
            return {"values": x.values.tolist(), "weights": x.weights.tolist()}

        diag = {
            "min_root_modulus": _json_float(self.stationarity.min_root_modulus) if self.stationarity else None,
            "stationary": bool(self.stationarity.stationary) if self.stationarity else None,
            "residual_norms": [float(r) for r in self.residual_norms],
            "lags": [float(v) for v in self.acov.lags] if self.acov is not None else None,
            "n_operators": int(self.acov.n) if self.acov is not None else None,
            "moments": self.moments.to_dict() if self.moments else None,
        }
        return {
            "format": MODEL_FORMAT,
            "variant": self.variant.value,
            "p": int(self.p),
            "alphas": [float(a) for a in self.alphas],
            "mean_op": self.mean_op.to_dict("last_observation.weights"),
            "base": point(self.base),
            "last_observation": point(self.last_observation),
            "history": [C.to_dict("last_observation.weights") for C in self.history],
            "diagnostics": diag,
            "metadata": self.metadata,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SarModel":
        fmt = data.get("format")
        if fmt != MODEL_FORMAT:
            raise ModelVersionError(f"unsupported model format {fmt!r}, expected {MODEL_FORMAT!r}")
        try:
            last = SpherePoint(data["last_observation"]["values"], data["last_observation"]["weights"])
            w = last.weights
            base = None
            if data.get("base") is not None:
                base = SpherePoint(data["base"]["values"], w)
            diag = data.get("diagnostics") or {}
            alphas = np.asarray(data["alphas"], dtype=float)
            p = int(data["p"])
            if alphas.size != p:
                raise FormatError(f"model has p={p} but {alphas.size} alphas")
            history = tuple(SkewOperator.from_dict(h, w) for h in data["history"])
            if len(history) != p:
                raise FormatError(f"model has p={p} but {len(history)} history operators")
            acov = None
            if diag.get("lags") is not None:
                acov = AutocovSequence(np.asarray(diag["lags"], dtype=float), int(diag.get("n_operators") or 0))
            moments = None
            if diag.get("moments"):
                moments = InnovationMoments(**diag["moments"])
            return cls(
                variant=Variant(data["variant"]),
                p=p,
                alphas=alphas,
                mean_op=SkewOperator.from_dict(data["mean_op"], w),
                base=base,
                last_observation=last,
                history=history,
                acov=acov,
                stationarity=check_stationarity(alphas),
                residual_norms=np.asarray(diag.get("residual_norms") or [], dtype=float),
                moments=moments,
                metadata=dict(data.get("metadata") or {}),
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, FormatError):
                raise
            raise FormatError(f"malformed model file: {exc}") from exc


def _json_float(x: float):
    return None if not np.isfinite(x) else float(x)


def ar_residuals(X: np.ndarray, alphas: np.ndarray) -> np.ndarray:
    """Rows ``X[t] - sum_i a_i X[t-i]`` for ``t = p .. n-1``."""
    p = len(alphas)
    n = X.shape[0]
    E = X[p:].copy()
    for i, a in enumerate(alphas, start=1):
        E -= a * X[p - i : n - i]
    return E


def fit(
    points: Sequence[SpherePoint],
    p: int,
    variant,
    *,
    fitted: bool = False,
    projection=None,
) -> SarModel:
    """Fit a SAR or DSAR model of order ``p`` by Yule-Walker.

    With ``fitted=True`` the in-sample one-step-ahead predictions are formed
    (projected with ``projection``, by default the variant's usual choice) and
    their geodesic distances to the observations stored in ``fit_distances``
    as ``(observation index, distance)`` pairs.
    """
    variant = Variant(variant)
    points = list(points)
    if p < 1:
        raise ValueError("order p must be at least 1")
    if len(points) <= p + 1:
        raise ValueError(f"need more than p+1={p + 1} observations, got {len(points)}")
    series = build_differenced_series(points, variant)
    centered = center(series.operators)
    acov = autocovariances(series, p, centered=centered)
    alphas = yule_walker(acov)
    n = centered.n
    history = tuple(centered.operator(t) for t in range(n - p, n))

    if centered.X is not None:
        E = ar_residuals(centered.X, alphas)
        resid_norms = np.sqrt(np.einsum("ij,ij->i", E, E))
        moments = innovation_moments(E) if E.shape[0] >= 2 else None
    else:
        resid_ops = []
        for t in range(p, n):
            terms = [(1.0, centered.operator(t))] + [(-a, centered.operator(t - i)) for i, a in enumerate(alphas, 1)]
            resid_ops.append(lincomb(terms))
        resid_norms = np.array([np.sqrt(max(hs_inner(E, E), 0.0)) for E in resid_ops])
        moments = None

    model = SarModel(
        variant=variant,
        p=p,
        alphas=alphas,
        mean_op=centered.mean_op,
        base=series.base,
        last_observation=series.last_observation,
        history=history,
        acov=acov,
        stationarity=check_stationarity(alphas),
        residual_norms=resid_norms,
        moments=moments,
    )
    if fitted:
        model.fit_distances = in_sample_fit(points, series, centered, model, projection)
    return model


def in_sample_fit(points, series, centered, model, projection=None):
    """One-step-ahead fitted points and their distances to the observations."""
    proj = default_projection(model.variant) if projection is None else Projection(projection)
    out = []
    for t in range(model.p, centered.n):
        terms = [(1.0, model.mean_op)] + [
            (a, centered.operator(t - i)) for i, a in enumerate(model.alphas, start=1)
        ]
        R_hat = compress(lincomb(terms))
        if model.variant is Variant.SAR:
            start, obs_index = series.base, t
        else:
            start, obs_index = points[t], t + 1
        fc = _forecast_from(R_hat, start, proj)
        out.append((obs_index, geodesic_distance(fc.point, points[obs_index])))
    return out


# --------------------------------------------------------------------------
# Prediction and projections


def predict_operator(model: SarModel) -> SkewOperator:
    """``mu + sum_i a_i (R_{n-i+1} - mu)``, compressed."""
    terms = [(1.0, model.mean_op)]
    for i, a in enumerate(model.alphas, start=1):
        terms.append((float(a), model.history[-i]))
    return compress(lincomb(terms))


@dataclass(frozen=True)
class Forecast:
    point: SpherePoint
    operator: SkewOperator
    projection: Projection
    fired: bool
    c1: float | None
    raw: np.ndarray


class _RotationPath:
    """``c -> exp(c L) x`` evaluated on the atom span of ``L``."""

    def __init__(self, L: SkewOperator, x: np.ndarray):
        self.x = np.asarray(x, dtype=float)
        self.basis = joint_basis([L]) if L.n_atoms else np.empty((0, L.dim))
        if self.basis.shape[0]:
            self.M = coefficient_matrix(L, self.basis).T
            self.xi = (self.basis * L.weights) @ self.x
            self.perp = self.x - self.basis.T @ self.xi

    def __call__(self, c: float) -> np.ndarray:
        if self.basis.shape[0] == 0 or c == 0.0:
            return self.x.copy()
        return self.perp + self.basis.T @ (expm_skew(c * self.M) @ self.xi)


def _feasible(v: np.ndarray, tol: float) -> bool:
    return bool(v.min() >= -tol)


def proj1_fraction(x: SpherePoint, L: SkewOperator, tol: float = 1e-10, feas_tol: float = 1e-12, grid: int = 64) -> float:
    """``c1 = sup{c in [0, 1] : exp(c L) x >= 0}`` by grid search then bisection."""
    if not _feasible(x.values, feas_tol):
        raise ProjectionError("starting point is not in the nonnegative orthant")
    path = _RotationPath(L, x.values)
    if _feasible(path(1.0), feas_tol):
        return 1.0
    cs = np.linspace(0.0, 1.0, grid + 1)
    lo = 0.0
    for c in cs[1:-1]:
        if _feasible(path(c), feas_tol):
            lo = c
    hi = min(1.0, lo + 1.0 / grid)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _feasible(path(mid), feas_tol):
            lo = mid
        else:
            hi = mid
    return lo


def project1(x: SpherePoint, L: SkewOperator) -> SpherePoint:
    """Rotate only as far along ``exp(c L) x`` as the nonnegative orthant allows."""
    c1 = proj1_fraction(x, L)
    return SpherePoint(_RotationPath(L, x.values)(c1), x.weights)


def project2(x_rot, weights=None) -> SpherePoint:
    """Nearest point of the nonnegative orthant (componentwise clip), renormalized onto the sphere."""
    if isinstance(x_rot, AmbientVector):
        vals, weights = x_rot.values, x_rot.weights
    else:
        vals = np.asarray(x_rot, dtype=float)
    clipped = np.maximum(vals, 0.0)
    if weights is None:
        weights = np.ones_like(clipped)
    nrm = np.sqrt(np.dot(np.asarray(weights) * clipped, clipped))
    if not np.any(vals < 0.0) and abs(nrm - 1.0) <= 1e-12:
        # Already feasible: leave it bit-for-bit unchanged.
        return SpherePoint(vals, weights)
    if nrm == 0.0:
        raise ProjectionError("projection degenerate: no positive component left")
    return SpherePoint(clipped / nrm, weights)


def _forecast_from(R_hat: SkewOperator, start: SpherePoint, projection: Projection) -> Forecast:
    path = _RotationPath(R_hat, start.values)
    raw = path(1.0)
    if projection is Projection.NONE:
        return Forecast(SpherePoint(raw, start.weights), R_hat, projection, False, None, raw)
    if projection is Projection.PROJ1:
        c1 = proj1_fraction(start, R_hat)
        pt = SpherePoint(path(c1), start.weights) if c1 < 1.0 else SpherePoint(raw, start.weights)
        return Forecast(pt, R_hat, projection, c1 < 1.0, c1, raw)
    fired = bool(raw.min() < 0.0)
    return Forecast(project2(raw, start.weights), R_hat, projection, fired, None, raw)


def forecast(model: SarModel, projection=Projection.NONE) -> Forecast:
    """One-step-ahead prediction with details on the constraint projection."""
    projection = Projection(projection)
    R_hat = predict_operator(model)
    if model.variant is Variant.SAR:
        if model.base is None:
            raise ValueError("SAR model has no base point")
        start = model.base
    else:
        start = model.last_observation
    return _forecast_from(R_hat, start, projection)


def predict_point(model: SarModel, projection=Projection.NONE) -> SpherePoint:
    """``exp(R_hat) mu`` for SAR, ``exp(R_hat) x_last`` for DSAR, then the requested projection."""
    return forecast(model, projection).point

