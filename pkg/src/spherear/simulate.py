"""Synthetic spherical series and Monte Carlo checks of the asymptotic theory.

Innovations are Gaussian combinations of the skew atoms ``e_i (x) e_j - e_j (x) e_i``
over an active orthonormal set ``e_1..e_k``. The AR recursion runs on the
coordinates of the operators in that frame, and every replicate draws from its
own counter-based stream keyed by ``(seed, replicate)``.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, signal, stats

from .errors import StationarityError
from .hilbert import SpherePoint
from .sar import (
    InnovationMoments,
    Variant,
    asymptotic_covariance,
    autocovariances_from_coordinates,
    check_stationarity,
    fit,
    psi_weights,
    true_autocovariances,
    yule_walker,
)
from .skew import SkewOperator, coefficient_matrix, orthonormal_basis

THREADS_ENV = "SPHEREAR_THREADS"


def replicate_rng(seed: int, replicate: int = 0) -> np.random.Generator:
    """Independent Philox stream for ``(seed, replicate)``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(replicate)])))


@dataclass(frozen=True)
class InnovationSpec:
    """Gaussian innovations on the first ``k`` vectors of ``basis``.

    Without an explicit basis the active vectors are the unit coordinate
    vectors ``e_i / sqrt(w_i)`` of the weighted space.
    """

    dim: int
    k: int
    sigma: float
    seed: int = 0
    weights: np.ndarray | None = None
    basis: np.ndarray | None = None

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("need at least two active directions")
        if self.k > self.dim:
            raise ValueError(f"k={self.k} exceeds the dimension {self.dim}")

    @property
    def space_weights(self) -> np.ndarray:
        return np.ones(self.dim) if self.weights is None else np.asarray(self.weights, dtype=float)

    @property
    def active_basis(self) -> np.ndarray:
        if self.basis is not None:
            return np.asarray(self.basis, dtype=float)[: self.k]
        w = self.space_weights
        E = np.zeros((self.k, self.dim))
        E[np.arange(self.k), np.arange(self.k)] = 1.0 / np.sqrt(w[: self.k])
        return E

    @property
    def n_coords(self) -> int:
        return self.k * (self.k - 1) // 2

    def moments(self) -> InnovationMoments:
        """Exact ``E<e,e>``, ``E<e,e>^2`` and ``E<e1,e2>^2``.

        ``<e, e> = 2 sigma^2 chi^2_K`` with ``K = k(k-1)/2`` atoms.
        """
        K = self.n_coords
        s4 = self.sigma**4
        return InnovationMoments(
            m1=2.0 * self.sigma**2 * K,
            m2=4.0 * s4 * (K * K + 2 * K),
            c2=4.0 * s4 * K,
        )


def sample_innovation_coords(spec: InnovationSpec, rng: np.random.Generator, size=None) -> np.ndarray:
    """Innovation coordinates (scaled so that dot products are Hilbert-Schmidt inner products)."""
    shape = (spec.n_coords,) if size is None else (size, spec.n_coords)
    return np.sqrt(2.0) * spec.sigma * rng.standard_normal(shape)


def sample_innovation(spec: InnovationSpec, rng: np.random.Generator) -> SkewOperator:
    """One innovation ``sum_{i<j} sigma g_ij (e_i (x) e_j - e_j (x) e_i)``."""
    g = spec.sigma * rng.standard_normal(spec.n_coords)
    E = spec.active_basis
    iu = np.triu_indices(spec.k, 1)
    nz = g != 0.0
    return SkewOperator(g[nz], E[iu[0][nz]], E[iu[1][nz]], spec.space_weights)


def ar_filter(alphas, innovations: np.ndarray) -> np.ndarray:
    """Run ``Y_t = sum_i a_i Y_{t-i} + e_t`` from a zero start along axis 0."""
    a = np.concatenate([[1.0], -np.asarray(alphas, dtype=float)])
    return signal.lfilter([1.0], a, innovations, axis=0)


@dataclass
class SimulationRun:
    """Parameters of a synthetic SAR or DSAR series.

    ``n`` is the number of output points. For DSAR ``base`` is the first point
    and ``n - 1`` rotations follow; for SAR every point is ``exp(R_t) base``.
    """

    variant: Variant
    alphas: np.ndarray
    base: SpherePoint
    n: int
    innovation: InnovationSpec
    mean_op: SkewOperator | None = None
    burn_in: int | None = None
    seed: int = 0
    force: bool = False

    def __post_init__(self):
        self.variant = Variant(self.variant)
        self.alphas = np.atleast_1d(np.asarray(self.alphas, dtype=float))
        if self.burn_in is None:
            self.burn_in = 50 * max(len(self.alphas), 1)
        if self.burn_in < 10 * len(self.alphas):
            raise ValueError("burn-in must be at least 10 p")

    def manifest(self) -> dict:
        return {
            "variant": self.variant.value,
            "alphas": self.alphas.tolist(),
            "n": self.n,
            "burn_in": self.burn_in,
            "seed": self.seed,
            "dim": self.innovation.dim,
            "k": self.innovation.k,
            "sigma": self.innovation.sigma,
        }


@dataclass
class SimulationResult:
    points: list
    centered: np.ndarray  # centered operator coordinates in the active frame, after burn-in
    innovations: np.ndarray  # full innovation coordinates, burn-in included
    run: SimulationRun = field(repr=False, default=None)


def simulate(run: SimulationRun) -> SimulationResult:
    rep = check_stationarity(run.alphas)
    if not rep.stationary and not run.force:
        raise StationarityError(
            f"refusing non-stationary alphas (min root modulus {rep.min_root_modulus:.6g})"
        )
    spec = run.innovation
    w = spec.space_weights
    if run.base.dim != spec.dim:
        raise ValueError(f"base point has dimension {run.base.dim}, innovations {spec.dim}")
    n_ops = run.n if run.variant is Variant.SAR else run.n - 1
    rng = replicate_rng(run.seed)
    eps = sample_innovation_coords(spec, rng, size=run.burn_in + n_ops)
    Y = ar_filter(run.alphas, eps)[run.burn_in:]

    E = spec.active_basis
    rows = [E]
    if run.mean_op is not None and run.mean_op.n_atoms:
        rows += [run.mean_op.A, run.mean_op.B]
    F = orthonormal_basis(np.vstack(rows), w)
    K = F.shape[0]
    # Active vectors come first and are already orthonormal, so F[:k] spans them; map exactly.
    Tk = E @ (F * w).T  # k x K change of frame
    T_mu = coefficient_matrix(run.mean_op, F) if run.mean_op is not None else np.zeros((K, K))
    iu = np.triu_indices(spec.k, 1)

    Tc = np.zeros((n_ops, spec.k, spec.k))
    Tc[:, iu[0], iu[1]] = Y / np.sqrt(2.0)
    Tc = Tc - np.swapaxes(Tc, 1, 2)
    T = T_mu + np.einsum("ai,tab,bj->tij", Tk, Tc, Tk)
    # Coordinates transform by T^T; batched exponentials of all steps at once.
    R = linalg.expm(np.swapaxes(T, 1, 2)) if n_ops else np.zeros((0, K, K))

    xi = (F * w) @ run.base.values
    perp = run.base.values - F.T @ xi
    if run.variant is Variant.SAR:
        coords = R @ xi
    else:
        coords = np.empty((n_ops, K))
        cur = xi
        for t in range(n_ops):
            cur = R[t] @ cur
            coords[t] = cur
    vals = perp + coords @ F
    vals /= np.sqrt((vals * vals) @ w)[:, None]
    w = w.copy()
    w.setflags(write=False)
    points = [] if run.variant is Variant.SAR else [SpherePoint(run.base.values, w)]
    points += [SpherePoint(v, w) for v in vals]
    return SimulationResult(points, Y, eps, run)


def simulate_sar(run: SimulationRun) -> list:
    """Points of a synthetic SAR/DSAR series (see ``SimulationRun``)."""
    return simulate(run).points


# --------------------------------------------------------------------------
# Monte Carlo harness


def _workers(workers: int | None) -> int:
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return 1


def _map_replicates(fn, replicates: int, workers: int | None):
    nw = _workers(workers)
    if nw == 1:
        return [fn(r) for r in range(replicates)]
    with ThreadPoolExecutor(max_workers=nw) as pool:
        # map preserves replicate order, so the reduction below is deterministic.
        return list(pool.map(fn, range(replicates)))


@dataclass
class CLTReport:
    empirical_cov: np.ndarray
    theoretical_V: np.ndarray
    rel_diff: np.ndarray
    lambda_true: np.ndarray
    lambda_mean: np.ndarray
    normality: list
    alpha_empirical_cov: np.ndarray
    alpha_mean: np.ndarray
    moments: InnovationMoments
    manifest: dict

    def to_dict(self) -> dict:
        return {
            "empirical_cov": self.empirical_cov.tolist(),
            "theoretical_V": self.theoretical_V.tolist(),
            "rel_diff": self.rel_diff.tolist(),
            "lambda_true": self.lambda_true.tolist(),
            "lambda_mean": self.lambda_mean.tolist(),
            "normality": self.normality,
            "alpha_empirical_cov": self.alpha_empirical_cov.tolist(),
            "alpha_mean": self.alpha_mean.tolist(),
            "moments": self.moments.to_dict(),
            "manifest": self.manifest,
        }


def monte_carlo_lambda_clt(
    alphas,
    n: int,
    replicates: int,
    *,
    k: int = 2,
    sigma: float = 0.3,
    p: int | None = None,
    seed: int = 0,
    burn_in: int | None = None,
    workers: int | None = None,
    rel_floor: float = 1e-3,
) -> CLTReport:
    """Compare the spread of ``sqrt(n) (lambda_hat - lambda)`` with the formula ``V``.

    Each replicate simulates ``n`` centered-model operators directly in the
    active frame, estimates ``lambda_0..lambda_p`` and the Yule-Walker alphas.
    ``rel_diff`` is ``|empirical - V| / (|V| + rel_floor)``.
    """
    alphas = np.atleast_1d(np.asarray(alphas, dtype=float))
    if replicates < 2:
        raise ValueError("need at least two replicates")
    rep = check_stationarity(alphas)
    if not rep.stationary:
        raise StationarityError(f"non-stationary alphas (min root modulus {rep.min_root_modulus:.6g})")
    p = len(alphas) if p is None else int(p)
    burn = 50 * max(len(alphas), 1) if burn_in is None else int(burn_in)
    spec = InnovationSpec(dim=max(k, 2), k=k, sigma=sigma, seed=seed)
    moments = spec.moments()
    psi = psi_weights(alphas)
    lam = true_autocovariances(psi, moments.m1, p)
    V = asymptotic_covariance(psi, moments, p).V

    def one(r):
        rng = replicate_rng(seed, r)
        eps = sample_innovation_coords(spec, rng, size=burn + n)
        Y = ar_filter(alphas, eps)[burn:]
        Y = Y - Y.mean(axis=0)
        acov = autocovariances_from_coordinates(Y, p)
        return acov.lags, yule_walker(acov)

    results = _map_replicates(one, replicates, workers)
    lams = np.array([r[0] for r in results])
    alph = np.array([r[1] for r in results])
    Z = np.sqrt(n) * (lams - lam)
    emp = np.cov(Z, rowvar=False, ddof=1)
    rel = np.abs(emp - V) / (np.abs(V) + rel_floor)
    normality = []
    for j in range(p + 1):
        z = Z[:, j]
        test = stats.normaltest(z) if replicates >= 20 else None
        normality.append(
            {
                "lag": j,
                "mean": float(z.mean()),
                "skewness": float(stats.skew(z)),
                "excess_kurtosis": float(stats.kurtosis(z)),
                "normaltest_pvalue": float(test.pvalue) if test is not None else None,
            }
        )
    A = np.sqrt(n) * (alph - alphas[:p] if p == len(alphas) else alph)
    alpha_cov = np.atleast_2d(np.cov(A, rowvar=False, ddof=1))
    manifest = {
        "seed": seed,
        "n": n,
        "replicates": replicates,
        "alphas": alphas.tolist(),
        "p": p,
        "k": k,
        "sigma": sigma,
        "burn_in": burn,
    }
    return CLTReport(emp, V, rel, lam, lams.mean(axis=0), normality, alpha_cov, alph.mean(axis=0), moments, manifest)


def parameter_recovery(
    variant,
    alphas,
    n: int,
    replicates: int,
    *,
    dim: int = 3,
    k: int = 3,
    sigma: float = 0.1,
    seed: int = 0,
    workers: int | None = None,
) -> np.ndarray:
    """Yule-Walker estimates from ``replicates`` simulated series on the sphere, one row each."""
    alphas = np.atleast_1d(np.asarray(alphas, dtype=float))
    base_vals = np.zeros(dim)
    base_vals[0] = 1.0
    base = SpherePoint(base_vals)

    def one(r):
        run = SimulationRun(
            variant=variant,
            alphas=alphas,
            base=base,
            n=n,
            innovation=InnovationSpec(dim=dim, k=k, sigma=sigma),
            seed=int(np.random.SeedSequence([seed, r]).generate_state(1)[0]),
        )
        pts = simulate_sar(run)
        return fit(pts, len(alphas), variant).alphas

    return np.array(_map_replicates(one, replicates, workers))


# --------------------------------------------------------------------------
# Smooth frames for distributional series


def polynomial_frame(base: SpherePoint, coords: np.ndarray, degree: int = 2) -> np.ndarray:
    """Orthonormal functions ``base * monomial(coords)``, starting with ``base`` itself.

    Rotations within this frame keep the support and smoothness of ``base``,
    which makes them suitable innovation directions for density series.
    """
    Z = np.asarray(coords, dtype=float)
    if Z.ndim == 1:
        Z = Z[:, None]
    Z = (Z - Z.mean(axis=0)) / Z.std(axis=0)
    D = Z.shape[1]
    funcs = [base.values]
    if D == 1:
        for e in range(1, degree + 1):
            funcs.append(base.values * Z[:, 0] ** e)
    else:
        for tot in range(1, degree + 1):
            for e0 in range(tot, -1, -1):
                funcs.append(base.values * Z[:, 0] ** e0 * Z[:, 1] ** (tot - e0))
    return orthonormal_basis(np.vstack(funcs), base.weights)
