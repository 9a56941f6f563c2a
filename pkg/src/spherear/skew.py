"""Rank-structured skew-symmetric operators and their exponentials.

An operator is stored as a list of atoms ``c * (a (x) b - b (x) a)``; the atom
``(c, a, b)`` acts as ``y -> c * (<a, y> b - <b, y> a)``, so the unit atom built
from orthonormal ``u1, u2`` maps ``u1`` to ``u2`` and its exponential turns
``u1`` towards ``u2``. Nothing here ever forms a dense ``d x d`` matrix: the
exponential is evaluated on the (small) span of the atom vectors.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatchError, GeometryError
from .hilbert import AmbientVector, SpherePoint, orthonormal_residual, same_weights

# Residual norm (relative to the input vector) below which Gram-Schmidt drops a vector.
DROP_TOL = 1e-12
AUTO_COMPRESS_MAX = 64


@dataclass(frozen=True)
class SkewAtom:
    coef: float
    a: AmbientVector
    b: AmbientVector


class SkewOperator:
    """Finite sum of weighted skew atoms on a weighted space.

    Parameters
    ----------
    coefs : array_like, shape (m,)
    A, B : array_like, shape (m, d)
        Row ``i`` holds the vectors ``a_i`` and ``b_i`` of atom ``i``.
    weights : array_like, shape (d,)
        Quadrature weights of the underlying space.
    """

    __slots__ = ("coefs", "A", "B", "weights")

    def __init__(self, coefs, A, B, weights):
        weights = np.asarray(weights, dtype=float)
        d = weights.size
        coefs = np.array(coefs, dtype=float).reshape(-1)
        A = np.array(A, dtype=float).reshape(-1, d)
        B = np.array(B, dtype=float).reshape(-1, d)
        if not (coefs.size == A.shape[0] == B.shape[0]):
            raise ValueError("coefs, A and B must have the same number of atoms")
        for arr in (coefs, A, B):
            arr.setflags(write=False)
        self.coefs = coefs
        self.A = A
        self.B = B
        self.weights = weights

    @classmethod
    def zero(cls, weights) -> "SkewOperator":
        weights = np.asarray(weights, dtype=float)
        return cls(np.empty(0), np.empty((0, weights.size)), np.empty((0, weights.size)), weights)

    @classmethod
    def from_atoms(cls, atoms: Sequence[SkewAtom], weights=None) -> "SkewOperator":
        if not atoms:
            if weights is None:
                raise ValueError("weights are required for an empty atom list")
            return cls.zero(weights)
        w = atoms[0].a.weights if weights is None else np.asarray(weights, dtype=float)
        for at in atoms:
            for v in (at.a, at.b):
                if v.dim != w.size:
                    raise DimensionMismatchError(v.dim, w.size, "atom vector and space")
                if not same_weights(v.weights, w):
                    raise DimensionMismatchError(v.dim, w.size, "atom vector weights and space weights")
        return cls(
            [at.coef for at in atoms],
            np.vstack([at.a.values for at in atoms]),
            np.vstack([at.b.values for at in atoms]),
            w,
        )

    @property
    def dim(self) -> int:
        return self.weights.size

    @property
    def n_atoms(self) -> int:
        return self.coefs.size

    @property
    def atoms(self) -> list[SkewAtom]:
        return [
            SkewAtom(float(c), AmbientVector(a, self.weights), AmbientVector(b, self.weights))
            for c, a, b in zip(self.coefs, self.A, self.B)
        ]

    def is_zero(self) -> bool:
        return self.n_atoms == 0 or not np.any(self.coefs)

    def __neg__(self):
        return SkewOperator(-self.coefs, self.A, self.B, self.weights)

    def __mul__(self, s):
        return SkewOperator(float(s) * self.coefs, self.A, self.B, self.weights)

    __rmul__ = __mul__

    def __add__(self, other):
        return lincomb([(1.0, self), (1.0, other)])

    def __sub__(self, other):
        return lincomb([(1.0, self), (-1.0, other)])

    def __repr__(self):
        return f"SkewOperator(dim={self.dim}, atoms={self.n_atoms})"

    def to_dict(self, weights_ref: str = "base") -> dict:
        """JSON-ready form; the weights are stored elsewhere and named by ``weights_ref``."""
        return {
            "dim": self.dim,
            "weights_ref": weights_ref,
            "atoms": [
                {"coef": float(c), "a": a.tolist(), "b": b.tolist()}
                for c, a, b in zip(self.coefs, self.A, self.B)
            ],
        }

    @classmethod
    def from_dict(cls, data: dict, weights) -> "SkewOperator":
        weights = np.asarray(weights, dtype=float)
        if int(data["dim"]) != weights.size:
            raise DimensionMismatchError(int(data["dim"]), weights.size, "operator and weights")
        atoms = data["atoms"]
        if not atoms:
            return cls.zero(weights)
        return cls(
            [a["coef"] for a in atoms],
            [a["a"] for a in atoms],
            [a["b"] for a in atoms],
            weights,
        )


def _check_same_space(L1: SkewOperator, L2: SkewOperator) -> None:
    if L1.dim != L2.dim:
        raise DimensionMismatchError(L1.dim, L2.dim, "operators")
    if not same_weights(L1.weights, L2.weights):
        raise DimensionMismatchError(L1.dim, L2.dim, "operators with different quadrature weights")


def _values(x, weights) -> np.ndarray:
    if isinstance(x, AmbientVector):
        if x.dim != weights.size:
            raise DimensionMismatchError(x.dim, weights.size, "operator and vector")
        if not same_weights(x.weights, weights):
            raise DimensionMismatchError(x.dim, weights.size, "operator and vector weights")
        return x.values
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != weights.size:
        raise DimensionMismatchError(weights.size, x.shape[-1], "operator and vector")
    return x


def _apply_values(L: SkewOperator, x: np.ndarray) -> np.ndarray:
    if L.n_atoms == 0:
        return np.zeros_like(x)
    wx = L.weights * x
    ax = L.A @ wx.T
    bx = L.B @ wx.T
    out = (L.coefs[:, None] * ax if ax.ndim == 2 else L.coefs * ax).T @ L.B
    out -= (L.coefs[:, None] * bx if bx.ndim == 2 else L.coefs * bx).T @ L.A
    return out


def apply(L: SkewOperator, x):
    """Evaluate ``L x``. Accepts an ``AmbientVector`` or a raw array (rows are vectors)."""
    vals = _values(x, L.weights)
    out = _apply_values(L, vals)
    if isinstance(x, AmbientVector):
        return AmbientVector(out, L.weights)
    return out


def _gram(X: np.ndarray, Y: np.ndarray, w: np.ndarray) -> np.ndarray:
    return (X * w) @ Y.T


def hs_inner(L1: SkewOperator, L2: SkewOperator) -> float:
    """Inner product of two operators viewed as elements of ``H (x) H``.

    Uses ``<a1 (x) b1, a2 (x) b2> = <a1, a2><b1, b2>`` on every atom pair, so the
    cost is ``O(m1 m2 d)``.
    """
    _check_same_space(L1, L2)
    if L1.n_atoms == 0 or L2.n_atoms == 0:
        return 0.0
    w = L1.weights
    aa = _gram(L1.A, L2.A, w)
    bb = _gram(L1.B, L2.B, w)
    ab = _gram(L1.A, L2.B, w)
    ba = _gram(L1.B, L2.A, w)
    return float(2.0 * L1.coefs @ (aa * bb - ab * ba) @ L2.coefs)


def hs_norm(L: SkewOperator) -> float:
    return float(np.sqrt(max(hs_inner(L, L), 0.0)))


# --------------------------------------------------------------------------
# Orthonormal bases and coordinates


def orthonormal_basis(vectors: np.ndarray, weights: np.ndarray, tol: float = DROP_TOL) -> np.ndarray:
    """Orthonormal basis (rows, weighted inner product) of the span of ``vectors``.

    Gram-Schmidt with a second orthogonalization pass per vector; a vector whose
    residual falls below ``tol`` times its own norm is dropped.
    """
    vectors = np.atleast_2d(np.asarray(vectors, dtype=float))
    d = weights.size
    sw = np.sqrt(weights)
    basis = np.empty((min(vectors.shape[0], d), d))
    k = 0
    for v in vectors:
        if k == d:
            break
        r = v * sw
        n0 = np.linalg.norm(r)
        if n0 == 0.0:
            continue
        r = r / n0
        for _ in range(2):
            if k:
                r = r - basis[:k].T @ (basis[:k] @ r)
        nr = np.linalg.norm(r)
        if nr <= tol:
            continue
        basis[k] = r / nr
        k += 1
    return basis[:k] / sw


def joint_basis(ops: Iterable[SkewOperator], extra: np.ndarray | None = None) -> np.ndarray:
    """Orthonormal basis of the span of every atom vector of ``ops`` (plus ``extra`` rows)."""
    ops = list(ops)
    if not ops:
        raise ValueError("joint_basis needs at least one operator")
    w = ops[0].weights
    rows = []
    if extra is not None:
        rows.append(np.atleast_2d(extra))
    for L in ops:
        _check_same_space(ops[0], L)
        if L.n_atoms:
            nz = L.coefs != 0
            rows.append(L.A[nz])
            rows.append(L.B[nz])
    if not rows:
        return np.empty((0, w.size))
    return orthonormal_basis(np.vstack(rows), w)


def coefficient_matrix(L: SkewOperator, basis: np.ndarray) -> np.ndarray:
    """Skew ``k x k`` matrix ``T`` with ``L = sum_ij T_ij e_i (x) e_j`` on the given basis.

    Exact when the atoms of ``L`` lie in the span of the basis rows. Then
    ``hs_inner(L1, L2) = sum(T1 * T2)``.
    """
    k = basis.shape[0]
    if L.n_atoms == 0 or k == 0:
        return np.zeros((k, k))
    wb = basis * L.weights
    alpha = L.A @ wb.T
    beta = L.B @ wb.T
    T = (alpha * L.coefs[:, None]).T @ beta
    return T - T.T


def coordinates(ops: Sequence[SkewOperator], basis: np.ndarray | None = None):
    """Stack operators as vectors in a common orthonormal frame.

    Returns ``(basis, X)`` where row ``t`` of ``X`` holds the strict upper
    triangle of ``coefficient_matrix(ops[t], basis)`` scaled by ``sqrt(2)``, so
    ``X[s] @ X[t] == hs_inner(ops[s], ops[t])``.
    """
    ops = list(ops)
    if basis is None:
        basis = joint_basis(ops)
    k = basis.shape[0]
    iu = np.triu_indices(k, 1)
    X = np.empty((len(ops), iu[0].size))
    if not ops:
        return basis, X
    w = ops[0].weights
    wb = basis * w
    # All atoms at once, then scatter-add into their owners.
    owners = np.concatenate([np.full(L.n_atoms, t) for t, L in enumerate(ops)]) if ops else np.empty(0, int)
    if owners.size == 0:
        X[:] = 0.0
        return basis, X
    coefs = np.concatenate([L.coefs for L in ops])
    alpha = np.vstack([L.A for L in ops if L.n_atoms]) @ wb.T
    beta = np.vstack([L.B for L in ops if L.n_atoms]) @ wb.T
    ai, aj = alpha[:, iu[0]], alpha[:, iu[1]]
    bi, bj = beta[:, iu[0]], beta[:, iu[1]]
    contrib = coefs[:, None] * (ai * bj - bi * aj)
    X[:] = 0.0
    np.add.at(X, owners, contrib)
    X *= np.sqrt(2.0)
    return basis, X


def from_coordinates(x: np.ndarray, basis: np.ndarray, weights) -> SkewOperator:
    """Inverse of ``coordinates`` for a single row: atoms on pairs of basis vectors."""
    k = basis.shape[0]
    iu = np.triu_indices(k, 1)
    c = np.asarray(x, dtype=float) / np.sqrt(2.0)
    nz = c != 0.0
    return SkewOperator(c[nz], basis[iu[0][nz]], basis[iu[1][nz]], weights)


def from_matrix(T: np.ndarray, basis: np.ndarray, weights) -> SkewOperator:
    iu = np.triu_indices(T.shape[0], 1)
    return from_coordinates(np.sqrt(2.0) * T[iu], basis, weights)


# --------------------------------------------------------------------------
# Construction and arithmetic


def spherical_log(x1: SpherePoint, x2: SpherePoint) -> SkewOperator:
    """Spherical difference ``x2 (-) x1``: the generator of the rotation taking x1 to x2.

    Returns the single atom ``theta * (u1 (x) u2 - u2 (x) u1)`` with ``u1 = x1``,
    ``u2`` the normalized component of ``x2`` orthogonal to ``x1`` and
    ``theta = arccos <x1, x2>``; the zero operator when the points coincide.
    """
    try:
        theta, u2 = orthonormal_residual(x1, x2)
    except GeometryError:
        raise GeometryError("log undefined at antipode") from None
    if u2 is None:
        return SkewOperator.zero(x1.weights)
    return SkewOperator([theta], x1.values[None, :], u2[None, :], x1.weights)


def lincomb(terms: Sequence[tuple[float, SkewOperator]], auto_compress: bool = True) -> SkewOperator:
    """Linear combination ``sum_i s_i L_i``.

    Atoms are concatenated with scaled coefficients. The result is compressed
    once it holds more than ``min(64, 4 d)`` atoms.
    """
    terms = list(terms)
    if not terms:
        raise ValueError("lincomb needs at least one term")
    first = terms[0][1]
    for _, L in terms[1:]:
        _check_same_space(first, L)
    parts = [(float(s), L) for s, L in terms if L.n_atoms and s != 0.0]
    if not parts:
        return SkewOperator.zero(first.weights)
    out = SkewOperator(
        np.concatenate([s * L.coefs for s, L in parts]),
        np.vstack([L.A for _, L in parts]),
        np.vstack([L.B for _, L in parts]),
        first.weights,
    )
    if auto_compress and out.n_atoms > min(AUTO_COMPRESS_MAX, 4 * out.dim):
        out = compress(out)
    return out


def compress(L: SkewOperator, coef_tol: float = 1e-15) -> SkewOperator:
    """Rewrite ``L`` on an orthonormal basis of its atom span.

    The result is the same linear map with at most ``k (k - 1) / 2`` atoms,
    ``k`` the span dimension. Atoms with ``|coef|`` below ``coef_tol`` times the
    largest coefficient are dropped.
    """
    if L.n_atoms == 0:
        return L
    basis = joint_basis([L])
    T = coefficient_matrix(L, basis)
    iu = np.triu_indices(basis.shape[0], 1)
    c = T[iu]
    if c.size == 0:
        return SkewOperator.zero(L.weights)
    keep = np.abs(c) > coef_tol * np.abs(c).max()
    return SkewOperator(c[keep], basis[iu[0][keep]], basis[iu[1][keep]], L.weights)


# --------------------------------------------------------------------------
# Exponential


def expm_skew(M: np.ndarray, degree: int = 12) -> np.ndarray:
    """Dense matrix exponential by scaling and squaring with a Taylor kernel.

    The matrix is scaled by ``2^-s`` until its 1-norm is below 0.5, the series is
    truncated after ``degree`` terms and the result squared ``s`` times.
    """
    M = np.asarray(M, dtype=float)
    k = M.shape[0]
    if k == 0:
        return np.eye(0)
    nrm = np.abs(M).sum(axis=0).max()
    s = 0
    if nrm > 0.5:
        s = int(np.ceil(np.log2(nrm / 0.5)))
    A = M / (2.0**s)
    E = np.eye(k)
    term = np.eye(k)
    for j in range(1, degree + 1):
        term = term @ A / j
        E = E + term
    for _ in range(s):
        E = E @ E
    return E


def _is_orthonormal_atom(L: SkewOperator) -> bool:
    if L.n_atoms != 1:
        return False
    w = L.weights
    a, b = L.A[0], L.B[0]
    return (
        abs(np.dot(w * a, a) - 1.0) < 1e-12
        and abs(np.dot(w * b, b) - 1.0) < 1e-12
        and abs(np.dot(w * a, b)) < 1e-12
    )


def rodrigues_apply(L: SkewOperator, x: np.ndarray) -> np.ndarray:
    """``exp(L) x`` for one atom with orthonormal vectors via ``I + sin(t) Q + (1 - cos(t)) Q^2``."""
    t = float(L.coefs[0])
    Q = SkewOperator([1.0], L.A, L.B, L.weights)
    qx = _apply_values(Q, x)
    qqx = _apply_values(Q, qx)
    return x + np.sin(t) * qx + (1.0 - np.cos(t)) * qqx


def subspace_expm_apply(L: SkewOperator, x: np.ndarray) -> np.ndarray:
    """``exp(L) x`` through the dense exponential of ``L`` restricted to its atom span."""
    basis = joint_basis([L])
    if basis.shape[0] == 0:
        return np.array(x, dtype=float)
    T = coefficient_matrix(L, basis)
    # Coordinates: (L y)_j = sum_i T_ij y_i, i.e. the matrix acting on coordinates is T^T.
    E = expm_skew(T.T)
    xi = (basis * L.weights) @ x.T
    par = basis.T @ xi
    return (x.T - par + basis.T @ (E @ xi)).T


def expm_apply(L: SkewOperator, x):
    """Apply the rotation ``exp(L)`` to a vector (or to rows of an array)."""
    vals = _values(x, L.weights)
    if L.is_zero():
        out = np.array(vals, dtype=float)
    elif _is_orthonormal_atom(L):
        out = rodrigues_apply(L, vals)
    else:
        out = subspace_expm_apply(L, vals)
    if isinstance(x, AmbientVector):
        return AmbientVector(out, L.weights)
    return out


def rotate(L: SkewOperator, x: SpherePoint) -> SpherePoint:
    """Rotate a sphere point by ``exp(L)``; the result stays on the sphere."""
    return SpherePoint(expm_apply(L, x).values, L.weights)
