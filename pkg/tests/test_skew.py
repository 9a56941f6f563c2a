import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from spherear.errors import DimensionMismatchError, GeometryError
from spherear.hilbert import AmbientVector, SpherePoint, geodesic_distance, inner
from spherear.skew import (
    SkewAtom,
    SkewOperator,
    apply,
    compress,
    coordinates,
    expm_apply,
    expm_skew,
    from_coordinates,
    hs_inner,
    hs_norm,
    joint_basis,
    lincomb,
    orthonormal_basis,
    rodrigues_apply,
    rotate,
    spherical_log,
    subspace_expm_apply,
)

from conftest import random_point

seeds = st.integers(0, 2**32 - 1)


def random_op(rng, d, m, weights=None, scale=1.0):
    w = np.ones(d) if weights is None else weights
    return SkewOperator(scale * rng.standard_normal(m), rng.standard_normal((m, d)), rng.standard_normal((m, d)), w)


def dense(L):
    """Matrix ``M`` with ``L y = M y`` in raw coordinates."""
    M = np.zeros((L.dim, L.dim))
    for c, a, b in zip(L.coefs, L.A, L.B):
        M += c * (np.outer(b, a) - np.outer(a, b))
    return M * L.weights[None, :]


def dense_tensor(L):
    T = np.zeros((L.dim, L.dim))
    for c, a, b in zip(L.coefs, L.A, L.B):
        T += c * (np.outer(a, b) - np.outer(b, a))
    return T


def series_expm(M, terms=60):
    E = np.eye(M.shape[0])
    term = np.eye(M.shape[0])
    for j in range(1, terms):
        term = term @ M / j
        E = E + term
    return E


def skew_residual(L, x, y):
    w = L.weights
    return np.dot(w * apply(L, x), y) + np.dot(w * x, apply(L, y))


# ---------------------------------------------------------------- construction


def test_spherical_log_examples():
    a, b = SpherePoint([1.0, 0.0]), SpherePoint([0.0, 1.0])
    assert spherical_log(a, a).n_atoms == 0
    L = spherical_log(a, b)
    assert L.n_atoms == 1
    assert L.coefs[0] == pytest.approx(np.pi / 2)
    assert np.allclose(L.A[0], [1, 0]) and np.allclose(L.B[0], [0, 1])
    with pytest.raises(GeometryError, match="antipode"):
        spherical_log(a, SpherePoint([-1.0, 0.0]))


@settings(max_examples=80, deadline=None)
@given(seeds, st.integers(2, 40), st.booleans())
def test_log_round_trip(seed, d, weighted):
    rng = np.random.default_rng(seed)
    w = rng.uniform(0.05, 3.0, d) if weighted else None
    x1, x2 = random_point(rng, d, w), random_point(rng, d, w)
    L = spherical_log(x1, x2)
    assert geodesic_distance(rotate(L, x1), x2) <= 1e-9
    assert hs_norm(L) == pytest.approx(np.sqrt(2) * geodesic_distance(x1, x2), rel=1e-12)


def test_apply_examples():
    e = np.eye(3)
    Q = SkewOperator([1.0], e[[0]], e[[1]], np.ones(3))
    assert np.allclose(apply(Q, AmbientVector(e[0])).values, e[1])
    assert np.allclose(apply(Q, AmbientVector(e[2])).values, 0.0)
    Z = SkewOperator.zero(np.ones(3))
    assert np.allclose(apply(Z, AmbientVector([1.0, 2.0, 3.0])).values, 0.0)
    with pytest.raises(DimensionMismatchError):
        apply(Q, AmbientVector([1.0, 0.0]))


def test_apply_rows_and_vector_agree():
    rng = np.random.default_rng(0)
    L = random_op(rng, 7, 4)
    X = rng.standard_normal((5, 7))
    rows = apply(L, X)
    for x, r in zip(X, rows):
        assert np.allclose(apply(L, AmbientVector(x)).values, r)


@settings(max_examples=50, deadline=None)
@given(seeds, st.integers(2, 15), st.integers(1, 6))
def test_skew_identity_after_every_construction(seed, d, m):
    rng = np.random.default_rng(seed)
    w = rng.uniform(0.1, 2.0, d)
    L1, L2 = random_op(rng, d, m, w), random_op(rng, d, m, w)
    x1, x2 = random_point(rng, d, w), random_point(rng, d, w)
    ops = [L1, lincomb([(0.3, L1), (-2.0, L2)]), compress(L2)]
    if geodesic_distance(x1, x2) < np.pi - 1e-6:
        ops.append(spherical_log(x1, x2))
    for L in ops:
        x, y = rng.standard_normal(d), rng.standard_normal(d)
        scale = np.sqrt(np.dot(w * x, x) * np.dot(w * y, y))
        assert abs(skew_residual(L, x, y)) <= 1e-10 * scale * max(1.0, hs_norm(L))


def test_from_atoms_and_atoms_round_trip():
    rng = np.random.default_rng(1)
    L = random_op(rng, 5, 3)
    again = SkewOperator.from_atoms(L.atoms)
    assert np.allclose(dense(again), dense(L))
    with pytest.raises(ValueError):
        SkewOperator.from_atoms([])
    bad = SkewAtom(1.0, AmbientVector([1.0, 0.0]), AmbientVector([0.0, 1.0, 0.0]))
    with pytest.raises(DimensionMismatchError):
        SkewOperator.from_atoms([bad])


def test_serialization_round_trip():
    rng = np.random.default_rng(2)
    w = rng.uniform(0.5, 1.5, 6)
    L = random_op(rng, 6, 3, w)
    data = json.loads(json.dumps(L.to_dict("grid")))
    assert data["weights_ref"] == "grid" and data["dim"] == 6
    back = SkewOperator.from_dict(data, w)
    assert np.array_equal(back.coefs, L.coefs) and np.array_equal(back.A, L.A)
    assert SkewOperator.from_dict(SkewOperator.zero(w).to_dict(), w).n_atoms == 0
    with pytest.raises(DimensionMismatchError):
        SkewOperator.from_dict(data, np.ones(4))


# ---------------------------------------------------------------- inner products


def test_hs_inner_examples():
    e = np.eye(3)
    L = SkewOperator([1.0], e[[0]], e[[1]], np.ones(3))
    assert hs_inner(L, L) == pytest.approx(2.0)
    assert hs_inner(L, SkewOperator.zero(np.ones(3))) == 0.0


@settings(max_examples=50, deadline=None)
@given(seeds, st.integers(2, 20), st.integers(1, 5), st.integers(1, 5))
def test_hs_inner_matches_dense_oracle(seed, d, m1, m2):
    rng = np.random.default_rng(seed)
    w = rng.uniform(0.1, 2.0, d)
    L1, L2 = random_op(rng, d, m1, w), random_op(rng, d, m2, w)
    T1, T2 = dense_tensor(L1), dense_tensor(L2)
    oracle = np.sum(w[:, None] * w[None, :] * T1 * T2)
    assert hs_inner(L1, L2) == pytest.approx(oracle, rel=1e-10, abs=1e-10)
    assert hs_inner(L1, L2) == pytest.approx(hs_inner(L2, L1), rel=1e-12, abs=1e-12)
    assert hs_inner(L1, L1) >= 0.0


def test_hs_inner_rejects_mixed_spaces():
    with pytest.raises(DimensionMismatchError):
        hs_inner(SkewOperator.zero(np.ones(3)), SkewOperator.zero(np.ones(4)))


# ---------------------------------------------------------------- linear algebra


def test_lincomb_examples():
    rng = np.random.default_rng(4)
    L1, L2 = random_op(rng, 6, 3), random_op(rng, 6, 2)
    x = rng.standard_normal(6)
    assert np.allclose(apply(lincomb([(1.0, L1)]), x), apply(L1, x))
    assert np.allclose(apply(lincomb([(1.0, L1), (-1.0, L1)]), x), 0.0, atol=1e-12)
    assert np.allclose(apply(lincomb([(2.0, L1), (3.0, L2)]), x), 2 * apply(L1, x) + 3 * apply(L2, x))
    assert np.allclose(apply(L1 + L2, x), apply(L1, x) + apply(L2, x))
    assert np.allclose(apply(L1 - L2, x), apply(L1, x) - apply(L2, x))
    assert np.allclose(apply(2.5 * L1, x), 2.5 * apply(L1, x))
    assert np.allclose(apply(-L1, x), -apply(L1, x))
    with pytest.raises(ValueError):
        lincomb([])


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(2, 12))
def test_hs_inner_is_bilinear(seed, d):
    rng = np.random.default_rng(seed)
    L1, L2, L3 = (random_op(rng, d, 2) for _ in range(3))
    s, t = rng.standard_normal(2)
    lhs = hs_inner(lincomb([(s, L1), (t, L2)]), L3)
    rhs = s * hs_inner(L1, L3) + t * hs_inner(L2, L3)
    assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-10)


def test_auto_compress_bounds_atom_count():
    rng = np.random.default_rng(5)
    d = 4
    ops = [random_op(rng, d, 1) for _ in range(40)]
    out = lincomb([(1.0, L) for L in ops])
    assert out.n_atoms <= d * (d - 1) // 2
    x = rng.standard_normal(d)
    assert np.allclose(apply(out, x), sum(apply(L, x) for L in ops))
    raw = lincomb([(1.0, L) for L in ops], auto_compress=False)
    assert raw.n_atoms == 40


def test_compress_examples():
    e = np.eye(4)
    single = SkewOperator([0.7], [2 * e[0]], [e[0] + e[1]], np.ones(4))
    c = compress(single)
    assert c.n_atoms == 1
    assert np.allclose(dense(c), dense(single))
    twice = lincomb([(1.0, single), (1.0, single)], auto_compress=False)
    c2 = compress(twice)
    assert c2.n_atoms == 1
    assert np.allclose(dense(c2), 2 * dense(single))
    assert compress(SkewOperator.zero(np.ones(3))).n_atoms == 0


def test_compress_large_sparse_span():
    rng = np.random.default_rng(6)
    d = 1000
    L = random_op(rng, d, 50)
    C = compress(L)
    k = joint_basis([L]).shape[0]
    assert k <= 100
    assert C.n_atoms <= k * (k - 1) // 2
    X = rng.standard_normal((5, d))
    assert np.max(np.abs(apply(C, X) - apply(L, X))) <= 1e-9
    assert hs_inner(C, C) == pytest.approx(hs_inner(L, L), rel=1e-9)


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(2, 25), st.integers(1, 8))
def test_compress_preserves_map_and_norm(seed, d, m):
    rng = np.random.default_rng(seed)
    w = rng.uniform(0.2, 2.0, d)
    L = random_op(rng, d, m, w)
    C = compress(L)
    X = rng.standard_normal((3, d))
    assert np.max(np.abs(apply(C, X) - apply(L, X))) <= 1e-10 * max(1.0, np.abs(dense(L)).max())
    assert hs_inner(C, C) == pytest.approx(hs_inner(L, L), rel=1e-9, abs=1e-12)


def test_orthonormal_basis_drops_dependent_vectors():
    rng = np.random.default_rng(7)
    w = rng.uniform(0.5, 1.5, 6)
    V = rng.standard_normal((3, 6))
    V = np.vstack([V, V[0] + 2 * V[1], np.zeros(6)])
    B = orthonormal_basis(V, w)
    assert B.shape[0] == 3
    assert np.allclose((B * w) @ B.T, np.eye(3), atol=1e-13)


def test_coordinates_reproduce_hs_inner():
    rng = np.random.default_rng(8)
    w = rng.uniform(0.5, 1.5, 9)
    ops = [random_op(rng, 9, 2, w) for _ in range(5)] + [SkewOperator.zero(w)]
    basis, X = coordinates(ops)
    G = np.array([[hs_inner(a, b) for b in ops] for a in ops])
    assert np.allclose(X @ X.T, G, atol=1e-10)
    back = from_coordinates(X[0], basis, w)
    assert np.allclose(dense(back), dense(ops[0]), atol=1e-12)


# ---------------------------------------------------------------- exponentials


def test_rotate_examples():
    e = np.eye(3)
    x = SpherePoint([0.6, 0.0, 0.8])
    assert rotate(SkewOperator.zero(np.ones(3)), x).values.tolist() == x.values.tolist()
    for theta in (0.1, 1.0, 3.0):
        Q = SkewOperator([theta], e[[0]], e[[1]], np.ones(3))
        out = rotate(Q, SpherePoint(e[0]))
        assert np.allclose(out.values, np.cos(theta) * e[0] + np.sin(theta) * e[1], atol=1e-15)


def test_expm_skew_matches_scipy():
    rng = np.random.default_rng(9)
    for k in (1, 2, 5, 12):
        A = rng.standard_normal((k, k)) * 3
        A = A - A.T
        assert np.allclose(expm_skew(A), expm(A), atol=1e-12)
    assert expm_skew(np.zeros((0, 0))).shape == (0, 0)


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(2, 30), st.floats(0.01, 3.1))
def test_rodrigues_matches_subspace_path(seed, d, theta):
    rng = np.random.default_rng(seed)
    w = rng.uniform(0.2, 2.0, d)
    u1, x2 = random_point(rng, d, w), random_point(rng, d, w)
    L = spherical_log(u1, x2)
    L = SkewOperator([theta], L.A, L.B, w)
    y = rng.standard_normal(d)
    assert np.max(np.abs(rodrigues_apply(L, y) - subspace_expm_apply(L, y))) <= 1e-10 * max(1, np.abs(y).max())


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(2, 20))
def test_single_atom_cube_is_negative(seed, d):
    rng = np.random.default_rng(seed)
    x1, x2 = random_point(rng, d), random_point(rng, d)
    L = spherical_log(x1, x2)
    Q = SkewOperator([1.0], L.A, L.B, L.weights)
    y = rng.standard_normal(d)
    assert np.allclose(apply(Q, apply(Q, apply(Q, y))), -apply(Q, y), atol=1e-10)


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(2, 30), st.integers(1, 6))
def test_multi_atom_exponential_matches_dense_series(seed, d, m):
    rng = np.random.default_rng(seed)
    w = rng.uniform(0.3, 1.5, d)
    L = random_op(rng, d, m, w, scale=0.5 / np.sqrt(d))
    E = series_expm(dense(L))
    X = rng.standard_normal((3, d))
    assert np.max(np.abs(expm_apply(L, X) - X @ E.T)) <= 1e-8


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(2, 20), st.integers(1, 5))
def test_exponential_properties(seed, d, m):
    rng = np.random.default_rng(seed)
    w = rng.uniform(0.3, 1.5, d)
    L = random_op(rng, d, m, w)
    y1, y2 = random_point(rng, d, w), random_point(rng, d, w)
    r1, r2 = rotate(L, y1), rotate(L, y2)
    assert abs(inner(r1, r2) - inner(y1, y2)) <= 1e-10
    assert abs(r1.norm() - 1.0) <= 1e-9
    back = expm_apply(-L, r1.values)
    assert np.max(np.abs(back - y1.values)) <= 1e-9
    # Component orthogonal to the atom span is untouched.
    B = joint_basis([L])
    if B.shape[0] < d:
        perp = y1.values - B.T @ ((B * w) @ y1.values)
        rperp = r1.values - B.T @ ((B * w) @ r1.values)
        assert np.max(np.abs(perp - rperp)) <= 1e-12
