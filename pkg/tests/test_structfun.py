"""Structure constants, R-matrix identities, and determinant weights."""

import itertools

import numpy as np
import pytest

from bethelab.errors import PoleError
from bethelab.structfun import (f_fun, g_fun, izergin_det, perm_op, prod_f,
                                prod_g, r_matrix, rtt_residual, spectral_norm,
                                unitarity_residual, yang_baxter_residual)

C = -1.3j


def test_g_and_f_closed_forms():
    assert g_fun(2.0, 0.5, C) == C / 1.5
    assert f_fun(2.0, 0.5, C) == 1.0 + C / 1.5
    # antisymmetry of g and the f(x,y) + f(y,x) sum rule
    x, y = 0.7 + 0.2j, -0.4 + 0.9j
    assert g_fun(x, y, C) == -g_fun(y, x, C)
    assert abs(f_fun(x, y, C) + f_fun(y, x, C) - 2.0) < 1e-15


def test_pair_collisions_raise():
    with pytest.raises(PoleError):
        g_fun(1.0, 1.0 + 1e-15, C)
    with pytest.raises(PoleError):
        izergin_det((0.4, 0.4), (1.0, 2.0), C)


def test_product_functions_match_direct_loops():
    rng = np.random.default_rng(11)
    xs = [complex(*rng.normal(size=2)) for _ in range(3)]
    ys = [complex(*rng.normal(size=2)) for _ in range(2)]
    direct_f = 1.0 + 0.0j
    direct_g = 1.0 + 0.0j
    for x in xs:
        for y in ys:
            direct_f *= f_fun(x, y, C)
            direct_g *= g_fun(x, y, C)
    assert abs(prod_f(xs, ys, C) - direct_f) < 1e-14 * abs(direct_f)
    assert abs(prod_g(xs, ys, C) - direct_g) < 1e-14 * abs(direct_g)


def test_permutation_operator_swaps_factors():
    for d in (2, 3):
        p = perm_op(d)
        rng = np.random.default_rng(d)
        a, b = rng.normal(size=d), rng.normal(size=d)
        assert np.allclose(p @ np.kron(a, b), np.kron(b, a))
        assert np.allclose(p @ p, np.eye(d * d))


def test_r_matrix_is_identity_plus_g_permutation():
    x, y = 1.4 - 0.2j, 0.3 + 0.8j
    for d in (2, 3):
        expected = np.eye(d * d) + g_fun(x, y, C) * perm_op(d)
        assert np.allclose(r_matrix(x, y, C, d), expected)


def test_yang_baxter_and_unitarity_property_loop():
    rng = np.random.default_rng(23)
    for k in range(25):
        d = 2 if k % 2 else 3
        x, y, z = (complex(*rng.normal(size=2)) for _ in range(3))
        assert yang_baxter_residual(x, y, z, C, d) < 1e-12
        assert unitarity_residual(x, y, C, d) < 1e-12


def test_injected_r_matrix_is_used():
    def broken(x, y, c, d=3):
        p = perm_op(d)
        p[0, 0] = -1.0
        return np.eye(d * d, dtype=complex) + g_fun(x, y, c) * p

    assert yang_baxter_residual(0.4, 1.9, -0.7, C, 3, r_fn=broken) > 1.0


def test_izergin_base_cases_and_symmetry():
    assert izergin_det((), (), C) == 1.0
    x, y = 1.1 + 0.4j, -0.3 + 0.2j
    assert abs(izergin_det((x,), (y,), C) - g_fun(x, y, C)) < 1e-15
    xs = (0.9, -0.4 + 0.3j, 1.7 - 0.6j)
    ys = (0.1 + 0.8j, -1.2, 0.5 - 0.4j)
    base = izergin_det(xs, ys, C)
    for perm in itertools.permutations(range(3)):
        shuffled = izergin_det(tuple(xs[i] for i in perm), ys, C)
        assert abs(shuffled - base) < 1e-12 * abs(base)
        shuffled = izergin_det(xs, tuple(ys[i] for i in perm), C)
        assert abs(shuffled - base) < 1e-12 * abs(base)


def test_izergin_degeneration_recursion():
    # as x_n -> y_n the weight reduces: the divergent g(x_n, y_n) factor
    # carries the full residue, dressed by f products over the rest
    xs = (0.9, -0.4 + 0.3j)
    ys = (0.1 + 0.8j, -1.2)
    eps = 1e-7
    xs_close = (xs[0], ys[1] + eps)
    full = izergin_det(xs_close, ys, C)
    reduced = izergin_det(xs[:1], ys[:1], C)
    expected = g_fun(xs_close[1], ys[1], C) * f_fun(ys[1], ys[0], C) \
        * f_fun(xs[0], ys[1], C) * reduced
    assert abs(full - expected) < 1e-5 * abs(full)


def test_spectral_norm_matches_dense_svd():
    rng = np.random.default_rng(5)
    mat = rng.normal(size=(40, 30)) + 1j * rng.normal(size=(40, 30))
    assert abs(spectral_norm(mat) - np.linalg.norm(mat, 2)) < 1e-10
    assert spectral_norm(np.zeros((4, 4))) == 0.0


def test_rtt_residual_detects_wrong_coupling():
    from bethelab import LatticeParams, make_model
    params = LatticeParams(length=1.0, sites=2, kappa=1.0, cutoff=3)
    model = make_model("tcbg_full", params=params)
    u, v = 0.8 + 0.3j, -0.5 + 0.6j
    good = rtt_residual(model.monodromy, u, v, model.c, sector=1)
    bad = rtt_residual(model.monodromy, u, v, 2.0 * model.c, sector=1)
    assert good < 1e-12
    assert bad > 1e-3
