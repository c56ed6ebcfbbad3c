"""Rational structure functions, R-matrices, and determinant weights.

All identities in the package are built from the two rational functions
g(x,y) = c/(x-y) and f(x,y) = 1 + g(x,y).  Arguments that approach a pole
are rejected rather than regularized.
"""

from __future__ import annotations

import itertools

import numpy as np

from .errors import PoleError

POLE_TOL = 1e-12


def _guard(x, y, what="x - y"):
    if abs(x - y) < POLE_TOL * max(1.0, abs(x), abs(y)):
        raise PoleError(f"{what} too close to zero: {x} vs {y}")


def g_fun(x: complex, y: complex, c: complex) -> complex:
    _guard(x, y)
    return c / (x - y)


def f_fun(x: complex, y: complex, c: complex) -> complex:
    _guard(x, y)
    return (x - y + c) / (x - y)


def prod_f(xs, ys, c: complex) -> complex:
    """Product of f(x,y) over the cartesian pairs; empty product is 1."""
    out = 1.0 + 0.0j
    for x in xs:
        for y in ys:
            out *= f_fun(x, y, c)
    return out


def prod_g(xs, ys, c: complex) -> complex:
    out = 1.0 + 0.0j
    for x in xs:
        for y in ys:
            out *= g_fun(x, y, c)
    return out


def perm_op(d: int) -> np.ndarray:
    """Permutation operator on C^d tensor C^d."""
    p = np.zeros((d * d, d * d))
    for a in range(d):
        for b in range(d):
            p[a * d + b, b * d + a] = 1.0
    return p


def r_matrix(x: complex, y: complex, c: complex, d: int = 3) -> np.ndarray:
    """Rational invariant R-matrix 1 + g(x,y) P on C^d tensor C^d."""
    return np.eye(d * d, dtype=complex) + g_fun(x, y, c) * perm_op(d)


def _embed_two_site(r: np.ndarray, d: int, pos: tuple[int, int]) -> np.ndarray:
    """Embed a two-space matrix into spaces ``pos`` of a three-fold product."""
    r4 = r.reshape(d, d, d, d)
    out = np.zeros((d,) * 6, dtype=complex)
    idx = [0, 1, 2]
    a, b = pos
    rest = [k for k in idx if k not in pos][0]
    for combo in itertools.product(range(d), repeat=5):
        ia, ib, ja, jb, kr = combo
        pos_in = [0, 0, 0]
        pos_out = [0, 0, 0]
        pos_out[a], pos_out[b], pos_out[rest] = ia, ib, kr
        pos_in[a], pos_in[b], pos_in[rest] = ja, jb, kr
        out[tuple(pos_out) + tuple(pos_in)] += r4[ia, ib, ja, jb]
    return out.reshape(d ** 3, d ** 3)


def yang_baxter_residual(x: complex, y: complex, z: complex, c: complex, d: int = 3,
                         r_fn=None) -> float:
    """Spectral-norm defect of R12 R13 R23 = R23 R13 R12.

    ``r_fn`` replaces the built-in R-matrix, letting callers probe candidate
    solutions (or deliberately broken ones) against the same identity.
    """
    rf = r_fn or r_matrix
    r12 = _embed_two_site(rf(x, y, c, d), d, (0, 1))
    r13 = _embed_two_site(rf(x, z, c, d), d, (0, 2))
    r23 = _embed_two_site(rf(y, z, c, d), d, (1, 2))
    lhs = r12 @ r13 @ r23
    rhs = r23 @ r13 @ r12
    return float(np.linalg.norm(lhs - rhs, 2))


def unitarity_residual(x: complex, y: complex, c: complex, d: int = 3,
                       r_fn=None) -> float:
    """Defect of R(x,y) R_swap(y,x) = f(x,y) f(y,x) Id."""
    rf = r_fn or r_matrix
    p = perm_op(d)
    r = rf(x, y, c, d)
    r_swap = p @ rf(y, x, c, d) @ p
    target = f_fun(x, y, c) * f_fun(y, x, c) * np.eye(d * d)
    return float(np.linalg.norm(r @ r_swap - target, 2))


def izergin_det(xs, ys, c: complex) -> complex:
    """Determinant weight K_n(xs | ys); K_0 = 1 and K_1 = g.

    Requires pairwise-distinct entries within and across the two sets,
    and x - y + c away from zero (the determinant entries divide by f).
    """
    xs = list(xs)
    ys = list(ys)
    n = len(xs)
    if len(ys) != n:
        raise ValueError("argument sets must have equal size")
    if n == 0:
        return 1.0 + 0.0j
    for j in range(n):
        for k in range(j):
            _guard(xs[j], xs[k], "x_j - x_k")
            _guard(ys[j], ys[k], "y_j - y_k")
    for x in xs:
        for y in ys:
            _guard(x, y, "x - y")
            _guard(x + c, y, "x - y + c")
    pref = 1.0 + 0.0j
    for j in range(n):
        for k in range(j):
            # product over ordered pairs k < j
            pref *= g_fun(xs[j], xs[k], c) * g_fun(ys[k], ys[j], c)
    ratio = 1.0 + 0.0j
    for x in xs:
        for y in ys:
            ratio *= f_fun(x, y, c) / g_fun(x, y, c)
    mat = np.empty((n, n), dtype=complex)
    for j in range(n):
        for k in range(n):
            gg = g_fun(xs[j], ys[k], c)
            mat[j, k] = gg * gg / f_fun(xs[j], ys[k], c)
    return pref * ratio * np.linalg.det(mat)


def spectral_norm(mat: np.ndarray, iters: int = 80) -> float:
    """Largest singular value; exact SVD for small matrices, deterministic
    power iteration on the normal matrix for large ones."""
    m = np.asarray(mat)
    if m.size == 0:
        return 0.0
    if m.size <= 400_000:
        return float(np.linalg.norm(m, 2))
    v = np.linalg.norm(m, axis=0).astype(complex)
    nv = np.linalg.norm(v)
    if nv == 0:
        return 0.0
    v /= nv
    sigma = 0.0
    for _ in range(iters):
        w = m @ v
        v = m.conj().T @ w
        nv = np.linalg.norm(v)
        if nv == 0:
            return 0.0
        new_sigma = float(np.sqrt(nv))
        v /= nv
        if abs(new_sigma - sigma) <= 1e-6 * max(new_sigma, 1e-300):
            return new_sigma
        sigma = new_sigma
    return sigma


def rtt_residual(t_fn, u: complex, v: complex, c: complex,
                 sector: int | None = None) -> float:
    """Relative spectral-norm defect of R12 T1(u) T2(v) = T2(v) T1(u) R12.

    t_fn maps a spectral parameter to an AuxMatrix.  On a truncated Fock
    space the identity is exact only on input states whose occupation
    stays clear of the cutoff, so columns are restricted to total
    occupation <= sector (rows are kept in full).  The defect is divided
    by the scale ``norm(R) * norm(T1 T2)`` of the products being compared,
    so differently normalized monodromies are judged alike.
    """
    tu = t_fn(u)
    tv = t_fn(v)
    d = tu.auxdim
    basis = tu.basis
    r_flat = r_matrix(u, v, c, d)
    r = r_flat.reshape(d, d, d, d)
    if sector is not None:
        cols = basis.sector_mask(sector)
    else:
        cols = np.ones(basis.dim, dtype=bool)
    ncol = int(cols.sum())
    dim = basis.dim
    tu_d = [[tu.blocks[i][j].dense() for j in range(d)] for i in range(d)]
    tv_d = [[tv.blocks[i][j].dense() for j in range(d)] for i in range(d)]
    tv_cut = [[m[:, cols] for m in row] for row in tv_d]
    tu_cut = [[m[:, cols] for m in row] for row in tu_d]

    # all block products appearing on either side, computed once
    uv = {}
    vu = {}
    for a in range(d):
        for b in range(d):
            for e in range(d):
                for h in range(d):
                    uv[a, b, e, h] = tu_d[a][b] @ tv_cut[e][h]
                    vu[a, b, e, h] = tv_d[a][b] @ tu_cut[e][h]

    diff = np.zeros((d * d * dim, d * d * ncol), dtype=complex)
    prod = np.zeros_like(diff)
    for i in range(d):
        for k in range(d):
            for j in range(d):
                for l in range(d):
                    acc = np.zeros((dim, ncol), dtype=complex)
                    for ip in range(d):
                        for kp in range(d):
                            w = r[i, k, ip, kp]
                            if w != 0:
                                acc += w * uv[ip, j, kp, l]
                            w2 = r[ip, kp, j, l]
                            if w2 != 0:
                                acc -= w2 * vu[k, kp, i, ip]
                    br = (i * d + k) * dim
                    bc = (j * d + l) * ncol
                    diff[br:br + dim, bc:bc + ncol] = acc
                    prod[br:br + dim, bc:bc + ncol] = uv[i, j, k, l]
    scale = np.linalg.norm(r_flat, 2) * spectral_norm(prod)
    return spectral_norm(diff) / max(scale, 1e-300)
