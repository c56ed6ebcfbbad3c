"""Lattice integrable models and their monodromy matrices.

Six model kinds share one interface: a site-local L-operator in a 2- or
3-dimensional auxiliary space, the ordered product T = L_N ... L_1, and
vacuum data.  Models also expose a cleared polynomial form of T (poles in
the spectral parameter moved into an explicit scalar denominator), which
downstream code uses for exact Laurent coefficients at infinity.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np
import scipy.sparse as sp

from . import fock
from .errors import DimensionMismatchError, PoleError
from .opalg import (AuxMatrix, FockBasis, LocalOperator, OperatorPolynomial,
                    SpinBasis, build_basis, compose, poly_compose)


class ModelKind(Enum):
    DISCRETE_BOSON = "discrete_boson"
    TCBG_FULL = "tcbg_full"
    TCBG_SMALL = "tcbg_small"
    GL2_FULL = "gl2_full"
    GL2_SMALL = "gl2_small"
    XXX_CHAIN = "xxx_chain"


@dataclass
class VacuumData:
    """Reference-state data: vacuum index, eigenvalue ratios, and whether
    the middle (respectively second) eigenvalue is normalized to one.

    For 2x2 models r1 is the Bethe-equation ratio lambda_1/lambda_2 and
    r3 is None.
    """

    vacuum_index: int
    r1: Callable[[complex], complex] | None
    r3: Callable[[complex], complex] | None
    lambda2_is_one: bool


def vacuum_phase(u: complex, delta: float) -> complex:
    """Per-site vacuum phase (1 + i u delta/2) / (1 - i u delta/2)."""
    den = 1.0 - 0.5j * u * delta
    if abs(den) < 1e-14:
        raise PoleError("spectral parameter at the lattice pole 2/(i delta)")
    return (1.0 + 0.5j * u * delta) / den


def vacuum_phase_power_error(u: complex, x: float, deltas) -> np.ndarray:
    """|phase^(x/delta) - exp(i u x)| for each delta; x/delta must be integral."""
    out = []
    for d in deltas:
        steps = x / d
        n = round(steps)
        if abs(steps - n) > 1e-9:
            raise ValueError(f"x = {x} is not a multiple of delta = {d}")
        out.append(abs(vacuum_phase(u, d) ** n - np.exp(1j * u * x)))
    return np.array(out)


@dataclass
class PolyData:
    """Monodromy as poly(u) / (den_lead * prod_k (u - den_roots[k]))."""

    poly: OperatorPolynomial
    den_lead: complex
    den_roots: tuple[complex, ...]


class LatticeModel:
    """Shared machinery: products, propagation, caches."""

    kind: ModelKind
    auxdim: int
    c: complex

    def __init__(self, basis):
        self.basis = basis
        self._mono_cache: dict[complex, AuxMatrix] = {}

    # subclasses provide:
    #   _site_blocks(n, u) -> auxdim x auxdim list of (csr/dense or None)
    #   _site_vacuum_eigenvalues(n, u) -> tuple of length auxdim
    #   _block_gradings() -> auxdim x auxdim table of int/None
    #   _site_poly(n) -> (coeff list of block tables, den_lead, den_roots)

    @property
    def n_sites(self) -> int:
        return self.basis.sites

    def vacuum(self) -> np.ndarray:
        v = np.zeros(self.basis.dim, dtype=complex)
        v[self.basis.vacuum_index()] = 1.0
        return v

    def vacuum_eigenvalue(self, i: int, u: complex,
                          site_range: tuple[int, int] | None = None) -> complex:
        lo, hi = site_range if site_range else (1, self.n_sites)
        out = 1.0 + 0.0j
        for n in range(lo, hi + 1):
            out *= self._site_vacuum_eigenvalues(n, u)[i]
        return out

    def r1(self, u: complex) -> complex:
        return self.vacuum_eigenvalue(0, u) / self.vacuum_eigenvalue(1, u)

    def r3(self, u: complex) -> complex:
        if self.auxdim == 2:
            raise ValueError("r3 is defined for 3x3 auxiliary spaces only")
        return self.vacuum_eigenvalue(2, u) / self.vacuum_eigenvalue(1, u)

    def vacuum_data(self) -> VacuumData:
        lam2_one = all(
            abs(self.vacuum_eigenvalue(1, w) - 1.0) < 1e-12
            for w in (0.37 + 0.11j, -1.2 + 0.8j))
        if self.auxdim == 2:
            return VacuumData(self.basis.vacuum_index(), self.r1, None, lam2_one)
        return VacuumData(self.basis.vacuum_index(), self.r1, self.r3, lam2_one)

    # -- L-operator and monodromy ----------------------------------------
    def l_operator(self, n: int, u: complex) -> AuxMatrix:
        blocks = self._site_blocks(n, u)
        grad = self._block_gradings()
        d = self.auxdim
        out = []
        for i in range(d):
            row = []
            for j in range(d):
                blk = blocks[i][j]
                if blk is None:
                    row.append(LocalOperator.zeros(self.basis))
                else:
                    row.append(LocalOperator(self.basis, blk, grading=grad[i][j]))
            out.append(row)
        return AuxMatrix(out)

    def monodromy(self, u: complex, site_range: tuple[int, int] | None = None) -> AuxMatrix:
        lo, hi = site_range if site_range else (1, self.n_sites)
        key = (u, lo, hi)
        if key in self._mono_cache:
            return self._mono_cache[key]
        t = self.l_operator(hi, u)
        for n in range(hi - 1, lo - 1, -1):
            t = compose(t, self.l_operator(n, u))
        if len(self._mono_cache) > 64:
            self._mono_cache.clear()
        self._mono_cache[key] = t
        return t

    # -- matrix-free propagation -----------------------------------------
    def apply_chain(self, u: complex, states: list[np.ndarray],
                    site_range: tuple[int, int] | None = None) -> list[np.ndarray]:
        """Apply T(u) blockwise to a column of aux-indexed states."""
        lo, hi = site_range if site_range else (1, self.n_sites)
        d = self.auxdim
        cur = [np.asarray(s, dtype=complex) for s in states]
        for n in range(lo, hi + 1):
            blocks = self._site_blocks(n, u)
            nxt = []
            for i in range(d):
                acc = np.zeros(self.basis.dim, dtype=complex)
                for j in range(d):
                    blk = blocks[i][j]
                    if blk is not None:
                        acc += np.asarray(blk @ cur[j]).reshape(-1)
                nxt.append(acc)
            cur = nxt
        return cur

    def entry_apply(self, u: complex, i: int, j: int, vec: np.ndarray,
                    site_range: tuple[int, int] | None = None) -> np.ndarray:
        """Action of the monodromy entry T_ij(u) on a state (0-based aux)."""
        states = [np.zeros(self.basis.dim, dtype=complex) for _ in range(self.auxdim)]
        states[j] = np.asarray(vec, dtype=complex)
        return self.apply_chain(u, states, site_range)[i]

    def trace_apply(self, u: complex, vec: np.ndarray,
                    site_range: tuple[int, int] | None = None) -> np.ndarray:
        out = np.zeros(self.basis.dim, dtype=complex)
        for i in range(self.auxdim):
            out += self.entry_apply(u, i, i, vec, site_range)
        return out

    # -- polynomial form ---------------------------------------------------
    def monodromy_poly(self, site_range: tuple[int, int] | None = None) -> PolyData:
        lo, hi = site_range if site_range else (1, self.n_sites)
        grad = self._block_gradings()

        def wrap(table):
            d = self.auxdim
            rows = []
            for i in range(d):
                row = []
                for j in range(d):
                    blk = table[i][j]
                    if blk is None:
                        row.append(LocalOperator.zeros(self.basis))
                    else:
                        row.append(LocalOperator(self.basis, blk, grading=grad[i][j]))
                rows.append(row)
            return AuxMatrix(rows)

        poly = None
        lead = 1.0 + 0.0j
        roots: list[complex] = []
        for n in range(hi, lo - 1, -1):
            tables, site_lead, site_roots = self._site_poly(n)
            p = OperatorPolynomial([wrap(t) for t in tables])
            poly = p if poly is None else poly_compose(poly, p)
            lead *= site_lead
            roots.extend(site_roots)
        return PolyData(poly, lead, tuple(roots))


# -- two-component Bose gas ----------------------------------------------

class _TcbgBase(LatticeModel):
    auxdim = 3

    def __init__(self, params: fock.LatticeParams, basis: FockBasis | None = None):
        if basis is None:
            basis = build_basis(params.sites, params.cutoff)
        if basis.sites != params.sites:
            raise DimensionMismatchError("basis and params disagree on site count")
        super().__init__(basis)
        self.params = params
        self.c = params.c
        self._site_ops_cache: dict[int, dict] = {}

    def site_ops(self, n: int) -> dict:
        """Per-site field matrices in sparse form, cached."""
        if n not in self._site_ops_cache:
            b, d = self.basis, self.params.delta
            a1 = sp.csr_matrix(fock.annihilator(b, 1, n, d).data)
            a2 = sp.csr_matrix(fock.annihilator(b, 2, n, d).data)
            c1 = a1.conjugate().transpose().tocsr()
            c2 = a2.conjugate().transpose().tocsr()
            q = sp.csr_matrix(fock.interaction_root(b, n, self.params).data)
            ops = {
                "a1": a1, "a2": a2, "c1": c1, "c2": c2, "q": q,
                "e11": (c1 @ a1).tocsr(), "e12": (c1 @ a2).tocsr(),
                "e21": (c2 @ a1).tocsr(), "e22": (c2 @ a2).tocsr(),
                "c1q": (c1 @ q).tocsr(), "c2q": (c2 @ q).tocsr(),
                "qa1": (q @ a1).tocsr(), "qa2": (q @ a2).tocsr(),
                "eye": sp.identity(b.dim, dtype=complex, format="csr"),
            }
            self._site_ops_cache[n] = ops
        return self._site_ops_cache[n]

    def _block_gradings(self):
        return [[0, 0, 1], [0, 0, 1], [-1, -1, 0]]


class TcbgFullModel(_TcbgBase):
    """Exact lattice model for the two-component gas; lambda_2 = 1."""

    kind = ModelKind.TCBG_FULL

    def _site_blocks(self, n, u):
        o = self.site_ops(n)
        d = self.params.delta
        kd2 = 0.5 * self.params.kappa * d * d
        norm = 1.0 - 0.5j * u * d
        if abs(norm) < 1e-14:
            raise PoleError("spectral parameter at the lattice pole")
        s = 1.0 / norm
        eye = o["eye"]
        return [
            [s * (norm * eye + kd2 * o["e11"]), s * kd2 * o["e12"], s * (-1j * d) * o["c1q"]],
            [s * kd2 * o["e21"], s * (norm * eye + kd2 * o["e22"]), s * (-1j * d) * o["c2q"]],
            [s * (1j * d) * o["qa1"], s * (1j * d) * o["qa2"],
             s * ((1.0 + 0.5j * u * d) * eye + kd2 * (o["e11"] + o["e22"]))],
        ]

    def _site_vacuum_eigenvalues(self, n, u):
        return (1.0, 1.0, vacuum_phase(u, self.params.delta))

    def _site_poly(self, n):
        # (1 - i u delta/2) L(u) is linear in u
        o = self.site_ops(n)
        d = self.params.delta
        kd2 = 0.5 * self.params.kappa * d * d
        eye = o["eye"]
        zer = None
        c0 = [
            [eye + kd2 * o["e11"], kd2 * o["e12"], (-1j * d) * o["c1q"]],
            [kd2 * o["e21"], eye + kd2 * o["e22"], (-1j * d) * o["c2q"]],
            [(1j * d) * o["qa1"], (1j * d) * o["qa2"], eye + kd2 * (o["e11"] + o["e22"])],
        ]
        h = -0.5j * d
        c1 = [
            [h * eye, zer, zer],
            [zer, h * eye, zer],
            [zer, zer, -h * eye],
        ]
        # denominator (1 - i u delta/2) = (-i delta/2)(u + 2i/delta)
        return [c0, c1], -0.5j * d, (-2j / d,)


class TcbgSmallModel(_TcbgBase):
    """Infinitesimal form: all O(delta^2) entry corrections dropped."""

    kind = ModelKind.TCBG_SMALL

    def _site_blocks(self, n, u):
        o = self.site_ops(n)
        d = self.params.delta
        rk = np.sqrt(self.params.kappa)
        am = (1.0 - 0.5j * u * d)
        ap = (1.0 + 0.5j * u * d)
        eye = o["eye"]
        return [
            [am * eye, None, (-1j * d * rk) * o["c1"]],
            [None, am * eye, (-1j * d * rk) * o["c2"]],
            [(1j * d * rk) * o["a1"], (1j * d * rk) * o["a2"], ap * eye],
        ]

    def _site_vacuum_eigenvalues(self, n, u):
        d = self.params.delta
        return (1.0 - 0.5j * u * d, 1.0 - 0.5j * u * d, 1.0 + 0.5j * u * d)

    def _site_poly(self, n):
        o = self.site_ops(n)
        d = self.params.delta
        rk = np.sqrt(self.params.kappa)
        eye = o["eye"]
        c0 = [
            [eye, None, (-1j * d * rk) * o["c1"]],
            [None, eye, (-1j * d * rk) * o["c2"]],
            [(1j * d * rk) * o["a1"], (1j * d * rk) * o["a2"], eye],
        ]
        h = -0.5j * d
        c1 = [
            [h * eye, None, None],
            [None, h * eye, None],
            [None, None, -h * eye],
        ]
        return [c0, c1], 1.0, ()


class DiscreteBosonModel(LatticeModel):
    """Two-color discrete bosons with c = -1; T normalized by u^{-N}."""

    kind = ModelKind.DISCRETE_BOSON
    auxdim = 3
    c = -1.0 + 0.0j

    def __init__(self, sites: int, cutoff: int, shift: complex,
                 basis: FockBasis | None = None):
        if basis is None:
            basis = build_basis(sites, cutoff)
        super().__init__(basis)
        self.shift = shift
        self._site_ops_cache: dict[int, dict] = {}

    def site_ops(self, n: int) -> dict:
        if n not in self._site_ops_cache:
            b = self.basis
            a1 = sp.csr_matrix(fock.a_op(b, 1, n).data)
            a2 = sp.csr_matrix(fock.a_op(b, 2, n).data)
            c1 = a1.conjugate().transpose().tocsr()
            c2 = a2.conjugate().transpose().tocsr()
            sq = sp.csr_matrix(fock.sqrt_shifted_number(b, n, self.shift).data)
            num = sp.csr_matrix(fock.site_number(b, n).data)
            ops = {
                "a1": a1, "a2": a2, "c1": c1, "c2": c2, "sq": sq, "num": num,
                "e11": (c1 @ a1).tocsr(), "e12": (c1 @ a2).tocsr(),
                "e21": (c2 @ a1).tocsr(), "e22": (c2 @ a2).tocsr(),
                "c1sq": (c1 @ sq).tocsr(), "c2sq": (c2 @ sq).tocsr(),
                "sqa1": (sq @ a1).tocsr(), "sqa2": (sq @ a2).tocsr(),
                "eye": sp.identity(b.dim, dtype=complex, format="csr"),
            }
            self._site_ops_cache[n] = ops
        return self._site_ops_cache[n]

    def _p_blocks(self, n):
        o = self.site_ops(n)
        return [
            [o["e11"], o["e12"], 1j * o["c1sq"]],
            [o["e21"], o["e22"], 1j * o["c2sq"]],
            [1j * o["sqa1"], 1j * o["sqa2"], -(self.shift * o["eye"] + o["num"])],
        ]

    def _site_blocks(self, n, u):
        if abs(u) < 1e-14:
            raise PoleError("discrete-boson L-operator is singular at u = 0")
        o = self.site_ops(n)
        p = self._p_blocks(n)
        s = 1.0 / u
        out = []
        for i in range(3):
            row = []
            for j in range(3):
                blk = p[i][j] + u * o["eye"] if i == j else p[i][j]
                row.append(s * blk)
            out.append(row)
        return out

    def _site_vacuum_eigenvalues(self, n, u):
        return (1.0, 1.0, (u - self.shift) / u)

    def _block_gradings(self):
        return [[0, 0, 1], [0, 0, 1], [-1, -1, 0]]

    def _site_poly(self, n):
        o = self.site_ops(n)
        p = self._p_blocks(n)
        c1 = [[o["eye"] if i == j else None for j in range(3)] for i in range(3)]
        return [p, c1], 1.0, (0.0 + 0.0j,)


class _Gl2Base(LatticeModel):
    """One-component reductions on the color-2 modes of the shared basis."""

    auxdim = 2

    def __init__(self, params: fock.LatticeParams, basis: FockBasis | None = None):
        if basis is None:
            basis = build_basis(params.sites, params.cutoff)
        super().__init__(basis)
        self.params = params
        self.c = params.c
        self._site_ops_cache: dict[int, dict] = {}

    def site_ops(self, n: int) -> dict:
        if n not in self._site_ops_cache:
            b, d = self.basis, self.params.delta
            a2 = sp.csr_matrix(fock.annihilator(b, 2, n, d).data)
            c2 = a2.conjugate().transpose().tocsr()
            q = sp.csr_matrix(
                fock.interaction_root(b, n, self.params, colors=(2,)).data)
            ops = {
                "a2": a2, "c2": c2, "q": q,
                "e22": (c2 @ a2).tocsr(),
                "c2q": (c2 @ q).tocsr(), "qa2": (q @ a2).tocsr(),
                "eye": sp.identity(b.dim, dtype=complex, format="csr"),
            }
            self._site_ops_cache[n] = ops
        return self._site_ops_cache[n]

    def _block_gradings(self):
        return [[0, 1], [-1, 0]]


class Gl2FullModel(_Gl2Base):
    kind = ModelKind.GL2_FULL

    def _site_blocks(self, n, u):
        o = self.site_ops(n)
        d = self.params.delta
        kd2 = 0.5 * self.params.kappa * d * d
        norm = 1.0 - 0.5j * u * d
        if abs(norm) < 1e-14:
            raise PoleError("spectral parameter at the lattice pole")
        s = 1.0 / norm
        eye = o["eye"]
        return [
            [s * (norm * eye + kd2 * o["e22"]), s * (-1j * d) * o["c2q"]],
            [s * (1j * d) * o["qa2"], s * ((1.0 + 0.5j * u * d) * eye + kd2 * o["e22"])],
        ]

    def _site_vacuum_eigenvalues(self, n, u):
        return (1.0, vacuum_phase(u, self.params.delta))

    def _site_poly(self, n):
        o = self.site_ops(n)
        d = self.params.delta
        kd2 = 0.5 * self.params.kappa * d * d
        eye = o["eye"]
        c0 = [
            [eye + kd2 * o["e22"], (-1j * d) * o["c2q"]],
            [(1j * d) * o["qa2"], eye + kd2 * o["e22"]],
        ]
        h = -0.5j * d
        c1 = [[h * eye, None], [None, -h * eye]]
        return [c0, c1], -0.5j * d, (-2j / d,)


class Gl2SmallModel(_Gl2Base):
    kind = ModelKind.GL2_SMALL

    def _site_blocks(self, n, u):
        o = self.site_ops(n)
        d = self.params.delta
        rk = np.sqrt(self.params.kappa)
        eye = o["eye"]
        return [
            [(1.0 - 0.5j * u * d) * eye, (-1j * d * rk) * o["c2"]],
            [(1j * d * rk) * o["a2"], (1.0 + 0.5j * u * d) * eye],
        ]

    def _site_vacuum_eigenvalues(self, n, u):
        d = self.params.delta
        return (1.0 - 0.5j * u * d, 1.0 + 0.5j * u * d)

    def _site_poly(self, n):
        o = self.site_ops(n)
        d = self.params.delta
        rk = np.sqrt(self.params.kappa)
        eye = o["eye"]
        c0 = [[eye, (-1j * d * rk) * o["c2"]], [(1j * d * rk) * o["a2"], eye]]
        h = -0.5j * d
        c1 = [[h * eye, None], [None, -h * eye]]
        return [c0, c1], 1.0, ()


class XxxChainModel(LatticeModel):
    """Inhomogeneous spin-1/2 chain, all-up pseudovacuum, lambda_2 = 1."""

    kind = ModelKind.XXX_CHAIN
    auxdim = 2

    def __init__(self, sites: int, c: complex,
                 inhomogeneities=None, basis: SpinBasis | None = None):
        if basis is None:
            basis = SpinBasis(sites)
        super().__init__(basis)
        self.c = c
        if inhomogeneities is None:
            # homogeneous point: all inhomogeneities at c/2
            inhomogeneities = tuple(c / 2 for _ in range(sites))
        self.xis = tuple(inhomogeneities)
        if len(self.xis) != sites:
            raise DimensionMismatchError("need one inhomogeneity per site")
        self._site_ops_cache: dict[int, dict] = {}

    def site_ops(self, n: int) -> dict:
        if n not in self._site_ops_cache:
            b = self.basis
            dim = b.dim
            rows_m, cols_m = [], []
            rows_p, cols_p = [], []
            diag_up = np.zeros(dim)
            diag_dn = np.zeros(dim)
            for idx, state in enumerate(b.states):
                if state[n - 1] == 0:
                    diag_up[idx] = 1.0
                    flipped = list(state)
                    flipped[n - 1] = 1
                    rows_m.append(b.index[tuple(flipped)])
                    cols_m.append(idx)
                else:
                    diag_dn[idx] = 1.0
                    flipped = list(state)
                    flipped[n - 1] = 0
                    rows_p.append(b.index[tuple(flipped)])
                    cols_p.append(idx)
            sm = sp.csr_matrix((np.ones(len(rows_m)), (rows_m, cols_m)),
                               shape=(dim, dim), dtype=complex)
            spl = sp.csr_matrix((np.ones(len(rows_p)), (rows_p, cols_p)),
                                shape=(dim, dim), dtype=complex)
            ops = {
                "sm": sm, "sp": spl,
                "proj_up": sp.diags(diag_up.astype(complex)).tocsr(),
                "proj_dn": sp.diags(diag_dn.astype(complex)).tocsr(),
                "eye": sp.identity(dim, dtype=complex, format="csr"),
            }
            self._site_ops_cache[n] = ops
        return self._site_ops_cache[n]

    def _site_blocks(self, n, u):
        den = u - self.xis[n - 1]
        if abs(den) < 1e-12:
            raise PoleError(f"spectral parameter hits inhomogeneity {n}")
        o = self.site_ops(n)
        s = 1.0 / den
        c = self.c
        # (1 + sigma^z)/2 projects on up, (1 - sigma^z)/2 on down
        return [
            [s * (den * o["eye"] + c * o["proj_up"]), s * c * o["sm"]],
            [s * c * o["sp"], s * (den * o["eye"] + c * o["proj_dn"])],
        ]

    def _site_vacuum_eigenvalues(self, n, u):
        den = u - self.xis[n - 1]
        return ((den + self.c) / den, 1.0)

    def _block_gradings(self):
        return [[0, 1], [-1, 0]]

    def _site_poly(self, n):
        o = self.site_ops(n)
        xi = self.xis[n - 1]
        c = self.c
        c0 = [
            [(-xi) * o["eye"] + c * o["proj_up"], c * o["sm"]],
            [c * o["sp"], (-xi) * o["eye"] + c * o["proj_dn"]],
        ]
        c1 = [[o["eye"], None], [None, o["eye"]]]
        return [c0, c1], 1.0, (xi,)


class PartialModel:
    """A contiguous-site slice of a model, with the same interface where it
    matters: monodromy entries act on the full basis but only touch the
    slice's sites."""

    def __init__(self, model: LatticeModel, lo: int, hi: int):
        if not 1 <= lo <= hi <= model.n_sites:
            raise ValueError(f"invalid site range [{lo}, {hi}]")
        self.model = model
        self.lo, self.hi = lo, hi
        self.basis = model.basis
        self.auxdim = model.auxdim
        self.c = model.c
        self.kind = model.kind
        self.params = getattr(model, "params", None)

    @property
    def n_sites(self):
        return self.hi - self.lo + 1

    def vacuum(self):
        return self.model.vacuum()

    def vacuum_eigenvalue(self, i, u):
        return self.model.vacuum_eigenvalue(i, u, (self.lo, self.hi))

    def r1(self, u):
        return self.vacuum_eigenvalue(0, u) / self.vacuum_eigenvalue(1, u)

    def r3(self, u):
        return self.vacuum_eigenvalue(2, u) / self.vacuum_eigenvalue(1, u)

    def monodromy(self, u):
        return self.model.monodromy(u, (self.lo, self.hi))

    def entry_apply(self, u, i, j, vec):
        return self.model.entry_apply(u, i, j, vec, (self.lo, self.hi))

    def trace_apply(self, u, vec):
        return self.model.trace_apply(u, vec, (self.lo, self.hi))

    def monodromy_poly(self):
        return self.model.monodromy_poly((self.lo, self.hi))

    def site_ops(self, n: int) -> dict:
        return self.model.site_ops(n)


def make_model(kind: ModelKind | str, *, params: fock.LatticeParams | None = None,
               basis=None, sites: int | None = None, cutoff: int | None = None,
               shift: complex | None = None, c: complex | None = None,
               inhomogeneities=None) -> LatticeModel:
    """Factory keyed by ModelKind (or its string value)."""
    kind = ModelKind(kind) if not isinstance(kind, ModelKind) else kind
    if kind == ModelKind.TCBG_FULL:
        return TcbgFullModel(params, basis)
    if kind == ModelKind.TCBG_SMALL:
        return TcbgSmallModel(params, basis)
    if kind == ModelKind.GL2_FULL:
        return Gl2FullModel(params, basis)
    if kind == ModelKind.GL2_SMALL:
        return Gl2SmallModel(params, basis)
    if kind == ModelKind.DISCRETE_BOSON:
        if shift is None:
            raise ValueError("discrete-boson model needs the spectral shift")
        return DiscreteBosonModel(sites, cutoff, shift, basis)
    if kind == ModelKind.XXX_CHAIN:
        if c is None:
            raise ValueError("spin chain needs the coupling c")
        return XxxChainModel(sites, c, inhomogeneities, basis)
    raise ValueError(f"unknown model kind {kind}")


def discrete_to_tcbg_argument(u: complex, params: fock.LatticeParams) -> complex:
    """Spectral map under which the discrete-boson model reproduces the
    exact lattice gas: u -> (u + 2i/delta) / (i kappa)."""
    return (u + 2j / params.delta) / (1j * params.kappa)


def full_vs_discrete_residual(params: fock.LatticeParams, u: complex,
                              site: int = 1, basis=None) -> float:
    """Consistency of the exact lattice L-operator with the sign-twisted
    discrete-boson one at shifted argument and shift 4/(kappa delta)."""
    full = TcbgFullModel(params, basis)
    disc = DiscreteBosonModel(params.sites, params.cutoff, 4.0 / (params.kappa * params.delta),
                              basis=full.basis)
    up = discrete_to_tcbg_argument(u, params)
    la = full.l_operator(site, u)
    lb = disc.l_operator(site, up)
    # right-multiplication by diag(1,1,-1) flips the sign of the third column
    resid = 0.0
    for i in range(3):
        for j in range(3):
            sign = -1.0 if j == 2 else 1.0
            diff = la.blocks[i][j] - lb.blocks[i][j] * sign
            resid = max(resid, diff.norm())
    return resid
