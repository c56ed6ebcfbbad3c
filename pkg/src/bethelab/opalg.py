"""Truncated-Fock operator algebra.

Everything downstream works with finite matrices acting on a truncated
occupation basis.  Two basis flavours are provided: a bosonic Fock basis
with two colors per site and a global particle-number cutoff, and a
spin-1/2 chain basis.  Operators carry an optional integer grading (the
net particle number they add), which lets tests assert that truncation
effects stay out of the sectors being compared.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import CapacityError, DimensionMismatchError


@dataclass
class AlgebraConfig:
    """Storage and comparison knobs.

    dense_threshold: basis dimension below which operators are stored dense.
    max_dim: hard cap on basis dimension (CapacityError beyond it).
    atol, rtol: default tolerances for exactness checks.
    """

    dense_threshold: int = 2000
    max_dim: int = 200_000
    atol: float = 1e-10
    rtol: float = 1e-10


CONFIG = AlgebraConfig()


class FockBasis:
    """Two-color bosonic Fock space over ``sites`` lattice sites.

    States are occupation tuples (n1(1), n2(1), ..., n1(N), n2(N)) with
    total occupation <= cutoff, enumerated in lexicographic order.  The
    vacuum is index 0.
    """

    def __init__(self, sites: int, cutoff: int, max_dim: int | None = None):
        if sites < 1:
            raise ValueError("need at least one site")
        if cutoff < 0:
            raise ValueError("cutoff must be nonnegative")
        self.sites = sites
        self.cutoff = cutoff
        self.n_modes = 2 * sites
        states = []
        for total in range(cutoff + 1):
            for combo in itertools.combinations_with_replacement(range(self.n_modes), total):
                occ = [0] * self.n_modes
                for m in combo:
                    occ[m] += 1
                states.append(tuple(occ))
        states.sort()
        bound = CONFIG.max_dim if max_dim is None else max_dim
        if len(states) > bound:
            raise CapacityError(
                f"basis dimension {len(states)} exceeds bound {bound}")
        self.states: tuple[tuple[int, ...], ...] = tuple(states)
        self.index: dict[tuple[int, ...], int] = {s: i for i, s in enumerate(self.states)}
        self.totals = np.array([sum(s) for s in self.states], dtype=np.int64)
        self.dim = len(self.states)

    def mode(self, color: int, site: int) -> int:
        """Flat mode index for color in {1,2} at site in {1..sites}."""
        if color not in (1, 2):
            raise ValueError("color must be 1 or 2")
        if not 1 <= site <= self.sites:
            raise ValueError("site out of range")
        return 2 * (site - 1) + (color - 1)

    def state_index(self, occ) -> int:
        return self.index[tuple(occ)]

    def vacuum_index(self) -> int:
        return self.index[(0,) * self.n_modes]

    def basis_vector(self, occ) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[self.state_index(occ)] = 1.0
        return v

    def sector_mask(self, bound: int) -> np.ndarray:
        return self.totals <= bound

    def signature(self):
        return ("fock", self.sites, self.cutoff)

    def __repr__(self):
        return f"FockBasis(sites={self.sites}, cutoff={self.cutoff}, dim={self.dim})"


class SpinBasis:
    """Spin-1/2 chain basis; occupation counts flipped (down) spins.

    States are tuples of 0/1 per site, all-up vacuum first.
    """

    def __init__(self, sites: int, max_dim: int | None = None):
        if sites < 1:
            raise ValueError("need at least one site")
        self.sites = sites
        self.n_modes = sites
        bound = CONFIG.max_dim if max_dim is None else max_dim
        if 2 ** sites > bound:
            raise CapacityError(f"basis dimension {2**sites} exceeds bound {bound}")
        self.states = tuple(itertools.product((0, 1), repeat=sites))
        self.index = {s: i for i, s in enumerate(self.states)}
        self.totals = np.array([sum(s) for s in self.states], dtype=np.int64)
        self.dim = len(self.states)

    def state_index(self, occ) -> int:
        return self.index[tuple(occ)]

    def vacuum_index(self) -> int:
        return 0

    def basis_vector(self, occ) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[self.state_index(occ)] = 1.0
        return v

    def sector_mask(self, bound: int) -> np.ndarray:
        return self.totals <= bound

    def signature(self):
        return ("spin", self.sites)

    def __repr__(self):
        return f"SpinBasis(sites={self.sites}, dim={self.dim})"


def build_basis(sites: int, cutoff: int, max_dim: int | None = None) -> FockBasis:
    """Build the truncated two-color Fock basis (vacuum at index 0)."""
    return FockBasis(sites, cutoff, max_dim=max_dim)


def same_basis(a, b) -> bool:
    return a is b or a.signature() == b.signature()


def _prefer_dense(dim: int) -> bool:
    return dim < CONFIG.dense_threshold


class LocalOperator:
    """A linear operator on a basis, stored dense or sparse by size.

    grading is the net occupation change: an operator with grading g maps
    the total-n sector into total-(n+g).  None means mixed/unknown.
    """

    def __init__(self, basis, data, grading: int | None = None):
        self.basis = basis
        if sp.issparse(data):
            data = data.tocsr()
            if _prefer_dense(basis.dim):
                data = np.asarray(data.todense())
        else:
            data = np.asarray(data, dtype=complex)
            if not _prefer_dense(basis.dim):
                data = sp.csr_matrix(data)
        if data.shape != (basis.dim, basis.dim):
            raise DimensionMismatchError(
                f"operator shape {data.shape} does not match basis dim {basis.dim}")
        self.data = data
        self.grading = grading

    # -- constructors ---------------------------------------------------
    @classmethod
    def identity(cls, basis):
        if _prefer_dense(basis.dim):
            mat = np.eye(basis.dim, dtype=complex)
        else:
            mat = sp.identity(basis.dim, dtype=complex, format="csr")
        return cls(basis, mat, grading=0)

    @classmethod
    def zeros(cls, basis):
        if _prefer_dense(basis.dim):
            mat = np.zeros((basis.dim, basis.dim), dtype=complex)
        else:
            mat = sp.csr_matrix((basis.dim, basis.dim), dtype=complex)
        return cls(basis, mat, grading=None)

    @classmethod
    def scalar(cls, basis, value):
        op = cls.identity(basis)
        return op * value

    # -- helpers --------------------------------------------------------
    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.data)

    def dense(self) -> np.ndarray:
        if self.is_sparse:
            return np.asarray(self.data.todense())
        return self.data

    def _coerce_pair(self, other):
        if not same_basis(self.basis, other.basis):
            raise DimensionMismatchError("operators live on different bases")
        a, b = self.data, other.data
        if sp.issparse(a) != sp.issparse(b):
            if _prefer_dense(self.basis.dim):
                a = np.asarray(a.todense()) if sp.issparse(a) else a
                b = np.asarray(b.todense()) if sp.issparse(b) else b
            else:
                a = a if sp.issparse(a) else sp.csr_matrix(a)
                b = b if sp.issparse(b) else sp.csr_matrix(b)
        return a, b

    @staticmethod
    def _add_grading(g1, g2):
        if g1 is None or g2 is None:
            return None
        return g1 + g2

    @staticmethod
    def _merge_grading(g1, g2):
        if g1 is None or g2 is None:
            return None
        return g1 if g1 == g2 else None

    # -- arithmetic -----------------------------------------------------
    def __add__(self, other):
        a, b = self._coerce_pair(other)
        return LocalOperator(self.basis, a + b,
                             grading=self._merge_grading(self.grading, other.grading))

    def __sub__(self, other):
        a, b = self._coerce_pair(other)
        return LocalOperator(self.basis, a - b,
                             grading=self._merge_grading(self.grading, other.grading))

    def __mul__(self, scalar):
        return LocalOperator(self.basis, self.data * scalar, grading=self.grading)

    __rmul__ = __mul__

    def __neg__(self):
        return self * (-1.0)

    def __matmul__(self, other):
        a, b = self._coerce_pair(other)
        return LocalOperator(self.basis, a @ b,
                             grading=self._add_grading(self.grading, other.grading))

    def adjoint(self):
        g = None if self.grading is None else -self.grading
        if self.is_sparse:
            return LocalOperator(self.basis, self.data.conjugate().transpose().tocsr(), grading=g)
        return LocalOperator(self.basis, self.data.conj().T, grading=g)

    def apply(self, vec: np.ndarray) -> np.ndarray:
        out = self.data @ vec
        return np.asarray(out).reshape(-1)

    # -- structure ------------------------------------------------------
    def restricted(self, row_bound: int | None = None, col_bound: int | None = None) -> np.ndarray:
        """Dense matrix keeping rows/cols with total occupation <= bound."""
        mat = self.dense()
        if row_bound is not None:
            mat = mat[self.basis.sector_mask(row_bound), :]
        if col_bound is not None:
            mat = mat[:, self.basis.sector_mask(col_bound)]
        return mat

    def norm(self, row_bound: int | None = None, col_bound: int | None = None) -> float:
        """Spectral norm, optionally sector-restricted."""
        mat = self.restricted(row_bound, col_bound)
        if mat.size == 0:
            return 0.0
        return float(np.linalg.norm(mat, 2))

    def infer_grading(self, tol: float = 0.0) -> int | None:
        """Read the grading off the matrix; None if mixed."""
        mat = self.dense()
        rows, cols = np.nonzero(np.abs(mat) > tol)
        if len(rows) == 0:
            return 0
        diffs = set(int(self.basis.totals[r] - self.basis.totals[c]) for r, c in zip(rows, cols))
        if len(diffs) == 1:
            return diffs.pop()
        return None


class AuxMatrix:
    """A d x d matrix of LocalOperators (d = 2 or 3), the auxiliary-space
    container for L-operators and monodromies."""

    def __init__(self, blocks):
        d = len(blocks)
        if d not in (2, 3) or any(len(row) != d for row in blocks):
            raise DimensionMismatchError("blocks must form a 2x2 or 3x3 square")
        basis = blocks[0][0].basis
        for row in blocks:
            for op in row:
                if not same_basis(op.basis, basis):
                    raise DimensionMismatchError("all blocks must share one basis")
        self.blocks = [list(row) for row in blocks]
        self.auxdim = d
        self.basis = basis

    @classmethod
    def identity(cls, auxdim: int, basis):
        eye = LocalOperator.identity(basis)
        zero = LocalOperator.zeros(basis)
        return cls([[eye if i == j else zero for j in range(auxdim)] for i in range(auxdim)])

    @classmethod
    def from_scalar_matrix(cls, mat, basis):
        mat = np.asarray(mat, dtype=complex)
        d = mat.shape[0]
        eye = LocalOperator.identity(basis)
        return cls([[eye * mat[i, j] for j in range(d)] for i in range(d)])

    def entry(self, i: int, j: int) -> LocalOperator:
        return self.blocks[i][j]

    def __add__(self, other):
        self._check(other)
        return AuxMatrix([[self.blocks[i][j] + other.blocks[i][j]
                           for j in range(self.auxdim)] for i in range(self.auxdim)])

    def __sub__(self, other):
        self._check(other)
        return AuxMatrix([[self.blocks[i][j] - other.blocks[i][j]
                           for j in range(self.auxdim)] for i in range(self.auxdim)])

    def __mul__(self, scalar):
        return AuxMatrix([[self.blocks[i][j] * scalar
                           for j in range(self.auxdim)] for i in range(self.auxdim)])

    __rmul__ = __mul__

    def _check(self, other):
        if self.auxdim != other.auxdim or not same_basis(self.basis, other.basis):
            raise DimensionMismatchError("aux matrices are incompatible")

    def trace(self) -> LocalOperator:
        out = self.blocks[0][0]
        for i in range(1, self.auxdim):
            out = out + self.blocks[i][i]
        return out

    def apply(self, states: list[np.ndarray]) -> list[np.ndarray]:
        """Blockwise action on a column of states, one per aux index."""
        d = self.auxdim
        out = []
        for i in range(d):
            acc = np.zeros(self.basis.dim, dtype=complex)
            for j in range(d):
                acc = acc + self.blocks[i][j].apply(states[j])
            out.append(acc)
        return out

    def max_block_norm(self, row_bound=None, col_bound=None) -> float:
        return max(self.blocks[i][j].norm(row_bound, col_bound)
                   for i in range(self.auxdim) for j in range(self.auxdim))

    def dense_full(self) -> np.ndarray:
        """Flatten to a (d*dim) x (d*dim) matrix, aux index outermost."""
        d, n = self.auxdim, self.basis.dim
        out = np.zeros((d * n, d * n), dtype=complex)
        for i in range(d):
            for j in range(d):
                out[i * n:(i + 1) * n, j * n:(j + 1) * n] = self.blocks[i][j].dense()
        return out


def compose(a: AuxMatrix, b: AuxMatrix) -> AuxMatrix:
    """Auxiliary-space product a @ b; a acts after b on the quantum space."""
    a._check(b)
    d = a.auxdim
    blocks = []
    for i in range(d):
        row = []
        for j in range(d):
            acc = a.blocks[i][0] @ b.blocks[0][j]
            for k in range(1, d):
                acc = acc + a.blocks[i][k] @ b.blocks[k][j]
            row.append(acc)
        blocks.append(row)
    return AuxMatrix(blocks)


class OperatorPolynomial:
    """Polynomial in the spectral parameter with AuxMatrix coefficients."""

    def __init__(self, coeffs: list[AuxMatrix]):
        if not coeffs:
            raise ValueError("need at least one coefficient")
        d = coeffs[0].auxdim
        for c in coeffs:
            if c.auxdim != d or not same_basis(c.basis, coeffs[0].basis):
                raise DimensionMismatchError("coefficients are incompatible")
        self.coeffs = list(coeffs)
        self.auxdim = d
        self.basis = coeffs[0].basis

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def coeff(self, k: int) -> AuxMatrix:
        if 0 <= k < len(self.coeffs):
            return self.coeffs[k]
        zero = LocalOperator.zeros(self.basis)
        return AuxMatrix([[zero for _ in range(self.auxdim)] for _ in range(self.auxdim)])


def poly_compose(p1: OperatorPolynomial, p2: OperatorPolynomial) -> OperatorPolynomial:
    """Coefficient convolution of p1 @ p2, keeping p1 leftmost (operator
    products do not commute)."""
    n1, n2 = len(p1.coeffs), len(p2.coeffs)
    zero = LocalOperator.zeros(p1.basis)
    out = []
    for k in range(n1 + n2 - 1):
        acc = None
        for i in range(max(0, k - n2 + 1), min(k, n1 - 1) + 1):
            term = compose(p1.coeffs[i], p2.coeffs[k - i])
            acc = term if acc is None else acc + term
        if acc is None:
            acc = AuxMatrix([[zero for _ in range(p1.auxdim)] for _ in range(p1.auxdim)])
        out.append(acc)
    return OperatorPolynomial(out)


def poly_eval(p: OperatorPolynomial, u: complex) -> AuxMatrix:
    """Horner evaluation at a scalar spectral parameter."""
    acc = p.coeffs[-1]
    for c in reversed(p.coeffs[:-1]):
        acc = acc * u + c
    return acc
