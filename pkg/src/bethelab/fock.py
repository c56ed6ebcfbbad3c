"""Lattice parameters and local field operators.

The canonical fields psi carry the 1/sqrt(delta) normalization that gives
them the delta-function commutator in the continuum limit; the discrete
ladder operators a, a^dagger are also exposed for the model that is
formulated directly in terms of them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import SectorError
from .opalg import FockBasis, LocalOperator


@dataclass(frozen=True)
class LatticeParams:
    """Geometry and coupling of the periodic Bose-gas lattice.

    length: physical size L of the interval.
    sites: number of lattice cells N.
    kappa: repulsive coupling (> 0).
    cutoff: global Fock-space occupation cap.
    """

    length: float
    sites: int
    kappa: float
    cutoff: int

    def __post_init__(self):
        if self.length <= 0:
            raise ValueError("length must be positive")
        if self.sites < 1:
            raise ValueError("need at least one site")
        if self.kappa <= 0:
            raise ValueError("kappa must be positive")
        if self.cutoff < 0:
            raise ValueError("cutoff must be nonnegative")

    @property
    def delta(self) -> float:
        return self.length / self.sites

    @property
    def c(self) -> complex:
        return -1j * self.kappa


def a_op(basis: FockBasis, color: int, site: int) -> LocalOperator:
    """Discrete annihilation operator with sqrt(n) amplitudes."""
    mode = basis.mode(color, site)
    rows, cols, vals = [], [], []
    for idx, state in enumerate(basis.states):
        n = state[mode]
        if n == 0:
            continue
        lowered = list(state)
        lowered[mode] = n - 1
        rows.append(basis.index[tuple(lowered)])
        cols.append(idx)
        vals.append(np.sqrt(n))
    mat = sp.csr_matrix((vals, (rows, cols)), shape=(basis.dim, basis.dim), dtype=complex)
    return LocalOperator(basis, mat, grading=-1)


def ad_op(basis: FockBasis, color: int, site: int) -> LocalOperator:
    """Discrete creation operator (defined only below the cutoff)."""
    return a_op(basis, color, site).adjoint()


def annihilator(basis: FockBasis, color: int, site: int, delta: float) -> LocalOperator:
    """Canonical field psi = a / sqrt(delta)."""
    return a_op(basis, color, site) * (1.0 / np.sqrt(delta))


def creator(basis: FockBasis, color: int, site: int, delta: float) -> LocalOperator:
    """Canonical field psi^dagger = a^dagger / sqrt(delta)."""
    return annihilator(basis, color, site, delta).adjoint()


def _diag_op(basis: FockBasis, values: np.ndarray, grading: int = 0) -> LocalOperator:
    return LocalOperator(basis, sp.diags(values.astype(complex)).tocsr(), grading=grading)


def site_number(basis: FockBasis, site: int) -> LocalOperator:
    """Integer occupation at a site, both colors summed."""
    m1, m2 = basis.mode(1, site), basis.mode(2, site)
    vals = np.array([s[m1] + s[m2] for s in basis.states], dtype=float)
    return _diag_op(basis, vals)


def density(basis: FockBasis, site: int, delta: float) -> LocalOperator:
    """Field density psi1^dag psi1 + psi2^dag psi2 = (site number)/delta."""
    return site_number(basis, site) * (1.0 / delta)


def interaction_root(basis: FockBasis, site: int, params: LatticeParams,
                     colors: tuple[int, ...] = (1, 2)) -> LocalOperator:
    """Diagonal square root sqrt(kappa + kappa^2 delta^2 rho / 4).

    ``colors`` selects which colors contribute to rho; the one-component
    reduction uses colors=(2,).
    """
    kap, dlt = params.kappa, params.delta
    modes = [basis.mode(c, site) for c in colors]
    occ = np.array([sum(s[m] for m in modes) for s in basis.states], dtype=float)
    vals = np.sqrt(kap + kap * kap * dlt * occ / 4.0)
    return _diag_op(basis, vals)


def sqrt_shifted_number(basis: FockBasis, site: int, shift: complex) -> LocalOperator:
    """Diagonal square root sqrt(shift + rho) for the discrete-boson model.

    For real shifts the spectrum must stay nonnegative on the retained
    states; complex shifts take the principal branch.
    """
    m1, m2 = basis.mode(1, site), basis.mode(2, site)
    occ = np.array([s[m1] + s[m2] for s in basis.states], dtype=float)
    spec = shift + occ
    if np.isrealobj(np.asarray(shift)) and np.imag(shift) == 0:
        if np.min(np.real(spec)) < 0:
            raise SectorError(
                f"sqrt(shift + rho) undefined: shift={shift} makes the spectrum negative")
    vals = np.sqrt(spec.astype(complex))
    return _diag_op(basis, vals)
