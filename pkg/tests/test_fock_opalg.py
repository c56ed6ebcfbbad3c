"""Truncated Fock spaces, field operators, and block-matrix containers."""

import math

import numpy as np
import pytest

from bethelab import LatticeParams
from bethelab.errors import DimensionMismatchError
from bethelab.fock import (a_op, annihilator, creator, density,
                           interaction_root, site_number)
from bethelab.opalg import (AuxMatrix, FockBasis, LocalOperator, SpinBasis,
                            build_basis, compose)


def _multiset_count(modes: int, cap: int) -> int:
    return sum(math.comb(modes + k - 1, k) for k in range(cap + 1))


def test_fock_basis_dimension_matches_counting():
    for sites, cutoff in ((1, 2), (2, 3), (3, 2)):
        basis = build_basis(sites, cutoff)
        assert basis.dim == _multiset_count(2 * sites, cutoff)
        assert basis.totals[basis.vacuum_index()] == 0


def test_sector_mask_counts_low_occupation_states():
    basis = build_basis(2, 3)
    for bound in range(4):
        assert int(basis.sector_mask(bound).sum()) == _multiset_count(4, bound)


def test_annihilation_matrix_elements():
    basis = build_basis(1, 3)
    op = a_op(basis, 1, 1)
    # a |n> = sqrt(n) |n-1> on the chosen mode
    for n in (1, 2, 3):
        occ = [0] * basis.n_modes
        occ[basis.mode(1, 1)] = n
        vec = np.zeros(basis.dim)
        vec[basis.state_index(occ)] = 1.0
        image = op.apply(vec)
        occ[basis.mode(1, 1)] = n - 1
        assert abs(image[basis.state_index(occ)] - math.sqrt(n)) < 1e-15


def test_field_normalization_and_adjoint():
    params = LatticeParams(length=1.0, sites=2, kappa=1.0, cutoff=2)
    basis = build_basis(params.sites, params.cutoff)
    psi = annihilator(basis, 2, 1, params.delta)
    psi_dag = creator(basis, 2, 1, params.delta)
    assert np.allclose(psi_dag.dense(), psi.dense().conj().T)
    # [psi, psi^dagger] = 1/delta on the sector below the cap
    comm = psi @ psi_dag - psi_dag @ psi
    mask = basis.sector_mask(params.cutoff - 1)
    expect = np.eye(basis.dim)[:, mask] / params.delta
    assert np.allclose(comm.dense()[:, mask], expect)


def test_density_and_interaction_root_are_diagonal():
    params = LatticeParams(length=2.0, sites=2, kappa=1.6, cutoff=3)
    basis = build_basis(params.sites, params.cutoff)
    dens = density(basis, 1, params.delta).dense()
    assert np.allclose(dens, np.diag(np.diag(dens)))
    num = site_number(basis, 1).dense()
    assert np.allclose(dens * params.delta, num)
    root = interaction_root(basis, 1, params).dense()
    occ = np.diag(num).real
    expect = np.sqrt(params.kappa + params.kappa ** 2 * params.delta ** 2 * occ / 4.0)
    assert np.allclose(np.diag(root).real, expect)


def test_local_operator_norm_sector_restriction():
    basis = build_basis(1, 2)
    op = a_op(basis, 1, 1)
    # the sqrt(2) element sits on the column with two quanta
    assert abs(op.norm() - math.sqrt(2.0)) < 1e-12
    assert abs(op.norm(col_bound=1) - 1.0) < 1e-12


def test_aux_matrix_algebra_and_compose():
    basis = build_basis(1, 2)
    eye = AuxMatrix.identity(3, basis)
    two = eye + eye
    assert abs(two.entry(0, 0).norm() - 2.0) < 1e-14
    assert (two - eye * 2.0).max_block_norm() == 0.0
    scalar = AuxMatrix.from_scalar_matrix(np.diag([1.0, 2.0, 3.0]), basis)
    sq = compose(scalar, scalar)
    assert abs(sq.entry(2, 2).norm() - 9.0) < 1e-12
    with pytest.raises(DimensionMismatchError):
        AuxMatrix.identity(3, basis)._check(AuxMatrix.identity(2, basis))


def test_aux_matrix_apply_matches_dense():
    basis = build_basis(2, 2)
    rng = np.random.default_rng(9)
    from bethelab import make_model
    params = LatticeParams(length=1.0, sites=2, kappa=1.0, cutoff=2)
    mono = make_model("tcbg_full", params=params).monodromy(0.7 + 0.2j)
    states = [rng.normal(size=mono.basis.dim) + 1j * rng.normal(size=mono.basis.dim)
              for _ in range(3)]
    images = mono.apply(states)
    for i in range(3):
        direct = sum(mono.entry(i, j).dense() @ states[j] for j in range(3))
        assert np.allclose(images[i], direct)


def test_spin_basis_enumerates_all_configurations():
    basis = SpinBasis(3)
    assert basis.dim == 8
    assert len({s for s in basis.states}) == 8
