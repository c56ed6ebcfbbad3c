"""Bethe-equation solving, root handling, and on-shell certification."""

import numpy as np
import pytest

from bethelab import (BetheParams, BetheSystem, LatticeParams, SolveConfig,
                      SolveReport, bethe_ratio, bethe_residual, certify_onshell,
                      dedupe_roots, make_model, solve_bethe)

PARAMS = LatticeParams(length=1.0, sites=4, kappa=1.0, cutoff=3)
PROBES = (0.3 + 0.4j, -0.9 + 0.2j)


def test_continuum_single_root_is_momentum_mode():
    system = BetheSystem.tcbg_continuum(0, 1, 1.0, 1.0)
    report = solve_bethe(system, BetheParams((), (6.0,), system.c))
    assert report.converged
    assert abs(report.v_roots[0] - 2.0 * np.pi) < 1e-8


def test_continuum_pair_solves_symmetrically():
    system = BetheSystem.tcbg_continuum(0, 2, 1.0, 1.0)
    report = solve_bethe(system, BetheParams((), (6.0, -6.0), system.c))
    assert report.converged
    assert abs(report.v_roots[0] + report.v_roots[1]) < 1e-9
    assert np.abs(bethe_residual(system, (), report.v_roots)).max() < 1e-10


def test_lattice_pair_root_certifies_on_shell():
    system = BetheSystem.tcbg_lattice(0, 2, PARAMS)
    report = solve_bethe(system, BetheParams((), (7.5, -7.5), PARAMS.c))
    assert report.converged and report.residual_inf < 1e-10
    model = make_model("tcbg_full", params=PARAMS)
    root = BetheParams((), report.v_roots, PARAMS.c)
    assert certify_onshell(model, root, PROBES) < 1e-10
    moved = BetheParams((), (report.v_roots[0] + 0.1, report.v_roots[1]),
                        PARAMS.c)
    assert certify_onshell(model, moved, PROBES) > 1e-3


def test_nested_closed_form_root():
    # u at half the coupling, v at the two lattice boundary modes
    system = BetheSystem.tcbg_lattice(1, 2, PARAMS)
    us, vs = (-0.5j,), (8.0, -8.0)
    assert np.abs(bethe_residual(system, us, vs)).max() < 1e-12
    assert np.abs(bethe_ratio(system, us, vs) - 1.0).max() < 1e-12
    model = make_model("tcbg_full", params=PARAMS)
    assert certify_onshell(model, BetheParams(us, vs, PARAMS.c), PROBES) < 1e-12


def test_residual_validates_parameter_counts():
    system = BetheSystem.tcbg_lattice(1, 2, PARAMS)
    with pytest.raises(ValueError):
        bethe_residual(system, (), (8.0, -8.0))


def test_solver_rejects_coupling_mismatch():
    system = BetheSystem.tcbg_lattice(0, 1, PARAMS)
    with pytest.raises(ValueError):
        solve_bethe(system, BetheParams((), (3.0,), -2j))


def test_unbalanced_sector_reports_divergence_without_raising():
    system = BetheSystem.tcbg_lattice(1, 1, PARAMS)
    report = solve_bethe(system, BetheParams((-0.5 + 0.1j,), (3.0,), PARAMS.c))
    assert not report.converged
    assert report.message != ""


def test_dedupe_keeps_one_report_per_root_set():
    def rep(us, vs, converged=True):
        return SolveReport(tuple(us), tuple(vs), 1e-12, 3, converged, 1.0)

    reports = [
        rep((), (8.0, -8.0)),
        rep((), (-8.0, 8.0)),          # same set, permuted
        rep((), (8.0 + 1e-9, -8.0)),   # same set within tolerance
        rep((), (5.0, -5.0)),
        rep((), (1.0, -1.0), converged=False),
    ]
    kept = dedupe_roots(reports)
    assert len(kept) == 2
    assert all(r.converged for r in kept)


def test_certification_rejects_vanishing_vector():
    model = make_model("tcbg_full", params=PARAMS)
    p = BetheParams((0.4j, -0.9j), (8.0,), PARAMS.c)  # a > b: zero vector
    with pytest.raises(ValueError):
        certify_onshell(model, p, PROBES)


def test_solver_respects_iteration_cap():
    system = BetheSystem.tcbg_lattice(0, 2, PARAMS)
    config = SolveConfig(max_iterations=1)
    report = solve_bethe(system, BetheParams((), (7.5, -7.5), PARAMS.c), config)
    assert not report.converged
    assert report.iterations <= 1
