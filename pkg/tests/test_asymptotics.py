"""Large-parameter structure: series terms, order reversal, zero modes."""

import numpy as np
import pytest

from bethelab import (BetheParams, LatticeParams, antimorphism_residual,
                      block_sums, bv_tcbg, default_sigma_schedule,
                      local_operator_extraction, make_model, series_term,
                      vacuum_exchange_residual, windowed_mode_vector,
                      zero_modes_exact, zero_modes_windowed)
from bethelab.errors import PoleError, StructureError
from bethelab.fock import annihilator, creator, density

PARAMS = LatticeParams(length=1.0, sites=3, kappa=1.3, cutoff=3)


def _full(params=PARAMS):
    return make_model("tcbg_full", params=params)


def test_series_sums_to_normalized_monodromy():
    model = _full()
    small = make_model("tcbg_small", params=PARAMS)
    kappa = PARAMS.kappa
    for u in (0.9 + 0.3j, -1.2 + 0.7j):
        target = small.monodromy(u) * (1.0 / small.vacuum_eigenvalue(0, u))
        acc = None
        for n in range(PARAMS.sites + 1):
            piece = series_term(small, u, n).term * kappa ** (n / 2.0)
            acc = piece if acc is None else acc + piece
        assert (acc - target).max_block_norm() < 1e-12


def test_series_terms_alternate_between_blocks():
    small = make_model("tcbg_small", params=PARAMS)
    u = 0.7 - 0.4j
    odd = series_term(small, u, 1).term
    even = series_term(small, u, 2).term
    # odd orders live purely in the last row/column
    assert max(odd.entry(i, j).norm() for i in range(2) for j in range(2)) < 1e-14
    assert odd.entry(2, 2).norm() < 1e-14
    # even orders live purely in the color block and the last diagonal entry
    assert max(even.entry(i, 2).norm() for i in range(2)) < 1e-14
    assert max(even.entry(2, j).norm() for j in range(2)) < 1e-14


def test_series_vanishes_beyond_site_count():
    small = make_model("tcbg_small", params=PARAMS)
    beyond = series_term(small, 0.9 + 0.3j, PARAMS.sites + 1).term
    assert beyond.max_block_norm() == 0.0


def test_block_sums_match_series_recomputation():
    small = make_model("tcbg_small", params=PARAMS)
    u = 0.9 + 0.3j
    color, last = block_sums(small, u, 1)
    ref = series_term(small, u, 2).term
    bound = PARAMS.cutoff - 1
    worst = 0.0
    for i in range(2):
        for j in range(2):
            diff = color[i][j] - ref.entry(i, j)
            worst = max(worst, diff.norm(col_bound=bound))
    worst = max(worst, (last - ref.entry(2, 2)).norm(col_bound=bound))
    assert worst < 1e-12
    with pytest.raises(ValueError):
        block_sums(small, u, 0)


def test_order_reversal_is_exact_on_the_reduced_model():
    small = make_model("tcbg_small", params=PARAMS)
    assert antimorphism_residual(small, 0.83 - 0.41j) < 1e-12


def test_order_reversal_on_full_model_is_first_order_in_spacing():
    resids = []
    for sites in (8, 16):
        lat = LatticeParams(length=1.0, sites=sites, kappa=1.0, cutoff=2)
        resids.append(antimorphism_residual(make_model("tcbg_full", params=lat),
                                            0.83 - 0.41j))
    assert resids[0] > resids[1]
    assert 1.5 < resids[0] / resids[1] < 2.6


@pytest.mark.parametrize("kind", ["tcbg_full", "tcbg_small", "gl2_full",
                                  "gl2_small"])
def test_vacuum_exchange_identity(kind):
    model = make_model(kind, params=PARAMS)
    resid, scale = vacuum_exchange_residual(model, 0.6 + 0.8j, -1.1 + 0.3j)
    assert resid < 1e-12
    if kind.startswith("gl2"):
        # the reduced chains have a genuinely nonconstant first ratio
        assert scale > 1e-8
    else:
        # both sides collapse to (r1(u) - r1(v)) |0>, which is zero here
        assert scale < 1e-12


def test_zero_mode_trace_and_bilinear_identities():
    model = _full()
    modes = zero_modes_exact(model)
    trace = modes.t_block[0][0] + modes.t_block[1][1] + modes.t33
    assert trace.norm() < 1e-12
    basis, delta = model.basis, PARAMS.delta
    for i in range(2):
        for j in range(2):
            bilinear = None
            for n in range(1, PARAMS.sites + 1):
                term = creator(basis, i + 1, n, delta) @ annihilator(
                    basis, j + 1, n, delta)
                bilinear = term if bilinear is None else bilinear + term
            diff = modes.t_block[i][j] + bilinear * delta
            assert diff.norm() < 1e-12
    dens = None
    for n in range(1, PARAMS.sites + 1):
        term = density(basis, n, delta)
        dens = term if dens is None else dens + term
    assert (modes.t33 - dens * delta).norm() < 1e-12


def test_zero_modes_require_the_full_normalization():
    with pytest.raises(StructureError):
        zero_modes_exact(make_model("tcbg_small", params=PARAMS))


def test_zero_mode_raising_entries_annihilate_on_shell_vector():
    lat = LatticeParams(length=1.0, sites=4, kappa=1.0, cutoff=3)
    model = make_model("tcbg_full", params=lat)
    p = BetheParams((-0.5j,), (8.0, -8.0), lat.c)
    state = bv_tcbg(model, p)
    assert state.norm() > 1e-8
    modes = zero_modes_exact(model)
    for entry in (modes.t_block[0][1], modes.t_block[1][0]):
        assert np.linalg.norm(entry.apply(state.amplitudes)) < 1e-12 * state.norm()


def test_sigma_schedule_bounds():
    model = _full()
    sched = default_sigma_schedule(model)
    assert len(sched) == 7
    assert all(0.0 < s * PARAMS.delta < 2.0 for s in sched)
    with pytest.raises(ValueError):
        default_sigma_schedule(model, points=3)


def test_windowed_estimates_converge_toward_exact_modes():
    lat = LatticeParams(length=1.0, sites=3, kappa=1.0, cutoff=2)
    model = make_model("tcbg_full", params=lat)
    windowed = zero_modes_windowed(model)
    assert windowed.converged
    assert windowed.estimates
    for est in windowed.estimates.values():
        assert np.isfinite(est.residual)
        assert est.error >= 0.0


def test_windowed_vector_validates_arguments():
    model = _full()
    vec = np.zeros(model.basis.dim, dtype=complex)
    vec[model.basis.vacuum_index()] = 1.0
    with pytest.raises(ValueError):
        windowed_mode_vector(model, "diagonal", 1, "left", vec)
    with pytest.raises(ValueError):
        windowed_mode_vector(model, "row", 1, "up", vec)
    with pytest.raises(ValueError):
        windowed_mode_vector(model, "row", 3, "left", vec)


def test_windowed_vector_rejects_out_of_window_rates():
    model = _full()
    vec = np.zeros(model.basis.dim, dtype=complex)
    vec[model.basis.vacuum_index()] = 1.0
    bad = tuple(2.5 / PARAMS.delta * (1 + 0.1 * k) for k in range(4))
    with pytest.raises(PoleError):
        windowed_mode_vector(model, "row", 1, "left", vec, sigmas=bad)


def test_local_operator_extraction_recovers_site_operators():
    lat = LatticeParams(length=1.0, sites=3, kappa=1.0, cutoff=2)
    model = make_model("tcbg_full", params=lat)
    extraction = local_operator_extraction(model, 2)
    assert extraction.site == 2
    records = [extraction.block[i][j] for i in range(2) for j in range(2)]
    records.append(extraction.density)
    for record in records:
        assert record.residual < 1e-12
    with pytest.raises(ValueError):
        local_operator_extraction(model, 0)
    with pytest.raises(ValueError):
        local_operator_extraction(model, lat.sites)
