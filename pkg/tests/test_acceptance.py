"""End-to-end acceptance gate: ten numbered criteria, one summary line each.

Each test prints exactly one ``[PASS]``/``[FAIL]`` line with the measured
numbers, then asserts.  Criteria with stated wall-clock budgets measure and
enforce them; the final criterion also enforces the file-wide budget.
"""

import time

import numpy as np

from bethelab import (BetheParams, BetheSystem, LatticeParams, antimorphism_residual,
                      block_sums, bv_gl2, bv_gl3, bv_tcbg, certify_onshell,
                      composite_residual, lattice_coordinate_bv, make_model,
                      omega_coeffs, series_term, solve_bethe, spin_amplitude_map,
                      vacuum_exchange_residual, vacuum_phase, windowed_mode_vector,
                      zero_modes_exact, SplitSpec)
from bethelab.cli import (RunConfig, _fit_order, _scan_amplitude,
                          _scan_coordinate, _scan_phase_power)
from bethelab.fock import annihilator, creator, density
from bethelab.structfun import (rtt_residual, unitarity_residual,
                                yang_baxter_residual)

_T0 = time.monotonic()


def _report(num: int, label: str, ok: bool, detail: str) -> None:
    tag = "PASS" if ok else "FAIL"
    print(f"[{tag}] criterion-{num:02d} {label}: {detail}")
    assert ok, f"criterion-{num:02d} {label}: {detail}"


def _rand_complex(rng, n):
    return rng.normal(size=n) + 1j * rng.normal(size=n)


# ---------------------------------------------------------------------------
# 1. R-matrix identities
# ---------------------------------------------------------------------------

def test_criterion_01_r_matrix_identities():
    rng = np.random.default_rng(101)
    worst_ybe = 0.0
    for k in range(100):
        d = 3 if k % 2 == 0 else 2
        x, y, z = _rand_complex(rng, 3)
        c = complex(_rand_complex(rng, 1)[0])
        worst_ybe = max(worst_ybe, yang_baxter_residual(x, y, z, c, d=d))
    worst_uni = 0.0
    for k in range(100):
        d = 3 if k % 2 == 0 else 2
        x, y = _rand_complex(rng, 2)
        c = complex(_rand_complex(rng, 1)[0])
        worst_uni = max(worst_uni, unitarity_residual(x, y, c, d=d))
    ok = worst_ybe < 1e-12 and worst_uni < 1e-12
    _report(1, "r-matrix identities", ok,
            f"100 triples, max YBE {worst_ybe:.2e} and max unitarity "
            f"{worst_uni:.2e} (tol 1e-12)")


# ---------------------------------------------------------------------------
# 2. exchange relations for every model kind
# ---------------------------------------------------------------------------

def test_criterion_02_exchange_relations():
    start = time.monotonic()
    rng = np.random.default_rng(102)
    lat = LatticeParams(length=1.0, sites=3, kappa=1.3, cutoff=3)
    models = [
        ("lattice gas", make_model("tcbg_full", params=lat), lat.cutoff - 2),
        ("shifted-argument twin",
         make_model("discrete_boson", sites=3, cutoff=3,
                    shift=4.0 / (lat.kappa * lat.delta)), lat.cutoff - 2),
        ("one-component reduction",
         make_model("gl2_full", params=lat), lat.cutoff - 2),
        ("spin chain",
         make_model("xxx_chain", sites=4, c=0.9 - 0.4j,
                    inhomogeneities=tuple(_rand_complex(rng, 4))), None),
    ]
    assert models[1][1].c == -1.0  # the twin's coupling is exactly -1
    worst = 0.0
    for _, model, sector in models:
        for _ in range(20):
            u, v = _rand_complex(rng, 2)
            worst = max(worst, rtt_residual(model.monodromy, u, v, model.c,
                                            sector=sector))
    elapsed = time.monotonic() - start
    ok = worst < 1e-10 and elapsed < 60.0
    _report(2, "exchange relations", ok,
            f"4 model kinds x 20 argument pairs, max residual {worst:.2e} "
            f"(tol 1e-10) in {elapsed:.1f}s (budget 60s)")


# ---------------------------------------------------------------------------
# 3. vacuum structure
# ---------------------------------------------------------------------------

def test_criterion_03_vacuum_structure():
    lat = LatticeParams(length=1.0, sites=3, kappa=1.3, cutoff=3)

    def build(kind):
        if kind == "discrete_boson":
            return make_model(kind, sites=3, cutoff=3,
                              shift=4.0 / (lat.kappa * lat.delta))
        if kind == "xxx_chain":
            return make_model(kind, sites=3, c=0.9 - 0.4j,
                              inhomogeneities=(0.1, -0.3 + 0.2j, 0.45))
        return make_model(kind, params=lat)

    u, v = 0.63 - 0.27j, -1.1 + 0.3j
    worst_site = worst_mono = worst_exch = 0.0
    for kind in ("tcbg_full", "tcbg_small", "gl2_full", "gl2_small",
                 "discrete_boson", "xxx_chain"):
        model = build(kind)
        vac = model.vacuum()
        for n in range(1, model.n_sites + 1):
            lop = model.l_operator(n, u)
            for i in range(model.auxdim):
                for j in range(model.auxdim):
                    image = lop.entry(i, j).apply(vac)
                    if i > j:
                        worst_site = max(worst_site,
                                         float(np.linalg.norm(image)))
                    elif i == j:
                        eig = model.vacuum_eigenvalue(i, u, (n, n))
                        worst_site = max(worst_site, float(
                            np.linalg.norm(image - eig * vac)))
        for i in range(model.auxdim):
            for j in range(model.auxdim):
                image = model.entry_apply(u, i, j, vac)
                if i > j:
                    worst_mono = max(worst_mono,
                                     float(np.linalg.norm(image)))
                elif i == j:
                    eig = model.vacuum_eigenvalue(i, u)
                    worst_mono = max(worst_mono, float(
                        np.linalg.norm(image - eig * vac)))
        resid, _scale = vacuum_exchange_residual(model, u, v)
        worst_exch = max(worst_exch, resid)
    ok = worst_site < 1e-12 and worst_mono < 1e-12 and worst_exch < 1e-12
    _report(3, "vacuum structure", ok,
            f"6 model kinds: site-level {worst_site:.2e}, chain-level "
            f"{worst_mono:.2e}, exchange identity {worst_exch:.2e} (tol 1e-12)")


# ---------------------------------------------------------------------------
# 4. Bethe-vector constructions
# ---------------------------------------------------------------------------

def test_criterion_04_bethe_vectors():
    start = time.monotonic()
    lat = LatticeParams(length=1.0, sites=3, kappa=1.3, cutoff=3)
    model = make_model("tcbg_full", params=lat)
    us = (0.9 + 0.2j, -1.4 + 0.6j)
    vs = (1.7, -0.6 + 0.3j)

    worst_eq = 0.0
    for a in range(3):
        for b in range(a, 3):
            if b == 0:
                continue
            p = BetheParams(us[:a], vs[:b], lat.c)
            fast = bv_tcbg(model, p)
            full = bv_gl3(model, p)
            scale = max(full.norm(), 1.0)
            worst_eq = max(worst_eq, float(np.linalg.norm(
                fast.amplitudes - full.amplitudes)) / scale)

    # more inner than outer parameters: identically zero
    drop = BetheParams(us, vs[:1], lat.c)
    lowering = max(bv_tcbg(model, drop).norm(), bv_gl3(model, drop).norm())

    # explicit single-creation geometric profile
    v = 1.7 - 0.45j
    alpha = 1.0 - 0.5j * v * lat.delta
    pref = -1j * np.sqrt(lat.kappa * lat.delta) / alpha
    expected = np.zeros(model.basis.dim, dtype=complex)
    for n in range(1, lat.sites + 1):
        occ = [0] * model.basis.n_modes
        occ[model.basis.mode(2, n)] = 1
        expected[model.basis.state_index(tuple(occ))] = \
            pref * vacuum_phase(v, lat.delta) ** (n - 1)
    got = bv_tcbg(model, BetheParams((), (v,), lat.c))
    explicit = float(np.linalg.norm(got.amplitudes - expected))

    # spin-chain amplitudes against the symmetrized rational formula
    rng = np.random.default_rng(104)
    sites = 6
    c_spin = 0.9 - 0.4j
    xis = tuple(_rand_complex(rng, sites))
    chain = make_model("xxx_chain", sites=sites, c=c_spin, inhomogeneities=xis)
    worst_spin = 0.0
    pool = (0.35 + 0.7j, -0.8 - 0.15j, 1.2 + 0.05j)
    for a in (1, 2, 3):
        u_set = pool[:a]
        state = spin_amplitude_map(bv_gl2(chain, u_set))
        formula = omega_coeffs(u_set, xis, c_spin, sites=sites)
        worst_spin = max(worst_spin, state.max_diff(formula))

    elapsed = time.monotonic() - start
    ok = (worst_eq < 1e-12 and lowering == 0.0 and explicit < 1e-12
          and worst_spin < 1e-12 and elapsed < 120.0)
    _report(4, "nested vectors", ok,
            f"two constructions agree to {worst_eq:.2e}, unbalanced sector "
            f"norm {lowering:.1e}, explicit profile {explicit:.2e}, spin "
            f"amplitudes {worst_spin:.2e} (tol 1e-12) in {elapsed:.1f}s "
            f"(budget 120s)")


# ---------------------------------------------------------------------------
# 5. interval decomposition
# ---------------------------------------------------------------------------

def test_criterion_05_interval_decomposition():
    lat = LatticeParams(length=1.0, sites=4, kappa=1.3, cutoff=3)
    model = make_model("tcbg_full", params=lat)
    us = (0.9 + 0.2j, -1.4 + 0.6j)
    vs = (1.7, -0.6 + 0.3j)
    worst = 0.0
    for a in range(3):
        for b in range(max(a, 1), 3):
            p = BetheParams(us[:a], vs[:b], lat.c)
            for cut in range(1, lat.sites):
                worst = max(worst, composite_residual(model, SplitSpec((cut,)), p))

    rng = np.random.default_rng(105)
    chain = make_model("xxx_chain", sites=4, c=0.9 - 0.4j,
                       inhomogeneities=tuple(_rand_complex(rng, 4)))
    for b in (1, 2):
        p = BetheParams((), (0.35 + 0.7j, -0.8 - 0.15j)[:b], chain.c)
        for cut in range(1, 4):
            worst = max(worst, composite_residual(chain, SplitSpec((cut,)), p))

    p3 = BetheParams(us[:1], vs, lat.c)
    three = composite_residual(model, SplitSpec((1, 3)), p3)
    chain_p = BetheParams((), (0.35 + 0.7j, -0.8 - 0.15j), chain.c)
    three = max(three, composite_residual(chain, SplitSpec((1, 3)), chain_p))
    ok = worst < 1e-10 and three < 1e-10
    _report(5, "interval decomposition", ok,
            f"all single cuts {worst:.2e}, three intervals {three:.2e} "
            f"(tol 1e-10)")


# ---------------------------------------------------------------------------
# 6. on-shell certification
# ---------------------------------------------------------------------------

def test_criterion_06_onshell_certification():
    lat = LatticeParams(length=1.0, sites=4, kappa=1.0, cutoff=3)
    model = make_model("tcbg_full", params=lat)
    probes = (0.3 + 0.4j, -0.9 + 0.2j)
    seeds = {
        (0, 1): BetheParams((), (7.5,), lat.c),
        (0, 2): BetheParams((), (7.5, -7.5), lat.c),
        (1, 2): BetheParams((-0.45j + 0.02,), (7.8, -8.2), lat.c),
    }
    worst_cert = 0.0
    roots = {}
    for (a, b), initial in seeds.items():
        system = BetheSystem.tcbg_lattice(a, b, lat)
        rep = solve_bethe(system, initial)
        assert rep.converged and rep.residual_inf < 1e-10, (a, b)
        roots[(a, b)] = BetheParams(rep.u_roots, rep.v_roots, lat.c)
        worst_cert = max(worst_cert,
                         certify_onshell(model, roots[(a, b)], probes))

    best_off = np.inf
    for key in ((0, 2), (1, 2)):
        p = roots[key]
        moved = BetheParams(p.u_set, (p.v_set[0] + 0.1,) + p.v_set[1:], lat.c)
        best_off = min(best_off, certify_onshell(model, moved, probes))

    rng = np.random.default_rng(106)
    mask = model.basis.sector_mask(lat.cutoff - 2)
    vec = np.zeros(model.basis.dim, dtype=complex)
    vec[mask] = _rand_complex(rng, int(mask.sum()))
    vec /= np.linalg.norm(vec)
    w1, w2 = 0.8 + 0.3j, -0.5 + 0.6j
    forward = model.trace_apply(w2, model.trace_apply(w1, vec))
    backward = model.trace_apply(w1, model.trace_apply(w2, vec))
    scale = max(float(np.linalg.norm(forward)), 1.0)
    commut = float(np.linalg.norm(forward - backward)) / scale

    ok = worst_cert < 1e-10 and best_off > 1e-3 and commut < 1e-10
    _report(6, "on-shell certification", ok,
            f"three solved sectors certify to {worst_cert:.2e} (tol 1e-10), "
            f"off-shell defect {best_off:.2e} (floor 1e-3), transfer "
            f"commutator {commut:.2e} (tol 1e-10)")


# ---------------------------------------------------------------------------
# 7. strong-coupling series
# ---------------------------------------------------------------------------

def test_criterion_07_series_expansion():
    lat = LatticeParams(length=1.0, sites=4, kappa=1.3, cutoff=3)
    small = make_model("tcbg_small", params=lat)
    rng = np.random.default_rng(107)
    worst_sum = 0.0
    for u in _rand_complex(rng, 5):
        target = small.monodromy(u) * (1.0 / small.vacuum_eigenvalue(0, u))
        acc = None
        for n in range(lat.sites + 1):
            piece = series_term(small, u, n).term * lat.kappa ** (n / 2.0)
            acc = piece if acc is None else acc + piece
        worst_sum = max(worst_sum, (acc - target).max_block_norm())

    u0 = 0.9 + 0.3j
    worst_parity = 0.0
    for order in (1, 3):
        term = series_term(small, u0, order).term
        worst_parity = max(worst_parity,
                           max(term.entry(i, j).norm()
                               for i in range(2) for j in range(2)),
                           term.entry(2, 2).norm())
    for order in (2, 4):
        term = series_term(small, u0, order).term
        worst_parity = max(worst_parity,
                           max(term.entry(i, 2).norm() for i in range(2)),
                           max(term.entry(2, j).norm() for j in range(2)))

    worst_block = 0.0
    bound = lat.cutoff - 1
    for ell in (1, 2):
        color, last = block_sums(small, u0, ell)
        ref = series_term(small, u0, 2 * ell).term
        for i in range(2):
            for j in range(2):
                worst_block = max(worst_block, (color[i][j] - ref.entry(i, j)
                                                ).norm(col_bound=bound))
        worst_block = max(worst_block,
                          (last - ref.entry(2, 2)).norm(col_bound=bound))

    beyond = series_term(small, u0, lat.sites + 1).term.max_block_norm()
    ok = (worst_sum < 1e-12 and worst_parity < 1e-14 and worst_block < 1e-12
          and beyond == 0.0)
    _report(7, "series expansion", ok,
            f"5 points sum to {worst_sum:.2e} (tol 1e-12), parity "
            f"{worst_parity:.1e} (tol 1e-14), block sums {worst_block:.2e} "
            f"(tol 1e-12), beyond-sites {beyond:.1e}")


# ---------------------------------------------------------------------------
# 8. order reversal
# ---------------------------------------------------------------------------

def test_criterion_08_order_reversal():
    lat = LatticeParams(length=1.0, sites=3, kappa=1.3, cutoff=3)
    small = make_model("tcbg_small", params=lat)
    rng = np.random.default_rng(108)
    u = complex(_rand_complex(rng, 1)[0])
    exact = antimorphism_residual(small, u)

    resids, spacings = [], []
    for sites in (8, 16, 32):
        scan = LatticeParams(length=2.0, sites=sites, kappa=1.3, cutoff=2)
        resids.append(antimorphism_residual(make_model("tcbg_full", params=scan),
                                            0.83 - 0.41j))
        spacings.append(scan.delta)
    order = _fit_order(spacings, resids)
    ok = exact < 1e-12 and order is not None and order >= 0.9
    _report(8, "order reversal", ok,
            f"reduced model exact to {exact:.2e} (tol 1e-12); full model "
            f"residuals {[f'{r:.3f}' for r in resids]} fit order "
            f"{order if order is None else round(order, 3)} (floor 0.9)")


# ---------------------------------------------------------------------------
# 9. zero modes
# ---------------------------------------------------------------------------

def test_criterion_09_zero_modes():
    lat = LatticeParams(length=1.0, sites=3, kappa=1.3, cutoff=3)
    model = make_model("tcbg_full", params=lat)
    modes = zero_modes_exact(model)
    trace = (modes.t_block[0][0] + modes.t_block[1][1] + modes.t33).norm()

    # raising-mode annihilation of an on-shell state
    lat4 = LatticeParams(length=1.0, sites=4, kappa=1.0, cutoff=3)
    full4 = make_model("tcbg_full", params=lat4)
    p = BetheParams((-0.5j,), (8.0, -8.0), lat4.c)
    state = bv_tcbg(full4, p)
    modes4 = zero_modes_exact(full4)
    annih = max(
        float(np.linalg.norm(modes4.t_block[0][1].apply(state.amplitudes))),
        float(np.linalg.norm(modes4.t_block[1][0].apply(state.amplitudes))),
    ) / state.norm()

    # lattice bilinear match is exact by construction at finite spacing
    worst_match = 0.0
    for i in range(2):
        for j in range(2):
            bilinear = None
            for n in range(1, lat.sites + 1):
                term = creator(model.basis, i + 1, n, lat.delta) @ annihilator(
                    model.basis, j + 1, n, lat.delta)
                bilinear = term if bilinear is None else bilinear + term
            worst_match = max(worst_match,
                              (modes.t_block[i][j] + bilinear * lat.delta).norm())
    dens = None
    for n in range(1, lat.sites + 1):
        term = density(model.basis, n, lat.delta)
        dens = term if dens is None else dens + term
    worst_match = max(worst_match, (modes.t33 - dens * lat.delta).norm())

    # windowed combined annihilation halves with the spacing
    window = []
    for sites in (12, 24, 48):
        scan = LatticeParams(length=4.0, sites=sites, kappa=1.3, cutoff=2)
        mod = make_model("tcbg_full", params=scan)
        momentum = (2.0 / scan.delta) * np.tan(np.pi / sites)
        bp = BetheParams((), (momentum,), scan.c)
        vec = bv_tcbg(mod, bp)
        left, _ = windowed_mode_vector(mod, "row", 2, "left", vec.amplitudes)
        right, _ = windowed_mode_vector(mod, "row", 2, "right", vec.amplitudes)
        window.append(float(np.linalg.norm(left + right)) / vec.norm())
    steps = [window[k] / window[k + 1] for k in range(2)]
    halves = all(1.4 <= s <= 3.0 for s in steps)

    ok = (trace < 1e-12 and annih < 1e-8 and worst_match < 1e-12 and halves)
    _report(9, "zero modes", ok,
            f"trace identity {trace:.2e} (tol 1e-12), on-shell annihilation "
            f"{annih:.1e} (tol 1e-8), bilinear match {worst_match:.2e} "
            f"exact (degenerate, tol 1e-12), windowed combination "
            f"{[f'{w:.3f}' for w in window]} halving ratios "
            f"{[f'{s:.2f}' for s in steps]} in [1.4, 3.0]")


# ---------------------------------------------------------------------------
# 10. continuum-limit scans
# ---------------------------------------------------------------------------

def test_criterion_10_continuum_scans():
    config = RunConfig(model="tcbg_full", length=1.0, kappa=1.0,
                       scan_sites=(8, 16, 32))
    spacings = [config.length / n for n in config.scan_sites]
    results = {
        "phase-power": (_scan_phase_power(config, spacings), 2.0),
        "coordinate-vs-algebraic": (_scan_coordinate(config, spacings), 1.0),
        "continuum-amplitude": (_scan_amplitude(config, spacings), 1.0),
    }
    details, ok = [], True
    for name, (resids, expected) in results.items():
        order = _fit_order(spacings, resids)
        good = order is not None and abs(order - expected) <= 0.2
        ok = ok and good
        shown = "none" if order is None else f"{order:.3f}"
        details.append(f"{name} order {shown} (expect {expected}+-0.2)")
    elapsed = time.monotonic() - _T0
    ok = ok and elapsed < 300.0
    _report(10, "continuum scans", ok,
            "; ".join(details) + f"; file runtime {elapsed:.0f}s (budget 300s)")
