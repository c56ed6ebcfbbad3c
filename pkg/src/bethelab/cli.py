"""Command-line workbench: verification suites, convergence scans, Bethe-root
searches, and zero-mode studies, reported as JSON + CSV with optional figures.

Subcommands
-----------
verify      identity suites at the configured desk scale
scan        lattice-refinement scans with fitted convergence orders
solve       grid-seeded Newton root search with on-shell certification
zero-modes  exact zero modes, windowed boundary modes, local extraction

Every command reads one JSON config file (``--config``) plus repeatable
``--set key=value`` overrides; values are parsed as JSON when possible and
dotted keys reach into nested tables.  Reports carry schema version 1 and
the JSON is byte-stable for a fixed config apart from wall-time fields.
The worker count resolves from the config, then ``BETHELAB_WORKERS``, then
the available parallelism.  The exit status is nonzero exactly when a
check failed or a fatal error occurred; an unconverged root search is a
recorded outcome, not a failure.

Model-specific suites (series, antimorphism, zero modes) always build the
lattice models they concern from the configured geometry; the generic
suites (rtt, vacuum, bethe-vectors, composite) exercise the configured
model kind.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import math
import os
import platform
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import matplotlib
import numpy as np
import scipy

from . import plots
from .asymptotics import (antimorphism_residual, block_sums,
                          local_operator_extraction, series_term,
                          vacuum_exchange_residual, windowed_mode_vector,
                          zero_modes_exact, zero_modes_windowed)
from .bethe import (BetheParams, bv_gl2, bv_gl3, bv_tcbg, chi_wavefunction,
                    lattice_coordinate_bv, omega_coeffs, spin_amplitude_map)
from .composite import SplitSpec, composite_residual
from .errors import (CapacityError, CollisionError, PoleError, SectorError,
                     SingularJacobianError, StructureError)
from .fock import LatticeParams, annihilator, creator, density
from .models import (ModelKind, make_model, vacuum_phase_power_error)
from .solver import (BetheSystem, SolveConfig, certify_onshell, dedupe_roots,
                     solve_bethe)
from .structfun import (rtt_residual, unitarity_residual,
                        yang_baxter_residual)

SCHEMA_VERSION = 1

SUITES = ("ybe", "rtt", "vacuum", "bethe-vectors", "composite", "series",
          "antimorphism", "zero-modes")

SCANS = ("phase-power", "coordinate-vs-algebraic", "continuum-amplitude",
         "order-reversal")

# expected convergence order and allowed deviation per scan
_SCAN_BANDS = {
    "phase-power": (2.0, 0.2),
    "coordinate-vs-algebraic": (1.0, 0.2),
    "continuum-amplitude": (1.0, 0.2),
    "order-reversal": (1.0, 0.2),
}

_FOCK_KINDS = (ModelKind.TCBG_FULL, ModelKind.TCBG_SMALL, ModelKind.GL2_FULL,
               ModelKind.GL2_SMALL, ModelKind.DISCRETE_BOSON)

_EXPECTED_ERRORS = (CapacityError, CollisionError, PoleError, SectorError,
                    SingularJacobianError, StructureError,
                    ValueError, ZeroDivisionError, np.linalg.LinAlgError)


class ConfigError(ValueError):
    """The run configuration is malformed or inconsistent."""


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


@dataclass
class RunConfig:
    """One self-contained run description, JSON-compatible throughout."""

    model: str = "tcbg_full"
    sites: int = 3
    length: float = 1.0
    kappa: float = 1.0
    cutoff: int = 3
    sector: tuple[int, int] = (1, 1)
    seed: int = 7
    suites: tuple[str, ...] = SUITES
    scan_sites: tuple[int, ...] = (8, 16, 32)
    tolerances: dict = field(default_factory=dict)
    workers: int | None = None
    out_dir: str = "."
    figures: bool = True

    def __post_init__(self):
        try:
            ModelKind(self.model)
        except ValueError:
            raise ConfigError(f"unknown model kind {self.model!r}") from None
        if self.sites < 1:
            raise ConfigError("sites must be at least 1")
        if self.length <= 0 or self.kappa <= 0:
            raise ConfigError("length and kappa must be positive")
        if self.cutoff < 1:
            raise ConfigError("cutoff must be at least 1")
        self.sector = tuple(int(x) for x in self.sector)
        if len(self.sector) != 2 or any(x < 0 for x in self.sector):
            raise ConfigError("sector must be two nonnegative integers")
        self.suites = tuple(str(s) for s in self.suites)
        unknown = [s for s in self.suites if s not in SUITES]
        if unknown:
            raise ConfigError(f"unknown suites {unknown}; choose from {SUITES}")
        self.scan_sites = tuple(int(n) for n in self.scan_sites)
        if len(self.scan_sites) < 3:
            raise ConfigError("scan_sites needs at least three entries")
        if any(b <= a for a, b in zip(self.scan_sites, self.scan_sites[1:])) \
                or self.scan_sites[0] < 1:
            raise ConfigError("scan_sites must be strictly increasing and positive")
        if not isinstance(self.tolerances, dict):
            raise ConfigError("tolerances must be a table of name -> number")
        self.tolerances = {str(k): float(v) for k, v in self.tolerances.items()}
        if self.workers is not None:
            self.workers = int(self.workers)
            if self.workers < 1:
                raise ConfigError("workers must be at least 1")
        self.seed = int(self.seed)
        self.figures = bool(self.figures)

    def lattice_params(self) -> LatticeParams:
        return LatticeParams(length=self.length, sites=self.sites,
                             kappa=self.kappa, cutoff=self.cutoff)

    def tolerance(self, name: str, default: float) -> float:
        return float(self.tolerances.get(name, default))


def _parse_set_value(raw: str):
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def _apply_overrides(data: dict, assignments) -> dict:
    for item in assignments:
        key, sep, raw = item.partition("=")
        if not sep or not key:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        node = data
        parts = key.split(".")
        for part in parts[:-1]:
            nxt = node.setdefault(part, {})
            if not isinstance(nxt, dict):
                raise ConfigError(f"cannot descend into {part!r} in {key!r}")
            node = nxt
        node[parts[-1]] = _parse_set_value(raw)
    return data


def load_run_config(path: str | None, assignments=()) -> RunConfig:
    data: dict = {}
    if path:
        with open(path, encoding="utf-8") as handle:
            data = json.load(handle)
        if not isinstance(data, dict):
            raise ConfigError("the config file must hold one JSON object")
    data = _apply_overrides(dict(data), assignments or ())
    known = set(RunConfig.__dataclass_fields__)
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown configuration keys {unknown}")
    return RunConfig(**data)


def resolve_workers(config: RunConfig) -> int:
    if config.workers is not None:
        return config.workers
    env = os.environ.get("BETHELAB_WORKERS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ConfigError(f"BETHELAB_WORKERS must be an integer, got {env!r}") \
                from None
        if n < 1:
            raise ConfigError("BETHELAB_WORKERS must be at least 1")
        return n
    return os.cpu_count() or 1


# ---------------------------------------------------------------------------
# records and reports
# ---------------------------------------------------------------------------


def _jsonable(value):
    if value is None or isinstance(value, (bool, int, str)):
        return value
    if isinstance(value, complex):
        return [float(value.real), float(value.imag)]
    if isinstance(value, (float, np.floating)):
        return float(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return str(value)


def make_record(check: str, name: str, *, residual=None, tolerance=None,
                value=None, param: str = "", order=None, passed=None,
                seconds: float = 0.0) -> dict:
    if passed is None:
        passed = True
        if residual is not None and tolerance is not None:
            passed = bool(float(residual) <= float(tolerance))
    return {
        "check": check,
        "name": name,
        "param": param,
        "value": _jsonable(value),
        "residual": _jsonable(residual),
        "order": _jsonable(order),
        "tolerance": _jsonable(tolerance),
        "passed": bool(passed),
        "wall_time": round(float(seconds), 6),
    }


def _environment_stamp(workers: int) -> dict:
    return {
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "matplotlib": matplotlib.__version__,
        "platform": platform.platform(),
        "package": _package_version(),
        "workers": workers,
    }


def _package_version() -> str:
    from . import __version__
    return __version__


def build_report(command: str, config: RunConfig, records, workers: int,
                 extra: dict | None = None) -> dict:
    report = {
        "schema": SCHEMA_VERSION,
        "command": command,
        "config": _jsonable_config(config),
        "environment": _environment_stamp(workers),
        "checks": records,
        "passed": all(r["passed"] for r in records),
    }
    if extra:
        report.update(extra)
    return report


def _jsonable_config(config: RunConfig) -> dict:
    data = asdict(config)
    data["sector"] = list(config.sector)
    data["suites"] = list(config.suites)
    data["scan_sites"] = list(config.scan_sites)
    return data


CSV_COLUMNS = ("check", "name", "param", "value", "residual", "order")


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, list):
        return json.dumps(value)
    return str(value)


def write_outputs(report: dict, rows, config: RunConfig, command: str) -> dict:
    """Write the JSON and CSV reports (and figures) and return their paths."""
    stem = command.replace("-", "_")
    os.makedirs(config.out_dir, exist_ok=True)
    csv_path = os.path.join(config.out_dir, f"{stem}_report.csv")
    with open(csv_path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow([_csv_cell(row.get(col)) for col in CSV_COLUMNS])
    figures = []
    if config.figures:
        figures = _render_figures(report, rows, config, command, stem)
    report["outputs"] = {"csv": csv_path, "figures": figures}
    json_path = os.path.join(config.out_dir, f"{stem}_report.json")
    report["outputs"]["json"] = json_path
    with open(json_path, "w", encoding="utf-8") as handle:
        json.dump(report, handle, indent=2, sort_keys=True)
        handle.write("\n")
    return report["outputs"]


def _render_figures(report, rows, config, command, stem) -> list:
    figures = []
    if command == "scan":
        curves = {}
        for rec in report["checks"]:
            name = rec["name"]
            samples = [r for r in rows if r["name"] == name and r["param"] != "fit"]
            spacings = [float(r["value"]) for r in samples]
            residuals = [float(r["residual"]) for r in samples]
            curves[name] = (spacings, residuals, rec["order"])
        path = plots.save_convergence_chart(
            curves, os.path.join(config.out_dir, f"{stem}_convergence.png"),
            "lattice-refinement scans")
        if path:
            figures.append(path)
    elif command == "solve":
        path = plots.save_roots_chart(
            report.get("roots", []),
            os.path.join(config.out_dir, f"{stem}_roots.png"),
            "Bethe-root constellations")
        if path:
            figures.append(path)
    else:
        path = plots.save_residual_chart(
            report["checks"],
            os.path.join(config.out_dir, f"{stem}_residuals.png"),
            f"{command}: residuals against tolerances")
        if path:
            figures.append(path)
    return figures


# ---------------------------------------------------------------------------
# model construction shared by suites
# ---------------------------------------------------------------------------


def build_model(config: RunConfig):
    """The configured model kind at the configured geometry."""
    kind = ModelKind(config.model)
    params = config.lattice_params()
    if kind in (ModelKind.TCBG_FULL, ModelKind.TCBG_SMALL,
                ModelKind.GL2_FULL, ModelKind.GL2_SMALL):
        return make_model(kind, params=params)
    if kind == ModelKind.DISCRETE_BOSON:
        return make_model(kind, sites=config.sites, cutoff=config.cutoff,
                          shift=4.0 / (config.kappa * params.delta))
    return make_model(kind, sites=config.sites, c=-1j * config.kappa)


def _rng(config: RunConfig, salt: int) -> np.random.Generator:
    return np.random.default_rng([config.seed, salt])


def _points(rng, count: int):
    return [complex(*rng.normal(size=2)) for _ in range(count)]


def _seeded_bethe_params(rng, a: int, b: int, c: complex) -> BetheParams:
    return BetheParams(tuple(_points(rng, a)), tuple(_points(rng, b)), c)


# ---------------------------------------------------------------------------
# verify suites
# ---------------------------------------------------------------------------


def _suite_ybe(config: RunConfig, r_fn=None):
    rng = _rng(config, 101)
    c = -1j * config.kappa
    t0 = time.perf_counter()
    worst = 0.0
    for k in range(100):
        d = 3 if k % 2 == 0 else 2
        x, y, z = _points(rng, 3)
        worst = max(worst, yang_baxter_residual(x, y, z, c, d, r_fn=r_fn))
    records = [make_record(
        "ybe", "yang-baxter", param="triples=100,d=2|3", residual=worst,
        tolerance=config.tolerance("yang-baxter", 1e-12),
        seconds=time.perf_counter() - t0)]
    t0 = time.perf_counter()
    worst = 0.0
    for k in range(40):
        d = 3 if k % 2 == 0 else 2
        x, y = _points(rng, 2)
        worst = max(worst, unitarity_residual(x, y, c, d, r_fn=r_fn))
    records.append(make_record(
        "ybe", "unitarity", param="pairs=40,d=2|3", residual=worst,
        tolerance=config.tolerance("unitarity", 1e-12),
        seconds=time.perf_counter() - t0))
    return records


def _safe_sector(model, depth: int = 2) -> int | None:
    """Column sector on which identities with ``depth`` stacked monodromies
    are free of truncation artifacts (None for uncapped bases)."""
    cutoff = getattr(model.basis, "cutoff", None)
    if cutoff is None:
        return None
    return max(cutoff - depth, 0)


def _suite_rtt(config: RunConfig):
    rng = _rng(config, 102)
    model = build_model(config)
    sector = _safe_sector(model, depth=2)
    t0 = time.perf_counter()
    worst = 0.0
    pairs = 5
    for _ in range(pairs):
        u, v = _points(rng, 2)
        worst = max(worst, rtt_residual(model.monodromy, u, v, model.c, sector))
    return [make_record(
        "rtt", "exchange-relations",
        param=f"model={config.model},pairs={pairs},sector={sector}",
        residual=worst, tolerance=config.tolerance("exchange-relations", 1e-10),
        seconds=time.perf_counter() - t0)]


def _suite_vacuum(config: RunConfig):
    rng = _rng(config, 103)
    model = build_model(config)
    u = complex(*rng.normal(size=2))
    vac = model.vacuum()
    out = []

    t0 = time.perf_counter()
    worst = 0.0
    for n in range(1, model.n_sites + 1):
        lop = model.l_operator(n, u)
        for i in range(model.auxdim):
            for j in range(model.auxdim):
                image = lop.entry(i, j).apply(vac)
                if i > j:
                    worst = max(worst, float(np.linalg.norm(image)))
                elif i == j:
                    eig = model.vacuum_eigenvalue(i, u, (n, n))
                    worst = max(worst, float(np.linalg.norm(image - eig * vac)))
    out.append(make_record(
        "vacuum", "site-triangularity", param=f"sites={model.n_sites}",
        residual=worst, tolerance=config.tolerance("site-triangularity", 1e-12),
        seconds=time.perf_counter() - t0))

    t0 = time.perf_counter()
    worst_off, worst_diag = 0.0, 0.0
    for i in range(model.auxdim):
        for j in range(model.auxdim):
            image = model.entry_apply(u, i, j, vac)
            if i > j:
                worst_off = max(worst_off, float(np.linalg.norm(image)))
            elif i == j:
                eig = model.vacuum_eigenvalue(i, u)
                worst_diag = max(worst_diag,
                                 float(np.linalg.norm(image - eig * vac)))
    seconds = time.perf_counter() - t0
    out.append(make_record(
        "vacuum", "monodromy-triangularity", residual=worst_off,
        tolerance=config.tolerance("monodromy-triangularity", 1e-12),
        seconds=seconds))
    out.append(make_record(
        "vacuum", "vacuum-eigenvalues", residual=worst_diag,
        tolerance=config.tolerance("vacuum-eigenvalues", 1e-12),
        seconds=seconds))

    t0 = time.perf_counter()
    v = complex(*rng.normal(size=2))
    identity_resid, lhs_norm = vacuum_exchange_residual(model, u, v)
    out.append(make_record(
        "vacuum", "vacuum-exchange", residual=identity_resid,
        value=lhs_norm, param="value=lhs-norm",
        tolerance=config.tolerance("vacuum-exchange", 1e-12),
        seconds=time.perf_counter() - t0))
    return out


def _suite_bethe_vectors(config: RunConfig):
    rng = _rng(config, 104)
    model = build_model(config)
    a, b = config.sector
    out = []
    if model.auxdim == 3:
        t0 = time.perf_counter()
        bp = _seeded_bethe_params(rng, a, b, model.c)
        state = bv_tcbg(model, bp)
        explicit = bv_gl3(model, bp)
        scale = max(explicit.norm(), 1e-300)
        resid = float(np.linalg.norm(state.amplitudes - explicit.amplitudes)) / scale
        out.append(make_record(
            "bethe-vectors", "nested-vs-explicit", param=f"sector=({a},{b})",
            residual=resid, tolerance=config.tolerance("nested-vs-explicit", 1e-12),
            seconds=time.perf_counter() - t0))

        t0 = time.perf_counter()
        lowered = bv_gl3(model, _seeded_bethe_params(rng, b + 1, b, model.c))
        out.append(make_record(
            "bethe-vectors", "lowering-annihilation", param=f"sector=({b + 1},{b})",
            residual=lowered.norm(),
            tolerance=config.tolerance("lowering-annihilation", 0.0),
            seconds=time.perf_counter() - t0))

    t0 = time.perf_counter()
    c_spin = 0.9 - 0.4j
    spin_sites = min(max(config.sites, 3), 6)
    xis = tuple(complex(*rng.normal(size=2)) for _ in range(spin_sites))
    chain = make_model("xxx_chain", sites=spin_sites, c=c_spin,
                       inhomogeneities=xis)
    us = tuple(_points(rng, 2))
    amps = spin_amplitude_map(bv_gl2(chain, us))
    resid = amps.max_diff(omega_coeffs(us, xis, c_spin, sites=spin_sites))
    out.append(make_record(
        "bethe-vectors", "spin-amplitudes", param=f"sites={spin_sites},flips=2",
        residual=resid, tolerance=config.tolerance("spin-amplitudes", 1e-12),
        seconds=time.perf_counter() - t0))
    return out


def _suite_composite(config: RunConfig):
    rng = _rng(config, 105)
    model = build_model(config)
    a, b = config.sector
    if model.auxdim == 2:
        a = 0
    bp = _seeded_bethe_params(rng, a, b, model.c)
    out = []
    t0 = time.perf_counter()
    worst = 0.0
    for cut in range(1, model.n_sites):
        worst = max(worst, composite_residual(model, SplitSpec((cut,)), bp))
    out.append(make_record(
        "composite", "single-cut", param=f"cuts={model.n_sites - 1},sector=({a},{b})",
        residual=worst, tolerance=config.tolerance("single-cut", 1e-10),
        seconds=time.perf_counter() - t0))
    if model.n_sites >= 3:
        t0 = time.perf_counter()
        c1 = model.n_sites // 3 or 1
        c2 = max(2 * model.n_sites // 3, c1 + 1)
        resid = composite_residual(model, SplitSpec((c1, c2)), bp)
        out.append(make_record(
            "composite", "three-interval", param=f"cuts=({c1},{c2})",
            residual=resid, tolerance=config.tolerance("three-interval", 1e-10),
            seconds=time.perf_counter() - t0))
    return out


def _suite_series(config: RunConfig):
    rng = _rng(config, 106)
    params = config.lattice_params()
    small = make_model("tcbg_small", params=params)
    kappa = params.kappa
    nsites = small.n_sites
    col_bound = max(params.cutoff - 1, 0)
    out = []

    t0 = time.perf_counter()
    worst = 0.0
    for u in _points(rng, 2):
        acc = series_term(small, u, 0).term
        for n in range(1, nsites + 1):
            acc = acc + series_term(small, u, n).term * (kappa ** (0.5 * n))
        target = small.monodromy(u) * (1.0 / small.vacuum_eigenvalue(0, u))
        worst = max(worst, (acc - target).max_block_norm())
    out.append(make_record(
        "series", "power-sum", param=f"orders=0..{nsites}", residual=worst,
        tolerance=config.tolerance("power-sum", 1e-12),
        seconds=time.perf_counter() - t0))

    t0 = time.perf_counter()
    u = complex(*rng.normal(size=2))
    worst = 0.0
    for n in (1, 2):
        term = series_term(small, u, n).term
        for i in range(3):
            for j in range(3):
                in_corner = (i < 2 and j < 2) or (i == 2 and j == 2)
                wrong = in_corner if n % 2 else not in_corner
                if wrong:
                    worst = max(worst, term.entry(i, j).norm())
    out.append(make_record(
        "series", "parity", param="orders=1,2", residual=worst,
        tolerance=config.tolerance("parity", 1e-14),
        seconds=time.perf_counter() - t0))

    if nsites >= 2:
        t0 = time.perf_counter()
        color_block, last_entry = block_sums(small, u, 1)
        term = series_term(small, u, 2).term
        worst = 0.0
        for i in range(2):
            for j in range(2):
                diff = color_block[i][j] - term.entry(i, j)
                worst = max(worst, diff.norm(col_bound=col_bound))
        worst = max(worst, (last_entry - term.entry(2, 2)).norm(col_bound=col_bound))
        out.append(make_record(
            "series", "block-recomputation", param=f"order=2,sector<={col_bound}",
            residual=worst, tolerance=config.tolerance("block-recomputation", 1e-12),
            seconds=time.perf_counter() - t0))

    t0 = time.perf_counter()
    beyond = series_term(small, u, nsites + 1).term.max_block_norm()
    out.append(make_record(
        "series", "beyond-sites", param=f"order={nsites + 1}", residual=beyond,
        tolerance=config.tolerance("beyond-sites", 0.0),
        seconds=time.perf_counter() - t0))
    return out


def _suite_antimorphism(config: RunConfig):
    rng = _rng(config, 107)
    params = config.lattice_params()
    u = complex(*rng.normal(size=2))
    out = []
    t0 = time.perf_counter()
    small = make_model("tcbg_small", params=params)
    out.append(make_record(
        "antimorphism", "reversal-small", residual=antimorphism_residual(small, u),
        tolerance=config.tolerance("reversal-small", 1e-12),
        seconds=time.perf_counter() - t0))
    t0 = time.perf_counter()
    full = make_model("tcbg_full", params=params)
    bound = config.tolerance(
        "reversal-full", 10.0 * params.delta * max(1.0, params.kappa))
    out.append(make_record(
        "antimorphism", "reversal-full", residual=antimorphism_residual(full, u),
        param=f"delta={params.delta:.6g}", tolerance=bound,
        seconds=time.perf_counter() - t0))
    return out


def _suite_zero_modes(config: RunConfig):
    params = config.lattice_params()
    full = make_model("tcbg_full", params=params)
    basis = full.basis
    delta = params.delta
    modes = zero_modes_exact(full)
    out = []

    t0 = time.perf_counter()
    trace = modes.t_block[0][0] + modes.t_block[1][1] + modes.t33
    out.append(make_record(
        "zero-modes", "trace-identity", residual=trace.norm(),
        tolerance=config.tolerance("trace-identity", 1e-12),
        seconds=time.perf_counter() - t0))

    t0 = time.perf_counter()
    worst = 0.0
    for i in range(2):
        for j in range(2):
            total = None
            for n in range(1, full.n_sites + 1):
                term = creator(basis, i + 1, n, delta) @ annihilator(basis, j + 1, n, delta)
                total = term if total is None else total + term
            worst = max(worst, (modes.t_block[i][j] + delta * total).norm())
    out.append(make_record(
        "zero-modes", "block-bilinear", residual=worst,
        tolerance=config.tolerance("block-bilinear", 1e-12),
        seconds=time.perf_counter() - t0))

    t0 = time.perf_counter()
    total = None
    for n in range(1, full.n_sites + 1):
        term = density(basis, n, delta)
        total = term if total is None else total + term
    resid = (modes.t33 - delta * total).norm()
    out.append(make_record(
        "zero-modes", "density-sum", residual=resid,
        tolerance=config.tolerance("density-sum", 1e-12),
        seconds=time.perf_counter() - t0))
    return out


_SUITE_FUNCTIONS = {
    "ybe": _suite_ybe,
    "rtt": _suite_rtt,
    "vacuum": _suite_vacuum,
    "bethe-vectors": _suite_bethe_vectors,
    "composite": _suite_composite,
    "series": _suite_series,
    "antimorphism": _suite_antimorphism,
    "zero-modes": _suite_zero_modes,
}


def _guarded_suite(name: str, func, config: RunConfig, **kwargs):
    try:
        return func(config, **kwargs)
    except _EXPECTED_ERRORS as exc:
        return [make_record(name, "suite-error", value=f"{type(exc).__name__}: {exc}",
                            passed=False)]


def run_verify(config: RunConfig, r_matrix_fn=None) -> dict:
    """Run the configured identity suites and assemble the report."""
    workers = resolve_workers(config)
    records: list[dict] = []
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = []
        for name in config.suites:
            func = _SUITE_FUNCTIONS[name]
            kwargs = {"r_fn": r_matrix_fn} if name == "ybe" else {}
            futures.append(pool.submit(_guarded_suite, name, func, config, **kwargs))
        for future in futures:
            records.extend(future.result())
    report = build_report("verify", config, records, workers)
    write_outputs(report, records, config, "verify")
    return report


# ---------------------------------------------------------------------------
# scan command
# ---------------------------------------------------------------------------


def _fit_order(spacings, residuals) -> float | None:
    """Log-log slope, or None when the residuals are not monotone."""
    pairs = list(zip(spacings, residuals))
    if any(r <= 0 for _, r in pairs):
        return None
    ordered = sorted(pairs)
    values = [r for _, r in ordered]
    if any(hi <= lo for lo, hi in zip(values, values[1:])):
        return None
    slope = np.polyfit(np.log([s for s, _ in ordered]),
                       np.log([r for _, r in ordered]), 1)[0]
    return float(slope)


def _single_site_mask(basis, n_sites: int) -> np.ndarray:
    """States in which no lattice site holds more than one quantum."""
    arr = np.array(basis.states)
    mask = np.ones(arr.shape[0], dtype=bool)
    for site in range(1, n_sites + 1):
        total = arr[:, basis.mode(1, site)] + arr[:, basis.mode(2, site)]
        mask &= total <= 1
    return mask


def _scan_phase_power(config: RunConfig, spacings):
    errs = vacuum_phase_power_error(0.7, config.length, spacings)
    return [float(e) for e in errs]


_SCAN_US = (0.9 + 0.2j,)
_SCAN_VS = (1.7, -0.6)


def _scan_models(config: RunConfig):
    for n in config.scan_sites:
        params = LatticeParams(length=config.length, sites=n,
                               kappa=config.kappa, cutoff=2)
        yield make_model("tcbg_full", params=params)


def _scan_coordinate(config: RunConfig, spacings):
    out = []
    for model in _scan_models(config):
        bp = BetheParams(_SCAN_US, _SCAN_VS, model.c)
        algebraic = bv_tcbg(model, bp)
        coordinate = lattice_coordinate_bv(model, bp)
        mask = _single_site_mask(model.basis, model.n_sites)
        diff = (algebraic.amplitudes - coordinate.amplitudes)[mask]
        out.append(float(np.linalg.norm(diff) / algebraic.norm()))
    return out


def _scan_amplitude(config: RunConfig, spacings):
    out = []
    kappa = config.kappa
    for model in _scan_models(config):
        n = model.n_sites
        delta = model.params.delta
        bp = BetheParams(_SCAN_US, _SCAN_VS, model.c)
        algebraic = bv_tcbg(model, bp)
        site1, site2 = int(0.3 * n) + 1, int(0.7 * n) + 1
        positions = ((site1 - 1) * delta, (site2 - 1) * delta)
        occ = [0] * model.basis.n_modes
        occ[model.basis.mode(1, site1)] = 1
        occ[model.basis.mode(2, site2)] = 1
        amp = algebraic.amplitudes[model.basis.state_index(occ)]
        prefactor = (-1.0) * ((-1j * delta * math.sqrt(kappa)) ** 2) / delta
        chi = chi_wavefunction((1,), positions, _SCAN_US, _SCAN_VS, kappa)
        out.append(float(abs(amp / prefactor - chi) / abs(chi)))
    return out


def _scan_reversal(config: RunConfig, spacings):
    return [antimorphism_residual(model, 0.83 - 0.41j)
            for model in _scan_models(config)]


_SCAN_FUNCTIONS = {
    "phase-power": _scan_phase_power,
    "coordinate-vs-algebraic": _scan_coordinate,
    "continuum-amplitude": _scan_amplitude,
    "order-reversal": _scan_reversal,
}


def run_scan(config: RunConfig) -> dict:
    """Lattice-refinement scans with fitted convergence orders."""
    workers = resolve_workers(config)
    spacings = [config.length / n for n in config.scan_sites]
    rows: list[dict] = []
    records: list[dict] = []
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {name: pool.submit(_scan_timed, _SCAN_FUNCTIONS[name],
                                     config, spacings)
                   for name in SCANS}
        results = {name: futures[name].result() for name in SCANS}
    for name in SCANS:
        residuals, seconds, failure = results[name]
        if failure is not None:
            records.append(make_record("scan", name, value=failure, passed=False,
                                       seconds=seconds))
            continue
        for n, spacing, resid in zip(config.scan_sites, spacings, residuals):
            rows.append(make_record("scan", name, param=f"sites={n}",
                                    value=spacing, residual=resid))
        expected, band = _SCAN_BANDS[name]
        allowed = config.tolerance(name, band)
        order = _fit_order(spacings, residuals)
        if order is None:
            fit = make_record("scan", name, param="fit", value="not established",
                              tolerance=allowed, passed=True, seconds=seconds)
        else:
            fit = make_record("scan", name, param="fit", value=expected,
                              residual=abs(order - expected), order=order,
                              tolerance=allowed, seconds=seconds)
        rows.append(fit)
        records.append(fit)
    report = build_report("scan", config, records, workers,
                          extra={"samples": [r for r in rows if r["param"] != "fit"]})
    write_outputs(report, rows, config, "scan")
    return report


def _scan_timed(func, config, spacings):
    t0 = time.perf_counter()
    try:
        residuals = func(config, spacings)
        failure = None
    except _EXPECTED_ERRORS as exc:
        residuals, failure = [], f"{type(exc).__name__}: {exc}"
    return residuals, time.perf_counter() - t0, failure


# ---------------------------------------------------------------------------
# solve command
# ---------------------------------------------------------------------------


def _bethe_system(config: RunConfig, model):
    a, b = config.sector
    kind = ModelKind(config.model)
    if kind in (ModelKind.TCBG_FULL, ModelKind.TCBG_SMALL):
        return BetheSystem.tcbg_lattice(a, b, config.lattice_params())
    data = model.vacuum_data()
    if model.auxdim == 2:
        return BetheSystem.gl2(b, model.c, data.r1)
    return BetheSystem.generic(a, b, model.c, data.r1, data.r3)


def _seed_points(config: RunConfig, system) -> list[BetheParams]:
    a, b = system.a, system.b
    rng = _rng(config, 301)
    n = config.sites
    if system.variant.name == "TCBG_LATTICE":
        delta = config.length / config.sites
        base = sorted({(2.0 / delta) * math.tan(math.pi * k / (2 * n))
                       for k in range(-(n - 1), n)})
    else:
        base = [2.0 * math.pi * k / config.length for k in range(-(b + 1), b + 2)]
    seeds = []
    u_base = [x + 0.5 * system.c for x in base] + [0.5 * system.c]
    for v_combo in itertools.combinations(base, b):
        vs = tuple(v + 0.02 * complex(*rng.normal(size=2)) for v in v_combo)
        if a == 0:
            seeds.append(BetheParams((), vs, system.c))
            continue
        for u_combo in itertools.combinations(u_base, a):
            us = tuple(u + 0.02 * complex(*rng.normal(size=2)) for u in u_combo)
            seeds.append(BetheParams(us, vs, system.c))
    return seeds[:60]


def _solve_seed(system, seed):
    try:
        return solve_bethe(system, seed, SolveConfig())
    except _EXPECTED_ERRORS:
        return None


def run_solve(config: RunConfig) -> dict:
    """Grid-seeded Newton search, deduplication, on-shell certification."""
    workers = resolve_workers(config)
    model = build_model(config)
    a, b = config.sector
    records: list[dict] = []
    roots: list[dict] = []
    if model.auxdim == 2 and a:
        raise ConfigError("a 2x2 model solves a single-level system; set sector=[0,b]")
    if a == 0 and b == 0:
        records.append(make_record("solve", "attempts", param="sector=(0,0)",
                                   value="nothing to solve"))
    else:
        t0 = time.perf_counter()
        system = _bethe_system(config, model)
        seeds = _seed_points(config, system)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(lambda s: _solve_seed(system, s), seeds))
        reports = [r for r in reports if r is not None]
        converged = [r for r in reports if r.converged]
        distinct = dedupe_roots(reports)
        seconds = time.perf_counter() - t0
        records.append(make_record(
            "solve", "attempts", param=f"sector=({a},{b}),seeds={len(seeds)}",
            value=f"{len(converged)}/{len(reports)} converged, {len(distinct)} distinct",
            seconds=seconds))
        rng = _rng(config, 302)
        probes = _points(rng, 3)
        cert_tol = config.tolerance("onshell-certification", 1e-8)
        for k, rep in enumerate(distinct):
            t0 = time.perf_counter()
            params = BetheParams(rep.u_roots, rep.v_roots, system.c)
            try:
                defect = certify_onshell(model, params, probes)
                note = ""
            except _EXPECTED_ERRORS as exc:
                defect = None
                note = f"certification unavailable: {type(exc).__name__}: {exc}"
            records.append(make_record(
                "solve", f"root-{k}", param=f"sector=({a},{b})",
                residual=rep.residual_inf, value=defect if note == "" else note,
                tolerance=cert_tol if defect is not None else None,
                passed=None if defect is None else bool(defect <= cert_tol),
                seconds=time.perf_counter() - t0))
            roots.append({
                "u_roots": [_jsonable(complex(z)) for z in rep.u_roots],
                "v_roots": [_jsonable(complex(z)) for z in rep.v_roots],
                "residual": float(rep.residual_inf),
                "iterations": int(rep.iterations),
                "converged": bool(rep.converged),
                "certification": _jsonable(defect),
            })
        if not distinct:
            records.append(make_record(
                "solve", "no-convergence", param=f"sector=({a},{b})",
                value="no seed converged; recorded outcome"))
    report = build_report("solve", config, records, workers,
                          extra={"roots": roots})
    write_outputs(report, records, config, "solve")
    return report


# ---------------------------------------------------------------------------
# zero-modes command
# ---------------------------------------------------------------------------


def run_zero_modes(config: RunConfig) -> dict:
    """Exact zero modes plus windowed boundary estimates and extraction."""
    workers = resolve_workers(config)
    records = _guarded_suite("zero-modes", _suite_zero_modes, config)
    params = config.lattice_params()
    full = make_model("tcbg_full", params=params)

    t0 = time.perf_counter()
    window = zero_modes_windowed(full)
    seconds = time.perf_counter() - t0
    for (side, axis, color) in sorted(window.estimates):
        est = window.estimates[(side, axis, color)]
        records.append(make_record(
            "zero-modes", f"window-{side}-{axis}-{color}",
            param=f"points={len(window.sigmas)}", residual=est.residual,
            value=est.error, seconds=seconds / 8))
    records.append(make_record(
        "zero-modes", "window-converged", value=bool(window.converged),
        passed=bool(window.converged), seconds=0.0))

    t0 = time.perf_counter()
    momentum = (2.0 / params.delta) * math.tan(math.pi / config.sites)
    state = bv_tcbg(full, BetheParams((), (momentum,), full.c))
    left, _ = windowed_mode_vector(full, "row", 2, "left", state.amplitudes)
    right, _ = windowed_mode_vector(full, "row", 2, "right", state.amplitudes)
    combined = float(np.linalg.norm(left + right) / state.norm())
    records.append(make_record(
        "zero-modes", "combined-annihilation", param="sector=(0,1),on-shell",
        value=combined, seconds=time.perf_counter() - t0))

    if config.sites >= 2:
        t0 = time.perf_counter()
        cut = config.sites - 1
        extraction = local_operator_extraction(full, cut)
        seconds = time.perf_counter() - t0
        worst = max(extraction.block[i][j].residual
                    for i in range(2) for j in range(2))
        records.append(make_record(
            "zero-modes", "extraction-block", param=f"cut={cut}", residual=worst,
            tolerance=config.tolerance("extraction-block", 1e-12),
            seconds=seconds))
        records.append(make_record(
            "zero-modes", "extraction-density", param=f"cut={cut}",
            residual=extraction.density.residual,
            tolerance=config.tolerance("extraction-density", 1e-12),
            seconds=0.0))
        boundary = max(rec.residual for rec in
                       list(extraction.column.values()) + list(extraction.row.values()))
        records.append(make_record(
            "zero-modes", "extraction-boundary", param=f"cut={cut}",
            value=boundary, seconds=0.0))
    report = build_report("zero-modes", config, records, workers)
    write_outputs(report, records, config, "zero-modes")
    return report


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


_COMMANDS = {
    "verify": run_verify,
    "scan": run_scan,
    "solve": run_solve,
    "zero-modes": run_zero_modes,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bethelab",
        description="Desk-scale checks of nested Bethe-ansatz identities "
                    "on a lattice two-component Bose gas.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
            ("verify", "run identity suites and report residuals"),
            ("scan", "lattice-refinement scans with fitted orders"),
            ("solve", "search Bethe roots and certify them on-shell"),
            ("zero-modes", "exact zero modes, windowed boundary estimates")):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", metavar="PATH",
                         help="JSON config file (defaults apply when omitted)")
        cmd.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                         dest="overrides",
                         help="override one config entry; repeatable; values "
                              "are parsed as JSON when possible")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_run_config(args.config, args.overrides)
        report = _COMMANDS[args.command](config)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    for record in report["checks"]:
        status = "pass" if record["passed"] else "FAIL"
        detail = record["residual"] if record["residual"] is not None \
            else record["value"]
        print(f"[{status}] {record['check']}/{record['name']}: {detail}")
    print(f"report: {report['outputs']['json']}")
    return 0 if report["passed"] else 1


if __name__ == "__main__":
    sys.exit(main())
