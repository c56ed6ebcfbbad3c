"""Bethe-vector construction in algebraic, spin-amplitude and coordinate form.

The central objects are partition sums over subsets of two parameter sets,
with determinant weights and ratios of the rational structure functions.
All operator products are applied to the model vacuum through the blockwise
monodromy propagation of :mod:`bethelab.models`, so nothing here ever builds
a full matrix of the monodromy.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CollisionError, DimensionMismatchError, PoleError
from .opalg import AuxMatrix, SpinBasis
from .structfun import f_fun, g_fun, izergin_det, prod_f

__all__ = [
    "BetheParams",
    "StateVector",
    "SpinAmplitudeMap",
    "bv_gl3",
    "bv_tcbg",
    "bv_gl2",
    "omega_coeffs",
    "chi_wavefunction",
    "lattice_coordinate_bv",
    "spin_amplitude_map",
]

_DISTINCT_TOL = 1e-12


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BetheParams:
    """Two sets of spectral parameters and the coupling constant.

    ``u_set`` carries the inner (first-color) parameters, ``v_set`` the outer
    (creation-level) ones.  Entries must be pairwise distinct within each set;
    the structure functions have first-order poles at coincident arguments.
    """

    u_set: tuple[complex, ...]
    v_set: tuple[complex, ...]
    c: complex

    def __init__(self, u_set, v_set, c):
        object.__setattr__(self, "u_set", tuple(complex(u) for u in u_set))
        object.__setattr__(self, "v_set", tuple(complex(v) for v in v_set))
        object.__setattr__(self, "c", complex(c))
        for name, vals in (("u_set", self.u_set), ("v_set", self.v_set)):
            for i in range(len(vals)):
                for j in range(i):
                    if abs(vals[i] - vals[j]) < _DISTINCT_TOL:
                        raise CollisionError(
                            f"coincident entries in {name}: "
                            f"{vals[j]} and {vals[i]}")

    @property
    def a(self) -> int:
        return len(self.u_set)

    @property
    def b(self) -> int:
        return len(self.v_set)


@dataclass
class StateVector:
    """An amplitude vector over a fixed occupation basis."""

    basis: object
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if self.amplitudes.shape[0] != self.basis.dim:
            raise DimensionMismatchError(
                f"amplitude length {self.amplitudes.shape[0]} does not match "
                f"basis dimension {self.basis.dim}")

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def dot(self, other: "StateVector") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass
class SpinAmplitudeMap:
    """Amplitudes of a spin-chain state keyed by ordered down-spin positions."""

    sites: int
    weight: int
    amplitudes: dict[tuple[int, ...], complex] = field(default_factory=dict)

    def __post_init__(self):
        for key in self.amplitudes:
            if len(key) != self.weight or any(
                    not 1 <= j <= self.sites for j in key) or list(key) != sorted(set(key)):
                raise ValueError(f"bad amplitude key {key}")

    def value(self, key) -> complex:
        return self.amplitudes.get(tuple(key), 0.0 + 0.0j)

    def max_abs(self) -> float:
        if not self.amplitudes:
            return 0.0
        return max(abs(z) for z in self.amplitudes.values())

    def max_diff(self, other: "SpinAmplitudeMap") -> float:
        keys = set(self.amplitudes) | set(other.amplitudes)
        if not keys:
            return 0.0
        return max(abs(self.value(k) - other.value(k)) for k in keys)


# ---------------------------------------------------------------------------
# monodromy access adapter
# ---------------------------------------------------------------------------

_PROBES = (0.3183098861 + 0.5772156649j, -0.7071067811 + 1.2020569031j)


class _EntryApplier:
    """Uniform ``T_ij(u) |state>`` access for models and raw matrix callables."""

    def __init__(self, t):
        if hasattr(t, "entry_apply"):
            self._model = t
            self._fn = None
            self.basis = t.basis
        elif callable(t):
            self._model = None
            self._fn = t
            self._cache: dict[complex, AuxMatrix] = {}
            self.basis = None
        else:
            raise TypeError("expected a lattice model or a callable u -> AuxMatrix")

    def _matrix(self, u: complex) -> AuxMatrix:
        if u not in self._cache:
            if len(self._cache) > 64:
                self._cache.clear()
            self._cache[u] = self._fn(u)
        mat = self._cache[u]
        if self.basis is None:
            self.basis = mat.entry(0, 0).basis
        return mat

    def resolve_basis(self, probe_values):
        if self.basis is not None:
            return self.basis
        for u in tuple(probe_values) + _PROBES:
            try:
                self._matrix(complex(u))
            except PoleError:
                continue
            return self.basis
        raise PoleError("could not evaluate the monodromy at any probe point")

    def vacuum(self) -> np.ndarray:
        if self._model is not None:
            return self._model.vacuum()
        basis = self.resolve_basis(())
        vac = np.zeros(basis.dim, dtype=complex)
        vac[basis.vacuum_index()] = 1.0
        return vac

    def apply(self, u: complex, i: int, j: int, vec: np.ndarray) -> np.ndarray:
        if self._model is not None:
            return self._model.entry_apply(u, i, j, vec)
        return self._matrix(u).entry(i, j).apply(vec)


def _apply_product(applier: _EntryApplier, entry: tuple[int, int],
                   values, vec: np.ndarray) -> np.ndarray:
    """Apply the ordered product of one monodromy entry over ``values``.

    The product is written left-to-right in the order of ``values``; the
    rightmost factor acts first.  Same-entry factors at distinct arguments
    commute, which the test-suite asserts rather than assumes.
    """
    i, j = entry
    out = vec
    for u in reversed(tuple(values)):
        out = applier.apply(u, i, j, out)
    return out


# ---------------------------------------------------------------------------
# algebraic Bethe vectors
# ---------------------------------------------------------------------------

def _complement(values, picked_idx):
    picked = set(picked_idx)
    return tuple(values[i] for i in range(len(values)) if i not in picked)


def bv_gl3(t, params: BetheParams) -> StateVector:
    """Nested Bethe vector for a 3x3 monodromy via the double partition sum.

    For every common subset size ``n <= min(a, b)`` the two parameter sets are
    split into first/second subsets; each term carries a determinant weight
    ``K_n`` of the first subsets, the inverse cross product ``1/f(v, u)`` over
    the full sets and intra-set ``f`` ratios, and applies the ordered entry
    products ``T13(v1) T23(v2) T12(u2)`` to the vacuum.
    """
    applier = _EntryApplier(t)
    applier.resolve_basis(params.v_set + params.u_set)
    us, vs, c = params.u_set, params.v_set, params.c
    a, b = params.a, params.b
    vac = applier.vacuum()
    total = np.zeros_like(vac)
    cross = prod_f(vs, us, c)
    for n in range(min(a, b) + 1):
        for u_idx in itertools.combinations(range(a), n):
            u1 = tuple(us[i] for i in u_idx)
            u2 = _complement(us, u_idx)
            f_u = prod_f(u1, u2, c)
            for v_idx in itertools.combinations(range(b), n):
                v1 = tuple(vs[i] for i in v_idx)
                v2 = _complement(vs, v_idx)
                weight = (izergin_det(v1, u1, c) / cross
                          * prod_f(v2, v1, c) * f_u)
                vec = _apply_product(applier, (0, 1), u2, vac)
                vec = _apply_product(applier, (1, 2), v2, vec)
                vec = _apply_product(applier, (0, 2), v1, vec)
                total = total + weight * vec
    return StateVector(applier.basis, total)


def _assert_lowering_annihilates(applier: _EntryApplier, probe_values,
                                 tol: float = 1e-10) -> None:
    vac = applier.vacuum()
    scale = float(np.linalg.norm(vac))
    for u in tuple(probe_values) + _PROBES:
        try:
            out = applier.apply(complex(u), 0, 1, vac)
        except PoleError:
            continue
        if float(np.linalg.norm(out)) > tol * max(scale, 1.0):
            raise ValueError(
                "the (1,2) monodromy entry does not annihilate the vacuum; "
                "use the generic double-partition construction instead")
        return
    raise PoleError("could not probe the (1,2) entry at any sample point")


def bv_tcbg(t, params: BetheParams) -> StateVector:
    """Bethe vector for monodromies whose (1,2) entry annihilates the vacuum.

    Only the outer parameter set is partitioned: the first subset has size
    ``a`` and feeds the (1,3) entries, the rest feed (2,3).  Vanishes
    identically when ``a > b``.
    """
    applier = _EntryApplier(t)
    applier.resolve_basis(params.v_set + params.u_set)
    _assert_lowering_annihilates(applier, params.v_set + params.u_set)
    us, vs, c = params.u_set, params.v_set, params.c
    a, b = params.a, params.b
    vac = applier.vacuum()
    if a > b:
        return StateVector(applier.basis, np.zeros_like(vac))
    total = np.zeros_like(vac)
    cross = prod_f(vs, us, c)
    for v_idx in itertools.combinations(range(b), a):
        v1 = tuple(vs[i] for i in v_idx)
        v2 = _complement(vs, v_idx)
        weight = izergin_det(v1, us, c) / cross * prod_f(v2, v1, c)
        vec = _apply_product(applier, (1, 2), v2, vac)
        vec = _apply_product(applier, (0, 2), v1, vec)
        total = total + weight * vec
    return StateVector(applier.basis, total)


def bv_gl2(t, v_set) -> StateVector:
    """Bethe vector for a 2x2 monodromy: ordered creation product on vacuum."""
    vs = tuple(complex(v) for v in v_set)
    for i in range(len(vs)):
        for j in range(i):
            if abs(vs[i] - vs[j]) < _DISTINCT_TOL:
                raise CollisionError(f"coincident entries: {vs[j]} and {vs[i]}")
    applier = _EntryApplier(t)
    applier.resolve_basis(vs)
    vac = applier.vacuum()
    return StateVector(applier.basis, _apply_product(applier, (0, 1), vs, vac))


# ---------------------------------------------------------------------------
# spin-amplitude form
# ---------------------------------------------------------------------------

def _omega_single(u_set, xi, key, c) -> complex:
    """One symmetrized amplitude: plain sum over all orderings of ``u_set``.

    ``key`` is the strictly increasing tuple of marked positions; each term is
    the ordered-pair ``f`` product within the permuted parameters times, for
    the k-th parameter, ``g`` at the marked position and ``f`` at every later
    position.
    """
    a = len(u_set)
    m = len(xi)
    total = 0.0 + 0.0j
    for perm in itertools.permutations(u_set):
        term = 1.0 + 0.0j
        for k in range(a):
            for j in range(k + 1, a):
                term *= f_fun(perm[j], perm[k], c)
        for k, jk in enumerate(key):
            uk = perm[k]
            term *= g_fun(uk, xi[jk - 1], c)
            for pos in range(jk, m):
                term *= f_fun(uk, xi[pos], c)
        total += term
    return total


def omega_coeffs(u_set, xi_set, c, sites: int | None = None) -> SpinAmplitudeMap:
    """Spin-chain Bethe-vector amplitudes for all ordered position tuples.

    ``xi_set`` lists the per-site inhomogeneities; the amplitude at positions
    ``j_1 < ... < j_a`` is the permutation-symmetrized product read off the
    explicit spin-chain solution.  Symmetrization is a plain sum over
    permutations, with no factorial normalization.
    """
    us = tuple(complex(u) for u in u_set)
    xi = tuple(complex(x) for x in xi_set)
    m = len(xi) if sites is None else int(sites)
    if len(xi) != m:
        raise ValueError("inhomogeneity list must match the site count")
    a = len(us)
    if a > m:
        raise ValueError(f"cannot place {a} marked positions on {m} sites")
    for i in range(a):
        for j in range(i):
            if abs(us[i] - us[j]) < _DISTINCT_TOL:
                raise CollisionError(f"coincident entries: {us[j]} and {us[i]}")
    amps = {}
    for key in itertools.combinations(range(1, m + 1), a):
        amps[key] = _omega_single(us, xi, key, c)
    return SpinAmplitudeMap(m, a, amps)


def spin_amplitude_map(state: StateVector) -> SpinAmplitudeMap:
    """Read a spin-basis state vector into position-keyed amplitudes.

    All weight sectors present in the vector are collected; the dominant
    weight (largest total amplitude mass) determines the map's weight and
    any mass outside it raises.
    """
    basis = state.basis
    if not isinstance(basis, SpinBasis):
        raise TypeError("spin_amplitude_map expects a spin-chain basis")
    by_weight: dict[int, dict[tuple[int, ...], complex]] = {}
    mass: dict[int, float] = {}
    for idx, occ in enumerate(basis.states):
        amp = state.amplitudes[idx]
        if amp == 0:
            continue
        key = tuple(j + 1 for j, n in enumerate(occ) if n)
        w = len(key)
        by_weight.setdefault(w, {})[key] = complex(amp)
        mass[w] = mass.get(w, 0.0) + abs(amp) ** 2
    if not by_weight:
        return SpinAmplitudeMap(basis.sites, 0, {})
    top = max(mass, key=mass.get)
    stray = math.sqrt(sum(v for w, v in mass.items() if w != top))
    if stray > 1e-10 * math.sqrt(mass[top]):
        raise ValueError("state mixes several flipped-spin sectors")
    return SpinAmplitudeMap(basis.sites, top, by_weight[top])


# ---------------------------------------------------------------------------
# coordinate form
# ---------------------------------------------------------------------------

def chi_wavefunction(k_tuple, z_tuple, u_set, v_set, kappa,
                     length: float | None = None) -> complex:
    """Continuum coordinate wavefunction on the ordered domain.

    ``z_tuple`` lists particle positions in strictly increasing order;
    ``k_tuple`` marks (1-based, strictly increasing) which of the ``b``
    particles carry the first color.  The value symmetrizes, over orderings of
    ``v_set``, the marked-position amplitude evaluated at arguments shifted by
    the coupling, an ordered-pair ``f`` product, and plane-wave factors.
    The coupling is ``c = -i * kappa``.
    """
    us = tuple(complex(u) for u in u_set)
    vs0 = tuple(complex(v) for v in v_set)
    ks = tuple(int(k) for k in k_tuple)
    zs = tuple(float(z) for z in z_tuple)
    a, b = len(us), len(vs0)
    if len(ks) != a:
        raise ValueError("marked-position tuple must have one entry per u parameter")
    if list(ks) != sorted(set(ks)) or any(not 1 <= k <= b for k in ks):
        raise ValueError("marked positions must be strictly increasing in [1, b]")
    if len(zs) != b:
        raise ValueError("need one coordinate per v parameter")
    if any(zs[i] >= zs[i + 1] for i in range(b - 1)) or (b and zs[0] <= 0.0):
        raise ValueError("coordinates must satisfy 0 < z_1 < ... < z_b")
    if length is not None and b and zs[-1] >= length:
        raise ValueError("coordinates must stay below the system length")
    c = -1j * complex(kappa)
    total = 0.0 + 0.0j
    for perm in itertools.permutations(vs0):
        term = _omega_single(us, tuple(v + c for v in perm), ks, c)
        for k in range(b):
            for j in range(k + 1, b):
                term *= f_fun(perm[j], perm[k], c)
        for k in range(b):
            term *= cmath.exp(1j * zs[k] * perm[k])
        total += term
    return total


def lattice_coordinate_bv(model, params: BetheParams) -> StateVector:
    """Direct lattice-sum Bethe vector on the Fock basis.

    For a 3x3 model the sum runs over strictly increasing site tuples and
    marked-position tuples, weighting single-quantum creation products by
    symmetrized marked-position amplitudes at shifted arguments, vacuum-phase
    powers per site, and the prefactor ``(-1)^a (-i * delta * sqrt(kappa))^b``.
    A 2x2 model takes the unmarked (single-color) form of the same sum.  The
    result lives in the single-occupancy sector, so any cutoff works.
    """
    basis = model.basis
    lat = model.params
    delta, kappa = lat.delta, lat.kappa
    c = -1j * kappa
    n_sites = model.n_sites
    us, vs0 = params.u_set, params.v_set
    a, b = params.a, params.b
    if model.auxdim == 2:
        if a:
            raise ValueError("a 2x2 model has no inner parameter set")
    elif a > b:
        raise ValueError("need at least as many outer as inner parameters")
    if b > n_sites:
        raise ValueError("more quanta than lattice sites")
    amps = np.zeros(basis.dim, dtype=complex)
    site_tuples = list(itertools.combinations(range(1, n_sites + 1), b))
    key_tuples = (list(itertools.combinations(range(1, b + 1), a))
                  if model.auxdim == 3 else [()])
    phase_pow = {}
    for perm in itertools.permutations(vs0):
        pair_f = 1.0 + 0.0j
        for k in range(b):
            for j in range(k + 1, b):
                pair_f *= f_fun(perm[j], perm[k], c)
        xi = tuple(v + c for v in perm)
        for key in key_tuples:
            om = (_omega_single(us, xi, key, c)
                  if model.auxdim == 3 else 1.0 + 0.0j)
            coef = pair_f * om
            if coef == 0:
                continue
            marked = set(key)
            colors = tuple(1 if (k + 1) in marked else 2 for k in range(b))
            for sites in site_tuples:
                w = coef
                for k in range(b):
                    pk = (perm[k], sites[k])
                    if pk not in phase_pow:
                        phase_pow[pk] = _vacuum_phase_cached(perm[k], delta, sites[k] - 1)
                    w *= phase_pow[pk]
                occ = [0] * basis.n_modes
                for k in range(b):
                    occ[basis.mode(colors[k], sites[k])] = 1
                amps[basis.state_index(occ)] += w
    pref = ((-1.0) ** a) * ((-1j * delta * math.sqrt(kappa)) ** b)
    amps *= pref * delta ** (-b / 2.0)
    return StateVector(basis, amps)


def _vacuum_phase_cached(v: complex, delta: float, power: int) -> complex:
    num = 1.0 + 0.5j * v * delta
    den = 1.0 - 0.5j * v * delta
    if abs(den) < 1e-14:
        raise PoleError(f"vacuum phase pole at argument {v}")
    return (num / den) ** power
