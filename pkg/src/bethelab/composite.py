"""Interval splitting of monodromies and partition-sum Bethe-vector assembly.

A chain is cut into contiguous intervals; the total monodromy is the ordered
product of the interval monodromies, and the total Bethe vector expands as a
weighted sum over ordered partitions of the parameter sets, one subset per
interval.  Interval Bethe vectors occupy disjoint site ranges, so their
operator product merges by amplitude factorization.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .bethe import BetheParams, StateVector, bv_gl2, bv_tcbg
from .errors import StructureError
from .models import PartialModel
from .opalg import AuxMatrix, compose
from .structfun import prod_f

__all__ = [
    "SplitSpec",
    "PartialVacuumData",
    "split_model",
    "split_monodromy",
    "partitions",
    "bv_composite",
    "composite_residual",
]


# ---------------------------------------------------------------------------
# splitting
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SplitSpec:
    """Interior cut positions: interval k ends at ``cuts[k-1]``; no cuts
    means the whole chain as a single interval."""

    cuts: tuple[int, ...]

    def __init__(self, cuts):
        object.__setattr__(self, "cuts", tuple(int(x) for x in cuts))
        for i, cut in enumerate(self.cuts):
            if cut < 1 or (i and cut <= self.cuts[i - 1]):
                raise ValueError(f"cuts must be strictly increasing and >= 1: {self.cuts}")

    @property
    def n_intervals(self) -> int:
        return len(self.cuts) + 1

    def intervals(self, n_sites: int) -> list[tuple[int, int]]:
        if self.cuts and self.cuts[-1] >= n_sites:
            raise ValueError(f"cut {self.cuts[-1]} leaves an empty last interval "
                             f"on {n_sites} sites")
        bounds = (0,) + self.cuts + (n_sites,)
        return [(bounds[k] + 1, bounds[k + 1]) for k in range(len(bounds) - 1)]


@dataclass(frozen=True)
class PartialVacuumData:
    """Per-interval vacuum eigenvalue ratios, first-to-middle and
    last-to-middle; ``r3_funcs`` is None for 2x2 chains."""

    r1_funcs: tuple
    r3_funcs: tuple | None


def split_model(model, spec: SplitSpec) -> list[PartialModel]:
    """Interval slices of the model, ordered from the chain's first sites."""
    return [PartialModel(model, lo, hi) for lo, hi in spec.intervals(model.n_sites)]


def split_monodromy(model, spec: SplitSpec, u: complex) -> list[AuxMatrix]:
    """Interval monodromies whose ordered product (last interval leftmost)
    equals the total monodromy."""
    return [part.monodromy(u) for part in split_model(model, spec)]


def product_residual(model, spec: SplitSpec, u: complex) -> float:
    """Relative deviation of the composed interval product from the total."""
    parts = split_monodromy(model, spec, u)
    total = parts[0]
    for mat in parts[1:]:
        total = compose(mat, total)
    ref = model.monodromy(u)
    scale = max(ref.max_block_norm(), 1e-300)
    return (total - ref).max_block_norm() / scale


# ---------------------------------------------------------------------------
# partitions
# ---------------------------------------------------------------------------

def partitions(values, n_subsets: int, sizes=None):
    """All assignments of ``values`` into ``n_subsets`` labeled subsets.

    Every element lands in exactly one subset; relative order is preserved
    within each subset.  ``sizes`` optionally pins subset cardinalities
    (``None`` entries stay unconstrained).  Yields tuples of tuples.
    """
    vals = tuple(values)
    if sizes is not None:
        sizes = tuple(sizes)
        if len(sizes) != n_subsets:
            raise ValueError("one size constraint per subset expected")
        fixed = [s for s in sizes if s is not None]
        if fixed and (sum(fixed) > len(vals) or
                      (len(fixed) == n_subsets and sum(fixed) != len(vals))):
            return
    for labels in itertools.product(range(n_subsets), repeat=len(vals)):
        if sizes is not None:
            ok = all(s is None or labels.count(k) == s for k, s in enumerate(sizes))
            if not ok:
                continue
        yield tuple(tuple(v for v, lab in zip(vals, labels) if lab == k)
                    for k in range(n_subsets))


# ---------------------------------------------------------------------------
# composite Bethe vectors
# ---------------------------------------------------------------------------

def _check_unit_middle(partials) -> None:
    for k, part in enumerate(partials):
        for w in (0.2718281828 + 0.3141592653j, -0.5j + 1.1):
            lam = part.vacuum_eigenvalue(1, w)
            if abs(lam - 1.0) > 1e-10:
                raise StructureError(
                    f"interval {k + 1} has non-unit middle vacuum eigenvalue "
                    f"{lam}; the homogeneous partition weights do not apply")


def _support_dict(state: StateVector) -> dict:
    basis = state.basis
    out = {}
    for idx in np.nonzero(state.amplitudes)[0]:
        out[basis.states[idx]] = complex(state.amplitudes[idx])
    return out


def _ratio_product(func, values) -> complex:
    out = 1.0 + 0.0j
    for w in values:
        out *= func(w)
    return out


def bv_composite(partials, vacuum: PartialVacuumData | None,
                 params: BetheParams) -> StateVector:
    """Assemble the total Bethe vector from interval Bethe vectors.

    Sums over ordered partitions of both parameter sets across the intervals.
    Each term weighs, for every interval pair k < j, the later interval's
    first ratio at the earlier subset, the earlier interval's last ratio at
    the later subset, and cross ``f`` products; the interval vectors merge by
    amplitude factorization over their disjoint site supports.  Requires every
    interval's middle vacuum eigenvalue to be identically one.
    """
    partials = list(partials)
    n_int = len(partials)
    if n_int == 0:
        raise ValueError("need at least one interval")
    basis = partials[0].basis
    auxdim = partials[0].auxdim
    c = params.c
    _check_unit_middle(partials)
    if vacuum is None:
        r1 = tuple(part.r1 for part in partials)
        r3 = tuple(part.r3 for part in partials) if auxdim == 3 else None
    else:
        r1, r3 = vacuum.r1_funcs, vacuum.r3_funcs
    if auxdim == 2:
        if params.a:
            raise ValueError("a 2x2 chain has no inner parameter set")
        u_parts = [((),) * n_int]
    else:
        u_parts = list(partitions(params.u_set, n_int))
    v_parts = list(partitions(params.v_set, n_int))

    cache: dict = {}

    def interval_vector(j: int, us: tuple, vs: tuple) -> dict:
        key = (j, us, vs)
        if key not in cache:
            sub = BetheParams(us, vs, c)
            if auxdim == 3:
                vec = bv_tcbg(partials[j], sub)
            else:
                vec = bv_gl2(partials[j], vs)
            cache[key] = _support_dict(vec)
        return cache[key]

    vac_occ = basis.states[basis.vacuum_index()]
    total = np.zeros(basis.dim, dtype=complex)
    for upart in u_parts:
        for vpart in v_parts:
            if auxdim == 3 and any(len(upart[j]) > len(vpart[j])
                                   for j in range(n_int)):
                continue
            weight = 1.0 + 0.0j
            for k in range(n_int):
                for j in range(k + 1, n_int):
                    if auxdim == 3:
                        weight *= _ratio_product(r1[j], upart[k])
                        weight *= _ratio_product(r3[k], vpart[j])
                        weight *= prod_f(upart[j], upart[k], c)
                        weight *= prod_f(vpart[j], vpart[k], c)
                        weight /= prod_f(vpart[j], upart[k], c)
                    else:
                        weight *= _ratio_product(r1[j], vpart[k])
                        weight *= prod_f(vpart[j], vpart[k], c)
            merged = {vac_occ: 1.0 + 0.0j}
            for j in range(n_int):
                sup = interval_vector(j, upart[j] if auxdim == 3 else (),
                                      vpart[j])
                if not sup:
                    merged = {}
                    break
                nxt: dict = {}
                for occ1, a1 in merged.items():
                    for occ2, a2 in sup.items():
                        occ = tuple(x + y - z for x, y, z in
                                    zip(occ1, occ2, vac_occ))
                        nxt[occ] = nxt.get(occ, 0.0 + 0.0j) + a1 * a2
                merged = nxt
            for occ, amp in merged.items():
                total[basis.state_index(occ)] += weight * amp
    return StateVector(basis, total)


def composite_residual(model, spec: SplitSpec, params: BetheParams) -> float:
    """Relative deviation of the partition-sum assembly from the direct
    Bethe vector of the whole chain."""
    partials = split_model(model, spec)
    if model.auxdim == 3:
        reference = bv_tcbg(model, params)
    else:
        reference = bv_gl2(model, params.v_set)
    scale = reference.norm()
    if scale == 0.0:
        raise ValueError("the whole-chain Bethe vector vanishes; "
                         "no relative residual is defined")
    assembled = bv_composite(partials, None, params)
    return float(np.linalg.norm(assembled.amplitudes - reference.amplitudes) / scale)
