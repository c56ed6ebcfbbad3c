"""Bethe-equation residuals, Newton root finding, and on-shell certification.

The equations are solved in logarithmic form: each equation's residual is the
difference of summed principal logarithms, with an integer branch offset fixed
at the starting point of an iteration and held constant while Newton runs, so
the iteration targets one sheet and grid seeding explores the others.
"""

from __future__ import annotations

import cmath
import itertools
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .bethe import BetheParams, bv_gl2, bv_tcbg
from .errors import CollisionError, PoleError, SingularJacobianError
from .structfun import f_fun

__all__ = [
    "BetheVariant",
    "BetheSystem",
    "SolveConfig",
    "SolveReport",
    "bethe_residual",
    "bethe_ratio",
    "solve_bethe",
    "dedupe_roots",
    "certify_onshell",
]

_TWO_PI = 2.0 * cmath.pi


class BetheVariant(Enum):
    GENERIC_GL3 = "generic_gl3"
    TCBG_CONTINUUM = "tcbg_continuum"
    TCBG_LATTICE = "tcbg_lattice"


@dataclass(frozen=True)
class BetheSystem:
    """A nested Bethe system: set sizes, coupling, and vacuum ratio logs.

    ``log_r1`` / ``log_r3`` must be smooth (branch-consistent) logarithms of
    the vacuum eigenvalue ratios; the continuum variant uses the exact linear
    phase and the lattice variant sums per-site principal logarithms.
    """

    a: int
    b: int
    c: complex
    variant: BetheVariant
    log_r1: object
    log_r3: object

    @classmethod
    def generic(cls, a: int, b: int, c: complex, r1, r3) -> "BetheSystem":
        return cls(a, b, complex(c), BetheVariant.GENERIC_GL3,
                   lambda u: cmath.log(r1(u)), lambda v: cmath.log(r3(v)))

    @classmethod
    def gl2(cls, b: int, c: complex, ratio) -> "BetheSystem":
        """Single-level system: the one parameter set plays the outer role."""
        return cls(0, b, complex(c), BetheVariant.GENERIC_GL3,
                   lambda u: 0.0 + 0.0j, lambda v: cmath.log(ratio(v)))

    @classmethod
    def tcbg_continuum(cls, a: int, b: int, length: float, kappa: float) -> "BetheSystem":
        c = -1j * kappa
        return cls(a, b, c, BetheVariant.TCBG_CONTINUUM,
                   lambda u: 0.0 + 0.0j, lambda v: 1j * length * v)

    @classmethod
    def tcbg_lattice(cls, a: int, b: int, params) -> "BetheSystem":
        delta, n = params.delta, params.sites

        def log_r3(v: complex) -> complex:
            num = 1.0 + 0.5j * v * delta
            den = 1.0 - 0.5j * v * delta
            if abs(den) < 1e-14 or abs(num) < 1e-14:
                raise PoleError(f"vacuum phase pole at {v}")
            return n * cmath.log(num / den)

        return cls(a, b, params.c, BetheVariant.TCBG_LATTICE,
                   lambda u: 0.0 + 0.0j, log_r3)


@dataclass
class SolveConfig:
    tol: float = 1e-10
    max_iterations: int = 200
    collision_tol: float = 1e-8
    fd_step: float = 1e-7
    max_halvings: int = 30
    divergence_bound: float = 1e8


@dataclass
class SolveReport:
    u_roots: tuple
    v_roots: tuple
    residual_inf: float
    iterations: int
    converged: bool
    collision_margin: float
    message: str = ""


def _log_f(x: complex, y: complex, c: complex) -> complex:
    return cmath.log(f_fun(x, y, c))


def _raw_residual(system: BetheSystem, us, vs) -> np.ndarray:
    a, b, c = system.a, system.b, system.c
    out = np.empty(a + b, dtype=complex)
    for i in range(a):
        val = system.log_r1(us[i])
        for j in range(a):
            if j != i:
                val -= _log_f(us[i], us[j], c) - _log_f(us[j], us[i], c)
        for v in vs:
            val -= _log_f(v, us[i], c)
        out[i] = val
    for j in range(b):
        val = system.log_r3(vs[j])
        for k in range(b):
            if k != j:
                val -= _log_f(vs[k], vs[j], c) - _log_f(vs[j], vs[k], c)
        for u in us:
            val -= _log_f(vs[j], u, c)
        out[a + j] = val
    return out


def bethe_residual(system: BetheSystem, u_set, v_set,
                   branch_offsets: np.ndarray | None = None) -> np.ndarray:
    """Log-form residuals, one per parameter; zero exactly on shell.

    Without explicit ``branch_offsets`` each residual's imaginary part is
    folded into (-pi, pi] by its own integer multiple of 2*pi*i; passing the
    offsets keeps a Newton run on a fixed sheet.
    """
    us = tuple(complex(u) for u in u_set)
    vs = tuple(complex(v) for v in v_set)
    if len(us) != system.a or len(vs) != system.b:
        raise ValueError("parameter counts do not match the system sizes")
    raw = _raw_residual(system, us, vs)
    if branch_offsets is None:
        branch_offsets = np.round(raw.imag / _TWO_PI)
    return raw - _TWO_PI * 1j * branch_offsets


def bethe_ratio(system: BetheSystem, u_set, v_set) -> np.ndarray:
    """Ratio-form left/right-hand quotients; one exactly on shell."""
    us = tuple(complex(u) for u in u_set)
    vs = tuple(complex(v) for v in v_set)
    c = system.c
    out = np.empty(system.a + system.b, dtype=complex)
    for i in range(system.a):
        rhs = 1.0 + 0.0j
        for j in range(system.a):
            if j != i:
                rhs *= f_fun(us[i], us[j], c) / f_fun(us[j], us[i], c)
        for v in vs:
            rhs *= f_fun(v, us[i], c)
        out[i] = cmath.exp(system.log_r1(us[i])) / rhs
    for j in range(system.b):
        rhs = 1.0 + 0.0j
        for k in range(system.b):
            if k != j:
                rhs *= f_fun(vs[k], vs[j], c) / f_fun(vs[j], vs[k], c)
        for u in us:
            rhs *= f_fun(vs[j], u, c)
        out[system.a + j] = cmath.exp(system.log_r3(vs[j])) / rhs
    return out


def _collision_margin(us, vs) -> float:
    margin = np.inf
    for group in (us, vs):
        for x, y in itertools.combinations(group, 2):
            margin = min(margin, abs(x - y))
    return float(margin)


def solve_bethe(system: BetheSystem, initial: BetheParams,
                config: SolveConfig | None = None) -> SolveReport:
    """Damped Newton on the log-form residuals from one starting point.

    The Jacobian is holomorphic forward differencing; steps are halved until
    the residual norm decreases.  Parameters merging below the collision
    threshold abort with an error; a stalled line search or iteration cap
    returns a non-converged report.
    """
    cfg = config or SolveConfig()
    if abs(initial.c - system.c) > 1e-12:
        raise ValueError("initial guess carries a different coupling than the system")
    a, b = system.a, system.b
    z = np.array(initial.u_set + initial.v_set, dtype=complex)

    def split(vec):
        return tuple(vec[:a]), tuple(vec[a:])

    us, vs = split(z)
    raw = _raw_residual(system, us, vs)
    offsets = np.round(raw.imag / _TWO_PI)
    res = raw - _TWO_PI * 1j * offsets
    res_norm = float(np.linalg.norm(res))
    iterations = 0
    message = ""
    for iterations in range(1, cfg.max_iterations + 1):
        if float(np.abs(res).max()) < cfg.tol:
            break
        n = a + b
        jac = np.empty((n, n), dtype=complex)
        for k in range(n):
            h = cfg.fd_step * max(1.0, abs(z[k]))
            zp = z.copy()
            zp[k] += h
            up, vp = split(zp)
            jac[:, k] = ((_raw_residual(system, up, vp)
                          - _TWO_PI * 1j * offsets) - res) / h
        try:
            step = np.linalg.solve(jac, -res)
        except np.linalg.LinAlgError as exc:
            raise SingularJacobianError(f"singular Jacobian at iteration "
                                        f"{iterations}: {exc}") from exc
        if not np.all(np.isfinite(step)):
            raise SingularJacobianError(f"non-finite Newton step at iteration {iterations}")
        accepted = False
        scale = 1.0
        for _ in range(cfg.max_halvings):
            cand = z + scale * step
            cu, cv = split(cand)
            if _collision_margin(cu, cv) < cfg.collision_tol:
                raise CollisionError(
                    f"parameters collided (margin below {cfg.collision_tol})")
            try:
                cand_res = _raw_residual(system, cu, cv) - _TWO_PI * 1j * offsets
            except PoleError:
                scale *= 0.5
                continue
            cand_norm = float(np.linalg.norm(cand_res))
            if cand_norm < res_norm:
                z, res, res_norm = cand, cand_res, cand_norm
                accepted = True
                break
            scale *= 0.5
        if not accepted:
            message = "line search stalled"
            break
        if float(np.abs(z).max()) > cfg.divergence_bound:
            message = "parameters diverged toward infinity"
            break
    us, vs = split(z)
    residual_inf = float(np.abs(res).max())
    converged = residual_inf < cfg.tol and not message.startswith("parameters diverged")
    if not converged and not message and iterations >= cfg.max_iterations:
        message = "iteration limit reached"
    return SolveReport(us, vs, residual_inf, iterations, converged,
                       _collision_margin(us, vs), message)


def dedupe_roots(reports, tol: float = 1e-6) -> list[SolveReport]:
    """Keep one converged report per distinct root set (order-insensitive)."""
    kept: list[SolveReport] = []
    for rep in reports:
        if not rep.converged:
            continue
        duplicate = False
        for ref in kept:
            du = _set_distance(rep.u_roots, ref.u_roots)
            dv = _set_distance(rep.v_roots, ref.v_roots)
            if du < tol and dv < tol:
                duplicate = True
                break
        if not duplicate:
            kept.append(rep)
    return kept


def _set_distance(xs, ys) -> float:
    if len(xs) != len(ys):
        return np.inf
    if not xs:
        return 0.0
    best = np.inf
    for perm in itertools.permutations(ys):
        best = min(best, max(abs(x - y) for x, y in zip(xs, perm)))
    return float(best)


def certify_onshell(model, params: BetheParams, probes) -> float:
    """Worst-case collinearity defect of the transfer-matrix action.

    For each probe w the transfer matrix (auxiliary trace of the monodromy)
    is applied to the Bethe vector; the defect is the relative norm of the
    component orthogonal to the vector, with the scalar taken as the Rayleigh
    quotient — no closed-form eigenvalue enters.
    """
    if model.auxdim == 3:
        state = bv_tcbg(model, params)
    else:
        state = bv_gl2(model, params.v_set)
    amp = state.amplitudes
    norm_sq = np.vdot(amp, amp)
    if abs(norm_sq) == 0.0:
        raise ValueError("the Bethe vector vanishes; nothing to certify")
    worst = 0.0
    for w in probes:
        image = model.trace_apply(complex(w), amp)
        image_norm = float(np.linalg.norm(image))
        if image_norm == 0.0:
            raise ValueError(f"the transfer matrix annihilates the state at {w}")
        quotient = np.vdot(amp, image) / norm_sq
        defect = float(np.linalg.norm(image - quotient * amp)) / image_norm
        worst = max(worst, defect)
    return worst
