"""Mild solutions of x'(t) = A(t) x(t) + f(t, x([t])).

Two independent routes are provided. ``march`` integrates one unit interval
at a time with the state argument frozen at ``c_n = x(n)``; ``picard_solve``
iterates the fixed-point map

    (Gamma phi)(t) = U(t, 0) c0 + ∫_0^t U(t, s) f(s, phi([s])) ds

on the whole horizon. Both reduce the integrals to the same substep rule:
forcing samples are interpolated (local quintic, crossing an integer node only
where the forcing is continuous there) to Gauss-Legendre nodes and weighted by the exact propagator factors, then
substeps are chained through the cocycle identity with a linear scan.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .evolution import EvolutionProcess, Nonlinearity
from .function_space import (
    DefectProfile,
    SampledPath,
    compose_nonlinearity,
    gauss_values,
    ghost_samples,
    grid_divisions,
    interval_samples,
    panel_rule,
    stepanov_defect_profile,
    sup_defect_profile,
)

log = logging.getLogger(__name__)


class SolverError(RuntimeError):
    pass


class DivergenceError(SolverError):
    pass


class ConvergenceError(SolverError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    h: float = 1.0 / 64
    horizon: int = 64
    quad_order: int = 4
    picard_tol: float = 1e-10
    picard_max_iter: int = 200
    initial_guess: str = "constant"

    def __post_init__(self):
        m = grid_divisions(self.h)
        object.__setattr__(self, "h", 1.0 / m)
        if int(self.horizon) != self.horizon or self.horizon < 1:
            raise ValueError("horizon must be a positive integer")
        object.__setattr__(self, "horizon", int(self.horizon))
        if not 1 <= self.quad_order <= 16:
            raise ValueError("quad_order must be in 1..16")
        if not self.picard_tol > 0:
            raise ValueError("picard_tol must be positive")
        if self.picard_max_iter < 1:
            raise ValueError("picard_max_iter must be >= 1")
        if self.initial_guess != "constant":
            raise ValueError("only the constant initial guess is supported")

    @property
    def m(self) -> int:
        return int(round(1.0 / self.h))

    def check_omega(self, omega: float):
        if self.horizon < 2 * omega:
            raise ValueError(f"horizon {self.horizon} shorter than 2*omega = {2 * omega:g}")


@dataclass(frozen=True, eq=False)
class MildSolution:
    path: SampledPath
    method: str
    theta: float
    iterations: int = 0
    residuals: tuple = ()
    iterates: Optional[list] = field(default=None, repr=False)

    @property
    def node_values(self) -> np.ndarray:
        return self.path.node_values


def contraction_constant(proc: EvolutionProcess, f: Nonlinearity) -> float:
    return f.lipschitz * proc.K / proc.a


class _Propagator:
    """Per-substep propagator data for a process on a fixed grid.

    ``step[j]`` is U(t_{j+1}, t_j) and ``weights[j, q]`` is
    ``h w_q U(t_{j+1}, s_jq)`` for the Gauss nodes ``s_jq`` of substep j.
    """

    def __init__(self, proc: EvolutionProcess, m: int, horizon: int, order: int):
        self.proc, self.m, self.horizon, self.order = proc, m, horizon, order
        xi, w = panel_rule(m, order)[:2]
        h = 1.0 / m
        n_sub = horizon * m
        start = np.arange(n_sub) / m
        end = np.arange(1, n_sub + 1) / m
        nodes = start[:, None] + h * xi
        self.step = np.ascontiguousarray(proc.factors(end, start))
        self.weights = (h * w)[None, :, None] * proc.factors(end[:, None], nodes)
        self.times = np.arange(n_sub + 1) / m

    def increments(self, gauss_vals, first: int = 0):
        n = gauss_vals.shape[0]
        return np.ascontiguousarray(
            np.einsum("jqd,jqd->jd", self.weights[first:first + n], gauss_vals))

    def scan(self, y0, gauss_vals, first: int = 0):
        n = gauss_vals.shape[0]
        out = kernels.linear_scan(self.step[first:first + n],
                                  self.increments(gauss_vals, first),
                                  np.ascontiguousarray(y0, dtype=np.float64))
        if not np.all(np.isfinite(out)):
            raise DivergenceError("divergent trajectory")
        return out


def _check_dims(proc, f, c0):
    c0 = np.atleast_1d(np.asarray(c0, dtype=np.float64))
    if f.dim != proc.dim or c0.shape != (proc.dim,):
        raise ValueError(
            f"dimension mismatch: process {proc.dim}, nonlinearity {f.dim}, c0 {c0.shape}")
    return c0


def march(proc: EvolutionProcess, f: Nonlinearity, c0, cfg: SolverConfig,
          _prop: Optional[_Propagator] = None) -> MildSolution:
    """Integrate interval by interval with the state argument frozen at c_n."""
    c = _check_dims(proc, f, c0)
    theta = contraction_constant(proc, f)
    if theta >= 1:
        warnings.warn(f"theta = {theta:.4g} >= 1: no contraction, marching anyway",
                      RuntimeWarning, stacklevel=2)
    m, T = cfg.m, cfg.horizon
    prop = _prop or _Propagator(proc, m, T, cfg.quad_order)
    values = np.empty((T * m + 1, proc.dim))
    values[0] = c
    local = np.arange(m + 1) / m
    for n in range(T):
        samples = f.evaluate(n + local, np.broadcast_to(c, (m + 1, proc.dim)))
        seg = prop.scan(c, gauss_values(samples[None], cfg.quad_order), first=n * m)
        values[n * m + 1:(n + 1) * m + 1] = seg[1:]
        c = seg[-1]
    return MildSolution(SampledPath(1.0 / m, values), "march", theta)


def lambda_transform(proc: EvolutionProcess, forcing: SampledPath,
                     order: int = 4, _prop: Optional[_Propagator] = None) -> SampledPath:
    """``t -> ∫_0^t U(t, s) forcing(s) ds`` on the forcing's grid."""
    if forcing.dim != proc.dim:
        raise ValueError("dimension mismatch between process and forcing")
    prop = _prop or _Propagator(proc, forcing.m, forcing.horizon, order)
    vals = gauss_values(interval_samples(forcing), order, ghost_samples(forcing))
    out = prop.scan(np.zeros(proc.dim), vals)
    return SampledPath(forcing.h, out)


def picard_solve(proc: EvolutionProcess, f: Nonlinearity, c0, cfg: SolverConfig,
                 keep_iterates: bool = False) -> MildSolution:
    """Successive approximation from the constant guess ``phi_0 = c0``.

    Stops once the sup-norm change between iterates is at most
    ``cfg.picard_tol``. When the nonlinearity has Lipschitz constant 0 the
    map is constant and the first iterate is already the fixed point.
    """
    c0 = _check_dims(proc, f, c0)
    theta = contraction_constant(proc, f)
    if theta >= 1:
        warnings.warn(f"theta = {theta:.4g} >= 1: fixed-point iteration may not converge",
                      RuntimeWarning, stacklevel=2)
    m, T = cfg.m, cfg.horizon
    prop = _Propagator(proc, m, T, cfg.quad_order)
    homogeneous = proc.factors(prop.times, 0.0) * c0
    phi = SampledPath(1.0 / m, np.broadcast_to(c0, (T * m + 1, proc.dim)))
    residuals = []
    iterates = [phi] if keep_iterates else None
    for k in range(1, cfg.picard_max_iter + 1):
        v = compose_nonlinearity(f, phi, floored=True)
        new = homogeneous + lambda_transform(proc, v, cfg.quad_order, prop).values
        r = float(np.max(np.linalg.norm(new - phi.values, axis=1)))
        phi = SampledPath(1.0 / m, new)
        residuals.append(r)
        if keep_iterates:
            iterates.append(phi)
        log.debug("picard iteration %d residual %.3e", k, r)
        if r <= cfg.picard_tol or f.lipschitz == 0:
            return MildSolution(phi, "picard", theta, k, tuple(residuals), iterates)
    if theta >= 1:
        raise ConvergenceError("contraction condition violated, no convergence")
    raise ConvergenceError("tolerance unreachable at this grid")


def a_priori_bound(theta: float, k: int, residual0: float) -> float:
    """``theta^k / (1 - theta) * ||phi_1 - phi_0||``."""
    return theta ** k / (1.0 - theta) * residual0


def lambda_bound_constant(K: float, a: float) -> float:
    """Sup-norm gain of the convolution against Stepanov-bounded forcing."""
    return K * (2.0 - math.exp(-a)) / (1.0 - math.exp(-a))


def certify_sap(sol: MildSolution, omega: float, p: float = 1.0, tol: float = 1e-2,
                order: int = 4) -> tuple[DefectProfile, DefectProfile, bool]:
    """Sup and Stepanov defect profiles of the solution, and the joint verdict."""
    if sol.path.horizon < 4 * omega:
        raise ValueError("certification needs horizon >= 4*omega")
    sup = sup_defect_profile(sol.path, omega)
    sp = stepanov_defect_profile(sol.path, omega, p, order)
    return sup, sp, sup.decays(tol) and sp.decays(tol)
