"""Sampled functions on the half line and their asymptotic-periodicity diagnostics.

Every function lives on a uniform grid with step ``h = 1/m`` so integer times
(and therefore floor breakpoints and unit Stepanov windows) are grid nodes.
Piecewise-smooth paths carry a left limit at each integer node; this is what
lets a floor-composed path be integrated exactly on each unit interval.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from . import kernels

JUMP_RTOL = 1e-9
_GRID_ATOL = 1e-12


def grid_divisions(h: float) -> int:
    """Return the integer ``m`` with ``h * m == 1``; raise if there is none."""
    if not np.isfinite(h) or h <= 0:
        raise ValueError(f"grid step must be positive, got {h!r}")
    m = int(round(1.0 / h))
    if m < 2 or abs(h * m - 1.0) > _GRID_ATOL:
        raise ValueError(f"grid step {h!r} is not 1/m for an integer m >= 2")
    return m


@dataclass(frozen=True, eq=False)
class SampledPath:
    """Vector-valued function on ``[0, T_max]`` sampled at ``t_i = i*h``.

    ``values`` has shape ``(n_nodes, d)``. ``left_limits[n]`` is the limit of
    the path as ``t -> n`` from the left (row 0 is just ``values[0]``); it
    defaults to the node value, i.e. a path continuous at integers.
    """

    h: float
    values: np.ndarray
    left_limits: Optional[np.ndarray] = None
    t0: float = 0.0
    m: int = field(init=False)
    continuity_flags: np.ndarray = field(init=False)

    def __post_init__(self):
        m = grid_divisions(self.h)
        values = np.array(self.values, dtype=np.float64)
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2 or values.shape[0] == 0 or values.shape[1] == 0:
            raise ValueError("values must be a non-empty (n_nodes, d) array")
        if (values.shape[0] - 1) % m != 0:
            raise ValueError("path must end on an integer time")
        n_int = (values.shape[0] - 1) // m + 1
        if self.left_limits is None:
            left = values[::m].copy()
        else:
            left = np.array(self.left_limits, dtype=np.float64)
            if left.ndim == 1:
                left = left[:, None]
            if left.shape != (n_int, values.shape[1]):
                raise ValueError("left_limits must have one row per integer node")
            left[0] = values[0]
        at_int = values[::m]
        jump = np.linalg.norm(at_int - left, axis=1)
        flags = jump <= JUMP_RTOL * (1.0 + np.linalg.norm(at_int, axis=1))
        values.flags.writeable = False
        left.flags.writeable = False
        flags.flags.writeable = False
        object.__setattr__(self, "h", 1.0 / m)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "left_limits", left)
        object.__setattr__(self, "continuity_flags", flags)

    @classmethod
    def from_function(cls, func: Callable, h: float, horizon: int,
                      left_func: Optional[Callable] = None) -> "SampledPath":
        """Sample a vectorised ``func(t) -> (len(t),) or (len(t), d)``."""
        m = grid_divisions(h)
        times = np.arange(int(horizon) * m + 1) / m
        values = np.asarray(func(times), dtype=np.float64)
        left = None
        if left_func is not None:
            left = np.asarray(left_func(np.arange(int(horizon) + 1.0)),
                              dtype=np.float64)
        return cls(1.0 / m, values, left)

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    @property
    def n_nodes(self) -> int:
        return self.values.shape[0]

    @property
    def horizon(self) -> int:
        """T_max, always an integer."""
        return (self.n_nodes - 1) // self.m

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_nodes) / self.m

    @property
    def node_values(self) -> np.ndarray:
        """Values at the integer nodes 0, 1, ..., T_max."""
        return self.values[:: self.m]

    def index_of(self, t: float) -> int:
        i = int(round(t * self.m))
        if abs(t * self.m - i) > 1e-9 or not 0 <= i < self.n_nodes:
            raise ValueError(f"time {t!r} is not a grid node of this path")
        return i

    def value_at(self, t: float) -> np.ndarray:
        return self.values[self.index_of(t)]

    def discontinuities(self) -> np.ndarray:
        """Integer times flagged as jumps."""
        return np.flatnonzero(~self.continuity_flags).astype(float)

    def jumps(self) -> np.ndarray:
        """Jump size ``|x(n) - x(n-)|`` at every integer node."""
        return np.linalg.norm(self.node_values - self.left_limits, axis=1)


@dataclass(frozen=True, eq=False)
class DefectProfile:
    """Tail profile ``T -> defect``; ``p`` is None for a sup-defect.

    ``span`` is the stretch at the end of the profile left out of the decay
    surrogate. The profile constructors choose it so that the surrogate's
    final value covers the last ``max(1, omega)`` time units of the defect,
    for sup and Stepanov profiles alike. Without it the final value of a sup
    profile is a single sample, and a periodic defect that happens to vanish
    there would look like decay.
    """

    omega: float
    p: Optional[float]
    T: np.ndarray
    values: np.ndarray
    span: float = 0.0

    def __post_init__(self):
        T = np.asarray(self.T, dtype=np.float64)
        v = np.asarray(self.values, dtype=np.float64)
        if T.shape != v.shape or T.ndim != 1 or T.size == 0:
            raise ValueError("profile needs matching non-empty T and values")
        if np.any(np.diff(T) <= 0):
            raise ValueError("profile times must increase strictly")
        if np.any(v < 0):
            raise ValueError("defect values must be non-negative")
        if self.span < 0:
            raise ValueError("span must be non-negative")
        # short profiles: the surrogate falls back to the first sample
        object.__setattr__(self, "span", min(float(self.span), float(T[-1] - T[0])))
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "values", v)

    @property
    def surrogate_values(self) -> np.ndarray:
        """Values at the tail starts the decay surrogate looks at."""
        return self.values[self.T <= self.T[-1] - self.span + 1e-12]

    @property
    def final(self) -> float:
        return float(self.surrogate_values[-1])

    def value_at(self, T: float) -> float:
        i = int(np.argmin(np.abs(self.T - T)))
        if abs(self.T[i] - T) > 1e-9:
            raise ValueError(f"{T!r} is not a profile sample")
        return float(self.values[i])

    def tail_non_increasing(self) -> bool:
        vals = self.surrogate_values
        tail = vals[len(vals) // 2:]
        return bool(np.all(np.diff(tail) <= 0.0))

    def decays(self, tol: float) -> bool:
        """Finite-horizon stand-in for ``defect -> 0``."""
        return self.final < tol and self.tail_non_increasing()


# --- quadrature on the grid ------------------------------------------------

STENCIL = 6  # samples per local interpolant (quintic)


def _lagrange_rows(nodes, pts):
    out = np.empty((pts.size, nodes.size))
    for a in range(nodes.size):
        others = np.delete(nodes, a)
        out[:, a] = np.prod((pts[:, None] - others) / (nodes[a] - others), axis=1)
    return out


@lru_cache(maxsize=None)
def panel_rule(m: int, order: int):
    """Gauss-Legendre rule and interpolation tables for one unit interval.

    Returns ``(xi, w, ghost, tables)``. ``xi``, ``w`` are the Gauss nodes in
    [0, 1] and weights (summing to 1) of one substep. Interval samples are
    indexed ``0..m`` and padded with ``ghost`` samples on each side, taken
    from the neighbouring interval where the function is continuous across
    the integer node. ``tables[(left_ok, right_ok)]`` is ``(starts, coef)``:
    substep ``l`` interpolates padded samples ``starts[l] .. starts[l]+k-1``
    with coefficients ``coef[l]`` of shape ``(order, k)``; stencils are
    centred where padding is usable and shifted inward otherwise.
    """
    x, w = np.polynomial.legendre.leggauss(order)
    xi = 0.5 * (x + 1.0)
    w = 0.5 * w
    k = min(STENCIL, m + 1)
    ghost = (k - 2) // 2 if k == STENCIL else 0
    tables = {}
    for left_ok in (False, True):
        for right_ok in (False, True):
            lo = 0 if left_ok else ghost
            hi = (m + 2 * ghost if right_ok else m + ghost) - (k - 1)
            starts = np.clip(np.arange(m) + ghost - (k - 2) // 2, lo, hi)
            coef = np.empty((m, order, k))
            for l in range(m):
                nodes = starts[l] - ghost + np.arange(k, dtype=float)
                coef[l] = _lagrange_rows(nodes, l + xi)
            starts.flags.writeable = False
            coef.flags.writeable = False
            tables[left_ok, right_ok] = (starts, coef)
    xi.flags.writeable = False
    w.flags.writeable = False
    return xi, w, ghost, tables


def interval_samples(path: SampledPath) -> np.ndarray:
    """Samples per unit interval, right end replaced by the left limit.

    Shape ``(T_max, m + 1, d)``.
    """
    m, T = path.m, path.horizon
    body = path.values[: T * m].reshape(T, m, path.dim)
    right = path.left_limits[1:, None, :]
    return np.concatenate([body, right], axis=1)


def ghost_samples(path: SampledPath):
    """Padding for :func:`gauss_values` from the path's own neighbours.

    Returns ``(left, right, left_ok, right_ok)``: ``left[n]`` holds the
    samples just before integer ``n`` and ``right[n]`` those just after
    ``n + 1``; the flags say whether the path is continuous there.
    """
    m, T, d = path.m, path.horizon, path.dim
    g = panel_rule(m, 4)[2]
    left = np.zeros((T, g, d))
    right = np.zeros((T, g, d))
    left_ok = np.zeros(T, dtype=bool)
    right_ok = np.zeros(T, dtype=bool)
    if g == 0 or T < 2:
        return left, right, left_ok, right_ok
    n = np.arange(1, T)
    cont = path.continuity_flags[1:T]
    offs = np.arange(g)
    left[1:] = path.values[(n * m)[:, None] - g + offs]
    right[:-1] = path.values[(n * m)[:, None] + 1 + offs]
    left_ok[1:] = cont
    right_ok[:-1] = cont
    return left, right, left_ok, right_ok


def gauss_values(samples: np.ndarray, order: int = 4, ghosts=None) -> np.ndarray:
    """Interpolate per-interval samples ``(T, m+1, d)`` to Gauss nodes.

    ``ghosts`` is the tuple from :func:`ghost_samples`; without it each
    interval is treated as a separate smooth piece. Returns shape
    ``(T * m, order, d)``, one row per substep.
    """
    n_int, mp1, d = samples.shape
    m = mp1 - 1
    _, _, g, tables = panel_rule(m, order)
    if ghosts is None or g == 0:
        left = right = np.zeros((n_int, g, d))
        left_ok = right_ok = np.zeros(n_int, dtype=bool)
    else:
        left, right, left_ok, right_ok = ghosts
    padded = np.concatenate([left, samples, right], axis=1)
    vals = np.empty((n_int, m, order, d))
    for (lok, rok), (starts, coef) in tables.items():
        sel = (left_ok == lok) & (right_ok == rok)
        if not sel.any():
            continue
        idx = starts[:, None] + np.arange(coef.shape[2])
        vals[sel] = np.einsum("lqk,nlkd->nlqd", coef, padded[sel][:, idx, :])
    return vals.reshape(-1, order, d)


def panel_values(path: SampledPath, order: int = 4):
    """Interpolated path values at the Gauss nodes of every substep.

    Returns ``(xi, w, vals)`` with ``vals`` of shape
    ``(n_substeps, order, d)``. Stencils cross an integer node only where
    the path is continuous there.
    """
    xi, w = panel_rule(path.m, order)[:2]
    return xi, w, gauss_values(interval_samples(path), order, ghost_samples(path))


def substep_power_integrals(path: SampledPath, p: float, order: int = 4):
    """``∫ ||path||^p`` over each grid substep."""
    _, w, vals = panel_values(path, order)
    norms = np.linalg.norm(vals, axis=2)
    return path.h * ((norms ** p) @ w)


# --- norms and defects -----------------------------------------------------

def _check_p(p):
    if not p >= 1:
        raise ValueError("p must be >= 1")


def window_power_integrals(path: SampledPath, p: float, order: int = 4):
    """``∫_t^{t+1} ||path||^p`` for every grid start ``t`` in [0, T_max-1]."""
    sub = substep_power_integrals(path, p, order)
    return np.maximum(kernels.window_sums(sub, path.m), 0.0)


def stepanov_norm(path: SampledPath, p: float = 1.0, order: int = 4) -> float:
    """Sup over unit windows of the L^p norm."""
    _check_p(p)
    if path.horizon < 1:
        raise ValueError("horizon too short")
    return float(np.max(window_power_integrals(path, p, order)) ** (1.0 / p))


def _omega_shift(path: SampledPath, omega: float) -> int:
    if not omega > 0:
        raise ValueError("omega must be positive")
    k = int(round(omega * path.m))
    if abs(omega * path.m - k) > 1e-9:
        raise ValueError("omega must be a grid multiple")
    return k


def shifted_difference(path: SampledPath, omega: float) -> SampledPath:
    """The path ``t -> path(t + omega) - path(t)`` on ``[0, T_max - omega]``."""
    k = _omega_shift(path, omega)
    if k % path.m:
        if not np.all(path.continuity_flags):
            raise ValueError("a path with jumps needs an integer omega")
        left = None
    else:
        s = k // path.m
        left = path.left_limits[s:] - path.left_limits[: len(path.left_limits) - s]
    if k % path.m == 0:
        diff = path.values[k:] - path.values[: path.n_nodes - k]
    else:
        # non-integer omega: truncate to the last integer time
        n = ((path.n_nodes - 1 - k) // path.m) * path.m + 1
        diff = path.values[k: k + n] - path.values[:n]
    return SampledPath(path.h, diff, left)


def surrogate_span(omega: float, p: Optional[float]) -> float:
    """Profile stretch left out of the decay surrogate (see DefectProfile).

    A Stepanov window starting at T already reaches T + 1, hence one unit less.
    """
    stretch = max(1.0, float(omega))
    return stretch if p is None else stretch - 1.0


def sup_defect_profile(path: SampledPath, omega: float) -> DefectProfile:
    """``T -> max_{t in [T, T_max-omega]} ||path(t+omega) - path(t)||``."""
    k = _omega_shift(path, omega)
    if path.horizon < omega + 1:
        raise ValueError("horizon too short")
    pointwise = np.linalg.norm(path.values[k:] - path.values[: path.n_nodes - k],
                               axis=1)
    T = np.arange(pointwise.size) / path.m
    return DefectProfile(omega, None, T, kernels.suffix_max(pointwise),
                         span=surrogate_span(omega, None))


def stepanov_defect_profile(path: SampledPath, omega: float, p: float = 1.0,
                            order: int = 4) -> DefectProfile:
    """Tail maxima of the unit-window L^p norm of ``path(.+omega) - path``."""
    _check_p(p)
    _omega_shift(path, omega)
    if path.horizon < omega + 2:
        raise ValueError("horizon too short")
    diff = shifted_difference(path, omega)
    windows = window_power_integrals(diff, p, order) ** (1.0 / p)
    T = np.arange(windows.size) / path.m
    return DefectProfile(omega, p, T, kernels.suffix_max(windows),
                         span=surrogate_span(omega, p))


def floor_compose(path: SampledPath) -> SampledPath:
    """The step path ``t -> path([t])`` on the same grid."""
    m = path.m
    nodes = path.node_values
    values = np.repeat(nodes[:-1], m, axis=0)
    values = np.concatenate([values, nodes[-1:]], axis=0)
    left = np.concatenate([nodes[:1], nodes[:-1]], axis=0)
    return SampledPath(path.h, values, left)


def compose_nonlinearity(f, path: SampledPath, floored: bool = False) -> SampledPath:
    """Sample ``t -> f(t, path([t]))`` (floored) or ``t -> f(t, path(t))``."""
    if f.dim != path.dim:
        raise ValueError(
            f"dimension mismatch: nonlinearity expects {f.dim}, path has {path.dim}")
    arg = floor_compose(path) if floored else path
    values = f.evaluate(path.times, arg.values)
    int_times = np.arange(path.horizon + 1.0)
    left = f.evaluate(int_times, arg.left_limits)
    return SampledPath(path.h, values, left)


def lipschitz_estimate(f, sample_box=(-10.0, 10.0), n_samples: int = 2000,
                       t_range=(0.0, 10.0), seed: int = 0) -> float:
    """Largest observed ``||f(t,x) - f(t,y)|| / ||x - y||``.

    Half of the pairs are independent points of the box, half are close
    pairs (separation 1e-3 of the box width) so local slopes are seen too.
    """
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    rng = np.random.default_rng(seed)
    lo, hi = (float(b) for b in sample_box)
    d = f.dim
    t = rng.uniform(*t_range, size=n_samples)
    x = rng.uniform(lo, hi, size=(n_samples, d))
    y = rng.uniform(lo, hi, size=(n_samples, d))
    near = n_samples // 2
    step = rng.normal(size=(near, d))
    step *= 1e-3 * (hi - lo) / np.linalg.norm(step, axis=1, keepdims=True)
    y[:near] = x[:near] + step
    num = np.linalg.norm(f.evaluate(t, x) - f.evaluate(t, y), axis=1)
    den = np.linalg.norm(x - y, axis=1)
    ok = den > 0
    return float(np.max(num[ok] / den[ok])) if np.any(ok) else 0.0
