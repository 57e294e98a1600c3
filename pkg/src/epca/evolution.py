"""Diagonal evolution processes and state nonlinearities.

A process acts componentwise: component ``n`` of the state is multiplied by
``exp(rate_n (t - s) + Q(t) - Q(s))`` where ``Q`` is the antiderivative of a
scalar time-periodic potential (``Q = 0`` when there is none). This covers the
constant-rate scalar/diagonal models and the Galerkin-truncated heat operator
with a periodic potential.

The stability constants ``K`` and ``a`` are declared, not inferred; the
``check_*`` functions certify them numerically. ``K`` is the same constant
that is called ``M`` in the contraction estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np


@dataclass(frozen=True)
class SinusoidalPotential:
    """q(t) = mean + amplitude * sin(frequency * t)."""

    mean: float
    amplitude: float
    frequency: float

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.frequency

    def __call__(self, t):
        return self.mean + self.amplitude * np.sin(self.frequency * np.asarray(t))

    def antiderivative(self, t):
        t = np.asarray(t, dtype=np.float64)
        return self.mean * t - self.amplitude * np.cos(self.frequency * t) / self.frequency

    def integral(self, s, t):
        """∫_s^t q, written so the linear part does not cancel for large t."""
        s = np.asarray(s, dtype=np.float64)
        t = np.asarray(t, dtype=np.float64)
        f = self.frequency
        return self.mean * (t - s) - self.amplitude * (np.cos(f * t) - np.cos(f * s)) / f


HEAT_POTENTIAL = SinusoidalPotential(mean=-3.0, amplitude=1.0, frequency=math.pi)


@dataclass(frozen=True, eq=False)
class EvolutionProcess:
    rates: np.ndarray
    K: float
    a: float
    omega: float
    potential: Optional[SinusoidalPotential] = None
    name: str = "diagonal"

    def __post_init__(self):
        rates = np.atleast_1d(np.asarray(self.rates, dtype=np.float64)).copy()
        if rates.ndim != 1 or rates.size == 0:
            raise ValueError("rates must be a non-empty vector")
        if not (self.K > 0 and self.a > 0 and self.omega > 0):
            raise ValueError("K, a and omega must be positive")
        rates.flags.writeable = False
        object.__setattr__(self, "rates", rates)

    @property
    def dim(self) -> int:
        return self.rates.size

    def exponent(self, t, s):
        """Log of the componentwise factor; broadcasts ``t``, ``s`` to ``(..., d)``."""
        t = np.asarray(t, dtype=np.float64)[..., None]
        s = np.asarray(s, dtype=np.float64)[..., None]
        out = self.rates * (t - s)
        if self.potential is not None:
            out = out + self.potential.integral(s, t)
        return out

    def factors(self, t, s):
        return np.exp(self.exponent(t, s))

    def apply(self, t, s, x):
        """U(t, s) x."""
        if t < s:
            raise ValueError("evolution runs forward only")
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.dim:
            raise ValueError(f"state has dimension {x.shape[-1]}, process {self.dim}")
        if t == s:
            return x.copy()
        return self.factors(t, s) * x

    def describe(self) -> str:
        pot = "none" if self.potential is None else (
            f"q(t) = {self.potential.mean:g} + {self.potential.amplitude:g}"
            f"*sin({self.potential.frequency:g} t)")
        return (f"{self.name}: d={self.dim} K={self.K:g} a={self.a:g} "
                f"omega={self.omega:g} potential={pot}")


def diagonal_process(rates, K: float = 1.0, a: Optional[float] = None,
                     omega: float = 1.0, potential=None,
                     name: str = "diagonal") -> EvolutionProcess:
    """Constant-rate process; ``a`` defaults to ``-max(rates)``."""
    rates = np.atleast_1d(np.asarray(rates, dtype=np.float64))
    if a is None:
        a = -float(np.max(rates))
    return EvolutionProcess(rates, K, a, omega, potential, name)


def scalar_process(a: float, K: float = 1.0, omega: float = 1.0) -> EvolutionProcess:
    return EvolutionProcess(np.array([-float(a)]), K, a, omega, None, "scalar")


# --- (H2) certification ----------------------------------------------------

def _as_states(x_samples, d):
    x = np.asarray(x_samples, dtype=np.float64).reshape(-1, d)
    return x, np.linalg.norm(x, axis=1)


def check_identity(proc: EvolutionProcess, times, x_samples) -> float:
    x, nx = _as_states(x_samples, proc.dim)
    t = np.asarray(times, dtype=np.float64)
    r = np.linalg.norm(proc.factors(t, t) * x - x, axis=1)
    ok = nx > 0
    return float(np.max(r[ok] / nx[ok], initial=0.0))


def check_cocycle(proc: EvolutionProcess, triples, x_samples) -> float:
    """Max ``||U(t,s)U(s,r)x - U(t,r)x|| / ||x||`` over the triples."""
    tsr = np.asarray(triples, dtype=np.float64).reshape(-1, 3)
    t, s, r = tsr.T
    if np.any(t < s) or np.any(s < r):
        raise ValueError("triples must satisfy t >= s >= r")
    x, nx = _as_states(x_samples, proc.dim)
    lhs = proc.factors(t, s) * (proc.factors(s, r) * x)
    rhs = proc.factors(t, r) * x
    ok = nx > 0
    res = np.linalg.norm(lhs - rhs, axis=1)
    return float(np.max(res[ok] / nx[ok], initial=0.0))


def check_periodicity_and_decay(proc: EvolutionProcess, pair_samples, x_samples):
    """Return (max periodicity residual, max decay excess).

    The periodicity residual is relative to ``||U(t,s)x||``; the decay
    excess is ``||U(t,s)x|| e^{a(t-s)} / ||x|| - K``.
    """
    ts = np.asarray(pair_samples, dtype=np.float64).reshape(-1, 2)
    t, s = ts.T
    if np.any(t < s):
        raise ValueError("pairs must satisfy t >= s")
    x, nx = _as_states(x_samples, proc.dim)
    base = proc.factors(t, s) * x
    shifted = proc.factors(t + proc.omega, s + proc.omega) * x
    nb = np.linalg.norm(base, axis=1)
    ok = (nx > 0) & (nb > 0)
    per = np.linalg.norm(shifted - base, axis=1)[ok] / nb[ok]
    # scale by e^{a(t-s)} per component, so nothing overflows
    scaled = np.exp(proc.exponent(t, s) + proc.a * (t - s)[:, None]) * x
    excess = np.linalg.norm(scaled, axis=1)[nx > 0] / nx[nx > 0] - proc.K
    return float(np.max(per, initial=0.0)), float(np.max(excess, initial=-proc.K))


def check_continuity(proc: EvolutionProcess, pair_samples, x_samples,
                     delta: float = 1e-6) -> float:
    """Largest ``||U(t+delta,s)x - U(t,s)x|| / (delta ||x||)`` seen."""
    ts = np.asarray(pair_samples, dtype=np.float64).reshape(-1, 2)
    t, s = ts.T
    x, nx = _as_states(x_samples, proc.dim)
    d = proc.factors(t + delta, s) * x - proc.factors(t, s) * x
    ok = nx > 0
    return float(np.max(np.linalg.norm(d, axis=1)[ok] / (delta * nx[ok]), initial=0.0))


def continuity_bound(proc: EvolutionProcess) -> float:
    """Lipschitz-in-t bound ``K (max|rate| + max|q|)`` with room for O(delta) terms."""
    q = 0.0
    if proc.potential is not None:
        q = abs(proc.potential.mean) + abs(proc.potential.amplitude)
    return proc.K * (float(np.max(np.abs(proc.rates))) + q) * (1.0 + 1e-3)


@dataclass
class ProcessReport:
    identity: float
    cocycle: float
    periodicity: float
    decay_excess: float
    continuity: float
    continuity_bound: float
    n_samples: int
    seed: int
    tol: float = 1e-12

    @property
    def passed(self) -> bool:
        return (self.identity <= self.tol and self.cocycle <= self.tol
                and self.periodicity <= self.tol and self.decay_excess <= self.tol
                and self.continuity <= self.continuity_bound)

    def lines(self):
        return [
            f"identity_residual = {self.identity:.3e}",
            f"cocycle_residual = {self.cocycle:.3e}",
            f"periodicity_residual = {self.periodicity:.3e}",
            f"decay_excess = {self.decay_excess:.3e}",
            f"continuity_modulus = {self.continuity:.6g}",
            f"continuity_bound = {self.continuity_bound:.6g}",
            f"samples = {self.n_samples}",
            f"seed = {self.seed}",
            f"tolerance = {self.tol:g}",
            f"verdict = {'pass' if self.passed else 'fail'}",
        ]


def sample_arguments(n_samples: int, dim: int, seed: int = 0, t_max: float = 20.0):
    """Random ``(t, s, r)`` with ``t >= s >= r >= 0`` and Gaussian states.

    Times lie on a 2**-20 lattice so that shifting by a dyadic period and
    taking differences are exact in floating point.
    """
    rng = np.random.default_rng(seed)
    lattice = 2.0 ** 20
    r = np.round(rng.uniform(0, t_max, n_samples) * lattice) / lattice
    s = r + np.round(rng.uniform(0, t_max, n_samples) * lattice) / lattice
    t = s + np.round(rng.uniform(0, t_max, n_samples) * lattice) / lattice
    x = rng.normal(size=(n_samples, dim))
    return t, s, r, x


def certify_process(proc: EvolutionProcess, n_samples: int = 10_000, seed: int = 0,
                    t_max: float = 20.0, tol: float = 1e-12) -> ProcessReport:
    """Run identity, cocycle, continuity, periodicity and decay checks."""
    t, s, r, x = sample_arguments(n_samples, proc.dim, seed, t_max)
    pairs = np.column_stack([t, s])
    per, excess = check_periodicity_and_decay(proc, pairs, x)
    return ProcessReport(
        identity=check_identity(proc, t, x),
        cocycle=check_cocycle(proc, np.column_stack([t, s, r]), x),
        periodicity=per,
        decay_excess=excess,
        continuity=check_continuity(proc, pairs, x),
        continuity_bound=continuity_bound(proc),
        n_samples=n_samples,
        seed=seed,
        tol=tol,
    )


# --- nonlinearities ---------------------------------------------------------

def standard_drive(t):
    """The asymptotically 2-periodic scalar drive sin(pi t) + 1/(1 + t)."""
    t = np.asarray(t, dtype=np.float64)
    return np.sin(np.pi * t) + 1.0 / (1.0 + t)


@dataclass(frozen=True, eq=False)
class Nonlinearity:
    """Forcing ``f(t, x)``; ``func`` is vectorised: ``(k,), (k, d) -> (k, d)``."""

    func: Callable[[np.ndarray, np.ndarray], np.ndarray]
    dim: int
    lipschitz: float
    omega: float
    name: str = "custom"

    def __post_init__(self):
        if self.dim < 1 or self.lipschitz < 0 or not self.omega > 0:
            raise ValueError("need dim >= 1, lipschitz >= 0 and omega > 0")

    def evaluate(self, t, x) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=np.float64))
        x = np.asarray(x, dtype=np.float64).reshape(t.size, -1)
        if x.shape[1] != self.dim:
            raise ValueError(f"dimension mismatch: expected {self.dim}, got {x.shape[1]}")
        return np.asarray(self.func(t, x), dtype=np.float64).reshape(t.size, self.dim)

    def __call__(self, t, x):
        return self.evaluate([t], np.atleast_1d(x)[None, :])[0]


def _drive_matrix(drive, dim, index):
    if drive is None:
        return lambda t: np.zeros((t.size, dim))

    def g(t):
        out = np.zeros((t.size, dim))
        out[:, index] = drive(t)
        return out
    return g


def zero_nonlinearity(dim: int = 1, omega: float = 1.0) -> Nonlinearity:
    return Nonlinearity(lambda t, x: np.zeros_like(x), dim, 0.0, omega, "zero")


def affine(coef, drive=None, dim: int = 1, omega: float = 1.0,
           drive_index: int = 0) -> Nonlinearity:
    """``f(t, x) = M x + g(t) e_i`` with ``M`` a scalar or a matrix."""
    M = np.asarray(coef, dtype=np.float64)
    if M.ndim == 0:
        M = float(M) * np.eye(dim)
    L = float(np.linalg.norm(M, 2))
    g = _drive_matrix(drive, dim, drive_index)
    return Nonlinearity(lambda t, x: x @ M.T + g(t), dim, L, omega, "affine")


def sine_state(beta: float, drive=None, dim: int = 1, omega: float = 2.0,
               drive_index: int = 0) -> Nonlinearity:
    """``f(t, x) = beta sin(x) + g(t) e_i``; Lipschitz ``|beta|``."""
    g = _drive_matrix(drive, dim, drive_index)
    return Nonlinearity(lambda t, x: beta * np.sin(x) + g(t), dim, abs(beta),
                        omega, "sine")


def rational_state(beta: float, drive=None, dim: int = 1, omega: float = 2.0,
                   drive_index: int = 0) -> Nonlinearity:
    """``f(t, x) = beta x/(1+x^2) + g(t) e_i``; ``|d/dx x/(1+x^2)| <= 1``."""
    g = _drive_matrix(drive, dim, drive_index)
    return Nonlinearity(lambda t, x: beta * x / (1.0 + x * x) + g(t), dim,
                        abs(beta), omega, "rational")


def ramp(dim: int = 1, omega: float = 1.0) -> Nonlinearity:
    """``f(t, x) = t``: unbounded, so not asymptotically periodic."""
    return Nonlinearity(lambda t, x: np.repeat(t[:, None], dim, axis=1), dim, 0.0,
                        omega, "ramp")


def validate_nonlinearity(f: Nonlinearity, sample_box=(-10.0, 10.0),
                          n_samples: int = 2000, seed: int = 0) -> float:
    """Raise if sampled slopes exceed the declared Lipschitz constant."""
    from .function_space import lipschitz_estimate

    est = lipschitz_estimate(f, sample_box, n_samples, seed=seed)
    if est > f.lipschitz * (1.0 + 1e-9):
        raise ValueError(
            f"observed Lipschitz ratio {est:.6g} exceeds declared {f.lipschitz:.6g}")
    return est


def load_process(filename) -> EvolutionProcess:
    """Build a process from a ``key = value`` file.

    Keys: ``kind`` (``diagonal`` or ``heat``); for ``diagonal`` a
    comma-separated ``rates`` list; for ``heat`` the number of ``modes``;
    optional ``K``, ``a``, ``omega`` and ``potential`` (``none`` or
    ``heat``, the potential -3 + sin(pi t)).
    """
    from .io import read_kv_file

    cfg = read_kv_file(filename)
    allowed = {"kind", "rates", "modes", "k", "a", "omega", "potential"}
    unknown = sorted(set(cfg) - allowed)
    if unknown:
        raise ValueError(f"unknown process key {unknown[0]!r}")
    kind = cfg.get("kind", "diagonal")
    pot = cfg.get("potential", "heat" if kind == "heat" else "none")
    if pot not in ("none", "heat"):
        raise ValueError(f"unknown potential {pot!r}")
    potential = HEAT_POTENTIAL if pot == "heat" else None
    if kind == "heat":
        n = int(cfg.get("modes", 16))
        rates = -np.arange(1, n + 1, dtype=np.float64) ** 2
        a_default, omega_default = 3.0, 2.0
    elif kind == "diagonal":
        if "rates" not in cfg:
            raise ValueError("diagonal process needs 'rates'")
        rates = np.array([float(r) for r in cfg["rates"].split(",")])
        a_default = -float(np.max(rates))
        omega_default = 2.0 if potential is not None else 1.0
        if potential is not None:
            # q <= mean + |amplitude| pointwise
            a_default -= potential.mean + abs(potential.amplitude)
    else:
        raise ValueError(f"unknown process kind {kind!r}")
    return EvolutionProcess(
        rates,
        float(cfg.get("k", 1.0)),
        float(cfg.get("a", a_default)),
        float(cfg.get("omega", omega_default)),
        potential,
        kind,
    )
