"""Fixed-step RK4 integration of the interaction-picture Lindblad equation.

The full counter-rotating Hamiltonian is kept (no rotating-wave approximation)
so these trajectories serve as the brute-force reference for the closed-form
probabilities in :mod:`ghzmag.analytic`. Units: hbar = 1, frequencies and
rates in units of the qubit frequency.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import quantum
from .quantum import ProbeState, Scheme

NOISE_KINDS = ("none", "parallel", "depolarizing")
PARALLEL_FORMS = ("halved", "canonical")
KRAUS_L_MAX = 3


class IntegrationError(RuntimeError):
    pass


class LeadingOrderWarning(UserWarning):
    """eps * t * L left the regime where first-order formulas can be trusted."""


@dataclass(frozen=True)
class NoiseModel:
    """Markovian noise acting on every qubit.

    ``kind`` is ``"none"``, ``"parallel"`` (sigma_X jump operator, rate
    Gamma_X) or ``"depolarizing"`` (global depolarization, rate Gamma_DP).
    ``parallel_form`` picks the sigma_X dissipator normalisation: ``"halved"``
    keeps a ``-rho/2`` constant term, ``"canonical"`` uses the
    trace-preserving ``-rho``.
    """

    kind: str = "none"
    rate: float = 0.0
    parallel_form: str = "canonical"

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.parallel_form not in PARALLEL_FORMS:
            raise ValueError(f"unknown parallel-noise form {self.parallel_form!r}")
        if not self.rate >= 0:
            raise ValueError(f"noise rate must be >= 0, got {self.rate}")
        if self.kind == "none" and self.rate != 0:
            object.__setattr__(self, "rate", 0.0)

    @classmethod
    def parallel(cls, gamma_x: float, form: str = "canonical") -> "NoiseModel":
        return cls("parallel", gamma_x, form)

    @classmethod
    def depolarizing(cls, gamma_dp: float) -> "NoiseModel":
        return cls("depolarizing", gamma_dp)

    @property
    def gamma_x(self) -> float:
        return self.rate if self.kind == "parallel" else 0.0

    @property
    def gamma_dp(self) -> float:
        return self.rate if self.kind == "depolarizing" else 0.0


@dataclass(frozen=True)
class SystemParams:
    omega: float = 1.0
    m: float = 0.0
    epsilon: float = 0.0
    L: int = 1
    noise: NoiseModel = field(default_factory=NoiseModel)

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError("omega must be positive")
        if not self.m >= 0:
            raise ValueError("signal frequency m must be >= 0")
        if not self.epsilon >= 0:
            raise ValueError("signal amplitude epsilon must be >= 0")
        if int(self.L) != self.L or self.L < 1:
            raise ValueError(f"L must be a positive integer, got {self.L!r}")

    def leading_order_ok(self, t: float, threshold: float = 0.1) -> bool:
        return self.epsilon * t * self.L <= threshold


@dataclass(frozen=True)
class IntegratorConfig:
    dt_max: float = 0.05
    steps_per_fast_period: int = 40

    def __post_init__(self):
        if self.steps_per_fast_period < 40:
            raise ValueError("steps_per_fast_period must be >= 40")
        if not self.dt_max > 0:
            raise ValueError("dt_max must be positive")

    def step_bound(self, p: SystemParams) -> float:
        return min(self.dt_max, 2 * math.pi / ((p.omega + p.m) * self.steps_per_fast_period))


def drive_coefficients(t: float, p: SystemParams) -> tuple[float, float]:
    """Coefficients ``(a, b)`` of ``H_I = a * sum_j X_j + b * sum_j Y_j``."""
    wp = p.omega + p.m
    wm = p.omega - p.m
    a = -p.epsilon * (math.cos(wp * t) + math.cos(wm * t))
    b = -p.epsilon * (math.sin(wp * t) + math.sin(wm * t))
    return a, b


def interaction_hamiltonian(t: float, p: SystemParams) -> np.ndarray:
    a, b = drive_coefficients(t, p)
    return a * quantum.collective_pauli("X", p.L) + b * quantum.collective_pauli("Y", p.L)


@lru_cache(maxsize=32)
def _bitflip_permutations(L: int) -> tuple[np.ndarray, ...]:
    # sigma_X on qubit j permutes basis index k -> k ^ (1 << (L - j))
    idx = np.arange(2**L)
    return tuple(idx ^ (1 << (L - j)) for j in range(1, L + 1))


def _sum_x_sandwich(rho: np.ndarray, L: int) -> np.ndarray:
    out = np.zeros_like(rho)
    for perm in _bitflip_permutations(L):
        out += rho[np.ix_(perm, perm)]
    return out


def dissipator_parallel(rho: np.ndarray, gamma_x: float, L: int, form: str = "halved") -> np.ndarray:
    """Independent sigma_X noise on each qubit.

    ``form="halved"``: ``(G/2) sum_j (X_j rho X_j - rho/2)``, which does
    not preserve the trace.
    ``form="canonical"``: ``(G/2) sum_j (X_j rho X_j - rho)``.
    """
    if form not in PARALLEL_FORMS:
        raise ValueError(f"unknown parallel-noise form {form!r}")
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2**L, 2**L):
        raise ValueError(f"rho has shape {rho.shape}, expected {(2**L, 2**L)}")
    if gamma_x == 0:
        return np.zeros_like(rho)
    c = 0.5 if form == "halved" else 1.0
    return 0.5 * gamma_x * (_sum_x_sandwich(rho, L) - c * L * rho)


def dissipator_depolarizing(rho: np.ndarray, gamma_dp: float, L: int) -> np.ndarray:
    """``-L G rho + (L G / 2**L) * 1``."""
    rho = np.asarray(rho, dtype=complex)
    dim = 2**L
    if rho.shape != (dim, dim):
        raise ValueError(f"rho has shape {rho.shape}, expected {(dim, dim)}")
    return -L * gamma_dp * rho + (L * gamma_dp / dim) * np.eye(dim)


@lru_cache(maxsize=8)
def _nonidentity_pauli_strings(L: int) -> np.ndarray:
    return np.array([m for _, m in quantum.all_pauli_strings(L, include_identity=False)])


def dissipator_depolarizing_kraus(rho: np.ndarray, gamma_dp: float, L: int) -> np.ndarray:
    """Depolarization written with the ``4**L - 1`` Pauli-string jump operators.

    Each jump operator is ``sqrt(L G) / 2**L`` times a non-identity Pauli
    string. Only enumerated up to ``L = 3``.
    """
    if L > KRAUS_L_MAX:
        raise ValueError(f"Pauli-string enumeration limited to L <= {KRAUS_L_MAX}, got {L}")
    rho = np.asarray(rho, dtype=complex)
    dim = 2**L
    if rho.shape != (dim, dim):
        raise ValueError(f"rho has shape {rho.shape}, expected {(dim, dim)}")
    ops = math.sqrt(L * gamma_dp) / dim * _nonidentity_pauli_strings(L)
    ops_dag = ops.conj().transpose(0, 2, 1)
    ldl = ops_dag @ ops
    terms = ops @ rho @ ops_dag - 0.5 * (ldl @ rho + rho @ ldl)
    return terms.sum(axis=0)


def dissipator(rho: np.ndarray, p: SystemParams) -> np.ndarray:
    noise = p.noise
    if noise.kind == "parallel":
        return dissipator_parallel(rho, noise.rate, p.L, form=noise.parallel_form)
    if noise.kind == "depolarizing":
        return dissipator_depolarizing(rho, noise.rate, p.L)
    return np.zeros_like(rho)


def lindblad_rhs(t: float, rho: np.ndarray, p: SystemParams) -> np.ndarray:
    h = interaction_hamiltonian(t, p)
    return -1j * (h @ rho - rho @ h) + dissipator(rho, p)


def _rk4_span(rho: np.ndarray, t0: float, t1: float, p: SystemParams, dt_bound: float):
    span = t1 - t0
    if span <= 0:
        return rho
    n = max(1, math.ceil(span / dt_bound - 1e-9))
    dt = span / n
    if dt <= 0 or t0 + dt == t0:
        raise IntegrationError(f"step size underflow (dt={dt:.3e} at t={t0:.3e})")
    t = t0
    for k in range(n):
        t = t0 + k * dt
        k1 = lindblad_rhs(t, rho, p)
        k2 = lindblad_rhs(t + dt / 2, rho + (dt / 2) * k1, p)
        k3 = lindblad_rhs(t + dt / 2, rho + (dt / 2) * k2, p)
        k4 = lindblad_rhs(t + dt, rho + dt * k3, p)
        rho = rho + (dt / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
    return rho


def _check_evolved(rho: np.ndarray, p: SystemParams, t: float):
    v = quantum.density_matrix_violations(rho)
    bad = []
    if v["hermiticity"] > 10 * quantum.TOL_HERM:
        bad.append(f"hermiticity defect {v['hermiticity']:.3e}")
    trace_preserving = not (p.noise.kind == "parallel" and p.noise.parallel_form == "halved")
    if trace_preserving:
        if v["trace"] > 10 * quantum.TOL_TRACE:
            bad.append(f"trace defect {v['trace']:.3e}")
        if v["negativity"] > 10 * quantum.TOL_PSD:
            bad.append(f"negative eigenvalue {-v['negativity']:.3e}")
    if bad:
        raise IntegrationError(f"density-matrix invariants violated at t={t:g}: " + "; ".join(bad))


def _warn_leading_order(p: SystemParams, t: float):
    if not p.leading_order_ok(t):
        warnings.warn(f"eps*t*L = {p.epsilon * t * p.L:.3g} > 0.1 at t={t:g}",
                      LeadingOrderWarning, stacklevel=3)


def evolve(rho0: np.ndarray, t_final: float, p: SystemParams,
           cfg: IntegratorConfig | None = None, dt: float | None = None) -> np.ndarray:
    """Integrate from ``t = 0`` to ``t_final`` with classical RK4.

    ``dt`` overrides the step bound from ``cfg`` (used for convergence
    studies). Raises :class:`IntegrationError` when Hermiticity, trace or
    positivity drift beyond ten times the declared tolerances.
    """
    cfg = cfg or IntegratorConfig()
    if t_final < 0:
        raise ValueError("t_final must be >= 0")
    rho = np.array(rho0, dtype=complex)
    if rho.shape != (2**p.L, 2**p.L):
        raise ValueError(f"rho0 has shape {rho.shape}, expected {(2**p.L, 2**p.L)}")
    _warn_leading_order(p, t_final)
    rho = _rk4_span(rho, 0.0, float(t_final), p, dt or cfg.step_bound(p))
    _check_evolved(rho, p, t_final)
    return rho


def probability_trace(p: SystemParams, probe: ProbeState, times,
                      cfg: IntegratorConfig | None = None) -> list[tuple[float, float]]:
    """Projection probability on a time grid from a single integration pass."""
    cfg = cfg or IntegratorConfig()
    times = [float(t) for t in times]
    if not times:
        raise ValueError("time grid is empty")
    if times[0] < 0 or any(b <= a for a, b in zip(times, times[1:])):
        raise ValueError("time grid must be non-negative and strictly increasing")
    if probe.nqubits != p.L:
        raise ValueError("probe and system disagree on the qubit count")
    _warn_leading_order(p, times[-1])
    rho = quantum.initial_state(probe)
    proj = quantum.projector_y(probe)
    bound = cfg.step_bound(p)
    out = []
    t_prev = 0.0
    for t in times:
        rho = _rk4_span(rho, t_prev, t, p, bound)
        _check_evolved(rho, p, t)
        out.append((t, quantum.projection_probability(rho, proj)))
        t_prev = t
    return out


def ghz_coherence(rho: np.ndarray, L: int) -> complex:
    """``<+|^L rho |->^L``."""
    plus = quantum.ghz_ket(L, 1.0) + quantum.ghz_ket(L, -1.0)
    minus = quantum.ghz_ket(L, 1.0) - quantum.ghz_ket(L, -1.0)
    plus /= np.sqrt(2)
    minus /= np.sqrt(2)
    return complex(plus.conj() @ rho @ minus)


def probe_for(p: SystemParams, scheme: Scheme | str) -> ProbeState:
    return ProbeState(Scheme(scheme), p.L)
