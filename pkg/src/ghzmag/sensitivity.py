"""Amplitude uncertainty, interrogation-time optimisation and GHZ/individual ratios.

Everything is evaluated at the ``eps = 0`` working point. ``T`` only enters as
an overall ``1/sqrt(T)``, so the ``*_norm`` quantities report ``sqrt(T) * d_eps``
and work with an unbounded budget (``T = inf``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .analytic import window
from .lindblad import SystemParams
from .quantum import Scheme

DETUNING_LIMITED = "detuning-limited"
DECOHERENCE_LIMITED = "decoherence-limited"
CROSSOVER = "crossover"
CROSSOVER_BAND = 3.0


class OptimizationError(RuntimeError):
    pass


@dataclass(frozen=True)
class MeasurementBudget:
    """Total time ``T`` shared by ``L`` qubits used with one ``scheme``."""

    T: float = math.inf
    L: int = 1
    scheme: Scheme = Scheme.INDIVIDUAL

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        if not self.T > 0:
            raise ValueError("total time T must be positive")
        if int(self.L) != self.L or self.L < 1:
            raise ValueError(f"L must be a positive integer, got {self.L!r}")

    def repetitions(self, t):
        """Number of measurement records ``N_r`` (treated as a real number)."""
        per_run = self.L if self.scheme is Scheme.INDIVIDUAL else 1
        return per_run * self.T / np.asarray(t, dtype=float)


@dataclass(frozen=True)
class SensitivityResult:
    t_opt: float
    delta_eps_norm: float
    delta_eps: float
    regime: str
    validity: str = "ok"


@dataclass(frozen=True)
class AsymptoticEstimate:
    """Order-of-magnitude optimum; ``branches`` holds both regime values."""

    delta_eps_norm: float
    delta_eps: float
    regime: str
    branches: dict


def delta_p(p, n_r):
    """Binomial shot-noise uncertainty ``sqrt(p (1 - p) / N_r)``."""
    p = np.asarray(p, dtype=float)
    if np.any((p < 0) | (p > 1)):
        raise ValueError("probability outside [0, 1]")
    if np.any(np.asarray(n_r) <= 0):
        raise ValueError("N_r must be positive")
    out = np.sqrt(p * (1 - p) / n_r)
    return out if out.ndim else float(out)


def _check(params: SystemParams, budget: MeasurementBudget):
    if params.L != budget.L:
        raise ValueError(f"params.L={params.L} but budget.L={budget.L}")
    if params.noise.kind not in ("none", "parallel", "depolarizing"):
        raise ValueError(f"unsupported noise {params.noise.kind!r}")


def delta_epsilon_norm(t, params: SystemParams, scheme) -> np.ndarray | float:
    """``sqrt(T) * d_eps`` at evolution time ``t`` (vectorised in ``t``).

    Window nodes (W = 0) give ``inf``. A one-qubit GHZ probe is the same as a
    single individual qubit, so ``L = 1`` always uses the individual formula.
    """
    scheme = Scheme(scheme)
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise ValueError("evolution time must be positive")
    L, g = params.L, params.noise.rate
    w = np.abs(window(t, params.omega, params.m))
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        if scheme is Scheme.INDIVIDUAL or L == 1:
            num = 0.5 * np.exp(g * t)
            den = np.sqrt(t * L) * w
        elif params.noise.kind == "depolarizing":
            num = np.sqrt(np.exp(L * g * t) / 2 - 0.25)
            den = L * np.sqrt(t) * w
        else:
            num = 0.5 * np.exp(L * g * t)
            den = L * np.sqrt(t) * w
        out = np.where(w == 0, np.inf, num / den)
    out = np.where(np.isnan(out), np.inf, out)
    return out if out.ndim else float(out)


def delta_epsilon(t, params: SystemParams, budget: MeasurementBudget):
    """Uncertainty of the amplitude estimate for one interrogation time ``t``."""
    _check(params, budget)
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr > budget.T):
        raise ValueError("evolution time exceeds the total budget T")
    out = np.asarray(delta_epsilon_norm(t_arr, params, budget.scheme)) / math.sqrt(budget.T)
    return out if out.ndim else float(out)


def effective_rate(params: SystemParams, scheme) -> float:
    g = params.noise.rate
    return params.L * g if Scheme(scheme) is Scheme.GHZ else g


def classify_regime(params: SystemParams, scheme) -> str:
    detuning = abs(params.omega - params.m)
    g_eff = effective_rate(params, scheme)
    if detuning == 0:
        return DECOHERENCE_LIMITED
    if g_eff == 0:
        return DETUNING_LIMITED
    r = g_eff / detuning
    if r <= 1 / CROSSOVER_BAND:
        return DETUNING_LIMITED
    if r >= CROSSOVER_BAND:
        return DECOHERENCE_LIMITED
    return CROSSOVER


def default_bracket(params: SystemParams, budget: MeasurementBudget) -> tuple[float, float]:
    lo = 1e-3 / (params.omega + params.m)
    detuning = abs(params.omega - params.m)
    g_eff = effective_rate(params, budget.scheme)
    scales = [1 / x for x in (g_eff, detuning) if x > 0]
    hi = 1e3 * max(scales) if scales else math.inf
    hi = min(budget.T, hi)
    if not math.isfinite(hi):
        raise OptimizationError("no detuning, no noise and unbounded T: optimum is at infinity")
    return lo, hi


def optimize_time(params: SystemParams, budget: MeasurementBudget,
                  bracket: tuple[float, float] | None = None,
                  points_per_decade: int = 2000) -> SensitivityResult:
    """Global minimiser of the uncertainty over ``t`` inside ``bracket``.

    A dense log-spaced scan locates the best basin (the window has nodes, so
    the objective is multimodal), then golden-section search in ``log t``
    polishes it. Ties on the grid go to the smallest ``t``.
    """
    _check(params, budget)
    lo, hi = bracket or default_bracket(params, budget)
    if not 0 < lo < hi or hi > budget.T:
        raise ValueError(f"invalid bracket ({lo}, {hi}) for T={budget.T}")
    n = max(3, int(math.ceil(math.log10(hi / lo) * points_per_decade)) + 1)
    grid = np.geomspace(lo, hi, n)
    vals = np.asarray(delta_epsilon_norm(grid, params, budget.scheme))
    best = float(np.min(vals))
    if not math.isfinite(best):
        raise OptimizationError("uncertainty is infinite over the whole bracket")
    i = int(np.flatnonzero(vals <= best * (1 + 1e-9))[0])

    validity = "ok"
    t_opt, f_opt = float(grid[i]), best
    if i == 0 or i == n - 1:
        validity = "boundary"
    else:
        def f(u):
            return float(delta_epsilon_norm(math.exp(u), params, budget.scheme))

        u = np.log(grid[i - 1:i + 2])
        if vals[i] < vals[i - 1] and vals[i] < vals[i + 1]:
            res = optimize.minimize_scalar(f, bracket=tuple(u), method="golden",
                                           options={"xtol": 1e-10})
            if res.fun < f_opt and u[0] <= res.x <= u[2]:
                t_opt, f_opt = math.exp(res.x), float(res.fun)

    return SensitivityResult(
        t_opt=t_opt,
        delta_eps_norm=f_opt,
        delta_eps=f_opt / math.sqrt(budget.T),
        regime=classify_regime(params, budget.scheme),
        validity=validity,
    )


def asymptotic_delta_epsilon(params: SystemParams, budget: MeasurementBudget) -> AsymptoticEstimate:
    """Piecewise optimum up to O(1) factors.

    Individual: ``sqrt(|w-m|/T)/sqrt(L)`` when ``G < |w-m|``, else
    ``sqrt(G/T)/sqrt(L)``. GHZ: ``sqrt(|w-m|/T)/L`` when ``L G < |w-m|``,
    else ``sqrt(G/T)/sqrt(L)``. Same shape for both noise models.
    """
    _check(params, budget)
    L, g = params.L, params.noise.rate
    detuning = abs(params.omega - params.m)
    if budget.scheme is Scheme.GHZ:
        det_branch = math.sqrt(detuning) / L
    else:
        det_branch = math.sqrt(detuning / L)
    dec_branch = math.sqrt(g / L)
    branches = {DETUNING_LIMITED: det_branch, DECOHERENCE_LIMITED: dec_branch}
    regime = classify_regime(params, budget.scheme)
    strict = DETUNING_LIMITED if effective_rate(params, budget.scheme) < detuning else DECOHERENCE_LIMITED
    value = branches[strict]
    return AsymptoticEstimate(value, value / math.sqrt(budget.T), regime, branches)


def optimized_pair(params: SystemParams, T: float = math.inf, **kwargs):
    """``(individual, ghz)`` optimisation results for the same ``L`` and ``T``."""
    out = []
    for scheme in (Scheme.INDIVIDUAL, Scheme.GHZ):
        out.append(optimize_time(params, MeasurementBudget(T, params.L, scheme), **kwargs))
    return tuple(out)


def ratio(params: SystemParams, T: float = math.inf, **kwargs) -> float:
    """``d_eps(GHZ) / d_eps(individual)``, each at its own optimal time."""
    indv, ghz = optimized_pair(params, T, **kwargs)
    return ghz.delta_eps_norm / indv.delta_eps_norm
