"""Leading-order closed forms: window function, signal integrals, probabilities.

All functions broadcast over ``t``. Probability functions return a
:class:`Probability` pair so callers can see when ``eps * t * L`` has left the
first-order regime; values are never clamped.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .lindblad import SystemParams
from .quantum import Scheme

SINC_SERIES_CUTOFF = 1e-4
PHI1_SERIES_CUTOFF = 1e-6
LEADING_ORDER_LIMIT = 0.1


def sinc(x):
    """``sin(x)/x`` with a Taylor branch for ``|x| < 1e-4``."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < SINC_SERIES_CUTOFF
    safe = np.where(small, 1.0, x)
    x2 = x * x
    out = np.where(small, 1.0 - x2 / 6.0 + x2 * x2 / 120.0, np.sin(safe) / safe)
    return out if out.ndim else float(out)


def window(t, omega: float, m: float):
    """Effective signal window ``W(t) = sinc((w+m)t) + sinc((w-m)t)``; W(0) = 2."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("window is defined for t >= 0")
    return sinc((omega + m) * t) + sinc((omega - m) * t)


def _phi1(z):
    # (e^z - 1)/z for complex z, series near zero
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < PHI1_SERIES_CUTOFF
    safe = np.where(small, 1.0, z)
    return np.where(small, 1.0 + z / 2.0 + z * z / 6.0, np.expm1(safe) / safe)


def _sin_exp_integral(t, k: float, a: float):
    # int_0^t sin(k t') e^{a t'} dt' = Im[t * phi1((a + ik) t)]
    return np.imag(t * _phi1((a + 1j * k) * t))


def signal_integrals(t, omega: float, m: float, gamma: float):
    """``(S_minus, S_plus, C)`` for the single-qubit coefficient solution.

    ``S_-+(t) = int_0^t cos(m t') sin(w t') exp(-+gamma t') dt'`` and
    ``C(t) = int_0^t cos(m t') cos(w t') dt' = t W(t) / 2``.
    """
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("signal integrals are defined for t >= 0")
    wp, wm = omega + m, omega - m

    def s(a):
        return 0.5 * (_sin_exp_integral(t, wp, a) + _sin_exp_integral(t, wm, a))

    c = 0.5 * t * window(t, omega, m)
    out = (s(-gamma), s(gamma), c)
    if t.ndim == 0:
        return tuple(float(v) for v in out)
    return out


@dataclass(frozen=True)
class CoefficientSet:
    """Single-qubit operator in the ``{|+>, |->}`` basis."""

    c_pp: complex
    c_mm: complex
    c_pm: complex
    c_mp: complex

    @classmethod
    def from_matrix(cls, op) -> "CoefficientSet":
        """Coefficients of a 2x2 computational-basis operator."""
        plus = np.array([1, 1]) / np.sqrt(2)
        minus = np.array([1, -1]) / np.sqrt(2)
        op = np.asarray(op, dtype=complex)
        return cls(plus @ op @ plus, minus @ op @ minus, plus @ op @ minus, minus @ op @ plus)

    def to_matrix(self) -> np.ndarray:
        plus = np.array([1, 1], dtype=complex) / np.sqrt(2)
        minus = np.array([1, -1], dtype=complex) / np.sqrt(2)
        return (self.c_pp * np.outer(plus, plus) + self.c_mm * np.outer(minus, minus)
                + self.c_pm * np.outer(plus, minus) + self.c_mp * np.outer(minus, plus))


def evolve_coefficients(init: CoefficientSet, t: float, params: SystemParams) -> CoefficientSet:
    """First-order-in-eps evolution of one qubit under sigma_X (parallel) noise."""
    if params.noise.kind not in ("none", "parallel"):
        raise ValueError("coefficient solution only covers parallel (or no) noise")
    g = params.noise.gamma_x
    eps = params.epsilon
    s_minus, s_plus, c = signal_integrals(t, params.omega, params.m, g)
    decay = np.exp(-g * t)
    coh = init.c_pm + init.c_mp
    pop = init.c_pp - init.c_mm
    return CoefficientSet(
        c_pp=init.c_pp - 2 * eps * s_minus * coh,
        c_mm=init.c_mm + 2 * eps * s_minus * coh,
        c_pm=decay * (1 + 4j * eps * c) * init.c_pm + 2 * eps * decay * s_plus * pop,
        c_mp=decay * (1 - 4j * eps * c) * init.c_mp + 2 * eps * decay * s_plus * pop,
    )


def y_probability(coeffs: CoefficientSet) -> float:
    """``<Y|O|Y>`` with ``|Y> = (|+> + i|->)/sqrt(2)``."""
    val = 0.5 * (coeffs.c_pp + coeffs.c_mm + 1j * coeffs.c_pm - 1j * coeffs.c_mp)
    return float(np.real(val))


class Probability(NamedTuple):
    value: float | np.ndarray
    validity: str


def _validity(eps, t, L):
    worst = float(np.max(eps * np.asarray(t) * max(L, 1)))
    return "ok" if worst <= LEADING_ORDER_LIMIT else "leading-order-suspect"


def _rate(params: SystemParams, kind: str) -> float:
    if params.noise.kind not in ("none", kind):
        raise ValueError(f"formula assumes {kind} noise, got {params.noise.kind}")
    return params.noise.rate


def p_individual_parallel(t, params: SystemParams) -> Probability:
    """``1/2 - eps t exp(-G_X t) W(t)`` for one uncorrelated qubit."""
    g = _rate(params, "parallel")
    t = np.asarray(t, dtype=float)
    eps = params.epsilon
    val = 0.5 - eps * t * np.exp(-g * t) * window(t, params.omega, params.m)
    return Probability(val, _validity(eps, t, 1))


def p_ghz_parallel(t, params: SystemParams) -> Probability:
    """``1/2 - exp(-L G_X t) L eps t W(t)``."""
    g = _rate(params, "parallel")
    t = np.asarray(t, dtype=float)
    L, eps = params.L, params.epsilon
    val = 0.5 - np.exp(-L * g * t) * L * eps * t * window(t, params.omega, params.m)
    return Probability(val, _validity(eps, t, L))


def p_ghz_depolarizing_exact(t, params: SystemParams) -> Probability:
    """Depolarizing-noise GHZ probability with the sin(2 L eps t W) signal term."""
    g = _rate(params, "depolarizing")
    t = np.asarray(t, dtype=float)
    L, eps = params.L, params.epsilon
    decay = np.exp(-L * g * t)
    floor = 0.5**L
    w = window(t, params.omega, params.m)
    val = floor + (0.5 - floor) * decay - 0.5 * decay * np.sin(2 * L * eps * t * w)
    return Probability(val, _validity(eps, t, L))


def p_individual_depolarizing(t, params: SystemParams) -> Probability:
    """``1/2 - exp(-G t) eps t W(t)``: the one-qubit, first-order reduction."""
    g = _rate(params, "depolarizing")
    t = np.asarray(t, dtype=float)
    eps = params.epsilon
    val = 0.5 - np.exp(-g * t) * eps * t * window(t, params.omega, params.m)
    return Probability(val, _validity(eps, t, 1))


def p_ghz_depolarizing_leading(t, params: SystemParams) -> Probability:
    """Large-L form: ``exp(-L G t)/2 - exp(-L G t) L eps t W(t)``."""
    g = _rate(params, "depolarizing")
    t = np.asarray(t, dtype=float)
    L, eps = params.L, params.epsilon
    decay = np.exp(-L * g * t)
    val = 0.5 * decay - decay * L * eps * t * window(t, params.omega, params.m)
    return Probability(val, _validity(eps, t, L))


def model_probability(t, params: SystemParams, scheme) -> Probability:
    """Closed form matching a numeric run of ``scheme`` under ``params.noise``.

    Individual qubits are uncorrelated, so the depolarizing case uses the
    exact expression at ``L = 1``.
    """
    scheme = Scheme(scheme)
    if params.noise.kind == "depolarizing":
        if scheme is Scheme.INDIVIDUAL:
            return p_ghz_depolarizing_exact(t, _single(params))
        return p_ghz_depolarizing_exact(t, params)
    if scheme is Scheme.INDIVIDUAL:
        return p_individual_parallel(t, params)
    return p_ghz_parallel(t, params)


def dp_depsilon(t, params: SystemParams, formula: str):
    """Analytic derivative of the named probability formula w.r.t. eps."""
    t = np.asarray(t, dtype=float)
    w = window(t, params.omega, params.m)
    g, L, eps = params.noise.rate, params.L, params.epsilon
    if formula == "individual_parallel" or formula == "individual_depolarizing":
        return -t * np.exp(-g * t) * w
    if formula == "ghz_parallel" or formula == "ghz_depolarizing_leading":
        return -np.exp(-L * g * t) * L * t * w
    if formula == "ghz_depolarizing_exact":
        return -np.exp(-L * g * t) * L * t * w * np.cos(2 * L * eps * t * w)
    raise ValueError(f"unknown formula {formula!r}")


FORMULAS = {
    "individual_parallel": p_individual_parallel,
    "ghz_parallel": p_ghz_parallel,
    "individual_depolarizing": p_individual_depolarizing,
    "ghz_depolarizing_exact": p_ghz_depolarizing_exact,
    "ghz_depolarizing_leading": p_ghz_depolarizing_leading,
}


def _single(params: SystemParams) -> SystemParams:
    return SystemParams(params.omega, params.m, params.epsilon, 1, params.noise)
