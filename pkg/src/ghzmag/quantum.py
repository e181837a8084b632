"""Dense qubit operators, probe states and Y-basis projectors.

Operators are plain complex ``numpy`` arrays on the ``2**L`` dimensional
Hilbert space, ordered so that qubit 1 is the most significant tensor factor.
All states are interaction-picture objects in the computational basis
``{|0>, |1>}`` with ``|+-> = (|0> +- |1>)/sqrt(2)``.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from functools import lru_cache, reduce

import numpy as np

L_MAX = 12

TOL_HERM = 1e-10
TOL_TRACE = 1e-10
TOL_PSD = 1e-8

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = {"I": I2, "X": SX, "Y": SY, "Z": SZ}

KET_0 = np.array([1, 0], dtype=complex)
KET_1 = np.array([0, 1], dtype=complex)
KET_PLUS = (KET_0 + KET_1) / np.sqrt(2)
KET_MINUS = (KET_0 - KET_1) / np.sqrt(2)
KET_Y = (KET_PLUS + 1j * KET_MINUS) / np.sqrt(2)


class Scheme(str, enum.Enum):
    INDIVIDUAL = "individual"
    GHZ = "ghz"


@dataclass(frozen=True)
class ProbeState:
    scheme: Scheme
    nqubits: int

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        check_nqubits(self.nqubits)


def check_nqubits(L: int, l_max: int = L_MAX) -> int:
    if int(L) != L or L < 1:
        raise ValueError(f"qubit count must be a positive integer, got {L!r}")
    if L > l_max:
        raise ValueError(f"L={L} exceeds the dense-matrix limit L_max={l_max}")
    return int(L)


def tensor_product(a: np.ndarray, b: np.ndarray, l_max: int = L_MAX) -> np.ndarray:
    """Kronecker product, refusing results larger than ``2**l_max``."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.ndim != 2 or b.ndim != 2 or a.shape[0] != a.shape[1] or b.shape[0] != b.shape[1]:
        raise ValueError("tensor_product expects square matrices")
    dim = a.shape[0] * b.shape[0]
    if dim > 2**l_max:
        raise ValueError(f"dimension {dim} exceeds 2**{l_max}")
    return np.kron(a, b)


def kron_all(factors) -> np.ndarray:
    return reduce(np.kron, factors, np.ones((1, 1), dtype=complex))


def pauli_on_qubit(j: int, axis: str, L: int) -> np.ndarray:
    """``I^(j-1) (x) sigma_axis (x) I^(L-j)`` with 1-based qubit index ``j``."""
    L = check_nqubits(L)
    if not 1 <= j <= L:
        raise IndexError(f"qubit index {j} out of range 1..{L}")
    if axis not in ("X", "Y", "Z"):
        raise ValueError(f"unknown Pauli axis {axis!r}")
    return _pauli_on_qubit(j, axis, L).copy()


@lru_cache(maxsize=256)
def _pauli_on_qubit(j: int, axis: str, L: int) -> np.ndarray:
    out = np.kron(np.kron(np.eye(2 ** (j - 1)), PAULI[axis]), np.eye(2 ** (L - j)))
    out.setflags(write=False)
    return out


@lru_cache(maxsize=64)
def collective_pauli(axis: str, L: int) -> np.ndarray:
    """Sum over all qubits of ``sigma_axis^j``; cached and read-only."""
    out = sum(_pauli_on_qubit(j, axis, L) for j in range(1, L + 1))
    out.setflags(write=False)
    return out


def pauli_string(axes: str) -> np.ndarray:
    """Matrix of a Pauli string such as ``"XIZ"`` (one letter per qubit)."""
    check_nqubits(len(axes))
    try:
        return kron_all(PAULI[a] for a in axes)
    except KeyError as exc:
        raise ValueError(f"invalid Pauli string {axes!r}") from exc


def all_pauli_strings(L: int, include_identity: bool = True):
    """Yield ``(label, matrix)`` for every length-``L`` Pauli string."""
    for axes in itertools.product("IXYZ", repeat=L):
        label = "".join(axes)
        if not include_identity and set(label) == {"I"}:
            continue
        yield label, pauli_string(label)


def ghz_ket(L: int, phase: complex = 1.0) -> np.ndarray:
    """``(|+>^L + phase |->^L) / sqrt(2)``."""
    L = check_nqubits(L)
    plus = kron_all([KET_PLUS[:, None]] * L)[:, 0]
    minus = kron_all([KET_MINUS[:, None]] * L)[:, 0]
    return (plus + phase * minus) / np.sqrt(2)


def initial_state(probe: ProbeState) -> np.ndarray:
    """Pure initial density matrix of the probe.

    Individual qubits all start in ``|0>``; the GHZ probe starts in
    ``(|+>^L + |->^L)/sqrt(2)``. Both reduce to ``|0><0|`` for one qubit.
    """
    L = probe.nqubits
    if probe.scheme is Scheme.GHZ:
        psi = ghz_ket(L)
    else:
        psi = kron_all([KET_0[:, None]] * L)[:, 0]
    return np.outer(psi, psi.conj())


def projector_y(probe: ProbeState) -> np.ndarray:
    """Measurement projector for the scheme.

    For the individual scheme every qubit is measured separately and is
    statistically identical, so the single-qubit ``|Y><Y|`` is returned and
    applied to a one-qubit reduced state (see :func:`reduced_single_qubit`).
    For GHZ the ``2**L`` projector on ``(|+>^L + i|->^L)/sqrt(2)`` is returned.
    """
    if probe.scheme is Scheme.GHZ:
        v = ghz_ket(probe.nqubits, phase=1j)
    else:
        v = KET_Y
    return np.outer(v, v.conj())


def reduced_single_qubit(rho: np.ndarray, j: int = 1) -> np.ndarray:
    """Partial trace of ``rho`` onto qubit ``j`` (1-based)."""
    dim = rho.shape[0]
    L = int(round(np.log2(dim)))
    t = rho.reshape((2,) * (2 * L))
    keep = j - 1
    others = [k for k in range(L) if k != keep]
    # trace out the other qubits pairwise
    letters = "abcdefghijklmnopqrstuvwxyz"
    row = list(letters[:L])
    col = list(letters[L:2 * L])
    for k in others:
        col[k] = row[k]
    subs = "".join(row) + "".join(col) + "->" + row[keep] + col[keep]
    return np.einsum(subs, t)


def projection_probability(rho: np.ndarray, P: np.ndarray) -> float:
    """``Re tr[rho P]``; the imaginary residue must stay below 1e-10.

    When ``P`` is a single-qubit projector and ``rho`` a multi-qubit state the
    probability of qubit 1 is returned (individual scheme).
    """
    rho = np.asarray(rho)
    P = np.asarray(P)
    if P.shape == (2, 2) and rho.shape[0] > 2:
        rho = reduced_single_qubit(rho, 1)
    if rho.shape != P.shape:
        raise ValueError(f"dimension mismatch: rho {rho.shape} vs P {P.shape}")
    val = np.einsum("ij,ji->", rho, P)
    if abs(val.imag) >= 1e-10:
        raise ValueError(f"tr[rho P] has imaginary part {val.imag:.3e}")
    return float(val.real)


def density_matrix_violations(rho: np.ndarray) -> dict[str, float]:
    """Hermiticity, trace and positivity defects of ``rho``."""
    return {
        "hermiticity": float(np.max(np.abs(rho - rho.conj().T))),
        "trace": float(abs(np.trace(rho) - 1.0)),
        "negativity": float(max(0.0, -np.linalg.eigvalsh((rho + rho.conj().T) / 2).min())),
    }


def check_density_matrix(rho: np.ndarray, tol_herm=TOL_HERM, tol_trace=TOL_TRACE,
                         tol_psd=TOL_PSD) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("density matrix must be square")
    dim = rho.shape[0]
    if dim & (dim - 1) or dim < 2:
        raise ValueError(f"dimension {dim} is not 2**L")
    v = density_matrix_violations(rho)
    if v["hermiticity"] > tol_herm:
        raise ValueError(f"not Hermitian (max |rho - rho^H| = {v['hermiticity']:.3e})")
    if v["trace"] > tol_trace:
        raise ValueError(f"trace deviates from 1 by {v['trace']:.3e}")
    if v["negativity"] > tol_psd:
        raise ValueError(f"negative eigenvalue {-v['negativity']:.3e}")
    return rho


def random_density_matrix(L: int, rng: np.random.Generator, strength: float = 0.5) -> np.ndarray:
    """Seeded random state: maximally mixed state plus a scaled Hermitian kick.

    The perturbation is traceless and scaled so the smallest eigenvalue stays
    non-negative.
    """
    dim = 2 ** check_nqubits(L)
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    h = (a + a.conj().T) / 2
    h -= np.trace(h) / dim * np.eye(dim)
    lam = np.abs(np.linalg.eigvalsh(h)).max()
    return np.eye(dim) / dim + strength * h / (lam * dim)
