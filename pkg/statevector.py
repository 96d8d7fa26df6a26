"""
State Vector Module for the QAOA Desk Toolkit
Dense complex state vectors and the primitive unitaries every circuit is built from.

Conventions:
- Bit j of a basis index is the value of qubit j (qubit 0 is the least significant bit).
- Every unitary is U(theta) = exp(-i * theta * H).
- The XY pair Hamiltonian is (XX + YY)/2, whose matrix on span{|01>, |10>} is [[0, 1], [1, 0]],
  so beta = pi/2 moves all population from |01> to |10>.
"""

import logging
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence, Union

import numpy as np

logger = logging.getLogger(__name__)

MAX_QUBITS = 26
DUMP_MAGIC = b"AOAS"
DUMP_VERSION = 1


class StateSizeError(ValueError):
    """Qubit count or basis index outside the supported range"""


class DimensionMismatchError(ValueError):
    """State and cost table (or two states) disagree on the qubit count"""


@dataclass
class StateVector:
    """2^n complex amplitudes plus the qubit count"""

    n: int
    amps: np.ndarray

    def __post_init__(self):
        _check_qubits(self.n)
        self.amps = np.ascontiguousarray(self.amps, dtype=np.complex128)
        if self.amps.shape != (1 << self.n,):
            raise StateSizeError(f"Expected {1 << self.n} amplitudes for n={self.n}, got shape {self.amps.shape}")

    @property
    def dim(self) -> int:
        return 1 << self.n

    def copy(self) -> "StateVector":
        return StateVector(self.n, self.amps.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))


@dataclass
class DiagonalCost:
    """Cost value f(x) for every bitstring x; the diagonal of H_P"""

    n: int
    values: np.ndarray

    def __post_init__(self):
        _check_qubits(self.n)
        self.values = np.ascontiguousarray(self.values, dtype=np.float64)
        if self.values.shape != (1 << self.n,):
            raise StateSizeError(f"Expected {1 << self.n} cost values for n={self.n}, got shape {self.values.shape}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("Cost table contains non-finite values")

    def min(self) -> float:
        return float(self.values.min())

    def mean(self) -> float:
        return float(self.values.mean())

    def is_constant(self) -> bool:
        return bool(np.all(self.values == self.values[0]))

    def is_integer_valued(self) -> bool:
        return bool(np.all(self.values == np.round(self.values)))

    def shifted(self, c: float) -> "DiagonalCost":
        return DiagonalCost(self.n, self.values + c)


def _check_qubits(n: int):
    if not isinstance(n, (int, np.integer)) or n < 1 or n > MAX_QUBITS:
        raise StateSizeError(f"Qubit count must be in 1..{MAX_QUBITS}, got {n}")


def _check_same_size(state: StateVector, cost: DiagonalCost):
    if state.n != cost.n:
        raise DimensionMismatchError(f"State has {state.n} qubits but cost table has {cost.n}")


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------

def new_uniform(n: int) -> StateVector:
    """Uniform superposition |s>: every amplitude 2^(-n/2)"""
    _check_qubits(n)
    dim = 1 << n
    return StateVector(n, np.full(dim, 1.0 / np.sqrt(dim), dtype=np.complex128))


def new_basis(n: int, x: int) -> StateVector:
    """Computational basis state |x>"""
    _check_qubits(n)
    if x < 0 or x >= (1 << n):
        raise StateSizeError(f"Basis index {x} out of range for n={n}")
    amps = np.zeros(1 << n, dtype=np.complex128)
    amps[x] = 1.0
    return StateVector(n, amps)


def new_onehot_superposition(n: int, groups: Sequence[Sequence[int]]) -> StateVector:
    """
    Product over groups of the equal superposition of one-hot states of that group.
    Qubits outside every group stay in |0>.

    Args:
        n: Total qubit count
        groups: Disjoint lists of qubit indices

    Returns:
        StateVector supported only on states with exactly one set bit per group
    """
    _check_qubits(n)
    seen = set()
    for group in groups:
        if not group:
            raise ValueError("One-hot groups must be non-empty")
        for q in group:
            if q < 0 or q >= n:
                raise StateSizeError(f"Qubit {q} out of range for n={n}")
            if q in seen:
                raise ValueError(f"Qubit {q} appears in more than one group")
            seen.add(q)

    # Enumerate feasible indices as sums of one chosen bit per group
    indices = np.zeros(1, dtype=np.int64)
    for group in groups:
        bits = np.array([1 << q for q in group], dtype=np.int64)
        indices = (indices[:, None] + bits[None, :]).ravel()

    amps = np.zeros(1 << n, dtype=np.complex128)
    amps[indices] = 1.0 / np.sqrt(len(indices))
    return StateVector(n, amps)


# ---------------------------------------------------------------------------
# In-place kernels (callers own the array)
# ---------------------------------------------------------------------------

def _phase_inplace(amps: np.ndarray, values: np.ndarray, gamma: float):
    if gamma != 0.0:
        amps *= np.exp(-1j * gamma * values)


def _rx_inplace(amps: np.ndarray, n: int, q: int, beta: float):
    c, s = np.cos(beta), np.sin(beta)
    view = amps.reshape(1 << (n - 1 - q), 2, 1 << q)
    a0 = view[:, 0, :].copy()
    a1 = view[:, 1, :]
    view[:, 0, :] = c * a0 - 1j * s * a1
    view[:, 1, :] = -1j * s * a0 + c * a1


def _rx_all_inplace(amps: np.ndarray, n: int, beta: float):
    if beta == 0.0:
        return
    for q in range(n):
        _rx_inplace(amps, n, q, beta)


def _xy_inplace(amps: np.ndarray, n: int, i: int, j: int, beta: float):
    if beta == 0.0:
        return
    lo, hi = (i, j) if i < j else (j, i)
    c, s = np.cos(beta), np.sin(beta)
    view = amps.reshape(1 << (n - 1 - hi), 2, 1 << (hi - lo - 1), 2, 1 << lo)
    # hi=0, lo=1 and hi=1, lo=0 are the two states the pair rotation mixes
    a = view[:, 0, :, 1, :].copy()
    b = view[:, 1, :, 0, :]
    view[:, 0, :, 1, :] = c * a - 1j * s * b
    view[:, 1, :, 0, :] = -1j * s * a + c * b


def _check_pair(n: int, i: int, j: int):
    if i == j:
        raise ValueError(f"XY pair needs two distinct qubits, got ({i}, {j})")
    for q in (i, j):
        if q < 0 or q >= n:
            raise StateSizeError(f"Qubit {q} out of range for n={n}")


# ---------------------------------------------------------------------------
# Public operations (return new states)
# ---------------------------------------------------------------------------

def apply_diagonal_phase(state: StateVector, cost: DiagonalCost, gamma: float) -> StateVector:
    """Phase separator U_P(gamma): amplitude at x times exp(-i * gamma * f(x))"""
    _check_same_size(state, cost)
    out = state.copy()
    _phase_inplace(out.amps, cost.values, gamma)
    return out


def apply_rx_all(state: StateVector, beta: float) -> StateVector:
    """Transverse-field mixer exp(-i * beta * sum_j X_j)"""
    out = state.copy()
    _rx_all_inplace(out.amps, out.n, beta)
    return out


def apply_xy_pair(state: StateVector, i: int, j: int, beta: float) -> StateVector:
    """exp(-i * beta * (X_i X_j + Y_i Y_j) / 2); identity on the |00> and |11> sectors of (i, j)"""
    _check_pair(state.n, i, j)
    out = state.copy()
    _xy_inplace(out.amps, out.n, i, j, beta)
    return out


def probabilities(state: StateVector) -> np.ndarray:
    return np.abs(state.amps) ** 2


def expectation_diagonal(state: StateVector, cost: DiagonalCost) -> float:
    """sum_x |amp_x|^2 * f(x)"""
    _check_same_size(state, cost)
    return float(np.dot(probabilities(state), cost.values))


Predicate = Union[Callable[[int], bool], np.ndarray]


def predicate_mask(predicate: Predicate, n: int) -> np.ndarray:
    """Boolean mask over all 2^n indices for a predicate (callable, object with mask(n), or ready mask)"""
    if isinstance(predicate, np.ndarray):
        mask = predicate.astype(bool)
    elif hasattr(predicate, "mask"):
        mask = predicate.mask(n)
    else:
        mask = np.fromiter((bool(predicate(x)) for x in range(1 << n)), dtype=bool, count=1 << n)
    if mask.shape != (1 << n,):
        raise DimensionMismatchError(f"Predicate mask has shape {mask.shape}, expected ({1 << n},)")
    return mask


def subspace_probability(state: StateVector, predicate: Predicate) -> float:
    """Total probability of the basis states selected by predicate"""
    mask = predicate_mask(predicate, state.n)
    total = float(probabilities(state)[mask].sum())
    return min(max(total, 0.0), 1.0)


def overlap_up_to_phase(a: StateVector, b: StateVector) -> float:
    """|<a|b>|; equals 1 when the states agree up to a global phase"""
    if a.n != b.n:
        raise DimensionMismatchError(f"States have {a.n} and {b.n} qubits")
    return float(abs(np.vdot(a.amps, b.amps)))


# ---------------------------------------------------------------------------
# Binary dump
# ---------------------------------------------------------------------------

def save_state(state: StateVector, path: Union[str, Path]):
    """Write the AOAS dump: magic, u32 version, u32 n, then interleaved little-endian float64 re/im"""
    path = Path(path)
    body = np.empty(2 * state.dim, dtype="<f8")
    body[0::2] = state.amps.real
    body[1::2] = state.amps.imag
    with open(path, "wb") as f:
        f.write(DUMP_MAGIC)
        f.write(struct.pack("<II", DUMP_VERSION, state.n))
        f.write(body.tobytes())
    logger.debug(f"Saved {state.n}-qubit state to {path}")


def load_state(path: Union[str, Path]) -> StateVector:
    """Read a state written by save_state"""
    data = Path(path).read_bytes()
    if data[:4] != DUMP_MAGIC:
        raise ValueError(f"{path} is not a state dump (bad magic {data[:4]!r})")
    version, n = struct.unpack("<II", data[4:12])
    if version != DUMP_VERSION:
        raise ValueError(f"Unsupported state dump version {version}")
    _check_qubits(n)
    body = np.frombuffer(data[12:], dtype="<f8")
    if body.size != 2 << n:
        raise ValueError(f"State dump for n={n} should hold {2 << n} floats, found {body.size}")
    return StateVector(n, body[0::2] + 1j * body[1::2])
