"""Dense state-vector core for small registers of polarization qubits.

Basis convention: |H> = 0, |V> = 1, qubit 0 is the most significant bit of
the amplitude index.  All values are immutable after construction; every
operation returns a fresh object.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Tolerance for exact algebraic identities (unitarity, idempotence, norms).
ATOL = 1e-12
# Looser tolerance for SVD-based decompositions.
ATOL_SVD = 1e-10

_SQRT2 = math.sqrt(2.0)

KET_H = np.array([1.0, 0.0], dtype=complex)
KET_V = np.array([0.0, 1.0], dtype=complex)
KET_D = np.array([1.0, 1.0], dtype=complex) / _SQRT2
KET_A = np.array([1.0, -1.0], dtype=complex) / _SQRT2
KET_R = np.array([1.0, -1.0j], dtype=complex) / _SQRT2
KET_L = np.array([1.0, 1.0j], dtype=complex) / _SQRT2


def _frozen_array(values, dtype=complex) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class StateVector:
    """Normalized pure state of ``num_qubits`` polarization qubits."""

    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if not 1 <= self.num_qubits <= 4:
            raise ValueError(f"num_qubits must be in 1..4, got {self.num_qubits}")
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != 2**self.num_qubits:
            raise ValueError(
                f"amplitude length {amps.size} != 2^{self.num_qubits}"
            )
        norm_sq = float(np.sum(np.abs(amps) ** 2))
        if abs(norm_sq - 1.0) > 1e-8:
            raise ValueError(f"state is not normalized: |psi|^2 = {norm_sq}")
        object.__setattr__(self, "amplitudes", _frozen_array(amps))

    def fidelity(self, other: "StateVector") -> float:
        """|<self|other>|^2; the global-phase-free comparison."""
        if self.num_qubits != other.num_qubits:
            raise ValueError("fidelity requires equal register sizes")
        return float(abs(np.vdot(self.amplitudes, other.amplitudes)) ** 2)


def state_from_amplitudes(amplitudes) -> StateVector:
    """Build a StateVector, inferring the register size from the length."""
    amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
    n = int(round(math.log2(amps.size)))
    return StateVector(num_qubits=n, amplitudes=amps)


def product_state(*kets) -> StateVector:
    """Tensor product of single-qubit kets (each a length-2 array)."""
    amps = np.array([1.0], dtype=complex)
    for ket in kets:
        amps = np.kron(amps, np.asarray(ket, dtype=complex))
    return state_from_amplitudes(amps)


def fidelity(a: StateVector, b: StateVector) -> float:
    return a.fidelity(b)


@dataclass(frozen=True)
class GateOp:
    """Unitary acting on one or two qubits."""

    dimension: int
    matrix: np.ndarray
    label: str = ""

    def __post_init__(self):
        if self.dimension not in (2, 4):
            raise ValueError(f"gate dimension must be 2 or 4, got {self.dimension}")
        mat = np.asarray(self.matrix, dtype=complex)
        if mat.shape != (self.dimension, self.dimension):
            raise ValueError(f"matrix shape {mat.shape} != dimension {self.dimension}")
        dev = np.max(np.abs(mat @ mat.conj().T - np.eye(self.dimension)))
        if dev > ATOL:
            raise ValueError(f"matrix is not unitary ({self.label!r}): |UU+ - I| = {dev}")
        object.__setattr__(self, "matrix", _frozen_array(mat))

    @property
    def num_qubits(self) -> int:
        return 1 if self.dimension == 2 else 2


@dataclass(frozen=True)
class Projector:
    """Hermitian idempotent operator on one or two qubits."""

    dimension: int
    matrix: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        if mat.shape != (self.dimension, self.dimension):
            raise ValueError(f"matrix shape {mat.shape} != dimension {self.dimension}")
        if np.max(np.abs(mat - mat.conj().T)) > ATOL:
            raise ValueError("projector is not Hermitian")
        if np.max(np.abs(mat @ mat - mat)) > ATOL:
            raise ValueError("projector is not idempotent")
        object.__setattr__(self, "matrix", _frozen_array(mat))

    @property
    def num_qubits(self) -> int:
        return int(round(math.log2(self.dimension)))


def projector_onto(ket) -> Projector:
    """Rank-1 projector |k><k| onto a (normalized) ket."""
    vec = np.asarray(ket, dtype=complex).reshape(-1)
    norm = np.linalg.norm(vec)
    if norm < 1e-12:
        raise ValueError("cannot project onto the zero vector")
    vec = vec / norm
    return Projector(dimension=vec.size, matrix=np.outer(vec, vec.conj()))


def _apply_matrix(amplitudes: np.ndarray, num_qubits: int, matrix: np.ndarray,
                  targets: tuple) -> np.ndarray:
    """Apply a (possibly non-unitary) operator on the target qubits.

    The matrix rows/columns are ordered with ``targets[0]`` as the most
    significant target bit.
    """
    k = len(targets)
    if matrix.shape != (2**k, 2**k):
        raise ValueError(
            f"operator dimension {matrix.shape[0]} does not match {k} target(s)"
        )
    if len(set(targets)) != k:
        raise ValueError(f"duplicate target index in {targets}")
    for t in targets:
        if not 0 <= t < num_qubits:
            raise ValueError(f"target {t} out of range for {num_qubits} qubits")
    psi = amplitudes.reshape([2] * num_qubits)
    rest = [i for i in range(num_qubits) if i not in targets]
    psi = np.transpose(psi, list(targets) + rest)
    psi = psi.reshape(2**k, -1)
    psi = matrix @ psi
    psi = psi.reshape([2] * num_qubits)
    inverse = np.argsort(list(targets) + rest)
    return np.transpose(psi, inverse).reshape(-1)


def apply_gate(state: StateVector, gate: GateOp, targets) -> StateVector:
    """Apply a unitary gate to the given ordered target qubits."""
    targets = tuple(targets)
    amps = _apply_matrix(state.amplitudes, state.num_qubits, gate.matrix, targets)
    return StateVector(num_qubits=state.num_qubits, amplitudes=amps)


def waveplate(kind: str, angle: float) -> GateOp:
    """Jones matrix of a half- or quarter-wave plate at the given angle.

    half(t)    = [[cos 2t, sin 2t], [sin 2t, -cos 2t]]
    quarter(0) = diag(1, i), rotated by conjugation for t != 0.
    """
    if kind == "half":
        c, s = math.cos(2 * angle), math.sin(2 * angle)
        mat = np.array([[c, s], [s, -c]], dtype=complex)
    elif kind == "quarter":
        rot = np.array(
            [[math.cos(angle), -math.sin(angle)],
             [math.sin(angle), math.cos(angle)]]
        )
        mat = rot @ np.diag([1.0, 1.0j]) @ rot.T
    else:
        raise ValueError(f"unknown waveplate kind {kind!r}")
    return GateOp(dimension=2, matrix=mat, label=f"{kind}({angle:.6g})")


def phase_shifter(phi: float) -> GateOp:
    """diag(1, e^{i phi}) on {|H>, |V>}."""
    return GateOp(dimension=2,
                  matrix=np.diag([1.0, np.exp(1j * phi)]),
                  label=f"phase({phi:.6g})")


def hadamard() -> GateOp:
    return GateOp(dimension=2,
                  matrix=np.array([[1, 1], [1, -1]], dtype=complex) / _SQRT2,
                  label="H")


def w_gate() -> GateOp:
    """Rotation by pi/8; conjugates Z into the Hadamard."""
    c, s = math.cos(math.pi / 8), math.sin(math.pi / 8)
    return GateOp(dimension=2, matrix=np.array([[c, -s], [s, c]], dtype=complex),
                  label="W")


def cz_gate() -> GateOp:
    return GateOp(dimension=4, matrix=np.diag([1.0, 1.0, 1.0, -1.0]).astype(complex),
                  label="CZ")


def controlled_hadamard() -> GateOp:
    """Hadamard on the target iff the control is |V>; qubit order (control, target)."""
    mat = np.eye(4, dtype=complex)
    mat[2:, 2:] = hadamard().matrix
    return GateOp(dimension=4, matrix=mat, label="CH")


def controlled_hadamard_decomposition() -> GateOp:
    """The same gate built as (I (x) W) CZ (I (x) W+)."""
    w = w_gate().matrix
    iw = np.kron(np.eye(2), w)
    mat = iw @ cz_gate().matrix @ iw.conj().T
    return GateOp(dimension=4, matrix=mat, label="CH(W,CZ)")


_BELL_KETS = {
    "phi+": np.array([1, 0, 0, 1], dtype=complex) / _SQRT2,
    "phi-": np.array([1, 0, 0, -1], dtype=complex) / _SQRT2,
    "psi+": np.array([0, 1, 1, 0], dtype=complex) / _SQRT2,
    "psi-": np.array([0, 1, -1, 0], dtype=complex) / _SQRT2,
}


def bell_ket(label: str) -> np.ndarray:
    """Raw amplitude array of the named Bell state."""
    try:
        return _BELL_KETS[label].copy()
    except KeyError:
        raise ValueError(f"unknown Bell state label {label!r}") from None


def bell_state(label: str) -> StateVector:
    """Two-qubit Bell state: psi+- = (|HV> +- |VH>)/sqrt2, phi+- = (|HH> +- |VV>)/sqrt2."""
    return StateVector(num_qubits=2, amplitudes=bell_ket(label))


def outcome_probability(state: StateVector, projector: Projector, targets) -> float:
    """Born-rule probability <psi|P|psi> for a projector on the target qubits."""
    targets = tuple(targets)
    projected = _apply_matrix(state.amplitudes, state.num_qubits,
                              projector.matrix, targets)
    prob = float(np.real(np.vdot(state.amplitudes, projected)))
    if prob < -ATOL or prob > 1.0 + ATOL:
        raise ValueError(f"probability {prob} outside [0, 1]")
    return min(max(prob, 0.0), 1.0)


def schmidt_coefficients(state: StateVector, partition) -> np.ndarray:
    """Singular values of the bipartition (partition | rest), descending."""
    part = tuple(sorted(set(partition)))
    if not part or len(part) >= state.num_qubits:
        raise ValueError(f"partition {partition} must be a nonempty proper subset")
    for q in part:
        if not 0 <= q < state.num_qubits:
            raise ValueError(f"qubit {q} out of range")
    rest = [q for q in range(state.num_qubits) if q not in part]
    psi = state.amplitudes.reshape([2] * state.num_qubits)
    psi = np.transpose(psi, list(part) + rest).reshape(2 ** len(part), -1)
    return np.linalg.svd(psi, compute_uv=False)
