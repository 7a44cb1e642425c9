"""The three-photon experiment at the qubit level.

Register order is (S, C, A): the system photon S traverses a polarization
interferometer whose output beam splitter is a controlled-Hadamard gate,
with the control photon C entangled with an ancilla photon A.  Alice
analyzes S along an angle theta1; Bob projects the C,A pair onto a tunable
superposition of two Bell states, cos(theta2)|phi-> + sin(theta2)|psi+>.
Bob's "-" outcome is, by construction, the "+" outcome at theta2 + pi/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .qstate import (
    GateOp,
    Projector,
    StateVector,
    apply_gate,
    bell_ket,
    controlled_hadamard,
    hadamard,
    outcome_probability,
    phase_shifter,
    projector_onto,
    state_from_amplitudes,
)

_SQRT2 = math.sqrt(2.0)

# Default measurement grids: nine analyzer angles spanning [-pi/2, pi/2] and
# nine interferometer phases spanning [0, 2*pi], endpoints included.
THETA2_GRID_9 = tuple(-math.pi / 2 + k * math.pi / 8 for k in range(9))
PHI_GRID_9 = tuple(k * math.pi / 4 for k in range(9))


@dataclass(frozen=True)
class NoiseParams:
    """Two-parameter phenomenological noise model.

    ``visibility`` scales the correlation part of every outcome
    distribution; ``background`` admixes a uniform accidental-coincidence
    floor.  (1, 0) is the ideal case.
    """

    visibility: float = 1.0
    background: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.visibility <= 1.0:
            raise ValueError(f"visibility must be in [0, 1], got {self.visibility}")
        if not 0.0 <= self.background <= 1.0:
            raise ValueError(f"background must be in [0, 1], got {self.background}")

    @property
    def correlation_scale(self) -> float:
        return (1.0 - self.background) * self.visibility


IDEAL = NoiseParams()


@dataclass(frozen=True)
class ExperimentConfig:
    """One measurement setting (theta1, theta2, phi) plus noise parameters."""

    phi: float
    theta1: float = 0.0
    theta2: float = 0.0
    delta: float = math.pi / 4
    noise: NoiseParams = field(default_factory=NoiseParams)

    def __post_init__(self):
        for name in ("phi", "theta1", "theta2", "delta"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be a finite angle")


@dataclass(frozen=True)
class OutcomeDistribution:
    """Joint probabilities for (Alice +-, Bob +-)."""

    p_pp: float
    p_pm: float
    p_mp: float
    p_mm: float

    def __post_init__(self):
        probs = self.as_array()
        if np.any(probs < -1e-10) or np.any(probs > 1.0 + 1e-10):
            raise ValueError(f"probabilities outside [0, 1]: {probs}")
        if abs(float(probs.sum()) - 1.0) > 1e-10:
            raise ValueError(f"probabilities sum to {probs.sum()}, expected 1")

    def as_array(self) -> np.ndarray:
        return np.array([self.p_pp, self.p_pm, self.p_mp, self.p_mm], dtype=float)

    @property
    def correlation(self) -> float:
        return self.p_pp - self.p_pm - self.p_mp + self.p_mm

    @property
    def alice_plus_marginal(self) -> float:
        return self.p_pp + self.p_pm

    @property
    def bob_plus_marginal(self) -> float:
        return self.p_pp + self.p_mp


def initial_state(delta: float) -> StateVector:
    """|V>_S (x) (|HV> + e^{i delta}|VH>)_CA / sqrt2, register order (S, C, A)."""
    amps = np.zeros(8, dtype=complex)
    amps[0b101] = 1.0 / _SQRT2                  # |V H V>
    amps[0b110] = np.exp(1j * delta) / _SQRT2   # |V V H>
    return StateVector(num_qubits=3, amplitudes=amps)


def particle_state(phi: float) -> StateVector:
    """(|H> - e^{i phi}|V>)/sqrt2: H/V statistics independent of phi."""
    return state_from_amplitudes([1.0 / _SQRT2, -np.exp(1j * phi) / _SQRT2])


def wave_state(phi: float) -> StateVector:
    """e^{i phi/2}(-i sin(phi/2)|H> + cos(phi/2)|V>): fringes in phi."""
    half = phi / 2.0
    pref = np.exp(1j * half)
    return state_from_amplitudes(
        [pref * (-1j) * math.sin(half), pref * math.cos(half)]
    )


def control_arm_rotation() -> GateOp:
    """Fixed rotation on photon C: |H> -> |R>, |V> -> |L>."""
    mat = np.array([[1.0, 1.0], [-1.0j, 1.0j]], dtype=complex) / _SQRT2
    return GateOp(dimension=2, matrix=mat, label="C:H->R,V->L")


def ancilla_arm_rotation() -> GateOp:
    """Fixed rotation on photon A: |V> -> |R>, |H> -> |L>."""
    mat = np.array([[1.0, 1.0], [1.0j, -1.0j]], dtype=complex) / _SQRT2
    return GateOp(dimension=2, matrix=mat, label="A:V->R,H->L")


def final_state(phi: float, delta: float = math.pi / 4) -> StateVector:
    """Gate-by-gate evolution of the full interferometer.

    Hadamard and phase shifter on S, controlled-Hadamard with control C and
    target S, then the fixed circular-basis rotations on C and A.  The
    result is (1/2)[|p>_S(|phi-> - i|psi+>) + e^{i delta}|w>_S(|phi-> + i|psi+>)]
    with |p>/|w> the particle/wave states at phase phi.
    """
    state = initial_state(delta)
    state = apply_gate(state, hadamard(), (0,))
    state = apply_gate(state, phase_shifter(phi), (0,))
    state = apply_gate(state, controlled_hadamard(), (1, 0))
    state = apply_gate(state, control_arm_rotation(), (1,))
    state = apply_gate(state, ancilla_arm_rotation(), (2,))
    return state


def alice_projector(theta1: float, sign: str) -> Projector:
    """Polarization analyzer for photon S.

    "+" projects onto cos(theta1)|H> + sin(theta1)|V>; "-" onto the
    orthogonal complement.
    """
    if sign == "+":
        ket = [math.cos(theta1), math.sin(theta1)]
    elif sign == "-":
        ket = [-math.sin(theta1), math.cos(theta1)]
    else:
        raise ValueError(f"sign must be '+' or '-', got {sign!r}")
    return projector_onto(ket)


def bob_superposition_ket(theta2: float) -> np.ndarray:
    """cos(theta2)|phi-> + sin(theta2)|psi+> as a 4-amplitude array."""
    return math.cos(theta2) * bell_ket("phi-") + math.sin(theta2) * bell_ket("psi+")


def bob_projector(theta2: float, sign: str) -> Projector:
    """Tunable Bell-superposition analyzer for photons C and A.

    The "-" outcome is defined as the "+" outcome at theta2 + pi/2, exactly
    mirroring how the measurement is taken: one analyzer angle per run.
    """
    if sign == "-":
        return bob_projector(theta2 + math.pi / 2, "+")
    if sign != "+":
        raise ValueError(f"sign must be '+' or '-', got {sign!r}")
    return projector_onto(bob_superposition_ket(theta2))


def joint_probability(state: StateVector, alice: Projector, bob: Projector) -> float:
    """P(Alice outcome, Bob outcome): Born rule for the product projector."""
    combined = Projector(dimension=8, matrix=np.kron(alice.matrix, bob.matrix))
    return outcome_probability(state, combined, (0, 1, 2))


def coincidence_probabilities(config: ExperimentConfig) -> OutcomeDistribution:
    """Joint (Alice, Bob) outcome probabilities at one setting.

    Noise is applied at the probability level: the ideal distribution is
    mixed with the uniform one, first by the visibility and then by the
    background fraction, so the correlation scales as (1-b)*V while fair
    marginals stay fair.
    """
    state = final_state(config.phi, config.delta)
    alice = {s: alice_projector(config.theta1, s) for s in "+-"}
    bob = {s: bob_projector(config.theta2, s) for s in "+-"}
    ideal = np.array(
        [joint_probability(state, alice[a], bob[b]) for a in "+-" for b in "+-"]
    )
    scale = config.noise.correlation_scale
    noisy = scale * ideal + (1.0 - scale) * 0.25
    noisy = np.clip(noisy, 0.0, 1.0)
    return OutcomeDistribution(*noisy)


def correlation(config: ExperimentConfig) -> float:
    """E = p++ - p+- - p-+ + p--, in [-1, 1]."""
    return coincidence_probabilities(config).correlation


def chsh(phi: float,
         theta1_pair=(0.0, math.pi / 4),
         theta2_pair=(math.pi / 8, 3 * math.pi / 8),
         noise: NoiseParams = IDEAL) -> float:
    """|E(t1,t2) + E(t1,t2') - E(t1',t2) + E(t1',t2')| for the ordered pairs.

    The sign pattern is fixed; the roles of the two Alice angles swap with
    the sign of sin(phi), so callers pick the pair order that matches their
    working point.
    """
    t1, t1p = theta1_pair
    t2, t2p = theta2_pair
    if math.isclose(t1, t1p) or math.isclose(t2, t2p):
        raise ValueError("setting pairs must contain two distinct angles")

    def e(a, b):
        return correlation(
            ExperimentConfig(phi=phi, theta1=a, theta2=b, noise=noise)
        )

    return abs(e(t1, t2) + e(t1, t2p) - e(t1p, t2) + e(t1p, t2p))


def correlation_surface(theta1: float,
                        theta2_grid=None,
                        phi_grid=None,
                        noise: NoiseParams = IDEAL) -> np.ndarray:
    """E(theta2, phi) table, rows over theta2 and columns over phi."""
    theta2_grid = THETA2_GRID_9 if theta2_grid is None else tuple(theta2_grid)
    phi_grid = PHI_GRID_9 if phi_grid is None else tuple(phi_grid)
    if not theta2_grid or not phi_grid:
        raise ValueError("grids must be nonempty")
    table = np.empty((len(theta2_grid), len(phi_grid)))
    for i, t2 in enumerate(theta2_grid):
        for j, phi in enumerate(phi_grid):
            table[i, j] = correlation(
                ExperimentConfig(phi=phi, theta1=theta1, theta2=t2, noise=noise)
            )
    return table


def rng_stream(seed, index: int | None = None) -> np.random.Generator:
    """Seeded portable generator; (seed, index) derives independent streams."""
    if index is None:
        seq = np.random.SeedSequence(seed)
    else:
        seq = np.random.SeedSequence(seed, spawn_key=(index,))
    return np.random.Generator(np.random.PCG64(seq))


def sample_counts(distribution: OutcomeDistribution, total: int, seed,
                  rng: np.random.Generator | None = None) -> np.ndarray:
    """Multinomial draw of ``total`` events over the four outcomes.

    Sampled by sequential binomial conditioning, each binomial realized by
    counting uniforms below the conditional probability, so the counts are
    a pure function of the PCG64 stream for the given seed.
    """
    if total < 1:
        raise ValueError(f"total must be >= 1, got {total}")
    if rng is None:
        rng = rng_stream(seed)
    probs = distribution.as_array()
    counts = np.zeros(4, dtype=np.int64)
    remaining = int(total)
    tail = 1.0
    for k in range(3):
        if remaining == 0 or tail <= 0.0:
            break
        p = min(max(probs[k] / tail, 0.0), 1.0)
        counts[k] = int(np.count_nonzero(rng.random(remaining) < p))
        remaining -= counts[k]
        tail -= probs[k]
    counts[3] = remaining
    return counts


def fit_visibility(theta2_values, measured, theta1: float, phi: float) -> float:
    """Least-squares visibility of a measured correlation curve.

    Fits measured ~= V * E_ideal(theta2) at fixed (theta1, phi); closed-form
    linear regression through the origin.
    """
    theta2_values = np.asarray(theta2_values, dtype=float)
    measured = np.asarray(measured, dtype=float)
    if theta2_values.shape != measured.shape or theta2_values.size == 0:
        raise ValueError("theta2_values and measured must be equal-length, nonempty")
    ideal = np.array(
        [
            correlation(ExperimentConfig(phi=phi, theta1=theta1, theta2=t2))
            for t2 in theta2_values
        ]
    )
    denom = float(np.dot(ideal, ideal))
    if denom < 1e-12:
        raise ValueError("ideal curve is identically zero; visibility undefined")
    return float(np.dot(ideal, measured) / denom)
