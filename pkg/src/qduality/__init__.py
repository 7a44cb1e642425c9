"""Simulation and analysis toolkit for an entanglement-controlled
interferometer: a system photon whose output beam splitter is a
quantum-controlled Hadamard gate steered by one half of an entangled
photon pair, analyzed through tunable Bell-state measurements, CHSH
correlations, second-quantized gate models, and hidden-variable
feasibility tests.
"""

from .circuit import (
    ExperimentConfig,
    NoiseParams,
    OutcomeDistribution,
    chsh,
    coincidence_probabilities,
    correlation,
    correlation_surface,
    final_state,
    initial_state,
    particle_state,
    sample_counts,
    wave_state,
)
from .qstate import (
    GateOp,
    Projector,
    StateVector,
    apply_gate,
    bell_state,
    controlled_hadamard,
    outcome_probability,
    phase_shifter,
    schmidt_coefficients,
    waveplate,
)

__all__ = [
    "ExperimentConfig",
    "GateOp",
    "NoiseParams",
    "OutcomeDistribution",
    "Projector",
    "StateVector",
    "apply_gate",
    "bell_state",
    "chsh",
    "coincidence_probabilities",
    "controlled_hadamard",
    "correlation",
    "correlation_surface",
    "final_state",
    "initial_state",
    "outcome_probability",
    "particle_state",
    "phase_shifter",
    "sample_counts",
    "schmidt_coefficients",
    "wave_state",
    "waveplate",
]

__version__ = "0.1.0"
