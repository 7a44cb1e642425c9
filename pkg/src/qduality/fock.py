"""Second-quantized linear optics for the physical gate models.

Photons live in modes labelled by (spatial port, polarization, temporal
wavepacket).  States are maps from occupation patterns to complex
amplitudes in the normalized Fock basis; passive elements act by linear
substitution on creation operators.  Partial distinguishability is a
two-component mixture: weight v on a fully indistinguishable run (shared
temporal label) and 1-v on a fully distinguishable one (distinct labels),
which reproduces the linear scaling of two-photon interference dips.

Post-selection on one photon per output port is applied explicitly and the
discarded norm is reported as a success probability, never dropped
silently.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from . import circuit as _circuit
from .qstate import Projector, cz_gate, controlled_hadamard, w_gate, waveplate

_SQRT2 = math.sqrt(2.0)

POL_H = "H"
POL_V = "V"


class Mode(NamedTuple):
    spatial: str
    pol: str
    temporal: str


Pattern = tuple  # sorted tuple of Mode


def _pattern_norm_factor(pattern: Pattern) -> float:
    """sqrt(prod n_m!) over the occupation multiplicities of a pattern."""
    fac = 1
    seen = {}
    for m in pattern:
        seen[m] = seen.get(m, 0) + 1
    for n in seen.values():
        fac *= math.factorial(n)
    return math.sqrt(fac)


@dataclass
class ModeState:
    """Amplitudes over photon occupation patterns (normalized Fock basis)."""

    amps: dict

    @classmethod
    def from_patterns(cls, entries) -> "ModeState":
        amps = {}
        for modes, amp in entries:
            key = tuple(sorted(modes))
            amps[key] = amps.get(key, 0.0) + complex(amp)
        return cls(amps)

    def norm_sq(self) -> float:
        return float(sum(abs(a) ** 2 for a in self.amps.values()))

    def photon_numbers(self) -> set:
        return {len(p) for p in self.amps}

    def spatial_labels(self) -> set:
        return {m.spatial for p in self.amps for m in p}

    def transform(self, mode_map: Callable[[Mode], list]) -> "ModeState":
        """Substitute a_m -> sum_k c_k a_k per the map, expanding products.

        ``mode_map(mode)`` returns a list of (new_mode, coefficient) or None
        for identity.
        """
        out = defaultdict(complex)
        for pattern, amp in self.amps.items():
            terms = [((), amp / _pattern_norm_factor(pattern))]
            for mode in pattern:
                images = mode_map(mode)
                if images is None:
                    images = [(mode, 1.0)]
                terms = [
                    (modes + (new_mode,), coef * c)
                    for modes, coef in terms
                    for new_mode, c in images
                ]
            for modes, coef in terms:
                out[tuple(sorted(modes))] += coef
        amps = {
            p: a * _pattern_norm_factor(p)
            for p, a in out.items()
            if abs(a) > 1e-15
        }
        return ModeState(amps)

    def postselect_one_per_port(self, ports) -> tuple["ModeState", float]:
        """Keep patterns with exactly one photon in each listed port.

        Returns the (unnormalized) conditional state and its success
        probability.
        """
        wanted = tuple(sorted(ports))
        kept = {
            p: a
            for p, a in self.amps.items()
            if tuple(sorted(m.spatial for m in p)) == wanted
        }
        return ModeState(kept), float(sum(abs(a) ** 2 for a in kept.values()))


def polarization_map(spatial: str, jones: np.ndarray) -> Callable[[Mode], list]:
    """Waveplate/rotation acting on the polarization of one spatial port."""
    jones = np.asarray(jones, dtype=complex)

    def mapper(mode: Mode):
        if mode.spatial != spatial:
            return None
        col = 0 if mode.pol == POL_H else 1
        return [
            (Mode(mode.spatial, pol, mode.temporal), jones[row, col])
            for row, pol in ((0, POL_H), (1, POL_V))
            if abs(jones[row, col]) > 0.0
        ]

    return mapper


def ppbs_transform(state: ModeState, in_modes, t_h: float, t_v: float) -> ModeState:
    """Partial polarizing beam splitter on a pair of spatial ports.

    Per polarization p with transmission T_p: a -> sqrt(T) a + sqrt(1-T) b,
    b -> sqrt(1-T) a - sqrt(T) b (real symmetric convention).  T_h = T_v = 1/2
    degenerates to a balanced beam splitter.
    """
    for t in (t_h, t_v):
        if not 0.0 <= t <= 1.0:
            raise ValueError(f"transmission {t} outside [0, 1]")
    port_a, port_b = in_modes
    present = state.spatial_labels()
    if port_a not in present and port_b not in present:
        raise ValueError(f"spatial labels {in_modes} not present in the state")
    trans = {POL_H: t_h, POL_V: t_v}

    def mapper(mode: Mode):
        if mode.spatial not in (port_a, port_b):
            return None
        t = trans[mode.pol]
        rt, rr = math.sqrt(t), math.sqrt(1.0 - t)
        a = Mode(port_a, mode.pol, mode.temporal)
        b = Mode(port_b, mode.pol, mode.temporal)
        if mode.spatial == port_a:
            return [(a, rt), (b, rr)]
        return [(a, rr), (b, -rt)]

    return state.transform(mapper)


def pbs_transform(state: ModeState, in_modes) -> ModeState:
    """Polarizing beam splitter: H transmits, V swaps ports (real convention)."""
    port_a, port_b = in_modes

    def mapper(mode: Mode):
        if mode.spatial not in (port_a, port_b) or mode.pol == POL_H:
            return None
        other = port_b if mode.spatial == port_a else port_a
        return [(Mode(other, POL_V, mode.temporal), 1.0)]

    return state.transform(mapper)


def attenuate(state: ModeState, spatial: str, pol: str, transmission: float,
              loss_label: str) -> ModeState:
    """Route 1-T of one port's polarization into a dedicated loss port.

    Photon number is conserved globally; the loss port simply never
    satisfies the post-selection condition.
    """
    rt, rr = math.sqrt(transmission), math.sqrt(1.0 - transmission)

    def mapper(mode: Mode):
        if mode.spatial != spatial or mode.pol != pol:
            return None
        return [
            (mode, rt),
            (Mode(loss_label, pol, mode.temporal), rr),
        ]

    return state.transform(mapper)


@dataclass(frozen=True)
class OverlapModel:
    """Mode overlap v, optionally as a Gaussian function of stage position."""

    v: float = 1.0
    x0: float | None = None
    sigma: float | None = None

    def __post_init__(self):
        if not 0.0 <= self.v <= 1.0:
            raise ValueError(f"overlap must be in [0, 1], got {self.v}")
        if (self.x0 is None) != (self.sigma is None):
            raise ValueError("x0 and sigma must be given together")
        if self.sigma is not None and self.sigma <= 0:
            raise ValueError("sigma must be positive")

    def value(self, x: float) -> float:
        if self.x0 is None:
            return self.v
        return math.exp(-((x - self.x0) ** 2) / (2.0 * self.sigma**2))


@dataclass(frozen=True)
class HomScanResult:
    positions: tuple
    coincidence: tuple
    baseline: float
    contrast: float


def hom_scan(transmission: float, overlap: OverlapModel, positions) -> HomScanResult:
    """Two-photon coincidence dip across a delay scan.

    P(x) = T^2 + R^2 - 2 T R v(x); the reported contrast is
    (baseline - min P) / baseline with baseline = T^2 + R^2.
    """
    if not 0.0 <= transmission <= 1.0:
        raise ValueError(f"transmission {transmission} outside [0, 1]")
    positions = tuple(float(x) for x in positions)
    if not positions:
        raise ValueError("positions must be nonempty")
    t, r = transmission, 1.0 - transmission
    baseline = t * t + r * r
    curve = tuple(baseline - 2.0 * t * r * overlap.value(x) for x in positions)
    contrast = (baseline - min(curve)) / baseline if baseline > 0 else 0.0
    return HomScanResult(positions=positions, coincidence=curve,
                         baseline=baseline, contrast=contrast)


class PostselectedMap:
    """Completely positive two-qubit map from a post-selected interferometer.

    ``branches`` is a list of (weight, [K_1, K_2, ...]): a classical mixture
    over temporal-distinguishability branches, each branch a sum of Kraus
    terms labelled by orthogonal temporal configurations.
    """

    def __init__(self, branches):
        self.branches = [
            (float(w), [np.asarray(k, dtype=complex) for k in ks])
            for w, ks in branches
            if w > 1e-15
        ]

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """Unnormalized conditional output state."""
        rho = np.asarray(rho, dtype=complex)
        out = np.zeros_like(rho)
        for weight, kraus in self.branches:
            for k in kraus:
                out += weight * (k @ rho @ k.conj().T)
        return out

    def apply_to_ket(self, ket) -> np.ndarray:
        ket = np.asarray(ket, dtype=complex).reshape(-1)
        return self.apply(np.outer(ket, ket.conj()))

    def success_probability(self, rho: np.ndarray | None = None) -> float:
        if rho is None:
            rho = np.eye(4, dtype=complex) / 4.0
        return float(np.real(np.trace(self.apply(rho))))

    @property
    def coherent_operator(self) -> np.ndarray:
        """The single Kraus operator, when the map is a pure rescaled unitary."""
        if len(self.branches) != 1 or len(self.branches[0][1]) != 1:
            raise ValueError("map is not coherent (multiple Kraus branches)")
        weight, (kraus,) = self.branches[0]
        return math.sqrt(weight) * kraus


def _run_gate_chain(inputs: ModeState, with_w: bool) -> ModeState:
    """PPBS controlled-phase chain on ports ('s', 'c').

    PPBS with T_h = 1, T_v = 1/3, then 1/3-transmission balancing of the
    horizontal component of each output, then a common path phase of pi on
    the control port (the interferometric phase reference that absorbs the
    overall sign of the beam-splitter convention).  ``with_w`` wraps the
    chain in the target-side rotation that turns the controlled phase flip
    into a controlled Hadamard.
    """
    state = inputs
    if with_w:
        state = state.transform(polarization_map("s", w_gate().matrix.conj().T))
    state = ppbs_transform(state, ("s", "c"), t_h=1.0, t_v=1.0 / 3.0)
    state = attenuate(state, "s", POL_H, 1.0 / 3.0, "loss_s")
    state = attenuate(state, "c", POL_H, 1.0 / 3.0, "loss_c")
    state = state.transform(polarization_map("c", -np.eye(2)))
    if with_w:
        state = state.transform(polarization_map("s", w_gate().matrix))
    return state


_POLS = (POL_H, POL_V)


def _gate_kraus(t_s: str, t_c: str, with_w: bool) -> list:
    """Kraus operators of the post-selected chain for given temporal labels.

    Basis order (control, target): index = 2*c + s with H = 0, V = 1.
    Distinct temporal output configurations give orthogonal environments and
    therefore separate Kraus terms.
    """
    columns = defaultdict(lambda: np.zeros((4, 4), dtype=complex))
    for col, (c_pol, s_pol) in enumerate(
        (c, s) for c in _POLS for s in _POLS
    ):
        start = ModeState.from_patterns(
            [((Mode("s", s_pol, t_s), Mode("c", c_pol, t_c)), 1.0)]
        )
        final = _run_gate_chain(start, with_w)
        kept, _ = final.postselect_one_per_port(("c", "s"))
        for pattern, amp in kept.amps.items():
            by_port = {m.spatial: m for m in pattern}
            row = 2 * _POLS.index(by_port["c"].pol) + _POLS.index(by_port["s"].pol)
            group = (by_port["s"].temporal, by_port["c"].temporal)
            columns[group][row, col] += amp
    return [columns[g] for g in sorted(columns)]


def physical_cz(v: float) -> tuple[PostselectedMap, float]:
    """Post-selected controlled-phase gate from two-photon interference.

    At v = 1 the renormalized map is diag(1, 1, 1, -1) with success
    probability 1/9; at v < 1 the conditional map decoheres through the
    temporal-label mixture.  The returned probability is for a maximally
    mixed input.
    """
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"overlap must be in [0, 1], got {v}")
    branches = []
    if v > 0.0:
        branches.append((v, _gate_kraus("t0", "t0", with_w=False)))
    if v < 1.0:
        branches.append((1.0 - v, _gate_kraus("t0", "t1", with_w=False)))
    gate_map = PostselectedMap(branches)
    return gate_map, gate_map.success_probability()


def physical_ch(v: float) -> tuple[PostselectedMap, float]:
    """The controlled-phase chain conjugated by the target-side rotation."""
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"overlap must be in [0, 1], got {v}")
    branches = []
    if v > 0.0:
        branches.append((v, _gate_kraus("t0", "t0", with_w=True)))
    if v < 1.0:
        branches.append((1.0 - v, _gate_kraus("t0", "t1", with_w=True)))
    gate_map = PostselectedMap(branches)
    return gate_map, gate_map.success_probability()


def ideal_cz_matrix() -> np.ndarray:
    return np.asarray(cz_gate().matrix)


def ideal_ch_matrix() -> np.ndarray:
    return np.asarray(controlled_hadamard().matrix)


_DA_KETS = {
    "D": np.array([1.0, 1.0], dtype=complex) / _SQRT2,
    "A": np.array([1.0, -1.0], dtype=complex) / _SQRT2,
}


def _apply_bsm_elements(state: ModeState, theta2: float) -> ModeState:
    """Analyzer waveplates and the interference beam splitter of the BSM.

    Half-wave plate at theta2/2 on the control port, a fixed half-wave
    plate at 0 on the ancilla port, then the polarizing beam splitter.
    """
    state = state.transform(
        polarization_map("c", waveplate("half", theta2 / 2.0).matrix)
    )
    state = state.transform(polarization_map("a", waveplate("half", 0.0).matrix))
    return pbs_transform(state, ("c", "a"))


def _da_outcome_probs(state: ModeState) -> dict:
    """Diagonal-basis coincidence probabilities after post-selection.

    Groups the post-selected patterns by their temporal configuration
    (orthogonal environments) and accumulates |<outcome|group>|^2.
    """
    kept, _ = state.postselect_one_per_port(("a", "c"))
    groups = defaultdict(lambda: np.zeros((2, 2), dtype=complex))
    for pattern, amp in kept.amps.items():
        by_port = {m.spatial: m for m in pattern}
        i = _POLS.index(by_port["c"].pol)
        j = _POLS.index(by_port["a"].pol)
        groups[(by_port["c"].temporal, by_port["a"].temporal)][i, j] += amp
    probs = {f"{oc}{oa}": 0.0 for oc in "DA" for oa in "DA"}
    for mat in groups.values():
        for oc in "DA":
            for oa in "DA":
                amp = _DA_KETS[oc].conj() @ mat @ _DA_KETS[oa].conj()
                probs[f"{oc}{oa}"] += float(abs(amp) ** 2)
    return probs


def bsm_projector_physical(theta2: float) -> Projector:
    """Effective two-photon projector realized by the analyzer chain.

    The cross outcomes DA and AD herald the "+" result; the matrix equals
    the circuit-level projector onto cos(theta2)|phi-> + sin(theta2)|psi+>.
    """
    amplitudes = {out: np.zeros(4, dtype=complex) for out in ("DA", "AD")}
    for col, (c_pol, a_pol) in enumerate(
        (c, a) for c in _POLS for a in _POLS
    ):
        start = ModeState.from_patterns(
            [((Mode("c", c_pol, "t0"), Mode("a", a_pol, "t0")), 1.0)]
        )
        final = _apply_bsm_elements(start, theta2)
        kept, _ = final.postselect_one_per_port(("a", "c"))
        mat = np.zeros((2, 2), dtype=complex)
        for pattern, amp in kept.amps.items():
            by_port = {m.spatial: m for m in pattern}
            mat[_POLS.index(by_port["c"].pol), _POLS.index(by_port["a"].pol)] += amp
        for out in ("DA", "AD"):
            amplitudes[out][col] = (
                _DA_KETS[out[0]].conj() @ mat @ _DA_KETS[out[1]].conj()
            )
    proj = np.zeros((4, 4), dtype=complex)
    for vec in amplitudes.values():
        proj += np.outer(vec.conj(), vec)
    return Projector(dimension=4, matrix=proj)


@dataclass(frozen=True)
class BsmScanResult:
    positions: tuple
    rates: dict  # keys "DA", "AD", "DD", "AA" -> tuple of rates


def _bsm_pair_state(t_c: str, t_a: str) -> ModeState:
    """Source pair at delta = 0 after the fixed arm rotations."""
    state = ModeState.from_patterns(
        [
            ((Mode("c", POL_H, t_c), Mode("a", POL_V, t_a)), 1.0 / _SQRT2),
            ((Mode("c", POL_V, t_c), Mode("a", POL_H, t_a)), 1.0 / _SQRT2),
        ]
    )
    state = state.transform(
        polarization_map("c", _circuit.control_arm_rotation().matrix)
    )
    return state.transform(
        polarization_map("a", _circuit.ancilla_arm_rotation().matrix)
    )


def bsm_scan(theta2: float, overlap: OverlapModel, positions) -> BsmScanResult:
    """Diagonal-basis coincidence curves across the analyzer delay scan.

    At full overlap the cross outcomes DA/AD peak while DD/AA vanish; with
    no overlap all four rates coincide.
    """
    positions = tuple(float(x) for x in positions)
    if not positions:
        raise ValueError("positions must be nonempty")
    per_branch = {}
    for key, (t_c, t_a) in {"same": ("t0", "t0"), "dist": ("t0", "t1")}.items():
        state = _apply_bsm_elements(_bsm_pair_state(t_c, t_a), theta2)
        per_branch[key] = _da_outcome_probs(state)
    rates = {out: [] for out in ("DA", "AD", "DD", "AA")}
    for x in positions:
        v = overlap.value(x)
        for out in rates:
            rates[out].append(
                v * per_branch["same"][out] + (1.0 - v) * per_branch["dist"][out]
            )
    return BsmScanResult(positions=positions,
                         rates={k: tuple(vals) for k, vals in rates.items()})


def _three_photon_run(config: _circuit.ExperimentConfig, theta2_eff: float,
                      labels: tuple) -> dict:
    """One full pipeline run at a fixed analyzer angle.

    Returns P(alice +-, analyzer cross-outcome) for the given temporal
    labels (t_s, t_c, t_a), post-selected on one photon in each of the
    three output ports.
    """
    t_s, t_c, t_a = labels
    state = ModeState.from_patterns(
        [
            (
                (Mode("s", POL_V, t_s), Mode("c", POL_H, t_c), Mode("a", POL_V, t_a)),
                1.0 / _SQRT2,
            ),
            (
                (Mode("s", POL_V, t_s), Mode("c", POL_V, t_c), Mode("a", POL_H, t_a)),
                np.exp(1j * config.delta) / _SQRT2,
            ),
        ]
    )
    state = state.transform(
        polarization_map("s", waveplate("half", math.pi / 8).matrix)
    )
    state = state.transform(
        polarization_map("s", np.diag([1.0, np.exp(1j * config.phi)]))
    )
    state = _run_gate_chain(state, with_w=True)
    state = state.transform(
        polarization_map("c", _circuit.control_arm_rotation().matrix)
    )
    state = state.transform(
        polarization_map("a", _circuit.ancilla_arm_rotation().matrix)
    )
    state = _apply_bsm_elements(state, theta2_eff)
    kept, _ = state.postselect_one_per_port(("a", "c", "s"))

    groups = defaultdict(lambda: np.zeros((2, 2, 2), dtype=complex))
    for pattern, amp in kept.amps.items():
        by_port = {m.spatial: m for m in pattern}
        idx = tuple(_POLS.index(by_port[port].pol) for port in ("s", "c", "a"))
        key = tuple(by_port[port].temporal for port in ("s", "c", "a"))
        groups[key][idx] += amp

    alice = {
        "+": np.array([math.cos(config.theta1), math.sin(config.theta1)]),
        "-": np.array([-math.sin(config.theta1), math.cos(config.theta1)]),
    }
    probs = {sign: 0.0 for sign in "+-"}
    for tensor in groups.values():
        for sign, ket in alice.items():
            for out in ("DA", "AD"):
                amp = np.einsum(
                    "i,j,k,ijk->",
                    ket.conj(),
                    _DA_KETS[out[0]].conj(),
                    _DA_KETS[out[1]].conj(),
                    tensor,
                )
                probs[sign] += float(abs(amp) ** 2)
    return probs


def physical_correlation(config: _circuit.ExperimentConfig, v: float) -> float:
    """End-to-end correlation from the second-quantized pipeline.

    v is the temporal overlap of photons S and C at the gate beam splitter;
    the analyzer interference is taken as aligned.  The "-" analyzer
    outcome is a separate run at theta2 + pi/2, as in the counting
    procedure, and the four post-selected rates combine exactly like
    coincidence counts.
    """
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"overlap must be in [0, 1], got {v}")
    branch_weights = []
    if v > 0.0:
        branch_weights.append((v, ("t0", "t0", "t0")))
    if v < 1.0:
        branch_weights.append((1.0 - v, ("t1", "t0", "t0")))

    rates = {}
    for bob_sign, theta2_eff in (("+", config.theta2),
                                 ("-", config.theta2 + math.pi / 2)):
        for alice_sign in "+-":
            rates[(alice_sign, bob_sign)] = 0.0
        for weight, labels in branch_weights:
            run = _three_photon_run(config, theta2_eff, labels)
            for alice_sign in "+-":
                rates[(alice_sign, bob_sign)] += weight * run[alice_sign]

    total = sum(rates.values())
    if total <= 0.0:
        raise ValueError("no post-selected events; correlation undefined")
    return (
        rates[("+", "+")] - rates[("+", "-")]
        - rates[("-", "+")] + rates[("-", "-")]
    ) / total
