"""Single-shot protocols that turn an unknown gate's action on a singlet into
eigenstates on the output wires.

Every protocol here shares one trick: feed half of a two-qubit singlet through
a controlled power of the gate, then read the control side in a basis that
tags which eigenstate landed on which wire. The exact branch analysis (Born
probabilities, per-wire fidelities, eigenphase assignments) is always
computed; sampling only draws shots from it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .discrimination import FAIL_LABEL, build_idp_povm, equatorial_state
from .linalg import (
    EigenSystem,
    eigendecompose_2x2_unitary,
    phase_distance,
    require_unitary,
    wrap_phase,
)
from .register import (
    ControlledGate,
    State,
    apply_controlled,
    basis_state,
    collapse,
    computational_basis,
    extract_subsystem,
    fidelity,
    outcome_distribution,
    plus_x,
    product_state,
    x_basis,
)
from .singlet import make_singlet

SPECTRUM_ATOL = 1e-8
BRANCH_PROB_FLOOR = 1e-12


class SpectrumError(ValueError):
    """The gate's eigenvalues do not satisfy a protocol's precondition."""


@dataclass(frozen=True)
class BranchReport:
    """Exact analysis of one measurement branch."""

    probability: float
    fidelities: tuple | None = None
    eigenphases: tuple | None = None


@dataclass(frozen=True)
class ProtocolReport:
    """Exact branch analysis plus sampled shots for one protocol run.

    ``branches`` maps outcome labels to their exact analysis;
    ``exact_distribution`` includes zero-probability labels too. The headline
    ``outcome_*`` fields mirror the first sampled shot and are None when
    ``shots_used`` is 0.
    """

    protocol: str
    wires: tuple
    branches: dict
    exact_distribution: dict
    histogram: dict
    outcome_label: str | None
    outcome_probability: float | None
    eigenstate_fidelities: tuple | None
    assigned_eigenphases: tuple | None
    shots_used: int
    seed: int
    gate_uses: int


def _apply_network(state: State, gates) -> tuple:
    uses = 0
    for gate in gates:
        state = apply_controlled(state, gate)
        uses += gate.power
    return state, uses


def _branch_from_collapse(state, subsystems, basis, index, wires, system, eigen_indices):
    probability, residual = collapse(state, subsystems, basis, index)
    fids = []
    for wire, k in zip(wires, eigen_indices):
        fids.append(fidelity(extract_subsystem(residual, wire), system.vector(k)))
    phases = tuple(float(system.phases[k]) for k in eigen_indices)
    return BranchReport(probability, tuple(fids), phases)


def _sample_report(name, wires, labels, probs, branches, seed, shots, gate_uses):
    exact = {label: float(p) for label, p in zip(labels, probs)}
    histogram = {}
    outcome = None
    if shots > 0:
        rng = np.random.default_rng(seed)
        weights = np.clip(np.array(probs, dtype=float), 0.0, None)
        draws = rng.choice(len(labels), size=shots, p=weights / weights.sum())
        histogram = {label: 0 for label in labels}
        for d in draws:
            histogram[labels[int(d)]] += 1
        outcome = labels[int(draws[0])]
    headline = branches.get(outcome) if outcome is not None else None
    return ProtocolReport(
        protocol=name,
        wires=tuple(wires),
        branches=branches,
        exact_distribution=exact,
        histogram=histogram,
        outcome_label=outcome,
        outcome_probability=exact.get(outcome) if outcome is not None else None,
        eigenstate_fidelities=headline.fidelities if headline else None,
        assigned_eigenphases=headline.eigenphases if headline else None,
        shots_used=int(shots),
        seed=int(seed),
        gate_uses=int(gate_uses),
    )


def _match_phases(system: EigenSystem, targets, atol: float = SPECTRUM_ATOL) -> list:
    """Bijection from required phases to eigenvector indices, or SpectrumError."""
    if system.degenerate:
        raise SpectrumError("gate spectrum is degenerate")
    remaining = list(range(system.dim))
    matched = []
    for target in targets:
        hits = [k for k in remaining if phase_distance(float(system.phases[k]), target) <= atol]
        if len(hits) != 1:
            raise SpectrumError(
                f"gate eigenphases {[float(p) for p in system.phases]} do not match "
                f"{[float(t) for t in targets]} within {atol:g}"
            )
        matched.append(hits[0])
        remaining.remove(hits[0])
    return matched


def control_singlet_network(u: np.ndarray, powers) -> tuple:
    """Input |+x> (x) singlet and the controlled gates shared by the two-wire
    protocols: one ControlledGate on (control 0, target 1) per entry of
    ``powers``."""
    state = product_state([State((2,), plus_x()), make_singlet(2)])
    gates = [ControlledGate(0, 1, u, power) for power in powers]
    return state, gates


def pm1_output_state(u: np.ndarray) -> State:
    """Pre-measurement three-qubit state of the +-1 protocol."""
    state, gates = control_singlet_network(u, [1])
    out, _ = _apply_network(state, gates)
    return out


def protocol_pm1(u: np.ndarray, seed: int = 0, shots: int = 1) -> ProtocolReport:
    """Locate the +1 and -1 eigenstates of ``u`` with one controlled use.

    The control reads +x or -x with probability 1/2 each; +x puts the
    +1 eigenstate on wire 1 and the -1 eigenstate on wire 2, -x swaps them.
    Either way both output wires carry exact eigenstates.
    """
    system = eigendecompose_2x2_unitary(u)
    plus_idx, minus_idx = _match_phases(system, [0.0, math.pi])
    state, gates = control_singlet_network(u, [1])
    out, uses = _apply_network(state, gates)
    basis, labels = x_basis()
    wires = (1, 2)
    assignment = {"+x": (plus_idx, minus_idx), "-x": (minus_idx, plus_idx)}
    branches = {
        label: _branch_from_collapse(out, [0], basis, i, wires, system, assignment[label])
        for i, label in enumerate(labels)
    }
    probs = [branches[label].probability for label in labels]
    return _sample_report("pm1", wires, labels, probs, branches, seed, shots, uses)


def protocol_square_trick(u: np.ndarray, seed: int = 0, shots: int = 1) -> ProtocolReport:
    """Eigenstates of a gate with eigenvalues {1, i}, via two controlled uses.

    Applying the control twice squares the gate's phases to {1, -1}, which the
    +-1 protocol then separates with certainty.
    """
    system = eigendecompose_2x2_unitary(u)
    one_idx, i_idx = _match_phases(system, [0.0, math.pi / 2.0])
    state, gates = control_singlet_network(u, [1, 1])
    out, uses = _apply_network(state, gates)
    basis, labels = x_basis()
    wires = (1, 2)
    assignment = {"+x": (one_idx, i_idx), "-x": (i_idx, one_idx)}
    branches = {
        label: _branch_from_collapse(out, [0], basis, i, wires, system, assignment[label])
        for i, label in enumerate(labels)
    }
    probs = [branches[label].probability for label in labels]
    return _sample_report("square-trick", wires, labels, probs, branches, seed, shots, uses)


def protocol_known_phases(
    u: np.ndarray, theta1: float, theta2: float, seed: int = 0, shots: int = 1
) -> ProtocolReport:
    """Eigenstates of a gate with known eigenphases, paid for with a fail branch.

    The control wire ends in one of two non-orthogonal pointer states, one per
    phase ordering. Unambiguous discrimination either identifies the ordering
    exactly (conclusive, never wrong) or reports failure; conclusive outcomes
    leave exact eigenstates on the output wires.
    """
    theta1 = wrap_phase(float(theta1))
    theta2 = wrap_phase(float(theta2))
    if phase_distance(theta1, theta2) <= SPECTRUM_ATOL:
        raise ValueError("theta1 and theta2 must differ")
    system = eigendecompose_2x2_unitary(u)
    idx1, idx2 = _match_phases(system, [theta1, theta2])
    state, gates = control_singlet_network(u, [1])
    out, uses = _apply_network(state, gates)
    wires = (1, 2)

    v1 = equatorial_state(theta1)
    v2 = equatorial_state(theta2)
    povm = build_idp_povm(v1, v2)
    mat = out.tensor().reshape(2, -1)
    rho_control = mat @ np.conjugate(mat).T
    probs = [max(float(np.real(np.trace(e @ rho_control))), 0.0) for e in povm.elements]

    # conclusive elements are rank 1, so conditioning is a plain projection of
    # the control onto the state the element does not annihilate
    branches = {}
    for label, kill, eigen_indices in (
        ("v1", v2, (idx1, idx2)),
        ("v2", v1, (idx2, idx1)),
    ):
        perp = np.array([-np.conjugate(kill[1]), np.conjugate(kill[0])])
        rest = np.conjugate(perp) @ mat
        norm = np.linalg.norm(rest)
        if norm <= math.sqrt(BRANCH_PROB_FLOOR):
            continue
        residual = State((2, 2), rest / norm)
        p = probs[list(povm.labels).index(label)]
        fids = tuple(
            fidelity(extract_subsystem(residual, w), system.vector(k))
            for w, k in zip((0, 1), eigen_indices)
        )
        phases = tuple(float(system.phases[k]) for k in eigen_indices)
        branches[label] = BranchReport(p, fids, phases)
    branches[FAIL_LABEL] = BranchReport(probs[2])
    return _sample_report(
        "known-phases", wires, list(povm.labels), probs, branches, seed, shots, uses
    )


ETA_LABELS = {0: "eta(1)", 1: "eta(i)", 2: "eta(-1)", 3: "eta(-i)"}


def eta_state(z: complex) -> State:
    """Two-qubit pointer state (|00> + z|01> + z^2|10> + z^3|11>)/2, |z| = 1."""
    z = complex(z)
    if abs(abs(z) - 1.0) > 1e-10:
        raise ValueError("eta is defined for unit-modulus z")
    amps = np.array([1.0, z, z ** 2, z ** 3], dtype=complex) / 2.0
    return State((2, 2), amps)


def eta_basis():
    """Orthonormal basis {eta(i^k)} of two qubits, labels eta(1), eta(i), ..."""
    vectors = [eta_state(1j ** k).amps for k in range(4)]
    labels = [ETA_LABELS[k] for k in range(4)]
    return np.stack(vectors), labels


def quartet_network(u: np.ndarray) -> tuple:
    """Input and gates of the four-outcome protocol: two control qubits, a
    singlet on wires (2, 3), one controlled gate and one controlled square."""
    plus = State((2,), plus_x())
    state = product_state([plus, plus, make_singlet(2)])
    gates = [ControlledGate(1, 2, u, 1), ControlledGate(0, 2, u, 2)]
    return state, gates


def quartet_output_state(u: np.ndarray) -> State:
    """Pre-measurement four-qubit state of the quartet protocol."""
    state, gates = quartet_network(u)
    out, _ = _apply_network(state, gates)
    return out


def protocol_quartet(u: np.ndarray, seed: int = 0, shots: int = 1) -> ProtocolReport:
    """Eigenstates of a gate whose eigenvalues are fourth roots of unity.

    Three controlled uses imprint z^1 and z^2 phase ladders on two control
    qubits; reading them in the eta basis names one eigenvalue exactly. Wire 2
    carries the named eigenvalue's eigenstate, wire 3 the other one.
    """
    system = eigendecompose_2x2_unitary(u)
    if system.degenerate:
        raise SpectrumError("gate spectrum is degenerate")
    quarter = math.pi / 2.0
    ks = []
    for phase in system.phases:
        k = int(round(float(phase) / quarter)) % 4
        if phase_distance(float(phase), k * quarter) > SPECTRUM_ATOL:
            raise SpectrumError(
                f"gate eigenphase {float(phase)!r} is not a multiple of pi/2 within "
                f"{SPECTRUM_ATOL:g}"
            )
        ks.append(k)
    if ks[0] == ks[1]:
        raise SpectrumError("gate eigenvalues must be distinct fourth roots of unity")

    state, gates = quartet_network(u)
    out, uses = _apply_network(state, gates)
    basis, labels = eta_basis()
    wires = (2, 3)
    dist = outcome_distribution(out, [0, 1], basis, labels)
    eigen_for_k = {ks[0]: (0, 1), ks[1]: (1, 0)}
    branches = {}
    for index, (label, p) in enumerate(dist):
        if p <= BRANCH_PROB_FLOOR:
            continue
        branches[label] = _branch_from_collapse(
            out, [0, 1], basis, index, wires, system, eigen_for_k[index]
        )
    probs = [p for _, p in dist]
    return _sample_report("quartet", wires, labels, probs, branches, seed, shots, uses)


@dataclass(frozen=True)
class TomographyEstimate:
    """Shot-based estimate of a gate's first column and relative phase."""

    p00: float
    p10: float
    relative_phase: float
    shots_per_setting: int
    phase_grid_size: int = field(default=16)
    gate_uses: int = field(default=0)


def tomography_baseline(
    u: np.ndarray, shots_per_setting: int, seed: int = 0, phase_grid_size: int = 16
) -> TomographyEstimate:
    """Estimate |<0|u|0>|^2, |<1|u|0>|^2 and the relative phase of the first
    row from counted shots, as a resource baseline for the protocols above.

    Setting one sends |1>|0> through a controlled use and counts the target;
    setting two scans equatorial inputs over ``phase_grid_size`` angles and
    fits the cosine fringe of the target's |0> probability by linear least
    squares. Every shot costs one gate use, which is the point of the
    comparison.
    """
    u = require_unitary(u, what="gate")
    if u.shape != (2, 2):
        raise ValueError("the baseline is defined for 2x2 gates")
    shots_per_setting = int(shots_per_setting)
    if shots_per_setting < 1:
        raise ValueError("shots_per_setting must be at least 1")
    if phase_grid_size < 3:
        raise ValueError("need at least 3 phase points to fit the fringe")
    rng = np.random.default_rng(seed)
    comp, comp_labels = computational_basis(2)

    probe = apply_controlled(basis_state((2, 2), (1, 0)), ControlledGate(0, 1, u))
    p0_exact = dict(outcome_distribution(probe, [1], comp, comp_labels))["0"]
    zeros = rng.binomial(shots_per_setting, p0_exact)
    p00 = zeros / shots_per_setting
    p10 = (shots_per_setting - zeros) / shots_per_setting

    thetas = 2.0 * np.pi * np.arange(phase_grid_size) / phase_grid_size
    fringe = []
    for theta in thetas:
        inp = product_state(
            [basis_state((2,), (1,)), State((2,), equatorial_state(theta))]
        )
        out = apply_controlled(inp, ControlledGate(0, 1, u))
        p0 = dict(outcome_distribution(out, [1], comp, comp_labels))["0"]
        fringe.append(rng.binomial(shots_per_setting, p0) / shots_per_setting)

    design = np.column_stack([np.ones_like(thetas), np.cos(thetas), np.sin(thetas)])
    _, alpha, beta = np.linalg.lstsq(design, np.array(fringe), rcond=None)[0]
    relative_phase = wrap_phase(math.atan2(-beta, alpha))
    return TomographyEstimate(
        p00=float(p00),
        p10=float(p10),
        relative_phase=float(relative_phase),
        shots_per_setting=shots_per_setting,
        phase_grid_size=int(phase_grid_size),
        gate_uses=shots_per_setting * (1 + int(phase_grid_size)),
    )
