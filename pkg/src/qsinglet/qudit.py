"""Locating the lone -1 eigenstate of a D-dimensional involution.

For a gate with spectrum {+1 (D-1 times), -1}, wiring D-1 control qubits to
the first D-1 parties of the D-party singlet turns the question "which party
carries the -1 eigenstate" into a pattern of control readings: at most one
control flips to -x, and the flipped position (or none) names the wire. All D
patterns are equally likely and the located wire holds the eigenstate exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import require_unitary
from .protocols import BRANCH_PROB_FLOOR, SpectrumError
from .register import (
    ControlledGate,
    State,
    apply_controlled,
    collapse,
    extract_subsystem,
    fidelity,
    outcome_distribution,
    plus_x,
    product_state,
    x_pattern_basis,
)
from .singlet import make_singlet

MAX_QUDIT_DIM = 5
INVOLUTION_ATOL = 1e-9
TRACE_ATOL = 1e-8


def householder_reflection(w) -> np.ndarray:
    """Reflection I - 2|w><w| for a normalized vector w.

    The canonical fixture for this protocol: exactly one -1 eigenvalue (at w)
    and +1 on the orthogonal complement.
    """
    w = np.asarray(w, dtype=complex).reshape(-1)
    norm = np.linalg.norm(w)
    if norm == 0.0:
        raise ValueError("reflection vector must be nonzero")
    w = w / norm
    return np.eye(w.shape[0]) - 2.0 * np.outer(w, np.conjugate(w))


def spectrum_check_minus_one(u: np.ndarray) -> np.ndarray:
    """Verify the spectrum {+1^(D-1), -1} and return the -1 eigenvector.

    Raises :class:`SpectrumError` unless u squares to the identity within 1e-9
    and has trace D - 2 within 1e-8 (one -1 among D-1 ones). The eigenvector
    is the normalized image of the projector (I - u)/2 on its best probe
    column, with the leading amplitude rotated real positive.
    """
    u = require_unitary(u, what="gate")
    d = u.shape[0]
    if np.max(np.abs(u @ u - np.eye(d))) > INVOLUTION_ATOL:
        raise SpectrumError("gate must square to the identity within 1e-9")
    if abs(np.trace(u) - (d - 2)) > TRACE_ATOL:
        raise SpectrumError(f"gate trace must be {d - 2} (exactly one -1 eigenvalue)")
    projector = (np.eye(d) - u) / 2.0
    column = int(np.argmax(np.linalg.norm(projector, axis=0)))
    vec = projector[:, column]
    vec = vec / np.linalg.norm(vec)
    for a in vec:
        if abs(a) > 1e-9:
            vec = vec * (np.conjugate(a) / abs(a))
            break
    return vec


def minus_one_network(u: np.ndarray):
    """Input state and gates: D-1 control qubits, each wired to one singlet party.

    Register layout: qubits 0..D-2 are controls, subsystems D-1..2D-2 hold the
    D-party singlet; control k targets party k. The last party has no control.
    """
    d = u.shape[0]
    plus = State((2,), plus_x())
    state = product_state([plus] * (d - 1) + [make_singlet(d)])
    gates = [ControlledGate(k, d - 1 + k, u) for k in range(d - 1)]
    return state, gates


def minus_one_output_state(u: np.ndarray) -> State:
    """Pre-measurement state of the -1 location protocol."""
    state, gates = minus_one_network(u)
    for gate in gates:
        state = apply_controlled(state, gate)
    return state


def _located_wire(pattern_index: int, d: int) -> int | None:
    """Singlet party named by a control pattern, or None if forbidden.

    Bit k of the pattern (most significant first) is 1 when control k read -x.
    One flip locates that party; no flips locate the last; more are forbidden.
    """
    bits = [(pattern_index >> (d - 2 - k)) & 1 for k in range(d - 1)]
    flips = sum(bits)
    if flips == 0:
        return d - 1
    if flips == 1:
        return bits.index(1)
    return None


@dataclass(frozen=True)
class QuditBranch:
    """One control pattern with its exact probability and located eigenstate."""

    probability: float
    located_wire: int
    fidelity: float


@dataclass(frozen=True)
class QuditReport:
    """Exact pattern analysis plus sampled shots for the -1 location protocol."""

    protocol: str
    d: int
    branches: dict
    exact_distribution: dict
    histogram: dict
    outcome_label: str | None
    outcome_probability: float | None
    located_wire: int | None
    located_fidelity: float | None
    shots_used: int
    seed: int
    gate_uses: int


def exact_pattern_distribution(u: np.ndarray) -> dict:
    """Exact Born probability of every control pattern, keyed "+x,-x,..."."""
    spectrum_check_minus_one(u)  # enforce the spectrum precondition
    d = u.shape[0]
    out = minus_one_output_state(u)
    basis, labels = x_pattern_basis(d - 1)
    dist = outcome_distribution(out, range(d - 1), basis, labels)
    return {label: float(p) for label, p in dist}


def run_qudit_minus_one(u: np.ndarray, seed: int = 0, shots: int = 1) -> QuditReport:
    """Locate the -1 eigenstate of a D-dimensional involution, D in 2..5.

    Uses the gate D-1 times. Every allowed pattern occurs with probability
    1/D; the located wire is extracted from the collapsed state and compared
    with the -1 eigenvector.
    """
    shots = int(shots)
    if shots < 0:
        raise ValueError("shots must be nonnegative")
    u = require_unitary(u, what="gate")
    d = u.shape[0]
    if not 2 <= d <= MAX_QUDIT_DIM:
        raise ValueError(f"gate dimension must be in 2..{MAX_QUDIT_DIM}, got {d}")
    target = spectrum_check_minus_one(u)

    state, gates = minus_one_network(u)
    uses = 0
    for gate in gates:
        state = apply_controlled(state, gate)
        uses += gate.power
    basis, labels = x_pattern_basis(d - 1)
    dist = outcome_distribution(state, range(d - 1), basis, labels)

    branches = {}
    for index, (label, p) in enumerate(dist):
        if p <= BRANCH_PROB_FLOOR:
            continue
        wire = _located_wire(index, d)
        if wire is None:
            raise SpectrumError(
                f"forbidden pattern {label} has probability {p!r}; "
                "the gate does not satisfy the protocol's spectrum assumption"
            )
        _, residual = collapse(state, range(d - 1), basis, index)
        wire_state = extract_subsystem(residual, d - 1 + wire)
        branches[label] = QuditBranch(float(p), wire, fidelity(wire_state, target))

    exact = {label: float(p) for label, p in dist}
    histogram = {}
    outcome = None
    if shots > 0:
        rng = np.random.default_rng(seed)
        probs = np.clip(np.array([p for _, p in dist]), 0.0, None)
        draws = rng.choice(len(labels), size=shots, p=probs / probs.sum())
        histogram = {label: 0 for label in labels}
        for draw in draws:
            histogram[labels[int(draw)]] += 1
        outcome = labels[int(draws[0])]
    headline = branches.get(outcome) if outcome is not None else None
    return QuditReport(
        protocol="qudit-minus-one",
        d=d,
        branches=branches,
        exact_distribution=exact,
        histogram=histogram,
        outcome_label=outcome,
        outcome_probability=exact.get(outcome) if outcome is not None else None,
        located_wire=headline.located_wire if headline else None,
        located_fidelity=headline.fidelity if headline else None,
        shots_used=shots,
        seed=int(seed),
        gate_uses=uses,
    )
