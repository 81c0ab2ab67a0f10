"""State-vector simulator for registers of mixed qubit/qudit subsystems.

A register is an ordered list of subsystem dimensions. Amplitudes are stored
as one dense complex vector indexed in mixed radix with the first listed
subsystem as the most significant digit, matching ``linalg.tensor_product``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import UNITARY_ATOL, require_unitary

NORM_ATOL = 1e-10
PHASE_FIX_ATOL = 1e-9


class EntangledSubsystemError(ValueError):
    """Raised when a subsystem is extracted across a non-product cut."""


@dataclass(frozen=True)
class State:
    """Normalized pure state of a register.

    Parameters
    ----------
    dims : tuple of int
        Subsystem dimensions in register order, each at least 2.
    amps : np.ndarray
        Complex amplitude vector of length ``prod(dims)`` with unit norm
        within 1e-10.
    """

    dims: tuple
    amps: np.ndarray

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        amps = np.asarray(self.amps, dtype=complex).reshape(-1)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "amps", amps)
        if len(dims) == 0 or any(d < 2 for d in dims):
            raise ValueError(f"subsystem dimensions must all be >= 2, got {dims}")
        if amps.shape[0] != math.prod(dims):
            raise ValueError(f"expected {math.prod(dims)} amplitudes, got {amps.shape[0]}")
        if not np.all(np.isfinite(amps.view(float))):
            raise ValueError("amplitudes must be finite")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_ATOL:
            raise ValueError(f"state norm {norm!r} is not 1 within {NORM_ATOL:g}")

    @property
    def size(self) -> int:
        return self.amps.shape[0]

    def tensor(self) -> np.ndarray:
        """Amplitudes reshaped to one axis per subsystem."""
        return self.amps.reshape(self.dims)


def digits_to_index(dims, digits) -> int:
    """Mixed-radix index of ``digits``, first subsystem most significant."""
    if len(digits) != len(dims):
        raise ValueError("one digit per subsystem required")
    index = 0
    for d, digit in zip(dims, digits):
        if not 0 <= digit < d:
            raise ValueError(f"digit {digit} out of range for dimension {d}")
        index = index * d + digit
    return index


def index_to_digits(dims, index) -> tuple:
    """Inverse of :func:`digits_to_index`."""
    digits = []
    for d in reversed(dims):
        index, digit = divmod(index, d)
        digits.append(digit)
    return tuple(reversed(digits))


def basis_state(dims, digits) -> State:
    """Computational basis state |digits> on a register of shape ``dims``."""
    amps = np.zeros(math.prod(dims), dtype=complex)
    amps[digits_to_index(dims, digits)] = 1.0
    return State(tuple(dims), amps)


def product_state(factors) -> State:
    """Tensor product of component states, in register order."""
    factors = list(factors)
    if not factors:
        raise ValueError("need at least one factor")
    dims = tuple(d for f in factors for d in f.dims)
    amps = factors[0].amps
    for f in factors[1:]:
        amps = np.kron(amps, f.amps)
    return State(dims, amps)


def as_amplitudes(x) -> np.ndarray:
    """Amplitude vector of a State or array-like."""
    if isinstance(x, State):
        return x.amps
    return np.asarray(x, dtype=complex).reshape(-1)


def fidelity(a, b) -> float:
    """Squared overlap |<a|b>|^2 of two pure states of equal size."""
    va, vb = as_amplitudes(a), as_amplitudes(b)
    if va.shape != vb.shape:
        raise ValueError(f"size mismatch: {va.shape} vs {vb.shape}")
    return float(abs(np.vdot(va, vb)) ** 2)


def _check_targets(dims, targets):
    targets = [int(t) for t in targets]
    if len(set(targets)) != len(targets):
        raise ValueError(f"duplicate target subsystems in {targets}")
    for t in targets:
        if not 0 <= t < len(dims):
            raise ValueError(f"subsystem {t} out of range for {len(dims)} subsystems")
    return targets


def apply_unitary(state: State, targets, u: np.ndarray) -> State:
    """Apply a unitary to the listed subsystems of ``state``.

    ``u`` acts on the composite index of the targets in listed order (first
    listed target most significant), so it must be square with dimension equal
    to the product of the target dimensions.
    """
    targets = _check_targets(state.dims, targets)
    if not targets:
        raise ValueError("need at least one target subsystem")
    block = math.prod(state.dims[t] for t in targets)
    u = require_unitary(u, what="gate")
    if u.shape != (block, block):
        raise ValueError(f"gate shape {u.shape} does not match target dimension {block}")
    n = len(state.dims)
    dest = list(range(n - len(targets), n))
    psi = np.moveaxis(state.tensor(), targets, dest)
    moved_shape = psi.shape
    psi = psi.reshape(-1, block) @ u.T
    psi = np.moveaxis(psi.reshape(moved_shape), dest, targets)
    return State(state.dims, psi.reshape(-1))


@dataclass(frozen=True)
class ControlledGate:
    """A qubit-controlled power of a unitary.

    ``control`` must index a dimension-2 subsystem; ``unitary`` raised to
    ``power`` is applied to ``target`` on the control's |1> branch. ``power``
    counts as that many uses of the base gate.
    """

    control: int
    target: int
    unitary: np.ndarray
    power: int = 1

    def __post_init__(self):
        if int(self.power) < 1:
            raise ValueError("power must be a positive integer")
        object.__setattr__(self, "power", int(self.power))


def controlled_matrix(unitary: np.ndarray, power: int = 1) -> np.ndarray:
    """Block matrix I (+) U^power on a (control, target) pair, control first."""
    u = require_unitary(unitary, what="controlled unitary")
    d = u.shape[0]
    up = np.linalg.matrix_power(u, power)
    full = np.zeros((2 * d, 2 * d), dtype=complex)
    full[:d, :d] = np.eye(d)
    full[d:, d:] = up
    return full


def apply_controlled(state: State, gate: ControlledGate) -> State:
    """Apply a :class:`ControlledGate` to ``state``."""
    if gate.control == gate.target:
        raise ValueError("control and target must differ")
    _check_targets(state.dims, [gate.control, gate.target])
    if state.dims[gate.control] != 2:
        raise ValueError(f"control subsystem must have dimension 2, got {state.dims[gate.control]}")
    d = state.dims[gate.target]
    u = np.asarray(gate.unitary, dtype=complex)
    if u.shape != (d, d):
        raise ValueError(f"gate shape {u.shape} does not match target dimension {d}")
    return apply_unitary(state, [gate.control, gate.target], controlled_matrix(u, gate.power))


@dataclass(frozen=True)
class MeasurementRecord:
    """One sampled measurement outcome with its post-collapse state."""

    outcome_index: int
    outcome_label: str
    probability: float
    residual: State


def _basis_matrix(dims, subsystems, basis):
    block = math.prod(dims[s] for s in subsystems)
    b = np.asarray(basis, dtype=complex)
    if b.ndim != 2 or b.shape != (block, block):
        raise ValueError(
            f"measurement basis must be {block} orthonormal vectors of length {block}, "
            f"got shape {b.shape}"
        )
    gram = b @ np.conjugate(b).T
    if np.max(np.abs(gram - np.eye(block))) > UNITARY_ATOL:
        raise ValueError("measurement basis is not orthonormal and complete within 1e-10")
    return b


def _measurement_coefficients(state: State, subsystems, basis):
    """Rows of the basis against the state: coefficient matrix of shape (K, rest)."""
    subsystems = _check_targets(state.dims, subsystems)
    b = _basis_matrix(state.dims, subsystems, basis)
    k = len(subsystems)
    psi = np.moveaxis(state.tensor(), subsystems, range(k))
    moved_shape = psi.shape
    coeff = np.conjugate(b) @ psi.reshape(b.shape[0], -1)
    return b, coeff, moved_shape, subsystems


def outcome_distribution(state: State, subsystems, basis, labels=None):
    """Exact Born probabilities of measuring ``subsystems`` in ``basis``.

    Returns a list of (label, probability) pairs in basis order. Labels
    default to the stringified basis index.
    """
    _, coeff, _, _ = _measurement_coefficients(state, subsystems, basis)
    probs = np.sum(np.abs(coeff) ** 2, axis=1)
    labels = _outcome_labels(labels, probs.shape[0])
    return list(zip(labels, [float(p) for p in probs]))


def _outcome_labels(labels, count):
    if labels is None:
        return [str(i) for i in range(count)]
    labels = [str(l) for l in labels]
    if len(labels) != count:
        raise ValueError(f"expected {count} labels, got {len(labels)}")
    return labels


def collapse(state: State, subsystems, basis, outcome: int):
    """Probability of one basis outcome and the post-collapse state.

    The residual keeps the full register layout: the measured block is left in
    the observed basis vector, tensored with the renormalized remainder. The
    outcome must have nonzero probability.
    """
    b, coeff, moved_shape, subsystems = _measurement_coefficients(state, subsystems, basis)
    outcome = int(outcome)
    if not 0 <= outcome < b.shape[0]:
        raise ValueError(f"outcome {outcome} out of range for {b.shape[0]} basis vectors")
    p = float(np.sum(np.abs(coeff[outcome]) ** 2))
    if p <= 0.0:
        raise ValueError(f"outcome {outcome} has probability 0; nothing to collapse onto")
    residual_rest = coeff[outcome] / np.sqrt(p)
    psi = np.outer(b[outcome], residual_rest).reshape(moved_shape)
    psi = np.moveaxis(psi, range(len(subsystems)), subsystems)
    return p, State(state.dims, psi.reshape(-1))


def measure(state: State, subsystems, basis, rng, labels=None) -> MeasurementRecord:
    """Sample one projective measurement and collapse the state."""
    _, coeff, _, _ = _measurement_coefficients(state, subsystems, basis)
    probs = np.sum(np.abs(coeff) ** 2, axis=1)
    labels = _outcome_labels(labels, probs.shape[0])
    total = probs.sum()
    if abs(total - 1.0) > NORM_ATOL:
        raise ValueError("measurement probabilities do not sum to 1")
    outcome = int(rng.choice(probs.shape[0], p=probs / total))
    p, residual = collapse(state, subsystems, basis, outcome)
    return MeasurementRecord(outcome, labels[outcome], p, residual)


def extract_subsystem(state: State, subsystem: int) -> State:
    """Pure state of one subsystem when it is unentangled with the rest.

    The cut is checked by singular value decomposition: the largest Schmidt
    coefficient must be 1 within 1e-10, otherwise
    :class:`EntangledSubsystemError` is raised. The returned vector's first
    amplitude above 1e-9 in magnitude is rotated to the positive real axis so
    repeated extractions agree on a phase.
    """
    (subsystem,) = _check_targets(state.dims, [subsystem])
    d = state.dims[subsystem]
    mat = np.moveaxis(state.tensor(), subsystem, 0).reshape(d, -1)
    left, svals, _ = np.linalg.svd(mat, full_matrices=False)
    if svals[0] < 1.0 - NORM_ATOL:
        raise EntangledSubsystemError(
            f"subsystem {subsystem} is entangled with the rest "
            f"(largest Schmidt coefficient {svals[0]!r})"
        )
    vec = left[:, 0]
    for a in vec:
        if abs(a) > PHASE_FIX_ATOL:
            vec = vec * (np.conjugate(a) / abs(a))
            break
    return State((d,), vec)


def plus_x() -> np.ndarray:
    """Qubit |+x> = (|0> + |1>)/sqrt(2)."""
    return np.array([1.0, 1.0], dtype=complex) / np.sqrt(2.0)


def minus_x() -> np.ndarray:
    """Qubit |-x> = (|0> - |1>)/sqrt(2)."""
    return np.array([1.0, -1.0], dtype=complex) / np.sqrt(2.0)


X_LABELS = ("+x", "-x")


def x_basis():
    """Single-qubit {|+x>, |-x>} basis with labels ("+x", "-x")."""
    return np.stack([plus_x(), minus_x()]), list(X_LABELS)


def x_pattern_basis(qubits: int):
    """Product +-x basis on ``qubits`` qubits, labels like "+x,-x,...".

    Pattern index runs in binary with +x as 0 and -x as 1, first qubit most
    significant, matching the register index convention.
    """
    single = [plus_x(), minus_x()]
    vectors, labels = [], []
    for pattern in range(2 ** qubits):
        bits = [(pattern >> (qubits - 1 - i)) & 1 for i in range(qubits)]
        vec = np.array([1.0], dtype=complex)
        for bit in bits:
            vec = np.kron(vec, single[bit])
        vectors.append(vec)
        labels.append(",".join(X_LABELS[bit] for bit in bits))
    return np.stack(vectors), labels


def computational_basis(dim: int):
    """Identity basis with digit-string labels."""
    return np.eye(dim, dtype=complex), [str(i) for i in range(dim)]
