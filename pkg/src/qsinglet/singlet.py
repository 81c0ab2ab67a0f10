"""Totally antisymmetric singlet states of D subsystems of dimension D.

The D-party singlet carries amplitude sign(p)/sqrt(D!) on every permutation
basis state |p(0) p(1) ... p(D-1)> and zero elsewhere. Applying the same
unitary V to every subsystem leaves it invariant up to the factor det(V).
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from .linalg import EigenSystem, require_unitary
from .register import State, apply_unitary, digits_to_index


def permutation_parity(perm) -> int:
    """Sign (+1 or -1) of a permutation of 0..n-1, by counting selection swaps."""
    perm = [int(x) for x in perm]
    n = len(perm)
    if sorted(perm) != list(range(n)):
        raise ValueError(f"{perm} is not a permutation of 0..{n - 1}")
    swaps = 0
    for i in range(n):
        if perm[i] != i:
            j = perm.index(i, i + 1)
            perm[i], perm[j] = perm[j], perm[i]
            swaps += 1
    return -1 if swaps % 2 else 1


def make_singlet(d: int) -> State:
    """The D-party singlet on a register of D subsystems of dimension D."""
    if d < 2:
        raise ValueError("the singlet needs at least 2 subsystems")
    dims = (d,) * d
    amps = np.zeros(d ** d, dtype=complex)
    scale = 1.0 / math.sqrt(math.factorial(d))
    for perm in itertools.permutations(range(d)):
        amps[digits_to_index(dims, perm)] = permutation_parity(perm) * scale
    return State(dims, amps)


def _apply_everywhere(state: State, v: np.ndarray) -> State:
    for k in range(len(state.dims)):
        state = apply_unitary(state, [k], v)
    return state


def transform_invariance_defect(d: int, v: np.ndarray):
    """Best-fit global phase of V applied to every singlet party, plus residual.

    Returns
    -------
    phase : complex
        Overlap <singlet| V^(x D) |singlet>, the least-squares global factor.
        For any unitary V this equals det(V) up to the returned defect.
    defect : float
        Norm of ``V^(x D)|singlet> - phase * |singlet>``.
    """
    v = require_unitary(v, what="subsystem transform")
    if v.shape != (d, d):
        raise ValueError(f"transform must be {d}x{d}, got {v.shape}")
    reference = make_singlet(d)
    moved = _apply_everywhere(reference, v)
    phase = complex(np.vdot(reference.amps, moved.amps))
    defect = float(np.linalg.norm(moved.amps - phase * reference.amps))
    return phase, defect


def singlet_in_eigenbasis(d: int, system: EigenSystem) -> State:
    """Singlet expanded over an eigenbasis: sum of signed eigenvector products.

    Equals ``det(V)`` times :func:`make_singlet` of the same size, with V the
    eigenvector matrix.
    """
    if system.dim != d:
        raise ValueError(f"eigenbasis dimension {system.dim} does not match d={d}")
    return _apply_everywhere(make_singlet(d), system.vectors)
