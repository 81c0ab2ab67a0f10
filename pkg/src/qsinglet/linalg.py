"""Dense complex linear algebra helpers shared by the simulator and protocols.

Matrices are plain ``np.ndarray`` objects with dtype complex128. Composite
indices follow one convention everywhere: in a tensor product the first factor
is the most significant digit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

UNITARY_ATOL = 1e-10
TWO_PI = 2.0 * np.pi


def tensor_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product with the first factor as the most significant index."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def dagger(m: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return np.conjugate(m).T


def is_unitary(m: np.ndarray, atol: float = UNITARY_ATOL) -> bool:
    """Check whether ``m`` is unitary within ``atol``.

    Parameters
    ----------
    m : np.ndarray
        Square complex matrix. A non-square input raises ``ValueError``.
    atol : float
        Largest tolerated absolute deviation of ``m^dagger m`` from identity.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m.view(float))):
        return False
    defect = dagger(m) @ m - np.eye(m.shape[0])
    return bool(np.max(np.abs(defect)) <= atol)


def require_unitary(m: np.ndarray, atol: float = UNITARY_ATOL, what: str = "matrix") -> np.ndarray:
    """Return ``m`` as complex ndarray, raising ValueError unless unitary."""
    m = np.asarray(m, dtype=complex)
    if not is_unitary(m, atol=atol):
        raise ValueError(f"{what} is not unitary within {atol:g}")
    return m


def wrap_phase(phi):
    """Reduce an angle (scalar or array) to the interval [0, 2*pi)."""
    out = np.mod(phi, TWO_PI)
    # np.mod can round a tiny negative input up to exactly 2*pi
    out = np.where(out >= TWO_PI, 0.0, out)
    return float(out) if np.isscalar(phi) else out


def phase_distance(a: float, b: float) -> float:
    """Distance between two angles on the circle, in [0, pi]."""
    return float(abs((a - b + np.pi) % TWO_PI - np.pi))


@dataclass
class EigenSystem:
    """Orthonormal eigenvectors (columns of ``vectors``) with phases in [0, 2*pi).

    ``degenerate`` marks systems whose phases coincide, in which case the
    vectors are a conventional basis rather than a distinguished one.
    """

    vectors: np.ndarray
    phases: np.ndarray
    degenerate: bool = field(default=False)

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=complex)
        self.phases = np.atleast_1d(np.asarray(self.phases, dtype=float))
        dim = self.vectors.shape[0]
        if self.vectors.shape != (dim, dim) or self.phases.shape != (dim,):
            raise ValueError("need a dim x dim vector matrix and dim phases")
        if not is_unitary(self.vectors):
            raise ValueError("eigenvectors are not orthonormal within 1e-10")
        if np.any(self.phases < 0.0) or np.any(self.phases >= TWO_PI):
            raise ValueError("eigenphases must lie in [0, 2*pi)")

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    def vector(self, k: int) -> np.ndarray:
        return self.vectors[:, k].copy()

    def eigenvalues(self) -> np.ndarray:
        return np.exp(1j * self.phases)


def unitary_from_eigensystem(system: EigenSystem) -> np.ndarray:
    """Assemble ``V diag(e^{i phases}) V^dagger`` from an eigensystem."""
    v = system.vectors
    return (v * np.exp(1j * system.phases)) @ dagger(v)


def haar_random_unitary(dim: int, seed: int) -> np.ndarray:
    """Draw a Haar-distributed unitary, bit-identical for a fixed (dim, seed).

    Uses the QR construction: a complex Gaussian matrix is orthonormalized and
    the R diagonal's phases are absorbed so the distribution is exactly Haar
    rather than QR-convention biased.
    """
    if dim < 1:
        raise ValueError("dim must be at least 1")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


DEGENERACY_ATOL = 1e-12


def eigendecompose_2x2_unitary(u: np.ndarray) -> EigenSystem:
    """Analytic eigendecomposition of a 2x2 unitary.

    Solves the characteristic polynomial in closed form. When the two
    eigenvalues coincide within 1e-12 the matrix is a global phase times the
    identity; the computational basis is returned with ``degenerate=True``.
    """
    u = require_unitary(u)
    if u.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {u.shape}")
    a, b = u[0, 0], u[0, 1]
    c, d = u[1, 0], u[1, 1]
    trace = a + d
    det = a * d - b * c
    root = np.sqrt(trace * trace - 4.0 * det + 0j)
    lam1 = (trace + root) / 2.0
    lam2 = (trace - root) / 2.0
    if abs(lam1 - lam2) <= DEGENERACY_ATOL:
        phase = wrap_phase(float(np.angle(lam1)))
        return EigenSystem(np.eye(2, dtype=complex), np.array([phase, phase]), degenerate=True)
    # rows of (u - lam1*I) both annihilate v1; pick the better conditioned one
    cand_a = np.array([b, lam1 - a])
    cand_b = np.array([lam1 - d, c])
    v1 = cand_a if np.linalg.norm(cand_a) >= np.linalg.norm(cand_b) else cand_b
    v1 = v1 / np.linalg.norm(v1)
    # a 2x2 unitary is normal, so the second eigenvector is the orthogonal complement
    v2 = np.array([-np.conjugate(v1[1]), np.conjugate(v1[0])])
    phases = wrap_phase(np.angle(np.array([lam1, lam2])))
    return EigenSystem(np.column_stack([v1, v2]), phases)


def unitary_to_json(u: np.ndarray) -> dict:
    """Serialize a unitary to the ``{"dim": n, "entries": [[re, im], ...]}`` form."""
    u = require_unitary(u)
    entries = [[float(z.real), float(z.imag)] for z in u.reshape(-1)]
    return {"dim": int(u.shape[0]), "entries": entries}


def unitary_from_json(obj: dict) -> np.ndarray:
    """Rebuild a unitary from its JSON form, validating shape and unitarity."""
    try:
        dim = int(obj["dim"])
        entries = obj["entries"]
    except (KeyError, TypeError) as exc:
        raise ValueError("matrix JSON needs 'dim' and 'entries' keys") from exc
    if dim < 1 or len(entries) != dim * dim:
        raise ValueError(f"matrix JSON needs exactly dim*dim = {dim * dim} entries")
    flat = np.array([complex(re, im) for re, im in entries])
    return require_unitary(flat.reshape(dim, dim), what="matrix JSON content")


def save_unitary(path, u: np.ndarray) -> None:
    """Write a unitary to ``path`` as matrix JSON (row-major entries)."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(unitary_to_json(u), fh, sort_keys=True)
        fh.write("\n")


def load_unitary(path) -> np.ndarray:
    """Read matrix JSON from ``path``; non-unitary content is rejected."""
    with open(path, "r", encoding="utf-8") as fh:
        return unitary_from_json(json.load(fh))
