"""Dense matrix primitives for small Hermitian and unitary matrices.

Conventions
-----------
Eigenangles are the arguments of unitary eigenvalues, taken in ``(-pi, pi]``
and listed in non-increasing order.  Eigenvectors are normalized so that
their largest-modulus component is real and positive.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import schur

from .config import DEFAULT_TOL, Tolerances
from .errors import BranchAmbiguityError, NumericError, ValidationError

SQRT2 = float(np.sqrt(2.0))


def _as_square(a, name: str) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise ValidationError(f"{name} must be a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError(f"{name} has non-finite entries")
    return a


def opnorm(a) -> float:
    """Spectral (operator) norm."""
    return float(np.linalg.norm(a, 2))


def hermitian_part(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    return 0.5 * (a + a.conj().T)


def as_hermitian(a, tol: Tolerances = DEFAULT_TOL, name: str = "matrix") -> np.ndarray:
    """Validate ``a`` as Hermitian and return an exactly Hermitian copy."""
    a = _as_square(a, name)
    scale = opnorm(a)
    defect = opnorm(a - a.conj().T)
    if defect > tol.hermiticity_tol * scale:
        raise ValidationError(
            f"{name} is not Hermitian: ||A - A*|| = {defect:.3e} exceeds "
            f"{tol.hermiticity_tol:.1e} * ||A||"
        )
    return hermitian_part(a)


def as_unitary(u, tol: Tolerances = DEFAULT_TOL, name: str = "matrix") -> np.ndarray:
    u = _as_square(u, name)
    defect = opnorm(u.conj().T @ u - np.eye(u.shape[0]))
    if defect > tol.unitarity_tol:
        raise ValidationError(f"{name} is not unitary: ||U*U - 1|| = {defect:.3e}")
    return u


def expm_i(x, t: float = 1.0, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Return ``exp(i t x)`` for Hermitian ``x``."""
    x = as_hermitian(x, tol, "x")
    w, v = np.linalg.eigh(x)
    return (v * np.exp(1j * t * w)) @ v.conj().T


def _wrap_angles(theta: np.ndarray) -> np.ndarray:
    """Map angles into ``(-pi, pi]``."""
    theta = np.mod(theta + np.pi, 2 * np.pi) - np.pi
    theta[theta <= -np.pi] = np.pi
    return theta


def _normalize_phases(vectors: np.ndarray) -> np.ndarray:
    out = vectors.copy()
    for k in range(out.shape[1]):
        col = out[:, k]
        idx = int(np.argmax(np.abs(col)))
        phase = col[idx] / abs(col[idx])
        out[:, k] = col / phase
    return out


@dataclass(frozen=True)
class SpectralDecomposition:
    angles: np.ndarray
    vectors: np.ndarray

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.exp(1j * self.angles)

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.eigenvalues) @ self.vectors.conj().T


def _tie_key(col: np.ndarray) -> float:
    nz = np.flatnonzero(np.abs(col) > 1e-12)
    return float(col[nz[0]].imag) if nz.size else 0.0


def eig_unitary(u, tol: Tolerances = DEFAULT_TOL) -> SpectralDecomposition:
    """Spectral decomposition of a unitary matrix.

    Uses the complex Schur form, which is diagonal for normal matrices and
    always yields an orthonormal basis, even for repeated eigenvalues.
    """
    u = as_unitary(u, tol, "u")
    tri, basis = schur(u, output="complex")
    lam = np.diag(tri)
    angles = _wrap_angles(np.angle(lam))
    vectors = _normalize_phases(basis)

    order = sorted(
        range(len(angles)),
        key=lambda k: (-round(float(angles[k]), 12), -_tie_key(vectors[:, k])),
    )
    angles = angles[order]
    vectors = vectors[:, order]

    residual = np.linalg.norm(u @ vectors - vectors * np.exp(1j * angles), axis=0)
    if residual.max() > tol.eig_residual_tol:
        raise NumericError(
            f"unitary eigensolver did not converge: max residual {residual.max():.3e}"
        )
    return SpectralDecomposition(angles=angles, vectors=vectors)


def eigenangles(u) -> np.ndarray:
    """Sorted eigenangles of one unitary or a stack of unitaries (no validation)."""
    lam = np.linalg.eigvals(np.asarray(u, dtype=complex))
    theta = np.angle(lam)
    theta = np.where(theta <= -np.pi, np.pi, theta)
    return -np.sort(-theta, axis=-1)


def principal_log_unitary(u, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Hermitian ``z`` with ``exp(i z) = u`` and spectrum in ``(-pi, pi)``."""
    dec = eig_unitary(u, tol)
    cut_distance = np.abs(dec.eigenvalues + 1.0)
    bad = np.flatnonzero(cut_distance <= tol.gap_tol)
    if bad.size:
        angle = float(dec.angles[bad[0]])
        raise BranchAmbiguityError(
            f"eigenvalue with angle {angle:.12f} lies within {tol.gap_tol:.1e} of -1; "
            "principal logarithm is ambiguous",
            angle=angle,
        )
    z = (dec.vectors * dec.angles) @ dec.vectors.conj().T
    return hermitian_part(z)


def dist_to_identity(u) -> float:
    """``||u - 1||_inf = 2 max |sin(theta_k / 2)|``."""
    theta = eigenangles(u)
    return float(2.0 * np.max(np.abs(np.sin(theta / 2.0))))


def commutator_norm(x, y) -> float:
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    if x.shape != y.shape:
        raise ValidationError(f"dimension mismatch: {x.shape} vs {y.shape}")
    return float(np.linalg.norm(x @ y - y @ x, "fro"))
