"""Smooth spectral data along ``t -> exp(itx) exp(iy)``.

Eigenvectors are carried from one grid point to the next by the direct
rotation between consecutive Riesz projections; eigenangles are labeled by
continuity, starting from the sorted labeling at ``t_min``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_TOL, Tolerances
from .errors import (
    ConditioningError,
    DegenerateSpectrumError,
    EmptySpectrumError,
    NumericError,
    TransportError,
    ValidationError,
)
from .linalg import (
    SQRT2,
    as_hermitian,
    eig_unitary,
    eigenangles,
    expm_i,
    opnorm,
    principal_log_unitary,
)

QUADRATURE_NODES = 64
MAX_QUADRATURE_NODES = 1 << 14
MAX_BISECTION_DEPTH = 20


@dataclass(frozen=True)
class GeodesicPath:
    """The segment ``u(t) = exp(itx) exp(iy)`` on ``[t_min, t_max]``."""

    x: np.ndarray
    y: np.ndarray
    t_min: float = 0.0
    t_max: float = 1.0
    tol: Tolerances = field(default=DEFAULT_TOL, repr=False, compare=False)

    def __post_init__(self):
        x = as_hermitian(self.x, self.tol, "x")
        y = as_hermitian(self.y, self.tol, "y")
        if x.shape != y.shape:
            raise ValidationError(f"x and y differ in shape: {x.shape} vs {y.shape}")
        if not float(self.t_min) < float(self.t_max):
            raise ValidationError(f"need t_min < t_max, got [{self.t_min}, {self.t_max}]")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "t_min", float(self.t_min))
        object.__setattr__(self, "t_max", float(self.t_max))
        w, v = np.linalg.eigh(x)
        object.__setattr__(self, "_xeig", (w, v))
        object.__setattr__(self, "_base", expm_i(y, 1.0, self.tol))

    @property
    def n(self) -> int:
        return self.x.shape[0]

    def grid(self, size: int) -> np.ndarray:
        if size < 2:
            raise ValidationError(f"grid size must be >= 2, got {size}")
        return np.linspace(self.t_min, self.t_max, size)

    def _u(self, t) -> np.ndarray:
        w, v = self._xeig
        t = np.asarray(t, dtype=float)
        phases = np.exp(1j * t[..., None] * w)
        left = (v * phases[..., None, :]) @ v.conj().T
        return left @ self._base

    def evaluate(self, t: float) -> np.ndarray:
        if not (self.t_min <= t <= self.t_max):
            raise ValidationError(f"t = {t} outside [{self.t_min}, {self.t_max}]")
        return self._u(float(t))

    def evaluate_many(self, ts) -> np.ndarray:
        """Stack of ``u(t)`` for an array of parameters (no range check)."""
        return self._u(np.asarray(ts, dtype=float))

    def angles_on(self, ts) -> np.ndarray:
        """Per-point sorted eigenangles, shape ``(len(ts), n)``."""
        return eigenangles(self.evaluate_many(ts))

    def radius_on(self, ts) -> np.ndarray:
        """``||u(t) - 1||_inf`` at each parameter."""
        theta = self.angles_on(ts)
        return 2.0 * np.max(np.abs(np.sin(theta / 2.0)), axis=-1)

    def doubled(self) -> GeodesicPath:
        """Path of ``u(t) (+) conj(u(t))`` with generators ``x (+) -conj(x)``, ``y (+) -conj(y)``."""
        n = self.n
        X = np.zeros((2 * n, 2 * n), dtype=complex)
        Y = np.zeros_like(X)
        X[:n, :n], X[n:, n:] = self.x, -self.x.conj()
        Y[:n, :n], Y[n:, n:] = self.y, -self.y.conj()
        return GeodesicPath(X, Y, self.t_min, self.t_max, self.tol)


def chord_gaps(theta: np.ndarray) -> np.ndarray:
    """Minimal pairwise chord ``|e^{i a} - e^{i b}|`` along the last axis."""
    theta = np.asarray(theta, dtype=float)
    n = theta.shape[-1]
    if n < 2:
        return np.full(theta.shape[:-1], np.inf)
    diff = theta[..., :, None] - theta[..., None, :]
    chord = 2.0 * np.abs(np.sin(diff / 2.0))
    iu = np.triu_indices(n, 1)
    return chord[..., iu[0], iu[1]].min(axis=-1)


@dataclass(frozen=True)
class SpectralProjector:
    p: np.ndarray
    center: complex
    radius: float
    nodes: int = QUADRATURE_NODES

    @property
    def rank(self) -> int:
        return int(round(np.trace(self.p).real))


def spectral_projector(u, angle: float, radius: float, tol: Tolerances = DEFAULT_TOL) -> SpectralProjector:
    """Riesz projection onto the eigenvalues inside the circle
    ``|lambda - e^{i angle}| = radius``.

    The contour integral is evaluated with the trapezoidal rule; the node
    count doubles until ``||p^2 - p|| < tol.projector_tol``.
    """
    u = np.asarray(u, dtype=complex)
    n = u.shape[0]
    if radius <= 0:
        raise ValidationError(f"contour radius must be positive, got {radius}")
    center = complex(np.exp(1j * angle))
    lam = np.linalg.eigvals(u)
    dist = np.abs(lam - center)
    if np.min(np.abs(dist - radius)) < tol.gap_tol:
        raise ConditioningError(
            f"contour of radius {radius:.3e} passes within {tol.gap_tol:.1e} of the spectrum"
        )
    enclosed = int(np.count_nonzero(dist < radius))
    if enclosed == 0:
        raise EmptySpectrumError(f"no eigenvalue within {radius:.3e} of angle {angle:.6f}")

    eye = np.eye(n)
    nodes = QUADRATURE_NODES
    while True:
        phi = 2.0 * np.pi * np.arange(nodes) / nodes
        offsets = radius * np.exp(1j * phi)
        resolvents = np.linalg.inv((center + offsets)[:, None, None] * eye - u)
        p = np.tensordot(offsets, resolvents, axes=1) / nodes
        defect = opnorm(p @ p - p)
        if defect < tol.projector_tol:
            break
        if nodes >= MAX_QUADRATURE_NODES:
            raise ConditioningError(
                f"projector quadrature did not converge (idempotency defect {defect:.3e})"
            )
        nodes *= 2

    asym = opnorm(p - p.conj().T)
    if asym > 1e-8:
        raise ConditioningError(f"Riesz projection is not self-adjoint (defect {asym:.3e})")
    return SpectralProjector(p=0.5 * (p + p.conj().T), center=center, radius=radius, nodes=nodes)


def _as_projector_matrix(p) -> np.ndarray:
    return np.asarray(p.p if isinstance(p, SpectralProjector) else p, dtype=complex)


def direct_rotation(p0, p1, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Unitary ``w = exp(1/2 log(e1 e0))`` with ``e_i = 2 p_i - 1``.

    ``w`` maps ``ran(p0)`` onto ``ran(p1)``; requires ``||p1 - p0|| < 1``.
    """
    a = _as_projector_matrix(p0)
    b = _as_projector_matrix(p1)
    dist = opnorm(b - a)
    if dist >= 1.0:
        raise TransportError(
            f"||p1 - p0|| = {dist:.6f} >= 1; refine the grid (factor 2)", refine_factor=2
        )
    eye = np.eye(a.shape[0])
    e0 = 2.0 * a - eye
    e1 = 2.0 * b - eye
    # e1 e0 has no eigenvalue at -1 since ||p1 - p0|| < 1; quadrature
    # projectors are idempotent only to projector_tol, so unitarity is loose
    inner = tol.replace(unitarity_tol=max(tol.unitarity_tol, 1e3 * tol.projector_tol))
    h = principal_log_unitary(e1 @ e0, inner)
    return expm_i(h, 0.5, tol)


@dataclass(frozen=True)
class EigenFrame:
    grid: np.ndarray
    angles: np.ndarray  # (G, n), smooth labels, unwrapped
    vectors: np.ndarray  # (G, n, n), column k is v_k(t_i)
    ball_ok: np.ndarray
    min_gap: np.ndarray

    @property
    def n(self) -> int:
        return self.angles.shape[1]

    def to_json(self, include_vectors: bool = False) -> dict:
        from .serialize import matrix_to_json

        out = {
            "grid": self.grid.tolist(),
            "angles": self.angles.tolist(),
            "ball_ok": [bool(b) for b in self.ball_ok],
            "min_gap": [None if not np.isfinite(g) else float(g) for g in self.min_gap],
        }
        if include_vectors:
            out["vectors"] = [matrix_to_json(v) for v in self.vectors]
        return out


def _point_data(path: GeodesicPath, t: float, tol: Tolerances):
    u = path.evaluate_many(t)
    lam = np.linalg.eigvals(u)
    gap = float(chord_gaps(np.angle(lam)))
    if gap <= tol.gap_tol:
        raise DegenerateSpectrumError(
            f"eigenvalues collide at t = {t:.12g} (min gap {gap:.3e}); perturb the path first",
            t=t,
            gap=gap,
        )
    return u, lam, gap


class _StepFailed(Exception):
    pass


def _transport_step(path, t0, t1, theta0, vecs0, tol):
    """Move labels from ``t0`` to ``t1`` in a single step, or raise _StepFailed."""
    u1, lam1, gap1 = _point_data(path, t1, tol)
    n = path.n
    radius = min(gap1 / 3.0, 0.1)
    theta1 = np.empty(n)
    vecs1 = np.empty_like(vecs0)
    used = set()
    for k in range(n):
        v = vecs0[:, k]
        # centre the contour on the first-order prediction of the angle
        slope = float(np.real(np.vdot(v, path.x @ v)))
        predicted = theta0[k] + slope * (t1 - t0)
        inside = np.flatnonzero(np.abs(lam1 - np.exp(1j * predicted)) < radius)
        if inside.size != 1 or int(inside[0]) in used:
            raise _StepFailed(f"label {k} is ambiguous")
        j = int(inside[0])
        used.add(j)
        try:
            proj = spectral_projector(u1, predicted, radius, tol)
            w = direct_rotation(np.outer(v, v.conj()), proj.p, tol)
        except (ConditioningError, EmptySpectrumError, TransportError) as exc:
            raise _StepFailed(str(exc)) from exc
        moved = proj.p @ (w @ v)
        vecs1[:, k] = moved / np.linalg.norm(moved)
        theta1[k] = theta0[k] + np.angle(lam1[j] * np.exp(-1j * theta0[k]))
    return theta1, vecs1, gap1


def _advance(path, ta, tb, theta, vecs, tol, depth=0):
    try:
        return _transport_step(path, ta, tb, theta, vecs, tol)
    except _StepFailed as exc:
        if depth >= MAX_BISECTION_DEPTH:
            raise TransportError(
                f"transport failed between t = {ta:.12g} and {tb:.12g} after "
                f"{MAX_BISECTION_DEPTH} bisections ({exc}); refine the grid by a factor 2"
            ) from None
    tm = 0.5 * (ta + tb)
    theta, vecs, _ = _advance(path, ta, tm, theta, vecs, tol, depth + 1)
    return _advance(path, tm, tb, theta, vecs, tol, depth + 1)


def track_frame(path: GeodesicPath, size: int, tol: Tolerances = DEFAULT_TOL) -> EigenFrame:
    """Track eigenangles and an orthonormal eigenbasis on a uniform grid.

    Raises DegenerateSpectrumError if two eigenvalues meet at a grid point
    (within ``tol.gap_tol``) and TransportError if the step cannot be
    resolved even after repeated bisection.
    """
    grid = path.grid(size)
    u0, _, gap0 = _point_data(path, grid[0], tol)
    dec = eig_unitary(u0, tol)
    G, n = len(grid), path.n
    angles = np.empty((G, n))
    vectors = np.empty((G, n, n), dtype=complex)
    gaps = np.empty(G)
    angles[0], vectors[0], gaps[0] = dec.angles, dec.vectors, gap0
    for i in range(1, G):
        angles[i], vectors[i], gaps[i] = _advance(
            path, grid[i - 1], grid[i], angles[i - 1], vectors[i - 1], tol
        )
    radius = 2.0 * np.max(np.abs(np.sin(angles / 2.0)), axis=1)
    return EigenFrame(grid=grid, angles=angles, vectors=vectors, ball_ok=radius < SQRT2, min_gap=gaps)


def _coupling(frame: EigenFrame, x, i: int) -> np.ndarray:
    """Matrix ``C[j, k] = <x v_k, v_j>`` in the frame basis at grid index ``i``."""
    v = frame.vectors[i]
    return v.conj().T @ np.asarray(x, dtype=complex) @ v


def first_variation(frame: EigenFrame, x, i: int) -> np.ndarray:
    """``theta_k'(t_i) = <x v_k, v_k>``."""
    d = np.diag(_coupling(frame, x, i))
    if np.max(np.abs(d.imag)) > 1e-8:
        raise NumericError(
            f"frame corrupted at index {i}: first variation has imaginary part "
            f"{np.max(np.abs(d.imag)):.3e}"
        )
    return d.real.copy()


def repulsion_kernel(theta) -> np.ndarray:
    """``K[k, j] = sin(theta_k - theta_j) / |e^{i theta_k} - e^{i theta_j}|^2``, zero on the diagonal.

    Equal to ``cot((theta_k - theta_j) / 2) / 2``.
    """
    theta = np.asarray(theta, dtype=float)
    delta = theta[:, None] - theta[None, :]
    chord2 = np.abs(np.exp(1j * theta)[:, None] - np.exp(1j * theta)[None, :]) ** 2
    out = np.zeros_like(delta)
    off = ~np.eye(len(theta), dtype=bool)
    out[off] = np.sin(delta[off]) / chord2[off]
    return out


def _check_gap(frame: EigenFrame, i: int, tol: Tolerances):
    if frame.min_gap[i] <= tol.gap_tol:
        raise DegenerateSpectrumError(
            f"min gap {frame.min_gap[i]:.3e} at index {i} is below gap_tol", t=float(frame.grid[i])
        )


def second_variation(frame: EigenFrame, x, i: int, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """``theta_k'' = 2 sum_{j != k} K[k, j] |<x v_k, v_j>|^2``."""
    _check_gap(frame, i, tol)
    weights = np.abs(_coupling(frame, x, i)) ** 2  # [j, k]
    kernel = repulsion_kernel(frame.angles[i])  # [k, j]
    return 2.0 * np.sum(kernel * weights.T, axis=1)


def partial_sum_second_variation(
    frame: EigenFrame, x, i: int, m: int, tol: Tolerances = DEFAULT_TOL, by_rank: bool = False
) -> float:
    """``sum_{k<=m} theta_k''`` via the cross terms ``k <= m < j`` only.

    Labels are taken in frame order; with ``by_rank=True`` they are first
    re-sorted by decreasing angle at the point.
    """
    n = frame.n
    if not 1 <= m <= n:
        raise ValidationError(f"m must lie in [1, {n}], got {m}")
    _check_gap(frame, i, tol)
    order = np.argsort(-frame.angles[i], kind="stable") if by_rank else np.arange(n)
    weights = (np.abs(_coupling(frame, x, i)) ** 2).T[np.ix_(order, order)]  # [k, j]
    kernel = repulsion_kernel(frame.angles[i][order])
    return float(2.0 * np.sum(kernel[:m, m:] * weights[:m, m:]))
