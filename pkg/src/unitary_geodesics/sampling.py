"""Seeded random Hermitian matrices, unitaries and geodesic paths."""

from __future__ import annotations

import numpy as np
from scipy.stats import unitary_group

from .errors import ValidationError
from .flow import GeodesicPath

BISECTION_STEPS = 40


def random_hermitian(rng: np.random.Generator, n: int, traceless: bool = False) -> np.ndarray:
    """Hermitian matrix with standard-Gaussian diagonal and real/imaginary off-diagonal parts."""
    a = np.zeros((n, n), dtype=complex)
    iu = np.triu_indices(n, 1)
    a[iu] = rng.standard_normal(len(iu[0])) + 1j * rng.standard_normal(len(iu[0]))
    a = a + a.conj().T
    a[np.diag_indices(n)] = rng.standard_normal(n)
    if traceless:
        a -= np.trace(a).real / n * np.eye(n)
    return a


def random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    """Haar-distributed unitary."""
    if n == 1:
        return np.exp(2j * np.pi * rng.random()) * np.ones((1, 1))
    return unitary_group.rvs(n, random_state=rng)


def random_commuting_pair(rng: np.random.Generator, n: int):
    q = random_unitary(rng, n)
    a = rng.standard_normal(n)
    b = rng.standard_normal(n)
    return (q * a) @ q.conj().T, (q * b) @ q.conj().T


def trial_seeds(seed: int, trials: int) -> list[int]:
    """Independent per-trial seeds, identical regardless of how trials are scheduled."""
    children = np.random.SeedSequence(seed).spawn(trials)
    return [int(c.generate_state(1, dtype=np.uint64)[0]) for c in children]


def max_radius(x, y, grid) -> float:
    """``max_t ||exp(itx) exp(iy) - 1||`` over the grid, without building a path object."""
    w, v = np.linalg.eigh(x)
    wy, vy = np.linalg.eigh(y)
    base = (vy * np.exp(1j * wy)) @ vy.conj().T
    left = (v * np.exp(1j * np.asarray(grid)[:, None] * w)[:, None, :]) @ v.conj().T
    theta = np.angle(np.linalg.eigvals(left @ base))
    return float(2.0 * np.max(np.abs(np.sin(theta / 2.0))))


def scale_to_radius(x, y, target: float, grid) -> float:
    """Common scale ``c`` with ``max_t ||exp(itcx) exp(icy) - 1|| = target`` (bisection)."""
    if not 0.0 < target < 2.0:
        raise ValidationError(f"target radius must lie in (0, 2), got {target}")
    hi = 1.0
    while max_radius(hi * x, hi * y, grid) < target:
        hi *= 2.0
        if hi > 1e6:
            raise ValidationError("cannot reach the target radius with this generator pair")
    lo = 0.0
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        if max_radius(mid * x, mid * y, grid) < target:
            lo = mid
        else:
            hi = mid
    return lo


def sample_path(
    rng: np.random.Generator,
    n: int,
    target: float,
    size: int = 401,
    t_min: float = 0.0,
    t_max: float = 1.0,
    commuting: bool = False,
    traceless: bool = False,
) -> GeodesicPath:
    """Random path rescaled so that its grid radius equals ``target`` (from below)."""
    if commuting:
        x, y = random_commuting_pair(rng, n)
    else:
        x = random_hermitian(rng, n, traceless)
        y = random_hermitian(rng, n, traceless)
    grid = np.linspace(t_min, t_max, size)
    c = scale_to_radius(x, y, target, grid)
    return GeodesicPath(c * x, c * y, t_min, t_max)
