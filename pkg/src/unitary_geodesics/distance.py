"""Invariant-norm distance from the identity along a geodesic segment.

Inside the injectivity radius the distance ``d(1, u)`` for a bi-invariant
(Finsler) metric is the norm of the principal logarithm, so
``d(1, u) = N(-i log u)``.  Outside that radius nothing is returned.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_TOL, Tolerances
from .convexity import ConvexityCertificate, certify, trace_offsets
from .errors import InjectivityError, ValidationError
from .flow import GeodesicPath
from .linalg import principal_log_unitary
from .norms import NormSpec, norm_value


def distance_to_identity(u, norm: NormSpec, tol: Tolerances = DEFAULT_TOL) -> float:
    z = principal_log_unitary(u, tol)
    spread = float(np.max(np.abs(np.linalg.eigvalsh(z))))
    if spread > np.pi - tol.injectivity_margin:
        raise InjectivityError(
            f"||log u|| = {spread:.9f} exceeds the injectivity bound pi - {tol.injectivity_margin:g}"
        )
    return norm_value(norm, z)


@dataclass(frozen=True)
class DistanceProfile:
    path: GeodesicPath
    norm: NormSpec
    grid: np.ndarray
    distances: np.ndarray
    inside_ball: np.ndarray
    certificate: ConvexityCertificate | None
    segment: tuple[int, int]  # [start, stop) of the certified sub-grid

    def to_json(self) -> dict:
        return {
            "norm": self.norm.to_json(),
            "grid": self.grid.tolist(),
            "distances": self.distances.tolist(),
            "inside_ball": [bool(b) for b in self.inside_ball],
            "segment": list(self.segment),
            "certificate": None if self.certificate is None else self.certificate.to_json(),
        }


def _longest_run(mask: np.ndarray) -> tuple[int, int]:
    best = (0, 0)
    start = None
    for i, flag in enumerate(list(mask) + [False]):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            if i - start > best[1] - best[0]:
                best = (start, i)
            start = None
    return best


def distance_profile(path: GeodesicPath, norm: NormSpec, size: int, tol: Tolerances = DEFAULT_TOL) -> DistanceProfile:
    """Sample ``t -> d(1, u(t))`` and certify convexity on the longest
    contiguous run of grid points with ``||log u(t)|| < pi/2``."""
    if size < 3:
        raise ValidationError("distance profile needs at least 3 grid points")
    grid = path.grid(size)
    theta = path.angles_on(grid)
    spread = np.max(np.abs(theta), axis=1)
    bad = np.flatnonzero(spread > np.pi - tol.injectivity_margin)
    if bad.size:
        t = float(grid[bad[0]])
        raise InjectivityError(
            f"path leaves the injectivity radius at t = {t:.12g} (||log u|| = {spread[bad[0]]:.9f})", t=t
        )
    # an eigenvalue passing through -1 between grid points shifts the branch offset
    jumps = np.flatnonzero(np.diff(trace_offsets(theta, grid, path.x, path.y)))
    if jumps.size:
        t = float(grid[jumps[0] + 1])
        raise InjectivityError(f"an eigenvalue passes through -1 before t = {t:.12g}", t=t)
    distances = np.asarray(norm.gauge(theta), dtype=float)
    inside = spread < np.pi / 2
    if not inside.any():
        raise ValidationError("no grid point lies inside the ball ||u - 1|| < sqrt(2)")
    lo, hi = _longest_run(inside)
    cert = None
    if hi - lo >= 3:
        cert = certify(distances[lo:hi], grid[lo:hi], f"d({type(norm).__name__})", tol)
    return DistanceProfile(path, norm, grid, distances, inside, cert, (lo, hi))
