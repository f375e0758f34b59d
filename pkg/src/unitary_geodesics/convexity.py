"""Discrete convexity certificates for eigenangle sums along geodesic segments.

Partial sums use angles re-sorted at every grid point
(``theta_(1) >= ... >= theta_(n)``), not the smooth labels of an EigenFrame.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_TOL, Tolerances
from .errors import PerturbationError, RadiusError, ValidationError
from .flow import EigenFrame, GeodesicPath, chord_gaps
from .linalg import SQRT2, _wrap_angles, commutator_norm, opnorm, principal_log_unitary
from .norms import CartanVector
from .sampling import random_hermitian, sample_path, trial_seeds

VERDICTS = ("convex", "concave", "linear", "nonconvex", "indeterminate")


@dataclass(frozen=True)
class ConvexityCertificate:
    label: str
    grid: np.ndarray
    values: np.ndarray
    second_differences: np.ndarray
    min_second_difference: float
    verdict: str
    conv_tol: float
    offending_index: int | None = None

    def kink_indices(self) -> np.ndarray:
        return np.flatnonzero(np.abs(self.second_differences) > self.conv_tol)

    def piecewise_linear(self, max_kinks: int) -> bool:
        """Second differences vanish except at no more than ``max_kinks`` indices."""
        return self.verdict != "indeterminate" and len(self.kink_indices()) <= max_kinks

    def to_json(self) -> dict:
        def num(v):
            return float(v) if math.isfinite(v) else None

        return {
            "label": self.label,
            "grid": self.grid.tolist(),
            "values": [num(v) for v in self.values],
            "second_differences": [num(v) for v in self.second_differences],
            "min_second_difference": num(self.min_second_difference),
            "verdict": self.verdict,
            "conv_tol": self.conv_tol,
            "offending_index": self.offending_index,
        }


def certify(values, grid, label: str = "f", tol: Tolerances = DEFAULT_TOL, sense: str = "convex") -> ConvexityCertificate:
    """Certify convexity of sampled values by normalized second differences.

    Entry ``i`` of the second-difference vector is
    ``(f[i+2] - 2 f[i+1] + f[i]) / dt^2``.  With ``sense="concave"`` the
    negated values are tested and a passing verdict reads ``concave``.
    """
    values = np.asarray(values, dtype=float)
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or values.shape != grid.shape:
        raise ValidationError(f"values {values.shape} and grid {grid.shape} must be equal-length vectors")
    if len(grid) < 3:
        raise ValidationError("need at least 3 grid points to certify convexity")
    if sense not in ("convex", "concave"):
        raise ValidationError(f"sense must be 'convex' or 'concave', got {sense!r}")
    steps = np.diff(grid)
    dt = (grid[-1] - grid[0]) / (len(grid) - 1)
    if dt <= 0 or np.max(np.abs(steps - dt)) > 1e-12 * max(abs(dt), np.max(np.abs(grid))):
        raise ValidationError("grid must be uniform and increasing")

    signed = values if sense == "convex" else -values
    d2 = (signed[2:] - 2.0 * signed[1:-1] + signed[:-2]) / dt**2
    if not np.all(np.isfinite(d2)):
        return ConvexityCertificate(label, grid, values, d2, math.nan, "indeterminate", tol.conv_tol)
    lo = float(d2.min())
    offending = None
    if np.max(np.abs(d2)) <= tol.conv_tol:
        verdict = "linear"
    elif lo >= -tol.conv_tol:
        verdict = sense
    else:
        verdict = "nonconvex"
        offending = int(np.argmin(d2))
    return ConvexityCertificate(label, grid, values, d2, lo, verdict, tol.conv_tol, offending)


def partial_angle_sums(frame) -> np.ndarray:
    """``s_m(t_i)`` for ``m = 1..n``: cumulative sums of per-point sorted angles.

    Accepts an EigenFrame or a raw ``(G, n)`` array of angles.
    """
    angles = frame.angles if isinstance(frame, EigenFrame) else np.asarray(frame, dtype=float)
    # tracked labels are unwrapped; partial sums use principal angles
    angles = _wrap_angles(np.array(angles, dtype=float))
    return np.cumsum(-np.sort(-angles, axis=1), axis=1)


def trace_offsets(angles, grid, x, y) -> np.ndarray:
    """Integer ``m(t)`` with ``sum_k theta_k(t) = t Tr(x) + Tr(y) + 2 pi m(t)``."""
    total = np.asarray(angles, dtype=float).sum(axis=1)
    lin = np.asarray(grid) * np.trace(x).real + np.trace(y).real
    return np.rint((total - lin) / (2 * np.pi)).astype(int)


def trace_residual(angles, grid, x, y) -> np.ndarray:
    """Distance of ``sum theta_k - t Tr(x) - Tr(y)`` to the nearest multiple of ``2 pi``."""
    total = np.asarray(angles, dtype=float).sum(axis=1)
    lin = np.asarray(grid) * np.trace(x).real + np.trace(y).real
    r = total - lin
    return np.abs(r - 2 * np.pi * np.rint(r / (2 * np.pi)))


def double_spectrum(u) -> np.ndarray:
    """``u (+) conj(u)``."""
    u = np.asarray(u, dtype=complex)
    n = u.shape[0]
    out = np.zeros((2 * n, 2 * n), dtype=complex)
    out[:n, :n] = u
    out[n:, n:] = u.conj()
    return out


def doubled_angles(u, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Predicted sorted angles of ``u (+) conj(u)``: ``(s_1..s_n, -s_n..-s_1)``
    where ``s`` are the singular values of ``-i log(u)``."""
    z = principal_log_unitary(u, tol)
    sigma = -np.sort(-np.abs(np.linalg.eigvalsh(z)))
    return np.concatenate([sigma, -sigma[::-1]])


def _require_ball(path: GeodesicPath, grid, bound: float = SQRT2):
    radius = path.radius_on(grid)
    bad = np.flatnonzero(radius >= bound)
    if bad.size:
        i = int(bad[0])
        raise RadiusError(
            f"||u(t) - 1|| = {radius[i]:.6f} >= {bound:.6f} at t = {grid[i]:.12g}", t=float(grid[i])
        )
    return radius


def partial_singular_sums(path: GeodesicPath, size: int) -> np.ndarray:
    """``sum_{i<=m} sigma_i(t)`` for the singular values of ``-i log u(t)``, ``m = 1..n``.

    Computed as the first ``n`` partial angle sums of the doubled path
    ``exp(it(x (+) -conj x)) exp(i(y (+) -conj y))``.
    """
    grid = path.grid(size)
    _require_ball(path, grid)
    doubled = path.doubled()
    return partial_angle_sums(doubled.angles_on(grid))[:, : path.n]


@dataclass(frozen=True)
class PerturbationReport:
    z: np.ndarray
    magnitude: float
    y_new: np.ndarray
    min_gap_achieved: float
    attempts: int
    path: GeodesicPath = field(repr=False)


def perturb_to_distinct(path: GeodesicPath, size: int, seed: int, tol: Tolerances = DEFAULT_TOL) -> PerturbationReport:
    """Replace ``y`` by ``y_new`` with ``exp(i y_new) = exp(iz) exp(iy)``, ``z`` trace-orthogonal
    to ``x``, so that the eigenvalues are distinct at every grid point.

    The unperturbed path is accepted first.  Otherwise ``z`` is redrawn with
    magnitude ``||z|| = 1e-3, 5e-4, ...`` for up to 50 attempts.
    """
    grid = path.grid(size)
    _require_ball(path, grid, SQRT2 - tol.ball_margin)
    gap = float(chord_gaps(path.angles_on(grid)).min())
    n = path.n
    if gap > tol.gap_tol:
        return PerturbationReport(np.zeros((n, n), dtype=complex), 0.0, path.y.copy(), gap, 1, path)

    rng = np.random.default_rng(seed)
    x = path.x
    xx = float(np.vdot(x, x).real)
    eps = 1e-3
    smallest = gap
    for attempt in range(2, 52):
        g = random_hermitian(rng, n)
        if xx > 0:
            g = g - (np.vdot(x, g).real / xx) * x
        z = eps * g / opnorm(g)
        y_new = principal_log_unitary(_expi(z) @ _expi(path.y), tol)
        candidate = GeodesicPath(x, y_new, path.t_min, path.t_max, tol)
        angles = candidate.angles_on(grid)
        cand_gap = float(chord_gaps(angles).min())
        radius = float((2.0 * np.max(np.abs(np.sin(angles / 2.0)), axis=1)).max())
        if cand_gap > tol.gap_tol and radius < SQRT2:
            return PerturbationReport(z, eps, y_new, cand_gap, attempt, candidate)
        smallest = min(smallest, cand_gap)
        eps *= 0.5
    raise PerturbationError(
        f"no distinct-spectrum perturbation found after 50 attempts (smallest gap seen {smallest:.3e})",
        smallest_gap=smallest,
    )


def _expi(h) -> np.ndarray:
    w, v = np.linalg.eigh(h)
    return (v * np.exp(1j * w)) @ v.conj().T


@dataclass(frozen=True)
class CommutationRecord:
    commute: bool
    min_curvature: float
    commutator_norm: float
    consistent: bool
    certificate: ConvexityCertificate = field(repr=False)

    def to_json(self) -> dict:
        return {
            "commute": self.commute,
            "min_curvature": self.min_curvature,
            "commutator_norm": self.commutator_norm,
            "consistent": self.consistent,
            "certificate": self.certificate.to_json(),
        }


COMMUTATOR_TOL = 1e-8


def orbit_profile(angles, mu) -> np.ndarray:
    """``f_mu(t) = sum_k mu_k theta_(k)(t)``."""
    return -np.sort(-np.asarray(angles), axis=1) @ np.asarray(mu, dtype=float)


def detect_commutation(path: GeodesicPath, size: int, mu, tol: Tolerances = DEFAULT_TOL) -> CommutationRecord:
    """Decide ``[x, y] = 0`` from the curvature of ``f_mu`` along the path.

    For strictly decreasing ``mu`` inside the ball, ``f_mu`` is piecewise
    linear when ``x`` and ``y`` commute (kinks only where sorted angles
    cross, at most ``n^2`` indices) and strictly convex otherwise.
    """
    mu = mu if isinstance(mu, CartanVector) else CartanVector(tuple(np.ravel(mu)))
    if len(mu) != path.n:
        raise ValidationError(f"mu has length {len(mu)}, path dimension is {path.n}")
    if not mu.strictly_sorted:
        raise ValidationError("mu must be strictly decreasing")
    grid = path.grid(size)
    _require_ball(path, grid)
    f = orbit_profile(path.angles_on(grid), mu.v)
    cert = certify(f, grid, "f_mu", tol)
    commute = cert.piecewise_linear(path.n**2)
    cnorm = commutator_norm(path.x, path.y)
    return CommutationRecord(
        commute=bool(commute),
        min_curvature=cert.min_second_difference,
        commutator_norm=cnorm,
        consistent=bool(commute == (cnorm < COMMUTATOR_TOL)),
        certificate=cert,
    )


def hoffman_wielandt(a, b) -> tuple[float, float]:
    """``(min over permutations of sum |l_k(a) - l_s(k)(b)|^2, ||a - b||_F^2)`` by enumeration."""
    la = np.linalg.eigvals(np.asarray(a, dtype=complex))
    lb = np.linalg.eigvals(np.asarray(b, dtype=complex))
    if len(la) > 8:
        raise ValidationError("exhaustive permutation search is limited to n <= 8")
    best = min(float(np.sum(np.abs(la - lb[list(p)]) ** 2)) for p in itertools.permutations(range(len(lb))))
    return best, float(np.linalg.norm(np.asarray(a) - np.asarray(b), "fro") ** 2)


# --- radius scan ---------------------------------------------------------------------

OUTSIDE_BAND = (SQRT2, SQRT2 + 0.3)
WITNESS_THRESHOLD = -1e-4
INSIDE_BAND = (0.05, 1.40)


@dataclass(frozen=True)
class Witness:
    x: np.ndarray
    y: np.ndarray
    radius: float
    m: int
    t_star: float
    second_difference: float
    refined_second_difference: float
    trial: int

    def to_json(self) -> dict:
        from .serialize import matrix_to_json

        return {
            "x": matrix_to_json(self.x),
            "y": matrix_to_json(self.y),
            "radius": self.radius,
            "m": self.m,
            "t_star": self.t_star,
            "second_difference": self.second_difference,
            "refined_second_difference": self.refined_second_difference,
            "trial": self.trial,
        }


@dataclass(frozen=True)
class ScanResult:
    n: int
    trials: int
    seed: int
    inside_violations: int
    outside_example: Witness | None
    rows: list

    CSV_HEADER = ("phase", "trial", "seed", "radius", "min_d2", "verdict")

    def csv_rows(self) -> list[list[str]]:
        head = list(self.CSV_HEADER[:4]) + [f"min_d2_m{m}" for m in range(1, self.n + 1)] + ["verdict"]
        out = [head]
        for r in self.rows:
            out.append(
                [r["phase"], str(r["trial"]), str(r["seed"]), repr(r["radius"])]
                + [repr(v) for v in r["min_d2"]]
                + [r["verdict"]]
            )
        return out


def _scan_trial(args):
    phase, n, trial, seed, size, tol = args
    rng = np.random.default_rng(seed)
    band = INSIDE_BAND if phase == "inside" else OUTSIDE_BAND
    target = float(rng.uniform(*band))
    # traceless generators for the witness search: for su(n) paths the two
    # extreme angles sit symmetrically, which is where convexity breaks
    path = sample_path(rng, n, target, size, traceless=(phase == "outside"))
    grid = path.grid(size)
    sums = partial_angle_sums(path.angles_on(grid))
    certs = [certify(sums[:, m], grid, f"s_{m + 1}", tol) for m in range(n)]
    row = {
        "phase": phase,
        "trial": trial,
        "seed": seed,
        "radius": target,
        "min_d2": [c.min_second_difference for c in certs],
        "verdict": "nonconvex" if any(c.verdict == "nonconvex" for c in certs) else "convex",
    }
    witness = None
    if phase == "outside":
        for m, c in enumerate(certs):
            if c.min_second_difference < WITNESS_THRESHOLD:
                fine = path.grid(2 * size - 1)
                fine_cert = certify(partial_angle_sums(path.angles_on(fine))[:, m], fine, c.label, tol)
                if fine_cert.verdict == "nonconvex" and fine_cert.min_second_difference < WITNESS_THRESHOLD:
                    witness = Witness(
                        x=path.x, y=path.y, radius=float(path.radius_on(grid).max()), m=m + 1,
                        t_star=float(grid[c.offending_index + 1]),
                        second_difference=c.min_second_difference,
                        refined_second_difference=fine_cert.min_second_difference,
                        trial=trial,
                    )
                    break
    return row, witness


def radius_scan(
    n: int,
    trials: int,
    seed: int,
    size: int = 401,
    outside_trials: int | None = None,
    workers: int = 1,
    tol: Tolerances = DEFAULT_TOL,
) -> ScanResult:
    """Check convexity of every ``s_m`` on random paths inside the ball and
    search just outside it (radius in ``(sqrt 2, sqrt 2 + 0.3)``) for a
    nonconvex witness that survives grid doubling.
    """
    if n < 2:
        raise ValidationError("radius_scan needs n >= 2")
    if trials < 0:
        raise ValidationError("trials must be non-negative")
    outside_trials = trials if outside_trials is None else outside_trials
    inside_seeds = trial_seeds(seed, trials)
    outside_seeds = trial_seeds(seed + 1_000_003, outside_trials)
    jobs = [("inside", n, i, s, size, tol) for i, s in enumerate(inside_seeds)]

    def run(batch):
        if workers > 1 and len(batch) > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                return list(pool.map(_scan_trial, batch, chunksize=max(1, len(batch) // (4 * workers))))
        return [_scan_trial(j) for j in batch]

    results = run(jobs)
    rows = [r for r, _ in results]
    violations = sum(r["verdict"] == "nonconvex" for r in rows)

    witness = None
    chunk = max(1, 8 * workers)
    for start in range(0, outside_trials, chunk):
        batch = [("outside", n, i, outside_seeds[i], size, tol) for i in range(start, min(start + chunk, outside_trials))]
        for row, found in run(batch):
            rows.append(row)
            if found is not None:
                witness = found
                break
        if witness is not None:
            break
    return ScanResult(n, trials, seed, violations, witness, rows)
