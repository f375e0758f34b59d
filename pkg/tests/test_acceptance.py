"""End-to-end acceptance checks, one test per criterion.

Each test appends a ``PASS``/``FAIL`` line that is printed in the pytest
terminal summary (and echoed to stdout).  Run on its own with
``pytest tests/test_acceptance.py -v``.
"""

import math
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from unitary_geodesics.convexity import (
    certify,
    detect_commutation,
    double_spectrum,
    hoffman_wielandt,
    partial_angle_sums,
    partial_singular_sums,
    radius_scan,
    trace_residual,
)
from unitary_geodesics.distance import distance_profile
from unitary_geodesics.flow import GeodesicPath, first_variation, second_variation, track_frame
from unitary_geodesics.linalg import SQRT2, eigenangles, principal_log_unitary
from unitary_geodesics.norms import (
    Alpha,
    CartanVector,
    KyFan,
    Orbit,
    Schatten,
    SupFamily,
    kostant_membership,
    norm_value,
    orbit_norm,
    polar_dual_boundary,
)
from unitary_geodesics.sampling import (
    random_commuting_pair,
    random_hermitian,
    random_unitary,
    sample_path,
    scale_to_radius,
    trial_seeds,
)

FIX = Path(__file__).parent / "fixtures"

pytestmark = pytest.mark.slow


def report(number: int, ok: bool, detail: str):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def _angles_near(path, t, reference):
    lam = np.linalg.eigvals(path.evaluate(t))
    out = np.empty(len(reference))
    for k, th in enumerate(reference):
        j = np.argmin(np.abs(lam - np.exp(1j * th)))
        out[k] = th + np.angle(lam[j] * np.exp(-1j * th))
    return out


def test_criterion_01_variation_formulas():
    start = time.perf_counter()
    rng = np.random.default_rng(101)
    worst1 = worst2 = 0.0
    paths = 0
    h1, h2 = 1e-5, 1e-4
    while paths < 100:
        n = 2 + paths % 3
        path = sample_path(rng, n, float(rng.uniform(0.3, 1.40)), size=21)
        frame = track_frame(path, 21)
        if frame.min_gap.min() <= 0.05 or not frame.ball_ok.all():
            continue
        paths += 1
        for i in (3, 10, 17):
            t, th = frame.grid[i], frame.angles[i]
            plus1, minus1 = _angles_near(path, t + h1, th), _angles_near(path, t - h1, th)
            d1 = first_variation(frame, path.x, i)
            worst1 = max(worst1, float(np.max(np.abs(d1 - (plus1 - minus1) / (2 * h1)))))
            plus2, minus2 = _angles_near(path, t + h2, th), _angles_near(path, t - h2, th)
            fd2 = (plus2 - 2 * th + minus2) / h2**2
            d2 = second_variation(frame, path.x, i)
            worst2 = max(worst2, float(np.max(np.abs(d2 - fd2))))
    elapsed = time.perf_counter() - start
    ok = worst1 <= 1e-6 and worst2 <= 1e-4 and elapsed < 60
    report(1, ok, f"100 paths, max |first - fd| = {worst1:.2e} (<= 1e-6), "
                  f"max |second - fd| = {worst2:.2e} (<= 1e-4), {elapsed:.1f} s (< 60 s)")


def _norm_zoo(rng, n):
    alpha = np.sort(rng.random(n))[::-1] + 0.01
    mu = np.sort(rng.standard_normal(n))[::-1]
    return [
        *(KyFan(k) for k in range(1, n + 1)),
        Alpha(tuple(alpha)),
        *(Schatten(p) for p in (1, 2, 4, math.inf)),
        Orbit(CartanVector(tuple(mu))),
    ]


def test_criterion_02_convexity_inside_ball():
    start = time.perf_counter()
    G = 401
    failures = []
    checked = 0
    max_radius = 0.0
    for trial, seed in enumerate(trial_seeds(2002, 1000)):
        rng = np.random.default_rng(seed)
        n = 2 + trial % 4
        path = sample_path(rng, n, float(rng.uniform(0.05, 1.40)), size=G)
        grid = path.grid(G)
        theta = path.angles_on(grid)
        max_radius = max(max_radius, float(path.radius_on(grid).max()))
        sums = partial_angle_sums(theta)
        sing = partial_singular_sums(path, G)
        certs = [certify(sums[:, m], grid, f"s_{m + 1}") for m in range(n)]
        certs += [certify(sing[:, m], grid, f"sigma_{m + 1}") for m in range(n)]
        for spec in _norm_zoo(rng, n):
            prof = distance_profile(path, spec, G)
            certs.append(prof.certificate)
        checked += len(certs)
        failures += [(trial, c.label, c.min_second_difference) for c in certs if c.verdict == "nonconvex"]
    elapsed = time.perf_counter() - start
    ok = not failures and max_radius <= 1.40 and elapsed < 600
    report(2, ok, f"1000 paths (max radius {max_radius:.4f} <= 1.40), {checked} certificates, "
                  f"{len(failures)} nonconvex, {elapsed:.1f} s (< 600 s)")


def test_criterion_03_optimality_witness():
    res = radius_scan(2, 100, seed=7, size=401, outside_trials=100_000)
    w = res.outside_example
    ok = (
        w is not None
        and SQRT2 < w.radius < SQRT2 + 0.3
        and w.second_difference < -1e-4
        and w.refined_second_difference < -1e-4
    )
    detail = "no witness found" if w is None else (
        f"witness at outside trial {w.trial}: radius {w.radius:.4f} in (sqrt2, sqrt2+0.3), "
        f"min d2(s_{w.m}) = {w.second_difference:.4f}, at doubled grid {w.refined_second_difference:.4f} (< -1e-4)"
    )
    report(3, ok, detail)


def test_criterion_04_trace_identity():
    rng = np.random.default_rng(404)
    worst = 0.0
    G = 401
    for trial in range(300):
        n = 1 + trial % 6
        path = sample_path(rng, n, float(rng.uniform(0.05, 1.99)), size=G)
        grid = path.grid(G)
        worst = max(worst, float(trace_residual(path.angles_on(grid), grid, path.x, path.y).max()))
        if trial % 10 == 0:
            frame = track_frame(path, 101) if n > 1 else None
            if frame is not None:
                worst = max(worst, float(trace_residual(frame.angles, frame.grid, path.x, path.y).max()))
    report(4, worst <= 1e-8, f"300 paths at G = 401 (plus tracked frames), max residual mod 2pi = {worst:.2e} (<= 1e-8)")


def test_criterion_05_doubling():
    rng = np.random.default_rng(505)
    worst = 0.0
    for trial in range(200):
        n = 1 + trial % 6
        u = random_unitary(rng, n)
        sigma = np.abs(np.linalg.eigvalsh(principal_log_unitary(u)))
        expected = np.sort(np.concatenate([sigma, -sigma]))[::-1]
        got = eigenangles(double_spectrum(u))
        worst = max(worst, float(np.max(np.abs(got - expected))))
    report(5, worst <= 1e-10, f"200 unitaries, max |angles(u + conj u) - (+/-sigma)| = {worst:.2e} (<= 1e-10)")


def test_criterion_06_commutation_biconditional():
    rng = np.random.default_rng(606)
    G = 401
    disagreements = 0
    strict_min = math.inf
    for trial in range(500):
        n = 2 + trial % 3
        mu = np.sort(rng.standard_normal(n))[::-1]
        while np.min(-np.diff(mu)) < 0.2:
            mu = np.sort(rng.standard_normal(n))[::-1]
        if trial % 2:
            x, y = random_commuting_pair(rng, n)
            target = float(rng.uniform(0.3, 1.35))
            c = scale_to_radius(x, y, target, np.linspace(0, 1, G))
            path = GeodesicPath(c * x, c * y)
        else:
            path = sample_path(rng, n, float(rng.uniform(0.6, 1.35)), size=G)
        rec = detect_commutation(path, G, CartanVector(tuple(mu)))
        truly = rec.commutator_norm < 1e-8
        if rec.commute != truly or not rec.consistent:
            disagreements += 1
        if not truly:
            strict_min = min(strict_min, rec.min_curvature)
    ok = disagreements == 0 and strict_min > 1e-6
    report(6, ok, f"500 pairs (250 commuting), {disagreements} disagreements, "
                  f"min curvature over non-commuting = {strict_min:.2e} (> 1e-6)")


def _reconstruction(mu1, mu2, rng, resolution=400, samples=200):
    spec = SupFamily((mu1, mu2))
    family = polar_dual_boundary(spec, 3, resolution)
    worst_rel, worst_over = 0.0, -math.inf
    for _ in range(samples):
        x = random_hermitian(rng, 3, traceless=True)
        target = norm_value(spec, x)
        approx = max(orbit_norm(x, m) for m in family)
        worst_rel = max(worst_rel, (target - approx) / target)
        worst_over = max(worst_over, approx - target)
    return worst_rel, worst_over


def test_criterion_07_sup_family_reconstruction():
    start = time.perf_counter()
    rng = np.random.default_rng(707)
    # symmetric strictly sorted traceless pair, and a non-symmetric pair for a non-trivial sup
    rel_s, over_s = _reconstruction((1.0, 0.0, -1.0), (0.6, 0.0, -0.6), rng)
    rel_f, over_f = _reconstruction((2.0, -0.5, -1.5), (1.2, 0.6, -1.8), rng)
    elapsed = time.perf_counter() - start
    rel, over = max(rel_s, rel_f), max(over_s, over_f)
    ok = rel <= 0.01 and over <= 1e-9 and elapsed < 120
    report(7, ok, f"n = 3, resolution 400, 2 x 200 samples: max relative error {rel:.2e} (<= 1e-2), "
                  f"max overshoot {over:.2e} (<= 1e-9), {elapsed:.1f} s (< 120 s)")


def test_criterion_08_kostant():
    rng = np.random.default_rng(808)
    passed = 0
    for trial in range(1000):
        n = 3 + trial % 3
        x = random_hermitian(rng, n, traceless=True)
        passed += kostant_membership(x, random_unitary(rng, n), tol=1e-9)
    report(8, passed == 1000, f"{passed}/1000 memberships hold at tolerance 1e-9")


def test_criterion_09_hoffman_wielandt():
    rng = np.random.default_rng(909)
    worst = -math.inf
    for trial in range(200):
        n = 1 + trial % 4
        q1, q2 = random_unitary(rng, n), random_unitary(rng, n)
        a = q1 @ np.diag(rng.standard_normal(n) + 1j * rng.standard_normal(n)) @ q1.conj().T
        b = q2 @ np.diag(rng.standard_normal(n) + 1j * rng.standard_normal(n)) @ q2.conj().T
        best, frob = hoffman_wielandt(a, b)
        worst = max(worst, best - frob)
    report(9, worst <= 1e-10, f"200 normal pairs, n <= 4, max (perm-min - ||a-b||_F^2) = {worst:.2e} (<= 0)")


CLI_COMMANDS = [
    ["analyze", str(FIX / "generic.json"), "--grid", "101"],
    ["analyze", str(FIX / "commuting_diagonal.json"), "--format", "csv"],
    ["distance", str(FIX / "generic.json"), "--norm", "schatten:4"],
    ["certify", str(FIX / "convex_samples.csv")],
    ["perturb", str(FIX / "repeated_y.json"), "--seed", "17"],
    ["radius-scan", "--n", "2", "--trials", "30", "--seed", "7", "--outside-trials", "40"],
    ["radius-scan", "--n", "3", "--trials", "12", "--seed", "9", "--outside-trials", "4", "--workers", "2"],
    ["commute", str(FIX / "pauli.json"), "--mu", "1,-1"],
    ["norms", str(FIX / "hermitian_upper.json"), "--norm", "kyfan:2", "--norm", "orbit:1,0,-1"],
]


def test_criterion_10_determinism():
    mismatched = []
    for argv in CLI_COMMANDS:
        outs = [
            subprocess.run([sys.executable, "-m", "unitary_geodesics", *argv], capture_output=True).stdout
            for _ in range(2)
        ]
        if outs[0] != outs[1] or not outs[0]:
            mismatched.append(argv[0])
    serial = subprocess.run(
        [sys.executable, "-m", "unitary_geodesics", "radius-scan", "--n", "3", "--trials", "12", "--seed", "9",
         "--outside-trials", "4"], capture_output=True).stdout
    parallel = subprocess.run(
        [sys.executable, "-m", "unitary_geodesics", "radius-scan", "--n", "3", "--trials", "12", "--seed", "9",
         "--outside-trials", "4", "--workers", "3"], capture_output=True).stdout
    if serial != parallel:
        mismatched.append("radius-scan workers")
    report(10, not mismatched, f"{len(CLI_COMMANDS)} CLI invocations run twice byte-identical, "
                               f"serial == parallel scan; mismatches: {mismatched or 'none'}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v", "-s"]))
