import math

import numpy as np
import pytest

from unitary_geodesics.distance import distance_profile, distance_to_identity
from unitary_geodesics.errors import BranchAmbiguityError, InjectivityError, ValidationError
from unitary_geodesics.flow import GeodesicPath
from unitary_geodesics.linalg import expm_i
from unitary_geodesics.norms import Alpha, CartanVector, KyFan, Orbit, Schatten, SupFamily
from unitary_geodesics.sampling import random_commuting_pair, random_unitary, sample_path


class TestDistanceToIdentity:
    def test_identity(self):
        assert distance_to_identity(np.eye(3), Schatten(2)) == 0

    def test_diagonal_frobenius(self):
        u = expm_i(np.diag([0.4, -0.4]))
        assert np.isclose(distance_to_identity(u, Schatten(2)), math.sqrt(0.32))

    def test_conjugation_invariance(self, rng):
        u = random_unitary(rng, 4)
        w = random_unitary(rng, 4)
        for spec in (KyFan(2), Schatten(3), Orbit(CartanVector((2, 1, -1, -2))), Alpha((3, 2, 1, 0))):
            a = distance_to_identity(u, spec)
            b = distance_to_identity(w @ u @ w.conj().T, spec)
            assert abs(a - b) < 1e-10

    def test_branch_error_at_minus_one(self):
        with pytest.raises(BranchAmbiguityError):
            distance_to_identity(-np.eye(2), Schatten(2))

    def test_injectivity_margin(self):
        u = expm_i(np.diag([np.pi - 1e-7, 0.0]))
        with pytest.raises((InjectivityError, BranchAmbiguityError)):
            distance_to_identity(u, Schatten(2))


class TestProfile:
    def test_schatten_inf_is_max_angle(self, rng):
        path = sample_path(rng, 3, 1.3, size=101)
        prof = distance_profile(path, Schatten(math.inf), 101)
        theta = path.angles_on(prof.grid)
        assert np.allclose(prof.distances, np.max(np.abs(theta), axis=1), atol=1e-10)

    def test_inside_flags_and_segment(self):
        path = GeodesicPath(np.diag([2.0, -2.0]), np.zeros((2, 2)))
        prof = distance_profile(path, Schatten(2), 101)
        grid = prof.grid
        assert np.array_equal(prof.inside_ball, 2 * grid < np.pi / 2)
        lo, hi = prof.segment
        assert lo == 0 and hi == int(np.count_nonzero(prof.inside_ball))
        assert len(prof.certificate.grid) == hi - lo
        assert prof.certificate.verdict in ("convex", "linear")

    def test_commuting_orbit_piecewise_linear(self, rng):
        x, y = random_commuting_pair(rng, 3)
        path = GeodesicPath(0.3 * x, 0.3 * y)
        prof = distance_profile(path, Orbit(CartanVector((1.0, 0.2, -1.2))), 201)
        assert prof.certificate.piecewise_linear(9)

    def test_strict_orbit_noncommuting(self, rng):
        path = sample_path(rng, 3, 1.2, size=201)
        prof = distance_profile(path, Orbit(CartanVector((1.0, 0.2, -1.2))), 201)
        assert prof.certificate.min_second_difference > 0

    def test_zoo_convex_inside_ball(self, rng):
        for trial in range(60):
            n = 2 + trial % 3
            path = sample_path(rng, n, float(rng.uniform(0.2, 1.4)), size=101)
            mu = np.sort(rng.standard_normal(n))[::-1]
            alpha = np.sort(rng.random(n))[::-1] + 0.01
            zoo = [KyFan(1), KyFan(n), Alpha(tuple(alpha)), Schatten(1), Schatten(4), Schatten(math.inf),
                   Orbit(CartanVector(tuple(mu))), SupFamily((tuple(mu), tuple(np.sort(-mu)[::-1])))]
            for spec in zoo:
                prof = distance_profile(path, spec, 101)
                assert prof.inside_ball.all()
                assert prof.certificate.verdict in ("convex", "linear"), (trial, spec)

    def test_leaving_injectivity_radius(self):
        path = GeodesicPath(np.diag([4.0, -1.0]), np.zeros((2, 2)))
        with pytest.raises(InjectivityError) as exc:
            distance_profile(path, Schatten(2), 101)
        assert exc.value.t is not None and abs(exc.value.t - np.pi / 4) < 0.02

    def test_no_inside_points(self):
        path = GeodesicPath(np.zeros((2, 2)), np.diag([2.0, -2.0]))
        with pytest.raises(ValidationError):
            distance_profile(path, Schatten(2), 11)

    def test_short_grid(self, rng):
        path = sample_path(rng, 2, 1.0, size=11)
        with pytest.raises(ValidationError):
            distance_profile(path, Schatten(2), 2)
