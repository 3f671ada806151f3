"""Geometry primitives: projections, retractions, transports."""

import numpy as np
import pytest

from marsadmm import Sphere, Stiefel


def _rotation_transport(x, y, v):
    # oracle: rotate v by the rotation carrying x to y in their common plane
    c = x @ y
    x_perp = y - c * x
    s = np.linalg.norm(x_perp)
    if s == 0.0:
        return v.copy()
    e = x_perp / s
    a, b = v @ x, v @ e
    return v - a * x - b * e + (a * c - b * s) * x + (a * s + b * c) * e


class TestSphere:
    def test_project_removes_radial_component(self):
        sph = Sphere(2)
        x = np.array([1.0, 0.0])
        assert np.array_equal(sph.project_tangent(x, np.array([3.7, -2.1])), [0.0, -2.1])

    def test_projection_idempotent_and_orthogonal_residual(self):
        sph = Sphere(7)
        rng = np.random.default_rng(3)
        for _ in range(100):
            x = sph.random_point(rng)
            u = rng.standard_normal(7)
            p = sph.project_tangent(x, u)
            assert np.linalg.norm(sph.project_tangent(x, p) - p) <= 1e-12 * (1 + np.linalg.norm(p))
            w = sph.random_tangent(rng, x)
            assert abs((u - p) @ w) <= 1e-10 * max(1.0, np.linalg.norm(u) * np.linalg.norm(w))

    def test_retract_zero_is_bitwise_identity(self):
        sph = Sphere(4)
        x = Sphere(4).random_point(np.random.default_rng(0))
        r = sph.retract(x, np.zeros(4))
        assert np.array_equal(r, x) and r is not x

    def test_retract_normalizes(self):
        sph = Sphere(2)
        got = sph.retract(np.array([1.0, 0.0]), np.array([0.0, 1.0]))
        assert np.allclose(got, np.array([1.0, 1.0]) / np.sqrt(2), atol=1e-15)

    def test_retract_antipodal_sum_rejected(self):
        sph = Sphere(2)
        with pytest.raises(ValueError):
            sph.retract(np.array([1.0, 0.0]), np.array([-1.0, 0.0]))

    def test_transport_identity_at_same_point(self):
        sph = Sphere(5)
        rng = np.random.default_rng(1)
        x = sph.random_point(rng)
        v = sph.random_tangent(rng, x)
        assert np.array_equal(sph.transport(x, x, v), v)

    def test_transport_quarter_turn(self):
        # moving e1 -> e2 carries the tangent e2 onto -e1
        sph = Sphere(3)
        e1, e2 = np.eye(3)[0], np.eye(3)[1]
        assert np.allclose(sph.transport(e1, e2, e2), -e1, atol=1e-15)

    def test_transport_matches_rotation_oracle(self):
        sph = Sphere(6)
        rng = np.random.default_rng(7)
        for _ in range(200):
            x = sph.random_point(rng)
            y = sph.random_point(rng)
            v = sph.random_tangent(rng, x)
            got = sph.transport(x, y, v)
            want = _rotation_transport(x, y, v)
            assert np.linalg.norm(got - want) <= 1e-10 * (1 + np.linalg.norm(v))
            # exact isometry and tangency at the target
            assert abs(np.linalg.norm(got) - np.linalg.norm(v)) <= 1e-10
            assert sph.tangent_defect(y, got) <= 1e-10 * (1 + np.linalg.norm(v))

    def test_transport_antipodal_rejected(self):
        sph = Sphere(3)
        x = np.array([0.0, 0.0, 1.0])
        with pytest.raises(ValueError):
            sph.transport(x, -x, np.array([1.0, 0.0, 0.0]))

    def test_random_point_unit_and_deterministic(self):
        sph = Sphere(3)
        a = sph.random_point(np.random.default_rng(11))
        b = sph.random_point(np.random.default_rng(11))
        assert abs(np.linalg.norm(a) - 1.0) <= 1e-12
        assert np.array_equal(a, b)

    def test_shape_validation(self):
        with pytest.raises(ValueError):
            Sphere(3).project_tangent(np.ones(3) / np.sqrt(3), np.ones(4))
        with pytest.raises(ValueError):
            Sphere(1)

    def test_check_point(self):
        sph = Sphere(3)
        with pytest.raises(ValueError):
            sph.check_point(np.array([1.0, 1.0, 0.0]))


class TestStiefel:
    def test_identity_base_gives_skew_part(self):
        st = Stiefel(3, 3)
        rng = np.random.default_rng(5)
        u = rng.standard_normal((3, 3))
        assert np.allclose(st.project_tangent(np.eye(3), u), (u - u.T) / 2, atol=1e-15)

    def test_projection_single_column_reference_point(self):
        # fixed point/direction checked against a high-precision evaluation
        st = Stiefel(3, 1)
        x = np.array([[0.3], [-1.2], [0.7]])
        x = x / np.linalg.norm(x)
        assert np.allclose(
            x.ravel(),
            [0.2110792634190876, -0.8443170536763502, 0.4925182813112043],
            atol=1e-15,
        )
        u = np.array([[0.9], [0.4], [-1.1]])
        want = [1.0455445544554455, -0.18217821782178218, -0.7603960396039604]
        assert np.allclose(st.project_tangent(x, u).ravel(), want, atol=1e-14)

    def test_projection_idempotent_and_tangent(self):
        st = Stiefel(6, 2)
        rng = np.random.default_rng(9)
        for _ in range(100):
            x = st.random_point(rng)
            u = rng.standard_normal((6, 2))
            t = st.project_tangent(x, u)
            assert st.tangent_defect(x, t) <= 1e-10 * (1 + np.linalg.norm(u))
            assert np.linalg.norm(st.project_tangent(x, t) - t) <= 1e-12 * (1 + np.linalg.norm(t))
            # projection residual orthogonal to every tangent direction
            w = st.random_tangent(rng, x)
            assert abs(np.vdot(u - t, w)) <= 1e-10 * max(1.0, np.linalg.norm(u) * np.linalg.norm(w))

    def test_retract_zero_is_bitwise_identity(self):
        st = Stiefel(5, 2)
        x = st.random_point(np.random.default_rng(2))
        assert np.array_equal(st.retract(x, np.zeros((5, 2))), x)

    def test_retract_orthonormal_and_second_order(self):
        st = Stiefel(7, 3)
        rng = np.random.default_rng(13)
        x = st.random_point(rng)
        u = st.random_tangent(rng, x)
        u = u / np.linalg.norm(u)
        assert st.point_defect(st.retract(x, u)) <= 1e-12
        # ||R(tu) - x - tu|| = O(t^2): the ratio to t^2 stays bounded as t -> 0
        ratios = []
        for t in (1e-2, 1e-3, 1e-4):
            r = st.retract(x, t * u)
            ratios.append(np.linalg.norm(r - x - t * u) / t**2)
        assert max(ratios) <= 10 * min(ratios) + 1.0

    def test_transport_identity_norm_and_tangency(self):
        st = Stiefel(6, 2)
        rng = np.random.default_rng(17)
        x = st.random_point(rng)
        v = st.random_tangent(rng, x)
        assert np.array_equal(st.transport(x, x, v), v)
        y = st.retract(x, 0.1 * v)
        w = st.transport(x, y, v)
        assert abs(np.linalg.norm(w) - np.linalg.norm(v)) <= 1e-12 * (1 + np.linalg.norm(v))
        assert st.tangent_defect(y, w) <= 1e-10 * (1 + np.linalg.norm(v))

    def test_transport_inner_product_drift_shrinks_with_distance(self):
        # pairwise inner products are approximately preserved for nearby targets
        st = Stiefel(8, 3)
        rng = np.random.default_rng(19)
        drifts = []
        for t in (0.5, 0.05, 0.005):
            worst = 0.0
            for _ in range(50):
                x = st.random_point(rng)
                u = st.random_tangent(rng, x)
                v = st.random_tangent(rng, x)
                y = st.retract(x, t * st.random_tangent(rng, x))
                tu, tv = st.transport(x, y, u), st.transport(x, y, v)
                worst = max(worst, abs(np.vdot(tu, tv) - np.vdot(u, v)))
            drifts.append(worst)
        assert drifts[2] < drifts[0]
        assert drifts[2] <= 1e-3

    def test_transport_homogeneous(self):
        # rescaling-to-norm transport commutes with scalar scaling exactly
        st = Stiefel(5, 2)
        rng = np.random.default_rng(23)
        x = st.random_point(rng)
        v = st.random_tangent(rng, x)
        y = st.retract(x, 0.3 * st.random_tangent(rng, x))
        w1 = st.transport(x, y, 2.5 * v)
        w2 = 2.5 * st.transport(x, y, v)
        assert np.linalg.norm(w1 - w2) <= 1e-12 * (1 + np.linalg.norm(w2))

    def test_transport_degenerate_projection_warns(self):
        st = Stiefel(2, 2)
        rng = np.random.default_rng(29)
        x = st.random_point(rng)
        # on St(2,2) tangents at x are x @ skew; v = x itself (symmetric part only)
        # projects to ~0 at y = x rotated by pi/2
        v = x.copy()
        th = np.pi / 2
        rot = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
        y = st.project_point(x @ rot)
        w = st.project_tangent(y, v)
        if np.linalg.norm(w) < 1e-14 * np.linalg.norm(v):
            with pytest.warns(RuntimeWarning):
                st.transport(x, y, v)

    def test_transport_zero_vector(self):
        st = Stiefel(4, 2)
        rng = np.random.default_rng(31)
        x = st.random_point(rng)
        y = st.random_point(rng)
        assert np.array_equal(st.transport(x, y, np.zeros((4, 2))), np.zeros((4, 2)))

    def test_random_point_orthonormal_and_deterministic(self):
        st = Stiefel(4, 2)
        a = st.random_point(np.random.default_rng(37))
        b = st.random_point(np.random.default_rng(37))
        assert st.point_defect(a) <= 1e-12
        assert np.array_equal(a, b)

    def test_shape_and_size_validation(self):
        with pytest.raises(ValueError):
            Stiefel(2, 3)
        st = Stiefel(3, 2)
        with pytest.raises(ValueError):
            st.retract(np.eye(3), np.zeros((3, 2)))

    def test_check_point(self):
        st = Stiefel(3, 2)
        with pytest.raises(ValueError):
            st.check_point(np.ones((3, 2)))


def test_retraction_ratio_bounds_both_manifolds():
    # empirical constants for ||R(u)-x|| <= p||u|| and ||R(u)-x-u|| <= q||u||^2
    rng = np.random.default_rng(41)
    for mfd in (Sphere(6), Stiefel(6, 2)):
        p_hat = q_hat = 0.0
        for _ in range(300):
            x = mfd.random_point(rng)
            u = mfd.random_tangent(rng, x)
            nu = np.linalg.norm(u)
            if nu == 0.0:
                continue
            u = u * (rng.uniform(1e-3, 0.5) / nu)
            nu = np.linalg.norm(u)
            r = mfd.retract(x, u)
            p_hat = max(p_hat, np.linalg.norm(r - x) / nu)
            q_hat = max(q_hat, np.linalg.norm(r - x - u) / nu**2)
        assert np.isfinite(p_hat) and np.isfinite(q_hat)
        assert p_hat <= 2.0
        assert q_hat <= 5.0
