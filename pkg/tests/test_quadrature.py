import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from foldylax.quadrature import (
    triangle_inverse_distance_tensor,
    centroid_self_integrals,
    duffy_rule,
    seven_point_rule,
    triangle_inverse_distance,
)

RIGHT = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])


def adaptive_inverse_distance(point, tri):
    """Reference integral over a triangle in the z = 0 plane via polar coordinates about ``point``."""
    # split at the point; integrate each sub-triangle in polar form: int dtheta int_0^R(theta) dr
    total = 0.0
    for i in range(3):
        a, b = tri[i][:2] - point[:2], tri[(i + 1) % 3][:2] - point[:2]
        sign = np.sign(a[0] * b[1] - a[1] * b[0])
        ta, tb = math.atan2(a[1], a[0]), math.atan2(b[1], b[0])
        dt = (tb - ta + math.pi) % (2 * math.pi) - math.pi
        n = b - a

        def radius(theta):
            d = np.array([math.cos(theta), math.sin(theta)])
            # a + s n = r d
            m = np.array([[d[0], -n[0]], [d[1], -n[1]]])
            return np.linalg.solve(m, a)[0]

        val, _ = integrate.quad(radius, ta, ta + dt, epsabs=1e-14, epsrel=1e-13)
        total += val * (1 if dt >= 0 else -1) * (1 if sign * dt >= 0 else -1) * np.sign(dt)
    return abs(total)


def test_inverse_distance_at_centroid_matches_polar():
    c = RIGHT.mean(axis=0)
    assert triangle_inverse_distance(c, RIGHT) == pytest.approx(adaptive_inverse_distance(c, RIGHT), rel=1e-12)


def test_inverse_distance_equilateral_closed_form():
    # centroid of an equilateral triangle with side s: 3 * h * asinh(sqrt(3)) with inradius h
    s = 0.7
    tri = np.array([[0, 0, 0], [s, 0, 0], [s / 2, s * math.sqrt(3) / 2, 0]])
    h = s / (2 * math.sqrt(3))
    expected = 6 * h * math.asinh(math.sqrt(3))
    assert triangle_inverse_distance(tri.mean(axis=0), tri) == pytest.approx(expected, rel=1e-14)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 0.9), st.floats(0.05, 0.9))
def test_inverse_distance_interior_points(u, v):
    if u + v > 0.95:
        u, v = u / 2, v / 2
    p = np.array([u, v, 0.0])
    assert triangle_inverse_distance(p, RIGHT) == pytest.approx(adaptive_inverse_distance(p, RIGHT), rel=1e-10)


def test_inverse_distance_rotation_invariant():
    rng = np.random.default_rng(0)
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    tri = RIGHT @ q.T + [1.0, -2.0, 0.5]
    c = tri.mean(axis=0)
    assert triangle_inverse_distance(c, tri) == pytest.approx(triangle_inverse_distance(RIGHT.mean(0), RIGHT), rel=1e-14)


def test_seven_point_rule_is_degree_five():
    bary, w = seven_point_rule()
    assert w.sum() == pytest.approx(1.0, abs=1e-15)
    x, y = bary[:, 1], bary[:, 2]  # reference triangle (0,0),(1,0),(0,1), area 1/2
    for p in range(6):
        for q in range(6 - p):
            exact = math.factorial(p) * math.factorial(q) / math.factorial(p + q + 2)
            assert 0.5 * np.dot(w, x**p * y**q) == pytest.approx(exact, rel=1e-13)


@pytest.mark.parametrize("point", [[0.3, 0.3, 0.0], [0.5, 0.0, 0.0], [0.0, 0.0, 0.0], [0.3, 0.3, 0.2], [1.5, 1.0, 0.1]])
def test_duffy_rule_integrates_inverse_distance(point):
    point = np.array(point)
    nodes, w = duffy_rule(point, RIGHT, order=16)
    approx = np.sum(w / np.linalg.norm(nodes - point, axis=1))
    if abs(point[2]) == 0.0:
        ref = triangle_inverse_distance(point, RIGHT)
    else:
        ref, _ = integrate.dblquad(
            lambda y, x: 1.0 / np.linalg.norm([x, y, 0.0] - point), 0, 1, 0, lambda x: 1 - x, epsabs=1e-13
        )
    # the map clusters nodes at the projected point, so distant points converge slower
    assert approx == pytest.approx(ref, rel=1e-6 if np.linalg.norm(point) < 1 else 1e-5)
    assert w.sum() == pytest.approx(0.5, rel=1e-13)


def test_centroid_self_integrals():
    rng = np.random.default_rng(1)
    tris = rng.normal(size=(20, 3, 3))
    scalar, tensor = centroid_self_integrals(tris)
    np.testing.assert_allclose(scalar, triangle_inverse_distance(tris.mean(axis=1), tris), rtol=1e-12)
    # rhat lies in the panel plane: trace equals the scalar and the normal is a null vector
    normal = np.cross(tris[:, 1] - tris[:, 0], tris[:, 2] - tris[:, 0])
    normal /= np.linalg.norm(normal, axis=1, keepdims=True)
    np.testing.assert_allclose(np.trace(tensor, axis1=1, axis2=2), scalar, rtol=1e-13)
    np.testing.assert_allclose(np.einsum("nij,nj->ni", tensor, normal), 0.0, atol=1e-13)
    for k in range(3):
        p = tris[k].mean(axis=0)
        nodes, w = duffy_rule(p, tris[k], order=200)
        r = nodes - p
        rho = np.linalg.norm(r, axis=1)
        rhat = r / rho[:, None]
        np.testing.assert_allclose(tensor[k], np.einsum("q,qi,qj->ij", w / rho, rhat, rhat), atol=1e-12)
    # equilateral panels have an isotropic in-plane tensor (J/2) (I - n n)
    tri = np.array([[[0, 0, 0], [1, 0, 0], [0.5, math.sqrt(3) / 2, 0]]])
    s, t = centroid_self_integrals(tri)
    np.testing.assert_allclose(t[0], s[0] / 2 * np.diag([1, 1, 0]), atol=1e-14)


def test_tensor_integral_off_centroid():
    point = np.array([0.6, 0.1, 0.0])
    scalar, tensor = triangle_inverse_distance_tensor(point, RIGHT)
    for i, j in [(0, 0), (0, 1), (1, 1)]:
        ref, _ = integrate.dblquad(
            lambda y, x: (x - point[0] if i == 0 else y - point[1]) * (x - point[0] if j == 0 else y - point[1])
            / np.linalg.norm([x - point[0], y - point[1]]) ** 3,
            0, 1, 0, lambda x: 1 - x, epsabs=1e-12, epsrel=1e-10,
        )
        assert tensor[i, j] == pytest.approx(ref, rel=1e-7)
    assert scalar == pytest.approx(triangle_inverse_distance(point, RIGHT), rel=1e-14)
