import math

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from foldylax.capacitance import (
    CapacitanceMatrix,
    acoustic_capacitance,
    capacitance_matrix,
    kelvin_matrix,
    solve_first_kind_kelvin,
    verify_eigenvalue_bounds,
)
from foldylax.errors import ConfigError
from foldylax.geometry import SurfaceMesh, make_cube_mesh, make_sphere_mesh
from foldylax.kernels import LameParameters, kelvin_coefficients


def sphere_elastic_capacitance(radius, lame):
    """Uniform traction on a sphere gives a constant displacement; C = 8 pi R / (alpha + beta/3) I."""
    alpha, beta = kelvin_coefficients(lame)
    return 8 * math.pi * radius / (alpha + beta / 3)


def test_sphere_elastic_analytic_value(lame11):
    assert sphere_elastic_capacitance(0.5, lame11) == pytest.approx(18 * math.pi / 7)


def test_sphere_single_layer_of_uniform_density(lame11):
    """Oracle for the analytic value: the Kelvin single layer of a uniform density is constant on a sphere."""
    from scipy import integrate

    alpha, beta = kelvin_coefficients(lame11)
    R = 0.5
    x = np.array([0.0, 0.0, R])

    def entry(i, j):
        def f(phi, theta):
            s = R * np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])
            r = x - s
            rho = np.linalg.norm(r)
            g = (alpha * (i == j) + beta * r[i] * r[j] / rho**2) / (8 * math.pi * rho)
            return g * R * R * np.sin(theta)

        return integrate.dblquad(f, 0, math.pi, 0, 2 * math.pi, epsabs=1e-11)[0]

    # unit total charge spread uniformly: potential = 4 pi R^2 / C
    expected = R * (alpha + beta / 3) / 2
    assert entry(0, 0) == pytest.approx(expected, rel=1e-8)
    assert entry(2, 2) == pytest.approx(expected, rel=1e-8)
    assert abs(entry(0, 2)) < 1e-10


class TestAcoustic:
    def test_unit_radius_sphere(self, sphere3):
        value = acoustic_capacitance(sphere3.transformed(2.0))
        assert value == pytest.approx(4 * math.pi, rel=0.01)

    def test_unit_diameter_sphere(self, sphere3):
        assert acoustic_capacitance(sphere3) == pytest.approx(2 * math.pi, rel=0.01)

    def test_density_nearly_uniform(self, sphere2, sphere3):
        spreads = []
        for mesh in (sphere2, sphere3):
            _, sigma = acoustic_capacitance(mesh, return_density=True)
            spreads.append(np.std(sigma) / np.mean(sigma))
        assert spreads[1] < 0.02
        assert spreads[1] < spreads[0]

    def test_cube_between_inscribed_and_circumscribed(self):
        value = acoustic_capacitance(make_cube_mesh(6))
        assert 4 * math.pi * 0.5 < value < 4 * math.pi * 0.8

    def test_panel_limits(self):
        assert acoustic_capacitance(make_sphere_mesh(0)) > 0  # 20 panels is the minimum
        tiny = SurfaceMesh(
            [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]],
            [[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]],
        )
        with pytest.raises(ConfigError, match="at least"):
            acoustic_capacitance(tiny)


class TestElastic:
    def test_sphere_isotropic_and_analytic(self, cap3, lame11):
        c = cap3.matrix
        diag = np.diag(c)
        off = c[~np.eye(3, dtype=bool)]
        assert np.abs(off).max() / diag.min() < 1e-3
        np.testing.assert_allclose(diag, sphere_elastic_capacitance(0.5, lame11), rtol=0.01)

    def test_symmetry_and_definiteness(self, cap3):
        c = cap3.matrix
        assert np.linalg.norm(c - c.T) / np.linalg.norm(c) < 1e-8
        assert cap3.eigenvalues.min() > 0

    def test_density_columns_sum_to_matrix(self, sphere2, lame11):
        density = solve_first_kind_kelvin(sphere2, lame11)
        cap = capacitance_matrix(sphere2, lame11)
        np.testing.assert_allclose(np.einsum("p,pij->ij", sphere2.areas, density.sigma), cap.matrix, rtol=1e-14)

    def test_kelvin_matrix_symmetric_for_uniform_panels(self, lame11):
        # panel areas differ slightly on the icosphere, so symmetry holds up to the area ratio
        mesh = make_sphere_mesh(1)
        a = kelvin_matrix(mesh, lame11)
        w = np.repeat(mesh.areas, 3)
        sym = a / w[None, :]
        np.testing.assert_allclose(sym, sym.T, rtol=1e-12, atol=0)

    def test_scaling_law(self, sphere2, lame11):
        base = capacitance_matrix(sphere2, lame11)
        half = capacitance_matrix(sphere2.transformed(0.5), lame11)
        np.testing.assert_allclose(half.matrix, 0.5 * base.matrix, rtol=1e-12, atol=1e-12 * np.abs(base.matrix).max())
        assert half.acoustic == pytest.approx(0.5 * base.acoustic, rel=1e-12)

    def test_matrix_scaling_relation(self, sphere2, lame11):
        np.testing.assert_allclose(
            kelvin_matrix(sphere2.transformed(0.5), lame11), 0.5 * kelvin_matrix(sphere2, lame11), rtol=1e-13
        )

    def test_rotation_equivariance(self):
        lame = LameParameters(2.0, 1.0)
        ellipsoid = make_sphere_mesh(2).transformed(1.0, rotation=np.diag([1.0, 0.7, 0.5]))
        rot = Rotation.from_euler("zyx", [0.4, -0.9, 1.3]).as_matrix()
        c = capacitance_matrix(ellipsoid, lame).matrix
        c_rot = capacitance_matrix(ellipsoid.transformed(1.0, rotation=rot), lame).matrix
        np.testing.assert_allclose(c_rot, rot @ c @ rot.T, atol=1e-10 * np.abs(c).max())
        # principal axes are the coordinate axes; sliding along the long axis is easiest
        assert np.abs(c - np.diag(np.diag(c))).max() < 1e-3 * np.abs(c).max()
        assert c[0, 0] < c[1, 1] < c[2, 2]

    def test_translation_invariance(self, sphere2, lame11, cap2):
        moved = capacitance_matrix(sphere2.transformed(1.0, center=[3.0, -1.0, 2.0]), lame11)
        np.testing.assert_allclose(moved.matrix, cap2.matrix, rtol=1e-9, atol=1e-12)

    def test_refinement_monotone(self, lame11, cap2, cap3):
        exact = sphere_elastic_capacitance(0.5, lame11)
        e2 = abs(cap2.matrix[0, 0] - exact)
        e3 = abs(cap3.matrix[0, 0] - exact)
        assert e3 < e2

    @pytest.mark.slow
    def test_level2_to_level4_change(self, lame11, cap2):
        cap4 = capacitance_matrix(make_sphere_mesh(4), lame11)
        change = np.abs(cap4.matrix - cap2.matrix).max() / np.abs(cap4.matrix).max()
        assert change < 0.02
        exact = sphere_elastic_capacitance(0.5, lame11)
        assert cap4.matrix[0, 0] == pytest.approx(exact, rel=1e-3)

    def test_as_row(self, cap2):
        row = cap2.as_row()
        assert set(row) == {f"c{i}{j}" for i in (1, 2, 3) for j in (1, 2, 3)} | {"acoustic", "panels", "shape_id"}
        assert row["panels"] == 320 and row["shape_id"] == "sphere2"


class TestEigenvalueBounds:
    def test_sphere(self, cap3, lame11):
        report = verify_eigenvalue_bounds(cap3, lame11)
        assert report
        assert report.lower == pytest.approx(lame11.mu * cap3.acoustic)

    def test_cube(self):
        lame = LameParameters(2.0, 1.0)
        assert verify_eigenvalue_bounds(capacitance_matrix(make_cube_mesh(6), lame), lame).ok

    def test_synthetic_violation(self, lame11):
        acoustic = 2 * math.pi
        fake = CapacitanceMatrix(10 * 3 * acoustic * np.eye(3), acoustic, 0)
        assert not verify_eigenvalue_bounds(fake, lame11)

    @pytest.mark.parametrize("lam,mu", [(0.0, 1.0), (5.0, 0.5), (-0.5, 1.0)])
    def test_various_materials(self, sphere2, lam, mu):
        lame = LameParameters(lam, mu)
        cap = capacitance_matrix(sphere2, lame)
        assert verify_eigenvalue_bounds(cap, lame).ok
