"""Elastic (3x3) and acoustic (scalar) capacitances of a single body.

Both come from first-kind single-layer equations discretised by
piecewise-constant collocation at panel centroids: off-diagonal panel pairs
use the one-point rule ``kernel(c_i, c_j) * area_j``, and each self-panel is
integrated in closed form from its centroid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .geometry import SurfaceMesh
from .kernels import LameParameters, kelvin_coefficients
from .linalg import solve_checked
from .quadrature import centroid_self_integrals, triangle_inverse_distance

MIN_PANELS = 20
MAX_PANELS = 20480
EIGEN_SLACK = 0.02
_ROW_CHUNK = 256


@dataclass(frozen=True)
class SurfaceDensity:
    """Per-panel 3x3 densities; column ``l`` generates the constant potential ``e_l``."""

    sigma: np.ndarray
    areas: np.ndarray
    condition: float

    def total(self) -> np.ndarray:
        return np.einsum("p,pij->ij", self.areas, self.sigma)


@dataclass(frozen=True)
class CapacitanceMatrix:
    matrix: np.ndarray
    acoustic: float
    mesh_panels: int
    shape_id: str = "mesh"
    condition: float = field(default=float("nan"), compare=False)

    def scaled(self, eps: float) -> "CapacitanceMatrix":
        """Capacitance of ``eps * B``: both matrix and scalar grow linearly."""
        return CapacitanceMatrix(
            eps * self.matrix, eps * self.acoustic, self.mesh_panels, self.shape_id, self.condition
        )

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(0.5 * (self.matrix + self.matrix.T))

    def as_row(self) -> dict:
        row = {f"c{i + 1}{j + 1}": float(self.matrix[i, j]) for i in range(3) for j in range(3)}
        row.update(acoustic=float(self.acoustic), panels=self.mesh_panels, shape_id=self.shape_id)
        return row


def _check_mesh(mesh: SurfaceMesh):
    if mesh.n_panels < MIN_PANELS:
        raise ConfigError(f"need at least {MIN_PANELS} panels, mesh has {mesh.n_panels}")
    if mesh.n_panels > MAX_PANELS:
        raise ConfigError(f"panel count {mesh.n_panels} exceeds the cap of {MAX_PANELS}")


def kelvin_self_blocks(mesh: SurfaceMesh, lame: LameParameters) -> np.ndarray:
    """Exact self-panel integrals of the Kelvin tensor, shape ``(N, 3, 3)``."""
    alpha, beta = kelvin_coefficients(lame)
    scalar, tensor = centroid_self_integrals(mesh.corners)
    blocks = beta * tensor
    blocks[:, [0, 1, 2], [0, 1, 2]] += alpha * scalar[:, None]
    return blocks / (8.0 * math.pi)


def kelvin_matrix(mesh: SurfaceMesh, lame: LameParameters) -> np.ndarray:
    """Collocation matrix of the Kelvin single layer, ``(3N, 3N)``, index ``3*panel + component``."""
    c = mesh.centroids
    w = mesh.areas
    n = len(c)
    alpha, beta = kelvin_coefficients(lame)
    out = np.empty((3 * n, 3 * n))
    view = out.reshape(n, 3, n, 3)
    for i0 in range(0, n, _ROW_CHUNK):
        i1 = min(i0 + _ROW_CHUNK, n)
        r = c[i0:i1, None, :] - c[None, :, :]
        rho = np.linalg.norm(r, axis=2)
        rows = np.arange(i1 - i0)
        rho[rows, rows + i0] = 1.0
        scale = w[None, :] / (8.0 * math.pi * rho)
        rhat = r / rho[..., None]
        block = (beta * scale)[..., None, None] * rhat[..., :, None] * rhat[..., None, :]
        block[..., [0, 1, 2], [0, 1, 2]] += (alpha * scale)[..., None]
        view[i0:i1] = block.transpose(0, 2, 1, 3)
    self_blocks = kelvin_self_blocks(mesh, lame)
    idx = np.arange(n)
    view[idx, :, idx, :] = self_blocks
    return out


def solve_first_kind_kelvin(mesh: SurfaceMesh, lame: LameParameters) -> SurfaceDensity:
    """Densities solving ``int Gamma^0(t, s) sigma(s) ds = I`` on the surface."""
    _check_mesh(mesh)
    n = mesh.n_panels
    a = kelvin_matrix(mesh, lame)
    rhs = np.tile(np.eye(3), (n, 1))
    x, cond = solve_checked(a, rhs, what="elastic capacitance", overwrite=True)
    return SurfaceDensity(x.reshape(n, 3, 3), mesh.areas, cond)


def laplace_matrix(mesh: SurfaceMesh) -> np.ndarray:
    c = mesh.centroids
    r = np.linalg.norm(c[:, None, :] - c[None, :, :], axis=2)
    np.fill_diagonal(r, 1.0)
    out = mesh.areas[None, :] / (4.0 * math.pi * r)
    np.fill_diagonal(out, triangle_inverse_distance(c, mesh.corners) / (4.0 * math.pi))
    return out


def acoustic_capacitance(mesh: SurfaceMesh, return_density=False):
    """Total charge of the density with unit Laplace potential on the surface."""
    _check_mesh(mesh)
    sigma, _ = solve_checked(
        laplace_matrix(mesh), np.ones(mesh.n_panels), what="acoustic capacitance", overwrite=True
    )
    value = float(np.dot(mesh.areas, sigma))
    return (value, sigma) if return_density else value


def capacitance_matrix(mesh: SurfaceMesh, lame: LameParameters) -> CapacitanceMatrix:
    density = solve_first_kind_kelvin(mesh, lame)
    return CapacitanceMatrix(
        density.total(),
        acoustic_capacitance(mesh),
        mesh.n_panels,
        mesh.shape_id,
        density.condition,
    )


@dataclass(frozen=True)
class EigenvalueBoundReport:
    ok: bool
    eigenvalues: np.ndarray
    lower: float
    upper: float
    slack: float

    def __bool__(self):
        return self.ok


def verify_eigenvalue_bounds(cap: CapacitanceMatrix, lame: LameParameters, slack=EIGEN_SLACK):
    """Check ``mu C^a <= eig(C) <= (lambda + 2 mu) C^a`` with relative ``slack``."""
    eig = cap.eigenvalues
    lower = lame.mu * cap.acoustic
    upper = (lame.lam + 2.0 * lame.mu) * cap.acoustic
    ok = bool(eig[0] >= (1.0 - slack) * lower and eig[-1] <= (1.0 + slack) * upper)
    return EigenvalueBoundReport(ok, eig, lower, upper, slack)
