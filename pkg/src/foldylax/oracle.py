"""Reference boundary-element solution of the full multi-body scattering problem.

The scattered field is a single layer ``U^s(x) = sum_m int Gamma^omega(x, s) phi_m(s) ds``
with unknown traction densities ``phi_m``; the rigid (Dirichlet) condition
``U^i + U^s = 0`` is collocated at panel centroids with piecewise-constant
densities.  Off-diagonal panel pairs use the centroid rule; each self-panel
gets the exact Kelvin integral plus the coincident limit of ``Gamma^omega - Gamma^0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .capacitance import MAX_PANELS, kelvin_self_blocks
from .errors import ConfigError, DomainError, UsageError
from .foldy_lax import FarFieldPattern, ScatteringConfig, incident_field, project_farfield
from .geometry import SurfaceMesh
from .kernels import LameParameters, WaveNumbers, kupradze_tensor
from .linalg import solve_checked
from .quadrature import duffy_rule, seven_point_rule

_ROW_CHUNK = 128
NEAR_FACTOR = 3.0  # panels closer than this many panel sizes use singular quadrature
DUFFY_ORDER = 10


def smooth_remainder_limit(wn: WaveNumbers, lame: LameParameters) -> complex:
    """``lim_{y -> x} (Gamma^omega - Gamma^0)(x, y)``, a multiple of the identity."""
    w = wn.omega
    return 1j * w / (12.0 * math.pi) * (2.0 / lame.c_s**3 + 1.0 / lame.c_p**3)


@dataclass(frozen=True, eq=False)
class OracleSolution:
    mesh: SurfaceMesh  # union of world meshes
    owner: np.ndarray  # obstacle index of each panel
    density: np.ndarray  # (N, 3) complex
    condition: float
    residual: float

    @property
    def charges(self) -> np.ndarray:
        """Total charge per obstacle, ``(M, 3)``."""
        m = int(self.owner.max()) + 1
        out = np.zeros((m, 3), dtype=complex)
        np.add.at(out, self.owner, self.mesh.areas[:, None] * self.density)
        return out


def union_mesh(meshes) -> tuple[SurfaceMesh, np.ndarray]:
    verts, tris, owner, offset = [], [], [], 0
    for k, m in enumerate(meshes):
        verts.append(m.vertices)
        tris.append(m.triangles + offset)
        owner.append(np.full(m.n_panels, k))
        offset += len(m.vertices)
    mesh = SurfaceMesh(np.vstack(verts), np.vstack(tris), "union", validate=False)
    return mesh, np.concatenate(owner)


def oracle_matrix(mesh: SurfaceMesh, wn: WaveNumbers, lame: LameParameters) -> np.ndarray:
    """Collocation matrix ``(3N, 3N)`` of the single layer, complex symmetric."""
    c = mesh.centroids
    w = mesh.areas
    n = len(c)
    out = np.empty((3 * n, 3 * n), dtype=complex)
    view = out.reshape(n, 3, n, 3)
    for i0 in range(0, n, _ROW_CHUNK):
        i1 = min(i0 + _ROW_CHUNK, n)
        rows = np.arange(i1 - i0)
        x = np.broadcast_to(c[i0:i1, None, :], (i1 - i0, n, 3)).copy()
        # dummy offset on the diagonal, overwritten below
        x[rows, rows + i0] += 1.0
        g = kupradze_tensor(x, c[None, :, :], wn, lame)
        g *= w[None, :, None, None]
        view[i0:i1] = g.transpose(0, 2, 1, 3)
    idx = np.arange(n)
    self_blocks = kelvin_self_blocks(mesh, lame).astype(complex)
    self_blocks[:, [0, 1, 2], [0, 1, 2]] += smooth_remainder_limit(wn, lame) * w[:, None]
    view[idx, :, idx, :] = self_blocks
    return out


def oracle_solve(config: ScatteringConfig) -> OracleSolution:
    if config.M == 0:
        raise ConfigError("oracle needs at least one obstacle")
    mesh, owner = union_mesh([ob.world_mesh for ob in config.obstacles])
    if mesh.n_panels > MAX_PANELS:
        raise ConfigError(f"oracle panel count {mesh.n_panels} exceeds {MAX_PANELS}")
    wn = config.wn
    matrix = oracle_matrix(mesh, wn, config.lame)
    rhs = -incident_field(config.wave, mesh.centroids, wn).reshape(-1)
    copy = matrix.copy()
    phi, cond = solve_checked(matrix, rhs, what="oracle system", overwrite=True)
    scale = np.linalg.norm(rhs)
    residual = float(np.linalg.norm(copy @ phi - rhs) / scale) if scale > 0.0 else 0.0
    return OracleSolution(mesh, owner, phi.reshape(-1, 3), cond, residual)


def oracle_farfield(sol: OracleSolution, directions, wn: WaveNumbers, lame: LameParameters) -> FarFieldPattern:
    """Far field of the single layer, phases evaluated at panel centroids."""
    x = np.atleast_2d(np.asarray(directions, dtype=float))
    if x.shape[-1] != 3 or not np.allclose(np.linalg.norm(x, axis=1), 1.0, rtol=0.0, atol=1e-10):
        raise DomainError("far-field directions must be unit vectors")
    weighted = sol.mesh.areas[:, None] * sol.density
    proj = x @ sol.mesh.centroids.T
    sum_p = np.exp(-1j * wn.kappa_p * proj) @ weighted
    sum_s = np.exp(-1j * wn.kappa_s * proj) @ weighted
    return project_farfield(x, sum_p, sum_s, lame)


def single_layer_at(points, sol: OracleSolution, wn: WaveNumbers, lame: LameParameters) -> np.ndarray:
    """Evaluate the scattered field at arbitrary points, including on the surface.

    Panels within ``NEAR_FACTOR`` panel sizes of a point are integrated with
    the Duffy rule; the rest use a 7-point rule.
    """
    mesh = sol.mesh
    points = np.atleast_2d(np.asarray(points, dtype=float))
    bary, bw = seven_point_rule()
    nodes = np.einsum("qk,pkd->pqd", bary, mesh.corners)  # (N, 7, 3)
    weights = mesh.areas[:, None] * bw[None, :]
    h = mesh.panel_size
    out = np.zeros((len(points), 3), dtype=complex)
    for i, p in enumerate(points):
        dist = np.linalg.norm(mesh.centroids - p, axis=1)
        near = dist < NEAR_FACTOR * h
        far = np.flatnonzero(~near)
        g = kupradze_tensor(p, nodes[far], wn, lame)  # (F, 7, 3, 3)
        out[i] += np.einsum("fq,fqij,fj->i", weights[far], g, sol.density[far])
        for j in np.flatnonzero(near):
            q, qw = duffy_rule(p, mesh.corners[j], DUFFY_ORDER)
            keep = np.linalg.norm(q - p, axis=1) > 0.0
            g = kupradze_tensor(p, q[keep], wn, lame)
            out[i] += np.einsum("q,qij,j->i", qw[keep], g, sol.density[j])
    return out


def probe_points(mesh: SurfaceMesh, count=None, seed_stride=None) -> np.ndarray:
    """Edge midpoints: on the surface and half-way between collocation nodes."""
    mids = mesh.edge_midpoints()
    if count is None or count >= len(mids):
        return mids
    stride = seed_stride or max(1, len(mids) // count)
    return mids[::stride][:count]


def boundary_residual(sol: OracleSolution, config: ScatteringConfig, points=None, count=10) -> float:
    """``max |U^i + U^s| / max |U^i|`` at on-surface probes between nodes."""
    wn = config.wn
    if points is None:
        points = probe_points(sol.mesh, count)
    total = incident_field(config.wave, points, wn) + single_layer_at(points, sol, wn, config.lame)
    inc = np.linalg.norm(incident_field(config.wave, points, wn), axis=1).max()
    return float(np.linalg.norm(total, axis=1).max() / inc)


@dataclass(frozen=True)
class ErrorMetrics:
    max_abs_p: float
    max_abs_s: float
    rms_abs_p: float
    rms_abs_s: float
    max_rel_p: float
    max_rel_s: float
    rms_rel_p: float
    rms_rel_s: float

    @property
    def max_abs(self) -> float:
        return max(self.max_abs_p, self.max_abs_s)

    @property
    def max_rel(self) -> float:
        return max(self.max_rel_p, self.max_rel_s)

    def as_row(self) -> dict:
        row = dict(self.__dict__)
        row.update(max_abs=self.max_abs, max_rel=self.max_rel)
        return row


def compare(foldy: FarFieldPattern, oracle: FarFieldPattern) -> ErrorMetrics:
    """Max and RMS of the pointwise discrepancy, absolute and relative to the oracle."""
    if foldy.directions.shape != oracle.directions.shape or not np.allclose(
        foldy.directions, oracle.directions, rtol=0.0, atol=1e-14
    ):
        raise UsageError("far-field patterns are sampled on different directions")
    dp = np.linalg.norm(foldy.up - oracle.up, axis=1)
    ds = np.linalg.norm(foldy.us - oracle.us, axis=1)
    ref_p = np.linalg.norm(oracle.up, axis=1).max(initial=0.0)
    ref_s = np.linalg.norm(oracle.us, axis=1).max(initial=0.0)

    def rms(v):
        return float(np.sqrt(np.mean(v**2))) if len(v) else 0.0

    def rel(v, ref):
        return v / ref if ref > 0.0 else v

    return ErrorMetrics(
        float(dp.max(initial=0.0)), float(ds.max(initial=0.0)), rms(dp), rms(ds),
        float(rel(dp.max(initial=0.0), ref_p)), float(rel(ds.max(initial=0.0), ref_s)),
        float(rel(rms(dp), ref_p)), float(rel(rms(ds), ref_s)),
    )
