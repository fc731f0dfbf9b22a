"""Triangulated obstacle shapes and the configuration statistics a, d, diam(Omega)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy.spatial import ConvexHull, cKDTree

from .errors import ConfigError

MAX_REFINEMENT = 6


@dataclass(frozen=True, eq=False)
class SurfaceMesh:
    """Closed, outward-oriented triangulated surface.

    ``vertices`` is ``(V, 3)`` float, ``triangles`` is ``(F, 3)`` int with
    counter-clockwise ordering seen from outside.  Per-panel centroids,
    unit normals and areas are derived on construction.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    shape_id: str = "mesh"
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        t = np.array(self.triangles, dtype=np.int64)
        if v.ndim != 2 or v.shape[1] != 3 or t.ndim != 2 or t.shape[1] != 3:
            raise ConfigError("mesh needs (V,3) vertices and (F,3) triangles")
        if len(t) == 0:
            raise ConfigError("mesh has no panels")
        if t.min() < 0 or t.max() >= len(v):
            raise ConfigError("triangle index out of range")
        v.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "triangles", t)

        corners = v[t]
        cross = np.cross(corners[:, 1] - corners[:, 0], corners[:, 2] - corners[:, 0])
        twice_area = np.linalg.norm(cross, axis=1)
        for name, value in (
            ("corners", corners),
            ("centroids", corners.mean(axis=1)),
            ("areas", 0.5 * twice_area),
        ):
            value.setflags(write=False)
            object.__setattr__(self, name, value)
        if np.any(twice_area <= 0.0):
            raise ConfigError("mesh contains degenerate (zero-area) panels")
        normals = cross / twice_area[:, None]
        normals.setflags(write=False)
        object.__setattr__(self, "normals", normals)
        if self.validate:
            self._check_closed()
            self._check_orientation()

    def _check_closed(self):
        t = self.triangles
        directed = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        undirected = np.sort(directed, axis=1)
        _, counts = np.unique(undirected, axis=0, return_counts=True)
        if np.any(counts != 2):
            raise ConfigError("mesh is not closed: some edge is not shared by exactly 2 panels")
        _, dcounts = np.unique(directed, axis=0, return_counts=True)
        if np.any(dcounts != 1):
            raise ConfigError("mesh orientation is inconsistent between neighbouring panels")

    def _check_orientation(self):
        center = self.vertices.mean(axis=0)
        flux = np.sum(self.areas * np.einsum("ij,ij->i", self.normals, self.centroids - center))
        if flux <= 0.0:
            raise ConfigError("mesh normals point inward")

    @property
    def n_panels(self) -> int:
        return len(self.triangles)

    @cached_property
    def diameter(self) -> float:
        """Largest vertex-to-vertex distance."""
        pts = self.vertices
        if len(pts) > 64:
            pts = pts[ConvexHull(pts).vertices]
        diff = pts[:, None, :] - pts[None, :, :]
        return float(np.sqrt(np.max(np.einsum("ijk,ijk->ij", diff, diff))))

    @cached_property
    def panel_size(self) -> float:
        """Longest panel edge."""
        c = self.corners
        edges = np.stack([c[:, 1] - c[:, 0], c[:, 2] - c[:, 1], c[:, 0] - c[:, 2]], axis=1)
        return float(np.linalg.norm(edges, axis=2).max())

    @property
    def total_area(self) -> float:
        return float(self.areas.sum())

    def transformed(self, scale=1.0, center=(0.0, 0.0, 0.0), rotation=None) -> "SurfaceMesh":
        """Mesh of ``scale * R v + center`` with the same combinatorics."""
        v = self.vertices
        if rotation is not None:
            v = v @ np.asarray(rotation, dtype=float).T
        v = scale * v + np.asarray(center, dtype=float)
        return SurfaceMesh(v, self.triangles, self.shape_id, validate=False)

    def edge_midpoints(self) -> np.ndarray:
        t = self.triangles
        edges = np.unique(np.sort(np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]]), axis=1), axis=0)
        return 0.5 * (self.vertices[edges[:, 0]] + self.vertices[edges[:, 1]])


def make_sphere_mesh(refinement_level: int) -> SurfaceMesh:
    """Icosphere of unit diameter centred at the origin (20 * 4**level panels)."""
    if int(refinement_level) != refinement_level or not 0 <= refinement_level <= MAX_REFINEMENT:
        raise ConfigError(f"refinement level must be an integer in [0, {MAX_REFINEMENT}]")
    phi = (1.0 + math.sqrt(5.0)) / 2.0
    verts = [
        (-1, phi, 0), (1, phi, 0), (-1, -phi, 0), (1, -phi, 0),
        (0, -1, phi), (0, 1, phi), (0, -1, -phi), (0, 1, -phi),
        (phi, 0, -1), (phi, 0, 1), (-phi, 0, -1), (-phi, 0, 1),
    ]
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    v = np.array(verts, dtype=float)
    v /= np.linalg.norm(v, axis=1)[:, None]
    f = np.array(faces, dtype=np.int64)
    for _ in range(int(refinement_level)):
        v, f = _subdivide(v, f)
    return SurfaceMesh(0.5 * v, f, shape_id=f"sphere{int(refinement_level)}")


def _subdivide(v, f):
    edges = np.sort(np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]]), axis=1)
    uniq, inverse = np.unique(edges, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    mid = v[uniq[:, 0]] + v[uniq[:, 1]]
    mid /= np.linalg.norm(mid, axis=1)[:, None]
    nf = len(f)
    m01 = inverse[:nf] + len(v)
    m12 = inverse[nf:2 * nf] + len(v)
    m20 = inverse[2 * nf:] + len(v)
    a, b, c = f[:, 0], f[:, 1], f[:, 2]
    new = np.concatenate([
        np.stack([a, m01, m20], axis=1),
        np.stack([b, m12, m01], axis=1),
        np.stack([c, m20, m12], axis=1),
        np.stack([m01, m12, m20], axis=1),
    ])
    return np.vstack([v, mid]), new


def make_cube_mesh(divisions: int = 4, side: float = 1.0) -> SurfaceMesh:
    """Axis-aligned cube centred at the origin, ``12 * divisions**2`` panels."""
    n = int(divisions)
    if n < 1:
        raise ConfigError("cube needs at least one division per edge")
    s = np.linspace(-0.5, 0.5, n + 1)
    verts = {}
    tris = []

    def vid(p):
        key = tuple(np.round(p, 12))
        if key not in verts:
            verts[key] = len(verts)
        return verts[key]

    for axis in range(3):
        u_ax, w_ax = [k for k in range(3) if k != axis]
        for sign in (-0.5, 0.5):
            for i in range(n):
                for j in range(n):
                    quad = []
                    for di, dj in ((0, 0), (1, 0), (1, 1), (0, 1)):
                        p = np.zeros(3)
                        p[axis] = sign
                        p[u_ax] = s[i + di]
                        p[w_ax] = s[j + dj]
                        quad.append(vid(p))
                    a, b, c, d = quad
                    # u x w is +axis for the cyclic ordering; flip on the negative face
                    ccw = np.cross(np.eye(3)[u_ax], np.eye(3)[w_ax])[axis] * sign > 0
                    if ccw:
                        tris += [(a, b, c), (a, c, d)]
                    else:
                        tris += [(a, c, b), (a, d, c)]
    v = np.array(sorted(verts, key=verts.get), dtype=float) * side
    return SurfaceMesh(v, np.array(tris), shape_id=f"cube{n}")


def load_mesh(path, shape_id=None) -> SurfaceMesh:
    """Read the ASCII format: ``V F`` header, V vertex lines, F 0-based index lines."""
    path = Path(path)
    try:
        lines = [ln.split() for ln in path.read_text().splitlines() if ln.strip()]
        nv, nf = (int(x) for x in lines[0])
        if len(lines) != 1 + nv + nf:
            raise ValueError(f"expected {1 + nv + nf} non-empty lines, found {len(lines)}")
        v = np.array(lines[1:1 + nv], dtype=float)
        f = np.array(lines[1 + nv:], dtype=np.int64)
    except (OSError, ValueError, IndexError) as exc:
        raise ConfigError(f"cannot read mesh file {path}: {exc}") from exc
    return SurfaceMesh(v, f, shape_id=shape_id or path.stem)


def save_mesh(mesh: SurfaceMesh, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"{len(mesh.vertices)} {len(mesh.triangles)}\n")
        for x, y, z in mesh.vertices:
            fh.write(f"{float(x)!r} {float(y)!r} {float(z)!r}\n")
        for i, j, k in mesh.triangles:
            fh.write(f"{i} {j} {k}\n")


@dataclass(frozen=True, eq=False)
class Obstacle:
    """Small body ``D = scale * B + center`` for a reference shape B."""

    center: np.ndarray
    shape: SurfaceMesh
    scale: float

    def __post_init__(self):
        c = np.array(self.center, dtype=float).reshape(3)
        if not np.all(np.isfinite(c)):
            raise ConfigError("obstacle center must be finite")
        if not (math.isfinite(self.scale) and self.scale > 0.0):
            raise ConfigError(f"obstacle scale must be > 0, got {self.scale}")
        c.setflags(write=False)
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "scale", float(self.scale))

    @cached_property
    def world_mesh(self) -> SurfaceMesh:
        return self.shape.transformed(self.scale, self.center)

    @property
    def diameter(self) -> float:
        return self.scale * self.shape.diameter


@dataclass(frozen=True)
class GeometryStats:
    a: float
    d: float
    diam_omega: float
    M: int


def ritter_sphere(points) -> tuple[np.ndarray, float]:
    """Ritter's approximate bounding sphere; returns ``(center, radius)``."""
    pts = np.asarray(points, dtype=float)
    p0 = pts[0]
    p1 = pts[np.argmax(np.sum((pts - p0) ** 2, axis=1))]
    p2 = pts[np.argmax(np.sum((pts - p1) ** 2, axis=1))]
    center = 0.5 * (p1 + p2)
    radius = 0.5 * float(np.linalg.norm(p2 - p1))
    chunk = 256
    for start in range(0, len(pts), chunk):
        block = pts[start:start + chunk]
        if np.all(np.linalg.norm(block - center, axis=1) <= radius):
            continue
        for p in block:
            dist = float(np.linalg.norm(p - center))
            if dist > radius:
                new_radius = 0.5 * (radius + dist)
                center = center + (dist - new_radius) / dist * (p - center)
                radius = new_radius
    return center, radius


def _winding_numbers(mesh: SurfaceMesh, points) -> np.ndarray:
    """Generalised winding number of a closed mesh around each point."""
    total = np.zeros(len(points))
    for start in range(0, len(points), 512):
        p = points[start:start + 512]
        a = mesh.corners[None, :, 0, :] - p[:, None, :]
        b = mesh.corners[None, :, 1, :] - p[:, None, :]
        c = mesh.corners[None, :, 2, :] - p[:, None, :]
        la, lb, lc = (np.linalg.norm(x, axis=2) for x in (a, b, c))
        num = np.einsum("ijk,ijk->ij", a, np.cross(b, c))
        den = (
            la * lb * lc
            + np.einsum("ijk,ijk->ij", a, b) * lc
            + np.einsum("ijk,ijk->ij", b, c) * la
            + np.einsum("ijk,ijk->ij", c, a) * lb
        )
        total[start:start + 512] = np.sum(2.0 * np.arctan2(num, den), axis=1) / (4.0 * math.pi)
    return total


def _check_disjoint(m1: SurfaceMesh, m2: SurfaceMesh, gap: float):
    if gap <= 0.0:
        raise ConfigError("obstacles touch or overlap (zero centroid distance)")
    if np.any(_winding_numbers(m1, m2.vertices) > 0.5) or np.any(
        _winding_numbers(m2, m1.vertices) > 0.5
    ):
        raise ConfigError("obstacles overlap")


def compute_stats(obstacles) -> GeometryStats:
    """Maximum diameter a, minimum panel-centroid gap d and Ritter diam(Omega).

    ``d`` is ``inf`` for a single obstacle.
    """
    obstacles = list(obstacles)
    if not obstacles:
        raise ConfigError("at least one obstacle is required")
    meshes = [ob.world_mesh for ob in obstacles]
    a = max(ob.diameter for ob in obstacles)
    radii = [
        float(np.max(np.linalg.norm(m.vertices - ob.center, axis=1)))
        for m, ob in zip(meshes, obstacles)
    ]
    trees = [cKDTree(m.centroids) for m in meshes]
    d = math.inf
    for i in range(len(meshes)):
        for j in range(i + 1, len(meshes)):
            gap = float(trees[j].query(meshes[i].centroids)[0].min())
            center_dist = float(np.linalg.norm(obstacles[i].center - obstacles[j].center))
            if center_dist < radii[i] + radii[j]:
                _check_disjoint(meshes[i], meshes[j], gap)
            d = min(d, gap)
    _, radius = ritter_sphere(np.vstack([m.vertices for m in meshes]))
    return GeometryStats(a=float(a), d=d, diam_omega=2.0 * radius, M=len(obstacles))
