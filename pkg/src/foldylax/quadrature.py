"""Quadrature on flat triangular panels, including weakly singular integrands."""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np


def triangle_inverse_distance(point, corners):
    """Exact integral of ``1/|x - point|`` over flat triangles.

    ``point`` must lie in the plane of each triangle (e.g. its centroid).
    Broadcasts: ``point`` ``(..., 3)``, ``corners`` ``(..., 3, 3)``.  Uses the
    edge decomposition ``sum_e h_e [asinh(s_end/h_e) - asinh(s_start/h_e)]``
    with ``h_e`` the in-plane distance from the point to edge ``e``.
    """
    p = np.asarray(point, dtype=float)
    c = np.asarray(corners, dtype=float)
    normal = np.cross(c[..., 1, :] - c[..., 0, :], c[..., 2, :] - c[..., 0, :])
    normal /= np.linalg.norm(normal, axis=-1, keepdims=True)
    total = np.zeros(np.broadcast_shapes(p.shape[:-1], c.shape[:-2]))
    for i in range(3):
        a = c[..., i, :]
        b = c[..., (i + 1) % 3, :]
        edge = b - a
        e = edge / np.linalg.norm(edge, axis=-1, keepdims=True)
        m = np.cross(e, normal)  # in-plane outward edge normal
        h = np.sum((a - p) * m, axis=-1)
        sa = np.sum((a - p) * e, axis=-1)
        sb = np.sum((b - p) * e, axis=-1)
        habs = np.abs(h)
        safe = np.where(habs > 0.0, habs, 1.0)
        term = h * (np.arcsinh(sb / safe) - np.arcsinh(sa / safe))
        total = total + np.where(habs > 0.0, term, 0.0)
    return total


@lru_cache(maxsize=None)
def gauss_legendre_unit(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def duffy_rule(point, corners, order: int = 8):
    """Quadrature nodes/weights on a triangle, exact-ish for ``1/|x - point|`` kernels.

    The triangle is split at the projection of ``point`` onto its plane into
    three (signed) sub-triangles; each is mapped from the unit square with the
    Duffy transform so the Jacobian cancels the ``1/r`` singularity.
    Returns ``(nodes (K, 3), weights (K,))``.
    """
    c = np.asarray(corners, dtype=float)
    normal = np.cross(c[1] - c[0], c[2] - c[0])
    twice_area = np.linalg.norm(normal)
    normal = normal / twice_area
    p = np.asarray(point, dtype=float)
    p = p - np.dot(p - c[0], normal) * normal
    u, wu = gauss_legendre_unit(order)
    uu, vv = np.meshgrid(u, u, indexing="ij")
    ww = np.outer(wu, wu)
    nodes, weights = [], []
    for i in range(3):
        a, b = c[i], c[(i + 1) % 3]
        signed = np.dot(np.cross(a - p, b - p), normal)
        if abs(signed) <= 1e-14 * twice_area:
            continue
        x = p + uu[..., None] * ((a - p) + vv[..., None] * (b - a))
        nodes.append(x.reshape(-1, 3))
        weights.append((signed * uu * ww).reshape(-1))
    return np.concatenate(nodes), np.concatenate(weights)


def seven_point_rule():
    """Degree-5 symmetric rule: barycentric coordinates ``(7, 3)`` and weights summing to 1."""
    s15 = math.sqrt(15.0)
    a1 = (6.0 - s15) / 21.0
    a2 = (6.0 + s15) / 21.0
    w1 = (155.0 - s15) / 1200.0
    w2 = (155.0 + s15) / 1200.0
    bary = [(1 / 3, 1 / 3, 1 / 3)]
    weights = [9.0 / 40.0]
    for a, w in ((a1, w1), (a2, w2)):
        b = 1.0 - 2.0 * a
        bary += [(a, a, b), (a, b, a), (b, a, a)]
        weights += [w, w, w]
    return np.array(bary), np.array(weights)


def triangle_inverse_distance_tensor(point, corners):
    """Exact integrals of ``1/r`` and ``rhat rhat^T / r`` over flat triangles.

    ``point`` must lie in the plane of each triangle.  In polar coordinates
    about the point each edge contributes ``h int rhat rhat^T / cos(phi) dphi``
    with ``rhat = cos(phi) m + sin(phi) e``, which integrates in closed form.
    Returns ``(J (...,), T (..., 3, 3))``.
    """
    p = np.asarray(point, dtype=float)
    c = np.asarray(corners, dtype=float)
    normal = np.cross(c[..., 1, :] - c[..., 0, :], c[..., 2, :] - c[..., 0, :])
    normal /= np.linalg.norm(normal, axis=-1, keepdims=True)
    shape = np.broadcast_shapes(p.shape[:-1], c.shape[:-2])
    scalar = np.zeros(shape)
    tensor = np.zeros(shape + (3, 3))
    for i in range(3):
        a = c[..., i, :]
        b = c[..., (i + 1) % 3, :]
        edge = b - a
        e = edge / np.linalg.norm(edge, axis=-1, keepdims=True)
        m = np.cross(e, normal)
        h = np.sum((a - p) * m, axis=-1)
        sa = np.sum((a - p) * e, axis=-1)
        sb = np.sum((b - p) * e, axis=-1)
        habs = np.abs(h)
        ok = habs > 0.0
        safe = np.where(ok, habs, 1.0)
        log_part = np.arcsinh(sb / safe) - np.arcsinh(sa / safe)
        ra, rb = np.hypot(safe, sa), np.hypot(safe, sb)
        sin_part = sb / rb - sa / ra
        cos_part = safe / rb - safe / ra
        sgn = np.sign(h)
        w = np.where(ok, h, 0.0)
        scalar = scalar + w * log_part
        mm = m[..., :, None] * m[..., None, :]
        me = m[..., :, None] * e[..., None, :]
        ee = e[..., :, None] * e[..., None, :]
        tensor = tensor + w[..., None, None] * (
            sin_part[..., None, None] * mm
            - (sgn * cos_part)[..., None, None] * (me + np.swapaxes(me, -1, -2))
            + (log_part - sin_part)[..., None, None] * ee
        )
    return scalar, tensor


def centroid_self_integrals(corners):
    """Integrals of ``1/r`` and ``rhat rhat^T / r`` over each panel, seen from its centroid.

    Returns ``(J (N,), T (N, 3, 3))``.
    """
    c = np.asarray(corners, dtype=float)
    return triangle_inverse_distance_tensor(c.mean(axis=-2), c)
