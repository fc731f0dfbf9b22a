"""Kupradze fundamental tensor of the time-harmonic Navier operator.

Every tensor here has the form ``A(rho) I + B(rho) rhat rhat^T`` with
``r = x - y`` and ``rho = |r|``.  Two evaluations of the radial factors are
available: the closed form built from second derivatives of the Helmholtz
kernel ``exp(i k rho) / (4 pi rho)``, and the power series in ``rho``.  The
closed form loses accuracy as ``omega * rho -> 0`` because it divides a
difference of two nearly equal kernels by ``omega**2``; the series is used
there instead.

All functions broadcast over leading axes: points of shape ``(..., 3)``
give tensors of shape ``(..., 3, 3)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

#: kappa_max * |x - y| below which the series branch is used.
SWITCH_THRESHOLD = 0.1
SERIES_RTOL = 1e-16
SERIES_MAX_TERMS = 60
FOUR_PI = 4.0 * math.pi


@dataclass(frozen=True)
class LameParameters:
    """Isotropic Lame constants (unit mass density)."""

    lam: float
    mu: float

    def __post_init__(self):
        lam, mu = float(self.lam), float(self.mu)
        if not (math.isfinite(lam) and math.isfinite(mu)):
            raise DomainError("Lame parameters must be finite")
        if mu <= 0.0 or 3.0 * lam + 2.0 * mu <= 0.0:
            raise DomainError(
                f"need mu > 0 and 3*lambda + 2*mu > 0, got lambda={lam}, mu={mu}"
            )
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "mu", mu)

    @property
    def c_p(self) -> float:
        return math.sqrt(self.lam + 2.0 * self.mu)

    @property
    def c_s(self) -> float:
        return math.sqrt(self.mu)

    def wavenumbers(self, omega: float) -> "WaveNumbers":
        return WaveNumbers.from_omega(omega, self)


@dataclass(frozen=True)
class WaveNumbers:
    omega: float
    kappa_p: float
    kappa_s: float

    @classmethod
    def from_omega(cls, omega: float, lame: LameParameters) -> "WaveNumbers":
        omega = float(omega)
        if not math.isfinite(omega) or omega < 0.0:
            raise DomainError(f"omega must be finite and >= 0, got {omega}")
        return cls(omega, omega / lame.c_p, omega / lame.c_s)

    @property
    def kappa_max(self) -> float:
        return max(self.kappa_p, self.kappa_s)


def _offsets(x, y):
    r = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    if r.shape[-1:] != (3,):
        raise DomainError(f"points must have a trailing axis of length 3, got {r.shape}")
    if not np.all(np.isfinite(r)):
        raise DomainError("non-finite point coordinates")
    rho = np.linalg.norm(r, axis=-1)
    if np.any(rho == 0.0):
        raise DomainError("kernel evaluated at coincident points x == y")
    return r, rho


def _series_parts(rho, omega, lame, derivatives):
    """Radial factors from the power series in rho, summed term by term.

    With ``u_l = (i kappa_s rho)^l / l!`` and ``v_l`` likewise for P waves,
    ``4 pi rho A = sum ((l+1) u_l / c_s^2 + v_l / c_p^2) / (l+2)`` and
    ``4 pi rho B = -sum (l-1) (u_l / c_s^2 - v_l / c_p^2) / (l+2)``.
    """
    inv_s2 = 1.0 / lame.mu
    inv_p2 = 1.0 / (lame.lam + 2.0 * lame.mu)
    zs = 1j * (omega / lame.c_s) * rho
    zp = 1j * (omega / lame.c_p) * rho
    u = np.ones_like(zs)
    v = np.ones_like(zp)
    a_sum = np.zeros_like(zs)
    b_sum = np.zeros_like(zs)
    da_sum = np.zeros_like(zs)
    db_sum = np.zeros_like(zs)
    for l in range(SERIES_MAX_TERMS):
        s_term = u * inv_s2
        p_term = v * inv_p2
        ta = ((l + 1) * s_term + p_term) / (l + 2)
        tb = -(l - 1) * (s_term - p_term) / (l + 2)
        if l >= 2:
            # bound on every tracked term, including the (l-1)^2 weighted ones
            bound = (np.abs(s_term) * (l + 1) + np.abs(p_term)) * (l + 1) ** 2
            if np.all(bound < SERIES_RTOL * np.abs(a_sum)):
                break
        a_sum += ta
        b_sum += tb
        if derivatives:
            da_sum += (l - 1) * ta
            db_sum += (l - 1) * tb
        u = u * zs / (l + 1)
        v = v * zp / (l + 1)
    a = a_sum / (FOUR_PI * rho)
    b = b_sum / (FOUR_PI * rho)
    if not derivatives:
        return a, b
    rho2 = FOUR_PI * rho * rho
    return a, b, da_sum / rho2, db_sum / rho2


def _helmholtz_derivatives(rho, k, order):
    """Radial derivatives 0..order of exp(i k rho) / (4 pi rho)."""
    e = np.exp(1j * k * rho) / FOUR_PI
    ir = 1.0 / rho
    ik = 1j * k
    out = [e * ir, e * (ik * ir - ir**2)]
    if order >= 2:
        out.append(e * (-k * k * ir - 2.0 * ik * ir**2 + 2.0 * ir**3))
    if order >= 3:
        out.append(
            e * (-1j * k**3 * ir + 3.0 * k * k * ir**2 + 6.0 * ik * ir**3 - 6.0 * ir**4)
        )
    return out


def _closed_parts(rho, omega, lame, derivatives):
    order = 3 if derivatives else 2
    gs = _helmholtz_derivatives(rho, omega / lame.c_s, order)
    gp = _helmholtz_derivatives(rho, omega / lame.c_p, order)
    f = [s - p for s, p in zip(gs, gp)]
    w2 = omega * omega
    a = gs[0] / lame.mu + f[1] / (rho * w2)
    b = (f[2] - f[1] / rho) / w2
    if not derivatives:
        return a, b
    da = gs[1] / lame.mu + (f[2] / rho - f[1] / rho**2) / w2
    db = (f[3] - f[2] / rho + f[1] / rho**2) / w2
    return a, b, da, db


def radial_parts(rho, wn: WaveNumbers, lame: LameParameters, branch="auto", derivatives=False):
    """Radial factors ``A, B`` (and ``dA/drho, dB/drho``) of the Kupradze tensor.

    ``branch`` is ``"auto"``, ``"series"`` or ``"closed"``; ``"auto"`` picks
    the series wherever ``kappa_max * rho < SWITCH_THRESHOLD``.
    """
    rho = np.asarray(rho, dtype=float)
    omega = wn.omega
    if branch == "closed":
        if omega == 0.0:
            raise DomainError("closed-form branch is undefined at omega = 0")
        return _closed_parts(rho, omega, lame, derivatives)
    if branch == "series" or omega == 0.0:
        return _series_parts(rho, omega, lame, derivatives)
    if branch != "auto":
        raise DomainError(f"unknown branch {branch!r}")

    near = wn.kappa_max * rho < SWITCH_THRESHOLD
    if np.all(near):
        return _series_parts(rho, omega, lame, derivatives)
    if not np.any(near):
        return _closed_parts(rho, omega, lame, derivatives)
    parts = [np.empty(rho.shape, dtype=complex) for _ in range(4 if derivatives else 2)]
    for dst, src in zip(parts, _series_parts(rho[near], omega, lame, derivatives)):
        dst[near] = src
    far = ~near
    for dst, src in zip(parts, _closed_parts(rho[far], omega, lame, derivatives)):
        dst[far] = src
    return tuple(parts)


def _assemble(a, b, rhat):
    out = b[..., None, None] * (rhat[..., :, None] * rhat[..., None, :])
    idx = np.arange(3)
    out[..., idx, idx] += a[..., None]
    return out


def kupradze_tensor(x, y, wn: WaveNumbers, lame: LameParameters, branch="auto"):
    """Kupradze matrix Gamma^omega(x, y), complex of shape ``(..., 3, 3)``.

    Requests at ``omega = 0`` are answered by :func:`kelvin_tensor`.
    """
    if wn.omega == 0.0 and branch != "closed":
        return kelvin_tensor(x, y, lame).astype(complex)
    r, rho = _offsets(x, y)
    a, b = radial_parts(rho, wn, lame, branch)
    return _assemble(a, b, r / rho[..., None])


def kelvin_coefficients(lame: LameParameters):
    """Weights ``(alpha, beta)`` with Gamma^0 = (alpha I/rho + beta r r^T/rho^3) / (8 pi)."""
    inv_s2 = 1.0 / lame.mu
    inv_p2 = 1.0 / (lame.lam + 2.0 * lame.mu)
    return inv_s2 + inv_p2, inv_s2 - inv_p2


def kelvin_tensor(x, y, lame: LameParameters):
    """Zero-frequency (Kelvin) tensor, real symmetric positive definite."""
    r, rho = _offsets(x, y)
    alpha, beta = kelvin_coefficients(lame)
    scale = 1.0 / (8.0 * math.pi * rho)
    return _assemble(alpha * scale, beta * scale, r / rho[..., None])


def kupradze_gradient(x, y, wn: WaveNumbers, lame: LameParameters, branch="auto"):
    """Gradient in the source point: ``G[..., i, j, k] = d Gamma_ij / d y_k``."""
    r, rho = _offsets(x, y)
    a, b, da, db = radial_parts(rho, wn, lame, branch, derivatives=True)
    rhat = r / rho[..., None]
    eye = np.eye(3)
    rrr = rhat[..., :, None, None] * rhat[..., None, :, None] * rhat[..., None, None, :]
    # d/dr_k of A delta_ij + B rhat_i rhat_j; d/dy = -d/dr
    grad = (
        da[..., None, None, None] * eye[:, :, None] * rhat[..., None, None, :]
        + db[..., None, None, None] * rrr
        + (b / rho)[..., None, None, None]
        * (
            eye[:, None, :] * rhat[..., None, :, None]
            + rhat[..., :, None, None] * eye[None, :, :]
            - 2.0 * rrr
        )
    )
    return -grad


def _check_directions(x_hat):
    x_hat = np.asarray(x_hat, dtype=float)
    if x_hat.shape[-1:] != (3,) or not np.all(np.isfinite(x_hat)):
        raise DomainError("directions must be finite 3-vectors")
    if not np.allclose(np.linalg.norm(x_hat, axis=-1), 1.0, rtol=0.0, atol=1e-10):
        raise DomainError("far-field directions must be unit vectors")
    return x_hat


def farfield_kernel_p(x_hat, y, wn: WaveNumbers, lame: LameParameters):
    """P-wave far-field factor (x^ x^T) exp(-i kappa_p x^.y) / (4 pi c_p^2)."""
    x_hat = _check_directions(x_hat)
    y = np.asarray(y, dtype=float)
    phase = np.exp(-1j * wn.kappa_p * np.sum(x_hat * y, axis=-1))
    proj = x_hat[..., :, None] * x_hat[..., None, :]
    return proj * (phase / (FOUR_PI * lame.c_p**2))[..., None, None]


def farfield_kernel_s(x_hat, y, wn: WaveNumbers, lame: LameParameters):
    """S-wave far-field factor (I - x^ x^T) exp(-i kappa_s x^.y) / (4 pi c_s^2)."""
    x_hat = _check_directions(x_hat)
    y = np.asarray(y, dtype=float)
    phase = np.exp(-1j * wn.kappa_s * np.sum(x_hat * y, axis=-1))
    proj = np.eye(3) - x_hat[..., :, None] * x_hat[..., None, :]
    return proj * (phase / (FOUR_PI * lame.c_s**2))[..., None, None]
