"""Point-interaction (Foldy-Lax) system for many small rigid bodies.

Each body m carries one complex 3-vector charge Q_m solving

    C_m^{-1} Q_m = -U^i(z_m) - sum_{j != m} Gamma^omega(z_m, z_j) Q_j,

and the far field is the superposition of point sources at the centres.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .capacitance import CapacitanceMatrix
from .errors import ConditionInapplicableError, ConfigError, DomainError, InvertibilityError, NumericalError
from .geometry import GeometryStats, Obstacle
from .kernels import LameParameters, WaveNumbers, kupradze_tensor
from .linalg import solve_checked

RESIDUAL_TOL = 1e-10
_E2 = math.e**2


def default_polarization(theta) -> np.ndarray:
    """Unit vector normal to ``theta``: normalize(e3 x theta), or e1 projected off ``theta`` near the poles."""
    theta = np.asarray(theta, dtype=float)
    if abs(theta[2]) > 1.0 - 1e-9:
        perp = np.array([1.0, 0.0, 0.0]) - theta[0] * theta
    else:
        perp = np.cross([0.0, 0.0, 1.0], theta)
    return perp / np.linalg.norm(perp)


@dataclass(frozen=True)
class IncidentWave:
    """Plane wave ``alpha theta e^{i kp theta.x} + beta theta_perp e^{i ks theta.x}``."""

    alpha: complex
    beta: complex
    theta: np.ndarray
    theta_perp: np.ndarray = None

    def __post_init__(self):
        theta = np.array(self.theta, dtype=float).reshape(3)
        perp = default_polarization(theta) if self.theta_perp is None else self.theta_perp
        perp = np.array(perp, dtype=float).reshape(3)
        if not (np.isfinite(theta).all() and np.isfinite(perp).all()):
            raise DomainError("incident directions must be finite")
        if abs(np.linalg.norm(theta) - 1.0) > 1e-12 or abs(np.linalg.norm(perp) - 1.0) > 1e-12:
            raise DomainError("theta and theta_perp must be unit vectors")
        if abs(np.dot(theta, perp)) > 1e-12:
            raise DomainError("theta_perp must be perpendicular to theta")
        object.__setattr__(self, "alpha", complex(self.alpha))
        object.__setattr__(self, "beta", complex(self.beta))
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "theta_perp", perp)

    @classmethod
    def along(cls, theta, alpha=1.0, beta=0.0, theta_perp=None) -> "IncidentWave":
        """Build from a possibly unnormalised direction."""
        theta = np.asarray(theta, dtype=float)
        norm = np.linalg.norm(theta)
        if not np.isfinite(norm) or norm == 0.0:
            raise DomainError("incident direction must be a non-zero finite vector")
        return cls(alpha, beta, theta / norm, theta_perp)


def incident_field(wave: IncidentWave, x, wn: WaveNumbers) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    tx = x @ wave.theta
    p = (wave.alpha * np.exp(1j * wn.kappa_p * tx))[..., None] * wave.theta
    s = (wave.beta * np.exp(1j * wn.kappa_s * tx))[..., None] * wave.theta_perp
    return p + s


@dataclass(frozen=True, eq=False)
class ScatteringConfig:
    obstacles: Sequence[Obstacle]
    lame: LameParameters
    omega: float
    wave: IncidentWave

    def __post_init__(self):
        object.__setattr__(self, "obstacles", tuple(self.obstacles))

    @property
    def wn(self) -> WaveNumbers:
        return self.lame.wavenumbers(self.omega)

    @property
    def centers(self) -> np.ndarray:
        return np.array([ob.center for ob in self.obstacles]).reshape(-1, 3)

    @property
    def M(self) -> int:
        return len(self.obstacles)


@dataclass(frozen=True, eq=False)
class FoldyLaxSystem:
    matrix: np.ndarray
    rhs: np.ndarray
    centers: np.ndarray
    capacitances: tuple  # physical (scaled) capacitance matrices


@dataclass(frozen=True, eq=False)
class ChargeSet:
    charges: np.ndarray  # (M, 3) complex
    residual: float = 0.0
    condition: float = float("nan")

    @property
    def norm_sum(self) -> float:
        return float(np.sum(np.linalg.norm(self.charges, axis=1)))


@dataclass(frozen=True, eq=False)
class FarFieldPattern:
    directions: np.ndarray  # (K, 3)
    up: np.ndarray  # (K, 3) complex
    us: np.ndarray  # (K, 3) complex

    def polarization_defect(self) -> tuple[float, float]:
        """Largest ``|x x U_p|`` and ``|x . U_s|`` over the sampled directions."""
        p = np.linalg.norm(np.cross(self.directions, self.up), axis=1).max(initial=0.0)
        s = np.abs(np.einsum("ki,ki->k", self.directions, self.us)).max(initial=0.0)
        return float(p), float(s)


def assemble(config: ScatteringConfig, caps: Sequence[CapacitanceMatrix]) -> FoldyLaxSystem:
    """Block matrix ``B`` (diag ``-C_m^{-1}``, off-diag ``-Gamma(z_m, z_j)``) and ``U^I``.

    ``caps`` are reference-shape capacitances; each is scaled by its
    obstacle's ``scale`` before inversion.
    """
    M = config.M
    if M == 0:
        raise ConfigError("no obstacles")
    if len(caps) != M:
        raise ConfigError(f"expected {M} capacitances, got {len(caps)}")
    z = config.centers
    wn = config.wn
    B = np.zeros((3 * M, 3 * M), dtype=complex)
    view = B.reshape(M, 3, M, 3)
    physical = []
    for m, (ob, cap) in enumerate(zip(config.obstacles, caps)):
        c = cap.scaled(ob.scale).matrix
        try:
            inv = np.linalg.inv(c)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"capacitance of obstacle {m} is singular") from exc
        if not np.all(np.isfinite(inv)) or np.linalg.cond(c) > 1e12:
            raise NumericalError(f"capacitance of obstacle {m} is singular")
        view[m, :, m, :] = -inv
        physical.append(c)
    if M > 1:
        iu, ju = np.triu_indices(M, k=1)
        if np.any(np.all(z[iu] == z[ju], axis=1)):
            raise ConfigError("two obstacles share the same center")
        g = kupradze_tensor(z[iu], z[ju], wn, config.lame)
        view[iu, :, ju, :] = -g
        view[ju, :, iu, :] = -np.swapaxes(g, -1, -2)
    rhs = incident_field(config.wave, z, wn).reshape(-1)
    return FoldyLaxSystem(B, rhs, z, tuple(physical))


def solve_charges(system: FoldyLaxSystem, report=None) -> ChargeSet:
    try:
        q, cond = solve_checked(system.matrix, system.rhs, what="Foldy-Lax system")
    except NumericalError as exc:
        raise InvertibilityError(str(exc), exc.condition, report) from exc
    scale = np.linalg.norm(system.rhs)
    residual = np.linalg.norm(system.matrix @ q - system.rhs)
    residual = residual / scale if scale > 0.0 else residual
    if residual > RESIDUAL_TOL:
        raise InvertibilityError(f"residual {residual:.2e} above {RESIDUAL_TOL:.0e}", cond, report)
    return ChargeSet(q.reshape(-1, 3), float(residual), cond)


def farfield(charges, centers, directions, wn: WaveNumbers, lame: LameParameters) -> FarFieldPattern:
    """Far-field pattern of point charges ``Q_m`` located at ``centers``."""
    q = charges.charges if isinstance(charges, ChargeSet) else np.asarray(charges)
    x = np.atleast_2d(np.asarray(directions, dtype=float))
    if x.shape[-1] != 3 or not np.allclose(np.linalg.norm(x, axis=1), 1.0, rtol=0.0, atol=1e-10):
        raise DomainError("far-field directions must be unit vectors")
    z = np.asarray(centers, dtype=float).reshape(-1, 3)
    proj = x @ z.T
    sum_p = np.exp(-1j * wn.kappa_p * proj) @ q
    sum_s = np.exp(-1j * wn.kappa_s * proj) @ q
    return project_farfield(x, sum_p, sum_s, lame)


def project_farfield(directions, sum_p, sum_s, lame: LameParameters) -> FarFieldPattern:
    """Apply the P (radial) and S (tangential) projectors to phase-weighted sums."""
    x = directions
    radial_p = np.einsum("ki,ki->k", x, sum_p)
    up = radial_p[:, None] * x / (4.0 * math.pi * lame.c_p**2)
    radial_s = np.einsum("ki,ki->k", x, sum_s)
    us = (sum_s - radial_s[:, None] * x) / (4.0 * math.pi * lame.c_s**2)
    return FarFieldPattern(x, up, us)


@dataclass(frozen=True)
class ValidityReport:
    N_omega: int
    t: float
    sqrtM1_a_over_d: float
    t_positive: bool
    footnote_small_domain: bool
    a: float = float("nan")
    d: float = float("nan")
    diam_omega: float = float("nan")


def _series_factor(q: float, n: int) -> float:
    geometric = float(n) if q == 1.0 else (1.0 - q**n) / (1.0 - q)
    return geometric + 1.0 / 2.0 ** (n - 1)


def n_omega(diam_omega: float, wn: WaveNumbers) -> int:
    return max(1, int(math.floor(2.0 * diam_omega * wn.kappa_max * _E2)))


def validity_report(stats: GeometryStats, wn: WaveNumbers, lame: LameParameters) -> ValidityReport:
    """Computable ingredients of the invertibility and validity conditions."""
    cp, cs, w, diam = lame.c_p, lame.c_s, wn.omega, stats.diam_omega
    inv_p2 = 1.0 / (lame.lam + 2.0 * lame.mu)  # 1 / c_p^2 without the square-root round trip
    if w == 0.0:
        n, t = 1, inv_p2
    else:
        n = n_omega(diam, wn)
        gs = _series_factor(0.5 * wn.kappa_s * diam, n)
        gp = _series_factor(0.5 * wn.kappa_p * diam, n)
        t = inv_p2 - 2.0 * diam * (w / cs**3) * gs - diam * (w / cp**3) * gp
    if stats.M > 1 and math.isfinite(stats.d):
        ratio = math.sqrt(stats.M - 1) * stats.a / stats.d
    else:
        ratio = 0.0
    footnote = w == 0.0 or diam < (cs / w) * min(1.0 / _E2, cs**2 / (6.0 * cp**2))
    return ValidityReport(n, t, ratio, t > 0.0, footnote, stats.a, stats.d, diam)


@dataclass(frozen=True)
class SolvabilityResult:
    holds: bool
    lhs: float
    rhs: float
    bound: float | None = None
    eigen_bound: float | None = None


def solvability_check(caps, stats: GeometryStats, report: ValidityReport, lame: LameParameters,
                      incident=None) -> SolvabilityResult:
    """Sufficient invertibility condition stated through acoustic capacitances.

    ``caps`` are physical (already scaled) capacitances.  With ``incident``
    (the values ``U^i(z_m)``) and a true hypothesis, two bounds on
    ``sum_m |Q_m|`` are returned: ``bound`` is the compact closed form,
    ``eigen_bound`` keeps the ``(lambda + 2 mu)^2 / mu`` factor that the
    eigenvalue bounds actually produce.
    """
    if not report.t_positive:
        raise ConditionInapplicableError(f"t = {report.t:.3e} is not positive")
    ca = np.array([c.acoustic for c in caps], dtype=float)
    cmax, cmin = float(ca.max()), float(ca.min())
    lp2 = lame.lam + 2.0 * lame.mu
    t, d, M = report.t, stats.d, len(ca)
    if M == 1 or not math.isfinite(d):
        lhs, rhs, defect = lp2**2 * cmax**2, math.inf, 0.0
    else:
        lhs = lp2**2 * cmax**2
        rhs = (5.0 * math.pi / 3.0) * lame.mu * d * cmin / t
        defect = (3.0 * t / (5.0 * math.pi)) * (lp2**2 / lame.mu) * cmax**2 / (d * cmin)
    holds = bool(lhs < rhs)
    if not holds or incident is None:
        return SolvabilityResult(holds, lhs, rhs)
    u_max = float(np.max(np.linalg.norm(np.asarray(incident).reshape(-1, 3), axis=1)))
    bound = 2.0 / (1.0 - defect) * (cmax / cmin) * M * cmax * u_max
    return SolvabilityResult(holds, lhs, rhs, bound, bound * lp2**2 / lame.mu)


@dataclass(frozen=True)
class ErrorBudget:
    base_terms: dict
    regime_terms: dict
    total: float
    regime_total: float
    exponents: dict = field(default_factory=dict)
    dominant_exponent: float | None = None


def error_budget(stats: GeometryStats, t_exp=None, s_exp=None, alpha=0.25) -> ErrorBudget:
    """Remainder monomials with unit constants (rate predictors only).

    ``t_exp`` and ``s_exp`` describe the regime ``d = a**t_exp``,
    ``M = a**(-s_exp)`` and yield the exponent of each monomial in ``a``.
    """
    if not 0.0 < alpha <= 1.0:
        raise DomainError(f"alpha must lie in (0, 1], got {alpha}")
    M, a, d = stats.M, stats.a, stats.d
    m1 = M - 1
    if m1 == 0:
        d = math.inf if not math.isfinite(d) else d
    inv_d = 0.0 if not math.isfinite(d) else 1.0 / d
    base = {
        "M a^2": M * a**2,
        "M(M-1) a^3/d^2": M * m1 * a**3 * inv_d**2,
        "M(M-1)^2 a^4/d^3": M * m1**2 * a**4 * inv_d**3,
    }
    # single-body contributions with a negative power of d need another body
    single = 1.0 if m1 > 0 else 0.0
    regime = {
        "M a^2": M * a**2,
        "M a^3/d^(5-3al)": single * M * a**3 * inv_d ** (5 - 3 * alpha),
        "M a^4/d^(9-6al)": single * M * a**4 * inv_d ** (9 - 6 * alpha),
        "M(M-1) a^3/d^(2al)": M * m1 * a**3 * inv_d ** (2 * alpha),
        "M(M-1) a^4/d^(4-al)": M * m1 * a**4 * inv_d ** (4 - alpha),
        "M(M-1) a^4/d^(5-2al)": M * m1 * a**4 * inv_d ** (5 - 2 * alpha),
        "M(M-1)^2 a^4/d^(3al)": M * m1**2 * a**4 * inv_d ** (3 * alpha),
    }
    exponents, dominant = {}, None
    if t_exp is not None and s_exp is not None:
        t, s, al = float(t_exp), float(s_exp), alpha
        exponents = {
            "a^(2-s)": 2 - s,
            "a^(3-s-5t+3t al)": 3 - s - 5 * t + 3 * t * al,
            "a^(4-s-9t+6t al)": 4 - s - 9 * t + 6 * t * al,
            "a^(3-2s-2t al)": 3 - 2 * s - 2 * t * al,
            "a^(4-3s-3t al)": 4 - 3 * s - 3 * t * al,
            "a^(4-2s-5t+2t al)": 4 - 2 * s - 5 * t + 2 * t * al,
        }
        dominant = min(exponents.values())
    return ErrorBudget(
        base, regime, float(sum(base.values())), float(sum(regime.values())),
        exponents, dominant,
    )
