import math
from dataclasses import replace

import numpy as np
import pytest

from foldylax.convergence import (
    fibonacci_directions,
    fit_loglog_slope,
    sweep,
    with_diameter,
    with_distance,
    with_parameter,
)
from foldylax.errors import UsageError
from foldylax.foldy_lax import IncidentWave, ScatteringConfig
from foldylax.geometry import Obstacle
from foldylax.kernels import LameParameters

LAME = LameParameters(1.0, 1.0)


def test_fibonacci_directions():
    d = fibonacci_directions(200)
    np.testing.assert_allclose(np.linalg.norm(d, axis=1), 1.0, rtol=1e-15)
    # near-uniform: mean vanishes and second moment is isotropic
    assert np.abs(d.mean(axis=0)).max() < 1e-2
    np.testing.assert_allclose(d.T @ d / len(d), np.eye(3) / 3, atol=1e-2)
    assert fibonacci_directions(1).shape == (1, 3)
    with pytest.raises(UsageError):
        fibonacci_directions(0)


def test_fit_power_law():
    x = np.array([0.05, 0.025, 0.0125, 0.00625])
    assert fit_loglog_slope(x, 3.0 * x**2) == pytest.approx(2.0)
    assert fit_loglog_slope(x, np.full(4, 0.7)) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(UsageError):
        fit_loglog_slope(x[:2], x[:2])
    with pytest.raises(UsageError):
        fit_loglog_slope([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])
    with pytest.raises(UsageError):
        fit_loglog_slope([1.0, 2.0, 3.0], [1.0, 0.0, 3.0])


def base_config(shape, centers, scale=0.05):
    return ScatteringConfig(
        [Obstacle(c, shape, scale) for c in centers], LAME, 1.0, IncidentWave.along([0, 0, 1.0], 1.0, 1.0)
    )


def test_parameter_transforms(sphere2):
    cfg = base_config(sphere2, [[0, 0, 0], [1, 0, 0], [0, 2, 0]])
    assert max(ob.diameter for ob in with_diameter(cfg, 0.02).obstacles) == pytest.approx(0.02)
    moved = with_distance(cfg, 0.5)
    z = moved.centers
    dist = [np.linalg.norm(z[i] - z[j]) for i in range(3) for j in range(i + 1, 3)]
    assert min(dist) == pytest.approx(0.5 + 0.05)
    np.testing.assert_allclose(z.mean(axis=0), cfg.centers.mean(axis=0))
    assert with_parameter(cfg, "omega", 2.5).omega == 2.5
    with pytest.raises(UsageError):
        with_parameter(cfg, "bogus", 1.0)
    with pytest.raises(UsageError):
        with_distance(base_config(sphere2, [[0, 0, 0]]), 1.0)


def test_sweep_needs_three_values(sphere2, cap2):
    with pytest.raises(UsageError):
        sweep(base_config(sphere2, [[0, 0, 0]]), [cap2], fibonacci_directions(10), "a", [0.1, 0.05])


def test_a_sweep_slope(sphere2, cap2):
    result = sweep(base_config(sphere2, [[0, 0, 0]]), [cap2], fibonacci_directions(50), "a", [0.05, 0.025, 0.0125])
    assert 1.6 <= result.slope <= 2.4


def test_d_sweep_non_increasing(sphere2, cap2):
    # low frequency: the interaction error dominates the single-body a^2 floor
    cfg = replace(base_config(sphere2, [[0, 0, 0], [0.5, 0, 0]], scale=0.1), omega=0.05)
    result = sweep(cfg, [cap2] * 2, fibonacci_directions(50), "d", [0.05, 0.1, 0.2, 0.4])
    errors = [m.max_abs for m in result.metrics]
    assert all(b <= a * (1 + 1e-9) for a, b in zip(errors, errors[1:]))
    assert result.slope <= 0.0


def test_omega_sweep(sphere2, cap2):
    cfg = base_config(sphere2, [[0, 0, 0]])
    result = sweep(cfg, [cap2], fibonacci_directions(20), "omega", [0.5, 1.0, 2.0])
    assert len(result.metrics) == 3 and math.isfinite(result.slope)


def test_d_sweep_plateaus_at_single_body_floor(sphere2, cap2):
    # at larger d the M a^2 term dominates: the error levels off instead of decaying
    cfg = base_config(sphere2, [[0, 0, 0], [0.5, 0, 0]], scale=0.05)
    result = sweep(cfg, [cap2] * 2, fibonacci_directions(50), "d", [0.4, 0.8, 1.6])
    assert abs(result.slope) < 0.2
