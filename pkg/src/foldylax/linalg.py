"""Dense LU solves with a condition-number guard."""

from __future__ import annotations

import warnings

import numpy as np
import scipy.linalg
from scipy.linalg import lapack

from .errors import NumericalError

MAX_CONDITION = 1e12


def solve_checked(matrix, rhs, max_condition=MAX_CONDITION, what="system", overwrite=False):
    """Solve ``matrix @ x = rhs`` by LU with partial pivoting.

    Returns ``(x, condition)`` where ``condition`` is LAPACK's 1-norm
    estimate.  Raises :class:`NumericalError` above ``max_condition``.
    """
    a = np.asarray(matrix)
    anorm = np.linalg.norm(a, 1)
    with warnings.catch_warnings():
        warnings.simplefilter("error", scipy.linalg.LinAlgWarning)
        try:
            lu, piv = scipy.linalg.lu_factor(a, overwrite_a=overwrite, check_finite=False)
        except (scipy.linalg.LinAlgWarning, np.linalg.LinAlgError, ValueError) as exc:
            raise NumericalError(f"{what}: LU factorisation broke down ({exc})", np.inf) from exc
    gecon = lapack.zgecon if np.iscomplexobj(lu) else lapack.dgecon
    rcond, info = gecon(lu, anorm, norm="1")
    condition = np.inf if rcond <= 0.0 else 1.0 / rcond
    if info != 0 or not np.isfinite(condition) or condition > max_condition:
        raise NumericalError(
            f"{what}: condition estimate {condition:.3e} exceeds {max_condition:.1e}", condition
        )
    x = scipy.linalg.lu_solve((lu, piv), rhs, check_finite=False)
    if not np.all(np.isfinite(x)):
        raise NumericalError(f"{what}: non-finite solution", condition)
    return x, float(condition)
