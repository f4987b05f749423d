"""Dense kernels: inverse-transpose by pivoted LU, SVD pseudo-inverse, conditioning."""

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import SingularMatrix

DEFAULT_CUTOFF_REL = 1e-12
# Relative size of an LU pivot below which F is declared singular.
PIVOT_RTOL = 1e-14
SINGULAR = math.inf


def inverse_transpose(F, step=None):
    """Return ``D = F^{-T}`` by solving ``F.T @ D = I`` with partial pivoting.

    Parameters
    ----------
    F : (d, d) array_like
    step : int, optional
        Greedy step, only attached to the error for diagnostics.

    Raises
    ------
    SingularMatrix
        If a pivot of the factorization of ``F.T`` is below
        ``PIVOT_RTOL * d * max|F|``.
    """
    F = np.asarray(F, dtype=float)
    if F.ndim != 2 or F.shape[0] != F.shape[1]:
        raise ValueError(f"inverse_transpose needs a square matrix, got shape {F.shape}")
    d = F.shape[0]
    if d == 0:
        return np.zeros((0, 0))
    scale = np.max(np.abs(F))
    if not np.isfinite(scale):
        raise ValueError("matrix has non-finite entries")
    if scale == 0.0:
        raise SingularMatrix("zero matrix", step=step, pivot_index=0)
    with warnings.catch_warnings():
        # exact zero pivots are reported below
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(F.T, check_finite=False)
    pivots = np.abs(np.diag(lu))
    k = int(np.argmin(pivots))
    if pivots[k] <= PIVOT_RTOL * d * scale:
        raise SingularMatrix(
            f"pivot {k} of the LU factorization is {pivots[k]:.3e} (matrix scale {scale:.3e})",
            step=step,
            pivot_index=k,
        )
    return scipy.linalg.lu_solve((lu, piv), np.eye(d), check_finite=False)


@dataclass(frozen=True)
class Pinv:
    source: np.ndarray
    pinv: np.ndarray
    cutoff: float
    effective_rank: int
    singular_values: np.ndarray


def pseudo_inverse(A, cutoff_rel=DEFAULT_CUTOFF_REL):
    """Moore-Penrose pseudo-inverse through the thin SVD.

    Singular values ``s <= cutoff_rel * s_max`` are treated as zero. An
    all-zero (or empty) input gives the zero matrix of transposed shape.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise ValueError(f"pseudo_inverse needs a 2-D matrix, got {A.ndim} dimensions")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    if not 0.0 <= cutoff_rel < 1.0:
        raise ValueError(f"cutoff_rel must lie in [0, 1), got {cutoff_rel}")
    m, n = A.shape
    if A.size == 0:
        return Pinv(A, np.zeros((n, m)), 0.0, 0, np.zeros(0))
    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    cutoff = cutoff_rel * s[0]
    keep = s > cutoff
    r = int(np.count_nonzero(keep))
    # (V_r / s_r) U_r^T
    P = (Vt[:r].T / s[:r]) @ U[:, :r].T
    return Pinv(A, P, float(cutoff), r, s)


def condition_estimate(F):
    """2-norm condition number ``s_max / s_min``; ``SINGULAR`` (inf) if singular."""
    F = np.asarray(F, dtype=float)
    if F.ndim != 2 or F.shape[0] != F.shape[1]:
        raise ValueError(f"condition_estimate needs a square matrix, got shape {F.shape}")
    if F.shape[0] == 0:
        return 1.0
    s = np.linalg.svd(F, compute_uv=False)
    if s[-1] == 0.0 or s[0] / s[-1] > 1.0 / np.finfo(float).eps:
        return SINGULAR
    return float(s[0] / s[-1])


def penrose_residuals(A, P):
    """Residuals of the four Penrose identities, each scaled to be dimensionless.

    (i) ``||A P A - A|| / ||A||``, (ii) ``||P A P - P|| / ||P||``,
    (iii) ``||(A P)^T - A P||``, (iv) ``||(P A)^T - P A||`` (spectral
    norms; the last two are projectors, so already of unit scale).
    """
    A = np.asarray(A, dtype=float)
    P = np.asarray(P, dtype=float)
    na = np.linalg.norm(A, 2) if A.size else 0.0
    npn = np.linalg.norm(P, 2) if P.size else 0.0
    AP = A @ P
    PA = P @ A
    return (
        np.linalg.norm(AP @ A - A, 2) / na if na else 0.0,
        np.linalg.norm(PA @ P - P, 2) / npn if npn else 0.0,
        np.linalg.norm(AP.T - AP, 2) if AP.size else 0.0,
        np.linalg.norm(PA.T - PA, 2) if PA.size else 0.0,
    )
