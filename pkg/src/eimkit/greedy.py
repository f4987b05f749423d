"""Greedy offline stage: couple selection, incremental F and D, stopping."""

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, NumericalBreakdown, SingularMatrix
from .evaluation import approximation
from .linalg import condition_estimate, inverse_transpose
from .model import GreedyTrace, NormSpec, SeparatedModel, _values

log = logging.getLogger(__name__)

# Default stopping threshold, relative to max|A|.
DEFAULT_TOL_REL = 1e-12


@dataclass(frozen=True)
class GreedyConfig:
    """``tol_abs=None`` means ``DEFAULT_TOL_REL * max|A|``. Ties go to the smallest index."""

    d_max: int
    tol_abs: float | None = None
    norm: NormSpec = field(default_factory=NormSpec)

    def __post_init__(self):
        if int(self.d_max) != self.d_max or self.d_max < 1:
            raise ValueError(f"d_max must be a positive integer, got {self.d_max}")
        if self.tol_abs is not None and not self.tol_abs >= 0:
            raise ValueError(f"tol_abs must be >= 0, got {self.tol_abs}")

    def check(self, nx, ny):
        if self.d_max > min(nx, ny):
            raise DimensionError(f"d_max={self.d_max} exceeds min(nx, ny)={min(nx, ny)}")
        self.norm.check_grid(nx, ny)

    def tolerance(self, values):
        if self.tol_abs is not None:
            return float(self.tol_abs)
        return DEFAULT_TOL_REL * float(np.max(np.abs(values)))


def residual_matrix(A, model=None):
    """``R = A - I_k(f)`` on the grid; ``R = A`` for ``model=None`` (``I_0 = 0``)."""
    values = _values(A)
    if model is None or model.d == 0:
        return values.copy()
    return values - approximation(model, values)


def _line_norms(R, norm, axis):
    # norms of the rows (axis=1) or columns (axis=0) of R
    if norm.inner == "linf":
        return np.max(np.abs(R), axis=axis)
    if norm.inner == "l2":
        return np.sqrt(np.sum(R * R, axis=axis))
    W = norm.weights
    WR = R @ W.T if axis == 1 else W @ R
    return np.sqrt(np.sum(WR * WR, axis=axis))


def select_next(R, norm):
    """Pick the next couple ``(i, j, pivot)`` from the residual matrix.

    ``np.argmax`` returns the first maximum, so ties resolve to the smallest
    index; for ``linf-joint`` the row-major scan prefers the smaller row,
    then the smaller column.
    """
    R = np.asarray(R, dtype=float)
    absR = np.abs(R)
    if norm.variant == "linf-joint":
        i, j = np.unravel_index(int(np.argmax(absR)), absR.shape)
    elif norm.variant == "y-norm-first":
        i = int(np.argmax(_line_norms(R, norm, axis=1)))
        j = int(np.argmax(absR[i]))
    else:
        j = int(np.argmax(_line_norms(R, norm, axis=0)))
        i = int(np.argmax(absR[:, j]))
    return int(i), int(j), float(absR[i, j])


def greedy_select(values, cfg):
    """Core loop shared with the generalized variant.

    Returns ``(x_idx, y_idx, F, D, trace)``.
    """
    values = np.asarray(values, dtype=float)
    tol = cfg.tolerance(values)
    x_idx, y_idx = [], []
    F = D = np.zeros((0, 0))
    pivots, conds = [], []
    R = values.copy()
    for step in range(cfg.d_max):
        i, j, pivot = select_next(R, cfg.norm)
        if pivot <= tol:
            log.debug("stop at d=%d: pivot %.3e <= tol %.3e", step, pivot, tol)
            break
        xs, ys = x_idx + [i], y_idx + [j]
        F_next = values[np.ix_(xs, ys)]
        try:
            D_next = inverse_transpose(F_next, step=step)
        except SingularMatrix:
            raise NumericalBreakdown(step, pivot, condition_estimate(F_next)) from None
        x_idx, y_idx, F, D = xs, ys, F_next, D_next
        pivots.append(pivot)
        conds.append(condition_estimate(F))
        log.debug("step %d: couple (%d, %d), pivot %.3e, cond %.3e", step, i, j, pivot, conds[-1])
        # Rank-one Schur update: equal to values - I_k(f) in exact arithmetic,
        # but free of the cond(F) amplification carried by D.
        R = R - np.outer(R[:, j], R[i, :] / R[i, j])
    return x_idx, y_idx, F, D, GreedyTrace(pivots, cfg.norm, conds)


def build(A, cfg):
    """Run the greedy procedure on a snapshot matrix and return the square model.

    Stops after ``cfg.d_max`` couples or as soon as the pivot residual is at
    most the tolerance, in which case the residual is below tolerance on
    the whole grid.
    """
    values = _values(A)
    cfg.check(*values.shape)
    x_idx, y_idx, F, D, trace = greedy_select(values, cfg)
    return SeparatedModel(x_idx, y_idx, F, D, trace)


def restrict(model, A, positions):
    """Square model on a subset of the selected couples, order preserved."""
    values = _values(A)
    positions = sorted(positions)
    x_idx = [model.x_idx[p] for p in positions]
    y_idx = [model.y_idx[p] for p in positions]
    F = values[np.ix_(x_idx, y_idx)]
    return SeparatedModel(x_idx, y_idx, F, inverse_transpose(F), GreedyTrace((), model.trace.norm, ()))
