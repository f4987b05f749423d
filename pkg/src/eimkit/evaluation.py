"""Evaluation of separated models and the classical (lambda, q, B) form."""

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DegeneratePivot
from .model import RectangularModel, _frozen, _values


def separated_grid(values, x_idx, y_idx, D):
    """``sum_{l,m} D[l, m] A[x_l, j] A[i, y_m]`` for every grid cell (i, j)."""
    x_idx = list(x_idx)
    y_idx = list(y_idx)
    if not x_idx or not y_idx:
        return np.zeros_like(values)
    return values[:, y_idx] @ (D.T @ values[x_idx, :])


def separated_form(D, f_xl_y, f_x_ym):
    """Separated form from tabulated factors at arbitrary sample points.

    ``f_xl_y[n, l] = f(x_l, y_n)`` and ``f_x_ym[n, m] = f(x_n, y_m)`` for
    ``n`` running over evaluation points ``(x_n, y_n)``.
    """
    return np.einsum("nl,lm,nm->n", f_xl_y, D, f_x_ym)


def coupled(model, rhs):
    """``D.T @ rhs`` with one row of ``rhs`` per kept x point.

    For a square model ``D.T = F^{-1}``, so this is a solve against ``F``.
    Multiplying by the stored inverse instead loses about cond(F) * eps
    along the selected rows and columns, which is visible once the greedy
    runs down to pivots near round-off.
    """
    rhs = np.asarray(rhs, dtype=float)
    if isinstance(model, RectangularModel):
        return model.D.T @ rhs
    if len(model.x_idx) == 0:
        return np.zeros((0,) + rhs.shape[1:])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        return scipy.linalg.lu_solve(scipy.linalg.lu_factor(model.F), rhs)


def evaluate_symmetric(model, A, i, j):
    """Value of the model at grid cell ``(i, j)``.

    Works for square and rectangular models alike; both store ``D`` with
    one row per kept x point and one column per kept y point.
    """
    values = _values(A)
    return float(values[i, list(model.y_idx)] @ coupled(model, values[list(model.x_idx), j]))


def approximation(model, A):
    """The model evaluated on the full grid."""
    values = _values(A)
    if len(model.x_idx) == 0 or len(model.y_idx) == 0:
        return np.zeros_like(values)
    return values[:, list(model.y_idx)] @ coupled(model, values[list(model.x_idx), :])


@dataclass(frozen=True)
class ClassicalModel:
    """Classical form ``I_d(f)(x, y) = sum_l lambda_l(x) q_l(y)``.

    ``B[l, m] = q_m(y_l)`` is unit lower triangular and ``lambda(x)``
    solves ``B lambda(x) = (f(x, y_l))_l``.
    """

    x_idx: tuple
    y_idx: tuple
    B: np.ndarray
    q_vals: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "B", _frozen(self.B))
        object.__setattr__(self, "q_vals", _frozen(self.q_vals))

    @property
    def d(self):
        return len(self.x_idx)

    def lambdas(self, A):
        """``lambda_l(x_i)`` for every row ``i``, shape ``(nx, d)``."""
        values = _values(A)
        if self.d == 0:
            return np.zeros((values.shape[0], 0))
        rhs = values[:, list(self.y_idx)].T
        return scipy.linalg.solve_triangular(self.B, rhs, lower=True, unit_diagonal=True).T

    def grid(self, A):
        if self.d == 0:
            return np.zeros_like(_values(A))
        return self.lambdas(A) @ self.q_vals

    def evaluate(self, A, i, j):
        values = _values(A)
        if self.d == 0:
            return 0.0
        rhs = values[i, list(self.y_idx)]
        lam = scipy.linalg.solve_triangular(self.B, rhs, lower=True, unit_diagonal=True)
        return float(lam @ self.q_vals[:, j])


def build_classical(model, A):
    """Classical construction from the couples selected in ``model``.

    Runs the normalized residual recursion: the residual of row ``x_l``
    against the first ``l - 1`` terms is divided by its value at ``y_l``
    to give ``q_l``. Only the selected indices of ``model`` are used, not
    its ``D``, so the result is an independent route to the same
    approximation.
    """
    values = _values(A)
    x_idx, y_idx = list(model.x_idx), list(model.y_idx)
    d = len(x_idx)
    q = np.zeros((d, values.shape[1]))
    B = np.eye(d)
    for l in range(d):
        row = values[x_idx[l], :]
        if l:
            lam = scipy.linalg.solve_triangular(
                B[:l, :l], values[x_idx[l], y_idx[:l]], lower=True, unit_diagonal=True
            )
            row = row - lam @ q[:l]
        pivot = row[y_idx[l]]
        if pivot == 0.0:
            raise DegeneratePivot(f"residual of couple {l} vanishes at its own y point")
        q[l] = row / pivot
        B[l, :l] = q[:l, y_idx[l]]
    return ClassicalModel(tuple(x_idx), tuple(y_idx), B, q)


@dataclass(frozen=True)
class InterpolationReport:
    """Residual of a model along its own rows and columns.

    Values are normalized by ``max|A|``. ``interpolatory`` is False for
    rectangular models, whose rows and columns carry no exactness bound.
    """

    kind: str
    row_violation: float
    column_violation: float
    full_residual: float
    interpolatory: bool

    def within(self, tol):
        return self.row_violation <= tol and self.column_violation <= tol

    def to_dict(self):
        return {
            "kind": self.kind,
            "rowViolation": self.row_violation,
            "columnViolation": self.column_violation,
            "fullResidual": self.full_residual,
            "interpolatory": self.interpolatory,
        }


def interpolation_report(model, A):
    values = _values(A)
    scale = float(np.max(np.abs(values))) or 1.0
    R = values - approximation(model, A)
    rows = np.abs(R[list(model.x_idx), :])
    cols = np.abs(R[:, list(model.y_idx)])
    return InterpolationReport(
        kind=model.kind,
        row_violation=float(rows.max()) / scale if rows.size else 0.0,
        column_violation=float(cols.max()) / scale if cols.size else 0.0,
        full_residual=float(np.max(np.abs(R))) / scale,
        interpolatory=not isinstance(model, RectangularModel),
    )
