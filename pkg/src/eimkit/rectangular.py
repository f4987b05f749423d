"""Discarding selected points after the fact, with ``D = pinv(F.T)``.

Dropping y points models failed sensors: every selected x row is kept and
``D`` becomes a ``d x d0`` least-squares coefficient matrix. Dropping x
points is the mirrored construction (keep every selected y column). The
result is an approximation, not an interpolant.
"""

import numpy as np

from .errors import AllDropped
from .evaluation import evaluate_symmetric
from .linalg import DEFAULT_CUTOFF_REL, pseudo_inverse
from .model import RectangularModel, _values


def discard(parent, dropped, A, cutoff_rel=DEFAULT_CUTOFF_REL, side="y"):
    """Drop the couples at ``dropped`` positions on one side of ``parent``.

    Parameters
    ----------
    parent : SeparatedModel
    dropped : iterable of int
        Positions (0-based, in selection order) of the points to discard.
    A : SnapshotMatrix or array_like
    cutoff_rel : float
        Relative singular-value cutoff of the pseudo-inverse.
    side : {"y", "x"}
        Which points to discard.
    """
    dropped = {int(p) for p in dropped}
    d = parent.d
    if any(p < 0 or p >= d for p in dropped):
        raise IndexError(f"dropped positions {sorted(dropped)} out of range for d={d}")
    if len(dropped) >= d:
        raise AllDropped(f"cannot drop all {d} selected {side} points")
    if side not in ("x", "y"):
        raise ValueError(f"side must be 'x' or 'y', got {side!r}")
    kept = [p for p in range(d) if p not in dropped]
    x_idx = list(parent.x_idx)
    y_idx = list(parent.y_idx)
    if side == "y":
        y_idx = [y_idx[p] for p in kept]
    else:
        x_idx = [x_idx[p] for p in kept]
    values = _values(A)
    F = values[np.ix_(x_idx, y_idx)]
    p = pseudo_inverse(F.T, cutoff_rel)
    return RectangularModel(
        x_idx,
        y_idx,
        F,
        p.pinv,
        parent=parent,
        side=side,
        dropped=tuple(sorted(dropped)),
        cutoff_rel=cutoff_rel,
        effective_rank=p.effective_rank,
    )


def evaluate_rectangular(model, A, i, j):
    """``sum_{l,m} D[l, m] A[x_l, j] A[i, y_m]`` over the kept points."""
    return evaluate_symmetric(model, A, i, j)
