"""Generalized interpolation over a dictionary of linear forms.

Functions live on a fixed grid of ``G`` nodes; a linear form is a weight
vector ``w`` with ``sigma(f) = w @ f``. The greedy stage only ever sees the
measurement table ``M[p, s] = sigma_s(f_p)``, so it runs the same selection
as the point-evaluation case, with functions in the role of x and forms in
the role of y.
"""

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import AllDropped, DimensionError, NumericalBreakdown, SingularMatrix
from .greedy import greedy_select
from .linalg import DEFAULT_CUTOFF_REL, condition_estimate, inverse_transpose, pseudo_inverse
from .model import GeimModel, GreedyTrace, _frozen


@dataclass(frozen=True)
class LinearFormDictionary:
    weights: np.ndarray

    def __post_init__(self):
        w = _frozen(self.weights)
        if w.ndim != 2 or 0 in w.shape:
            raise DimensionError(f"dictionary must be a non-empty S x G matrix, got shape {w.shape}")
        if not np.all(np.isfinite(w)):
            raise ValueError("dictionary weights must be finite")
        object.__setattr__(self, "weights", w)

    @property
    def size(self):
        return self.weights.shape[0]

    @property
    def grid_size(self):
        return self.weights.shape[1]

    @property
    def point_eval(self):
        """Mask of forms that evaluate at a single node (one weight, equal to 1)."""
        nz = self.weights != 0.0
        return (nz.sum(axis=1) == 1) & (self.weights.max(axis=1) == 1.0)

    @classmethod
    def point_evaluations(cls, grid_size, nodes=None):
        nodes = range(grid_size) if nodes is None else nodes
        w = np.zeros((len(nodes), grid_size))
        w[np.arange(len(nodes)), list(nodes)] = 1.0
        return cls(w)

    def measure(self, functions):
        """``M[p, s] = sigma_s(f_p)`` for functions stored one per row."""
        functions = np.asarray(functions, dtype=float)
        if functions.shape[-1] != self.grid_size:
            raise DimensionError(
                f"functions have {functions.shape[-1]} grid values, dictionary expects {self.grid_size}"
            )
        return functions @ self.weights.T


def geim_build(library, dictionary, cfg):
    """Greedy selection of (function, form) couples.

    With ``y-norm-first`` the next function maximizes the norm of its
    residual measurements over the whole dictionary, then the form with
    the largest residual measurement of that function is taken. The other
    variants mirror their point-evaluation meaning on the measurement
    table.
    """
    library = np.asarray(library, dtype=float)
    if library.ndim != 2:
        raise DimensionError(f"library must be a P x G matrix, got shape {library.shape}")
    if not np.all(np.isfinite(library)):
        raise ValueError("library values must be finite")
    M = dictionary.measure(library)
    P, S = M.shape
    if cfg.d_max > min(P, S):
        raise DimensionError(f"d_max={cfg.d_max} exceeds min(P, S)={min(P, S)}")
    cfg.norm.check_grid(P, S)
    func_idx, form_idx, _, _, trace = greedy_select(M, cfg)
    Fhat = M[np.ix_(func_idx, form_idx)].T
    try:
        D = inverse_transpose(Fhat)
    except SingularMatrix:
        step = len(func_idx) - 1
        raise NumericalBreakdown(step, trace.residuals[-1], condition_estimate(Fhat)) from None
    return GeimModel(form_idx, func_idx, Fhat, D, library[func_idx], trace)


def geim_reconstruct(model, measurements):
    """``sum_{l,m} D[l, m] measurements[l] f_m`` as a grid vector.

    ``measurements`` holds ``sigma_l(f)`` for the forms of ``model`` in
    their stored order; a 2-D array reconstructs one function per row.
    """
    meas = np.asarray(measurements, dtype=float)
    n = len(model.form_idx)
    if meas.shape[-1] != n:
        raise DimensionError(f"expected {n} measurements, got {meas.shape[-1]}")
    if model.rectangular or n == 0:
        return (meas @ model.D) @ model.functions
    # meas @ Fhat^{-T}, solved rather than multiplied by the stored inverse
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        coef = scipy.linalg.lu_solve(scipy.linalg.lu_factor(model.Fhat), meas.T).T
    return coef @ model.functions


def geim_discard(model, dropped, cutoff_rel=DEFAULT_CUTOFF_REL):
    """Drop failed forms (by position) while keeping every selected function."""
    if model.rectangular:
        raise ValueError("discard expects a square model")
    dropped = {int(p) for p in dropped}
    d = model.d
    if any(p < 0 or p >= d for p in dropped):
        raise IndexError(f"dropped positions {sorted(dropped)} out of range for d={d}")
    if len(dropped) >= d:
        raise AllDropped(f"cannot drop all {d} selected forms")
    kept = [p for p in range(d) if p not in dropped]
    Fhat = model.Fhat[kept, :]
    p = pseudo_inverse(Fhat.T, cutoff_rel)
    return GeimModel(
        [model.form_idx[k] for k in kept],
        model.func_idx,
        Fhat,
        p.pinv,
        model.functions,
        GreedyTrace((), model.trace.norm, ()),
        parent_form_idx=model.form_idx,
        cutoff_rel=cutoff_rel,
    )
