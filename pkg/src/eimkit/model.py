"""Shared domain types, snapshot ingestion and model (de)serialization.

The candidate sets discretizing the two variables are plain ordered point
lists; a point is identified by its index, coordinates are metadata only.
All containers are frozen and their arrays are read-only.
"""

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, NonFiniteError, ParseError

CSV_CORNER = "x\\y"
JSON_VERSION = 1

NORM_VARIANTS = ("linf-joint", "y-norm-first", "x-norm-first")
INNER_NORMS = ("linf", "l2", "weighted")


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


def _values(A):
    """Dense values of a SnapshotMatrix, or of anything array-like."""
    return np.asarray(getattr(A, "values", A), dtype=float)


@dataclass(frozen=True)
class SampleSet:
    label: str
    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float, copy=True)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise DimensionError(
                f"sample set {self.label!r} needs at least one point of dimension >= 1"
            )
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def size(self):
        return self.points.shape[0]

    @property
    def dim(self):
        return self.points.shape[1]

    @classmethod
    def indices(cls, label, n):
        """Sample set whose coordinates are just the indices 0..n-1."""
        return cls(label, np.arange(n, dtype=float))


@dataclass(frozen=True)
class SnapshotMatrix:
    """Values of f tabulated on the candidate grid, ``values[i, j] = f(x_i, y_j)``."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float, copy=True)
        if v.ndim != 2 or 0 in v.shape:
            raise DimensionError(f"snapshot matrix must be a non-empty 2-D table, got shape {v.shape}")
        bad = np.argwhere(~np.isfinite(v))
        if len(bad):
            i, j = bad[0]
            raise NonFiniteError(f"non-finite value {v[i, j]} at row {i}, column {j}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def nx(self):
        return self.values.shape[0]

    @property
    def ny(self):
        return self.values.shape[1]

    @property
    def max_abs(self):
        return float(np.max(np.abs(self.values)))


@dataclass(frozen=True)
class NormSpec:
    """How the greedy step measures residual rows or columns.

    ``variant`` picks the selection order: ``y-norm-first`` ranks rows by
    the norm of the residual over the y candidates and then takes the
    largest entry of the winning row; ``x-norm-first`` is the same with
    rows and columns exchanged; ``linf-joint`` takes the largest residual
    entry over the whole grid. ``inner`` is the norm used to rank rows or
    columns. ``weighted`` uses ``||W r||_2`` where ``W`` has one row per
    output quantity and one column per candidate the norm runs over.
    """

    variant: str = "linf-joint"
    inner: str = "linf"
    weights: np.ndarray | None = None

    def __post_init__(self):
        if self.variant not in NORM_VARIANTS:
            raise ValueError(f"unknown norm variant {self.variant!r}; expected one of {NORM_VARIANTS}")
        if self.inner not in INNER_NORMS:
            raise ValueError(f"unknown inner norm {self.inner!r}; expected one of {INNER_NORMS}")
        if self.inner == "weighted":
            if self.variant == "linf-joint":
                raise ValueError("weighted inner norm has no meaning for linf-joint selection")
            if self.weights is None:
                raise ValueError("weighted inner norm requires a weight matrix")
            w = _frozen(self.weights)
            if w.ndim == 1:
                w = _frozen(w[None, :])
            if w.ndim != 2 or not np.all(np.isfinite(w)):
                raise ValueError("weights must be a finite 2-D matrix")
            object.__setattr__(self, "weights", w)
        elif self.weights is not None:
            raise ValueError("weights are only accepted with inner norm 'weighted'")

    def check_grid(self, nx, ny):
        """Raise if the weight matrix does not fit an ``nx`` by ``ny`` grid."""
        if self.inner != "weighted":
            return
        n = ny if self.variant == "y-norm-first" else nx
        if self.weights.shape[1] != n:
            raise DimensionError(
                f"weight matrix has {self.weights.shape[1]} columns, "
                f"the {self.variant} norm runs over {n} candidates"
            )

    def to_dict(self):
        return {
            "variant": self.variant,
            "innerNorm": self.inner,
            "weights": None if self.weights is None else self.weights.tolist(),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(d["variant"], d["innerNorm"], d.get("weights"))


@dataclass(frozen=True)
class GreedyTrace:
    residuals: tuple = ()
    norm: NormSpec = field(default_factory=NormSpec)
    condition_estimates: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "residuals", tuple(float(r) for r in self.residuals))
        object.__setattr__(self, "condition_estimates", tuple(float(c) for c in self.condition_estimates))


@dataclass(frozen=True)
class SeparatedModel:
    """Square model ``I_d(f)(x, y) = sum_{l,m} D[l, m] f(x_l, y) f(x, y_m)``."""

    x_idx: tuple
    y_idx: tuple
    F: np.ndarray
    D: np.ndarray
    trace: GreedyTrace = field(default_factory=GreedyTrace)

    kind = "square"

    def __post_init__(self):
        _check_pair(self, square=True)

    @property
    def d(self):
        return len(self.x_idx)


@dataclass(frozen=True)
class RectangularModel:
    """Model left over after discarding some selected couples on one side.

    ``x_idx`` and ``y_idx`` are the kept rows and columns, ``F`` is the
    ``len(x_idx)`` by ``len(y_idx)`` block of the snapshots and ``D`` is
    the pseudo-inverse of ``F.T``. ``side`` tells which points were dropped
    and ``dropped`` holds their positions in the parent's selection order.
    """

    x_idx: tuple
    y_idx: tuple
    F: np.ndarray
    D: np.ndarray
    parent: SeparatedModel
    side: str = "y"
    dropped: tuple = ()
    cutoff_rel: float = 1e-12
    effective_rank: int = 0

    kind = "rectangular"

    def __post_init__(self):
        if self.side not in ("x", "y"):
            raise ValueError(f"side must be 'x' or 'y', got {self.side!r}")
        object.__setattr__(self, "dropped", tuple(sorted(int(p) for p in self.dropped)))
        _check_pair(self, square=False)


@dataclass(frozen=True)
class GeimModel:
    """Generalized model ``I(f) = sum_{l,m} D[l, m] sigma_l(f) f_m``.

    ``Fhat[l, m] = sigma_l(f_m)`` with ``l`` running over the selected forms
    and ``m`` over the selected functions. ``functions`` holds the selected
    library vectors, one per row, so reconstruction needs no library.
    Rectangular models (after a sensor discard) keep every function and
    only the surviving forms; ``parent_form_idx`` then lists the forms of
    the square model they came from.
    """

    form_idx: tuple
    func_idx: tuple
    Fhat: np.ndarray
    D: np.ndarray
    functions: np.ndarray
    trace: GreedyTrace = field(default_factory=GreedyTrace)
    parent_form_idx: tuple | None = None
    cutoff_rel: float | None = None

    kind = "geim"

    def __post_init__(self):
        object.__setattr__(self, "form_idx", tuple(int(i) for i in self.form_idx))
        object.__setattr__(self, "func_idx", tuple(int(i) for i in self.func_idx))
        if self.parent_form_idx is not None:
            object.__setattr__(self, "parent_form_idx", tuple(int(i) for i in self.parent_form_idx))
        shape = (len(self.form_idx), len(self.func_idx))
        for name in ("Fhat", "D"):
            a = _frozen(getattr(self, name)).reshape(shape)
            object.__setattr__(self, name, a)
        fn = _frozen(self.functions)
        if fn.ndim != 2 or fn.shape[0] != len(self.func_idx):
            raise DimensionError(f"expected {len(self.func_idx)} function vectors, got shape {fn.shape}")
        object.__setattr__(self, "functions", fn)

    @property
    def d(self):
        return len(self.func_idx)

    @property
    def rectangular(self):
        return self.parent_form_idx is not None


def _check_pair(model, square):
    xi = tuple(int(i) for i in model.x_idx)
    yi = tuple(int(j) for j in model.y_idx)
    object.__setattr__(model, "x_idx", xi)
    object.__setattr__(model, "y_idx", yi)
    if len(set(xi)) != len(xi) or len(set(yi)) != len(yi):
        raise ValueError("selected indices must be pairwise distinct on each side")
    if square and len(xi) != len(yi):
        raise DimensionError(f"square model needs as many x as y points ({len(xi)} != {len(yi)})")
    shape = (len(xi), len(yi))
    for name in ("F", "D"):
        a = _frozen(getattr(model, name))
        if a.size == 0:
            a = _frozen(np.zeros(shape))
        if a.shape != shape:
            raise DimensionError(f"{name} has shape {a.shape}, expected {shape}")
        object.__setattr__(model, name, a)


# ---------------------------------------------------------------- CSV input


def _parse_label(text, where):
    try:
        coords = [float(c) for c in text.split(";")]
    except ValueError:
        raise ParseError(f"{where}: cannot parse coordinate label {text!r}") from None
    if not coords or not all(math.isfinite(c) for c in coords):
        raise ParseError(f"{where}: non-finite coordinate in label {text!r}")
    return coords


def ingest_snapshots(source):
    """Read a snapshot table from a CSV stream.

    ``source`` may be a binary or text stream, raw bytes, or a path. The
    first row is the corner cell ``x\\y`` followed by one label per y
    candidate; every other row is an x label followed by the values.
    Labels are coordinates joined by ``;``.

    Returns ``(xs, ys, A)``.
    """
    if isinstance(source, (bytes, bytearray)):
        text = io.StringIO(bytes(source).decode("utf-8"))
    elif isinstance(source, str):
        with open(source, encoding="utf-8", newline="") as fh:
            return ingest_snapshots(io.StringIO(fh.read()))
    else:
        data = source.read()
        if isinstance(data, bytes):
            data = data.decode("utf-8")
        text = io.StringIO(data)

    rows = [r for r in csv.reader(text) if r and any(c.strip() for c in r)]
    if not rows:
        raise ParseError("empty snapshot file")
    header = [c.strip() for c in rows[0]]
    if header[0].replace("\\\\", "\\") != CSV_CORNER:
        raise ParseError(f"row 1: expected corner cell {CSV_CORNER!r}, got {header[0]!r}")
    ny = len(header) - 1
    if ny < 1:
        raise ParseError("row 1: header has no y labels")
    y_pts = [_parse_label(c, f"row 1, column {k + 2}") for k, c in enumerate(header[1:])]

    x_pts, values = [], []
    for r, row in enumerate(rows[1:], start=2):
        if len(row) != ny + 1:
            raise DimensionError(f"row {r}: expected {ny + 1} cells, got {len(row)}")
        x_pts.append(_parse_label(row[0].strip(), f"row {r}, column 1"))
        vals = []
        for c, cell in enumerate(row[1:], start=2):
            try:
                v = float(cell)
            except ValueError:
                raise ParseError(f"row {r}, column {c}: cannot parse {cell!r}") from None
            if not math.isfinite(v):
                raise NonFiniteError(f"row {r}, column {c}: non-finite value {cell.strip()!r}")
            vals.append(v)
        values.append(vals)
    if not values:
        raise ParseError("snapshot file has a header but no data rows")

    for name, pts in (("X", x_pts), ("Y", y_pts)):
        if len({len(p) for p in pts}) != 1:
            raise DimensionError(f"{name} labels do not share one coordinate dimension")
    return SampleSet("X", x_pts), SampleSet("Y", y_pts), SnapshotMatrix(values)


def _label(point):
    return ";".join(repr(float(c)) for c in point)


def write_snapshots(xs, ys, A, stream):
    """Write a snapshot table in the format read by :func:`ingest_snapshots`."""
    values = _values(A)
    if values.shape != (xs.size, ys.size):
        raise DimensionError(f"matrix shape {values.shape} does not match sample sets ({xs.size}, {ys.size})")
    w = csv.writer(stream, lineterminator="\n")
    w.writerow([CSV_CORNER] + [_label(p) for p in ys.points])
    for p, row in zip(xs.points, values):
        w.writerow([_label(p)] + [repr(float(v)) for v in row])


def read_matrix_csv(path):
    """Headerless numeric CSV (dictionaries, libraries, weights)."""
    try:
        a = np.loadtxt(path, delimiter=",", ndmin=2)
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from None
    bad = np.argwhere(~np.isfinite(a))
    if len(bad):
        i, j = bad[0]
        raise NonFiniteError(f"{path}: non-finite value at row {i + 1}, column {j + 1}")
    return a


# ------------------------------------------------------------ serialization


def _trace_dict(trace):
    return {
        "residuals": list(trace.residuals),
        "norm": trace.norm.to_dict(),
        "conditionEstimates": list(trace.condition_estimates),
    }


def _trace_from(d):
    if d is None:
        return GreedyTrace()
    return GreedyTrace(d["residuals"], NormSpec.from_dict(d["norm"]), d.get("conditionEstimates", ()))


def _matrix(rows, shape):
    return np.array(rows, dtype=float).reshape(shape)


def model_to_dict(model):
    if isinstance(model, SeparatedModel):
        return {
            "version": JSON_VERSION,
            "kind": "square",
            "xIdx": list(model.x_idx),
            "yIdx": list(model.y_idx),
            "F": model.F.tolist(),
            "D": model.D.tolist(),
            "trace": _trace_dict(model.trace),
        }
    if isinstance(model, RectangularModel):
        return {
            "version": JSON_VERSION,
            "kind": "rectangular",
            "side": model.side,
            "dropped": list(model.dropped),
            "cutoffRel": model.cutoff_rel,
            "effectiveRank": model.effective_rank,
            "xIdx": list(model.x_idx),
            "yIdx": list(model.y_idx),
            "F": model.F.tolist(),
            "D": model.D.tolist(),
            "trace": _trace_dict(model.parent.trace),
            "parent": model_to_dict(model.parent),
        }
    if isinstance(model, GeimModel):
        return {
            "version": JSON_VERSION,
            "kind": "geim",
            "formIdx": list(model.form_idx),
            "funcIdx": list(model.func_idx),
            "parentFormIdx": None if model.parent_form_idx is None else list(model.parent_form_idx),
            "cutoffRel": model.cutoff_rel,
            "F": model.Fhat.tolist(),
            "D": model.D.tolist(),
            "functions": model.functions.tolist(),
            "trace": _trace_dict(model.trace),
        }
    raise TypeError(f"cannot serialize {type(model).__name__}")


def model_from_dict(d):
    if d.get("version") != JSON_VERSION:
        raise ParseError(f"unsupported model version {d.get('version')!r}")
    kind = d.get("kind")
    if kind == "square":
        n = len(d["xIdx"])
        return SeparatedModel(
            d["xIdx"], d["yIdx"], _matrix(d["F"], (n, n)), _matrix(d["D"], (n, n)), _trace_from(d.get("trace"))
        )
    if kind == "rectangular":
        shape = (len(d["xIdx"]), len(d["yIdx"]))
        return RectangularModel(
            d["xIdx"],
            d["yIdx"],
            _matrix(d["F"], shape),
            _matrix(d["D"], shape),
            parent=model_from_dict(d["parent"]),
            side=d["side"],
            dropped=d["dropped"],
            cutoff_rel=d["cutoffRel"],
            effective_rank=d["effectiveRank"],
        )
    if kind == "geim":
        shape = (len(d["formIdx"]), len(d["funcIdx"]))
        return GeimModel(
            d["formIdx"],
            d["funcIdx"],
            _matrix(d["F"], shape),
            _matrix(d["D"], shape),
            np.array(d["functions"], dtype=float).reshape(len(d["funcIdx"]), -1),
            _trace_from(d.get("trace")),
            parent_form_idx=d.get("parentFormIdx"),
            cutoff_rel=d.get("cutoffRel"),
        )
    raise ParseError(f"unknown model kind {kind!r}")


def serialize_model(model):
    """JSON bytes for a model.

    Floats are written with Python's shortest round-trip representation, so
    reading the bytes back reproduces every matrix entry bit for bit.
    """
    return (json.dumps(model_to_dict(model), indent=1) + "\n").encode("utf-8")


def deserialize_model(data):
    if isinstance(data, (bytes, bytearray)):
        data = data.decode("utf-8")
    try:
        d = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid model JSON: {exc}") from None
    return model_from_dict(d)
