"""Pair-discard study on f(x, y) = cos((v . x) y), v = (1, 2, 3).

A rank-8 model is built greedily on a training grid over (0,1)^3 x (0,1).
For every pair of selected couples two reduced models are compared on
random evaluation points:

* square: the 6 surviving couples, ``D = F6^{-T}``;
* rectangular: the 6 surviving points on the discarded side together with
  all 8 points on the other side, ``D = pinv(F.T)``.

The training set depends only on ``train_seed``; ``seed`` drives the
evaluation sample.
"""

import csv
import io
import itertools
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import BuildFailure
from .evaluation import coupled
from .greedy import GreedyConfig, build, restrict
from .linalg import DEFAULT_CUTOFF_REL
from .model import NormSpec, SampleSet, SnapshotMatrix
from .rectangular import discard

V = np.array([1.0, 2.0, 3.0])

DEFAULT_TRAIN_NX = 2000
DEFAULT_TRAIN_NY = 200
DEFAULT_TRAIN_SEED = 0
DEFAULT_N_EVAL = 1000
DEFAULT_RANK = 8


def paper_function(x, y):
    """``cos((v . x) y)``; broadcasts over leading dimensions of ``x`` and ``y``."""
    x = np.asarray(x, dtype=float)
    return np.cos((x @ V) * np.asarray(y, dtype=float))


def paper_snapshots(xs, ys):
    return SnapshotMatrix(np.cos(np.outer(xs.points @ V, ys.points[:, 0])))


def training_sets(train_nx=DEFAULT_TRAIN_NX, train_ny=DEFAULT_TRAIN_NY, train_seed=DEFAULT_TRAIN_SEED):
    """Seeded uniform x candidates in (0,1)^3 and cell-centred y candidates in (0,1)."""
    rng = np.random.default_rng(train_seed)
    xs = SampleSet("X", rng.uniform(size=(train_nx, 3)))
    ys = SampleSet("Y", (np.arange(train_ny) + 0.5) / train_ny)
    return xs, ys


def _stats(errors):
    e = np.array(list(errors.values()))
    return {"max": float(e.max()), "min": float(e.min()), "mean": float(e.mean())}


@dataclass
class ExperimentReport:
    pair_errors_square: dict
    pair_errors_rect: dict
    seed: int
    n_eval: int
    config: dict = field(default_factory=dict)

    @property
    def stats(self):
        return {"square": _stats(self.pair_errors_square), "rectangular": _stats(self.pair_errors_rect)}

    @property
    def pairs(self):
        return list(self.pair_errors_square)

    def to_dict(self):
        key = lambda p: f"{p[0]},{p[1]}"  # noqa: E731
        return {
            "seed": self.seed,
            "nEval": self.n_eval,
            "config": self.config,
            "stats": self.stats,
            "pairErrorsSquare": {key(p): e for p, e in self.pair_errors_square.items()},
            "pairErrorsRect": {key(p): e for p, e in self.pair_errors_rect.items()},
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=1) + "\n"

    def to_table(self):
        lines = [f"{'pair':>6}  {'square':>12}  {'rectangular':>12}  {'ratio':>8}"]
        for p in self.pairs:
            sq, rc = self.pair_errors_square[p], self.pair_errors_rect[p]
            lines.append(f"{p[0]:>3},{p[1]:<2}  {sq:12.3e}  {rc:12.3e}  {sq / rc:8.2f}")
        lines.append("")
        lines.append(f"{'':>11}  {'max':>10}  {'min':>10}  {'mean':>10}")
        for name, s in self.stats.items():
            lines.append(f"{name:>11}  {s['max']:10.2e}  {s['min']:10.2e}  {s['mean']:10.2e}")
        return "\n".join(lines) + "\n"

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["i", "j", "square", "rectangular"])
        for p in self.pairs:
            w.writerow([p[0], p[1], repr(self.pair_errors_square[p]), repr(self.pair_errors_rect[p])])
        return buf.getvalue()


def _relative_l2(exact, approx):
    return float(np.linalg.norm(exact - approx) / np.linalg.norm(exact))


def _off_grid(model, xs, ys, x_eval, y_eval):
    xl = xs.points[list(model.x_idx)]
    ym = ys.points[list(model.y_idx), 0]
    f_xl_y = np.cos(np.outer(y_eval, xl @ V))
    f_x_ym = np.cos(np.outer(x_eval @ V, ym))
    return np.einsum("nm,mn->n", f_x_ym, coupled(model, f_xl_y.T))


def run_paper_experiment(
    train_nx=DEFAULT_TRAIN_NX,
    train_ny=DEFAULT_TRAIN_NY,
    n_eval=DEFAULT_N_EVAL,
    seed=0,
    train_seed=DEFAULT_TRAIN_SEED,
    rank=DEFAULT_RANK,
    side="x",
    cutoff_rel=DEFAULT_CUTOFF_REL,
    threads=1,
):
    """Run the pair-discard comparison and collect relative l2 errors.

    ``side`` selects which points of a discarded pair are dropped by the
    rectangular method; ``"x"`` keeps all ``rank`` y points.
    """
    xs, ys = training_sets(train_nx, train_ny, train_seed)
    A = paper_snapshots(xs, ys)
    if rank > min(train_nx, train_ny):
        raise BuildFailure(f"rank {rank} exceeds the {train_nx} x {train_ny} training grid")
    model = build(A, GreedyConfig(rank, norm=NormSpec("linf-joint")))
    if model.d < rank:
        raise BuildFailure(f"greedy stopped at d={model.d} < {rank} on a {train_nx} x {train_ny} grid")

    rng = np.random.default_rng(seed)
    x_eval = rng.uniform(size=(n_eval, 3))
    y_eval = rng.uniform(size=n_eval)
    exact = paper_function(x_eval, y_eval)

    def study(pair):
        kept = [k for k in range(rank) if k not in pair]
        square = restrict(model, A, kept)
        rect = discard(model, pair, A, cutoff_rel=cutoff_rel, side=side)
        return (
            _relative_l2(exact, _off_grid(square, xs, ys, x_eval, y_eval)),
            _relative_l2(exact, _off_grid(rect, xs, ys, x_eval, y_eval)),
        )

    pairs = list(itertools.combinations(range(rank), 2))
    with ThreadPoolExecutor(max_workers=max(1, int(threads))) as pool:
        results = list(pool.map(study, pairs))

    config = {
        "trainNx": train_nx,
        "trainNy": train_ny,
        "trainSeed": train_seed,
        "rank": rank,
        "side": side,
        "cutoffRel": cutoff_rel,
        "norm": "linf-joint",
        "xIdx": list(model.x_idx),
        "yIdx": list(model.y_idx),
        "pivots": list(model.trace.residuals),
    }
    return ExperimentReport(
        {p: r[0] for p, r in zip(pairs, results)},
        {p: r[1] for p, r in zip(pairs, results)},
        seed=seed,
        n_eval=n_eval,
        config=config,
    )
