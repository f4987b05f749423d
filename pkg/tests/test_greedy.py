import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eimkit import GreedyConfig, NormSpec, SnapshotMatrix, build, residual_matrix, select_next
from eimkit.errors import DimensionError, NumericalBreakdown
from eimkit.harness import paper_snapshots, training_sets

from .conftest import low_rank

VARIANTS = ["linf-joint", "y-norm-first", "x-norm-first"]


def brute_residual(A, model):
    # cell by cell, straight from the double sum
    R = np.array(A, dtype=float)
    for i in range(R.shape[0]):
        for j in range(R.shape[1]):
            s = 0.0
            for l, xl in enumerate(model.x_idx):
                for m, ym in enumerate(model.y_idx):
                    s += model.D[l, m] * A[xl, j] * A[i, ym]
            R[i, j] -= s
    return R


def test_residual_of_empty_model_is_a(rng):
    A = rng.standard_normal((4, 5))
    np.testing.assert_array_equal(residual_matrix(A), A)


def test_residual_matches_double_sum(rng):
    A = rng.standard_normal((9, 7))
    m = build(A, GreedyConfig(4))
    np.testing.assert_allclose(residual_matrix(A, m), brute_residual(A, m), rtol=0, atol=1e-13)


def test_residual_vanishes_on_selected_columns(rng):
    A = rng.standard_normal((20, 15))
    m = build(A, GreedyConfig(6))
    R = residual_matrix(A, m)
    assert np.abs(R[:, list(m.y_idx)]).max() <= 1e-10 * np.abs(A).max()
    assert np.abs(R[list(m.x_idx), :]).max() <= 1e-10 * np.abs(A).max()


def test_rank_one_after_one_step(rng):
    u, v = rng.standard_normal(11), rng.standard_normal(6)
    A = np.outer(u, v)
    m = build(A, GreedyConfig(1))
    i, j = m.x_idx[0], m.y_idx[0]
    assert m.D[0, 0] == pytest.approx(1.0 / A[i, j], rel=1e-15)
    assert np.abs(residual_matrix(A, m)).max() <= 1e-12 * np.abs(A).max()


@pytest.mark.parametrize("variant", VARIANTS)
def test_select_unique_max(variant):
    assert select_next(np.array([[0.0, 0.0], [0.0, 5.0]]), NormSpec(variant)) == (1, 1, 5.0)


def test_select_y_norm_first_l2():
    R = np.array([[3.0, -4.0], [2.0, 1.0]])
    # row norms 5 and sqrt(5); largest entry of row 0 is |-4| at column 1
    assert select_next(R, NormSpec("y-norm-first", "l2")) == (0, 1, 4.0)


def test_select_x_norm_first_l2():
    R = np.array([[3.0, -4.0], [2.0, 1.0]])
    # column norms sqrt(13) and sqrt(17); largest entry of column 1 is row 0
    assert select_next(R, NormSpec("x-norm-first", "l2")) == (0, 1, 4.0)


def test_select_tie_break_smallest_row():
    R = np.array([[0.0, 2.0], [-2.0, 0.0]])
    assert select_next(R, NormSpec("linf-joint")) == (0, 1, 2.0)
    assert select_next(R, NormSpec("y-norm-first")) == (0, 1, 2.0)
    assert select_next(R, NormSpec("x-norm-first")) == (1, 0, 2.0)


def test_select_weighted_identity_equals_l2(rng):
    R = rng.standard_normal((8, 5))
    assert select_next(R, NormSpec("y-norm-first", "weighted", np.eye(5))) == select_next(
        R, NormSpec("y-norm-first", "l2")
    )
    assert select_next(R, NormSpec("x-norm-first", "weighted", np.eye(8))) == select_next(
        R, NormSpec("x-norm-first", "l2")
    )


def test_weighted_goal_oriented_selection():
    # the weight row integrates only the last two columns, so the row with
    # the largest contribution there wins even though its sup is smaller
    R = np.array([[10.0, 0.0, 0.0], [0.0, 1.0, 2.0]])
    W = np.array([[0.0, 1.0, 1.0]])
    assert select_next(R, NormSpec("y-norm-first", "weighted", W)) == (1, 2, 2.0)
    assert select_next(R, NormSpec("y-norm-first", "linf")) == (0, 0, 10.0)


def test_build_exact_rank_three(rng):
    A = low_rank(rng, 40, 30, 3)
    m = build(A, GreedyConfig(10, tol_abs=1e-10))
    assert m.d == 3
    assert np.abs(residual_matrix(A, m)).max() <= 1e-10 * np.abs(A).max()


def test_build_rank_one_positive(rng):
    A = np.outer(rng.uniform(0.5, 2, 9), rng.uniform(0.5, 2, 7))
    m = build(A, GreedyConfig(5))
    i, j = np.unravel_index(np.argmax(np.abs(A)), A.shape)
    assert m.d == 1 and m.x_idx == (i,) and m.y_idx == (j,)


def test_build_zero_matrix_gives_empty_model():
    m = build(np.zeros((3, 4)), GreedyConfig(2))
    assert m.d == 0


def test_paper_grid_rank_eight():
    xs, ys = training_sets()
    A = paper_snapshots(xs, ys)
    m = build(A, GreedyConfig(8, norm=NormSpec("linf-joint")))
    assert m.d == 8
    assert len(set(m.x_idx)) == 8 and len(set(m.y_idx)) == 8
    p = np.array(m.trace.residuals)
    assert np.all(p > 0)
    # the first pivots can grow (the residual may exceed max|A|), the tail decays fast
    assert np.all(np.diff(p[2:]) < 0)
    assert p[-1] < 1e-6 * p[0]


def test_d_max_too_large():
    with pytest.raises(DimensionError):
        build(np.ones((3, 5)), GreedyConfig(4))


def test_weights_must_fit_grid(rng):
    A = rng.standard_normal((6, 4))
    with pytest.raises(DimensionError):
        build(A, GreedyConfig(2, norm=NormSpec("y-norm-first", "weighted", np.ones((2, 6)))))


def test_config_validation():
    with pytest.raises(ValueError):
        GreedyConfig(0)
    with pytest.raises(ValueError):
        GreedyConfig(2, tol_abs=-1.0)


def test_breakdown_is_loud():
    # exact rank 2 with a zero tolerance: the third pivot is pure round-off
    rng = np.random.default_rng(1)
    A = (rng.standard_normal((12, 2)) * 0.1) @ (rng.standard_normal((2, 9)) * 0.3)
    with pytest.raises(NumericalBreakdown) as exc:
        build(A, GreedyConfig(5, tol_abs=0.0))
    assert exc.value.step == 2
    assert 0 < exc.value.pivot < 1e-14


@pytest.mark.parametrize("variant", VARIANTS)
@pytest.mark.parametrize("seed", range(5))
def test_nesting(variant, seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((25, 18))
    norm = NormSpec(variant, "l2" if variant != "linf-joint" else "linf")
    big = build(A, GreedyConfig(7, norm=norm))
    for k in range(1, 7):
        small = build(A, GreedyConfig(k, norm=norm))
        assert small.x_idx == big.x_idx[:k] and small.y_idx == big.y_idx[:k]


@pytest.mark.parametrize("seed", range(8))
def test_linf_pivot_values_agree_across_variants(seed):
    rng = np.random.default_rng(seed)
    A = SnapshotMatrix(rng.standard_normal((30, 22)))
    traces = [build(A, GreedyConfig(10, norm=NormSpec(v, "linf"))).trace.residuals for v in VARIANTS]
    assert traces[0] == traces[1] == traces[2]


@settings(max_examples=40, deadline=None)
@given(
    nx=st.integers(2, 30),
    ny=st.integers(2, 30),
    rank=st.integers(1, 6),
    seed=st.integers(0, 2**32 - 1),
    variant=st.sampled_from(VARIANTS),
    inner=st.sampled_from(["linf", "l2"]),
)
def test_exact_recovery_property(nx, ny, rank, seed, variant, inner):
    rank = min(rank, nx, ny)
    rng = np.random.default_rng(seed)
    A = low_rank(rng, nx, ny, rank)
    scale = np.abs(A).max()
    m = build(A, GreedyConfig(min(nx, ny), tol_abs=1e-10 * scale, norm=NormSpec(variant, inner)))
    assert m.d == rank
    assert np.abs(residual_matrix(A, m)).max() <= 1e-9 * scale
    assert len(set(m.x_idx)) == m.d and len(set(m.y_idx)) == m.d
    assert all(r > 0 for r in m.trace.residuals)


def test_selection_residual_matches_symmetric_form(rng):
    # the loop carries the residual by rank-one updates; it must agree with
    # values - I_k(f) evaluated from D
    from eimkit.greedy import greedy_select

    A = rng.standard_normal((30, 24))
    for k in range(1, 9):
        x_idx, y_idx, F, D, _ = greedy_select(A, GreedyConfig(k))
        R = A.copy()
        for i, j in zip(x_idx, y_idx):
            R = R - np.outer(R[:, j], R[i, :]) / R[i, j]
        m = build(A, GreedyConfig(k))
        assert np.abs(R - residual_matrix(A, m)).max() <= 1e-12 * np.abs(A).max()


def test_smooth_kernel_runs_to_tolerance():
    # singular values decay to round-off; selection must stop on the
    # tolerance, never by reselecting a point
    t = np.linspace(0, 1, 80)
    A = np.exp(-np.subtract.outer(t, t) ** 2 * 3.0)
    m = build(A, GreedyConfig(40))
    assert 5 < m.d < 40
    assert len(set(m.x_idx)) == m.d and len(set(m.y_idx)) == m.d
