import numpy as np
import pytest


def low_rank(rng, nx, ny, rank, scale=1.0):
    """Sum of ``rank`` random separable terms."""
    U = rng.standard_normal((nx, rank))
    V = rng.standard_normal((rank, ny))
    return scale * U @ V


def penrose_oracle(A, P):
    """The four Penrose residuals, written out independently of the library.

    Each is a max-abs entry scaled by the natural size of the identity:
    sigma_max(A) for (i), max|P| for (ii) and 1 for the projector
    symmetries (iii) and (iv).
    """
    smax = np.linalg.svd(A, compute_uv=False).max() if A.size else 0.0
    pmax = np.abs(P).max() if P.size else 0.0
    r1 = np.abs(A @ P @ A - A).max() / smax if smax else 0.0
    r2 = np.abs(P @ A @ P - P).max() / pmax if pmax else 0.0
    AP, PA = A @ P, P @ A
    return r1, r2, np.abs(AP.T - AP).max(), np.abs(PA.T - PA).max()


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture
def say(capsys):
    """Print a line straight to the terminal, bypassing capture."""

    def _say(line):
        with capsys.disabled():
            print(line)

    return _say
