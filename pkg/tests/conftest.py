"""Shared fixtures and independent oracles.

The oracles deliberately avoid the package's own contraction kernels: dense
arrays are contracted through ``np.einsum`` and derivatives come from
central finite differences, so agreement is evidence rather than tautology.
"""
import string

import numpy as np
import pytest

import specrad as sr

# ---------------------------------------------------------------------------
# dense oracles
# ---------------------------------------------------------------------------

def dense_from_coo(t: sr.CooTensor) -> np.ndarray:
    a = np.zeros(t.dims)
    np.add.at(a, tuple(t.indices.T), t.values)
    return a


def oracle_multilinear(dense: np.ndarray, zs) -> float:
    letters = string.ascii_lowercase[: dense.ndim]
    spec = letters + "," + ",".join(letters) + "->"
    return float(np.einsum(spec, dense, *zs))


def oracle_grad(dense: np.ndarray, mode: int, zs) -> np.ndarray:
    letters = string.ascii_lowercase[: dense.ndim]
    keep = [q for q in range(dense.ndim) if q != mode]
    spec = (
        letters
        + ","
        + ",".join(letters[q] for q in keep)
        + "->"
        + letters[mode]
    )
    return np.einsum(spec, dense, *[zs[q] for q in keep])


def fd_jacobian(f, x0: np.ndarray, h: float = 1e-6) -> np.ndarray:
    """Central finite-difference Jacobian of a vector map of a flat vector."""
    x0 = np.asarray(x0, dtype=float)
    cols = []
    for j in range(x0.size):
        e = np.zeros_like(x0)
        e[j] = h
        cols.append((np.asarray(f(x0 + e)) - np.asarray(f(x0 - e))) / (2 * h))
    return np.stack(cols, axis=-1)


def fd_grad(f, x0: np.ndarray, h: float = 1e-6) -> np.ndarray:
    x0 = np.asarray(x0, dtype=float)
    out = np.zeros_like(x0)
    for j in range(x0.size):
        e = np.zeros_like(x0)
        e[j] = h
        out[j] = (f(x0 + e) - f(x0 - e)) / (2 * h)
    return out


def rel_err(approx, exact) -> float:
    approx = np.asarray(approx, dtype=float)
    exact = np.asarray(exact, dtype=float)
    scale = max(1e-30, float(np.abs(exact).max()))
    return float(np.abs(approx - exact).max()) / scale


def bv(prob, flat) -> sr.BlockVector:
    return sr.BlockVector.from_flat(flat, prob.partition.block_dims)


def random_positive(prob, rng, lo=0.2, hi=2.0) -> sr.BlockVector:
    flat = rng.uniform(lo, hi, prob.partition.total_dim)
    return bv(prob, flat)


# ---------------------------------------------------------------------------
# standard problems
# ---------------------------------------------------------------------------

BLOCKS_ONE = [[0, 1, 2]]
BLOCKS_TWO = [[0], [1, 2]]
BLOCKS_THREE = [[0], [1], [2]]

#: The nine benchmark configurations with reference eigenvalues.
NINE_CONFIGS = [
    (BLOCKS_ONE, ("3",), 1.748),
    (BLOCKS_ONE, ("4",), 2.277),
    (BLOCKS_ONE, ("5",), 2.663),
    (BLOCKS_TWO, ("2", "4"), 1.414),
    (BLOCKS_TWO, ("3", "5"), 2.167),
    (BLOCKS_TWO, ("4", "6"), 2.581),
    (BLOCKS_THREE, ("3", "3", "3"), 2.045),
    (BLOCKS_THREE, ("4", "4", "4"), 2.469),
    (BLOCKS_THREE, ("5", "5", "5"), 2.817),
]


def config_id(cfg):
    blocks, p, _ = cfg
    return ";".join(",".join(str(q + 1) for q in blk) for blk in blocks) + "|p=" + ",".join(p)


@pytest.fixture(scope="session")
def ref_tensor():
    return sr.reference_tensor()


@pytest.fixture(scope="session")
def all_ones_cube():
    """All-ones 2x2x2 tensor."""
    idx = [(i, j, k) for i in range(2) for j in range(2) for k in range(2)]
    return sr.CooTensor((2, 2, 2), idx, np.ones(8))


@pytest.fixture(scope="session")
def sym_matrix_tensor():
    """The 2x2 matrix [[2,1],[1,2]] as an order-2 tensor."""
    return sr.CooTensor(
        (2, 2), [(0, 0), (0, 1), (1, 0), (1, 1)], [2.0, 1.0, 1.0, 2.0]
    )


@pytest.fixture(params=NINE_CONFIGS, ids=config_id)
def nine_problem(request, ref_tensor):
    blocks, p, lam_ref = request.param
    return sr.make_problem(ref_tensor, blocks, p), lam_ref
