"""Analytic maps for the block-spectral eigenproblem.

A :class:`SpectralProblem` bundles a nonnegative tensor, a shape partition of
its modes, and one norm exponent ``p_i > 1`` per block.  A positive
eigenpair ``(lam, x)`` satisfies, blockwise,

    gradient_map(x)_i = lam * x_i**(p_i - 1),   |x_i|_{p_i} = 1,

and the spectral radius is the largest such ``lam``.  This module provides
the componentwise ratio map whose max/min give Collatz-Wielandt bounds, the
product-of-norms constraint and its gradient, the bordered Newton system of
the solver, the retraction onto the constraint set, the power-iteration
update map, the block homogeneity matrix with its weighting data, and
log-domain versions of the ratio map used by convexity checks.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import NonPositiveInput, OverflowGuard, ZeroNormBlock
from .linalg import dominant_eigpair
from .tensor_core import (
    BlockVector,
    CooTensor,
    ShapePartition,
    conform,
    gradient_map,
    gradient_map_jacobian,
    validate_partition,
)

__all__ = [
    "SpectralProblem",
    "HomogeneityData",
    "CwReport",
    "make_problem",
    "ratio_map",
    "ratio_max",
    "ratio_min",
    "ratio_jacobian",
    "norm_product",
    "norm_product_grad",
    "normalize_blocks",
    "eigen_residual",
    "eigen_system",
    "residual_jacobian",
    "newton_matrix",
    "retract",
    "power_map",
    "homogeneity_data",
    "cw_bounds",
    "log_ratio_map",
    "log_ratio_jacobian",
    "log_norm_product",
    "log_norm_product_grad",
]

#: Components below this floor are skipped by the min-clause of the weighted
#: Collatz-Wielandt lower bound.  Vacuous for the strictly positive iterates
#: the solvers produce; it only matters for hand-built near-boundary points.
POSITIVITY_FLOOR = 1e-300


@dataclass(frozen=True)
class SpectralProblem:
    """A tensor, a shape partition of its modes, and norm exponents per block.

    ``p_exact`` optionally carries the exponents as exact rationals; when
    present, the regime classifier decides the knife-edge test
    ``sum(nu_i / p_i) == 1`` by exact arithmetic instead of a tolerance.
    """

    tensor: CooTensor
    partition: ShapePartition
    p: tuple[float, ...]
    p_exact: tuple[Fraction, ...] | None = None

    def __post_init__(self) -> None:
        part = self.partition
        if len(self.p) != part.d:
            raise ValueError(
                f"need one exponent per block ({part.d}), got {len(self.p)}"
            )
        if any(not math.isfinite(pi) or pi <= 1.0 for pi in self.p):
            raise ValueError(f"every exponent must satisfy p_i > 1, got {self.p}")
        for s, n in zip(part.starts, part.block_dims):
            if self.tensor.dims[s] != n:
                raise ValueError("partition does not match tensor dimensions")
        if self.p_exact is not None:
            if len(self.p_exact) != part.d:
                raise ValueError("p_exact must have one entry per block")
            for pf, pe in zip(self.p, self.p_exact):
                if abs(pf - float(pe)) > 1e-12 * max(1.0, abs(pf)):
                    raise ValueError("p_exact inconsistent with p")

    @property
    def d(self) -> int:
        return self.partition.d

    @property
    def p_conj(self) -> tuple[float, ...]:
        """Hoelder conjugates ``p_i / (p_i - 1)``."""
        return tuple(pi / (pi - 1.0) for pi in self.p)

    @property
    def nu_over_p(self) -> float:
        return float(sum(nu / pi for nu, pi in zip(self.partition.nu, self.p)))

    def ones(self) -> BlockVector:
        """All-ones block vector conforming to the partition."""
        return BlockVector([np.ones(n) for n in self.partition.block_dims])


def make_problem(tensor: CooTensor, blocks, p) -> SpectralProblem:
    """Build a :class:`SpectralProblem`, keeping exact-rational exponents when
    every entry of ``p`` is an int, a string like ``"7/3"``, or a Fraction."""
    part = validate_partition(tensor.dims, blocks)
    floats: list[float] = []
    exact: list[Fraction] = []
    all_exact = True
    for v in p:
        if isinstance(v, bool):
            raise ValueError("boolean is not a valid exponent")
        if isinstance(v, (int, Fraction)):
            fr = Fraction(v)
        elif isinstance(v, str):
            fr = Fraction(v)
        else:
            fr = None
        if fr is None:
            floats.append(float(v))
            all_exact = False
        else:
            floats.append(float(fr))
            exact.append(fr)
    return SpectralProblem(
        tensor=tensor,
        partition=part,
        p=tuple(floats),
        p_exact=tuple(exact) if all_exact else None,
    )


def require_positive(x: BlockVector) -> None:
    """Raise unless every component of ``x`` is strictly positive."""
    if not np.all(x.flat > 0.0):
        raise NonPositiveInput("vector must be strictly positive componentwise")


# --------------------------------------------------------------------------
# ratio map and friends
# --------------------------------------------------------------------------

def ratio_map(prob: SpectralProblem, x: BlockVector) -> BlockVector:
    """Componentwise Collatz-Wielandt ratios: block ``i`` is
    ``gradient_map(x)_i / x_i**(p_i - 1)``.  Requires ``x > 0``."""
    conform(prob.partition, x)
    require_positive(x)
    G = gradient_map(prob, x)
    return BlockVector(
        [G.block(i) / x.block(i) ** (prob.p[i] - 1.0) for i in range(prob.d)]
    )


def ratio_max(prob: SpectralProblem, x: BlockVector) -> float:
    """Largest componentwise ratio (upper Collatz-Wielandt value)."""
    return float(ratio_map(prob, x).flat.max())


def ratio_min(prob: SpectralProblem, x: BlockVector) -> float:
    """Smallest componentwise ratio (lower Collatz-Wielandt value)."""
    return float(ratio_map(prob, x).flat.min())


def ratio_jacobian(prob: SpectralProblem, x: BlockVector) -> np.ndarray:
    """Dense Jacobian of :func:`ratio_map` at ``x > 0``.

    Row-scales the gradient-map Jacobian by ``x**(1-p)`` and subtracts the
    diagonal term ``(p_i - 1) * G_i(x) * x_i**(-p_i)``.
    """
    conform(prob.partition, x)
    require_positive(x)
    G = gradient_map(prob, x)
    DG = gradient_map_jacobian(prob, x)
    rowscale = np.concatenate(
        [x.block(i) ** (1.0 - prob.p[i]) for i in range(prob.d)]
    )
    DPhi = DG * rowscale[:, None]
    diag_term = np.concatenate(
        [
            (prob.p[i] - 1.0) * G.block(i) * x.block(i) ** (-prob.p[i])
            for i in range(prob.d)
        ]
    )
    DPhi[np.diag_indices_from(DPhi)] -= diag_term
    return DPhi


# --------------------------------------------------------------------------
# constraint surface
# --------------------------------------------------------------------------

def _block_norms(prob: SpectralProblem, x: BlockVector) -> np.ndarray:
    return np.array(
        [
            (np.abs(x.block(i)) ** prob.p[i]).sum() ** (1.0 / prob.p[i])
            for i in range(prob.d)
        ]
    )


def norm_product(prob: SpectralProblem, x: BlockVector) -> float:
    """Product of the blockwise p-norms (the normalization constraint)."""
    conform(prob.partition, x)
    return float(_block_norms(prob, x).prod())


def norm_product_grad(prob: SpectralProblem, x: BlockVector) -> BlockVector:
    """Gradient of :func:`norm_product` at ``x > 0``."""
    conform(prob.partition, x)
    require_positive(x)
    norms = _block_norms(prob, x)
    c = float(norms.prod())
    return BlockVector(
        [
            c * norms[i] ** (-prob.p[i]) * x.block(i) ** (prob.p[i] - 1.0)
            for i in range(prob.d)
        ]
    )


def normalize_blocks(prob: SpectralProblem, x: BlockVector) -> BlockVector:
    """Scale each block to unit p-norm."""
    conform(prob.partition, x)
    norms = _block_norms(prob, x)
    if np.any(norms == 0.0):
        raise ZeroNormBlock("cannot normalize a block with zero norm")
    return BlockVector([x.block(i) / norms[i] for i in range(prob.d)])


def retract(prob: SpectralProblem, x: BlockVector) -> BlockVector:
    """Rescale ``x`` by a single scalar onto the surface ``norm_product == 1``."""
    conform(prob.partition, x)
    c = norm_product(prob, x)
    if c == 0.0:
        raise ZeroNormBlock("retraction undefined when a block has zero norm")
    return BlockVector.from_flat(x.flat / c ** (1.0 / prob.d), x.lengths)


# --------------------------------------------------------------------------
# bordered Newton system
# --------------------------------------------------------------------------

def eigen_residual(prob: SpectralProblem, x: BlockVector, lam: float) -> BlockVector:
    """Residual ``lam * x - ratio_map(x) * x`` (zero exactly at eigenpairs)."""
    phi = ratio_map(prob, x)
    return BlockVector.from_flat(lam * x.flat - phi.flat * x.flat, x.lengths)


def eigen_system(prob: SpectralProblem, x: BlockVector, lam: float) -> np.ndarray:
    """Stacked root function: the eigen residual over the constraint defect."""
    r = eigen_residual(prob, x, lam)
    return np.concatenate([r.flat, [norm_product(prob, x) - 1.0]])


def residual_jacobian(prob: SpectralProblem, x: BlockVector, lam: float) -> np.ndarray:
    """Jacobian of the eigen residual in ``x`` at fixed ``lam``:
    ``-diag(x) @ ratio_jacobian(x) - diag(ratio_map(x)) + lam * I``."""
    phi = ratio_map(prob, x)
    DPhi = ratio_jacobian(prob, x)
    J = -(x.flat[:, None] * DPhi)
    J[np.diag_indices_from(J)] += lam - phi.flat
    return J


def newton_matrix(prob: SpectralProblem, x: BlockVector, lam: float) -> np.ndarray:
    """Bordered ``(n+1) x (n+1)`` matrix: residual Jacobian, the direction
    ``x`` in the last column, and the constraint gradient in the last row."""
    J = residual_jacobian(prob, x, lam)
    gc = norm_product_grad(prob, x)
    n = J.shape[0]
    DH = np.zeros((n + 1, n + 1))
    DH[:n, :n] = J
    DH[:n, n] = x.flat
    DH[n, :n] = gc.flat
    return DH


# --------------------------------------------------------------------------
# power-iteration update map and homogeneity weights
# --------------------------------------------------------------------------

def power_map(prob: SpectralProblem, x: BlockVector) -> BlockVector:
    """Blockwise update map of the power iteration:
    ``gradient_map(x)_i ** (p'_i - 1)`` with ``p'`` the Hoelder conjugate.
    Defined for ``x >= 0``."""
    conform(prob.partition, x)
    G = gradient_map(prob, x)
    pc = prob.p_conj
    return BlockVector(
        [G.block(i) ** (pc[i] - 1.0) for i in range(prob.d)]
    )


@dataclass(frozen=True)
class HomogeneityData:
    """Block homogeneity matrix of the power map and derived weights.

    ``A = diag(p' - 1) @ (ones nu^T - I)`` is nonnegative and irreducible;
    ``b`` is its positive left Perron vector normalized to sum one, ``rho``
    the Perron root, and ``gamma = S/(S-1)`` with ``S = sum(b_i * p'_i)``.
    """

    A: np.ndarray
    rho: float
    b: np.ndarray
    gamma: float


def homogeneity_data(prob: SpectralProblem) -> HomogeneityData:
    nu = np.asarray(prob.partition.nu, dtype=np.float64)
    pc = np.asarray(prob.p_conj)
    d = prob.d
    A = (pc - 1.0)[:, None] * (np.ones((d, d)) * nu[None, :] - np.eye(d))
    rho, b = dominant_eigpair(A.T)
    S = float(b @ pc)
    gamma = S / (S - 1.0)
    A = A.copy()
    A.setflags(write=False)
    b.setflags(write=False)
    return HomogeneityData(A=A, rho=rho, b=b, gamma=gamma)


@dataclass(frozen=True)
class CwReport:
    """Collatz-Wielandt bounds at one positive point (blockwise normalized).

    ``lower``/``upper`` are the plain min/max ratios; the weighted pair are
    geometric means of blockwise extremes of the power-map ratios with
    exponents ``(gamma - 1) * b_i``, and always lie inside the plain pair.
    """

    lower: float
    upper: float
    weighted_lower: float
    weighted_upper: float


def cw_bounds(prob: SpectralProblem, x: BlockVector) -> CwReport:
    """Certified bounds bracketing the spectral radius, evaluated at the
    blockwise normalization of ``x > 0``."""
    require_positive(x)
    xbar = normalize_blocks(prob, x)
    phi = ratio_map(prob, xbar)
    lower = float(phi.flat.min())
    upper = float(phi.flat.max())
    hd = homogeneity_data(prob)
    w = (hd.gamma - 1.0) * hd.b
    F = power_map(prob, xbar)
    log_lo = 0.0
    log_hi = 0.0
    for i in range(prob.d):
        xi = xbar.block(i)
        ratios = F.block(i) / xi
        keep = xi > POSITIVITY_FLOOR
        log_lo += w[i] * math.log(ratios[keep].min())
        log_hi += w[i] * math.log(ratios.max())
    return CwReport(
        lower=lower,
        upper=upper,
        weighted_lower=math.exp(log_lo),
        weighted_upper=math.exp(log_hi),
    )


# --------------------------------------------------------------------------
# log-domain maps (used by the convexity and homogeneity checks)
# --------------------------------------------------------------------------

def _guard_exponents(prob: SpectralProblem, y: BlockVector, guard: float) -> None:
    for i in range(prob.d):
        worst = np.abs(y.block(i)).max(initial=0.0) * max(1.0, prob.p[i])
        if worst > guard:
            raise OverflowGuard(
                f"log-domain argument would exponentiate {worst:g} > {guard:g}"
            )


def log_ratio_map(prob: SpectralProblem, y: BlockVector, guard: float = 300.0) -> BlockVector:
    """Ratio map conjugated by exp/log: ``log(ratio_map(exp(y)))``.

    Every component is convex in ``y``; this is what the midpoint-convexity
    property tests probe.
    """
    conform(prob.partition, y)
    _guard_exponents(prob, y, guard)
    x = BlockVector.from_flat(np.exp(y.flat), y.lengths)
    G = gradient_map(prob, x)
    with np.errstate(divide="ignore"):
        return BlockVector(
            [
                np.log(G.block(i)) - (prob.p[i] - 1.0) * y.block(i)
                for i in range(prob.d)
            ]
        )


def log_ratio_jacobian(prob: SpectralProblem, y: BlockVector, guard: float = 300.0) -> np.ndarray:
    """Exact Jacobian of :func:`log_ratio_map`, assembled from the ratio-map
    Jacobian by the chain rule."""
    conform(prob.partition, y)
    _guard_exponents(prob, y, guard)
    x = BlockVector.from_flat(np.exp(y.flat), y.lengths)
    phi = ratio_map(prob, x)
    DPhi = ratio_jacobian(prob, x)
    return DPhi * x.flat[None, :] / phi.flat[:, None]


def log_norm_product(prob: SpectralProblem, y: BlockVector, guard: float = 300.0) -> float:
    """``log(norm_product(exp(y)))``, evaluated stably via shifted log-sum-exp."""
    conform(prob.partition, y)
    _guard_exponents(prob, y, guard)
    total = 0.0
    for i in range(prob.d):
        t = prob.p[i] * y.block(i)
        hi = t.max()
        total += (hi + math.log(np.exp(t - hi).sum())) / prob.p[i]
    return total


def log_norm_product_grad(prob: SpectralProblem, y: BlockVector, guard: float = 300.0) -> BlockVector:
    """Gradient of :func:`log_norm_product`: blockwise softmax of ``p_i * y_i``.

    Its inner product with the block-constant vector ``1/p_i`` is identically
    ``sum(1/p_i)``, one of the exactness checks on the constraint geometry.
    """
    conform(prob.partition, y)
    _guard_exponents(prob, y, guard)
    out = []
    for i in range(prob.d):
        t = prob.p[i] * y.block(i)
        e = np.exp(t - t.max())
        out.append(e / e.sum())
    return BlockVector(out)
