"""Solvers for the positive block-spectral eigenpair.

Two methods share the same stopping rule and trace format:

``newton_noda``
    Newton's method on the bordered system (eigen residual + normalization
    constraint), safeguarded by a positivity-preserving Armijo backtracking
    line search, with the eigenvalue refreshed each iteration as the largest
    componentwise ratio.  Globally convergent with an asymptotically
    quadratic tail on problems passing the structural checks; each step
    costs one dense factorization of the bordered matrix.

``power_iteration``
    Normalized fixed-point iteration of the power map.  Linearly convergent
    at best, but simple and derivative-free; used as an independent
    cross-check of the Newton solver.

Convergence is certified through Collatz-Wielandt bounds: with the iterate
normalized blockwise, the min and max componentwise ratios bracket the
spectral radius, so their relative gap

    res = (max_ratio - min_ratio) / max(1, min_ratio)

bounds the eigenvalue error.  The reported eigenvalue is the bracket
midpoint.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    LineSearchFailed,
    NonPositiveInput,
    SingularMatrix,
    SingularNewtonSystem,
)
from .linalg import lu_solve
from .spectral_maps import (
    BlockVector,
    SpectralProblem,
    eigen_system,
    newton_matrix,
    norm_product_grad,
    normalize_blocks,
    power_map,
    ratio_map,
    retract,
)
from .structure import AssumptionReport, Regime, classify_regime
from .tensor_core import conform

__all__ = [
    "SolverOptions",
    "IterRecord",
    "SolveResult",
    "newton_step",
    "line_search",
    "newton_noda",
    "power_iteration",
    "certified_residual",
    "solve",
]


@dataclass(frozen=True)
class SolverOptions:
    """Options shared by both solvers.

    Parameters
    ----------
    tol:
        Stop when the certified relative bracket gap drops to this value.
    max_iter:
        Iteration cap; hitting it yields ``converged=False``, not an error.
    armijo_c:
        Sufficient-decrease coefficient of the line search.
    backtrack_rho:
        Step-halving factor; trial steps are ``backtrack_rho ** j``.
    max_backtracks:
        Budget of step reductions before the line search gives up.
    method:
        ``"lsnnm"`` (Newton) or ``"power"``.
    """

    tol: float = 1e-12
    max_iter: int = 500
    armijo_c: float = 1e-2
    backtrack_rho: float = 0.5
    max_backtracks: int = 60
    method: str = "lsnnm"

    def __post_init__(self) -> None:
        if not self.tol > 0.0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if not 0.0 < self.armijo_c < 1.0:
            raise ValueError("armijo_c must lie in (0, 1)")
        if not 0.0 < self.backtrack_rho < 1.0:
            raise ValueError("backtrack_rho must lie in (0, 1)")
        if self.max_backtracks < 0:
            raise ValueError("max_backtracks must be nonnegative")
        if self.method not in ("lsnnm", "power"):
            raise ValueError(f"unknown method {self.method!r}")


@dataclass(frozen=True)
class IterRecord:
    """One row of a solve trace.

    ``lambda_k`` is the max ratio at the current iterate, ``delta_k`` the
    eigenvalue correction proposed by the Newton step taken *from* this
    iterate (0 on the terminal row and for the power method), ``alpha_k``
    the accepted step length ``backtrack_rho ** backtracks``, ``res`` the
    certified relative bracket gap, ``cw_lower`` the min ratio at the
    blockwise-normalized iterate, ``h_norm`` the max-norm of the bordered
    root function, and ``tangency`` the (normalized) constraint-gradient
    component of the step direction, which Newton keeps at roundoff level.
    """

    k: int
    lambda_k: float
    delta_k: float
    alpha_k: float
    backtracks: int
    res: float
    cw_lower: float
    h_norm: float
    tangency: float = 0.0


@dataclass(frozen=True)
class SolveResult:
    """Outcome of a solve.

    ``x`` is blockwise normalized and strictly positive; ``lambda_star`` is
    the midpoint of the final Collatz-Wielandt bracket ``[cw_lower,
    cw_upper]``; ``iterations`` counts update steps actually taken.
    """

    lambda_star: float
    x: BlockVector
    res: float
    cw_lower: float
    cw_upper: float
    iterations: int
    converged: bool
    method: str
    regime: AssumptionReport
    trace: tuple[IterRecord, ...] = field(default_factory=tuple)


def certified_residual(prob: SpectralProblem, x: BlockVector) -> float:
    """Relative Collatz-Wielandt bracket gap at the blockwise normalization
    of ``x``; an upper bound on the relative eigenvalue error."""
    xbar = normalize_blocks(prob, x)
    phi = ratio_map(prob, xbar)
    hi = float(phi.flat.max())
    lo = float(phi.flat.min())
    return (hi - lo) / max(1.0, lo)


def newton_step(prob: SpectralProblem, x: BlockVector, lam: float):
    """Solve the bordered Newton system at ``(x, lam)``.

    Returns ``(d, delta)``: the update direction in ``x`` (tangent to the
    normalization surface when ``norm_product(x) == 1``) and the eigenvalue
    correction, which is nonpositive when ``lam`` is the max ratio at ``x``.
    """
    DH = newton_matrix(prob, x, lam)
    H = eigen_system(prob, x, lam)
    try:
        sol = lu_solve(DH, -H)
    except SingularMatrix as e:
        raise SingularNewtonSystem(f"bordered Newton matrix is singular: {e}") from e
    d = BlockVector.from_flat(sol[:-1], x.lengths)
    return d, float(sol[-1])


def line_search(
    prob: SpectralProblem,
    x: BlockVector,
    lam: float,
    d: BlockVector,
    delta: float,
    opts: SolverOptions,
):
    """Backtrack until the trial point is strictly positive *and* the
    retracted point satisfies the Armijo decrease on the max ratio.

    Positivity is tested with an exact componentwise ``> 0``; a diagnostic
    warning fires when an accepted point has a component within
    ``1e-12 * |x|_inf`` of the boundary.  Returns
    ``(alpha, x_next, backtracks)``.
    """
    floor = 1e-12 * float(np.abs(x.flat).max())
    for j in range(opts.max_backtracks + 1):
        alpha = opts.backtrack_rho ** j
        trial = x.flat + alpha * d.flat
        if not np.all(trial > 0.0):
            continue
        x_next = retract(prob, BlockVector.from_flat(trial, x.lengths))
        phi_next = float(ratio_map(prob, x_next).flat.max())
        if phi_next <= lam + opts.armijo_c * alpha * delta:
            if np.any(trial < floor):
                warnings.warn(
                    "accepted iterate has a component within 1e-12*|x|_inf "
                    "of the positivity boundary",
                    RuntimeWarning,
                    stacklevel=2,
                )
            return alpha, x_next, j
    raise LineSearchFailed(
        f"no acceptable step after {opts.max_backtracks} backtracks"
    )


def _start_point(prob: SpectralProblem, x0: BlockVector | None) -> BlockVector:
    if x0 is None:
        return prob.ones()
    conform(prob.partition, x0)
    if not np.all(x0.flat > 0.0):
        raise NonPositiveInput("starting point must be strictly positive")
    return x0


def _warn_unsupported(report: AssumptionReport) -> None:
    if report.regime is Regime.UNSUPPORTED:
        warnings.warn(
            "structural assumptions not satisfied "
            f"(strict_nonneg={report.strict_nonneg}, "
            f"weakly_irreducible={report.weakly_irreducible}, "
            f"nu_over_p={report.nu_over_p:.6g}); convergence is not "
            "guaranteed, attempting the solve anyway",
            RuntimeWarning,
            stacklevel=3,
        )


def _bracket(prob: SpectralProblem, x: BlockVector):
    xbar = normalize_blocks(prob, x)
    phi = ratio_map(prob, xbar)
    hi = float(phi.flat.max())
    lo = float(phi.flat.min())
    return xbar, hi, lo, (hi - lo) / max(1.0, lo)


def newton_noda(
    prob: SpectralProblem,
    x0: BlockVector | None = None,
    opts: SolverOptions | None = None,
) -> SolveResult:
    """Line-search Newton iteration for the positive eigenpair.

    Starts from the retraction of ``x0`` (all-ones by default), refreshes
    the eigenvalue estimate as the max ratio at every iterate, takes damped
    Newton steps on the bordered system, and stops once the certified
    bracket gap falls to ``opts.tol`` or the iteration cap is reached.
    """
    opts = opts or SolverOptions()
    report = classify_regime(prob)
    _warn_unsupported(report)
    x = retract(prob, _start_point(prob, x0))
    trace: list[IterRecord] = []
    k = 0
    converged = False
    while True:
        lam = float(ratio_map(prob, x).flat.max())
        xbar, hi, lo, res = _bracket(prob, x)
        h_norm = float(np.abs(eigen_system(prob, x, lam)).max())
        if res <= opts.tol:
            trace.append(IterRecord(k, lam, 0.0, 1.0, 0, res, lo, h_norm))
            converged = True
            break
        if k >= opts.max_iter:
            trace.append(IterRecord(k, lam, 0.0, 1.0, 0, res, lo, h_norm))
            break
        d, delta = newton_step(prob, x, lam)
        alpha, x_next, backtracks = line_search(prob, x, lam, d, delta, opts)
        gc = norm_product_grad(prob, x)
        tangency = abs(float(gc.flat @ d.flat)) / (
            1.0 + float(np.abs(d.flat).max())
        )
        trace.append(
            IterRecord(k, lam, delta, alpha, backtracks, res, lo, h_norm, tangency)
        )
        x = x_next
        k += 1
    return SolveResult(
        lambda_star=0.5 * (hi + lo),
        x=xbar,
        res=res,
        cw_lower=lo,
        cw_upper=hi,
        iterations=k,
        converged=converged,
        method="lsnnm",
        regime=report,
        trace=tuple(trace),
    )


def power_iteration(
    prob: SpectralProblem,
    x0: BlockVector | None = None,
    opts: SolverOptions | None = None,
) -> SolveResult:
    """Normalized power iteration on the power map, with the same certified
    stopping rule as the Newton solver."""
    opts = opts or SolverOptions()
    report = classify_regime(prob)
    _warn_unsupported(report)
    x = normalize_blocks(prob, _start_point(prob, x0))
    trace: list[IterRecord] = []
    k = 0
    converged = False
    while True:
        phi = ratio_map(prob, x)
        hi = float(phi.flat.max())
        lo = float(phi.flat.min())
        res = (hi - lo) / max(1.0, lo)
        h_norm = float(np.abs(eigen_system(prob, x, hi)).max())
        trace.append(IterRecord(k, hi, 0.0, 1.0, 0, res, lo, h_norm))
        if res <= opts.tol:
            converged = True
            break
        if k >= opts.max_iter:
            break
        x = normalize_blocks(prob, power_map(prob, x))
        k += 1
    return SolveResult(
        lambda_star=0.5 * (hi + lo),
        x=x,
        res=res,
        cw_lower=lo,
        cw_upper=hi,
        iterations=k,
        converged=converged,
        method="power",
        regime=report,
        trace=tuple(trace),
    )


def solve(
    prob: SpectralProblem,
    x0: BlockVector | None = None,
    opts: SolverOptions | None = None,
) -> SolveResult:
    """Dispatch to the solver named by ``opts.method``."""
    opts = opts or SolverOptions()
    if opts.method == "power":
        return power_iteration(prob, x0, opts)
    return newton_noda(prob, x0, opts)
