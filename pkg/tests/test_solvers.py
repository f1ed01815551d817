"""Newton step, line search, full solves, traces, and cross-method checks."""
import warnings

import numpy as np
import pytest
from numpy.testing import assert_allclose

import specrad as sr
from specrad.errors import (
    LineSearchFailed,
    NonPositiveInput,
    ShapeMismatch,
    SingularNewtonSystem,
)

from conftest import bv, random_positive, rel_err


def solve_quiet(prob, x0=None, opts=None, method="lsnnm"):
    fn = sr.power_iteration if method == "power" else sr.newton_noda
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return fn(prob, x0, opts)


def full_positive_matrix_problem(A):
    m, n = A.shape
    idx = np.stack(np.meshgrid(np.arange(m), np.arange(n), indexing="ij"), -1)
    t = sr.CooTensor((m, n), idx.reshape(-1, 2), A.ravel())
    return sr.make_problem(t, [[0], [1]], ["2", "2"])


class TestOptions:
    def test_defaults(self):
        opts = sr.SolverOptions()
        assert opts.tol == 1e-12
        assert opts.max_iter == 500
        assert opts.method == "lsnnm"

    @pytest.mark.parametrize(
        "kw",
        [
            dict(tol=0.0),
            dict(tol=-1e-3),
            dict(max_iter=0),
            dict(armijo_c=0.0),
            dict(armijo_c=1.0),
            dict(backtrack_rho=0.0),
            dict(backtrack_rho=1.0),
            dict(max_backtracks=-1),
            dict(method="bisection"),
        ],
    )
    def test_rejects_bad_values(self, kw):
        with pytest.raises(ValueError):
            sr.SolverOptions(**kw)


class TestNewtonStep:
    def test_zero_at_exact_eigenpair(self, sym_matrix_tensor):
        prob = sr.make_problem(sym_matrix_tensor, [[0], [1]], ["2", "2"])
        x = sr.BlockVector([np.full(2, 2.0**-0.5), np.full(2, 2.0**-0.5)])
        d, delta = sr.newton_step(prob, x, 3.0)
        assert np.abs(d.flat).max() < 1e-14
        assert abs(delta) < 1e-14

    def test_delta_negative_and_step_tangent(self, nine_problem):
        prob, _ = nine_problem
        x = sr.retract(prob, prob.ones())
        lam = float(sr.ratio_map(prob, x).flat.max())
        d, delta = sr.newton_step(prob, x, lam)
        assert delta < 0.0
        gc = sr.norm_product_grad(prob, x)
        assert abs(float(gc.flat @ d.flat)) < 1e-10 * (1.0 + np.abs(d.flat).max())

    def test_matches_schur_complement_formulas(self, nine_problem):
        # eliminating the border gives
        #   delta = -(g' J^-1 r) / (g' J^-1 x),   d = -J^-1 (r + delta x)
        prob, _ = nine_problem
        rng = np.random.default_rng(101)
        for _ in range(5):
            x = sr.retract(prob, random_positive(prob, rng))
            lam = float(sr.ratio_map(prob, x).flat.max())
            d, delta = sr.newton_step(prob, x, lam)
            J = sr.residual_jacobian(prob, x, lam)
            r = sr.eigen_residual(prob, x, lam).flat
            g = sr.norm_product_grad(prob, x).flat
            Jir = np.linalg.solve(J, r)
            Jix = np.linalg.solve(J, x.flat)
            delta_ref = -float(g @ Jir) / float(g @ Jix)
            d_ref = -Jir - delta_ref * Jix
            assert abs(delta - delta_ref) <= 1e-8 * abs(delta_ref)
            assert rel_err(d.flat, d_ref) <= 1e-8

    def test_singular_system_raises(self):
        t = sr.CooTensor((2, 2, 2), np.empty((0, 3), dtype=np.int64), [])
        prob = sr.make_problem(t, [[0, 1, 2]], ["3"])
        x = sr.retract(prob, prob.ones())
        with pytest.raises(SingularNewtonSystem):
            sr.newton_step(prob, x, 0.0)


class TestLineSearch:
    def test_positivity_rejections_counted(self, ref_tensor):
        # d = -2x: alpha=1 leaves the orthant, alpha=1/2 hits its boundary
        # exactly, alpha=1/4 is the first strictly positive trial
        prob = sr.make_problem(ref_tensor, [[0, 1, 2]], ["3"])
        x = sr.retract(prob, prob.ones())
        lam = float(sr.ratio_map(prob, x).flat.max())
        d = sr.BlockVector.from_flat(-2.0 * x.flat, x.lengths)
        alpha, x_next, backtracks = sr.line_search(
            prob, x, lam, d, 1e6, sr.SolverOptions()
        )
        assert (alpha, backtracks) == (0.25, 2)
        assert np.all(x_next.flat > 0)

    def test_gives_up_when_no_decrease_possible(self, ref_tensor):
        # a zero direction with a hugely negative predicted decrease can
        # never satisfy the sufficient-decrease test
        prob = sr.make_problem(ref_tensor, [[0, 1, 2]], ["3"])
        x = sr.retract(prob, prob.ones())
        lam = float(sr.ratio_map(prob, x).flat.max())
        d = sr.BlockVector.from_flat(np.zeros(3), x.lengths)
        with pytest.raises(LineSearchFailed):
            sr.line_search(prob, x, lam, d, -1e6, sr.SolverOptions(max_backtracks=10))

    def test_warns_near_positivity_boundary(self, ref_tensor):
        prob = sr.make_problem(ref_tensor, [[0, 1, 2]], ["3"])
        x = sr.retract(prob, prob.ones())
        lam = float(sr.ratio_map(prob, x).flat.max())
        dflat = np.zeros(3)
        dflat[2] = -x.flat[2] * (1.0 - 1e-14)
        d = sr.BlockVector.from_flat(dflat, x.lengths)
        # the surviving component's ratio explodes like 1/x^2, so only an
        # absurdly slack decrease budget accepts the full step
        with pytest.warns(RuntimeWarning, match="positivity boundary"):
            alpha, _, backtracks = sr.line_search(
                prob, x, lam, d, 1e33, sr.SolverOptions()
            )
        assert (alpha, backtracks) == (1.0, 0)

    def test_ratio_barrier_rejects_boundary_step(self, ref_tensor):
        # same direction with a merely large budget: the exploding ratio
        # rejects the full step and the half step is taken instead
        prob = sr.make_problem(ref_tensor, [[0, 1, 2]], ["3"])
        x = sr.retract(prob, prob.ones())
        lam = float(sr.ratio_map(prob, x).flat.max())
        dflat = np.zeros(3)
        dflat[2] = -x.flat[2] * (1.0 - 1e-14)
        d = sr.BlockVector.from_flat(dflat, x.lengths)
        alpha, _, backtracks = sr.line_search(prob, x, lam, d, 1e6, sr.SolverOptions())
        assert (alpha, backtracks) == (0.5, 1)


class TestClosedForms:
    def test_all_ones_cube_cubic(self, all_ones_cube):
        prob = sr.make_problem(all_ones_cube, [[0, 1, 2]], ["3"])
        res = sr.newton_noda(prob)
        assert res.converged
        assert abs(res.lambda_star - 4.0) < 1e-10
        assert_allclose(res.x.flat, np.full(2, 2.0 ** (-1.0 / 3.0)), atol=1e-10)

    def test_all_ones_cube_quartic(self, all_ones_cube):
        prob = sr.make_problem(all_ones_cube, [[0, 1, 2]], ["4"])
        res = sr.newton_noda(prob)
        assert res.converged
        assert abs(res.lambda_star - 4.0 * 2.0**0.25) < 1e-10
        assert_allclose(res.x.flat, np.full(2, 2.0**-0.25), atol=1e-10)

    def test_symmetric_matrix(self, sym_matrix_tensor):
        prob = sr.make_problem(sym_matrix_tensor, [[0], [1]], ["2", "2"])
        for method in ("lsnnm", "power"):
            res = solve_quiet(prob, method=method)
            assert res.converged
            assert abs(res.lambda_star - 3.0) < 1e-8
            assert_allclose(res.x.flat, np.full(4, 2.0**-0.5), atol=1e-8)

    @pytest.mark.parametrize("seed", range(20))
    def test_matrix_case_matches_svd(self, seed):
        # with two singleton blocks and both exponents 2, the eigenpair is
        # the leading singular triple
        rng = np.random.default_rng(1000 + seed)
        m, n = int(rng.integers(2, 5)), int(rng.integers(2, 5))
        A = rng.uniform(0.05, 2.0, (m, n))
        prob = full_positive_matrix_problem(A)
        res = sr.newton_noda(prob)
        s = np.linalg.svd(A, compute_uv=False)
        assert res.converged
        assert abs(res.lambda_star - s[0]) <= 1e-10 * s[0]
        u, sv, vt = np.linalg.svd(A)
        assert_allclose(res.x.block(0), np.abs(u[:, 0]), atol=1e-8)
        assert_allclose(res.x.block(1), np.abs(vt[0]), atol=1e-8)


class TestNewtonNoda:
    def test_converges_on_reference_configs(self, nine_problem):
        prob, lam_ref = nine_problem
        res = solve_quiet(prob)
        assert res.converged
        assert res.res <= 1e-12
        assert abs(res.lambda_star - lam_ref) <= 5e-3
        assert res.method == "lsnnm"
        assert np.all(res.x.flat > 0)
        # returned point is blockwise normalized
        for i in range(prob.d):
            assert abs((res.x.block(i) ** prob.p[i]).sum() - 1.0) < 1e-13

    def test_trace_invariants(self, nine_problem):
        prob, _ = nine_problem
        opts = sr.SolverOptions()
        res = solve_quiet(prob, opts=opts)
        trace = res.trace
        assert [rec.k for rec in trace] == list(range(len(trace)))
        assert res.iterations == len(trace) - 1
        for rec in trace:
            assert rec.alpha_k == opts.backtrack_rho**rec.backtracks
            assert rec.cw_lower <= res.lambda_star * (1.0 + 1e-12) + 1e-12
            assert rec.res >= 0.0
        for rec in trace[:-1]:
            assert rec.delta_k <= 1e-15
            assert rec.tangency <= 1e-8
        # Armijo decrease links consecutive eigenvalue estimates
        for a, b in zip(trace, trace[1:]):
            bound = a.lambda_k + opts.armijo_c * a.alpha_k * a.delta_k
            assert b.lambda_k <= bound + 1e-13 * max(1.0, abs(bound))
        term = trace[-1]
        assert term.delta_k == 0.0 and term.alpha_k == 1.0 and term.backtracks == 0
        assert term.res <= opts.tol
        assert term.h_norm <= 1e-10

    def test_bracket_fields_consistent(self, nine_problem):
        prob, _ = nine_problem
        res = solve_quiet(prob)
        assert res.cw_lower <= res.lambda_star <= res.cw_upper
        assert_allclose(res.lambda_star, 0.5 * (res.cw_lower + res.cw_upper))
        phi = sr.ratio_map(prob, res.x)
        assert_allclose(res.cw_upper, phi.flat.max(), rtol=1e-15)
        assert_allclose(res.cw_lower, phi.flat.min(), rtol=1e-15)
        assert_allclose(
            res.res,
            (res.cw_upper - res.cw_lower) / max(1.0, res.cw_lower),
            rtol=1e-12,
            atol=1e-18,
        )

    def test_deterministic(self, nine_problem):
        prob, _ = nine_problem
        r1 = solve_quiet(prob)
        r2 = solve_quiet(prob)
        assert r1.trace == r2.trace
        assert r1.lambda_star == r2.lambda_star
        assert np.array_equal(r1.x.flat, r2.x.flat)

    def test_scaled_eigenpair_family(self, nine_problem):
        # x_i -> t^(1/p_i) x_i maps the eigenpair to one with eigenvalue
        # scaled by t^(sum nu/p - 1)
        prob, _ = nine_problem
        res = solve_quiet(prob)
        s = prob.nu_over_p
        for t in (0.5, 2.0, 5.0):
            scaled = sr.BlockVector(
                [t ** (1.0 / prob.p[i]) * res.x.block(i) for i in range(prob.d)]
            )
            lam_t = res.lambda_star * t ** (s - 1.0)
            r = sr.eigen_residual(prob, scaled, lam_t)
            assert np.abs(r.flat).max() <= 1e-9 * max(1.0, res.lambda_star)

    def test_iteration_cap_reports_unconverged(self, ref_tensor):
        prob = sr.make_problem(ref_tensor, [[0, 1, 2]], ["3"])
        opts = sr.SolverOptions(max_iter=2)
        res = sr.newton_noda(prob, opts=opts)
        assert not res.converged
        assert res.iterations == 2
        assert len(res.trace) == 3
        assert res.res > opts.tol
        assert np.isfinite(res.lambda_star)

    def test_custom_start_point(self, ref_tensor):
        prob = sr.make_problem(ref_tensor, [[0, 1, 2]], ["3"])
        rng = np.random.default_rng(7)
        res = sr.newton_noda(prob, x0=bv(prob, rng.uniform(0.5, 1.5, 3)))
        ref = sr.newton_noda(prob)
        assert res.converged
        assert abs(res.lambda_star - ref.lambda_star) <= 1e-12 * ref.lambda_star

    def test_rejects_bad_start_points(self, ref_tensor):
        prob = sr.make_problem(ref_tensor, [[0, 1, 2]], ["3"])
        with pytest.raises(NonPositiveInput):
            sr.newton_noda(prob, x0=bv(prob, [1.0, 1.0, -1.0]))
        with pytest.raises(NonPositiveInput):
            sr.newton_noda(prob, x0=bv(prob, [1.0, 0.0, 1.0]))
        with pytest.raises(ShapeMismatch):
            sr.newton_noda(prob, x0=sr.BlockVector([[1.0, 1.0]]))

    def test_warns_on_unsupported_regime(self, ref_tensor):
        prob = sr.make_problem(ref_tensor, [[0], [1, 2]], ["2", "4"])
        with pytest.warns(RuntimeWarning, match="structural assumptions"):
            res = sr.newton_noda(prob)
        assert res.converged  # the solve is attempted regardless

    def test_singular_jacobian_regularized_by_border(self, ref_tensor):
        # at a converged critical-regime eigenpair the plain Jacobian is
        # singular while the bordered matrix stays well conditioned
        prob = sr.make_problem(ref_tensor, [[0, 1, 2]], ["3"])
        res = sr.newton_noda(prob)
        J = sr.residual_jacobian(prob, res.x, res.lambda_star)
        DH = sr.newton_matrix(prob, res.x, res.lambda_star)
        sj = np.linalg.svd(J, compute_uv=False)
        sh = np.linalg.svd(DH, compute_uv=False)
        assert sj[-1] / sj[0] < 1e-12
        assert sh[-1] / sh[0] > 1e-3


class TestPowerIteration:
    def test_converges_on_reference_configs(self, nine_problem):
        prob, lam_ref = nine_problem
        res = solve_quiet(prob, method="power")
        assert res.converged
        assert res.res <= 1e-12
        assert abs(res.lambda_star - lam_ref) <= 5e-3
        assert res.method == "power"

    def test_agrees_with_newton(self, nine_problem):
        prob, _ = nine_problem
        rn = solve_quiet(prob)
        rp = solve_quiet(prob, method="power")
        assert abs(rn.lambda_star - rp.lambda_star) <= 1e-8 * rn.lambda_star
        assert np.abs(rn.x.flat - rp.x.flat).max() <= 1e-6

    def test_needs_many_more_iterations(self, ref_tensor):
        prob = sr.make_problem(ref_tensor, [[0, 1, 2]], ["3"])
        rn = sr.newton_noda(prob)
        rp = sr.power_iteration(prob)
        assert rp.iterations > 3 * rn.iterations

    def test_trace_rows_are_diagnostic_only(self, ref_tensor):
        prob = sr.make_problem(ref_tensor, [[0, 1, 2]], ["3"])
        res = sr.power_iteration(prob, opts=sr.SolverOptions(max_iter=10))
        for rec in res.trace:
            assert rec.delta_k == 0.0
            assert rec.alpha_k == 1.0
            assert rec.tangency == 0.0

    def test_iteration_cap(self, ref_tensor):
        prob = sr.make_problem(ref_tensor, [[0, 1, 2]], ["3"])
        res = sr.power_iteration(prob, opts=sr.SolverOptions(max_iter=3))
        assert not res.converged
        assert res.iterations == 3


class TestSolveDispatcher:
    def test_dispatches_by_method(self, ref_tensor):
        prob = sr.make_problem(ref_tensor, [[0, 1, 2]], ["3"])
        assert sr.solve(prob).method == "lsnnm"
        assert (
            sr.solve(prob, opts=sr.SolverOptions(method="power")).method == "power"
        )

    def test_regime_report_attached(self, ref_tensor):
        prob = sr.make_problem(ref_tensor, [[0, 1, 2]], ["3"])
        res = sr.solve(prob)
        assert res.regime.regime is sr.Regime.WEAKLY_IRR_CRITICAL
        assert res.regime.M_nnz == 6


class TestCertifiedResidual:
    def test_matches_definition(self, nine_problem):
        prob, _ = nine_problem
        rng = np.random.default_rng(55)
        x = random_positive(prob, rng)
        xbar = sr.normalize_blocks(prob, x)
        phi = sr.ratio_map(prob, xbar)
        hi, lo = float(phi.flat.max()), float(phi.flat.min())
        assert_allclose(
            sr.certified_residual(prob, x), (hi - lo) / max(1.0, lo), rtol=1e-15
        )

    def test_invariant_under_block_scaling(self, nine_problem):
        prob, _ = nine_problem
        rng = np.random.default_rng(56)
        x = random_positive(prob, rng)
        theta = rng.uniform(0.1, 10.0, prob.d)
        scaled = sr.BlockVector(
            [theta[i] * x.block(i) for i in range(prob.d)]
        )
        a = sr.certified_residual(prob, x)
        b = sr.certified_residual(prob, scaled)
        assert abs(a - b) <= 1e-12 * max(1.0, a)

    def test_zero_at_eigenvector(self, nine_problem):
        prob, _ = nine_problem
        res = solve_quiet(prob)
        assert sr.certified_residual(prob, res.x) <= 1e-12
