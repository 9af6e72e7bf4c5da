import numpy as np
import pytest
from _helpers import rel_l2_diff, solution_l2

from polydg.assembly import BlockSystem, assemble_constraints, assemble_sip, error_norms
from polydg.basis import dim
from polydg.errors import NotPositiveDefiniteError
from polydg.mesh import unit_square_poly_mesh
from polydg.problem import builtin_case, from_expressions
from polydg.solve import (
    default_gamma,
    run_saddle_oracle,
    run_scsip,
    run_sip,
    solve_spd,
    symmetric_factor,
)

# exact polynomial data (A = I) expressed through the expression language,
# one case per supported degree
PATCH_CASES = {
    2: {"u": "x^2 + x*y + y^2", "ux": "2*x + y", "uy": "x + 2*y", "f": "-4"},
    3: {"u": "x^3 - 3*x*y^2", "ux": "3*x^2 - 3*y^2", "uy": "-6*x*y", "f": "0"},
    4: {"u": "x^4 + y^4", "ux": "4*x^3", "uy": "4*y^3", "f": "-(12*x^2 + 12*y^2)"},
}


def patch_problem(k):
    c = PATCH_CASES[k]
    return from_expressions({
        "A11": "1", "A22": "1", "f": c["f"], "g": c["u"],
        "u": c["u"], "ux": c["ux"], "uy": c["uy"],
    })


class TestSolveSpd:
    def test_identity_blocks(self):
        rhs = np.array([[1.0, -2.0], [3.0, 0.5]])
        sys = BlockSystem(2, 2, {(0, 0): np.eye(2), (1, 1): np.eye(2)}, rhs)
        np.testing.assert_allclose(solve_spd(sys), rhs.ravel(), atol=1e-14)

    def test_two_by_two(self):
        sys = BlockSystem(1, 2, {(0, 0): np.array([[2.0, 1.0], [1.0, 2.0]])},
                          np.array([[3.0, 3.0]]))
        np.testing.assert_allclose(solve_spd(sys), [1.0, 1.0], atol=1e-14)

    def test_indefinite_detected(self):
        sys = BlockSystem(1, 2, {(0, 0): np.array([[1.0, 0.0], [0.0, -1.0]])},
                          np.array([[1.0, 1.0]]))
        with pytest.raises(NotPositiveDefiniteError):
            solve_spd(sys)


class TestCoercivity:
    def test_default_gamma(self):
        assert default_gamma(2) == 12.0
        assert default_gamma(3) == 24.0
        assert default_gamma(4) == 40.0

    def test_standard_penalty_is_positive_definite(self):
        poly = unit_square_poly_mesh(4, "facet")
        problem = builtin_case("poisson-sin")
        sys = assemble_sip(poly, 2, default_gamma(2), problem)
        symmetric_factor(sys.to_csr())  # must not raise

    def test_tiny_penalty_rejected(self):
        poly = unit_square_poly_mesh(4, "facet")
        problem = builtin_case("poisson-sin")
        with pytest.raises(NotPositiveDefiniteError):
            run_sip(poly, 2, problem, gamma=0.01)


@pytest.mark.parametrize("k", [2, 3, 4])
class TestPatchTest:
    def test_sip_reproduces_polynomials(self, k):
        poly = unit_square_poly_mesh(4, "facet")
        problem = patch_problem(k)
        report = run_sip(poly, k, problem)
        l2, _ = error_norms(report.solution, problem.exact, poly)
        assert l2 <= 1e-9
        assert report.residual <= 1e-12

    def test_scsip_reproduces_polynomials(self, k):
        poly = unit_square_poly_mesh(4, "facet")
        problem = patch_problem(k)
        report = run_scsip(poly, k, problem)
        l2, _ = error_norms(report.solution, problem.exact, poly)
        assert l2 <= 1e-9

    def test_constraints_hold_for_sip_solution(self, k):
        # constant A and polynomial u: the SIP solution also satisfies the
        # cellwise constraints exactly
        poly = unit_square_poly_mesh(4, "facet")
        problem = patch_problem(k)
        report = run_sip(poly, k, problem)
        constraints = assemble_constraints(poly, k, problem)
        for l in range(poly.n_cells):
            residual = constraints.B[l] @ report.solution.coeffs[l] - constraints.F_psi[l]
            assert np.linalg.norm(residual) <= 1e-9 * max(1.0, np.linalg.norm(constraints.F_psi[l]))


class TestUnknownCounts:
    def test_sip(self):
        poly = unit_square_poly_mesh(4, "facet")
        report = run_sip(poly, 4, builtin_case("poisson-sin"))
        assert report.unknowns == 16 * 15 == poly.n_cells * dim(4)

    def test_scsip(self):
        poly = unit_square_poly_mesh(4, "facet")
        report = run_scsip(poly, 4, builtin_case("poisson-sin"))
        assert report.unknowns == 16 * 9 == poly.n_cells * (2 * 4 + 1)


class TestSaddleOracle:
    def test_zero_data(self):
        poly = unit_square_poly_mesh(2, "facet")
        problem = from_expressions({"A11": "1", "A22": "1", "f": "0", "g": "0"})
        report = run_saddle_oracle(poly, 2, problem)
        assert np.max(np.abs(report.solution.coeffs)) <= 1e-12
        assert report.multiplier_norm <= 1e-12

    @pytest.mark.parametrize("case", ["poisson-sin", "variable-a"])
    def test_matches_condensed_pipeline(self, case):
        poly = unit_square_poly_mesh(4, "facet")
        problem = builtin_case(case)
        oracle = run_saddle_oracle(poly, 2, problem)
        condensed = run_scsip(poly, 2, problem)
        assert rel_l2_diff(condensed.solution, oracle.solution, poly) <= 1e-8

    def test_row_scaling_leaves_u_unchanged(self):
        # scaling the constraint rows moves the multiplier but not u
        poly = unit_square_poly_mesh(4, "facet")
        problem = builtin_case("variable-a")
        weighted = run_saddle_oracle(poly, 3, problem, weighted=True)
        plain = run_saddle_oracle(poly, 3, problem, weighted=False)
        assert rel_l2_diff(weighted.solution, plain.solution, poly) <= 1e-9
        assert abs(weighted.multiplier_norm - plain.multiplier_norm) > 0

    def test_unknown_count(self):
        poly = unit_square_poly_mesh(2, "facet")
        report = run_saddle_oracle(poly, 2, builtin_case("poisson-sin"))
        assert report.unknowns == 4 * (6 + 1)


class TestReports:
    def test_residual_contract(self):
        # uniform h_E as in the reproduction runs; the facet-mode penalty
        # 2k(k+1) is not strong enough for the variable-coefficient case
        poly = unit_square_poly_mesh(4, "uniform")
        problem = builtin_case("variable-a")
        for report in (
            run_sip(poly, 2, problem),
            run_scsip(poly, 2, problem),
            run_saddle_oracle(poly, 2, problem),
        ):
            assert report.residual <= 1e-12
            assert report.wall_time > 0.0

    def test_facet_mode_penalty_margin_detected(self):
        # documented coercivity margin: with facet h_E (weaker penalty) and
        # the variable-coefficient case, gamma = 2k(k+1) is below gamma_0
        poly = unit_square_poly_mesh(4, "facet")
        with pytest.raises(NotPositiveDefiniteError):
            run_sip(poly, 2, builtin_case("variable-a"))

    def test_solution_l2_helper_sane(self):
        poly = unit_square_poly_mesh(4, "facet")
        problem = builtin_case("poisson-sin")
        report = run_sip(poly, 3, problem)
        # |u|_L2 = 1/2 for the sine product; discrete value close to it
        assert solution_l2(report.solution, poly) == pytest.approx(0.5, abs=1e-3)
