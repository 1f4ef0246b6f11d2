import numpy as np
import pytest

import gen
from io_recover import (
    ForwardProblem,
    ModelKind,
    NormKind,
    PreconditionError,
    Prior,
    SideConstraints,
    Status,
    UncertaintyStructure,
    UnsupportedNormError,
    brute_force_min,
    check_certificate,
    counters,
    oracle_tolerance,
    realized_row_interval,
    solve_rlo_iu_dg,
    solve_rlo_iu_sd,
)
from io_recover.fixtures import evaluate_example, example_case


def test_example_3_checks():
    _, solution, checks = evaluate_example(3)
    assert solution.status == Status.OPTIMAL
    for chk in checks:
        assert chk.ok, (chk.name, chk.computed, chk.expected)


def test_example_4_checks():
    _, solution, checks = evaluate_example(4)
    assert solution.status == Status.OPTIMAL
    for chk in checks:
        assert chk.ok, (chk.name, chk.computed, chk.expected)


class TestIuDg:
    def test_lp_call_count_is_m(self):
        case = example_case(3)
        before = counters()["lp_solve"]
        solve_rlo_iu_dg(case.problem, case.x_hat, case.structure, case.omega)
        assert counters()["lp_solve"] - before == case.problem.m

    def test_empty_uncertain_set_rejected(self):
        prob = ForwardProblem(A=[[1.0, 0.0], [0.0, 1.0]], b=[0.0, 0.0])
        structure = UncertaintyStructure.interval(((0,), ()))
        with pytest.raises(PreconditionError):
            solve_rlo_iu_dg(prob, [1.0, 1.0], structure, None)

    def test_zero_magnitudes_forced_gives_min_nominal_surplus(self):
        case = example_case(3)
        p = 4
        omega = SideConstraints(G=np.vstack([np.eye(p), -np.eye(p)]), h=np.zeros(2 * p))
        sol = solve_rlo_iu_dg(case.problem, case.x_hat, case.structure, omega)
        surpluses = case.problem.surplus(case.x_hat)
        assert sol.duality_gap == pytest.approx(float(np.min(surpluses)), abs=1e-9)

    def test_infeasible_when_omega_blocks_robust_feasibility(self):
        # forcing a large magnitude on a tight row drives the robust surplus negative
        prob = ForwardProblem(A=[[1.0, 0.0]], b=[0.5])
        structure = UncertaintyStructure.interval(((0,),))
        omega = SideConstraints(G=[[-1.0]], h=[-3.0])  # alpha >= 3
        sol = solve_rlo_iu_dg(prob, [1.0, 1.0], structure, omega)
        assert sol.status == Status.INFEASIBLE

    def test_realized_cost_identity(self):
        case = example_case(3)
        sol = solve_rlo_iu_dg(case.problem, case.x_hat, case.structure, case.omega)
        k = sol.active_index - 1
        assert float(sol.cost @ case.x_hat) - case.problem.b[k] == pytest.approx(
            sol.duality_gap, abs=1e-9
        )

    def test_unconstrained_magnitudes_close_the_gap(self):
        # with no side constraints the winning row's protection absorbs the
        # whole surplus
        case = example_case(3)
        sol = solve_rlo_iu_dg(case.problem, case.x_hat, case.structure, None)
        assert sol.status == Status.OPTIMAL
        assert sol.duality_gap == pytest.approx(0.0, abs=1e-9)

    def test_robust_feasibility_of_subresults(self):
        case = example_case(3)
        sol = solve_rlo_iu_dg(case.problem, case.x_hat, case.structure, case.omega)
        absx = np.abs(case.x_hat)
        for sub in sol.subresults:
            for i in range(case.problem.m):
                prot = float(sub.alpha_full[i] @ absx)
                assert case.problem.surplus(case.x_hat)[i] - prot >= -1e-9

    def test_oracle_agreement_random_boxes(self):
        for seed in range(30):
            problem, x, structure, omega, spec = gen.make_iu_dg(seed)
            sol = solve_rlo_iu_dg(problem, x, structure, omega)
            assert sol.status in (Status.OPTIMAL, Status.TRIVIAL_DETECTED)
            value, _ = brute_force_min(
                ModelKind.RLO_IU_DG, problem, x, structure, omega, spec
            )
            tol = oracle_tolerance(ModelKind.RLO_IU_DG, problem, x, structure, spec)
            assert abs(sol.duality_gap - value) <= tol, (seed, sol.duality_gap, value, tol)


class TestIuSd:
    def test_l2_rejected(self):
        case = example_case(4)
        prior = Prior(estimates=case.prior.estimates, norm=NormKind.L2)
        with pytest.raises(UnsupportedNormError):
            solve_rlo_iu_sd(case.problem, case.x_hat, case.structure, prior)

    def test_lp_call_count_is_m(self):
        case = example_case(4)
        before = counters()["lp_solve"]
        solve_rlo_iu_sd(case.problem, case.x_hat, case.structure, case.prior)
        assert counters()["lp_solve"] - before == case.problem.m

    def test_infeasible_iff_nominal_infeasible(self):
        case = example_case(4)
        rng = np.random.default_rng(4)
        for _ in range(60):
            x = rng.uniform(-8, 8, size=2)
            sol = solve_rlo_iu_sd(case.problem, x, case.structure, case.prior)
            nominal_ok = bool(np.min(case.problem.surplus(x)) >= -1e-9)
            assert (sol.status != Status.INFEASIBLE) == nominal_ok

    def test_infeasible_message_names_violated_row(self):
        case = example_case(4)
        sol = solve_rlo_iu_sd(case.problem, [9.0, 9.0], case.structure, case.prior)
        assert sol.status == Status.INFEASIBLE
        assert "constraint 3" in sol.message

    def test_active_prior_row_needs_no_perturbation(self):
        prob = ForwardProblem(A=[[1.0, 1.0], [0.0, 1.0]], b=[2.0, 0.0])
        structure = UncertaintyStructure.interval(((0,), (1,)))
        prior = Prior(estimates=np.zeros((2, 2)), norm=NormKind.L1)
        sol = solve_rlo_iu_sd(prob, [1.0, 1.0], structure, prior)
        assert sol.objective_value == pytest.approx(0.0, abs=1e-9)
        assert np.allclose(sol.imputed, 0.0, atol=1e-9)

    def test_shrinkage_sampled(self):
        case = example_case(4)
        sol = solve_rlo_iu_sd(case.problem, case.x_hat, case.structure, case.prior)
        rng = np.random.default_rng(10)
        A, b = case.problem.A, case.problem.b
        for _ in range(1000):
            pt = rng.uniform(-10, 10, size=2)
            robust_ok = all(
                float(
                    realized_row_interval(A[i], sol.imputed[i], case.structure.sets[i], pt) @ pt
                )
                >= b[i] - 1e-9
                for i in range(3)
            )
            nominal_ok = bool(np.min(A @ pt - b) >= -1e-9)
            assert not (robust_ok and not nominal_ok)

    def test_certificate_residuals(self):
        case = example_case(4)
        sol = solve_rlo_iu_sd(case.problem, case.x_hat, case.structure, case.prior)
        report = check_certificate(
            ModelKind.RLO_IU_SD, case.problem, case.x_hat, case.structure, sol
        )
        assert report.verdict == "valid"
        assert report.strong_duality_residual <= 1e-9
        for val in report.certificate.residuals.values():
            assert val <= 1e-9

    def test_realized_cost_identity(self):
        case = example_case(4)
        sol = solve_rlo_iu_sd(case.problem, case.x_hat, case.structure, case.prior)
        k = sol.active_index - 1
        assert float(sol.cost @ case.x_hat) - case.problem.b[k] == pytest.approx(0.0, abs=1e-9)

    def test_oracle_agreement_random(self):
        for seed in range(25):
            problem, x, structure, prior, spec = gen.make_iu_sd(seed)
            sol = solve_rlo_iu_sd(problem, x, structure, prior)
            assert sol.status == Status.OPTIMAL
            value, _ = brute_force_min(
                ModelKind.RLO_IU_SD, problem, x, structure, prior, spec
            )
            tol = oracle_tolerance(
                ModelKind.RLO_IU_SD, problem, x, structure, spec, prior=prior
            )
            assert abs(sol.objective_value - value) <= tol, (
                seed,
                sol.objective_value,
                value,
                tol,
            )
