import numpy as np
import pytest

import gen
from io_recover import (
    ForwardProblem,
    ModelKind,
    NominalInfeasibleError,
    NormKind,
    Prior,
    SideConstraints,
    Status,
    UncertaintyStructure,
    brute_force_min,
    compute_gamma_bounds,
    counters,
    knapsack_continuous,
    oracle_tolerance,
    protection_value,
    realized_row_cardinality,
    solve_rlo_ccu_dg,
    solve_rlo_ccu_sd,
    solve_rlo_iu_sd,
)
from io_recover.fixtures import evaluate_example, example_case


def test_example_5_checks():
    _, solution, checks = evaluate_example(5)
    assert solution.status == Status.OPTIMAL
    for chk in checks:
        assert chk.ok, (chk.name, chk.computed, chk.expected)


def test_example_6_checks():
    _, solution, checks = evaluate_example(6)
    assert solution.status == Status.OPTIMAL
    for chk in checks:
        assert chk.ok, (chk.name, chk.computed, chk.expected)


class TestGammaBounds:
    def test_example_bounds(self):
        case = example_case(5)
        gb = compute_gamma_bounds(case.problem, case.structure, case.x_hat)
        assert gb.i_hat == (0, 2)
        assert gb.gamma_lower[0] == pytest.approx(0.8)
        assert gb.gamma_lower[2] == pytest.approx(1.5)
        assert np.isnan(gb.gamma_lower[1])
        assert gb.theta_upper == pytest.approx([0.8, 1.0, 1.5])

    def test_nominal_infeasible_raises_with_row(self):
        case = example_case(5)
        with pytest.raises(NominalInfeasibleError) as err:
            compute_gamma_bounds(case.problem, case.structure, [9.0, 9.0])
        assert err.value.row == 2

    def test_all_rows_out_of_reach(self):
        prob = ForwardProblem(A=[[2.0, 0.0], [0.0, 2.0]], b=[-10.0, -10.0])
        structure = UncertaintyStructure.cardinality(
            ((0,), (1,)), [[0.1, 0.0], [0.0, 0.1]]
        )
        gb = compute_gamma_bounds(prob, structure, [1.0, 1.0])
        assert gb.i_hat == ()
        assert gb.theta_upper == pytest.approx([1.0, 1.0])

    def test_interval_case_reported(self):
        # one zero product and surplus equal to the full protection
        prob = ForwardProblem(A=[[1.0, 1.0]], b=[0.0])
        structure = UncertaintyStructure.cardinality(((0, 1),), [[1.0, 5.0]])
        gb = compute_gamma_bounds(prob, structure, [2.0, 0.0])
        assert gb.i_hat == (0,)
        assert gb.gamma_lower[0] == pytest.approx(1.0)
        assert gb.gamma_upper[0] == pytest.approx(2.0)
        assert gb.details[0].kind == "interval"

    def test_gamma_bar_counter(self):
        case = example_case(5)
        before = counters()["gamma_bar"]
        compute_gamma_bounds(case.problem, case.structure, case.x_hat)
        assert counters()["gamma_bar"] - before == case.problem.m

    def test_theta_soundness(self):
        rng = np.random.default_rng(15)
        checked = 0
        while checked < 500:
            seed = int(rng.integers(0, 10_000))
            problem, x, structure, _, lo, hi = gen.make_ccu(seed, with_omega=False)
            gb = compute_gamma_bounds(problem, structure, x)
            surplus = problem.surplus(x)
            for _ in range(5):
                i = int(rng.integers(0, problem.m))
                g = float(rng.uniform(0, len(structure.sets[i])))
                in_theta = g <= gb.theta_upper[i] + 1e-9
                prot = protection_value(structure.alpha[i], g, structure.sets[i], x)
                assert in_theta == (prot <= surplus[i] + 1e-9), (seed, i, g)
                checked += 1

    def test_activation_budget_makes_row_active(self):
        rng = np.random.default_rng(33)
        for _ in range(200):
            seed = int(rng.integers(0, 10_000))
            problem, x, structure, _, lo, hi = gen.make_ccu(seed, with_omega=False)
            gb = compute_gamma_bounds(problem, structure, x)
            surplus = problem.surplus(x)
            for i in gb.i_hat:
                prot = protection_value(
                    structure.alpha[i], gb.gamma_lower[i], structure.sets[i], x
                )
                assert prot == pytest.approx(surplus[i], abs=1e-9)


class TestCcuDg:
    def test_lp_and_gamma_bar_counts(self):
        case = example_case(5)
        before = counters()
        solve_rlo_ccu_dg(case.problem, case.x_hat, case.structure, case.omega)
        after = counters()
        assert after["lp_solve"] - before["lp_solve"] == case.problem.m
        assert after["gamma_bar"] - before["gamma_bar"] <= case.problem.m

    def test_zero_budgets_give_min_surplus(self):
        case = example_case(5)
        omega = SideConstraints(G=np.vstack([np.eye(3), -np.eye(3)]), h=np.zeros(6))
        sol = solve_rlo_ccu_dg(case.problem, case.x_hat, case.structure, omega)
        assert sol.duality_gap == pytest.approx(
            float(np.min(case.problem.surplus(case.x_hat))), abs=1e-9
        )

    def test_nominal_infeasible_status(self):
        case = example_case(5)
        sol = solve_rlo_ccu_dg(case.problem, [9.0, 9.0], case.structure, case.omega)
        assert sol.status == Status.INFEASIBLE
        assert "nominal-infeasible" in sol.message

    def test_empty_theta_omega_status(self):
        case = example_case(5)
        # budgets forced above the feasibility box upper bound of row 1 (0.8)
        omega = SideConstraints(G=[[-1.0, 0.0, 0.0]], h=[-0.9])
        sol = solve_rlo_ccu_dg(case.problem, case.x_hat, case.structure, omega)
        assert sol.status == Status.INFEASIBLE

    def test_allocation_matches_knapsack(self):
        case = example_case(5)
        sol = solve_rlo_ccu_dg(case.problem, case.x_hat, case.structure, case.omega)
        absx = np.abs(case.x_hat)
        for i, sub in enumerate(sol.subresults):
            values = np.array(
                [case.structure.alpha[i, j] * absx[j] for j in case.structure.sets[i]]
            )
            _, best = knapsack_continuous(values, sub.gamma_full[i])
            assert float(values @ sub.phi_i) == pytest.approx(best, abs=1e-9)

    def test_realized_cost_identity(self):
        case = example_case(5)
        sol = solve_rlo_ccu_dg(case.problem, case.x_hat, case.structure, case.omega)
        k = sol.active_index - 1
        assert float(sol.cost @ case.x_hat) - case.problem.b[k] == pytest.approx(
            sol.duality_gap, abs=1e-9
        )

    def test_oracle_agreement_random_boxes(self):
        for seed in range(30):
            problem, x, structure, omega, spec = gen.make_ccu_dg(seed)
            sol = solve_rlo_ccu_dg(problem, x, structure, omega)
            value, _ = brute_force_min(
                ModelKind.RLO_CCU_DG, problem, x, structure, omega, spec
            )
            if sol.status == Status.INFEASIBLE:
                assert not np.isfinite(value)
                continue
            tol = oracle_tolerance(ModelKind.RLO_CCU_DG, problem, x, structure, spec)
            assert abs(sol.duality_gap - value) <= tol, (seed, sol.duality_gap, value, tol)


class TestCcuSd:
    def test_zero_lp_invocations(self):
        case = example_case(6)
        before = counters()
        solve_rlo_ccu_sd(case.problem, case.x_hat, case.structure, case.prior)
        after = counters()
        assert after["lp_solve"] - before["lp_solve"] == 0
        assert after["gamma_bar"] - before["gamma_bar"] <= case.problem.m

    def test_prior_admitting_active_row_is_free(self):
        case = example_case(6)
        gb = compute_gamma_bounds(case.problem, case.structure, case.x_hat)
        est = np.array([gb.gamma_lower[0], 0.5, 1.0])  # row 1 already active
        sol = solve_rlo_ccu_sd(case.problem, case.x_hat, case.structure,
                               Prior(estimates=est, norm=NormKind.L1))
        assert sol.objective_value == pytest.approx(0.0, abs=1e-12)
        assert sol.imputed == pytest.approx(est)

    def test_clamping_never_changes_solution(self):
        case = example_case(6)
        sizes = [len(s) for s in case.structure.sets]
        over = Prior(
            estimates=np.array([float(sizes[0]) + 5.0, 1.0, 1.0]), norm=NormKind.L1
        )
        at_cap = Prior(estimates=np.array([float(sizes[0]), 1.0, 1.0]), norm=NormKind.L1)
        a = solve_rlo_ccu_sd(case.problem, case.x_hat, case.structure, over)
        b = solve_rlo_ccu_sd(case.problem, case.x_hat, case.structure, at_cap)
        assert a.active_index == b.active_index
        assert a.objective_value == pytest.approx(b.objective_value, abs=1e-12)
        assert np.allclose(a.imputed, b.imputed)
        assert np.allclose(a.cost, b.cost)

    def test_infeasible_when_no_row_reachable(self):
        prob = ForwardProblem(A=[[2.0, 0.0], [0.0, 2.0]], b=[-10.0, -10.0])
        structure = UncertaintyStructure.cardinality(((0,), (1,)), [[0.1, 0.0], [0.0, 0.1]])
        sol = solve_rlo_ccu_sd(prob, [1.0, 1.0], structure, Prior(estimates=[0.5, 0.5], norm=NormKind.L1))
        assert sol.status == Status.INFEASIBLE

    def test_nominal_infeasible_status(self):
        case = example_case(6)
        sol = solve_rlo_ccu_sd(case.problem, [9.0, 9.0], case.structure, case.prior)
        assert sol.status == Status.INFEASIBLE

    def test_activeness_of_returned_budgets(self):
        for seed in range(40):
            problem, x, structure, prior, _ = gen.make_ccu_sd(seed)
            sol = solve_rlo_ccu_sd(problem, x, structure, prior)
            if sol.status != Status.OPTIMAL:
                continue
            k = sol.active_index - 1
            prot = protection_value(structure.alpha[k], sol.imputed[k], structure.sets[k], x)
            assert prot == pytest.approx(problem.surplus(x)[k], abs=1e-9)

    def test_budget_cap_agrees_with_interval_activation(self):
        # when every activation budget sits at the column count, the budget
        # model and the magnitude model activate the same row
        A = np.array([[1.0, 1.0], [0.0, 2.0]])
        x = np.array([1.0, 1.0])
        alpha = np.array([[0.5, 0.5], [0.0, 0.5]])
        sets = ((0, 1), (1,))
        full0 = 0.5 + 0.5
        full1 = 0.5
        b = np.array([float(A[0] @ x) - full0, float(A[1] @ x) - full1])
        problem = ForwardProblem(A=A, b=b)
        structure = UncertaintyStructure.cardinality(sets, alpha)
        gb = compute_gamma_bounds(problem, structure, x)
        assert gb.gamma_lower[0] == pytest.approx(2.0)
        assert gb.gamma_lower[1] == pytest.approx(1.0)
        ccu = solve_rlo_ccu_sd(
            problem, x, structure, Prior(estimates=[2.0, 1.0], norm=NormKind.L1)
        )
        iu = solve_rlo_iu_sd(
            problem,
            x,
            UncertaintyStructure.interval(sets),
            Prior(estimates=alpha, norm=NormKind.L1),
        )
        assert ccu.objective_value == pytest.approx(0.0, abs=1e-9)
        assert iu.objective_value == pytest.approx(0.0, abs=1e-9)
        assert ccu.active_index == iu.active_index

    def test_realized_rows_nonzero_in_all_orthants_under_a10(self):
        rng = np.random.default_rng(21)
        count = 0
        for seed in range(200):
            problem, x, structure, prior, _ = gen.make_ccu_sd(seed)
            # keep instances satisfying the nontriviality precondition
            ok = all(
                any(abs(problem.A[i, j]) > structure.alpha[i, j] for j in structure.sets[i])
                or any(
                    problem.A[i, j] != 0.0
                    for j in range(problem.n)
                    if j not in structure.sets[i]
                )
                for i in range(problem.m)
            )
            if not ok:
                continue
            sol = solve_rlo_ccu_sd(problem, x, structure, prior)
            if sol.status != Status.OPTIMAL:
                continue
            count += 1
            for signs in np.ndindex(*(2,) * problem.n):
                pt = np.where(np.array(signs) == 0, 1.0, -1.0)
                for i in range(problem.m):
                    row = realized_row_cardinality(
                        problem.A[i], structure.alpha[i], sol.imputed[i], structure.sets[i], pt
                    )
                    assert np.max(np.abs(row)) > 1e-9
        assert count >= 50

    def test_oracle_agreement_random(self):
        for seed in range(30):
            problem, x, structure, prior, spec = gen.make_ccu_sd(seed)
            sol = solve_rlo_ccu_sd(problem, x, structure, prior)
            value, _ = brute_force_min(
                ModelKind.RLO_CCU_SD, problem, x, structure, prior, spec
            )
            if sol.status != Status.OPTIMAL:
                assert not np.isfinite(value)
                continue
            tol = oracle_tolerance(
                ModelKind.RLO_CCU_SD, problem, x, structure, spec, prior=prior
            )
            assert abs(sol.objective_value - value) <= tol, (
                seed,
                sol.objective_value,
                value,
                tol,
            )
