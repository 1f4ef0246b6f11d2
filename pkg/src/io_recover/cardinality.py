"""Recovery of per-row deviation budgets under cardinality-constrained uncertainty.

The activation budget of each row (the smallest budget whose protection
value equals the nominal surplus) is computed greedily; the gap model then
solves one small LP per constraint and the strong-duality model is closed
form in those budgets.
"""

from dataclasses import dataclass, replace

import numpy as np

from .errors import NominalInfeasibleError, NumericalFailureError
from .geometry import gamma_bar, norm_value, realized_row_cardinality
from .lp import LinearProgram, LpRow, LpStatus, solve_lp_batch
from .model import (
    InverseSolution,
    ModelKind,
    Status,
    Variant,
    as_observed,
    canonicalize_omega,
    clamp_budget_prior,
    param_keys,
)
from .errors import PreconditionError

_ZERO_TOL = 1e-9


@dataclass(frozen=True)
class GammaBounds:
    """Activation budgets and the feasibility box they induce.

    i_hat lists (0-based) the rows whose nominal surplus is within reach of
    the protection function.  gamma_lower/gamma_upper bracket each such
    row's activating budgets (equal unless several budgets activate the
    row); theta_upper caps the feasible budget per row: the activation
    bracket's top for rows in i_hat, the column count otherwise.
    """

    i_hat: tuple
    gamma_lower: np.ndarray
    gamma_upper: np.ndarray
    theta_upper: np.ndarray
    details: tuple


@dataclass(frozen=True)
class CcuDgSubresult:
    """Robust surplus of one row, the budgets attaining it, and the row's allocation."""

    t_i: float
    gamma_full: np.ndarray
    phi_i: np.ndarray


def _setup(problem, x_hat, structure):
    if structure.variant != Variant.CARDINALITY:
        raise PreconditionError("budget models need a cardinality structure")
    structure.check_against(problem)
    return as_observed(x_hat).x


def compute_gamma_bounds(problem, structure, x_hat):
    """Per-row activation budgets; raises when the observation is nominal-infeasible."""
    x = _setup(problem, x_hat, structure)
    surplus = problem.surplus(x)
    worst = int(np.argmin(surplus))
    if surplus[worst] < -1e-9:
        raise NominalInfeasibleError(worst, float(-surplus[worst]))
    m = problem.m
    details = []
    lower = np.full(m, np.nan)
    upper = np.full(m, np.nan)
    theta = np.zeros(m)
    i_hat = []
    for i in range(m):
        res = gamma_bar(problem, structure.alpha[i], structure.sets[i], x, i)
        details.append(res)
        if res.kind == "not_applicable":
            theta[i] = float(len(structure.sets[i]))
        else:
            i_hat.append(i)
            lower[i] = res.lower
            upper[i] = res.upper
            theta[i] = res.upper
    return GammaBounds(
        i_hat=tuple(i_hat),
        gamma_lower=lower,
        gamma_upper=upper,
        theta_upper=theta,
        details=tuple(details),
    )


def solve_rlo_ccu_dg(problem, x_hat, structure, omega):
    """Impute budgets minimizing the duality gap.

    Per candidate row: maximize that row's protected loss over (budgets,
    fractional allocation) subject to the feasibility box on budgets and
    the side constraints; the joint LP keeps coupled side constraints exact.
    """
    x = _setup(problem, x_hat, structure)
    m = problem.m
    try:
        gb = compute_gamma_bounds(problem, structure, x_hat)
    except NominalInfeasibleError as exc:
        return InverseSolution(
            model=ModelKind.RLO_CCU_DG,
            status=Status.INFEASIBLE,
            message=str(exc),
        )
    surplus = problem.surplus(x)
    keys = param_keys(ModelKind.RLO_CCU_DG, problem, structure)
    canon = canonicalize_omega(omega, keys, lower_floor=np.zeros(m), upper_cap=gb.theta_upper)
    if not canon.feasible:
        return InverseSolution(
            model=ModelKind.RLO_CCU_DG,
            status=Status.INFEASIBLE,
            message="no budgets satisfy both the feasibility box and the side constraints",
        )

    lps = []
    sizes = [len(structure.sets[i]) for i in range(m)]
    for i in range(m):
        values = np.array([structure.alpha[i, j] * abs(x[j]) for j in structure.sets[i]])
        total = m + sizes[i]
        bounds = tuple(
            [(canon.lower[k], canon.upper[k]) for k in range(m)]
            + [(0.0, 1.0)] * sizes[i]
        )
        objective = np.zeros(total)
        objective[m:] = -values
        rows = []
        budget = np.zeros(total)
        budget[m:] = 1.0
        budget[i] = -1.0
        rows.append(LpRow(budget, "<=", 0.0))
        for r in range(canon.G.shape[0]):
            coeffs = np.zeros(total)
            coeffs[:m] = canon.G[r]
            rows.append(LpRow(coeffs, "<=", canon.h[r]))
        lps.append(LinearProgram(objective=objective, rows=tuple(rows), bounds=bounds))
    outcomes = solve_lp_batch(lps)

    for i, out in enumerate(outcomes):
        if out.status == LpStatus.FAILED:
            raise NumericalFailureError(f"subproblem {i + 1}: {out.error}")
    if outcomes[0].status == LpStatus.INFEASIBLE:
        return InverseSolution(
            model=ModelKind.RLO_CCU_DG,
            status=Status.INFEASIBLE,
            message="no budgets satisfy both the feasibility box and the side constraints",
        )

    t = np.array([surplus[i] + out.value for i, out in enumerate(outcomes)])
    subresults = tuple(
        CcuDgSubresult(
            t_i=float(t[i]),
            gamma_full=outcomes[i].solution[:m].copy(),
            phi_i=outcomes[i].solution[m:].copy(),
        )
        for i in range(m)
    )
    i_star = int(np.argmin(t))
    gamma = subresults[i_star].gamma_full
    cost = realized_row_cardinality(
        problem.A[i_star], structure.alpha[i_star], gamma[i_star], structure.sets[i_star], x
    )
    pi = np.zeros(m)
    pi[i_star] = 1.0

    solution = InverseSolution(
        model=ModelKind.RLO_CCU_DG,
        status=Status.OPTIMAL,
        imputed=gamma,
        cost=cost,
        dual_pi=pi,
        duality_gap=float(t[i_star]),
        active_index=i_star + 1,
        objective_value=float(t[i_star]),
        per_constraint={"t": t},
        subresults=subresults,
    )
    if np.max(np.abs(cost)) <= _ZERO_TOL:
        solution = replace(solution, status=Status.TRIVIAL_DETECTED)
    return solution


def solve_rlo_ccu_sd(problem, x_hat, structure, prior):
    """Closest budgets to the prior achieving exact optimality; closed form.

    Per activatable row the activation premium is the signed budget move
    onto its activation bracket; the row minimizing the norm of the full
    deviation vector is activated, the other activatable rows are capped at
    feasibility, and the rest keep their prior budgets.
    """
    x = _setup(problem, x_hat, structure)
    m = problem.m
    try:
        gb = compute_gamma_bounds(problem, structure, x_hat)
    except NominalInfeasibleError as exc:
        return InverseSolution(
            model=ModelKind.RLO_CCU_SD,
            status=Status.INFEASIBLE,
            message=str(exc),
        )
    if not gb.i_hat:
        return InverseSolution(
            model=ModelKind.RLO_CCU_SD,
            status=Status.INFEASIBLE,
            message="no constraint's surplus is within reach of its protection function",
        )
    gamma_hat = clamp_budget_prior(prior, structure)

    f = np.zeros(m)
    for i in gb.i_hat:
        target = min(max(gamma_hat[i], gb.gamma_lower[i]), gb.gamma_upper[i])
        f[i] = target - gamma_hat[i]
    g = np.minimum(f, 0.0)

    best = None
    for i in gb.i_hat:
        vec = g.copy()
        vec[i] = f[i]
        value = norm_value(vec, prior.norm)
        if best is None or value < best[1] - 1e-15:
            best = (i, value)
    i_star, objective = best

    gamma = gamma_hat.copy()
    for i in gb.i_hat:
        if i == i_star:
            gamma[i] = min(max(gamma_hat[i], gb.gamma_lower[i]), gb.gamma_upper[i])
        else:
            gamma[i] = min(gamma_hat[i], gb.gamma_upper[i])
    cost = realized_row_cardinality(
        problem.A[i_star], structure.alpha[i_star], gamma[i_star], structure.sets[i_star], x
    )
    pi = np.zeros(m)
    pi[i_star] = 1.0

    solution = InverseSolution(
        model=ModelKind.RLO_CCU_SD,
        status=Status.OPTIMAL,
        imputed=gamma,
        cost=cost,
        dual_pi=pi,
        duality_gap=0.0,
        active_index=i_star + 1,
        objective_value=float(objective),
        per_constraint={"f": f, "g": g},
    )
    if np.max(np.abs(cost)) <= _ZERO_TOL:
        solution = replace(solution, status=Status.TRIVIAL_DETECTED)
    return solution
