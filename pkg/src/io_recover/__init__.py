"""Inverse solvers that recover constraint and uncertainty-set parameters
from an observed decision of a linear program (minimize c'x s.t. Ax >= b).

Six models: constraint-matrix, interval-magnitude, and budget recovery,
each minimizing the duality gap or enforcing strong duality against a
prior.  Every solve reduces to closed forms or at most one small LP per
constraint, handled by the built-in dense simplex.
"""

from .cardinality import (
    CcuDgSubresult,
    GammaBounds,
    compute_gamma_bounds,
    solve_rlo_ccu_dg,
    solve_rlo_ccu_sd,
)
from .errors import (
    DimensionError,
    GridTooLargeError,
    InverseLpError,
    NominalInfeasibleError,
    NumericalFailureError,
    PreconditionError,
    ProblemFileError,
    UnsupportedNormError,
    ZeroObservationError,
    ZeroVectorError,
)
from .geometry import (
    GammaBarResult,
    NormKind,
    SortedUncertainty,
    aux_optimum,
    dual_norm,
    dual_norm_maximizer,
    gamma_bar,
    knapsack_continuous,
    project_halfspace,
    project_hyperplane,
    protection_value,
    realized_row_cardinality,
    realized_row_interval,
    sorted_uncertainty,
)
from .instrument import counters, reset_counters
from .interval import IuSubresult, solve_rlo_iu_dg, solve_rlo_iu_sd
from .lp import LinearProgram, LpOutcome, LpRow, LpStatus, solve_lp, solve_lp_batch
from .model import (
    Certificate,
    ForwardProblem,
    InverseSolution,
    ModelKind,
    ObservedPoint,
    Prior,
    PriorEpsilon,
    RhsEpsilon,
    SideConstraints,
    Status,
    UncertaintyStructure,
    ValidationReport,
    Variant,
    WeightBoost,
    validate,
)
from .nominal import NloDgSubresult, PerturbedSolve, perturb_and_resolve, solve_nlo_dg, solve_nlo_sd
from .verify import (
    CertificateReport,
    GridOracleSpec,
    brute_force_min,
    check_certificate,
    diagnose_trivial,
    oracle_tolerance,
)

__version__ = "0.1.0"

SOLVERS = {
    ModelKind.NLO_DG: solve_nlo_dg,
    ModelKind.NLO_SD: solve_nlo_sd,
    ModelKind.RLO_IU_DG: solve_rlo_iu_dg,
    ModelKind.RLO_IU_SD: solve_rlo_iu_sd,
    ModelKind.RLO_CCU_DG: solve_rlo_ccu_dg,
    ModelKind.RLO_CCU_SD: solve_rlo_ccu_sd,
}


def solve(model, problem, x_hat, structure=None, omega=None, prior=None):
    """Dispatch to the solver for `model` with the arguments it needs."""
    model = ModelKind(model)
    structure = structure if structure is not None else UncertaintyStructure.nominal()
    if model == ModelKind.NLO_DG:
        return solve_nlo_dg(problem, x_hat, omega)
    if model == ModelKind.NLO_SD:
        return solve_nlo_sd(problem, x_hat, prior)
    if model == ModelKind.RLO_IU_DG:
        return solve_rlo_iu_dg(problem, x_hat, structure, omega)
    if model == ModelKind.RLO_IU_SD:
        return solve_rlo_iu_sd(problem, x_hat, structure, prior)
    if model == ModelKind.RLO_CCU_DG:
        return solve_rlo_ccu_dg(problem, x_hat, structure, omega)
    return solve_rlo_ccu_sd(problem, x_hat, structure, prior)
