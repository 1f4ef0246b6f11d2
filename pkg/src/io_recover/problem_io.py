"""JSON problem and solution documents.

Schema version "1".  Matrices are row-major lists of lists, numbers are
plain decimals, constraint and column indices in documents are 1-based.
Unknown fields are rejected so fixture typos fail loudly.
"""

import json
import re
from dataclasses import dataclass

import numpy as np

from .errors import ProblemFileError
from .geometry import NormKind
from .model import (
    ForwardProblem,
    InverseSolution,
    ModelKind,
    Prior,
    SideConstraints,
    Status,
    UncertaintyStructure,
    param_keys,
)

SCHEMA_VERSION = "1"

_TOP_FIELDS = {
    "schema_version",
    "model",
    "A",
    "b",
    "x_hat",
    "uncertain_columns",
    "alpha",
    "omega",
    "prior",
}
_OMEGA_FIELDS = {"G", "h", "variable_order"}
_PRIOR_FIELDS = {"estimates", "xi", "norm"}

_VAR_RE = re.compile(r"^(a|alpha)\[(\d+)\]\[(\d+)\]$|^(gamma)\[(\d+)\]$")


@dataclass(frozen=True)
class ProblemBundle:
    model: ModelKind
    problem: ForwardProblem
    x_hat: np.ndarray
    structure: UncertaintyStructure
    omega: SideConstraints = None
    prior: Prior = None

    def __eq__(self, other):
        return (
            isinstance(other, ProblemBundle)
            and self.model == other.model
            and self.problem == other.problem
            and np.array_equal(self.x_hat, other.x_hat)
            and self.structure == other.structure
            and self.omega == other.omega
            and self.prior == other.prior
        )


def _require(doc, field, kind=None):
    if field not in doc:
        raise ProblemFileError(field, "missing required field")
    value = doc[field]
    if kind is not None and not isinstance(value, kind):
        raise ProblemFileError(field, f"expected {kind.__name__}")
    return value


def _matrix(doc, field, rows=None, cols=None):
    raw = _require(doc, field, list)
    try:
        arr = np.array(raw, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ProblemFileError(field, f"not numeric: {exc}") from None
    if arr.ndim != 2:
        raise ProblemFileError(field, "must be a list of rows")
    if rows is not None and arr.shape[0] != rows:
        raise ProblemFileError(field, f"expected {rows} rows, got {arr.shape[0]}")
    if cols is not None and arr.shape[1] != cols:
        raise ProblemFileError(field, f"expected {cols} columns, got {arr.shape[1]}")
    return arr


def _vector(doc, field, size=None):
    raw = _require(doc, field, list)
    try:
        arr = np.array(raw, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ProblemFileError(field, f"not numeric: {exc}") from None
    if arr.ndim != 1:
        raise ProblemFileError(field, "must be a flat list")
    if size is not None and arr.size != size:
        raise ProblemFileError(field, f"expected length {size}, got {arr.size}")
    return arr


def _parse_variable_order(names, model):
    keys = []
    for name in names:
        match = _VAR_RE.match(name)
        if not match:
            raise ProblemFileError("omega.variable_order", f"cannot parse {name!r}")
        if match.group(1):
            kind, i, j = match.group(1), int(match.group(2)) - 1, int(match.group(3)) - 1
            expected = "a" if model.family == "nlo" else "alpha"
            if kind != expected:
                raise ProblemFileError("omega.variable_order", f"{name!r} does not fit model {model.value}")
            keys.append((kind, i, j))
        else:
            if model.family != "ccu":
                raise ProblemFileError("omega.variable_order", f"{name!r} does not fit model {model.value}")
            keys.append(("gamma", int(match.group(5)) - 1))
    return tuple(keys)


def parse_problem(doc):
    """Build the solver inputs from a problem document (strict)."""
    if not isinstance(doc, dict):
        raise ProblemFileError("document", "top level must be an object")
    unknown = set(doc) - _TOP_FIELDS
    if unknown:
        raise ProblemFileError(sorted(unknown)[0], "unknown field")
    version = _require(doc, "schema_version", str)
    if version != SCHEMA_VERSION:
        raise ProblemFileError("schema_version", f"unsupported version {version!r}")
    model_raw = _require(doc, "model", str)
    try:
        model = ModelKind(model_raw)
    except ValueError:
        raise ProblemFileError("model", f"unknown model {model_raw!r}") from None

    A = _matrix(doc, "A")
    m, n = A.shape
    b = _vector(doc, "b", m)
    x_hat = _vector(doc, "x_hat", n)
    problem = ForwardProblem(A=A, b=b)

    sets = None
    if "uncertain_columns" in doc:
        raw_sets = _require(doc, "uncertain_columns", list)
        if len(raw_sets) != m:
            raise ProblemFileError("uncertain_columns", f"expected {m} rows")
        sets = []
        for i, row in enumerate(raw_sets):
            if not isinstance(row, list):
                raise ProblemFileError("uncertain_columns", f"row {i + 1} must be a list")
            cols = []
            for j in row:
                if not isinstance(j, int) or j < 1 or j > n:
                    raise ProblemFileError(
                        "uncertain_columns", f"row {i + 1}: column {j!r} outside 1..{n}"
                    )
                cols.append(j - 1)
            sets.append(tuple(cols))
        sets = tuple(sets)

    alpha_rows = None
    if "alpha" in doc:
        if sets is None:
            raise ProblemFileError("alpha", "needs uncertain_columns")
        raw_alpha = _require(doc, "alpha", list)
        if len(raw_alpha) != m:
            raise ProblemFileError("alpha", f"expected {m} rows")
        alpha_rows = np.zeros((m, n))
        for i, row in enumerate(raw_alpha):
            if not isinstance(row, list) or len(row) != len(sets[i]):
                raise ProblemFileError(
                    "alpha", f"row {i + 1} must list one value per uncertain column"
                )
            for j, val in zip(sets[i], row):
                alpha_rows[i, j] = float(val)

    if model.family == "nlo":
        structure = UncertaintyStructure.nominal()
        if sets is not None:
            raise ProblemFileError("uncertain_columns", f"not used by model {model.value}")
    elif model.family == "iu":
        if sets is None:
            raise ProblemFileError("uncertain_columns", f"required by model {model.value}")
        structure = UncertaintyStructure.interval(sets)
    else:
        if sets is None:
            raise ProblemFileError("uncertain_columns", f"required by model {model.value}")
        if alpha_rows is None:
            raise ProblemFileError("alpha", f"required by model {model.value}")
        structure = UncertaintyStructure.cardinality(sets, alpha_rows)
    structure.check_against(problem)

    omega = None
    if "omega" in doc:
        omega_doc = _require(doc, "omega", dict)
        unknown = set(omega_doc) - _OMEGA_FIELDS
        if unknown:
            raise ProblemFileError(f"omega.{sorted(unknown)[0]}", "unknown field")
        G = _matrix(omega_doc, "G")
        h = _vector(omega_doc, "h", G.shape[0])
        variable_map = None
        if "variable_order" in omega_doc:
            names = _require(omega_doc, "variable_order", list)
            variable_map = _parse_variable_order(names, model)
        omega = SideConstraints(G=G, h=h, variable_map=variable_map)
        omega.arranged(param_keys(model, problem, structure))

    prior = None
    xi = None
    norm = NormKind.L2
    if "prior" in doc:
        prior_doc = _require(doc, "prior", dict)
        unknown = set(prior_doc) - _PRIOR_FIELDS
        if unknown:
            raise ProblemFileError(f"prior.{sorted(unknown)[0]}", "unknown field")
        if "xi" in prior_doc:
            xi = _vector(prior_doc, "xi", m)
        if "norm" in prior_doc:
            raw_norm = _require(prior_doc, "norm", str)
            try:
                norm = NormKind(raw_norm)
            except ValueError:
                raise ProblemFileError("prior.norm", f"unknown norm {raw_norm!r}") from None
        if model == ModelKind.NLO_SD:
            estimates = (
                _matrix(prior_doc, "estimates", m, n) if "estimates" in prior_doc else A.copy()
            )
            prior = Prior(estimates=estimates, xi=xi, norm=norm)
        elif model == ModelKind.RLO_CCU_SD:
            estimates = _vector(prior_doc, "estimates", m)
            prior = Prior(estimates=estimates, xi=xi, norm=norm)
        elif model == ModelKind.RLO_IU_SD:
            if "estimates" in prior_doc:
                raise ProblemFileError(
                    "prior.estimates", "magnitude priors belong in the alpha field"
                )
        else:
            raise ProblemFileError("prior", f"not used by model {model.value}")
    if model == ModelKind.RLO_IU_SD:
        if alpha_rows is None:
            raise ProblemFileError("alpha", "required by model rlo-iu-sd (prior magnitudes)")
        prior = Prior(estimates=alpha_rows, xi=xi, norm=norm)
    if model.is_sd and prior is None:
        raise ProblemFileError("prior", f"required by model {model.value}")
    if model == ModelKind.RLO_IU_DG and alpha_rows is not None:
        raise ProblemFileError("alpha", "not used by model rlo-iu-dg (magnitudes are imputed)")

    return ProblemBundle(
        model=model, problem=problem, x_hat=x_hat, structure=structure, omega=omega, prior=prior
    )


def serialize_problem(bundle):
    doc = {
        "schema_version": SCHEMA_VERSION,
        "model": bundle.model.value,
        "A": bundle.problem.A.tolist(),
        "b": bundle.problem.b.tolist(),
        "x_hat": np.asarray(bundle.x_hat, dtype=float).tolist(),
    }
    structure = bundle.structure
    if structure.variant.value != "nominal":
        doc["uncertain_columns"] = [[j + 1 for j in s] for s in structure.sets]
    if structure.variant.value == "cardinality":
        doc["alpha"] = [
            [float(structure.alpha[i, j]) for j in s] for i, s in enumerate(structure.sets)
        ]
    if bundle.model == ModelKind.RLO_IU_SD and bundle.prior is not None:
        doc["alpha"] = [
            [float(bundle.prior.estimates[i, j]) for j in s]
            for i, s in enumerate(structure.sets)
        ]
    if bundle.omega is not None:
        omega_doc = {"G": bundle.omega.G.tolist(), "h": bundle.omega.h.tolist()}
        if bundle.omega.variable_map is not None:
            names = []
            for key in bundle.omega.variable_map:
                if key[0] == "gamma":
                    names.append(f"gamma[{key[1] + 1}]")
                else:
                    names.append(f"{key[0]}[{key[1] + 1}][{key[2] + 1}]")
            omega_doc["variable_order"] = names
        doc["omega"] = omega_doc
    if bundle.prior is not None:
        prior_doc = {}
        if bundle.model != ModelKind.RLO_IU_SD:
            prior_doc["estimates"] = bundle.prior.estimates.tolist()
        if bundle.prior.xi is not None:
            prior_doc["xi"] = bundle.prior.xi.tolist()
        prior_doc["norm"] = bundle.prior.norm.value
        doc["prior"] = prior_doc
    return doc


def _imputed_field(model):
    return {"nlo": "A", "iu": "alpha", "ccu": "gamma"}[model.family]


def serialize_solution(bundle, solution, report=None, validation=None):
    doc = {
        "schema_version": SCHEMA_VERSION,
        "model": bundle.model.value,
        "status": solution.status.value,
        "active_index": solution.active_index,
        "duality_gap": solution.duality_gap,
        "objective_value": solution.objective_value,
        "cost": None if solution.cost is None else np.asarray(solution.cost).tolist(),
        "dual_pi": None if solution.dual_pi is None else np.asarray(solution.dual_pi).tolist(),
        "imputed": None,
        "per_constraint": {k: np.asarray(v).tolist() for k, v in solution.per_constraint.items()},
        "message": solution.message,
    }
    if solution.imputed is not None:
        doc["imputed"] = {_imputed_field(bundle.model): np.asarray(solution.imputed).tolist()}
    if solution.remediations:
        items = []
        for r in solution.remediations:
            entry = {"kind": type(r).__name__, "row": r.row + 1, "note": r.note}
            if hasattr(r, "col"):
                entry["col"] = r.col + 1
                entry["heuristic"] = r.heuristic
            if hasattr(r, "delta"):
                entry["delta"] = r.delta
            if hasattr(r, "weight"):
                entry["weight"] = r.weight
            items.append(entry)
        doc["remediations"] = items
    if report is not None:
        doc["certificate"] = {
            "verdict": report.verdict,
            "reason": report.reason,
            "residuals": dict(report.certificate.residuals),
            "nontriviality": dict(report.nontriviality),
        }
    if validation is not None:
        doc["validation"] = [
            {"check": e.check, "level": e.level, "rows": list(e.rows), "message": e.message}
            for e in validation.entries
        ]
    return doc


_SOLUTION_FIELDS = {
    "schema_version",
    "model",
    "status",
    "active_index",
    "duality_gap",
    "objective_value",
    "cost",
    "dual_pi",
    "imputed",
    "per_constraint",
    "message",
    "remediations",
    "certificate",
    "validation",
}


def parse_solution(doc, bundle):
    """Rebuild an InverseSolution from a solution document (for verify/regions)."""
    if not isinstance(doc, dict):
        raise ProblemFileError("document", "top level must be an object")
    unknown = set(doc) - _SOLUTION_FIELDS
    if unknown:
        raise ProblemFileError(sorted(unknown)[0], "unknown field")
    model_raw = _require(doc, "model", str)
    try:
        model = ModelKind(model_raw)
    except ValueError:
        raise ProblemFileError("model", f"unknown model {model_raw!r}") from None
    if model != bundle.model:
        raise ProblemFileError("model", f"solution is for {model.value}, problem is {bundle.model.value}")
    status_raw = _require(doc, "status", str)
    try:
        status = Status(status_raw)
    except ValueError:
        raise ProblemFileError("status", f"unknown status {status_raw!r}") from None
    imputed = None
    if doc.get("imputed") is not None:
        field = _imputed_field(model)
        if field not in doc["imputed"]:
            raise ProblemFileError("imputed", f"expected field {field!r}")
        imputed = np.array(doc["imputed"][field], dtype=float)
    cost = None if doc.get("cost") is None else np.array(doc["cost"], dtype=float)
    pi = None if doc.get("dual_pi") is None else np.array(doc["dual_pi"], dtype=float)
    per_constraint = {
        k: np.array(v, dtype=float) for k, v in (doc.get("per_constraint") or {}).items()
    }
    return InverseSolution(
        model=model,
        status=status,
        imputed=imputed,
        cost=cost,
        dual_pi=pi,
        duality_gap=doc.get("duality_gap"),
        active_index=doc.get("active_index"),
        objective_value=doc.get("objective_value"),
        per_constraint=per_constraint,
        message=doc.get("message"),
    )


def load_json(path):
    try:
        with open(path, "r", encoding="utf-8") as fp:
            return json.load(fp)
    except OSError as exc:
        raise ProblemFileError(str(path), f"cannot read: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ProblemFileError(str(path), f"invalid JSON at line {exc.lineno}: {exc.msg}") from None


def _np_default(value):
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"not JSON-serializable: {type(value).__name__}")


def dump_json(path, doc):
    with open(path, "w", encoding="utf-8") as fp:
        json.dump(doc, fp, indent=2, sort_keys=False, default=_np_default)
        fp.write("\n")
