"""Shared domain types, dimension/assumption validation, and the solution model.

Constraint sense is fixed: minimize c'x subject to Ax >= b.  Callers with
<=/maximize problems must pre-negate.  Library indices are 0-based; the
`active_index` field of InverseSolution and all rendered reports are
1-based, matching the usual presentation of small worked instances.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DimensionError
from .geometry import NormKind


class ModelKind(str, Enum):
    NLO_DG = "nlo-dg"
    NLO_SD = "nlo-sd"
    RLO_IU_DG = "rlo-iu-dg"
    RLO_IU_SD = "rlo-iu-sd"
    RLO_CCU_DG = "rlo-ccu-dg"
    RLO_CCU_SD = "rlo-ccu-sd"

    @property
    def is_dg(self):
        return self.value.endswith("-dg")

    @property
    def is_sd(self):
        return self.value.endswith("-sd")

    @property
    def family(self):
        if self.value.startswith("nlo"):
            return "nlo"
        return "iu" if "-iu-" in self.value else "ccu"


class Status(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED_GAP = "unbounded-gap"
    TRIVIAL_DETECTED = "trivial-detected"


class Variant(str, Enum):
    NOMINAL = "nominal"
    INTERVAL = "interval"
    CARDINALITY = "cardinality"


def _freeze(arr):
    arr = np.asarray(arr, dtype=float)
    arr.setflags(write=False)
    return arr


def _require_finite(name, arr):
    if not np.all(np.isfinite(arr)):
        raise DimensionError(name, "entries must be finite")


@dataclass(frozen=True, eq=False)
class ForwardProblem:
    """Nominal data of the forward problem: minimize c'x s.t. Ax >= b."""

    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if A.ndim != 2:
            raise DimensionError("A", "must be a matrix")
        if b.ndim != 1:
            raise DimensionError("b", "must be a vector")
        if A.shape[0] != b.size:
            raise DimensionError("b", f"length {b.size} does not match {A.shape[0]} rows of A")
        if A.shape[0] < 1 or A.shape[1] < 1:
            raise DimensionError("A", "needs at least one row and one column")
        _require_finite("A", A)
        _require_finite("b", b)
        object.__setattr__(self, "A", _freeze(A))
        object.__setattr__(self, "b", _freeze(b))

    @property
    def m(self):
        return self.A.shape[0]

    @property
    def n(self):
        return self.A.shape[1]

    def surplus(self, x):
        """Per-row slack A x - b at a point."""
        return self.A @ np.asarray(x, dtype=float) - self.b

    def __eq__(self, other):
        return (
            isinstance(other, ForwardProblem)
            and np.array_equal(self.A, other.A)
            and np.array_equal(self.b, other.b)
        )


@dataclass(frozen=True, eq=False)
class ObservedPoint:
    x: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if x.ndim != 1:
            raise DimensionError("x_hat", "must be a vector")
        _require_finite("x_hat", x)
        object.__setattr__(self, "x", _freeze(x))

    def __eq__(self, other):
        return isinstance(other, ObservedPoint) and np.array_equal(self.x, other.x)


def as_observed(x):
    return x if isinstance(x, ObservedPoint) else ObservedPoint(np.asarray(x, dtype=float))


@dataclass(frozen=True, eq=False)
class UncertaintyStructure:
    """Which coefficients of each row are uncertain, and how.

    For the interval variant the per-row magnitudes are the quantity being
    imputed, so `alpha` stays None.  For the cardinality variant `alpha`
    holds the fixed magnitudes (dense m x n; entries outside the column
    sets are ignored).
    """

    variant: Variant
    sets: tuple = ()
    alpha: np.ndarray = None

    def __post_init__(self):
        sets = tuple(tuple(sorted(set(int(j) for j in s))) for s in self.sets)
        for i, s in enumerate(sets):
            for j in s:
                if j < 0:
                    raise DimensionError("uncertain_columns", f"row {i + 1} has negative column index")
        object.__setattr__(self, "sets", sets)
        if self.alpha is not None:
            alpha = np.asarray(self.alpha, dtype=float)
            if alpha.ndim != 2:
                raise DimensionError("alpha", "must be a matrix")
            _require_finite("alpha", alpha)
            for i, s in enumerate(sets):
                for j in s:
                    if alpha[i, j] < 0.0:
                        raise DimensionError("alpha", f"alpha[{i + 1}][{j + 1}] is negative")
            object.__setattr__(self, "alpha", _freeze(alpha))

    @classmethod
    def nominal(cls):
        return cls(variant=Variant.NOMINAL)

    @classmethod
    def interval(cls, sets):
        return cls(variant=Variant.INTERVAL, sets=tuple(sets))

    @classmethod
    def cardinality(cls, sets, alpha):
        return cls(variant=Variant.CARDINALITY, sets=tuple(sets), alpha=alpha)

    def check_against(self, problem):
        if self.variant == Variant.NOMINAL:
            return
        if len(self.sets) != problem.m:
            raise DimensionError("uncertain_columns", f"{len(self.sets)} rows for m = {problem.m}")
        for i, s in enumerate(self.sets):
            for j in s:
                if j >= problem.n:
                    raise DimensionError(
                        "uncertain_columns", f"row {i + 1} references column {j + 1} > n = {problem.n}"
                    )
        if self.variant == Variant.CARDINALITY:
            if self.alpha is None:
                raise DimensionError("alpha", "cardinality structure needs fixed deviation magnitudes")
            if self.alpha.shape != (problem.m, problem.n):
                raise DimensionError("alpha", f"shape {self.alpha.shape} != ({problem.m}, {problem.n})")

    def __eq__(self, other):
        if not isinstance(other, UncertaintyStructure):
            return False
        if self.variant != other.variant or self.sets != other.sets:
            return False
        if (self.alpha is None) != (other.alpha is None):
            return False
        return self.alpha is None or np.array_equal(self.alpha, other.alpha)


def param_keys(model, problem, structure):
    """Natural flattening order of the imputed parameters for a model."""
    if model.family == "nlo":
        return [("a", i, j) for i in range(problem.m) for j in range(problem.n)]
    if model.family == "iu":
        return [("alpha", i, j) for i in range(problem.m) for j in structure.sets[i]]
    return [("gamma", i) for i in range(problem.m)]


@dataclass(frozen=True, eq=False)
class SideConstraints:
    """Polyhedron {z : G z <= h} over the flattened imputed parameters.

    Columns follow the natural flattening order unless `variable_map`
    gives an explicit key per column (keys as produced by param_keys).
    """

    G: np.ndarray
    h: np.ndarray
    variable_map: tuple = None

    def __post_init__(self):
        G = np.asarray(self.G, dtype=float)
        h = np.asarray(self.h, dtype=float)
        if G.ndim != 2:
            raise DimensionError("omega.G", "must be a matrix")
        if h.ndim != 1 or h.size != G.shape[0]:
            raise DimensionError("omega.h", f"length {h.size} does not match {G.shape[0]} rows of G")
        _require_finite("omega.G", G)
        _require_finite("omega.h", h)
        object.__setattr__(self, "G", _freeze(G))
        object.__setattr__(self, "h", _freeze(h))
        if self.variable_map is not None:
            vm = tuple(tuple(k) for k in self.variable_map)
            if len(vm) != G.shape[1]:
                raise DimensionError(
                    "omega.variable_order", f"{len(vm)} names for {G.shape[1]} columns of G"
                )
            object.__setattr__(self, "variable_map", vm)

    @property
    def p(self):
        return self.G.shape[1]

    def arranged(self, keys):
        """(G, h) with columns permuted into the natural key order."""
        if self.variable_map is None:
            if self.p != len(keys):
                raise DimensionError("omega.G", f"{self.p} columns for {len(keys)} parameters")
            return self.G, self.h
        index = {k: pos for pos, k in enumerate(keys)}
        if len(self.variable_map) != len(keys) or set(self.variable_map) != set(keys):
            raise DimensionError("omega.variable_order", "must name each imputed parameter exactly once")
        perm = [index[k] for k in self.variable_map]
        G = np.zeros((self.G.shape[0], len(keys)))
        G[:, perm] = self.G
        return G, self.h

    def __eq__(self, other):
        return (
            isinstance(other, SideConstraints)
            and np.array_equal(self.G, other.G)
            and np.array_equal(self.h, other.h)
            and self.variable_map == other.variable_map
        )


@dataclass(frozen=True)
class CanonicalOmega:
    """Side constraints split into per-parameter bounds plus coupled rows."""

    lower: np.ndarray
    upper: np.ndarray
    G: np.ndarray
    h: np.ndarray
    feasible: bool

    @property
    def has_coupled(self):
        return self.G.shape[0] > 0


def canonicalize_omega(omega, keys, lower_floor=None, upper_cap=None):
    """Merge single-parameter rows of omega into bounds; keep the rest.

    lower_floor/upper_cap are model-intrinsic bounds (e.g. deviations >= 0,
    budgets within the per-row column count) merged in as well.
    """
    p = len(keys)
    lo = np.full(p, -np.inf)
    hi = np.full(p, np.inf)
    if lower_floor is not None:
        lo = np.maximum(lo, np.asarray(lower_floor, dtype=float))
    if upper_cap is not None:
        hi = np.minimum(hi, np.asarray(upper_cap, dtype=float))
    coupled = []
    coupled_rhs = []
    feasible = True
    if omega is not None:
        G, h = omega.arranged(keys)
        for r in range(G.shape[0]):
            nz = np.flatnonzero(G[r])
            if nz.size == 0:
                if h[r] < -1e-9:
                    feasible = False
                continue
            if nz.size == 1:
                j = int(nz[0])
                g = G[r, j]
                if g > 0:
                    hi[j] = min(hi[j], h[r] / g)
                else:
                    lo[j] = max(lo[j], h[r] / g)
            else:
                coupled.append(G[r])
                coupled_rhs.append(h[r])
    if np.any(lo > hi + 1e-9):
        feasible = False
    G = np.array(coupled) if coupled else np.zeros((0, p))
    h = np.array(coupled_rhs) if coupled_rhs else np.zeros(0)
    return CanonicalOmega(lower=lo, upper=hi, G=G, h=h, feasible=feasible)


def omega_couples_rows(omega, keys):
    """True when some side-constraint row ties parameters of different forward rows."""
    if omega is None:
        return False
    G, _ = omega.arranged(keys)
    for r in range(G.shape[0]):
        rows_touched = {keys[int(j)][1] for j in np.flatnonzero(G[r])}
        if len(rows_touched) > 1:
            return True
    return False


@dataclass(frozen=True, eq=False)
class Prior:
    """Prior estimates of the imputed parameters with per-row weights.

    estimates is m x n (per-row vectors) for matrix/deviation recovery and
    length m for budget recovery.  Weights default to all ones.
    """

    estimates: np.ndarray
    xi: np.ndarray = None
    norm: NormKind = NormKind.L2

    def __post_init__(self):
        est = np.asarray(self.estimates, dtype=float)
        _require_finite("prior.estimates", est)
        object.__setattr__(self, "estimates", _freeze(est))
        if self.xi is not None:
            xi = np.asarray(self.xi, dtype=float)
            if xi.ndim != 1:
                raise DimensionError("prior.xi", "must be a vector")
            _require_finite("prior.xi", xi)
            if np.any(xi < 0.0):
                raise DimensionError("prior.xi", "weights must be nonnegative")
            object.__setattr__(self, "xi", _freeze(xi))
        object.__setattr__(self, "norm", NormKind(self.norm))

    def weights(self, m):
        if self.xi is None:
            return np.ones(m)
        if self.xi.size != m:
            raise DimensionError("prior.xi", f"length {self.xi.size} != m = {m}")
        return np.asarray(self.xi, dtype=float)

    def __eq__(self, other):
        if not isinstance(other, Prior):
            return False
        if self.norm != other.norm:
            return False
        if not np.array_equal(self.estimates, other.estimates):
            return False
        a, b = self.xi, other.xi
        if a is None and b is None:
            return True
        if a is None:
            return bool(np.all(b == 1.0))
        if b is None:
            return bool(np.all(a == 1.0))
        return np.array_equal(a, b)


@dataclass(frozen=True)
class RhsEpsilon:
    """Perturb b[row] by delta before re-solving."""

    row: int
    delta: float
    note: str = ""


@dataclass(frozen=True)
class PriorEpsilon:
    """Perturb the prior estimate at (row, col) by delta; heuristic suggestion."""

    row: int
    col: int
    delta: float
    heuristic: bool = True
    note: str = ""


@dataclass(frozen=True)
class WeightBoost:
    """Set the weight of `row` to `weight` so another row becomes the active one."""

    row: int
    weight: float
    note: str = ""


@dataclass(frozen=True)
class Certificate:
    """Reconstructed auxiliary primal block, dual block, and named residuals."""

    aux: dict
    dual_aux: dict
    residuals: dict


@dataclass(frozen=True, eq=False)
class InverseSolution:
    """Result of one inverse solve.

    `active_index` is 1-based.  `duality_gap` is the minimized gap for the
    gap models and 0 for the strong-duality models; `objective_value` is
    the gap or the prior deviation respectively.  `per_constraint` holds
    the per-row diagnostics (t, or f and g).
    """

    model: ModelKind
    status: Status
    imputed: np.ndarray = None
    cost: np.ndarray = None
    dual_pi: np.ndarray = None
    duality_gap: float = None
    active_index: int = None
    objective_value: float = None
    per_constraint: dict = field(default_factory=dict)
    subresults: tuple = None
    remediations: tuple = ()
    ray: np.ndarray = None
    message: str = None


# Assumption checks.  Levels: "pass", "warn" (documented circumvention or
# not certifiable), "fail" (formally violated).

@dataclass(frozen=True)
class ValidationEntry:
    check: str
    level: str
    rows: tuple = ()
    message: str = ""


@dataclass(frozen=True)
class ValidationReport:
    entries: tuple

    @property
    def ok(self):
        return not any(e.level == "fail" for e in self.entries)

    def level(self, check):
        worst = "pass"
        for e in self.entries:
            if e.check == check:
                if e.level == "fail":
                    return "fail"
                if e.level == "warn":
                    worst = "warn"
        return worst

    def failures(self):
        return tuple(e for e in self.entries if e.level == "fail")

    def warnings(self):
        return tuple(e for e in self.entries if e.level == "warn")


def _entry(check, level, rows=(), message=""):
    return ValidationEntry(check=check, level=level, rows=tuple(int(r) + 1 for r in rows), message=message)


def _check_dimensions(problem, x, structure, model, omega, prior):
    if x.x.size != problem.n:
        raise DimensionError("x_hat", f"length {x.x.size} != n = {problem.n}")
    structure.check_against(problem)
    if model.family == "iu" and structure.variant != Variant.INTERVAL:
        raise DimensionError("uncertain_columns", "interval models need an interval structure")
    if model.family == "ccu" and structure.variant != Variant.CARDINALITY:
        raise DimensionError("alpha", "budget models need a cardinality structure")
    if omega is not None:
        keys = param_keys(model, problem, structure)
        omega.arranged(keys)
    if prior is not None:
        prior.weights(problem.m)
        est = prior.estimates
        if model == ModelKind.RLO_CCU_SD:
            if est.ndim != 1 or est.size != problem.m:
                raise DimensionError("prior.estimates", f"budget prior must have length m = {problem.m}")
        elif model in (ModelKind.NLO_SD, ModelKind.RLO_IU_SD):
            if est.shape != (problem.m, problem.n):
                raise DimensionError(
                    "prior.estimates", f"shape {est.shape} != ({problem.m}, {problem.n})"
                )


def validate(problem, x_hat, structure, model, omega=None, prior=None):
    """Check dimensions (hard errors) and the model's standing assumptions.

    Returns per-assumption pass/warn/fail entries.  A zero right-hand side
    under strong duality is a warn, not an error: the solve still runs and
    trivial outputs are detected and remediated downstream.
    """
    x = as_observed(x_hat)
    model = ModelKind(model)
    _check_dimensions(problem, x, structure, model, omega, prior)
    entries = []
    m, n = problem.m, problem.n

    if model == ModelKind.NLO_DG:
        bad, uncertifiable = [], []
        keys = param_keys(model, problem, structure)
        coupled = omega_couples_rows(omega, keys) if omega is not None else False
        canon = None if omega is None else canonicalize_omega(omega, keys)
        for i in range(m):
            if problem.b[i] > 0:
                continue
            if omega is None:
                bad.append(i)
                continue
            if coupled:
                uncertifiable.append(i)
                continue
            cols = [keys.index(("a", i, j)) for j in range(n)]
            zero_allowed = all(
                canon.lower[c] <= 1e-12 and canon.upper[c] >= -1e-12 for c in cols
            )
            if zero_allowed and problem.b[i] <= 1e-12:
                bad.append(i)
        if bad:
            entries.append(
                _entry("A1", "fail", bad, "a zero row is admissible: b <= 0 and the side constraints allow it")
            )
        if uncertifiable:
            entries.append(
                _entry(
                    "A1", "warn", uncertifiable,
                    "coupled side constraints: zero-row exclusion checked a-posteriori on the solution",
                )
            )
        if not bad and not uncertifiable:
            entries.append(_entry("A1", "pass"))

    if model == ModelKind.NLO_SD:
        zero_b = [i for i in range(m) if problem.b[i] == 0.0]
        if zero_b:
            entries.append(
                _entry("A2", "warn", zero_b, "zero right-hand side: trivial output possible; perturbation paths apply")
            )
        else:
            entries.append(_entry("A2", "pass"))
        if prior is not None:
            zero_rows = [i for i in range(m) if not np.any(prior.estimates[i] != 0.0)]
            if zero_rows:
                entries.append(_entry("A2", "fail", zero_rows, "prior row is the zero vector"))
        if np.any(x.x != 0.0):
            entries.append(_entry("A3", "pass"))
        else:
            entries.append(_entry("A3", "fail", (), "observed point is the zero vector"))

    if model.family == "iu":
        empty = [i for i in range(m) if not structure.sets[i]]
        if empty:
            entries.append(_entry("A4", "fail", empty, "row has no uncertain coefficients"))
        else:
            entries.append(_entry("A4", "pass"))
        bad5 = []
        for i in range(m):
            if problem.b[i] > 0:
                continue
            certain = [j for j in range(n) if j not in structure.sets[i]]
            if not any(problem.A[i, j] != 0.0 for j in certain):
                bad5.append(i)
        entries.append(
            _entry("A5", "fail", bad5, "no certainly nonzero coefficient and b <= 0")
            if bad5
            else _entry("A5", "pass")
        )
        if model == ModelKind.RLO_IU_SD:
            movable = any(
                any(x.x[j] != 0.0 for j in structure.sets[i]) for i in range(m)
            )
            entries.append(
                _entry("A6", "pass")
                if movable
                else _entry("A6", "fail", (), "every uncertain column is zero at the observed point")
            )
            if prior is not None and prior.norm == NormKind.L2:
                entries.append(
                    _entry("norm", "fail", (), "deviation recovery solves exactly for l1/linf priors only")
                )

    if model.family == "ccu":
        surplus = problem.surplus(x.x)
        bad7 = [i for i in range(m) if surplus[i] < -1e-9]
        entries.append(
            _entry("A7", "fail", bad7, "observed point violates the nominal constraint")
            if bad7
            else _entry("A7", "pass")
        )
        ambiguous = []
        if not bad7:
            for i in range(m):
                vals = np.array(
                    [structure.alpha[i, j] * abs(x.x[j]) for j in structure.sets[i]]
                )
                total = float(np.sum(vals))
                if abs(surplus[i] - total) <= 1e-9 and np.any(vals <= 1e-12):
                    ambiguous.append(i)
        if ambiguous:
            entries.append(
                _entry("A8", "warn", ambiguous, "a range of budgets activates this row; both endpoints are reported")
            )
        else:
            entries.append(_entry("A8", "pass"))
        if model == ModelKind.RLO_CCU_SD and prior is not None:
            off = [
                i
                for i in range(m)
                if prior.estimates[i] < 0.0 or prior.estimates[i] > len(structure.sets[i])
            ]
            if off:
                entries.append(
                    _entry("A9", "warn", off, "budget prior outside [0, |J_i|]; clamped to the nearest endpoint")
                )
            else:
                entries.append(_entry("A9", "pass"))
        bad10 = []
        for i in range(m):
            strong = any(
                abs(problem.A[i, j]) > structure.alpha[i, j] for j in structure.sets[i]
            )
            certain = any(
                problem.A[i, j] != 0.0 for j in range(n) if j not in structure.sets[i]
            )
            if not (strong or certain):
                bad10.append(i)
        entries.append(
            _entry("A10", "fail", bad10, "every coefficient can be deviated to zero")
            if bad10
            else _entry("A10", "pass")
        )

    return ValidationReport(entries=tuple(entries))


def clamp_budget_prior(prior, structure):
    """Budget priors clamped into [0, |J_i|] per row (a warn, not an error)."""
    caps = np.array([len(s) for s in structure.sets], dtype=float)
    est = np.asarray(prior.estimates, dtype=float)
    return np.minimum(np.maximum(est, 0.0), caps)
