"""Deterministic random desk-scale instances for oracle-agreement tests.

Instances are built on the oracle's 0.05 lattice: box endpoints, prior
estimates, and right-hand sides all sit on grid points so the exhaustive
search brackets the true optimum within the per-instance step tolerance.
"""

import numpy as np

from io_recover import (
    ForwardProblem,
    GridOracleSpec,
    ModelKind,
    NormKind,
    Prior,
    SideConstraints,
    UncertaintyStructure,
)

STEP = 0.05


def lattice(rng, lo, hi):
    lo_k = round(lo / STEP)
    hi_k = round(hi / STEP)
    return STEP * int(rng.integers(lo_k, hi_k + 1))


def _x_hat(rng, n):
    vals = np.array([-2.0, -1.0, 1.0, 2.0])
    return rng.choice(vals, size=n)


def _box_omega(lo, hi):
    p = lo.size
    G = np.vstack([-np.eye(p), np.eye(p)])
    h = np.concatenate([-lo, hi])
    return SideConstraints(G=G, h=h)


def make_nlo_dg(seed):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(2, 5))
    n = int(rng.integers(2, 4))
    x = _x_hat(rng, n)
    lo = np.zeros(m * n)
    hi = np.zeros(m * n)
    for k in range(m * n):
        lo[k] = lattice(rng, 0.0, 0.5)
        hi[k] = lo[k] + lattice(rng, 0.5, 1.5)
    hi = np.minimum(hi, 2.0)
    b = np.zeros(m)
    for i in range(m):
        cmin = sum(
            (lo if x[j] > 0 else hi)[i * n + j] * x[j] for j in range(n)
        )
        cmax = sum(
            (hi if x[j] > 0 else lo)[i * n + j] * x[j] for j in range(n)
        )
        if rng.random() < 0.5:
            b[i] = cmin - lattice(rng, 0.0, 0.5)
        else:
            width = max(cmax - cmin, 0.0)
            b[i] = cmin + min(lattice(rng, 0.0, 0.4), 0.5 * width)
    problem = ForwardProblem(A=np.zeros((m, n)), b=b)
    omega = _box_omega(lo, hi)
    spec = GridOracleSpec(
        parameter_box=tuple(zip(lo, hi)), step=STEP, model=ModelKind.NLO_DG
    )
    return problem, x, UncertaintyStructure.nominal(), omega, spec


def make_nlo_sd(seed, norm=None):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(2, 5))
    n = int(rng.integers(2, 4))
    x = _x_hat(rng, n)
    a_hat = np.array([[lattice(rng, 0.5, 1.5) for _ in range(n)] for _ in range(m)])
    b = np.zeros(m)
    for i in range(m):
        offset = lattice(rng, 0.0, 0.4)
        b[i] = float(a_hat[i] @ x) + (offset if rng.random() < 0.4 else -offset)
    norm = norm if norm is not None else list(NormKind)[int(rng.integers(0, 3))]
    prior = Prior(estimates=a_hat, norm=NormKind(norm))
    problem = ForwardProblem(A=a_hat, b=b)
    lo = np.maximum(a_hat.ravel() - 0.5, 0.0)
    hi = np.minimum(a_hat.ravel() + 0.5, 2.0)
    spec = GridOracleSpec(
        parameter_box=tuple(zip(lo, hi)), step=STEP, model=ModelKind.NLO_SD
    )
    return problem, x, UncertaintyStructure.nominal(), prior, spec


def _random_sets(rng, m, n):
    sets = []
    for _ in range(m):
        size = int(rng.integers(1, n + 1))
        cols = np.sort(rng.choice(n, size=size, replace=False))
        sets.append(tuple(int(c) for c in cols))
    return tuple(sets)


def make_iu_dg(seed):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(2, 5))
    n = int(rng.integers(2, 4))
    x = _x_hat(rng, n)
    sets = _random_sets(rng, m, n)
    A = np.array([[lattice(rng, 0.5, 2.0) for _ in range(n)] for _ in range(m)])
    b = np.array([float(A[i] @ x) - lattice(rng, 0.2, 1.2) for i in range(m)])
    problem = ForwardProblem(A=A, b=b)
    structure = UncertaintyStructure.interval(sets)
    p = sum(len(s) for s in sets)
    lo = np.zeros(p)
    hi = np.array([lattice(rng, 0.5, 2.0) for _ in range(p)])
    omega = _box_omega(lo, hi)
    spec = GridOracleSpec(
        parameter_box=tuple(zip(lo, hi)), step=STEP, model=ModelKind.RLO_IU_DG
    )
    return problem, x, structure, omega, spec


def make_iu_sd(seed):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(2, 5))
    n = int(rng.integers(2, 4))
    x = _x_hat(rng, n)
    sets = _random_sets(rng, m, n)
    A = np.array([[lattice(rng, 0.5, 2.0) for _ in range(n)] for _ in range(m)])
    b = np.array([float(A[i] @ x) - lattice(rng, 0.2, 1.0) for i in range(m)])
    problem = ForwardProblem(A=A, b=b)
    structure = UncertaintyStructure.interval(sets)
    est = np.zeros((m, n))
    for i, s in enumerate(sets):
        for j in s:
            est[i, j] = lattice(rng, 0.0, 0.6)
    norm = NormKind.L1 if rng.random() < 0.5 else NormKind.LINF
    prior = Prior(estimates=est, norm=norm)
    p = sum(len(s) for s in sets)
    spec = GridOracleSpec(
        parameter_box=((0.0, 2.0),) * p, step=STEP, model=ModelKind.RLO_IU_SD
    )
    return problem, x, structure, prior, spec


def make_ccu(seed, with_omega):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(2, 5))
    n = int(rng.integers(2, 4))
    x = _x_hat(rng, n)
    # budgets live in [0, |J_i|]; keeping |J_i| <= 2 keeps them inside the
    # oracle's [0, 2] parameter box
    sets = []
    for _ in range(m):
        size = int(rng.integers(1, 3))
        cols = np.sort(rng.choice(n, size=size, replace=False))
        sets.append(tuple(int(c) for c in cols))
    sets = tuple(sets)
    A = np.array([[lattice(rng, 0.5, 2.0) for _ in range(n)] for _ in range(m)])
    alpha = np.zeros((m, n))
    for i, s in enumerate(sets):
        for j in s:
            alpha[i, j] = lattice(rng, 0.3, 1.5)
    b = np.zeros(m)
    for i in range(m):
        full = float(sum(alpha[i, j] * abs(x[j]) for j in sets[i]))
        b[i] = float(A[i] @ x) - min(lattice(rng, 0.1, 2.0), full + 0.5)
        b[i] = min(b[i], float(A[i] @ x))  # keep the observation feasible
    problem = ForwardProblem(A=A, b=b)
    structure = UncertaintyStructure.cardinality(sets, alpha)
    caps = np.array([min(2.0, float(len(s))) for s in sets])
    omega = None
    lo = np.zeros(m)
    hi = caps.copy()
    if with_omega:
        for i in range(m):
            lo[i] = min(lattice(rng, 0.0, 0.2), caps[i])
            hi[i] = max(lo[i], min(caps[i], lattice(rng, 0.4, 2.0)))
        omega = _box_omega(lo, hi)
    return problem, x, structure, omega, lo, hi


def make_ccu_dg(seed):
    problem, x, structure, omega, lo, hi = make_ccu(seed, with_omega=True)
    spec = GridOracleSpec(
        parameter_box=tuple(zip(lo, hi)), step=STEP, model=ModelKind.RLO_CCU_DG
    )
    return problem, x, structure, omega, spec


def make_ccu_sd(seed):
    rng = np.random.default_rng(seed + 991)
    problem, x, structure, _, lo, hi = make_ccu(seed, with_omega=False)
    m = problem.m
    est = np.array(
        [lattice(rng, 0.0, min(2.0, float(len(structure.sets[i])))) for i in range(m)]
    )
    prior = Prior(estimates=est, norm=list(NormKind)[int(rng.integers(0, 3))])
    spec = GridOracleSpec(
        parameter_box=tuple(zip(lo, hi)), step=STEP, model=ModelKind.RLO_CCU_SD
    )
    return problem, x, structure, prior, spec
