"""Linear and binary-integer programs for the attack and refinement solvers.

Relaxations are delegated to scipy's HiGHS backend; every reported optimum
is re-verified against the model before it is returned, so a numerical
failure can never masquerade as Optimal. Binary programs are solved by an
explicit deterministic branch-and-bound on top of the LP solver: branch on
the lowest-index fractional binary, explore the 0-branch first, and stop
with an explicit Limit status if the node budget runs out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import csr_matrix

FEAS_TOL = 1e-6
BOUND_TOL = 1e-9
INT_TOL = 1e-7
DEFAULT_NODE_LIMIT = 10**6

_HIGHS_OPTIONS = {
    "presolve": True,
    "primal_feasibility_tolerance": 1e-9,
    "dual_feasibility_tolerance": 1e-9,
}


class LpStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    LIMIT = "limit"
    NUMERIC = "numeric"


@dataclass
class LpModel:
    """min c'x subject to linear constraints and variable bounds."""

    objective: list[float] = field(default_factory=list)
    lower: list[float] = field(default_factory=list)
    upper: list[float] = field(default_factory=list)
    names: list[str] = field(default_factory=list)
    # Each row: (variable indices, coefficients, relation, rhs).
    rows: list[tuple[list[int], list[float], str, float]] = field(default_factory=list)

    @property
    def num_vars(self) -> int:
        return len(self.objective)

    def add_var(self, obj: float = 0.0, lower: float = 0.0, upper: float = math.inf, name: str = "") -> int:
        if lower > upper:
            raise ValueError(f"bounds [{lower}, {upper}] are empty")
        self.objective.append(float(obj))
        self.lower.append(float(lower))
        self.upper.append(float(upper))
        self.names.append(name or f"x{len(self.objective) - 1}")
        return len(self.objective) - 1

    def add_constraint(self, terms: dict[int, float], rel: str, rhs: float) -> int:
        if rel not in ("<=", ">=", "="):
            raise ValueError(f"unknown relation {rel!r}")
        idxs = sorted(terms)
        for i in idxs:
            if not 0 <= i < self.num_vars:
                raise ValueError(f"constraint references undeclared variable {i}")
        self.rows.append((idxs, [float(terms[i]) for i in idxs], rel, float(rhs)))
        return len(self.rows) - 1

    def dump_lp_text(self) -> str:
        """Plain-text rendering of the model for debugging."""
        out = ["minimize"]
        obj = " + ".join(
            f"{c:g} {self.names[i]}" for i, c in enumerate(self.objective) if c != 0.0
        )
        out.append("  " + (obj or "0"))
        out.append("subject to")
        for idxs, coefs, rel, rhs in self.rows:
            lhs = " + ".join(f"{c:g} {self.names[i]}" for i, c in zip(idxs, coefs))
            out.append(f"  {lhs or '0'} {rel} {rhs:g}")
        out.append("bounds")
        for i in range(self.num_vars):
            out.append(f"  {self.lower[i]:g} <= {self.names[i]} <= {self.upper[i]:g}")
        return "\n".join(out)


@dataclass
class LpSolution:
    status: LpStatus
    values: np.ndarray | None = None
    objective_value: float = math.nan

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


def _split_rows(m: LpModel):
    ub_rows: list[tuple[list[int], list[float], float]] = []
    eq_rows: list[tuple[list[int], list[float], float]] = []
    for idxs, coefs, rel, rhs in m.rows:
        if rel == "<=":
            ub_rows.append((idxs, coefs, rhs))
        elif rel == ">=":
            ub_rows.append((idxs, [-c for c in coefs], -rhs))
        else:
            eq_rows.append((idxs, coefs, rhs))
    return ub_rows, eq_rows


def _to_sparse(rows, n):
    if not rows:
        return None, None
    data, indices, indptr, rhs = [], [], [0], []
    for idxs, coefs, b in rows:
        indices.extend(idxs)
        data.extend(coefs)
        indptr.append(len(indices))
        rhs.append(b)
    mat = csr_matrix((data, indices, indptr), shape=(len(rows), n))
    return mat, np.asarray(rhs, dtype=np.float64)


def verify_solution(m: LpModel, x: np.ndarray) -> bool:
    """Constraint residuals within 1e-6 and bounds within 1e-9."""
    for i in range(m.num_vars):
        if x[i] < m.lower[i] - BOUND_TOL or x[i] > m.upper[i] + BOUND_TOL:
            return False
    for idxs, coefs, rel, rhs in m.rows:
        val = math.fsum(c * x[i] for i, c in zip(idxs, coefs))
        if rel == "<=" and val > rhs + FEAS_TOL:
            return False
        if rel == ">=" and val < rhs - FEAS_TOL:
            return False
        if rel == "=" and abs(val - rhs) > FEAS_TOL:
            return False
    return True


def lp_solve(m: LpModel) -> LpSolution:
    """Solve the continuous relaxation; statuses are never optimistic."""
    n = m.num_vars
    if n == 0:
        return LpSolution(LpStatus.OPTIMAL, np.zeros(0), 0.0)
    ub_rows, eq_rows = _split_rows(m)
    a_ub, b_ub = _to_sparse(ub_rows, n)
    a_eq, b_eq = _to_sparse(eq_rows, n)
    bounds = [
        (None if math.isinf(lo) else lo, None if math.isinf(up) else up)
        for lo, up in zip(m.lower, m.upper)
    ]
    res = linprog(
        np.asarray(m.objective, dtype=np.float64),
        A_ub=a_ub,
        b_ub=b_ub,
        A_eq=a_eq,
        b_eq=b_eq,
        bounds=bounds,
        method="highs",
        options=_HIGHS_OPTIONS,
    )
    if res.status == 2:
        return LpSolution(LpStatus.INFEASIBLE)
    if res.status == 3:
        return LpSolution(LpStatus.UNBOUNDED)
    if res.status != 0 or res.x is None:
        return LpSolution(LpStatus.NUMERIC)
    x = np.clip(np.asarray(res.x, dtype=np.float64), m.lower, m.upper)
    if not verify_solution(m, x):
        return LpSolution(LpStatus.NUMERIC)
    obj = float(math.fsum(c * x[i] for i, c in enumerate(m.objective) if c != 0.0))
    return LpSolution(LpStatus.OPTIMAL, x, obj)


def mip_solve(m: LpModel, binary_vars, node_limit: int = DEFAULT_NODE_LIMIT) -> LpSolution:
    """Minimize with the given variables restricted to {0, 1}.

    Deterministic branch-and-bound over :func:`lp_solve`: depth-first,
    branch on the lowest-index fractional binary, 0-branch first.
    """
    binaries = sorted(set(int(v) for v in binary_vars))
    for v in binaries:
        if m.lower[v] < -BOUND_TOL or m.upper[v] > 1.0 + BOUND_TOL:
            raise ValueError(f"binary variable {v} must have bounds within [0, 1]")

    best_x: np.ndarray | None = None
    best_obj = math.inf
    nodes = 0
    hit_limit = False
    # Each stack entry is a dict of forced binary assignments.
    stack: list[dict[int, int]] = [{}]
    base_lower = list(m.lower)
    base_upper = list(m.upper)
    while stack:
        if nodes >= node_limit:
            hit_limit = True
            break
        fixed = stack.pop()
        nodes += 1
        sub = LpModel(
            objective=m.objective,
            lower=[float(fixed[i]) if i in fixed else base_lower[i] for i in range(m.num_vars)],
            upper=[float(fixed[i]) if i in fixed else base_upper[i] for i in range(m.num_vars)],
            names=m.names,
            rows=m.rows,
        )
        sol = lp_solve(sub)
        if sol.status is LpStatus.INFEASIBLE:
            continue
        if sol.status is LpStatus.UNBOUNDED:
            # A bounded-box binary cannot cause this; the continuous part
            # is unbounded, so no optimum can be certified.
            return LpSolution(LpStatus.UNBOUNDED)
        if sol.status is not LpStatus.OPTIMAL:
            return LpSolution(LpStatus.NUMERIC)
        if sol.objective_value >= best_obj - 1e-9:
            continue
        frac = None
        for v in binaries:
            xv = sol.values[v]
            if min(xv, 1.0 - xv) > INT_TOL:
                frac = v
                break
        if frac is None:
            x = sol.values.copy()
            for v in binaries:
                x[v] = round(x[v])
            if verify_solution(m, x):
                obj = float(math.fsum(c * x[i] for i, c in enumerate(m.objective) if c != 0.0))
                if obj < best_obj - 1e-12:
                    best_obj = obj
                    best_x = x
            continue
        # LIFO: push the 1-branch first so the 0-branch is explored first.
        one = dict(fixed)
        one[frac] = 1
        zero = dict(fixed)
        zero[frac] = 0
        stack.append(one)
        stack.append(zero)
    if hit_limit:
        return LpSolution(LpStatus.LIMIT, best_x, best_obj if best_x is not None else math.nan)
    if best_x is None:
        return LpSolution(LpStatus.INFEASIBLE)
    return LpSolution(LpStatus.OPTIMAL, best_x, best_obj)
