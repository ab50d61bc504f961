"""Affine matrix-inequality problems over matrix decision variables.

A thin, certifying layer over a semidefinite-cone optimizer (cvxpy with
Clarabel, SCS as fallback).  Strict inequalities are posed with explicit
semidefinite margins, and every returned solution is re-certified here by
direct eigenvalue/residual evaluation, independently of what the solver
reports.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field

import cvxpy as cp
import numpy as np

from .config import SolveConfig, DEFAULT_CONFIG

FEASIBLE = "feasible"
INFEASIBLE = "infeasible"
NUMERICAL_FAILURE = "numerical_failure"

_ACCEPTED = ("optimal", "optimal_inaccurate")
_INFEASIBLE = ("infeasible", "infeasible_inaccurate")


@dataclass(frozen=True)
class MatrixVar:
    """Declaration record of a matrix decision variable."""

    name: str
    rows: int
    cols: int
    symmetric: bool = False

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError("variable dimensions must be positive")
        if self.symmetric and self.rows != self.cols:
            raise ValueError(f"symmetric variable {self.name!r} must be square")


@dataclass
class PsdConstraint:
    expr: cp.Expression
    margin: float
    label: str

    @property
    def dim(self) -> int:
        return self.expr.shape[0]


@dataclass
class EqConstraint:
    expr: cp.Expression  # required to evaluate to zero
    label: str


def block(rows) -> cp.Expression:
    """Assemble a block matrix expression from a nested list of blocks."""
    return cp.bmat([[_as_expr(b) for b in row] for row in rows])


def _as_expr(b):
    if isinstance(b, cp.Expression):
        if b.ndim == 0:
            return cp.reshape(b, (1, 1), order="F")
        if b.ndim == 1:
            return cp.reshape(b, (b.shape[0], 1), order="F")
        return b
    return cp.Constant(np.atleast_2d(np.asarray(b, dtype=float)))


def auto_margin(eps_rel: float, *mats) -> float:
    """Margin for a strict inequality: eps_rel times the constant-data scale."""
    scale = 1.0
    for M in mats:
        if M is None:
            continue
        M = np.asarray(M, dtype=float)
        if M.size:
            scale = max(scale, float(np.max(np.abs(M))))
    return eps_rel * scale


class LmiProblem:
    """Container for matrix variables, PSD constraints and linear equalities.

    PSD constraints read `expr >= margin * I`; equalities read `expr == 0`.
    An optional scalar objective (typically a trace) is minimized.
    """

    def __init__(self, scale: float = 1.0):
        self.variables: dict[str, MatrixVar] = {}
        self._cvx: dict[str, cp.Variable] = {}
        self.psd_constraints: list[PsdConstraint] = []
        self.eq_constraints: list[EqConstraint] = []
        self._objective: cp.Expression | None = None
        self._sense: str = "min"
        # Magnitude of the constant data entering the constraints; the
        # certification tolerance is relative to it.
        self.scale = float(scale)

    # -- declaration -------------------------------------------------------
    def matrix_var(self, name: str, rows: int, cols: int, symmetric: bool = False) -> cp.Variable:
        if name in self.variables:
            raise ValueError(f"variable {name!r} already declared")
        self.variables[name] = MatrixVar(name, rows, cols, symmetric)
        var = cp.Variable((rows, cols), name=name, symmetric=symmetric)
        self._cvx[name] = var
        return var

    def scalar_var(self, name: str) -> cp.Variable:
        if name in self.variables:
            raise ValueError(f"variable {name!r} already declared")
        self.variables[name] = MatrixVar(name, 1, 1)
        var = cp.Variable(name=name)
        self._cvx[name] = var
        return var

    # -- constraints and objective ------------------------------------------
    def require_psd(self, expr, margin: float = 0.0, label: str = "") -> None:
        expr = _as_expr(expr)
        if margin < 0:
            raise ValueError("margins must be nonnegative")
        if expr.shape[0] != expr.shape[1]:
            raise ValueError(f"PSD constraint must be square, got {expr.shape}")
        self._check_declared(expr)
        self.psd_constraints.append(PsdConstraint(expr, float(margin), label or f"psd{len(self.psd_constraints)}"))

    def require_eq(self, lhs, rhs, label: str = "") -> None:
        expr = _as_expr(lhs) - _as_expr(rhs)
        self._check_declared(expr)
        self.eq_constraints.append(EqConstraint(expr, label or f"eq{len(self.eq_constraints)}"))

    def minimize(self, expr) -> None:
        expr = _as_expr(expr)
        self._check_declared(expr)
        self._objective, self._sense = expr, "min"

    def maximize(self, expr) -> None:
        expr = _as_expr(expr)
        self._check_declared(expr)
        self._objective, self._sense = expr, "max"

    def _check_declared(self, expr: cp.Expression) -> None:
        for v in expr.variables():
            if v.name() not in self._cvx or self._cvx[v.name()] is not v:
                raise ValueError(f"expression references undeclared variable {v.name()!r}")

    # -- helpers -------------------------------------------------------------
    def cvx_constraints(self) -> list:
        cons = []
        for c in self.psd_constraints:
            rhs = c.margin * np.eye(c.dim) if c.margin else np.zeros((c.dim, c.dim))
            cons.append(c.expr >> rhs)
        for c in self.eq_constraints:
            cons.append(c.expr == 0)
        return cons

    def value_of(self, name: str) -> np.ndarray | None:
        var = self._cvx[name]
        if var.value is None:
            return None
        return np.atleast_2d(np.asarray(var.value, dtype=float))

    def assign(self, values: dict[str, np.ndarray]) -> None:
        missing = set(self.variables) - set(values)
        if missing:
            raise ValueError(f"values missing for variables {sorted(missing)}")
        for name, decl in self.variables.items():
            val = np.asarray(values[name], dtype=float)
            var = self._cvx[name]
            if var.shape == ():
                var.value = float(val.reshape(()))
                continue
            val = val.reshape(decl.rows, decl.cols)
            if decl.symmetric:
                val = (val + val.T) / 2.0
            var.value = val


@dataclass(frozen=True)
class SolutionCheck:
    """Direct re-evaluation of all constraints at given variable values."""

    min_eigenvalues: dict[str, float]
    margins: dict[str, float]
    eq_residuals: dict[str, float]
    worst_violation: float

    def ok(self, tol: float) -> bool:
        return self.worst_violation <= tol


def check_solution(problem: LmiProblem, values: dict[str, np.ndarray]) -> SolutionCheck:
    """Evaluate every constraint at `values`, ignoring any solver claims."""
    problem.assign(values)
    min_eigs: dict[str, float] = {}
    margins: dict[str, float] = {}
    eq_res: dict[str, float] = {}
    worst = 0.0
    for c in problem.psd_constraints:
        M = np.atleast_2d(np.asarray(c.expr.value, dtype=float))
        lam = float(np.min(np.linalg.eigvalsh((M + M.T) / 2.0)))
        min_eigs[c.label] = lam
        margins[c.label] = c.margin
        worst = max(worst, c.margin - lam)
    for c in problem.eq_constraints:
        r = float(np.max(np.abs(np.asarray(c.expr.value, dtype=float))))
        eq_res[c.label] = r
        worst = max(worst, r)
    return SolutionCheck(min_eigs, margins, eq_res, worst)


@dataclass(frozen=True)
class LmiSolution:
    status: str
    values: dict[str, np.ndarray] = field(default_factory=dict)
    objective: float | None = None
    worst_violation: float | None = None
    solver: str = ""
    solver_status: str = ""
    solve_time: float = 0.0

    @property
    def feasible(self) -> bool:
        return self.status == FEASIBLE


def _solver_options(name: str, cfg: SolveConfig, tight: bool) -> dict:
    if name == "CLARABEL":
        if tight:
            t = cfg.tight_tolerance
            return {"tol_gap_abs": t, "tol_gap_rel": t, "tol_feas": t, "max_iter": 500}
        return {}
    if name == "SCS":
        return {"eps": cfg.scs_eps, "max_iters": cfg.max_iters}
    return {}


def solve(problem: LmiProblem, cfg: SolveConfig = DEFAULT_CONFIG, tight: bool = False) -> LmiSolution:
    """Solve the problem and certify the outcome by direct re-evaluation.

    Status semantics: `feasible` means the solver succeeded AND the returned
    values satisfy every constraint within cfg.check_tol; `infeasible` is
    reported only on a solver infeasibility certificate; anything else is a
    `numerical_failure` (never silently treated as infeasible).  A fallback
    solver is tried when the primary one fails.
    """
    objective = cp.Minimize(0)
    if problem._objective is not None:
        objective = (
            cp.Minimize(problem._objective) if problem._sense == "min" else cp.Maximize(problem._objective)
        )
    solvers = [cfg.solver] + ([cfg.fallback_solver] if cfg.fallback_solver else [])
    last = LmiSolution(status=NUMERICAL_FAILURE, solver_status="not attempted")
    for name in solvers:
        prob = cp.Problem(objective, problem.cvx_constraints())
        start = time.perf_counter()
        try:
            with warnings.catch_warnings():
                # inaccurate-solution warnings are redundant: the returned
                # values are re-certified below either way
                warnings.simplefilter("ignore", UserWarning)
                prob.solve(solver=getattr(cp, name), **_solver_options(name, cfg, tight))
        except (cp.error.SolverError, cp.error.DCPError, ValueError) as exc:
            last = LmiSolution(status=NUMERICAL_FAILURE, solver=name, solver_status=f"error: {exc}")
            continue
        elapsed = time.perf_counter() - start
        raw = prob.status or "unknown"
        if raw in _INFEASIBLE:
            return LmiSolution(status=INFEASIBLE, solver=name, solver_status=raw, solve_time=elapsed)
        if raw in _ACCEPTED:
            values = {name_: problem.value_of(name_) for name_ in problem.variables}
            if any(v is None for v in values.values()):
                last = LmiSolution(status=NUMERICAL_FAILURE, solver=name, solver_status=raw)
                continue
            chk = check_solution(problem, values)
            tol = cfg.check_tol * max(1.0, problem.scale)
            status = FEASIBLE if chk.ok(tol) else NUMERICAL_FAILURE
            sol = LmiSolution(
                status=status,
                values=values,
                objective=None if problem._objective is None else float(prob.value),
                worst_violation=chk.worst_violation,
                solver=name,
                solver_status=raw,
                solve_time=elapsed,
            )
            if status == FEASIBLE:
                return sol
            last = sol
            continue
        last = LmiSolution(status=NUMERICAL_FAILURE, solver=name, solver_status=raw, solve_time=elapsed)
    return last


def dump_problem(problem: LmiProblem) -> str:
    """Plain-text symmetric-block dump for external solver cross-checks.

    Lists every variable, then each constraint as its constant block and the
    coefficient block of every scalar decision entry (basis evaluation), so
    the problem can be re-posed in any SDP tool.
    """
    lines = ["lmi-problem"]
    lines.append("variables:")
    for v in problem.variables.values():
        kind = "symmetric" if v.symmetric else "full"
        lines.append(f"  {v.name} {v.rows}x{v.cols} {kind}")
    if problem._objective is not None:
        lines.append(f"objective: {problem._sense} {problem._objective}")
    else:
        lines.append("objective: feasibility")

    def basis_values(active: dict[str, np.ndarray]):
        problem.assign(active)

    zero = {
        name: np.zeros((d.rows, d.cols)) for name, d in problem.variables.items()
    }
    for c in problem.psd_constraints + problem.eq_constraints:
        margin = f" margin {c.margin:.6g}" if isinstance(c, PsdConstraint) else ""
        kind = "psd" if isinstance(c, PsdConstraint) else "eq"
        lines.append(f"{kind} {c.label}{margin}")
        basis_values(zero)
        const = np.atleast_2d(np.asarray(c.expr.value, dtype=float))
        lines.append("  constant:")
        lines.append("    " + np.array2string(const, precision=8, max_line_width=100).replace("\n", "\n    "))
        for name, decl in problem.variables.items():
            for i in range(decl.rows):
                for j in range(decl.cols):
                    if decl.symmetric and j < i:
                        continue
                    vals = {k: v.copy() for k, v in zero.items()}
                    vals[name][i, j] = 1.0
                    if decl.symmetric:
                        vals[name][j, i] = 1.0
                    basis_values(vals)
                    coef = np.atleast_2d(np.asarray(c.expr.value, dtype=float)) - const
                    if np.max(np.abs(coef)) == 0.0:
                        continue
                    lines.append(f"  coeff {name}[{i},{j}]:")
                    lines.append(
                        "    "
                        + np.array2string(coef, precision=8, max_line_width=100).replace("\n", "\n    ")
                    )
    return "\n".join(lines)
