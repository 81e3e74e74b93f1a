"""LP-Fair construction, a dense revised simplex solver, CPLEX-LP export and solution import."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.linalg.blas import dger as _ger

from .graph import ColoredBipartiteGraph, FairnessSpec

log = logging.getLogger(__name__)

TAU_FEAS = 1e-9
TAU_OPT = 1e-9
# beyond this many variables the dense-basis solver is not the right tool
BUILTIN_VARIABLE_LIMIT = 20_000


class LpError(Exception):
    pass


class InfeasibleError(LpError):
    pass


class UnboundedError(LpError):
    pass


class NumericalFailure(LpError):
    pass


@dataclass(frozen=True)
class LinearProgram:
    """``max objective @ x`` subject to ``matrix @ x (senses) rhs`` and ``x >= 0``."""

    objective: np.ndarray
    matrix: sp.csr_matrix
    senses: tuple[str, ...]
    rhs: np.ndarray
    row_names: tuple[str, ...]
    var_names: tuple[str, ...]

    def __post_init__(self):
        m, n = self.matrix.shape
        if len(self.objective) != n or len(self.var_names) != n:
            raise ValueError("objective / variable names do not match matrix columns")
        if len(self.senses) != m or len(self.rhs) != m or len(self.row_names) != m:
            raise ValueError("row data does not match matrix rows")
        if any(s not in ("<=", ">=", "=") for s in self.senses):
            raise ValueError("senses must be '<=', '>=' or '='")
        if not (np.all(np.isfinite(self.objective)) and np.all(np.isfinite(self.matrix.data))
                and np.all(np.isfinite(self.rhs))):
            raise ValueError("LP data must be finite")

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape


@dataclass(frozen=True)
class FractionalMatching:
    x: np.ndarray
    objective_value: float
    duals: np.ndarray | None = None

    @property
    def mass(self) -> float:
        return float(np.sum(self.x))


def var_name(u: int, v: int) -> str:
    return f"x_{u}_{v}"


def _vertex_rows(graph: ColoredBipartiteGraph):
    rows, names = [], []
    for u in range(graph.n_u):
        if graph.incident_u(u):
            rows.append(list(graph.incident_u(u)))
            names.append(f"v_{u}")
    for v in range(graph.n_v):
        if graph.incident_v(v):
            rows.append(list(graph.incident_v(v)))
            names.append(f"v_{graph.n_u + v}")
    return rows, names


def build_matching_lp(graph: ColoredBipartiteGraph) -> LinearProgram:
    """Plain bipartite matching LP: vertex rows only, no fairness rows."""
    rows, names = _vertex_rows(graph)
    m, n = len(rows), graph.num_edges
    ri = [i for i, r in enumerate(rows) for _ in r]
    ci = [e for r in rows for e in r]
    A = sp.csr_matrix((np.ones(len(ci)), (ri, ci)), shape=(m, n))
    return LinearProgram(
        objective=graph.weights,
        matrix=A,
        senses=("<=",) * m,
        rhs=np.ones(m),
        row_names=tuple(names),
        var_names=tuple(var_name(e.u, e.v) for e in graph.edges),
    )


def build_lp_fair(
    graph: ColoredBipartiteGraph,
    spec: FairnessSpec,
    beta_perturbation: float | None = None,
) -> LinearProgram:
    """Matching LP plus two proportionality rows per color.

    Row ``cLo_c`` encodes ``alpha_c * sum(x) - sum_{E_c} x <= 0`` and ``cHi_c``
    encodes ``sum_{E_c} x - beta'_c * sum(x) <= 0`` where ``beta'_c`` is
    ``(1 - eps) * beta_c`` when ``beta_perturbation=eps`` is given (only valid
    with ``alpha = 0``). Colors in row names are 1-based.
    """
    alpha, beta = spec.bounds(graph.num_colors)
    if beta_perturbation is not None:
        if not (0.0 < beta_perturbation < 1.0):
            raise ValueError("beta perturbation must lie in (0, 1)")
        if np.any(alpha > 0):
            raise ValueError("beta perturbation requires alpha = 0")
        beta = (1.0 - beta_perturbation) * beta
    base = build_matching_lp(graph)
    n = graph.num_edges
    colors = graph.colors
    dense = []
    names = []
    for c in range(graph.num_colors):
        psi = (colors == c).astype(float)
        dense.append(alpha[c] - psi)
        names.append(f"cLo_{c + 1}")
        dense.append(psi - beta[c])
        names.append(f"cHi_{c + 1}")
    fair = sp.csr_matrix(np.array(dense).reshape(2 * graph.num_colors, n))
    fair.eliminate_zeros()
    return LinearProgram(
        objective=base.objective,
        matrix=sp.vstack([base.matrix, fair], format="csr"),
        senses=base.senses + ("<=",) * fair.shape[0],
        rhs=np.concatenate([base.rhs, np.zeros(fair.shape[0])]),
        row_names=base.row_names + tuple(names),
        var_names=base.var_names,
    )


# --------------------------------------------------------------------------- simplex


@dataclass
class SimplexResult:
    x: np.ndarray
    objective: float
    duals: np.ndarray
    iterations: int


class _Tableau:
    """Revised simplex state over the standard-form column set.

    The basis inverse is kept explicitly and updated by rank-one pivots,
    with periodic refactorization from the basis columns.
    """

    def __init__(self, A: sp.csc_matrix, b: np.ndarray, basis: np.ndarray, refactor_every: int):
        self.A = A
        self.AT = A.T.tocsr()
        self.b = b
        self.basis = basis
        self.refactor_every = refactor_every
        self.refactor()

    def column(self, j: int):
        lo, hi = self.A.indptr[j], self.A.indptr[j + 1]
        return self.A.indices[lo:hi], self.A.data[lo:hi]

    def basis_matrix(self) -> np.ndarray:
        m = len(self.b)
        B = np.zeros((m, m))
        for k, j in enumerate(self.basis):
            rows, vals = self.column(j)
            B[rows, k] = vals
        return B

    def refactor(self):
        B = self.basis_matrix()
        try:
            lu = sla.lu_factor(B, check_finite=True)
        except (ValueError, np.linalg.LinAlgError) as exc:
            raise NumericalFailure(f"basis factorization failed: {exc}") from exc
        diag = np.abs(np.diag(lu[0]))
        if diag.size and diag.min() <= 1e-12 * max(1.0, diag.max()):
            raise NumericalFailure("basis matrix is singular or ill-conditioned")
        self.lu = lu
        self.Binv = np.asfortranarray(sla.lu_solve(lu, np.eye(len(self.b))))
        self.xB = sla.lu_solve(lu, self.b)
        self.since_refactor = 0
        self.y = None

    def direction(self, j: int) -> np.ndarray:
        rows, vals = self.column(j)
        return self.Binv[:, rows] @ vals

    def duals(self, cost: np.ndarray) -> np.ndarray:
        if self.y is None:
            self.y = cost[self.basis] @ self.Binv
        return self.y

    def pivot(self, r: int, j: int, col: np.ndarray, theta: float, dj: float):
        self.xB -= theta * col
        self.xB[r] = theta
        prow = self.Binv[r] / col[r]
        col = col.copy()
        col[r] = 0.0
        self.Binv = _ger(-1.0, col, prow, a=self.Binv, overwrite_a=True)
        self.Binv[r] = prow
        if self.y is not None:
            self.y = self.y + dj * prow
        self.basis[r] = j
        self.since_refactor += 1
        if self.since_refactor >= self.refactor_every:
            self.refactor()


def _optimize(tab: _Tableau, cost: np.ndarray, enterable: np.ndarray, blocked: np.ndarray,
              max_iter: int, bland_after: int, tol_piv: float) -> int:
    """Run primal simplex iterations maximizing ``cost``; returns the pivot count.

    ``blocked[j]`` marks columns fixed at zero (artificials in phase 2): if
    basic they must leave as soon as the entering direction touches them.
    """
    tol_d = TAU_OPT * max(1.0, float(np.max(np.abs(cost))) if cost.size else 1.0)
    degenerate_run = 0
    bland = False
    for it in range(max_iter):
        y = tab.duals(cost)
        d = cost - tab.AT @ y
        d[tab.basis] = 0.0
        d[~enterable] = 0.0
        if bland:
            cand = np.flatnonzero(d > tol_d)
            if cand.size == 0:
                return it
            j = int(cand[0])
        else:
            j = int(np.argmax(d))
            if d[j] <= tol_d:
                return it
        col = tab.direction(j)
        pos = col > tol_piv
        ratios = np.full(col.shape, np.inf)
        ratios[pos] = np.maximum(tab.xB[pos], 0.0) / col[pos]
        art = blocked[tab.basis] & (np.abs(col) > tol_piv)
        ratios[art] = 0.0
        theta = ratios.min()
        if not np.isfinite(theta):
            raise UnboundedError("objective is unbounded")
        ties = np.flatnonzero(ratios <= theta + 1e-12)
        if bland:
            r = int(ties[np.argmin(tab.basis[ties])])
        else:
            r = int(ties[np.argmax(np.abs(col[ties]))])
        if theta <= 1e-12:
            degenerate_run += 1
            if degenerate_run >= bland_after and not bland:
                log.debug("switching to Bland's rule after %d degenerate pivots", degenerate_run)
                bland = True
        else:
            degenerate_run = 0
            bland = False
        tab.pivot(r, j, col, theta, float(d[j]))
        np.maximum(tab.xB, 0.0, out=tab.xB, where=tab.xB > -TAU_FEAS)
    raise NumericalFailure(f"simplex iteration limit {max_iter} reached")


def simplex(c, A, senses, b, *, bland_after: int = 1000, refactor_every: int | None = None,
            max_iter: int | None = None) -> SimplexResult:
    """Two-phase revised primal simplex for ``max c@x, A x (senses) b, x >= 0``.

    Rows are sign-normalized so ``b >= 0``; ``<=`` rows start with a slack
    basis, other rows get artificial columns that a phase-one pass drives to
    zero. Returns primal values and row duals of the original rows.
    """
    c = np.asarray(c, dtype=float)
    A = sp.csr_matrix(A, dtype=float)
    b = np.asarray(b, dtype=float).copy()
    m, n = A.shape
    flip = np.where(b < 0, -1.0, 1.0)
    flipped = {"<=": ">=", ">=": "<=", "=": "="}
    senses = [flipped[s] if f < 0 else s for s, f in zip(senses, flip)]
    A = sp.diags(flip) @ A
    b = b * flip

    extra_rows, extra_cols, extra_vals, kinds = [], [], [], []
    basis = np.empty(m, dtype=int)
    col = n
    for i, s in enumerate(senses):
        if s == "<=":
            extra_rows.append(i); extra_cols.append(col); extra_vals.append(1.0); kinds.append(1)
            basis[i] = col
            col += 1
        else:
            if s == ">=":
                extra_rows.append(i); extra_cols.append(col); extra_vals.append(-1.0); kinds.append(1)
                col += 1
            extra_rows.append(i); extra_cols.append(col); extra_vals.append(1.0); kinds.append(2)
            basis[i] = col
            col += 1
    N = col
    S = sp.csr_matrix((extra_vals, (extra_rows, [k - n for k in extra_cols])), shape=(m, N - n))
    full = sp.hstack([A, S], format="csc")
    kind = np.concatenate([np.zeros(n, dtype=int), np.array(kinds, dtype=int)])
    artificial = kind == 2
    max_iter = max_iter or 50 * (m + N) + 1000

    tab = _Tableau(full, b, basis, refactor_every or max(64, m // 2))
    iterations = 0
    if artificial.any():
        cost1 = -artificial.astype(float)
        tab.y = None
        iterations += _optimize(tab, cost1, np.ones(N, bool), np.zeros(N, bool),
                                max_iter, bland_after, TAU_FEAS)
        tab.refactor()
        infeas = float(np.sum(tab.xB[artificial[tab.basis]]))
        if infeas > TAU_FEAS * max(1.0, float(np.max(np.abs(b), initial=0.0))):
            raise InfeasibleError(f"LP is infeasible (phase-one residual {infeas:.3g})")
    cost2 = np.concatenate([c, np.zeros(N - n)])
    tab.y = None
    iterations += _optimize(tab, cost2, ~artificial, artificial, max_iter, bland_after, TAU_FEAS)
    tab.refactor()

    xfull = np.zeros(N)
    xfull[tab.basis] = tab.xB
    y = sla.lu_solve(tab.lu, cost2[tab.basis], trans=1)
    x = xfull[:n]
    return SimplexResult(x=x, objective=float(c @ x), duals=y * flip, iterations=iterations)


def check_certificate(lp: LinearProgram, x: np.ndarray, y: np.ndarray,
                      tau_feas: float = TAU_FEAS, tau_opt: float = TAU_OPT) -> list[str]:
    """Primal feasibility, dual feasibility and duality gap checks; returns failures."""
    problems = []
    A, b = lp.matrix, lp.rhs
    row_norm = np.maximum(1.0, np.sqrt(np.asarray(A.multiply(A).sum(axis=1)).ravel()))
    resid = (A @ x - b) / row_norm
    senses = np.array(lp.senses)
    viol = np.where(senses == "<=", resid, np.where(senses == ">=", -resid, np.abs(resid)))
    if viol.size and viol.max() > tau_feas:
        problems.append(f"primal row violation {viol.max():.3g}")
    if x.size and x.min() < -tau_feas:
        problems.append(f"negative variable {x.min():.3g}")
    scale = max(1.0, float(np.max(np.abs(lp.objective), initial=0.0)))
    dual_viol = np.where(senses == "<=", -y, np.where(senses == ">=", y, 0.0))
    if dual_viol.size and dual_viol.max() > tau_opt * scale:
        problems.append(f"dual sign violation {dual_viol.max():.3g}")
    reduced = lp.objective - A.T @ y
    if reduced.size and reduced.max() > tau_opt * scale * max(1.0, float(np.abs(y).max(initial=0))):
        problems.append(f"dual infeasible reduced cost {reduced.max():.3g}")
    primal, dual = float(lp.objective @ x), float(b @ y)
    if abs(primal - dual) > tau_opt * max(1.0, abs(primal)):
        problems.append(f"duality gap {abs(primal - dual):.3g}")
    return problems


def solve(lp: LinearProgram, tol: float = TAU_OPT) -> FractionalMatching:
    """Solve ``lp`` with the built-in simplex and certify the result.

    Raises :class:`InfeasibleError` when no feasible point exists and
    :class:`NumericalFailure` when the basis degenerates or the optimality
    certificate does not hold within tolerance. Returned values are clamped
    to ``[0, 1]``.
    """
    m, n = lp.shape
    if n > BUILTIN_VARIABLE_LIMIT:
        raise NumericalFailure(
            f"{n} variables exceed the built-in solver limit; export the LP and import a solution"
        )
    if n == 0:
        if any((s == "<=" and r < 0) or (s == ">=" and r > 0) or (s == "=" and r != 0)
               for s, r in zip(lp.senses, lp.rhs)):
            raise InfeasibleError("LP without variables has an unsatisfiable row")
        return FractionalMatching(np.zeros(0), 0.0, np.zeros(m))
    res = simplex(lp.objective, lp.matrix, lp.senses, lp.rhs)
    problems = check_certificate(lp, res.x, res.duals, TAU_FEAS, tol)
    if problems:
        raise NumericalFailure("optimality certificate failed: " + "; ".join(problems))
    x = np.clip(res.x, 0.0, 1.0)
    return FractionalMatching(x, float(lp.objective @ x), res.duals)


def solve_lp_fair(graph: ColoredBipartiteGraph, spec: FairnessSpec,
                  beta_perturbation: float | None = None) -> FractionalMatching:
    return solve(build_lp_fair(graph, spec, beta_perturbation))


# --------------------------------------------------------------------------- file formats


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def _expr(coefs, names, per_line: int = 6) -> str:
    terms = []
    for k, (a, name) in enumerate(zip(coefs, names)):
        sign = "-" if a < 0 else "+"
        if k == 0:
            terms.append(f"{'-' if a < 0 else ''}{_fmt(abs(a))} {name}")
        else:
            terms.append(f"{sign} {_fmt(abs(a))} {name}")
    lines = [" ".join(terms[i:i + per_line]) for i in range(0, len(terms), per_line)]
    return "\n   ".join(lines)


def export_lp(lp: LinearProgram, path) -> None:
    """Write ``lp`` in CPLEX LP text format."""
    m, n = lp.shape
    A = lp.matrix.tocsr()
    out = ["\\ fairmatch LP-Fair", "Maximize"]
    nz = [j for j in range(n) if lp.objective[j] != 0]
    if nz:
        obj = _expr([lp.objective[j] for j in nz], [lp.var_names[j] for j in nz])
    elif n:
        obj = f"0 {lp.var_names[0]}"
    else:
        obj = "0 x_empty"
    out.append(f" obj: {obj}")
    out.append("Subject To")
    sense_txt = {"<=": "<=", ">=": ">=", "=": "="}
    for i in range(m):
        lo, hi = A.indptr[i], A.indptr[i + 1]
        cols, vals = A.indices[lo:hi], A.data[lo:hi]
        if len(cols):
            expr = _expr(vals, [lp.var_names[j] for j in cols])
        elif n:
            expr = f"0 {lp.var_names[0]}"
        else:
            expr = "0 x_empty"
        out.append(f" {lp.row_names[i]}: {expr} {sense_txt[lp.senses[i]]} {_fmt(lp.rhs[i])}")
    out.append("Bounds")
    for name in lp.var_names or ("x_empty",):
        out.append(f" {name} >= 0")
    out.append("End")
    Path(path).write_text("\n".join(out) + "\n")


def read_solution(lp: LinearProgram, path, tol: float = 1e-6) -> FractionalMatching:
    """Import an external solution written as ``name value`` lines.

    Unlisted variables are zero. The vector must satisfy the LP rows and
    ``0 <= x <= 1`` within ``tol`` (scaled by row norm); it is then clamped.
    """
    index = {name: j for j, name in enumerate(lp.var_names)}
    x = np.zeros(len(index))
    for ln in Path(path).read_text().splitlines():
        parts = ln.split()
        if not parts or ln.startswith(("#", "\\")):
            continue
        if len(parts) < 2:
            raise ValueError(f"malformed solution line: {ln!r}")
        name, value = parts[0], float(parts[1])
        if name not in index:
            if name == "x_empty":
                continue
            raise ValueError(f"unknown variable {name!r}")
        if not math.isfinite(value):
            raise ValueError(f"non-finite value for {name}")
        x[index[name]] = value
    if x.size and (x.min() < -tol or x.max() > 1 + tol):
        raise ValueError("imported values leave [0, 1]")
    A, b = lp.matrix, lp.rhs
    row_norm = np.maximum(1.0, np.sqrt(np.asarray(A.multiply(A).sum(axis=1)).ravel()))
    resid = (A @ x - b) / row_norm
    senses = np.array(lp.senses)
    viol = np.where(senses == "<=", resid, np.where(senses == ">=", -resid, np.abs(resid)))
    if viol.size and viol.max() > tol:
        worst = int(np.argmax(viol))
        raise ValueError(f"imported solution violates row {lp.row_names[worst]} by {viol[worst]:.3g}")
    x = np.clip(x, 0.0, 1.0)
    return FractionalMatching(x, float(lp.objective @ x))


def write_solution(lp: LinearProgram, fm: FractionalMatching, path) -> None:
    Path(path).write_text("".join(f"{name} {_fmt(v)}\n" for name, v in zip(lp.var_names, fm.x)))
