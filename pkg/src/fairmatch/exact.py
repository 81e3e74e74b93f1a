"""Exact beta-fairness via a perturbed LP, and brute-force optimum for small instances."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fairness import is_balanced, satisfies_beta
from .graph import ColoredBipartiteGraph, FairnessSpec, Matching
from .lp import build_lp_fair, solve
from .rounding import round_ocrs

DEFAULT_WORK_LIMIT = 10_000_000
DEFAULT_BRUTE_THRESHOLD = 100.0


class WorkLimitExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class ExactModeResult:
    matching: Matching
    satisfied_beta: bool
    attempts: int
    lp_objective: float
    lp_mass: float
    method: str = "ocrs"


def solve_exact_beta(
    graph: ColoredBipartiteGraph,
    beta,
    epsilon: float,
    max_attempts: int = 20,
    seed: int = 0,
    order=None,
) -> ExactModeResult:
    """Round the LP with ``beta`` tightened to ``(1 - epsilon) beta`` and keep the best fair attempt.

    Attempt ``i`` uses seed ``seed + i``. The best attempt is the heaviest one
    whose matching meets ``beta`` exactly; if none does, the heaviest attempt
    is returned with ``satisfied_beta=False``.
    """
    if not (0 < epsilon < 1):
        raise ValueError("epsilon must lie in (0, 1)")
    betas = np.atleast_1d(np.asarray(beta, dtype=float))
    if np.any(betas <= 0) or np.any(betas >= 1):
        raise ValueError("beta must lie in (0, 1)")
    if max_attempts < 1:
        raise ValueError("max_attempts must be >= 1")
    beta_arg = tuple(betas) if betas.size > 1 else float(betas[0])
    alpha_arg = (0.0,) * betas.size if betas.size > 1 else 0.0
    spec = FairnessSpec(alpha=alpha_arg, beta=beta_arg, epsilon=epsilon)
    fm = solve(build_lp_fair(graph, spec, beta_perturbation=epsilon))
    _, beta_c = spec.bounds(graph.num_colors)
    best_fair, best_any = None, None
    for i in range(max_attempts):
        m, _ = round_ocrs(graph, fm.x, order, seed + i)
        if best_any is None or m.total_weight > best_any.total_weight:
            best_any = m
        if satisfies_beta(m, beta_c) and (best_fair is None or m.total_weight > best_fair.total_weight):
            best_fair = m
    chosen = best_fair if best_fair is not None else best_any
    return ExactModeResult(chosen, satisfies_beta(chosen, beta_c), max_attempts,
                           fm.objective_value, fm.mass)


def brute_force_size_bound(max_weight: float, min_weight: float, c: float, beta: float,
                           epsilon: float) -> int:
    """``floor((U/L)^2 * C / (beta (1 - epsilon)))``, a cap on the optimum's size."""
    if min_weight <= 0 or beta <= 0 or c <= 0 or not (0 <= epsilon < 1):
        raise ValueError("need L > 0, beta > 0, C > 0 and epsilon in [0, 1)")
    value = (max_weight / min_weight) ** 2 * c / (beta * (1 - epsilon))
    # guard against 199.99999999 style float noise below an exact integer
    return int(math.floor(value + 1e-9 * max(1.0, value)))


def matching_count_bound(graph: ColoredBipartiteGraph, size_cap: int) -> int:
    """Upper bound on the number of matchings with at most ``size_cap`` edges.

    Each left (or right) vertex keeps at most one edge, giving the degree
    products; the binomial sum counts edge subsets up to the cap.
    """
    prod_u = math.prod(len(graph.incident_u(u)) + 1 for u in range(graph.n_u))
    prod_v = math.prod(len(graph.incident_v(v)) + 1 for v in range(graph.n_v))
    subsets = sum(math.comb(graph.num_edges, k) for k in range(size_cap + 1))
    return min(prod_u, prod_v, subsets)


def brute_force_opt(
    graph: ColoredBipartiteGraph,
    spec: FairnessSpec,
    size_cap: int | None = None,
    work_limit: int = DEFAULT_WORK_LIMIT,
) -> Matching | None:
    """Maximum-weight ``(alpha, beta)``-balanced matching by enumeration.

    Matchings are enumerated depth-first over edges sorted by decreasing
    weight, up to ``size_cap`` edges. The empty matching is a candidate only
    when every ``alpha`` is zero; returns None when nothing qualifies. Raises
    :class:`WorkLimitExceeded` up front when :func:`matching_count_bound`
    exceeds ``work_limit``, and as a backstop after that many visits.
    """
    m = graph.num_edges
    cap = m if size_cap is None else min(size_cap, m)
    if matching_count_bound(graph, cap) > work_limit:
        raise WorkLimitExceeded(f"enumeration bound exceeds work limit {work_limit}")
    order = sorted(range(m), key=lambda i: (-graph.edges[i].weight, i))
    alpha, beta = spec.bounds(graph.num_colors)
    edges = graph.edges
    used_u, used_v = set(), set()
    counts = [0] * graph.num_colors
    chosen: list[int] = []
    best: list = [None, -math.inf]
    work = [0]

    def balanced(size):
        return all(alpha[c] * size - 1e-9 <= counts[c] <= beta[c] * size + 1e-9
                   for c in range(graph.num_colors))

    def consider(weight):
        size = len(chosen)
        if size == 0:
            ok = bool(np.all(alpha == 0))
        else:
            ok = balanced(size)
        if ok and weight > best[1] + 1e-12:
            best[0], best[1] = list(chosen), weight

    def dfs(start, weight):
        work[0] += 1
        if work[0] > work_limit:
            raise WorkLimitExceeded(f"more than {work_limit} matchings enumerated")
        consider(weight)
        if len(chosen) >= cap:
            return
        for k in range(start, m):
            e = edges[order[k]]
            if e.u in used_u or e.v in used_v:
                continue
            used_u.add(e.u); used_v.add(e.v); counts[e.color] += 1; chosen.append(order[k])
            dfs(k + 1, weight + e.weight)
            used_u.discard(e.u); used_v.discard(e.v); counts[e.color] -= 1; chosen.pop()

    dfs(0, 0.0)
    if best[0] is None:
        return None
    result = Matching.from_edges(graph, best[0])
    assert is_balanced(result, spec)
    return result


def solve_beta_fair(
    graph: ColoredBipartiteGraph,
    beta,
    epsilon: float,
    max_attempts: int = 20,
    seed: int = 0,
    brute_threshold: float = DEFAULT_BRUTE_THRESHOLD,
    work_limit: int = DEFAULT_WORK_LIMIT,
) -> ExactModeResult:
    """Exact beta-fair matching: brute force when ``beta * sum(x) <= brute_threshold``, else OCRS retries.

    With per-color bounds the smallest ``beta_c`` is used for both the
    threshold test and the enumeration size cap, which keeps the cap valid.

    Falls back to rounding when enumeration exceeds ``work_limit``.
    """
    result = solve_exact_beta(graph, beta, epsilon, max_attempts, seed)
    betas = np.atleast_1d(np.asarray(beta, dtype=float))
    if float(np.min(betas)) * result.lp_mass > brute_threshold or graph.num_edges == 0:
        return result
    ws = graph.weights
    cap = brute_force_size_bound(ws.max(), ws.min(), brute_threshold, float(np.min(betas)), epsilon)
    spec = FairnessSpec(alpha=(0.0,) * betas.size if betas.size > 1 else 0.0,
                        beta=tuple(betas) if betas.size > 1 else float(betas[0]), epsilon=epsilon)
    try:
        opt = brute_force_opt(graph, spec, size_cap=cap, work_limit=work_limit)
    except WorkLimitExceeded:
        return result
    # alpha = 0 so the empty matching is always a candidate
    return ExactModeResult(opt, True, 0, result.lp_objective, result.lp_mass, method="brute")
