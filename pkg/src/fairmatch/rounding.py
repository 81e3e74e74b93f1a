"""Proposal draw plus online contention resolution: rounds a fractional matching.

Every right vertex proposes to at most one neighbor, ``u`` with probability
``x[u, v]``. Right vertices are processed in a fixed order and a proposal to
``u`` at step ``t`` is accepted with probability

    a = (1/2) / (1 - (1/2) * sum_{i < t} x[u, v_i])

provided ``u`` is still free, which makes every proposal succeed with
probability exactly 1/2.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .graph import ColoredBipartiteGraph, Matching
from .lp import TAU_FEAS, FractionalMatching


class InfeasibleFractionalError(ValueError):
    pass


@dataclass(frozen=True)
class RoundingTrace:
    """Per-step record of one rounding run.

    ``proposals[t]`` is the proposed edge index or -1 for no proposal;
    ``acceptance[t]`` / ``bits[t]`` are NaN / -1 when nothing was proposed.
    """

    order: tuple[int, ...]
    proposals: tuple[int, ...]
    acceptance: tuple[float, ...]
    bits: tuple[int, ...]
    matched: tuple[int, ...]  # edge added at step t, or -1

    def records(self, graph: ColoredBipartiteGraph):
        for t, v in enumerate(self.order):
            e = self.proposals[t]
            yield {
                "t": t + 1,
                "v": v,
                "proposal": None if e < 0 else graph.edges[e].u,
                "acceptanceParam": None if e < 0 else self.acceptance[t],
                "bit": None if e < 0 else self.bits[t],
                "matched": self.matched[t] >= 0,
            }

    def dump(self, graph: ColoredBipartiteGraph, path) -> None:
        with Path(path).open("w") as fh:
            for rec in self.records(graph):
                fh.write(json.dumps(rec) + "\n")


def acceptance_param(prefix_mass: float) -> float:
    """Bernoulli parameter for a proposal to a vertex with earlier mass ``prefix_mass``."""
    return min(1.0, 0.5 / (1.0 - 0.5 * prefix_mass))


def acceptance_prob(graph: ColoredBipartiteGraph, x, order: Sequence[int] | None, t: int, u: int) -> float:
    """Acceptance parameter of a proposal to ``u`` at 1-based step ``t``.

    Sums ``x[u, v_i]`` over the right vertices processed before step ``t``.
    """
    x = _as_array(x)
    order = list(range(graph.n_v)) if order is None else list(order)
    earlier = set(order[: t - 1])
    prefix = math.fsum(x[i] for i in graph.incident_u(u) if graph.edges[i].v in earlier)
    return acceptance_param(prefix)


def _as_array(x) -> np.ndarray:
    return np.asarray(x.x if isinstance(x, FractionalMatching) else x, dtype=float)


def check_fractional(graph: ColoredBipartiteGraph, x: np.ndarray, tol: float = TAU_FEAS) -> None:
    if x.shape != (graph.num_edges,):
        raise InfeasibleFractionalError("x must have one value per edge")
    if x.size and (x.min() < -tol or x.max() > 1 + tol or not np.all(np.isfinite(x))):
        raise InfeasibleFractionalError("x values must lie in [0, 1]")
    load_u = np.zeros(graph.n_u)
    load_v = np.zeros(graph.n_v)
    for e, xe in zip(graph.edges, x):
        load_u[e.u] += xe
        load_v[e.v] += xe
    worst = max(load_u.max(initial=0.0), load_v.max(initial=0.0))
    if worst > 1 + tol:
        raise InfeasibleFractionalError(f"vertex load {worst:.12g} exceeds 1")


def _resolve_order(graph: ColoredBipartiteGraph, order) -> list[int]:
    if order is None or (isinstance(order, str) and order == "identity"):
        return list(range(graph.n_v))
    order = [int(v) for v in order]
    if sorted(order) != list(range(graph.n_v)):
        raise ValueError("order must be a permutation of the right vertices")
    return order


def step_uniforms(seed: int, steps: int) -> np.ndarray:
    """Two uniforms per step from a Philox stream keyed by ``seed``.

    Row ``t`` sits at a fixed counter offset, so it depends only on
    ``(seed, t)``; rows are independent streams per step.
    """
    rng = np.random.Generator(np.random.Philox(key=int(seed)))
    return rng.random((steps, 2))


def round_ocrs(
    graph: ColoredBipartiteGraph,
    x,
    order=None,
    seed: int = 0,
    check: bool = True,
) -> tuple[Matching, RoundingTrace]:
    """Round ``x`` into a random matching; deterministic given ``seed`` and ``order``."""
    x = _as_array(x)
    if check:
        check_fractional(graph, x)
    order = _resolve_order(graph, order)
    uni = step_uniforms(seed, len(order))
    edges = graph.edges
    prefix = [0.0] * graph.n_u
    matched_u = [False] * graph.n_u
    proposals, acc, bits, matched = [], [], [], []
    for t, v in enumerate(order):
        inc = graph.incident_v(v)
        # inverse CDF over neighbors sorted by left index; leftover mass means no proposal
        r, cum, chosen = uni[t, 0], 0.0, -1
        for i in inc:
            cum += x[i]
            if r < cum:
                chosen = i
                break
        if chosen < 0:
            proposals.append(-1); acc.append(math.nan); bits.append(-1); matched.append(-1)
        else:
            u = edges[chosen].u
            a = acceptance_param(prefix[u])
            bit = int(uni[t, 1] < a)
            proposals.append(chosen); acc.append(a); bits.append(bit)
            if bit and not matched_u[u]:
                matched_u[u] = True
                matched.append(chosen)
            else:
                matched.append(-1)
        for i in inc:
            prefix[edges[i].u] += x[i]
    trace = RoundingTrace(tuple(order), tuple(proposals), tuple(acc), tuple(bits), tuple(matched))
    return Matching.from_edges(graph, [e for e in matched if e >= 0]), trace


@dataclass(frozen=True)
class SelectabilityEstimate:
    trials: int
    frequency: np.ndarray  # per edge, Pr[e in M]
    radius: np.ndarray  # 3 binomial standard errors around x_e / 2
    proposed: np.ndarray  # per edge, number of trials where F_v = u
    matched_given_proposed: np.ndarray  # per edge, matched count among those (a match implies a proposal)
    weights: np.ndarray  # matching weight per trial
    color_counts: np.ndarray  # (trials, num_colors) of |M_c|


def estimate_selectability(graph: ColoredBipartiteGraph, x, trials: int, base_seed: int = 0,
                           order=None) -> SelectabilityEstimate:
    """Run ``round_ocrs`` with seeds ``base_seed .. base_seed + trials - 1``."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    x = _as_array(x)
    check_fractional(graph, x)
    m = graph.num_edges
    hits = np.zeros(m, dtype=np.int64)
    proposed = np.zeros(m, dtype=np.int64)
    weights = np.zeros(trials)
    counts = np.zeros((trials, graph.num_colors), dtype=np.int64)
    for k in range(trials):
        mt, tr = round_ocrs(graph, x, order, base_seed + k, check=False)
        for e in tr.proposals:
            if e >= 0:
                proposed[e] += 1
        for e in mt.edges:
            hits[e] += 1
        weights[k] = mt.total_weight
        counts[k] = mt.per_color_count
    p0 = x / 2
    radius = 3 * np.sqrt(p0 * (1 - p0) / trials)
    return SelectabilityEstimate(trials, hits / trials, radius, proposed, hits.copy(), weights, counts)
