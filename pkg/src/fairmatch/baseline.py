"""Greedy color round-robin ("peeling") baseline.

This reconstructs the comparator only from its described behavior: edges are
added one color at a time, heaviest feasible edge first, and every guessed
optimum size in a range is tried. It is an approximation of the original
baseline, good enough for relative benchmarking.
"""

from __future__ import annotations

from dataclasses import dataclass

from .fairness import is_balanced
from .graph import ColoredBipartiteGraph, FairnessSpec, Matching


@dataclass(frozen=True)
class PeelingConfig:
    """Inclusive range of guessed optimum sizes; defaults to ``[ell, n_u + n_v]``."""

    min_size: int | None = None
    max_size: int | None = None

    def resolve(self, graph: ColoredBipartiteGraph) -> range:
        lo = graph.num_colors if self.min_size is None else self.min_size
        hi = graph.n_u + graph.n_v if self.max_size is None else self.max_size
        if lo < graph.num_colors or hi > graph.n_u + graph.n_v:
            raise ValueError("size range must lie within [ell, n_u + n_v]")
        return range(lo, hi + 1)


def round_robin_sequence(graph: ColoredBipartiteGraph) -> list[int]:
    """Edges picked by cycling through colors, heaviest vertex-disjoint edge each turn.

    Stops at the first color with no feasible edge left. Every guessed size
    ``s`` builds exactly the first ``s`` entries of this sequence, so one pass
    serves all guesses.
    """
    by_color = [sorted(idx, key=lambda i: (-graph.edges[i].weight, i)) for idx in graph.color_classes()]
    ptr = [0] * graph.num_colors
    used_u, used_v = set(), set()
    picked: list[int] = []
    while True:
        for c in range(graph.num_colors):
            lst = by_color[c]
            while ptr[c] < len(lst):
                e = graph.edges[lst[ptr[c]]]
                if e.u not in used_u and e.v not in used_v:
                    break
                ptr[c] += 1
            if ptr[c] >= len(lst):
                return picked
            i = lst[ptr[c]]
            ptr[c] += 1
            used_u.add(graph.edges[i].u)
            used_v.add(graph.edges[i].v)
            picked.append(i)


def peel_matching(graph: ColoredBipartiteGraph, spec: FairnessSpec,
                  config: PeelingConfig | None = None) -> Matching:
    """Best balanced matching over all guessed sizes, empty if no guess yields one."""
    config = config or PeelingConfig()
    seq = round_robin_sequence(graph)
    best = Matching.empty(graph)
    for s in config.resolve(graph):
        if s > len(seq):
            break
        cand = Matching.from_edges(graph, seq[:s])
        if is_balanced(cand, spec) and cand.total_weight > best.total_weight:
            best = cand
    return best
