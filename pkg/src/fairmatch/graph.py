"""Edge-colored bipartite graphs, fairness bounds, matchings, generators and file I/O."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

GRAPH_HEADER = "fairmatch-graph v1"


class GraphFormatError(ValueError):
    pass


class NotBipartiteError(ValueError):
    pass


@dataclass(frozen=True)
class Edge:
    u: int
    v: int
    weight: float
    color: int  # 0-based internally; files use 1-based


@dataclass(frozen=True)
class ColoredBipartiteGraph:
    """Weighted bipartite graph whose edge colors partition the edge set.

    Left vertices are ``0..n_u-1``, right vertices ``0..n_v-1``; each edge
    stores side-local indices. Construction does not validate, call
    :func:`validate` (or :meth:`checked`) for that.
    """

    n_u: int
    n_v: int
    edges: tuple[Edge, ...]
    num_colors: int = 1
    _adj_v: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)
    _adj_u: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(self.edges))
        adj_u: list[list[int]] = [[] for _ in range(max(self.n_u, 0))]
        adj_v: list[list[int]] = [[] for _ in range(max(self.n_v, 0))]
        for i, e in enumerate(self.edges):
            if 0 <= e.u < self.n_u:
                adj_u[e.u].append(i)
            if 0 <= e.v < self.n_v:
                adj_v[e.v].append(i)
        # adjacency of right vertices sorted by left endpoint: fixed inverse-CDF order
        adj_v = [sorted(a, key=lambda i: (self.edges[i].u, i)) for a in adj_v]
        object.__setattr__(self, "_adj_u", tuple(tuple(a) for a in adj_u))
        object.__setattr__(self, "_adj_v", tuple(tuple(a) for a in adj_v))

    @classmethod
    def from_tuples(cls, n_u: int, n_v: int, edges: Iterable[Sequence], num_colors: int | None = None):
        """Build from ``(u, v, weight, color)`` tuples with 0-based colors."""
        es = tuple(Edge(int(u), int(v), float(w), int(c)) for u, v, w, c in edges)
        if num_colors is None:
            num_colors = max((e.color for e in es), default=0) + 1
        return cls(n_u, n_v, es, num_colors)

    def checked(self) -> "ColoredBipartiteGraph":
        problems = validate(self)
        if problems:
            raise GraphFormatError("; ".join(problems))
        return self

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def weights(self) -> np.ndarray:
        return np.array([e.weight for e in self.edges], dtype=float)

    @property
    def colors(self) -> np.ndarray:
        return np.array([e.color for e in self.edges], dtype=int)

    def incident_u(self, u: int) -> tuple[int, ...]:
        return self._adj_u[u]

    def incident_v(self, v: int) -> tuple[int, ...]:
        """Edges at right vertex ``v``, sorted by left endpoint."""
        return self._adj_v[v]

    def edge_index(self) -> dict[tuple[int, int], int]:
        return {(e.u, e.v): i for i, e in enumerate(self.edges)}

    def color_classes(self) -> list[list[int]]:
        classes: list[list[int]] = [[] for _ in range(self.num_colors)]
        for i, e in enumerate(self.edges):
            classes[e.color].append(i)
        return classes


def validate(graph: ColoredBipartiteGraph) -> list[str]:
    """Return every invariant violation of ``graph``; an empty list means ok."""
    problems = []
    if graph.n_u < 0 or graph.n_v < 0:
        problems.append("negative vertex count")
    if graph.num_colors < 1:
        problems.append("num_colors must be >= 1")
    seen: dict[tuple[int, int], int] = {}
    for i, e in enumerate(graph.edges):
        if not (0 <= e.u < graph.n_u):
            problems.append(f"edge {i}: dangling left index {e.u}")
        if not (0 <= e.v < graph.n_v):
            problems.append(f"edge {i}: dangling right index {e.v}")
        if not math.isfinite(e.weight):
            problems.append(f"edge {i}: non-finite weight")
        elif e.weight <= 0:
            problems.append(f"edge {i}: nonpositive weight")
        if not (0 <= e.color < graph.num_colors):
            problems.append(f"edge {i}: bad color {e.color}")
        key = (e.u, e.v)
        if key in seen:
            problems.append(f"edge {i}: duplicate edge of edge {seen[key]}")
        else:
            seen[key] = i
    return problems


@dataclass(frozen=True)
class FairnessSpec:
    """Proportionality bounds, either global ``(alpha, beta)`` or one pair per color.

    ``epsilon`` is the perturbation used only by the exact beta-fair mode.
    """

    alpha: float | tuple[float, ...] = 0.0
    beta: float | tuple[float, ...] = 1.0
    epsilon: float = 0.1

    def __post_init__(self):
        if isinstance(self.alpha, (list, tuple, np.ndarray)):
            object.__setattr__(self, "alpha", tuple(float(a) for a in self.alpha))
        else:
            object.__setattr__(self, "alpha", float(self.alpha))
        if isinstance(self.beta, (list, tuple, np.ndarray)):
            object.__setattr__(self, "beta", tuple(float(b) for b in self.beta))
        else:
            object.__setattr__(self, "beta", float(self.beta))
        if isinstance(self.alpha, tuple) != isinstance(self.beta, tuple):
            raise ValueError("alpha and beta must both be global or both per-color")
        if self.per_color and len(self.alpha) != len(self.beta):
            raise ValueError("per-color alpha and beta lengths differ")
        for a, b in zip(np.atleast_1d(self.alpha), np.atleast_1d(self.beta)):
            if not (0.0 <= a <= b <= 1.0):
                raise ValueError(f"need 0 <= alpha <= beta <= 1, got ({a}, {b})")
        if not (0.0 < self.epsilon < 1.0):
            raise ValueError("epsilon must lie in (0, 1)")

    @property
    def per_color(self) -> bool:
        return isinstance(self.alpha, tuple)

    def bounds(self, num_colors: int) -> tuple[np.ndarray, np.ndarray]:
        """Per-color ``(alpha_c, beta_c)`` arrays of length ``num_colors``."""
        if self.per_color:
            if len(self.alpha) != num_colors:
                raise ValueError(
                    f"per-color spec has {len(self.alpha)} entries, graph has {num_colors} colors"
                )
            return np.array(self.alpha), np.array(self.beta)
        return np.full(num_colors, self.alpha), np.full(num_colors, self.beta)


@dataclass(frozen=True)
class Matching:
    edges: tuple[int, ...]
    per_color_count: tuple[int, ...]
    total_weight: float

    @classmethod
    def from_edges(cls, graph: ColoredBipartiteGraph, edges: Iterable[int]) -> "Matching":
        """Build a matching from edge indices, raising if two edges share a vertex."""
        edges = tuple(sorted(set(int(i) for i in edges)))
        used_u, used_v = set(), set()
        counts = [0] * graph.num_colors
        for i in edges:
            e = graph.edges[i]
            if e.u in used_u or e.v in used_v:
                raise ValueError(f"edge {i} shares a vertex with another matched edge")
            used_u.add(e.u)
            used_v.add(e.v)
            counts[e.color] += 1
        return cls(edges, tuple(counts), math.fsum(graph.edges[i].weight for i in edges))

    @classmethod
    def empty(cls, graph: ColoredBipartiteGraph) -> "Matching":
        return cls((), (0,) * graph.num_colors, 0.0)

    @property
    def size(self) -> int:
        return len(self.edges)

    def pairs(self, graph: ColoredBipartiteGraph) -> list[tuple[int, int]]:
        return [(graph.edges[i].u, graph.edges[i].v) for i in self.edges]


# --------------------------------------------------------------------------- generators


def _check_er_args(n, p, ell, weight_range):
    if n < 2:
        raise ValueError("n must be >= 2")
    if not (0.0 <= p <= 1.0):
        raise ValueError("p must lie in [0, 1]")
    if ell < 1:
        raise ValueError("ell must be >= 1")
    lo, hi = weight_range
    if not lo < hi:
        raise ValueError("weight range needs lo < hi")
    if lo <= 0:
        raise ValueError("weights must be positive, need lo > 0")


def sample_gnp(n: int, p: float, ell: int, weight_range=(1.0, 2.0), seed: int = 0):
    """Sample a colored weighted G(n, p) plus a fair-coin vertex bipartition.

    Returns ``(pairs, weights, colors, side)`` where ``pairs`` is an (m, 2)
    array of vertex pairs ``i < j`` and ``side[i]`` is True for left vertices.
    The seed is split into four independent streams (partition, edges,
    weights, colors); weights and colors are drawn for every vertex pair so
    that an edge's attributes do not depend on ``p``.
    """
    _check_er_args(n, p, ell, weight_range)
    part_ss, edge_ss, weight_ss, color_ss = np.random.SeedSequence(seed).spawn(4)
    iu, ju = np.triu_indices(n, k=1)
    side = np.random.default_rng(part_ss).random(n) < 0.5
    keep = np.random.default_rng(edge_ss).random(iu.size) < p
    lo, hi = weight_range
    w = np.random.default_rng(weight_ss).uniform(lo, hi, iu.size)
    c = np.random.default_rng(color_ss).integers(0, ell, iu.size)
    pairs = np.stack([iu[keep], ju[keep]], axis=1)
    return pairs, w[keep], c[keep], side


def generate_erdos_renyi(
    n: int,
    p: float,
    ell: int,
    weight_range=(1.0, 2.0),
    bipartite_split: bool = True,
    seed: int = 0,
) -> ColoredBipartiteGraph:
    """Random colored bipartite instance from G(n, p).

    With ``bipartite_split`` the vertices are split by independent fair coins
    and only crossing pairs are kept. Without it the raw G(n, p) is returned
    only if it happens to be bipartite; otherwise :class:`NotBipartiteError`.
    """
    pairs, w, c, side = sample_gnp(n, p, ell, weight_range, seed)
    if not bipartite_split:
        side = _two_coloring(n, pairs)
    left = np.flatnonzero(side)
    right = np.flatnonzero(~side)
    lpos = {int(g): k for k, g in enumerate(left)}
    rpos = {int(g): k for k, g in enumerate(right)}
    edges = []
    for (i, j), wt, col in zip(pairs.tolist(), w.tolist(), c.tolist()):
        if side[i] == side[j]:
            continue
        a, b = (i, j) if side[i] else (j, i)
        edges.append(Edge(lpos[a], rpos[b], wt, col))
    return ColoredBipartiteGraph(len(left), len(right), tuple(edges), ell)


def _two_coloring(n: int, pairs: np.ndarray) -> np.ndarray:
    import networkx as nx

    g = nx.Graph()
    g.add_nodes_from(range(n))
    g.add_edges_from(map(tuple, pairs.tolist()))
    if not nx.is_bipartite(g):
        raise NotBipartiteError("sampled G(n, p) is not bipartite")
    coloring = nx.bipartite.color(g)
    return np.array([coloring[i] == 0 for i in range(n)])


def generate_star_fixture(n: int, epsilon: float):
    """Two-colored star where one red edge carries ``1 - epsilon`` of the center's mass.

    Center ``u`` is the single left vertex; right vertices ``v_1..v_n`` get blue
    edges (color 0) with ``x = epsilon / n`` and ``v_{n+1}`` gets the red edge
    (color 1) with ``x = 1 - epsilon``. Returns ``(graph, x)``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not (0.0 < epsilon < 1.0):
        raise ValueError("epsilon must lie in (0, 1)")
    edges = [Edge(0, t, 1.0, 0) for t in range(n)] + [Edge(0, n, 1.0, 1)]
    x = np.array([epsilon / n] * n + [1.0 - epsilon])
    return ColoredBipartiteGraph(1, n + 1, tuple(edges), 2), x


# --------------------------------------------------------------------------- file I/O


def write_graph(graph: ColoredBipartiteGraph, path) -> None:
    path = Path(path)
    if path.suffix == ".json":
        path.write_text(json.dumps(graph_to_json(graph)))
        return
    lines = [GRAPH_HEADER, f"{graph.n_u} {graph.n_v} {graph.num_edges} {graph.num_colors}"]
    lines += [f"{e.u} {e.v} {e.weight:.17g} {e.color + 1}" for e in graph.edges]
    path.write_text("\n".join(lines) + "\n")


def graph_to_json(graph: ColoredBipartiteGraph) -> dict:
    return {
        "format": "fairmatch-graph",
        "version": 1,
        "nU": graph.n_u,
        "nV": graph.n_v,
        "m": graph.num_edges,
        "ell": graph.num_colors,
        "edges": [[e.u, e.v, e.weight, e.color + 1] for e in graph.edges],
    }


def graph_from_json(data: dict) -> ColoredBipartiteGraph:
    try:
        edges = [(u, v, w, c - 1) for u, v, w, c in data["edges"]]
        graph = ColoredBipartiteGraph.from_tuples(data["nU"], data["nV"], edges, data["ell"])
    except (KeyError, TypeError, ValueError) as exc:
        raise GraphFormatError(f"malformed graph JSON: {exc}") from exc
    if "m" in data and data["m"] != graph.num_edges:
        raise GraphFormatError("edge count does not match 'm'")
    return graph.checked()


def read_graph(path) -> ColoredBipartiteGraph:
    """Read a graph in the line-oriented text format or its JSON mirror."""
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        return graph_from_json(json.loads(text))
    rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not rows or " ".join(rows[0]) != GRAPH_HEADER:
        raise GraphFormatError(f"missing header '{GRAPH_HEADER}'")
    try:
        n_u, n_v, m, ell = (int(t) for t in rows[1])
        body = rows[2:]
        if len(body) != m:
            raise GraphFormatError(f"expected {m} edge lines, found {len(body)}")
        edges = [(int(u), int(v), float(w), int(c) - 1) for u, v, w, c in body]
    except (IndexError, ValueError) as exc:
        if isinstance(exc, GraphFormatError):
            raise
        raise GraphFormatError(f"malformed graph file: {exc}") from exc
    return ColoredBipartiteGraph.from_tuples(n_u, n_v, edges, ell).checked()


def read_matching(graph: ColoredBipartiteGraph, path) -> Matching:
    """Read ``u v`` lines and resolve them to edges of ``graph``."""
    index = graph.edge_index()
    edges = []
    for ln in Path(path).read_text().splitlines():
        if not ln.strip() or ln.startswith("#"):
            continue
        u, v = (int(t) for t in ln.split()[:2])
        if (u, v) not in index:
            raise GraphFormatError(f"matching references missing edge ({u}, {v})")
        edges.append(index[(u, v)])
    return Matching.from_edges(graph, edges)


def write_matching(graph: ColoredBipartiteGraph, matching: Matching, path) -> None:
    Path(path).write_text("".join(f"{u} {v}\n" for u, v in matching.pairs(graph)))
