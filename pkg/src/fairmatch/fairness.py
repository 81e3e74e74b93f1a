"""Proportionality checks, violation factors and tail bounds for rounded matchings."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .graph import ColoredBipartiteGraph, FairnessSpec, Matching

# slack on share comparisons so that e.g. 0.9/3 * 10 == 3 still counts as within bounds
SHARE_TOL = 1e-12


@dataclass(frozen=True)
class ColorCheck:
    color: int  # 1-based in reports
    count: int
    share: float | None
    lower: float
    upper: float
    passed: bool | None


@dataclass(frozen=True)
class FairnessReport:
    matching_size: int
    delta: float
    per_color: tuple[ColorCheck, ...]
    violation_lower: float | None
    violation_upper: float | None
    degenerate: bool
    failure_bound_two_sided: tuple[float, ...] | None = None

    @property
    def passed(self) -> bool | None:
        if self.degenerate:
            return None
        return all(c.passed for c in self.per_color)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        for key in ("violation_lower", "violation_upper"):
            if d[key] is not None and math.isinf(d[key]):
                d[key] = "inf"
        return d


def _within(share: float, lo: float, hi: float) -> bool:
    return bool(lo - SHARE_TOL <= share <= hi + SHARE_TOL)


def check_delta_fair(matching: Matching, spec: FairnessSpec, delta: float = 0.0,
                     graph: ColoredBipartiteGraph | None = None, x=None) -> FairnessReport:
    """Check ``(1 - delta) alpha_c <= |M_c| / |M| <= (1 + delta) beta_c`` for every color.

    An empty matching yields a degenerate report with no verdict. When
    ``graph`` and ``x`` are given the two-sided failure bounds are attached.
    """
    if delta < 0:
        raise ValueError("delta must be >= 0")
    ell = len(matching.per_color_count)
    alpha, beta = spec.bounds(ell)
    size = matching.size
    bound = None
    if graph is not None and x is not None and delta > 0:
        bound = tuple(float(f) for f in failure_bound_two_sided(graph, x, delta))
    checks = []
    if size == 0:
        for c in range(ell):
            checks.append(ColorCheck(c + 1, 0, None, float((1 - delta) * alpha[c]),
                                     float((1 + delta) * beta[c]), None))
        return FairnessReport(0, delta, tuple(checks), None, None, True, bound)
    v_lo, v_hi = 1.0, 1.0
    for c in range(ell):
        k = matching.per_color_count[c]
        share = k / size
        lo, hi = float((1 - delta) * alpha[c]), float((1 + delta) * beta[c])
        checks.append(ColorCheck(c + 1, k, share, lo, hi, _within(share, lo, hi)))
        if alpha[c] > 0 and share < alpha[c] - SHARE_TOL:
            v_lo = max(v_lo, math.inf if share == 0 else float(alpha[c]) / share)
        if share > beta[c] + SHARE_TOL:
            v_hi = max(v_hi, math.inf if beta[c] == 0 else share / float(beta[c]))
    return FairnessReport(size, delta, tuple(checks), v_lo, v_hi, False, bound)


def is_balanced(matching: Matching, spec: FairnessSpec) -> bool:
    """Exact ``(alpha, beta)`` balance; the empty matching counts only when every alpha is 0."""
    if matching.size == 0:
        alpha, _ = spec.bounds(len(matching.per_color_count))
        return bool(np.all(alpha == 0))
    return bool(check_delta_fair(matching, spec, 0.0).passed)


def satisfies_beta(matching: Matching, beta) -> bool:
    """``|M_c| <= beta_c |M|`` for all colors, vacuously true for the empty matching."""
    if matching.size == 0:
        return True
    beta = np.broadcast_to(np.asarray(beta, dtype=float), (len(matching.per_color_count),))
    return all(k <= b * matching.size + SHARE_TOL * matching.size
               for k, b in zip(matching.per_color_count, beta))


def color_mass(graph: ColoredBipartiteGraph, x) -> np.ndarray:
    """``S_c = sum of x_e over edges of color c``."""
    x = np.asarray(getattr(x, "x", x), dtype=float)
    return np.bincount(graph.colors, weights=x, minlength=graph.num_colors) if x.size else np.zeros(graph.num_colors)


def failure_bound_two_sided(graph: ColoredBipartiteGraph, x, delta: float) -> np.ndarray:
    """Per-color bound ``min(1, 4 exp(-delta^2 S_c / 28))``."""
    if delta <= 0:
        raise ValueError("delta must be > 0")
    return np.minimum(1.0, 4.0 * np.exp(-(delta ** 2) * color_mass(graph, x) / 28.0))


def failure_bound_one_sided(x, beta: float, epsilon: float) -> float:
    """``min(1, 2 exp(-epsilon^2 beta sum(x) / 28))``."""
    if not (0 < epsilon < 1):
        raise ValueError("epsilon must lie in (0, 1)")
    if not (0 < beta <= 1):
        raise ValueError("beta must lie in (0, 1]")
    total = float(np.sum(getattr(x, "x", x)))
    return min(1.0, 2.0 * math.exp(-(epsilon ** 2) * beta * total / 28.0))


def concentration_bound(graph: ColoredBipartiteGraph, x, delta: float) -> np.ndarray:
    """Per-color ``min(1, 2 exp(-delta^2 S_c / 28))`` for deviations of ``|M_c|`` from ``S_c / 2``."""
    return np.minimum(1.0, 2.0 * np.exp(-(delta ** 2) * color_mass(graph, x) / 28.0))


@dataclass(frozen=True)
class ConcentrationEstimate:
    colors: tuple[int, ...]
    expected: np.ndarray  # S_c / 2
    frequency: np.ndarray  # Pr[| |M_c| - S_c/2 | >= delta S_c / 2]
    radius: np.ndarray  # 3 binomial standard errors of the frequency
    bound: np.ndarray


def empirical_concentration(graph: ColoredBipartiteGraph, x, colors=None, delta: float = 0.5,
                            trials: int = 1000, base_seed: int = 0, order=None) -> ConcentrationEstimate:
    """Monte Carlo frequency of ``|M_c|`` deviating from ``S_c/2`` by ``delta S_c/2`` or more."""
    from .rounding import estimate_selectability

    colors = tuple(range(graph.num_colors)) if colors is None else tuple(colors)
    est = estimate_selectability(graph, x, trials, base_seed, order)
    expected = color_mass(graph, x)[list(colors)] / 2
    dev = np.abs(est.color_counts[:, list(colors)] - expected)
    freq = np.mean(dev >= delta * expected - 1e-12, axis=0)
    radius = 3 * np.sqrt(freq * (1 - freq) / trials)
    bound = concentration_bound(graph, x, delta)[list(colors)]
    return ConcentrationEstimate(colors, expected, freq, radius, bound)
