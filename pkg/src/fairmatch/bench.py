"""Synthetic-instance sweeps comparing the rounding algorithm with the peeling baseline."""

from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .baseline import peel_matching
from .fairness import check_delta_fair
from .graph import FairnessSpec, NotBipartiteError, generate_erdos_renyi
from .lp import (
    BUILTIN_VARIABLE_LIMIT,
    LpError,
    build_lp_fair,
    build_matching_lp,
    export_lp,
    read_solution,
    solve,
)
from .rounding import round_ocrs

CSV_VERSION_LINE = "# fairmatch-bench-csv v1"
COLUMNS = [
    "instance_id", "n", "p_rule", "ell", "alpha", "beta", "bipartite", "seed", "algorithm",
    "weight", "vanilla_lp", "pof", "viol_lower", "viol_upper", "runtime_ms", "status",
]
RUNTIME_COLUMNS = ("runtime_ms",)
ALGORITHMS = ("proposal", "peeling", "vanillaLp")

P_RULES = {
    "10/n": lambda n: min(1.0, 10.0 / n),
    "0.5": lambda n: 0.5,
    "log^2(n)/n": lambda n: min(1.0, math.log(n) ** 2 / n),
}
P_RULES["log²(n)/n"] = P_RULES["log^2(n)/n"]
ELL_RULES = {
    "2": lambda n: 2,
    "3": lambda n: 3,
    "ceil(log n)": lambda n: max(1, math.ceil(math.log(n))),
}
SPEC_RULES = {
    "0.9/1.1": (0.9, 1.1),
    "0.75/1.25": (0.75, 1.25),
}


class SchemaError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    """Parameter grid of a sweep. Defaults reproduce the full published protocol."""

    n_values: list[int] = field(default_factory=lambda: [50, 250, 500, 1000])
    p_rules: list[str] = field(default_factory=lambda: ["10/n", "0.5", "log^2(n)/n"])
    ell_rules: list[str] = field(default_factory=lambda: ["2", "3", "ceil(log n)"])
    spec_rules: list[str] = field(default_factory=lambda: ["0.9/1.1", "0.75/1.25"])
    repetitions: int = 10
    bipartite: list[bool] = field(default_factory=lambda: [True, False])
    seed: int = 0
    algorithms: list[str] = field(default_factory=lambda: list(ALGORITHMS))
    weight_range: tuple[float, float] = (1.0, 2.0)
    solutions_dir: str | None = None
    lp_export_dir: str | None = None

    def __post_init__(self):
        for name, table in (("p rule", P_RULES), ("ell rule", ELL_RULES), ("spec rule", SPEC_RULES)):
            rules = {"p rule": self.p_rules, "ell rule": self.ell_rules, "spec rule": self.spec_rules}[name]
            for r in rules:
                if r not in table:
                    raise ValueError(f"unknown {name} {r!r}")
        for a in self.algorithms:
            if a not in ALGORITHMS:
                raise ValueError(f"unknown algorithm {a!r}")
        for n in self.n_values:
            if n < 2:
                raise ValueError("n must be >= 2")
            for r in self.p_rules:
                if not 0 <= P_RULES[r](n) <= 1:
                    raise ValueError(f"p rule {r} invalid at n={n}")
            for r in self.spec_rules:
                lo, hi = SPEC_RULES[r]
                for er in self.ell_rules:
                    ell = ELL_RULES[er](n)
                    FairnessSpec(lo / ell, min(1.0, hi / ell))
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        data = json.loads(Path(path).read_text())
        if "weight_range" in data:
            data["weight_range"] = tuple(data["weight_range"])
        return cls(**data)

    def instances(self):
        """Yield one cell per generated instance, in a fixed order."""
        for n in self.n_values:
            for pi, pr in enumerate(self.p_rules):
                for li, lr in enumerate(self.ell_rules):
                    for si, sr in enumerate(self.spec_rules):
                        for rep in range(self.repetitions):
                            ss = np.random.SeedSequence([self.seed, n, pi, li, si, rep])
                            inst_seed = int(ss.generate_state(1)[0])
                            for bip in self.bipartite:
                                yield _Cell(n, pr, lr, sr, rep, bip, inst_seed, self)


@dataclass(frozen=True)
class _Cell:
    n: int
    p_rule: str
    ell_rule: str
    spec_rule: str
    rep: int
    bipartite: bool
    seed: int
    config: ExperimentConfig

    @property
    def ell(self) -> int:
        return ELL_RULES[self.ell_rule](self.n)

    @property
    def spec(self) -> FairnessSpec:
        lo, hi = SPEC_RULES[self.spec_rule]
        return FairnessSpec(lo / self.ell, min(1.0, hi / self.ell))

    @property
    def instance_id(self) -> str:
        c = self.config
        return (f"n{self.n}-p{c.p_rules.index(self.p_rule)}-l{c.ell_rules.index(self.ell_rule)}"
                f"-s{c.spec_rules.index(self.spec_rule)}-r{self.rep}-{'bip' if self.bipartite else 'gnp'}")


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        if math.isinf(v):
            return "inf"
        return f"{v:.17g}"
    return str(v)


def vanilla_lp_objective(graph) -> float:
    """Optimum of the matching LP without proportionality rows."""
    return solve(build_matching_lp(graph)).objective_value


def _fractional(cell: _Cell, graph, lp, kind: str):
    """Solve ``lp`` in-process, or load an external solution for oversized LPs."""
    if lp.shape[1] <= BUILTIN_VARIABLE_LIMIT:
        return solve(lp)
    cfg = cell.config
    if cfg.lp_export_dir:
        Path(cfg.lp_export_dir).mkdir(parents=True, exist_ok=True)
        export_lp(lp, Path(cfg.lp_export_dir) / f"{cell.instance_id}.{kind}.lp")
    if cfg.solutions_dir:
        sol = Path(cfg.solutions_dir) / f"{cell.instance_id}.{kind}.sol"
        if sol.exists():
            return read_solution(lp, sol)
    return None


def run_instance(cell: _Cell) -> list[dict]:
    """Rows for every configured algorithm on one instance."""
    spec = cell.spec
    base = {
        "instance_id": cell.instance_id, "n": cell.n, "p_rule": cell.p_rule, "ell": cell.ell,
        "alpha": spec.alpha, "beta": spec.beta, "bipartite": cell.bipartite, "seed": cell.seed,
    }
    algos = cell.config.algorithms
    try:
        graph = generate_erdos_renyi(cell.n, P_RULES[cell.p_rule](cell.n), cell.ell,
                                     cell.config.weight_range, cell.bipartite, cell.seed)
    except NotBipartiteError:
        return [dict(base, algorithm=a, status="non-bipartite-unsupported") for a in algos]

    rows = []
    t0 = time.perf_counter()
    vanilla, vanilla_status = None, "ok"
    try:
        fm = _fractional(cell, graph, build_matching_lp(graph), "vanilla")
        if fm is None:
            vanilla_status = "external-solver-required"
        else:
            vanilla = fm.objective_value
    except LpError as exc:
        vanilla_status = f"error:{type(exc).__name__}"
    vanilla_ms = (time.perf_counter() - t0) * 1e3

    def metrics(matching, ms):
        rep = check_delta_fair(matching, spec, 0.0)
        w = matching.total_weight
        pof = vanilla / w if (vanilla is not None and w > 0) else None
        return dict(base, weight=w, vanilla_lp=vanilla, pof=pof,
                    viol_lower=rep.violation_lower, viol_upper=rep.violation_upper,
                    runtime_ms=ms, status="ok")

    for algo in algos:
        if algo == "vanillaLp":
            rows.append(dict(base, algorithm=algo, weight=vanilla, vanilla_lp=vanilla,
                             pof=1.0 if vanilla else None, runtime_ms=vanilla_ms, status=vanilla_status))
        elif algo == "proposal":
            t0 = time.perf_counter()
            try:
                fm = _fractional(cell, graph, build_lp_fair(graph, spec), "fair")
            except LpError as exc:
                rows.append(dict(base, algorithm=algo, status=f"error:{type(exc).__name__}"))
                continue
            if fm is None:
                rows.append(dict(base, algorithm=algo, status="external-solver-required"))
                continue
            matching, _ = round_ocrs(graph, fm.x, None, cell.seed)
            rows.append(dict(metrics(matching, (time.perf_counter() - t0) * 1e3), algorithm=algo))
        elif algo == "peeling":
            t0 = time.perf_counter()
            matching = peel_matching(graph, spec)
            rows.append(dict(metrics(matching, (time.perf_counter() - t0) * 1e3), algorithm=algo))
    return rows


# rows with these statuses are dropped and recomputed when a sweep resumes
RETRY_STATUSES = ("external-solver-required",)


def _completed(out_path: Path) -> set[tuple[str, str]]:
    """Finished (instance, algorithm) keys; rewrites the file without retryable rows."""
    if not out_path.exists():
        return set()
    lines = out_path.read_text().splitlines(keepends=True)
    header = [ln for ln in lines if ln.startswith("#")]
    body = [ln for ln in lines if not ln.startswith("#")]
    rows = list(csv.DictReader(body))
    keep = [r for r in rows if r["status"] not in RETRY_STATUSES]
    if len(keep) != len(rows):
        with out_path.open("w", newline="") as fh:
            fh.writelines(header)
            writer = csv.DictWriter(fh, COLUMNS, lineterminator="\n")
            writer.writeheader()
            writer.writerows(keep)
    return {(r["instance_id"], r["algorithm"]) for r in keep}


def run_sweep(config: ExperimentConfig, out_path, workers: int = 1) -> Path:
    """Run every instance of ``config`` and append rows to ``out_path``.

    Instances whose rows are already present are skipped, so an interrupted
    sweep resumes where it stopped; rows waiting on an external solver are
    dropped and recomputed. Rows are flushed one instance at a time in
    instance order, after whatever the file already held.
    """
    out_path = Path(out_path)
    done = _completed(out_path)
    cells = [c for c in config.instances()
             if not all((c.instance_id, a) in done for a in config.algorithms)]
    fresh = not out_path.exists()
    with out_path.open("a", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if fresh:
            fh.write(CSV_VERSION_LINE + "\n")
            writer.writerow(COLUMNS)
        if workers > 1:
            with ProcessPoolExecutor(workers) as pool:
                for rows in pool.map(run_instance, cells):
                    _write(writer, fh, rows, done)
        else:
            for cell in cells:
                _write(writer, fh, run_instance(cell), done)
    return out_path


def _write(writer, fh, rows, done):
    for row in rows:
        if (row["instance_id"], row["algorithm"]) in done:
            continue
        writer.writerow([_fmt(row.get(col)) for col in COLUMNS])
    fh.flush()


def read_results(csv_path):
    import pandas as pd

    df = pd.read_csv(csv_path, comment="#")
    missing = [c for c in COLUMNS if c not in df.columns]
    if missing:
        raise SchemaError(f"missing columns: {missing}")
    return df


METRICS = ["weight", "vanilla_lp", "pof", "viol_lower", "viol_upper", "runtime_ms"]


def summarize(csv_path, group_by, out_path=None):
    """Mean and population standard deviation of each metric per group of ``ok`` rows."""
    df = read_results(csv_path)
    group_by = [group_by] if isinstance(group_by, str) else list(group_by)
    unknown = [g for g in group_by if g not in df.columns]
    if unknown:
        raise SchemaError(f"cannot group by unknown columns {unknown}")
    df = df[df["status"] == "ok"]
    # infinite violation factors (a color missing entirely) give nan spreads
    with np.errstate(invalid="ignore"):
        agg = df.groupby(group_by, sort=True)[METRICS].agg(["mean", lambda s: s.std(ddof=0), "count"])
    agg.columns = [f"{m}_{'std' if s == '<lambda_0>' else s}" for m, s in agg.columns]
    agg = agg.reset_index()
    if out_path is not None:
        agg.to_csv(out_path, index=False)
    return agg


def config_to_json(config: ExperimentConfig) -> str:
    return json.dumps(asdict(config), indent=2)
