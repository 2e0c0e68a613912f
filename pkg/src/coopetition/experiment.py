"""Experiment configuration and the runs behind the CLI subcommands."""
from __future__ import annotations

import csv
import dataclasses
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .dynamics import influence_power, normalize_mode, opinion_vector, write_trajectory_csv
from .errors import ParameterError
from .graph import GraphSpec, build_laplacian, cascading_benchmark, is_strongly_connected, root_nodes
from .stage_game import GameParameters, budget_threshold, unit_schedule
from .strategy import (
    PRACTICAL_CONVERGENCE_TOL,
    StrategyProfile,
    check_sustainability,
    convergence_stage,
    long_term_utility,
    predict_equilibrium,
    run_profile,
)

log = logging.getLogger(__name__)

SUMMARY_SCHEMA_VERSION = 1
SWEEP_COLUMNS = ("profile", "k1", "U1", "U2", "sustainable1", "sustainable2", "sustainable")
TABLE1_COLUMNS = ("n_nodes", "convergence_stage", "proposed_u1", "proposed_u2", "ne_u1", "ne_u2",
                  "proposed_u1_rounded", "proposed_u2_rounded", "ne_u1_rounded", "ne_u2_rounded")


@dataclass
class ExperimentConfig:
    """Everything needed to reproduce a run; defaults are the benchmark setup."""

    graph: str = "cascading:50"
    lambda1: float = 1.0
    lambda2: float = 0.5
    budget1: float | None = None
    budget2: float | None = None
    budget_margin: float = 1.1
    n_stages: int = 5
    period: float = 1.0
    times: list[float] | None = None
    windows: list[float] | None = None
    t0: float = 0.0
    rho_mode: str = "final"
    initial: str | list[float] = "linear"
    profile: str = "repeated-ne"
    k1_range: list[int] | None = None
    out: str = "out"
    samples_per_stage: int = 20
    plot_nodes: list[int] | None = None
    table1_nodes: list[int] = field(default_factory=lambda: [50, 100, 200])
    max_stages: int = 40
    jobs: int = 1

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ParameterError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


def benchmark_preset(n_nodes: int = 50) -> ExperimentConfig:
    """The benchmark setup: costs (1, 0.5), five unit-spaced campaigns of unit window."""
    return ExperimentConfig(graph=f"cascading:{n_nodes}", lambda1=1.0, lambda2=0.5,
                            n_stages=5, period=1.0, times=None, windows=None, t0=0.0,
                            rho_mode="final", initial="linear")


def linear_initial_state(n_nodes: int) -> np.ndarray:
    """Opinions rising linearly from about 0.4 to 0.9 with the node index."""
    n = np.arange(1, n_nodes + 1)
    return 0.4 + n / (2 * n_nodes)


def resolve_graph(source: str) -> GraphSpec:
    if source.startswith("cascading:"):
        try:
            n = int(source.split(":", 1)[1])
        except ValueError:
            raise ParameterError(f"bad graph source {source!r}; expected cascading:<N>") from None
        return cascading_benchmark(n)
    path = Path(source)
    if not path.exists():
        raise ParameterError(f"graph file {source!r} does not exist")
    return GraphSpec.load(path)


@dataclass
class Setup:
    config: ExperimentConfig
    spec: GraphSpec
    laplacian: np.ndarray
    params: GameParameters
    x0: np.ndarray
    thresholds: tuple[float, float]
    rho_per_stage: list

    @property
    def n_nodes(self) -> int:
        return self.spec.n_nodes


def _schedule(cfg: ExperimentConfig, n_stages: int | None = None):
    if cfg.times is None:
        base = unit_schedule(n_stages or cfg.n_stages, cfg.period)
        if cfg.windows is None:
            return base
        return tuple((t, w) for (t, _), w in zip(base, cfg.windows))
    if n_stages is not None and n_stages != len(cfg.times):
        raise ParameterError("cannot extend an explicit campaign schedule")
    windows = cfg.windows if cfg.windows is not None else [cfg.period] * len(cfg.times)
    if len(windows) != len(cfg.times):
        raise ParameterError("times and windows must have the same length")
    return tuple(zip(cfg.times, windows))


def _default_budget(threshold: float, margin: float) -> float:
    if math.isinf(threshold):
        raise ParameterError("a zero advertising cost needs an explicit budget")
    # any positive budget works when nobody ever spends
    return threshold * margin if threshold > 0 else 1.0


def prepare(cfg: ExperimentConfig, n_stages: int | None = None) -> Setup:
    """Validate ``cfg`` and build the graph, state and game parameters."""
    spec = resolve_graph(cfg.graph)
    L = build_laplacian(spec)
    mode = normalize_mode(cfg.rho_mode)
    schedule = _schedule(cfg, n_stages)
    if cfg.initial == "linear":
        x0 = linear_initial_state(spec.n_nodes)
    elif isinstance(cfg.initial, str):
        raise ParameterError(f"unknown initial-opinion rule {cfg.initial!r}")
    else:
        x0 = opinion_vector(cfg.initial)
        if x0.size != spec.n_nodes:
            raise ParameterError(f"initial state has {x0.size} entries for a {spec.n_nodes}-node graph")

    powers = {w: influence_power(L, w, mode) for _, w in schedule}
    rho_per_stage = [powers[w] for _, w in schedule]
    per_window = [budget_threshold(r, GameParameters(cfg.lambda1, cfg.lambda2, 1.0, 1.0, schedule, mode, cfg.t0))
                  for r in powers.values()]
    thresholds = (max(t[0] for t in per_window), max(t[1] for t in per_window))
    b1 = cfg.budget1 if cfg.budget1 is not None else _default_budget(thresholds[0], cfg.budget_margin)
    b2 = cfg.budget2 if cfg.budget2 is not None else _default_budget(thresholds[1], cfg.budget_margin)
    log.info("surplus thresholds %.6g / %.6g, budgets %.6g / %.6g (margin %.3g)",
             thresholds[0], thresholds[1], b1, b2, cfg.budget_margin)
    params = GameParameters(cfg.lambda1, cfg.lambda2, b1, b2, schedule, mode, cfg.t0)
    return Setup(cfg, spec, L, params, x0, thresholds, rho_per_stage)


def _jsonable(value):
    if isinstance(value, float) and math.isinf(value):
        return "inf"
    return value


def _write_json(path: Path, payload: dict) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(json.dumps(payload, indent=1, sort_keys=True) + "\n")
    tmp.replace(path)


def _write_csv(path: Path, columns: Sequence[str], rows: Iterable[Sequence]) -> None:
    tmp = path.with_name(path.name + ".tmp")
    with tmp.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow(["" if v is None else repr(v) if isinstance(v, float) else v for v in row])
    tmp.replace(path)


def _map(fn: Callable, items: Sequence, jobs: int) -> list:
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def ne_convergence_stage(setup: Setup, max_stages: int) -> int | None:
    """Campaign at which repeated equilibrium play first gets within 0.01 of eta."""
    extended = prepare(setup.config, n_stages=max_stages) if setup.config.times is None else setup
    history = run_profile(extended.x0, extended.laplacian, extended.params, StrategyProfile.repeated_ne())
    return convergence_stage(history, tol=PRACTICAL_CONVERGENCE_TOL)


def cmd_run(cfg: ExperimentConfig) -> dict:
    """Run one profile and write trajectory, history and summary files."""
    setup = prepare(cfg)
    profile = StrategyProfile.parse(cfg.profile)
    history = run_profile(setup.x0, setup.laplacian, setup.params, profile, cfg.samples_per_stage)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)

    n = setup.n_nodes
    nodes = cfg.plot_nodes or sorted({1, min(15, n), n})
    if any(not 1 <= m <= n for m in nodes):
        raise ParameterError(f"plot nodes {nodes} fall outside 1..{n}")
    write_trajectory_csv(history.trajectory, out / "trajectory.csv", nodes)
    history.write_json(out / "history.json")
    history.write_stage_csv(out / "stages.csv")

    u1, u2 = long_term_utility(history)
    prediction = predict_equilibrium(history.rho_per_stage, setup.params)
    summary = {
        "schema_version": SUMMARY_SCHEMA_VERSION,
        "graph": cfg.graph,
        "n_nodes": n,
        "profile": str(profile),
        "U1": u1,
        "U2": u2,
        "eta": setup.params.eta,
        "convergence_stage": convergence_stage(history),
        "ne_convergence_stage": ne_convergence_stage(setup, cfg.max_stages),
        "equilibrium_prediction": prediction.to_dict(),
        "budget_thresholds": [_jsonable(t) for t in setup.thresholds],
        "budgets": [setup.params.budget1, setup.params.budget2],
        "budget_margin": cfg.budget_margin,
        "strongly_connected": is_strongly_connected(setup.spec),
        "config": cfg.to_dict(),
    }
    _write_json(out / "summary.json", summary)
    return summary


def _sweep_row(args):
    setup, k1 = args
    history = run_profile(setup.x0, setup.laplacian, setup.params, StrategyProfile.coopetition(k1))
    return k1, history


def cmd_sweep_k1(cfg: ExperimentConfig) -> list[dict]:
    """Long-term utilities of coopetition for each ``k1`` against the equilibrium baseline."""
    setup = prepare(cfg)
    baseline = run_profile(setup.x0, setup.laplacian, setup.params, StrategyProfile.repeated_ne())
    base_u = long_term_utility(baseline)
    k1_values = cfg.k1_range if cfg.k1_range is not None else list(range(setup.params.n_stages + 1))
    rows = [{"profile": "repeated-ne", "k1": None, "U1": base_u[0], "U2": base_u[1],
             "sustainable1": None, "sustainable2": None, "sustainable": None}]
    for k1, history in _map(_sweep_row, [(setup, k1) for k1 in k1_values], cfg.jobs):
        verdict = check_sustainability(history, baseline)
        rows.append({"profile": f"coopetition:{k1}", "k1": k1,
                     "U1": verdict.utilities[0], "U2": verdict.utilities[1],
                     "sustainable1": verdict.player1, "sustainable2": verdict.player2,
                     "sustainable": verdict.sustainable})
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "sweep.csv", SWEEP_COLUMNS, ([r[c] for c in SWEEP_COLUMNS] for r in rows))
    return rows


def table1_row(cfg: ExperimentConfig, n_nodes: int) -> dict:
    """Stage payoffs once repeated equilibrium play has practically converged.

    The equilibrium row is the stage payoff at the convergence campaign
    ``c``; the coopetition row is the payoff of the first silent campaign
    when play stops right after ``c``.
    """
    setup = prepare(cfg.replace(graph=f"cascading:{n_nodes}"), n_stages=cfg.max_stages)
    ne = run_profile(setup.x0, setup.laplacian, setup.params, StrategyProfile.repeated_ne())
    c = convergence_stage(ne)
    if c is None or c >= cfg.max_stages:
        raise ParameterError(f"N={n_nodes}: no practical convergence within {cfg.max_stages} campaigns")
    cs = run_profile(setup.x0, setup.laplacian, setup.params, StrategyProfile.coopetition(c))
    proposed = cs.records[c]
    equilibrium = ne.records[c - 1]
    return {
        "n_nodes": n_nodes, "convergence_stage": c,
        "proposed_u1": proposed.u1, "proposed_u2": proposed.u2,
        "ne_u1": equilibrium.u1, "ne_u2": equilibrium.u2,
        "proposed_u1_rounded": round(proposed.u1), "proposed_u2_rounded": round(proposed.u2),
        "ne_u1_rounded": round(equilibrium.u1), "ne_u2_rounded": round(equilibrium.u2),
    }


def cmd_table1(cfg: ExperimentConfig) -> list[dict]:
    rows = _map(lambda n: table1_row(cfg, n), list(cfg.table1_nodes), cfg.jobs)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "table1.csv", TABLE1_COLUMNS, ([r[c] for c in TABLE1_COLUMNS] for r in rows))
    return rows


def format_table1(rows: list[dict]) -> str:
    header = "N".ljust(34) + "".join(str(r["n_nodes"]).rjust(10) for r in rows)
    lines = [header]
    for label, key in (("coopetition, marketer 1", "proposed_u1"),
                       ("coopetition, marketer 2", "proposed_u2"),
                       ("repeated equilibrium, marketer 1", "ne_u1"),
                       ("repeated equilibrium, marketer 2", "ne_u2")):
        lines.append(label.ljust(34) + "".join(f"{r[key]:10.3f}" for r in rows))
    lines.append("campaigns to converge".ljust(34) + "".join(str(r["convergence_stage"]).rjust(10) for r in rows))
    return "\n".join(lines)


def cmd_validate(cfg: ExperimentConfig) -> dict:
    """Check a config without running it and report what a run would use."""
    setup = prepare(cfg)
    StrategyProfile.parse(cfg.profile)
    prediction = predict_equilibrium(setup.rho_per_stage, setup.params)
    return {
        "n_nodes": setup.n_nodes,
        "n_edges": len(setup.spec.edges),
        "strongly_connected": is_strongly_connected(setup.spec),
        "root_nodes": len(root_nodes(setup.spec)),
        "budget_thresholds": [_jsonable(t) for t in setup.thresholds],
        "budgets": [setup.params.budget1, setup.params.budget2],
        "eta": setup.params.eta,
        "equilibrium_prediction": prediction.to_dict(),
    }
