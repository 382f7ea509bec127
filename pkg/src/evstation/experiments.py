"""Canned experiments: daily profit benchmark, validation grids, spacing study.

Each runner returns plain Python data and optionally writes plot-ready CSV
files with fixed column orders. All randomness flows through per-replication
seed streams, so identical (config, seed, reps) inputs give byte-identical
output files. Within one daily experiment every policy sees the same
arrival trace per replication (common random numbers), which makes the
profit comparisons paired rather than independent.
"""
from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import minimize_scalar

from .config import RunOptions, Scenario
from .economics import EconomicParams, StationParams, price_for_demand
from .optimizer import demand_region_bound, optimize_joap
from .queueing import (
    admission_probability,
    admitted_interarrival_moments,
    analyze_admission,
    load_density,
    mean_wait_theorem1,
    threshold_t_v,
)
from .simulator import (
    GreedyAdmission,
    JoapAdmission,
    QbaAdmission,
    SimMetrics,
    gen_poisson_arrivals,
    replicate,
    rng_for_stream,
    run_loss_admission,
)

POLICY_NAMES = ("joap", "qba", "greedy")

DAILY_COLUMNS = [
    "scenario",
    "policy",
    "n",
    "demand_kwh",
    "price_per_kwh",
    "admission_rate",
    "mean_wait_min",
    "profit_per_hour",
    "profit_block",
]
AGGREGATE_COLUMNS = ["policy", "daily_profit", "admission_rate", "mean_wait_min"]
ADMISSION_COLUMNS = ["n", "lambda", "d", "analytic", "simulated", "gap"]
WAIT_COLUMNS = ["n", "lambda", "d", "rho", "analytic", "simulated", "rel_gap", "flag"]
TAU_COLUMNS = ["scenario", "profit_fixed", "tau_best", "profit_best", "gain"]


@dataclass(frozen=True)
class ScenarioResult:
    scenario: str
    policy: str
    n: int | None
    demand: float
    price: float
    metrics: SimMetrics
    duration: float


@dataclass(frozen=True)
class ExperimentReport:
    """Per-scenario rows plus duration-weighted daily aggregates and ratios."""

    rows: list
    daily_profit: dict
    admission_rate: dict
    mean_wait: dict
    ratios: dict = field(default_factory=dict)
    policies_by_scenario: dict = field(default_factory=dict)


def benchmark_demand(econ: EconomicParams) -> float:
    """Demand maximizing per-EV margin d*(r(d) - p_e), ignoring congestion.

    This is the operating point a station would pick with no queueing model:
    both benchmark policies charge every admitted EV this amount.
    """
    hi = demand_region_bound(econ)
    if hi <= 0:
        return 0.0
    res = minimize_scalar(
        lambda d: -(price_for_demand(d, econ) - econ.p_e) * d,
        bounds=(1e-9, econ.phi),
        method="bounded",
        options={"xatol": 1e-10},
    )
    return float(res.x)


def build_policy(name: str, scenario: Scenario) -> tuple[object, int | None, float]:
    """Instantiate one admission policy for a scenario.

    Returns (policy, slot count or None, demand). The JoAP policy is placed
    at its optimized operating point; both benchmarks use the myopic
    margin-maximizing demand.
    """
    econ, station = scenario.econ, scenario.station
    if name == "joap":
        plan = optimize_joap(econ, station)
        return JoapAdmission(plan.n_star, plan.t_v, plan.d_star), plan.n_star, plan.d_star
    d_b = benchmark_demand(econ)
    if name == "qba":
        return QbaAdmission(station.parking_capacity, d_b), None, d_b
    if name == "greedy":
        return GreedyAdmission(d_b, econ), None, d_b
    raise ValueError(f"unknown policy {name!r}; expected one of {POLICY_NAMES}")


def run_daily_experiment(
    scenarios: list,
    run: RunOptions,
    policies: tuple = POLICY_NAMES,
    out_dir=None,
) -> ExperimentReport:
    """Benchmark the requested policies across all scenarios of one day.

    Every policy is replicated with the same seed streams, so arrival
    traces match pairwise. Writes daily_scenarios.csv, daily_aggregate.csv
    and daily_summary.json when out_dir is given.
    """
    for name in policies:
        if name not in POLICY_NAMES:
            raise ValueError(f"unknown policy {name!r}; expected one of {POLICY_NAMES}")
    rows: list[ScenarioResult] = []
    policy_specs: dict = {}
    for scenario in scenarios:
        horizon = run.horizon if run.horizon is not None else scenario.duration
        for name in policies:
            policy, n, demand = build_policy(name, scenario)
            metrics = replicate(
                policy, scenario.econ, scenario.station, horizon, run.reps, run.seed
            )
            price = price_for_demand(demand, scenario.econ) if demand > 0 else 0.0
            rows.append(
                ScenarioResult(
                    scenario=scenario.name,
                    policy=name,
                    n=n,
                    demand=demand,
                    price=price,
                    metrics=metrics,
                    duration=scenario.duration,
                )
            )
            policy_specs[(scenario.name, name)] = {"n": n, "demand": demand, "price": price}
    total_time = sum(s.duration for s in scenarios)
    daily_profit, admission_rate, mean_wait = {}, {}, {}
    for name in policies:
        mine = [r for r in rows if r.policy == name]
        daily_profit[name] = sum(r.metrics.profit_per_hour * r.duration / 60.0 for r in mine)
        admission_rate[name] = sum(r.metrics.admission_rate * r.duration for r in mine) / total_time
        mean_wait[name] = sum(r.metrics.mean_wait * r.duration for r in mine) / total_time
    ratios = {}
    if "joap" in policies:
        for other in policies:
            if other != "joap" and daily_profit[other] != 0:
                ratios[f"joap_vs_{other}"] = daily_profit["joap"] / daily_profit[other]
    report = ExperimentReport(
        rows=rows,
        daily_profit=daily_profit,
        admission_rate=admission_rate,
        mean_wait=mean_wait,
        ratios=ratios,
        policies_by_scenario=policy_specs,
    )
    if out_dir is not None:
        _write_daily_outputs(report, policies, Path(out_dir))
    return report


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.10g}"
    return str(x)


def _write_csv(path: Path, columns: list, rows: list) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _write_daily_outputs(report: ExperimentReport, policies: tuple, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_csv(
        out_dir / "daily_scenarios.csv",
        DAILY_COLUMNS,
        [
            [
                r.scenario,
                r.policy,
                r.n,
                r.demand,
                r.price,
                r.metrics.admission_rate,
                r.metrics.mean_wait,
                r.metrics.profit_per_hour,
                r.metrics.profit_per_hour * r.duration / 60.0,
            ]
            for r in report.rows
        ],
    )
    _write_csv(
        out_dir / "daily_aggregate.csv",
        AGGREGATE_COLUMNS,
        [
            [name, report.daily_profit[name], report.admission_rate[name], report.mean_wait[name]]
            for name in policies
        ],
    )
    summary = {
        "daily_profit": report.daily_profit,
        "admission_rate": report.admission_rate,
        "mean_wait_min": report.mean_wait,
        "ratios": report.ratios,
        "scenarios": [
            {
                "scenario": r.scenario,
                "policy": r.policy,
                "n": r.n,
                "demand_kwh": r.demand,
                "price_per_kwh": r.price,
                **asdict(r.metrics),
            }
            for r in report.rows
        ],
    }
    (out_dir / "daily_summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True))


DEFAULT_ADMISSION_GRID = tuple(
    (n, lam) for n in (3, 4, 5) for lam in (0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.4)
)


def run_admission_validation(
    station_template: StationParams,
    demand: float,
    grid=DEFAULT_ADMISSION_GRID,
    arrivals_per_point: int = 200_000,
    seed: int = 20240521,
    out_path=None,
) -> list:
    """Analytic vs loss-mode simulated admission rate per (n, λ) grid point.

    The simulation runs the slot-spacing rule with no charging stage, so any
    gap is pure Monte-Carlo noise around the blocking formula. Rows are
    (n, lambda, d, analytic, simulated, gap).
    """
    rows = []
    for idx, (n, lam) in enumerate(grid):
        station = StationParams(
            m=station_template.m,
            alpha=station_template.alpha,
            parking_capacity=station_template.parking_capacity,
            lam=lam,
            tau=station_template.tau,
        )
        t_v = threshold_t_v(n, demand, station)
        analytic = admission_probability(n, demand, station)
        rng = rng_for_stream(seed, idx)
        horizon = arrivals_per_point / lam
        arrivals = gen_poisson_arrivals(lam, horizon, rng)
        simulated = run_loss_admission(arrivals, n, t_v) / len(arrivals) if len(arrivals) else 1.0
        rows.append([n, lam, demand, analytic, simulated, abs(analytic - simulated)])
    if out_path is not None:
        _write_csv(Path(out_path), ADMISSION_COLUMNS, rows)
    return rows


DEFAULT_WAIT_GRID = tuple(
    (n, lam, d)
    for n in (4, 5, 6)
    for lam in (0.1, 0.2, 0.3, 0.4)
    for d in (0.5, 1.0, 2.0)
)


def run_wait_validation(
    station_template: StationParams,
    econ: EconomicParams,
    grid=DEFAULT_WAIT_GRID,
    reps: int = 40,
    horizon: float = 2000.0,
    seed: int = 20240521,
    out_path=None,
) -> list:
    """Closed-form mean wait vs simulated mean wait over a (n, λ, d) grid.

    Unstable points (ρ ≥ 1) are flagged and carry no wait values. Rows are
    (n, lambda, d, rho, analytic, simulated, rel_gap, flag).
    """
    rows = []
    for n, lam, d in grid:
        station = StationParams(
            m=station_template.m,
            alpha=station_template.alpha,
            parking_capacity=station_template.parking_capacity,
            lam=lam,
            tau=station_template.tau,
        )
        analysis = analyze_admission(n, d, station)
        rho = load_density(analysis.p_admit, analysis.service_time, station)
        if rho >= 1.0:
            rows.append([n, lam, d, rho, None, None, None, "unstable"])
            continue
        moments = admitted_interarrival_moments(analysis, station)
        analytic = mean_wait_theorem1(analysis, moments, station)
        policy = JoapAdmission(n, analysis.t_v, d)
        metrics = replicate(policy, econ, station, horizon, reps, seed)
        simulated = metrics.mean_wait
        denom = max(simulated, 1e-12)
        rows.append([n, lam, d, rho, analytic, simulated, abs(analytic - simulated) / denom, "ok"])
    if out_path is not None:
        _write_csv(Path(out_path), WAIT_COLUMNS, rows)
    return rows


def run_tau_study(
    scenarios: list,
    run: RunOptions,
    tau_grid=None,
    out_path=None,
) -> dict:
    """Simulated profit at the fixed spacing factor vs the per-scenario best.

    For each scenario the operating point is re-optimized at every τ on the
    grid and simulated on common random numbers; the best τ is the one with
    the highest simulated profit. The fixed spacing is always part of the
    grid, so per-scenario gain is a maximum over a superset and never
    negative. Returns per-scenario rows and the aggregate relative gain.
    """
    from dataclasses import replace as _replace

    from .optimizer import DEFAULT_TAU_GRID

    grid = tuple(tau_grid) if tau_grid is not None else DEFAULT_TAU_GRID
    rows = []
    fixed_total = 0.0
    best_total = 0.0
    for scenario in scenarios:
        horizon = run.horizon if run.horizon is not None else scenario.duration

        def simulate(tau: float) -> float:
            station = _replace(scenario.station, tau=tau)
            plan = optimize_joap(scenario.econ, station)
            policy = JoapAdmission(plan.n_star, plan.t_v, plan.d_star)
            metrics = replicate(policy, scenario.econ, station, horizon, run.reps, run.seed)
            return metrics.profit_per_hour * scenario.duration / 60.0

        tau_fixed = scenario.station.tau
        profit_fixed = simulate(tau_fixed)
        tau_best, profit_best = tau_fixed, profit_fixed
        for tau in grid:
            if tau == tau_fixed:
                continue
            profit = simulate(tau)
            if profit > profit_best:
                tau_best, profit_best = tau, profit
        fixed_total += profit_fixed
        best_total += profit_best
        gain = (profit_best - profit_fixed) / abs(profit_fixed) if profit_fixed else 0.0
        rows.append([scenario.name, profit_fixed, tau_best, profit_best, gain])
    aggregate_gain = (best_total - fixed_total) / abs(fixed_total) if fixed_total else 0.0
    if out_path is not None:
        _write_csv(Path(out_path), TAU_COLUMNS, rows)
    return {"rows": rows, "aggregate_gain": aggregate_gain, "reference_gain": 0.059}
