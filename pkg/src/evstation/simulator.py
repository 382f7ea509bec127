"""Discrete-event simulation of the charging station.

A single replication is strictly event-ordered: arrivals are generated up
front, admission decisions are made online by the chosen policy, and
admitted EVs are served FIFO on m ports with deterministic service. Queued
EVs drain to completion after the arrival horizon so their waits and
profits are not censored. Simultaneous departure/arrival ties are resolved
departures-first (a completion at exactly the arrival instant has left the
system).
"""
from __future__ import annotations

import csv
import heapq
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .economics import DomainError, EconomicParams, StationParams, per_ev_profit


@dataclass
class EvRecord:
    """One simulated EV, admitted or not."""

    arrival_time: float
    demand: float
    admitted: bool
    sub_process: int | None = None
    service_start: float | None = None
    wait: float = 0.0
    profit: float = 0.0


@dataclass(frozen=True)
class SimMetrics:
    """Replication-aggregated simulation output with 95% confidence half-widths."""

    admission_rate: float
    mean_wait: float
    profit_per_hour: float
    replication_count: int
    half_width_95: dict = field(default_factory=dict)


TRACE_COLUMNS = ["arrival_time", "demand", "admitted", "sub_process", "service_start", "wait", "profit"]


def gen_poisson_arrivals(lam: float, horizon: float, rng: np.random.Generator) -> np.ndarray:
    """Strictly increasing Poisson arrival times on (0, horizon]."""
    if lam <= 0:
        raise DomainError(f"lam must be positive, got {lam}")
    if horizon < 0:
        raise DomainError(f"horizon must be non-negative, got {horizon}")
    if horizon == 0:
        return np.empty(0)
    # Draw in blocks of the expected count plus slack until the horizon is covered.
    times = []
    t = 0.0
    block = max(16, int(lam * horizon * 1.2) + 16)
    while t <= horizon:
        gaps = rng.exponential(1.0 / lam, size=block)
        for g in gaps:
            t += g
            if t > horizon:
                break
            times.append(t)
    return np.asarray(times)


class SubProcessAdmitter:
    """Online admission with n slots, each enforcing spacing t_v.

    An arrival at exactly a slot's free time is admissible (inclusive
    boundary); among free slots the lowest index is used so traces are
    reproducible.
    """

    def __init__(self, n: int, t_v: float):
        if n < 1:
            raise DomainError(f"n must be >= 1, got {n}")
        if t_v <= 0:
            raise DomainError(f"t_v must be positive, got {t_v}")
        self.n = n
        self.t_v = t_v
        self.free_at = [0.0] * n

    def admit(self, t: float) -> int | None:
        """Return the assigned slot index, or None on rejection."""
        for i, free in enumerate(self.free_at):
            if free <= t:
                self.free_at[i] = t + self.t_v
                return i
        return None


def run_loss_admission(arrivals: np.ndarray, n: int, t_v: float) -> int:
    """Fast count of admissions under the slot rule with no charging queue.

    Equivalent to SubProcessAdmitter for counting purposes: an arrival is
    admitted iff fewer than n admissions occurred in the window (t - t_v, t].
    """
    window: deque = deque()
    admitted = 0
    for t in arrivals:
        while window and window[0] + t_v <= t:
            window.popleft()
        if len(window) < n:
            window.append(t)
            admitted += 1
    return admitted


class JoapAdmission:
    """Slot-based admission at a fixed demand (the optimized operating point)."""

    name = "joap"

    def __init__(self, n: int, t_v: float, demand: float):
        self.n = n
        self.t_v = t_v
        self.demand = demand
        self._admitter: SubProcessAdmitter | None = None

    def reset(self):
        self._admitter = SubProcessAdmitter(self.n, self.t_v)

    def decide(self, t: float, in_system: int, server_free: list, service: float) -> int | None:
        return self._admitter.admit(t)


class QbaAdmission:
    """Admit while the in-system count is below a fixed threshold."""

    name = "qba"

    def __init__(self, threshold: int, demand: float):
        if threshold < 0:
            raise DomainError(f"threshold must be >= 0, got {threshold}")
        self.threshold = threshold
        self.demand = demand

    def reset(self):
        pass

    def decide(self, t: float, in_system: int, server_free: list, service: float) -> int | None:
        return 0 if in_system < self.threshold else None


class GreedyAdmission:
    """Admit iff the EV's own margin beats its exactly-known FIFO wait penalty."""

    name = "greedy"

    def __init__(self, demand: float, econ: EconomicParams):
        self.demand = demand
        self.econ = econ
        from .economics import price_for_demand

        self._margin = (price_for_demand(demand, econ) - econ.p_e) * demand

    def reset(self):
        pass

    def decide(self, t: float, in_system: int, server_free: list, service: float) -> int | None:
        wait = max(0.0, min(server_free) - t)
        return 0 if self._margin - self.econ.c * wait > 0 else None


def run_simulation(
    policy,
    econ: EconomicParams,
    station: StationParams,
    horizon: float,
    rng: np.random.Generator,
) -> tuple[list, SimMetrics]:
    """One replication: Poisson arrivals, online admission, FIFO charging.

    Returns the per-EV records and single-run metrics. Deterministic given
    the generator state.
    """
    if horizon <= 0:
        raise DomainError(f"horizon must be positive, got {horizon}")
    arrivals = gen_poisson_arrivals(station.lam, horizon, rng)
    policy.reset()
    d = policy.demand
    service = station.service_time(d)
    server_free = [0.0] * station.m
    completions: list = []  # heap of in-system completion times
    records = []
    for t in arrivals:
        while completions and completions[0] <= t:
            heapq.heappop(completions)
        in_system = len(completions)
        slot = policy.decide(t, in_system, server_free, service)
        if slot is not None and in_system >= station.parking_capacity:
            slot = None  # lot full: the admission is converted to a rejection
        if slot is None:
            records.append(EvRecord(arrival_time=t, demand=d, admitted=False))
            continue
        j = min(range(station.m), key=lambda k: server_free[k])
        start = max(t, server_free[j])
        server_free[j] = start + service
        heapq.heappush(completions, start + service)
        wait = start - t
        records.append(
            EvRecord(
                arrival_time=t,
                demand=d,
                admitted=True,
                sub_process=slot if isinstance(policy, JoapAdmission) else None,
                service_start=start,
                wait=wait,
                profit=per_ev_profit(d, wait, econ),
            )
        )
    return records, summarize_run(records, horizon)


def summarize_run(records: list, horizon: float) -> SimMetrics:
    """Single-run metrics; an empty arrival stream counts as full admission."""
    total = len(records)
    admitted = [r for r in records if r.admitted]
    rate = len(admitted) / total if total else 1.0
    mean_wait = float(np.mean([r.wait for r in admitted])) if admitted else 0.0
    profit = sum(r.profit for r in records)
    return SimMetrics(
        admission_rate=rate,
        mean_wait=mean_wait,
        profit_per_hour=profit / (horizon / 60.0),
        replication_count=1,
    )


def rng_for_stream(seed: int, stream_id: int) -> np.random.Generator:
    """Reproducible, independent stream for one replication index."""
    return np.random.default_rng(np.random.SeedSequence((int(seed), int(stream_id))))


def replicate(
    policy,
    econ: EconomicParams,
    station: StationParams,
    horizon: float,
    reps: int,
    seed: int,
) -> SimMetrics:
    """Independent replications with 95% confidence half-widths per metric."""
    if reps < 1:
        raise DomainError(f"reps must be >= 1, got {reps}")
    rates, waits, profits = [], [], []
    for rep in range(reps):
        _, metrics = run_simulation(policy, econ, station, horizon, rng_for_stream(seed, rep))
        rates.append(metrics.admission_rate)
        waits.append(metrics.mean_wait)
        profits.append(metrics.profit_per_hour)
    def half_width(xs):
        if len(xs) < 2:
            return float("inf")
        return 1.96 * float(np.std(xs, ddof=1)) / math.sqrt(len(xs))
    return SimMetrics(
        admission_rate=float(np.mean(rates)),
        mean_wait=float(np.mean(waits)),
        profit_per_hour=float(np.mean(profits)),
        replication_count=reps,
        half_width_95={
            "admission_rate": half_width(rates),
            "mean_wait": half_width(waits),
            "profit_per_hour": half_width(profits),
        },
    )


def write_trace_csv(records: list, path) -> None:
    """One row per EV in arrival order, fixed column order, header included."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_COLUMNS)
        for r in records:
            writer.writerow(
                [
                    f"{r.arrival_time:.10g}",
                    f"{r.demand:.10g}",
                    int(r.admitted),
                    "" if r.sub_process is None else r.sub_process,
                    "" if r.service_start is None else f"{r.service_start:.10g}",
                    f"{r.wait:.10g}",
                    f"{r.profit:.10g}",
                ]
            )
