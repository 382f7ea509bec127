"""Admission control, pricing and scheduling analytics for an EV charging station.

The package models the station as two queues in series: a virtual
admission queue that regulates how often EVs may enter, followed by a
multi-port FIFO charging queue with deterministic service. It provides
the closed-form analysis of that tandem system, a profit-maximizing
optimizer over the admission parameters and the charged energy, an exact
Markov-chain oracle for verification, a discrete-event simulator with two
benchmark policies, and batch experiment runners with CSV output.
"""
from .config import ConfigError, RunOptions, Scenario, load_config, parse_config, with_penalty
from .ctmc import TwoPhaseChain, blocking_probability, build_generator, occupancy_marginal, steady_state
from .economics import (
    DomainError,
    EconomicParams,
    StationParams,
    demand_response,
    penalty,
    per_ev_profit,
    price_for_demand,
    utility,
)
from .experiments import (
    ExperimentReport,
    benchmark_demand,
    build_policy,
    run_admission_validation,
    run_daily_experiment,
    run_tau_study,
    run_wait_validation,
)
from .optimizer import (
    JoapPolicy,
    RelaxedSolution,
    brute_force_oracle,
    demand_region_bound,
    optimize_joap,
    optimize_tau,
    profit_s,
    solve_relaxed,
)
from .queueing import (
    AdmissionAnalysis,
    ArrivalMoments,
    PhaseFit,
    admission_probability,
    admitted_interarrival_moments,
    analyze_admission,
    erlang_blocking,
    erlang_blocking_real,
    erlang_steady_state,
    fit_mixture_exponential,
    load_density,
    mean_wait_ph_d1,
    mean_wait_theorem1,
    threshold_t_v,
)
from .simulator import (
    EvRecord,
    GreedyAdmission,
    JoapAdmission,
    QbaAdmission,
    SimMetrics,
    gen_poisson_arrivals,
    replicate,
    rng_for_stream,
    run_loss_admission,
    run_simulation,
    write_trace_csv,
)

__version__ = "1.0.0"
