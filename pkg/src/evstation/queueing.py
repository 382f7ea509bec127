"""Closed-form analytics of the admission/charging tandem queue.

The virtual admission queue is an M/D/n/n loss system whose occupancy
distribution is Erlang; the admitted stream feeds an m-port FIFO charging
queue with deterministic service. This module provides the loss-system
steady state, the admitted inter-arrival moments, a two-branch exponential
mixture fit of the coordinated inter-arrival time, and mean-wait estimates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .economics import DomainError, StationParams


def erlang_steady_state(n: int, offered_load: float) -> np.ndarray:
    """Occupancy distribution P_0..P_n of an n-server loss system.

    Uses the term recursion q_i = q_{i-1} * a / i carried in log space,
    never raw factorials, so it is stable for large n and a.
    """
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if offered_load < 0:
        raise DomainError(f"offered load must be >= 0, got {offered_load}")
    # log-space cumulative terms log(a^i / i!), shifted before exponentiation
    if offered_load == 0.0:
        out = np.zeros(n + 1)
        out[0] = 1.0
        return out
    i = np.arange(1, n + 1)
    logq = np.concatenate(([0.0], np.cumsum(np.log(offered_load) - np.log(i))))
    logq -= logq.max()
    weights = np.exp(logq)
    return weights / weights.sum()


def erlang_blocking(n: int, offered_load: float) -> float:
    """Blocking probability of an n-server loss system via the B-recursion.

    B(k) = a B(k-1) / (k + a B(k-1)) with B(0) = 1.
    """
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if offered_load < 0:
        raise DomainError(f"offered load must be >= 0, got {offered_load}")
    b = 1.0
    for k in range(1, n + 1):
        b = offered_load * b / (k + offered_load * b)
    return b


def erlang_blocking_real(n: float, offered_load: float) -> float:
    """Continuous-n blocking probability via the incomplete-gamma form.

    B(n, a) = a^n e^{-a} / Gamma(n+1, a), where Gamma(n+1, a) is the upper
    incomplete gamma function. Well-defined for any real n > 0 and agrees
    with the integer recursion at integer n.
    """
    if n <= 0:
        raise DomainError(f"n must be positive, got {n}")
    if offered_load < 0:
        raise DomainError(f"offered load must be >= 0, got {offered_load}")
    if offered_load == 0:
        return 0.0
    # Gamma(n+1, a) = gammaincc(n+1, a) * Gamma(n+1); work in logs.
    regularized = special.gammaincc(n + 1.0, offered_load)
    if regularized <= 0.0:
        # a >> n: the regularized tail underflows. Use the asymptotic
        # expansion Gamma(n+1,a) = a^n e^{-a} [1 + n/a + n(n-1)/a^2 + ...],
        # truncated at the smallest term, so 1/B is the bracketed series.
        inv_b = term = 1.0
        k = 0.0
        while True:
            nxt = term * (n - k) / offered_load
            if abs(nxt) >= abs(term) or abs(nxt) < 1e-18:
                break
            inv_b += nxt
            term = nxt
            k += 1.0
        return 1.0 / inv_b
    log_upper = math.log(regularized) + special.gammaln(n + 1.0)
    log_b = n * math.log(offered_load) - offered_load - log_upper
    return math.exp(log_b)


@dataclass(frozen=True)
class AdmissionAnalysis:
    """Analytic snapshot of the admission queue for a given (n, d) choice.

    Attributes:
        n: sub-process count.
        t_v: per-sub-process admission spacing (min).
        offered_load: a = lam * t_v.
        state_probs: occupancy probabilities P_0..P_n.
        p_admit: admission probability 1 - P_n.
        service_time: charging duration d / alpha (min).
    """

    n: int
    t_v: float
    offered_load: float
    state_probs: np.ndarray
    p_admit: float
    service_time: float


@dataclass(frozen=True)
class ArrivalMoments:
    """First/second moments of admitted inter-arrival times.

    mean_x / second_x are per-admission; mu_y / var_y describe the
    coordinated inter-arrival time (sum of m consecutive gaps) of the
    single-server reduction of the charging queue.
    """

    mean_x: float
    second_x: float
    mu_y: float
    var_y: float


@dataclass(frozen=True)
class PhaseFit:
    """Two-branch exponential mixture (weights 1/2 each) fit by moments."""

    lambda1: float
    lambda2: float
    gamma_w: float
    feasible: bool


def threshold_t_v(n: int, d: float, station: StationParams) -> float:
    """Sub-process spacing T_v = tau * m * (d/alpha) / n (min)."""
    return station.tau * station.m * station.service_time(d) / n


def analyze_admission(n: int, d: float, station: StationParams) -> AdmissionAnalysis:
    """Full loss-system analysis of the admission queue at (n, d)."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if d <= 0:
        raise DomainError(f"demand must be positive, got {d}")
    t_v = threshold_t_v(n, d, station)
    a = station.lam * t_v
    probs = erlang_steady_state(n, a)
    return AdmissionAnalysis(
        n=n,
        t_v=t_v,
        offered_load=a,
        state_probs=probs,
        p_admit=1.0 - probs[n],
        service_time=station.service_time(d),
    )


def admission_probability(n: int, d: float, station: StationParams) -> float:
    """Probability that an arriving EV is admitted, 1 - P_n."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if d <= 0:
        raise DomainError(f"demand must be positive, got {d}")
    a = station.lam * threshold_t_v(n, d, station)
    # Use the normalized state vector (not the blocking recursion) so this
    # value is bit-identical to 1 - state_probs[n] from analyze_admission.
    return 1.0 - float(erlang_steady_state(n, a)[n])


def admission_probability_real(n: float, d: float, station: StationParams) -> float:
    """Continuous-n admission probability via the incomplete-gamma form."""
    if n <= 0:
        raise DomainError(f"n must be positive, got {n}")
    if d <= 0:
        raise DomainError(f"demand must be positive, got {d}")
    a = station.lam * station.tau * station.m * station.service_time(d) / n
    return 1.0 - erlang_blocking_real(n, a)


def interarrival_pdf(x: float, analysis: AdmissionAnalysis) -> float:
    """Density of the admitted inter-arrival time on [0, T_v] (defective).

    Integrates to 1 - P_0: no mass is generated while the system is empty.
    """
    t_v = analysis.t_v
    if x < 0 or x > t_v:
        return 0.0
    probs = analysis.state_probs
    total = 0.0
    for i in range(1, analysis.n + 1):
        total += (i / t_v) * ((t_v - x) / t_v) ** (i - 1) * probs[i]
    return total


def interarrival_cdf(x: float, analysis: AdmissionAnalysis) -> float:
    """CDF companion of interarrival_pdf; reaches 1 - P_0 at T_v."""
    t_v = analysis.t_v
    if x < 0:
        return 0.0
    x = min(x, t_v)
    probs = analysis.state_probs
    total = 0.0
    for i in range(0, analysis.n + 1):
        total += (1.0 - ((t_v - x) / t_v) ** i) * probs[i]
    return total


def admitted_interarrival_moments(
    analysis: AdmissionAnalysis, station: StationParams
) -> ArrivalMoments:
    """Moments of the admitted inter-arrival time, conditioned on occupancy.

    The raw density is defective (mass 1 - P_0); weights are renormalized by
    1 - P_0 so the moments describe gaps that actually occur. State i
    contributes a gap with mean T_v/(i+1) and second moment
    2 T_v^2 / ((i+1)(i+2)). The coordinated moments describe the sum of m
    consecutive independent gaps.
    """
    probs = analysis.state_probs
    busy_mass = 1.0 - probs[0]
    if busy_mass <= 0:
        raise DomainError("all occupancy mass at state 0: no departures to measure")
    t_v = analysis.t_v
    i = np.arange(1, analysis.n + 1, dtype=float)
    w = probs[1:] / busy_mass
    mean_x = float(np.sum(w * t_v / (i + 1)))
    second_x = float(np.sum(w * 2.0 * t_v**2 / ((i + 1) * (i + 2))))
    var_x = second_x - mean_x**2
    return ArrivalMoments(
        mean_x=mean_x,
        second_x=second_x,
        mu_y=station.m * mean_x,
        var_y=station.m * var_x,
    )


def fit_mixture_exponential(mu_y: float, second_y: float) -> PhaseFit:
    """Match a half/half exponential mixture to a mean-sum and second-moment target.

    Solves 1/l1 + 1/l2 = 2 mu_y and 1/l1^2 + 1/l2^2 = second_y. The branch
    means are roots of z^2 - 2 mu_y z + (4 mu_y^2 - second_y)/2 = 0; the fit
    is infeasible when the discriminant is negative (variability too low for
    a hyperexponential) or a root is non-positive.
    """
    if mu_y <= 0 or second_y <= 0:
        raise DomainError("moment targets must be positive")
    prod = (4.0 * mu_y**2 - second_y) / 2.0
    disc = mu_y**2 - prod
    if disc < 0:
        return PhaseFit(lambda1=float("nan"), lambda2=float("nan"), gamma_w=0.5, feasible=False)
    root = math.sqrt(disc)
    z1 = mu_y + root
    z2 = mu_y - root
    if z2 <= 0:
        return PhaseFit(lambda1=float("nan"), lambda2=float("nan"), gamma_w=0.5, feasible=False)
    return PhaseFit(lambda1=1.0 / z1, lambda2=1.0 / z2, gamma_w=0.5, feasible=True)


def load_density(p_admit: float, service: float, station: StationParams) -> float:
    """Admitted load rho = lam * P * s / m; must stay below 1 for stability."""
    return station.lam * p_admit * service / station.m


def mean_wait_theorem1(
    analysis: AdmissionAnalysis, moments: ArrivalMoments, station: StationParams
) -> float:
    """Closed-form mean-wait approximation for the charging queue.

    Evaluates rho*s/(2(1-rho)) * [s^2 + 2 s mu_Y + sigma_Y^2] with s the
    service time in minutes. The bracket carries squared-minute units, so
    the value is a scaled wait index rather than a calibrated wait; the
    wait-validation experiment publishes its fitted scale against
    simulation.
    """
    s = analysis.service_time
    rho = load_density(analysis.p_admit, s, station)
    if rho >= 1.0:
        raise DomainError(f"unstable charging queue: rho = {rho:.4f} >= 1")
    return rho * s / (2.0 * (1.0 - rho)) * (s**2 + 2.0 * s * moments.mu_y + moments.var_y)


def mean_wait_ph_d1(fit: PhaseFit, service: float, rho: float) -> float:
    """Heavy-traffic mean wait of the fitted-mixture / deterministic queue.

    Classical two-moment (Kingman) approximation rho*s*(ca^2 + cs^2)/(2(1-rho))
    with cs^2 = 0 and ca^2 taken from the mixture's own moments. Reduces
    exactly to the M/D/1 Pollaczek-Khinchine mean wait when the two branch
    rates coincide.
    """
    if not fit.feasible:
        raise DomainError("phase fit is infeasible; no mean-wait estimate available")
    if rho >= 1.0:
        raise DomainError(f"unstable queue: rho = {rho:.4f} >= 1")
    z1 = 1.0 / fit.lambda1
    z2 = 1.0 / fit.lambda2
    mean_a = fit.gamma_w * z1 + (1.0 - fit.gamma_w) * z2
    second_a = fit.gamma_w * 2.0 * z1**2 + (1.0 - fit.gamma_w) * 2.0 * z2**2
    ca2 = (second_a - mean_a**2) / mean_a**2
    return rho * service * ca2 / (2.0 * (1.0 - rho))
