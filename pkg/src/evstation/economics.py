"""Economic primitives: EV utility, demand response, pricing, and profit accounting.

All quantities use canonical units of minutes, kWh, and dollars. Charging
power is stored in kW and converted to kWh/min where a service duration is
needed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass


class DomainError(ValueError):
    """Raised when an argument falls outside an operation's domain."""


@dataclass(frozen=True)
class EconomicParams:
    """Station-wide economic description of the (homogeneous) EV population.

    Attributes:
        beta: demand elasticity (1/kWh).
        phi: battery capacity (kWh).
        u_phi: utility of a full charge ($).
        p_e: electricity purchase price ($/kWh).
        c: linear waiting-time penalty rate ($/min).
    """

    beta: float
    phi: float
    u_phi: float
    p_e: float
    c: float

    def __post_init__(self):
        if self.beta <= 0:
            raise DomainError(f"beta must be positive, got {self.beta}")
        if self.phi <= 0:
            raise DomainError(f"phi must be positive, got {self.phi}")
        if self.u_phi <= 0:
            raise DomainError(f"u_phi must be positive, got {self.u_phi}")
        if self.p_e < 0:
            raise DomainError(f"p_e must be non-negative, got {self.p_e}")
        if self.c < 0:
            raise DomainError(f"c must be non-negative, got {self.c}")

    @property
    def xi(self) -> float:
        """Demand-curve scale (kWh/$), always derived from the stored fields."""
        return (1.0 - math.exp(-self.beta * self.phi)) / (self.u_phi * self.beta)

    @property
    def choke_price(self) -> float:
        """Price at and above which the demand response drops to zero ($/kWh)."""
        return 1.0 / self.xi


@dataclass(frozen=True)
class StationParams:
    """Physical description of the charging station.

    Attributes:
        m: number of charging ports.
        alpha: per-port charging power (kW).
        parking_capacity: total parking spots (>= m).
        lam: EV arrival rate (1/min).
        tau: regulation slack factor (> 1).
    """

    m: int
    alpha: float
    parking_capacity: int
    lam: float
    tau: float

    def __post_init__(self):
        if self.m < 1:
            raise DomainError(f"m must be >= 1, got {self.m}")
        if self.alpha <= 0:
            raise DomainError(f"alpha must be positive, got {self.alpha}")
        if self.parking_capacity < self.m:
            raise DomainError(
                f"parking_capacity ({self.parking_capacity}) must be >= m ({self.m})"
            )
        if self.lam <= 0:
            raise DomainError(f"lam must be positive, got {self.lam}")
        if self.tau <= 1:
            raise DomainError(f"tau must be > 1, got {self.tau}")

    @property
    def alpha_per_min(self) -> float:
        """Charging power in kWh/min."""
        return self.alpha / 60.0

    def service_time(self, d: float) -> float:
        """Minutes needed to deliver `d` kWh on one port."""
        return d / self.alpha_per_min


def utility(d: float, econ: EconomicParams) -> float:
    """Utility ($) an EV derives from receiving `d` kWh.

    Strictly increasing and strictly concave on (0, phi), with utility(0) = 0
    and utility(phi) = u_phi.
    """
    if d < 0 or d > econ.phi:
        raise DomainError(f"demand {d} outside [0, {econ.phi}]")
    return econ.u_phi * (-math.expm1(-econ.beta * d)) / (-math.expm1(-econ.beta * econ.phi))


def demand_response(r: float, econ: EconomicParams) -> float:
    """Surplus-maximizing demand (kWh) at announced price `r` ($/kWh).

    Decreasing in r; clamped to [0, phi] (zero at or above the choke price,
    phi when the price is low enough that the battery cap binds).
    """
    if r < 0:
        raise DomainError(f"price must be non-negative, got {r}")
    if r == 0:
        return econ.phi
    d = -math.log(econ.xi * r) / econ.beta
    return min(max(d, 0.0), econ.phi)


def price_for_demand(d: float, econ: EconomicParams) -> float:
    """Price ($/kWh) that induces demand `d`; inverse of demand_response.

    Only defined for d in (0, phi], where the demand curve is invertible.
    """
    if d <= 0 or d > econ.phi:
        raise DomainError(f"demand {d} outside (0, {econ.phi}]")
    return math.exp(-econ.beta * d) / econ.xi


def penalty(omega: float, econ: EconomicParams) -> float:
    """Waiting-time penalty ($) for a mean wait of `omega` minutes."""
    if omega < 0:
        raise DomainError(f"wait must be non-negative, got {omega}")
    return econ.c * omega


def per_ev_profit(d: float, wait: float, econ: EconomicParams, admitted: bool = True) -> float:
    """Realized profit ($) from a single EV; rejected EVs contribute nothing."""
    if not admitted or d == 0:
        return 0.0
    return (price_for_demand(d, econ) - econ.p_e) * d - econ.c * wait
