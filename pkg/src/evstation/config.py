"""JSON configuration ingestion for scenarios and run options.

The schema (version 1) has four blocks:

    {
      "schema_version": 1,
      "station":   {"m", "alpha_kw", "parking_capacity", "tau"},
      "economics": {"beta", "phi_kwh", "u_phi", "penalty_rate"},
      "run":       {"seed", "reps", "horizon_min"},        # optional
      "scenarios": [{"name", "lambda_per_min", "p_e_mwh", "duration_min"}, ...]
    }

Electricity prices are given in $/MWh (as tariffs usually are) and stored
in $/kWh. Unknown keys anywhere are rejected so typos cannot silently
change an experiment.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path

from .economics import DomainError, EconomicParams, StationParams

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Raised for malformed or invalid configuration files."""


@dataclass(frozen=True)
class Scenario:
    """One demand/tariff block: arrival rate, electricity price, duration."""

    name: str
    lam: float
    p_e: float
    duration: float
    econ: EconomicParams
    station: StationParams


@dataclass(frozen=True)
class RunOptions:
    seed: int = 20240521
    reps: int = 200
    horizon: float | None = None  # defaults to each scenario's duration


_BLOCK_KEYS = {
    "top": {"schema_version", "station", "economics", "run", "scenarios"},
    "station": {"m", "alpha_kw", "parking_capacity", "tau"},
    "economics": {"beta", "phi_kwh", "u_phi", "penalty_rate"},
    "run": {"seed", "reps", "horizon_min"},
    "scenario": {"name", "lambda_per_min", "p_e_mwh", "duration_min"},
}


def _check_keys(obj: dict, block: str, context: str) -> None:
    unknown = set(obj) - _BLOCK_KEYS[block]
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)} in {context}")


def load_config(path) -> tuple[list[Scenario], RunOptions]:
    """Parse and validate a configuration file into scenarios plus options."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return parse_config(raw, str(path))


def parse_config(raw: dict, context: str = "<config>") -> tuple[list[Scenario], RunOptions]:
    if not isinstance(raw, dict):
        raise ConfigError(f"{context}: top level must be an object")
    _check_keys(raw, "top", context)
    version = raw.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError(f"{context}: schema_version must be {SCHEMA_VERSION}, got {version!r}")
    problems: list[str] = []
    for block in ("station", "economics", "scenarios"):
        if block not in raw:
            problems.append(f"missing block '{block}'")
    if problems:
        raise ConfigError(f"{context}: " + "; ".join(problems))

    st = raw["station"]
    _check_keys(st, "station", f"{context}:station")
    ec = raw["economics"]
    _check_keys(ec, "economics", f"{context}:economics")
    run_raw = raw.get("run", {})
    _check_keys(run_raw, "run", f"{context}:run")

    scenarios_raw = raw["scenarios"]
    if not isinstance(scenarios_raw, list) or not scenarios_raw:
        raise ConfigError(f"{context}: scenarios must be a non-empty array")

    scenarios: list[Scenario] = []
    for i, sc in enumerate(scenarios_raw):
        ctx = f"{context}:scenarios[{i}]"
        _check_keys(sc, "scenario", ctx)
        try:
            econ = EconomicParams(
                beta=float(ec["beta"]),
                phi=float(ec["phi_kwh"]),
                u_phi=float(ec["u_phi"]),
                p_e=float(sc["p_e_mwh"]) / 1000.0,  # $/MWh -> $/kWh
                c=float(ec.get("penalty_rate", 0.0)),
            )
            station = StationParams(
                m=int(st["m"]),
                alpha=float(st["alpha_kw"]),
                parking_capacity=int(st["parking_capacity"]),
                lam=float(sc["lambda_per_min"]),
                tau=float(st["tau"]),
            )
        except KeyError as exc:
            raise ConfigError(f"{ctx}: missing field {exc}") from exc
        except (TypeError, ValueError, DomainError) as exc:
            raise ConfigError(f"{ctx}: {exc}") from exc
        duration = float(sc.get("duration_min", 240.0))
        if duration <= 0:
            problems.append(f"{ctx}: duration_min must be positive")
        scenarios.append(
            Scenario(
                name=str(sc.get("name", f"scenario-{i}")),
                lam=station.lam,
                p_e=econ.p_e,
                duration=duration,
                econ=econ,
                station=station,
            )
        )
    if problems:
        raise ConfigError(f"{context}: " + "; ".join(problems))
    run = RunOptions(
        seed=int(run_raw.get("seed", RunOptions.seed)),
        reps=int(run_raw.get("reps", RunOptions.reps)),
        horizon=float(run_raw["horizon_min"]) if "horizon_min" in run_raw else None,
    )
    return scenarios, run


def with_penalty(scenario: Scenario, c: float) -> Scenario:
    """Scenario copy with a different waiting-time penalty rate."""
    return replace(scenario, econ=replace(scenario.econ, c=c))


def bundled_config_path(name: str) -> Path:
    """Path of a configuration shipped with the package (table1, fig4)."""
    ref = resources.files("evstation.data").joinpath(f"{name}.json")
    return Path(str(ref))
