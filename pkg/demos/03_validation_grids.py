"""Reproduce the two validation grids: admission probability and mean wait.

The admission grid shows the loss-system formula matching simulation to
Monte-Carlo noise. The wait grid prints the measured gap between the
closed-form wait and simulation, which is large and systematic: the formula
is a scaled index, not a calibrated wait.
"""
from evstation import EconomicParams, StationParams
from evstation.experiments import run_admission_validation, run_wait_validation

loss_station = StationParams(m=4, alpha=3.3, parking_capacity=40, lam=0.3, tau=1.01)
rows = run_admission_validation(
    loss_station, demand=35.0,
    grid=tuple((n, lam) for n in (3, 4, 5) for lam in (0.02, 0.1, 0.4)),
    arrivals_per_point=100_000, seed=1,
)
print("admission probability: analytic vs simulated")
print("n  lambda  analytic  simulated    gap")
for n, lam, _, analytic, simulated, gap in rows:
    print(f"{n}  {lam:>5.2f}  {analytic:>8.4f}  {simulated:>9.4f}  {gap:.5f}")

station = StationParams(m=4, alpha=11.5, parking_capacity=40, lam=0.3, tau=1.01)
econ = EconomicParams(beta=0.05, phi=100.0, u_phi=100.0, p_e=0.06, c=0.4)
rows = run_wait_validation(
    station, econ, grid=((4, 0.3, 1.0), (4, 0.4, 2.0), (5, 0.3, 2.0)),
    reps=20, horizon=2000.0, seed=1,
)
print("\nmean wait: closed form vs simulated (minutes)")
print("n  lambda   d    rho    analytic  simulated")
for n, lam, d, rho, analytic, simulated, _, flag in rows:
    print(f"{n}  {lam:>5.2f}  {d:>4.1f}  {rho:.3f}  {analytic:>9.3g}  {simulated:>9.4f}  [{flag}]")
