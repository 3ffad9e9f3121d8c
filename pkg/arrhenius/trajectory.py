"""
Exact-event simulation of the chain and the estimators built on it.

Exit rates are local: q_i is the reciprocal mean holding time at i. Occupation probabilities need the whole
trajectory. Runs have a jump budget rather than a time budget, so the cost of a run is fixed. Deep traps (large
sigma_W) make occupancy estimates impractical at any reasonable budget; keep sigma_W small here.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import TextIO

import numpy as np
from numba import njit

from .dynamics import RateMatrix, barrier_functional, build_rates, exit_log_rates, solve_stationary
from .exceptions import DegenerateError, InvalidArgumentError
from .helper import Defaults, Header, as_generator, derive_seed, logger, parallel_map, timed, to_cell
from .landscape import Landscape
from .stats import pearson, rho_report


@njit(cache=True)
def _segment_cumsum(values, indptr):
    out = np.empty_like(values)
    for i in range(len(indptr) - 1):
        acc = 0.0
        for k in range(indptr[i], indptr[i + 1]):
            acc += values[k]
            out[k] = acc
    return out


@njit(cache=True)
def _jump_chain(start, indptr, dst, cumulative, log_q, uniforms, exponentials, states, holds):
    """Fill states/holds for len(uniforms) jumps; returns the state after the last jump."""
    i = start
    for step in range(len(uniforms)):
        states[step] = i
        holds[step] = exponentials[step] * math.exp(-log_q[i])
        lo = indptr[i]
        hi = indptr[i + 1]
        target = uniforms[step] * cumulative[hi - 1]
        k = lo
        while k < hi - 1 and cumulative[k] <= target:
            k += 1
        i = dst[k]
    return i


@dataclass(frozen=True, eq=False)
class Trajectory:
    """
    states[k] is the state occupied before jump k and holds[k] the time spent there.

    Consecutive states are adjacent; final_state is where the last jump landed.
    """

    n: int
    states: np.ndarray
    holds: np.ndarray
    final_state: int

    def __post_init__(self):
        if len(self.states) != len(self.holds):
            raise InvalidArgumentError(f"{len(self.states)} states but {len(self.holds)} holding times")
        if np.any(self.holds <= 0):
            raise InvalidArgumentError("holding times must be positive")

    @property
    def num_jumps(self) -> int:
        return len(self.states)

    @property
    def total_time(self) -> float:
        return math.fsum(self.holds)

    @classmethod
    def from_visits(cls, n: int, states, holds, final_state: int = None) -> Trajectory:
        states = np.asarray(states, dtype=np.int64)
        holds = np.asarray(holds, dtype=np.float64)
        return cls(n, states, holds, int(states[-1] if final_state is None else final_state))


@timed
def simulate(rm: RateMatrix, start: int, num_jumps: int, rng=None) -> Trajectory:
    """
    Run exactly num_jumps transitions from start.

    Holding time at i is exponential with rate q_i, the next state is j with probability Q_ij / q_i. All random
    numbers are drawn up front: one uniform and one standard exponential per jump.
    """
    if num_jumps is None or num_jumps <= 0:
        raise InvalidArgumentError(f"num_jumps must be > 0, got {num_jumps}")
    if not 0 <= start < rm.n:
        raise InvalidArgumentError(f"start state {start} outside 0..{rm.n - 1}")
    rng, _ = as_generator(rng)
    o = rm.graph.oriented
    log_q = exit_log_rates(rm)
    probabilities = np.exp(rm.log_rates - log_q[o.src])
    cumulative = _segment_cumsum(probabilities, o.indptr)
    uniforms = rng.random(num_jumps)
    exponentials = rng.standard_exponential(num_jumps)
    states = np.empty(num_jumps, dtype=np.int64)
    holds = np.empty(num_jumps, dtype=np.float64)
    final = _jump_chain(int(start), o.indptr, o.dst, cumulative, log_q, uniforms, exponentials, states, holds)
    return Trajectory(rm.n, states, holds, int(final))


# --------------------------------- Estimators ---------------------------------
@dataclass(frozen=True, eq=False)
class ExitRateEstimates:
    """Visit counts and total holding time per retained state, ascending."""

    states: np.ndarray
    visits: np.ndarray
    hold_time: np.ndarray

    @property
    def q_hat(self) -> np.ndarray:
        return self.visits / self.hold_time


@dataclass(frozen=True, eq=False)
class OccupationEstimates:
    states: np.ndarray
    hold_time: np.ndarray
    total_time: float

    @property
    def pi_hat(self) -> np.ndarray:
        return self.hold_time / self.total_time


def _retained(traj: Trajectory, min_visits: int):
    visits = np.bincount(traj.states, minlength=traj.n)
    keep = np.flatnonzero(visits >= min_visits)
    hold_time = np.bincount(traj.states, weights=traj.holds, minlength=traj.n)
    return keep, visits[keep].astype(np.float64), hold_time[keep]


def estimate_exit_rates(traj: Trajectory, min_visits: int = Defaults.MIN_VISITS) -> ExitRateEstimates:
    """q_hat_i = visits_i / hold_time_i; states below min_visits are left out."""
    return ExitRateEstimates(*_retained(traj, min_visits))


def estimate_occupation(traj: Trajectory, min_visits: int = Defaults.MIN_VISITS) -> OccupationEstimates:
    """pi_hat_i = hold_time_i / total_time; states below min_visits are left out."""
    states, _, hold_time = _retained(traj, min_visits)
    return OccupationEstimates(states, hold_time, traj.total_time)


def occupation_vector(traj: Trajectory) -> np.ndarray:
    """Fraction of time spent in every state, zero for unvisited ones."""
    return np.bincount(traj.states, weights=traj.holds, minlength=traj.n) / traj.total_time


def estimate_rho(rates: ExitRateEstimates, occupation: OccupationEstimates) -> float:
    """Corr(-log pi_hat, log q_hat) over the states retained by both estimators."""
    _, in_rates, in_occupation = np.intersect1d(rates.states, occupation.states, return_indices=True)
    return pearson(-np.log(occupation.pi_hat[in_occupation]), np.log(rates.q_hat[in_rates]))


def write_trajectory_csv(traj: Trajectory, buf: TextIO) -> None:
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(Header.TRAJECTORY)
    for step, (state, hold) in enumerate(zip(traj.states.tolist(), traj.holds.tolist())):
        writer.writerow([step, state, to_cell(hold)])


# ------------------------------ Consistency runs ------------------------------
@dataclass(frozen=True)
class TrajectoryRun:
    seed: int
    median_rel_error_q: float
    l1_pi: float
    rho_estimated: float
    retained_states: int


@dataclass(frozen=True)
class TrajectoryReport:
    n: int
    num_jumps: int
    rho_exact: float
    runs: tuple

    @property
    def median_rel_error_q(self) -> float:
        return float(np.mean([run.median_rel_error_q for run in self.runs]))

    @property
    def l1_pi(self) -> float:
        return float(np.mean([run.l1_pi for run in self.runs]))

    @property
    def rho_estimated(self) -> float:
        return float(np.nanmean([run.rho_estimated for run in self.runs]))

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "num_jumps": self.num_jumps,
            "rho_exact": self.rho_exact,
            "rho_estimated": self.rho_estimated,
            "median_rel_error_q": self.median_rel_error_q,
            "l1_pi": self.l1_pi,
            "runs": [run.__dict__ for run in self.runs],
        }


def _one_run(args) -> TrajectoryRun:
    landscape, num_jumps, start, seed, min_visits = args
    rm = build_rates(landscape)
    traj = simulate(rm, start, num_jumps, seed)
    est = estimate_exit_rates(traj, min_visits)
    q = np.exp(exit_log_rates(rm)[est.states])
    pi = solve_stationary(landscape, rm).pi
    try:
        rho = estimate_rho(est, estimate_occupation(traj, min_visits))
    except DegenerateError:
        rho = math.nan
    return TrajectoryRun(
        seed=seed,
        median_rel_error_q=float(np.median(np.abs(est.q_hat - q) / q)),
        l1_pi=float(np.abs(occupation_vector(traj) - pi).sum()),
        rho_estimated=rho,
        retained_states=len(est.states),
    )


def run_trajectories(
    landscape: Landscape,
    num_jumps: int,
    runs: int = 1,
    master_seed: int = 0,
    *,
    start: int = 0,
    min_visits: int = Defaults.MIN_VISITS,
    workers: int = 1,
) -> TrajectoryReport:
    """Independent runs with derived seeds, compared against the exact exit rates, pi and rho."""
    if runs < 1:
        raise InvalidArgumentError(f"runs must be >= 1, got {runs}")
    key = {"trajectory": landscape.graph.name, "n": landscape.n, "num_jumps": num_jumps, "start": start}
    jobs = [(landscape, num_jumps, start, derive_seed(master_seed, key, k), min_visits) for k in range(runs)]
    logger.info(f"{runs} trajectories of {num_jumps} jumps on {landscape.graph!r}")
    results = parallel_map(_one_run, jobs, workers=workers)

    rm = build_rates(landscape)
    st = solve_stationary(landscape, rm)
    log_q = exit_log_rates(rm)
    degree = landscape.graph.degree
    if landscape.reversible:
        report = rho_report(st.neg_log_pi, log_q, landscape.W, barrier_functional(landscape), degree=degree)
    else:
        report = rho_report(st.neg_log_pi, log_q, degree=degree, reversible=False)
    return TrajectoryReport(landscape.n, num_jumps, report.rho, tuple(results))
