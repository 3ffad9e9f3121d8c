"""
Arrhenius rate matrices, exit rates and stationary distributions.

Energies stay in log space: a RateMatrix stores log Q_ij = W_i - B_ij + F_ij for both orientations of every
edge, and linear-scale rates only appear inside stationary_general after a global shift (scaling every rate by
one constant leaves the stationary law unchanged).
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from enum import Enum
from typing import TextIO

import numpy as np
from scipy.linalg import LinAlgError, lu_factor, lu_solve
from scipy.sparse import csr_matrix, diags, vstack
from scipy.sparse.linalg import MatrixRankWarning, spsolve
from scipy.special import logsumexp

from .exceptions import ConvergenceError, InvalidStateError
from .graphs import Graph
from .helper import Defaults, Header, logger, segment_logsumexp, to_cell, to_float_array, timed
from .landscape import Landscape


class SolverMethod(str, Enum):
    CLOSED_FORM = "closed_form"
    LINEAR_SOLVE = "linear_solve"
    SPARSE_SOLVE = "sparse_solve"
    POWER_ITERATION = "power_iteration"


@dataclass(frozen=True, eq=False)
class RateMatrix:
    """
    Off-diagonal transition rates on graph edges, as log rates in graph.oriented order.

    The diagonal -q_i is implicit; off-graph entries are structurally zero.
    """

    graph: Graph
    log_rates: np.ndarray

    @property
    def n(self) -> int:
        return self.graph.n

    def log_rate(self, i: int, j: int) -> float:
        o = self.graph.oriented
        lo, hi = o.indptr[i], o.indptr[i + 1]
        k = lo + int(np.searchsorted(o.dst[lo:hi], j))
        if k >= hi or o.dst[k] != j:
            raise InvalidStateError(f"({i}, {j}) is not an edge", context=self.graph.name)
        return float(self.log_rates[k])

    def to_sparse(self, shift: float = 0.0) -> csr_matrix:
        """Off-diagonal rates exp(log Q - shift) as a CSR matrix."""
        o = self.graph.oriented
        return csr_matrix((np.exp(self.log_rates - shift), o.dst, o.indptr), shape=(self.n, self.n))


@dataclass(frozen=True, eq=False)
class StationaryResult:
    neg_log_pi: np.ndarray
    method: SolverMethod
    residual: float
    iterations: int = 0

    @property
    def pi(self) -> np.ndarray:
        return np.exp(-self.neg_log_pi)


def build_rates(landscape: Landscape) -> RateMatrix:
    """log Q_ij = W_i - B_ij + F_ij on every oriented edge."""
    o = landscape.graph.oriented
    log_rates = landscape.W[o.src] - landscape.barrier_out() + landscape.force_out()
    log_rates.flags.writeable = False
    return RateMatrix(landscape.graph, log_rates)


def exit_log_rates(rm: RateMatrix) -> np.ndarray:
    """log q_i as a max-shifted log-sum-exp over the outgoing log rates."""
    return segment_logsumexp(rm.log_rates, rm.graph.oriented.indptr)


def barrier_functional(landscape: Landscape) -> np.ndarray:
    """A_i = log sum_j exp(-B_ij) over the neighbors of i; log q_i = W_i + A_i when F = 0."""
    return segment_logsumexp(-landscape.barrier_out(), landscape.graph.oriented.indptr)


def stationary_residual(rm: RateMatrix, neg_log_pi: np.ndarray) -> float:
    """max_i |(pi Q)_i| with pi = exp(-neg_log_pi); fluxes are formed in log space."""
    o = rm.graph.oriented
    flux = np.exp(rm.log_rates - neg_log_pi[o.src])
    inflow = np.bincount(o.dst, weights=flux, minlength=rm.n)
    outflow = np.exp(exit_log_rates(rm) - neg_log_pi)
    return float(np.max(np.abs(inflow - outflow)))


def stationary_reversible(landscape: Landscape) -> StationaryResult:
    """Boltzmann law pi_i proportional to exp(-W_i), normalized in log space."""
    if landscape.forced:
        raise InvalidStateError("closed form needs F = 0", context="stationary_reversible")
    if not landscape.symmetric:
        raise InvalidStateError("closed form needs symmetric barriers", context="stationary_reversible")
    neg_log_pi = landscape.W + logsumexp(-landscape.W)
    residual = stationary_residual(build_rates(landscape), neg_log_pi)
    return StationaryResult(neg_log_pi, SolverMethod.CLOSED_FORM, residual)


def _dense_solve(rates: csr_matrix, exit_rates: np.ndarray) -> np.ndarray:
    n = len(exit_rates)
    generator = rates.toarray()
    generator[np.diag_indices(n)] = -exit_rates
    # pi Q = 0 with the last balance equation replaced by sum(pi) = 1
    system = generator.T.copy()
    system[-1, :] = 1.0
    rhs = np.zeros(n)
    rhs[-1] = 1.0
    try:
        return lu_solve(lu_factor(system), rhs)
    except (LinAlgError, ValueError) as e:
        raise ConvergenceError(f"dense solve failed: {e}") from e


def _sparse_solve(rates: csr_matrix, exit_rates: np.ndarray) -> np.ndarray | None:
    """Sparse LU on the transposed generator; None when the factorization is singular or loses positivity."""
    n = len(exit_rates)
    system = (rates - diags(exit_rates)).T.tocsr()
    # last balance equation replaced by sum(pi) = 1
    system = vstack([system[: n - 1], csr_matrix(np.ones((1, n)))], format="csc")
    rhs = np.zeros(n)
    rhs[-1] = 1.0
    with warnings.catch_warnings():
        warnings.simplefilter("error", MatrixRankWarning)
        try:
            pi = spsolve(system, rhs)
        except (MatrixRankWarning, RuntimeError) as e:
            logger.warning(f"sparse solve failed on n={n}: {e}")
            return None
    if not np.all(np.isfinite(pi) & (pi > 0)):
        logger.warning(f"sparse solve on n={n} gave {int(np.sum(~(pi > 0)))} non-positive probabilities")
        return None
    return pi


def _power_iteration(rates: csr_matrix, exit_rates: np.ndarray, tol: float, max_iter: int) -> tuple[np.ndarray, int]:
    """Iterate pi <- pi P on the uniformized kernel P = I + Q / Lambda until the L1 change drops below tol."""
    n = len(exit_rates)
    uniformization = Defaults.UNIFORMIZATION * exit_rates.max()
    inflow = rates.T.tocsr()
    keep = 1.0 - exit_rates / uniformization
    pi = np.full(n, 1.0 / n)
    change = np.inf
    for iteration in range(1, max_iter + 1):
        nxt = pi * keep + inflow.dot(pi) / uniformization
        nxt /= nxt.sum()
        change = float(np.abs(nxt - pi).sum())
        pi = nxt
        if change < tol:
            return pi, iteration
    raise ConvergenceError(
        f"power iteration did not converge in {max_iter} iterations (last L1 change {change:.3e})",
        iterations=max_iter,
        residual=change,
    )


@timed
def stationary_general(
    rm: RateMatrix,
    *,
    dense_max_n: int = Defaults.DENSE_SOLVE_MAX_N,
    direct: bool = True,
    tol: float = Defaults.POWER_TOL,
    max_iter: int = Defaults.POWER_MAX_ITER,
) -> StationaryResult:
    """
    Solve pi Q = 0, sum(pi) = 1 numerically.

    Dense LU on the transposed generator for n <= dense_max_n. Above it a sparse LU of the same system when
    direct is set, with uniformized power iteration as the fallback (or the only method when direct is False).
    """
    log_q = exit_log_rates(rm)
    # shift by max log q, not mean W; pi is unchanged by any constant shift
    shift = float(log_q.max())
    rates = rm.to_sparse(shift)
    exit_rates = np.exp(log_q - shift)
    iterations = 0
    if rm.n <= dense_max_n:
        method = SolverMethod.LINEAR_SOLVE
        pi = _dense_solve(rates, exit_rates)
    else:
        method = SolverMethod.SPARSE_SOLVE
        pi = _sparse_solve(rates, exit_rates) if direct else None
    if pi is None:
        method = SolverMethod.POWER_ITERATION
        pi, iterations = _power_iteration(rates, exit_rates, tol, max_iter)
    if not np.all(pi > 0):
        raise ConvergenceError(
            f"{method.value} produced {int(np.sum(pi <= 0))} non-positive probabilities", residual=float(pi.min())
        )
    neg_log_pi = -np.log(pi / pi.sum())
    residual = stationary_residual(rm, neg_log_pi)
    logger.debug(f"{method.value} on n={rm.n}: residual {residual:.3e}")
    return StationaryResult(neg_log_pi, method, residual, iterations)


def solve_stationary(landscape: Landscape, rm: RateMatrix = None, **kwargs) -> StationaryResult:
    """Closed form for reversible landscapes, numerical solve otherwise."""
    if landscape.reversible:
        return stationary_reversible(landscape)
    return stationary_general(rm or build_rates(landscape), **kwargs)


def detailed_balance_residual(rm: RateMatrix, st: StationaryResult) -> float:
    """max over edges of |pi_i Q_ij - pi_j Q_ji| / max(pi_i Q_ij, pi_j Q_ji)."""
    o = rm.graph.oriented
    log_flux = rm.log_rates - st.neg_log_pi[o.src]
    gap = np.abs(log_flux - log_flux[o.reverse])
    return float(np.max(-np.expm1(-gap))) if len(gap) else 0.0


def write_state_csv(buf: TextIO, neg_log_pi, log_q, W, A) -> None:
    """Per-state dump, header state,neg_log_pi,log_q,W,A, states ascending."""
    columns = [to_float_array(x) for x in (neg_log_pi, log_q, W, A)]
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(Header.STATE)
    for state, row in enumerate(zip(*columns)):
        writer.writerow([state, *map(to_cell, row)])


def read_state_csv(buf: TextIO) -> dict:
    reader = csv.DictReader(buf)
    rows = list(reader)
    return {name: np.array([float(row[name]) for row in rows]) for name in Header.STATE[1:]}
