"""
Arrhenius Overview
==================
    arrhenius builds continuous-time Markov chains whose rates have the Arrhenius
    form Q_ij = exp(W_i - B_ij + F_ij) on regular graphs with random wells W,
    barriers B and forces F, and measures how well the local exit rate q_i
    predicts the global effective potential -log pi_i.

    Graphs
    ------
    L{complete_graph<graphs.complete_graph>}, L{hypercube<graphs.hypercube>},
    L{cycle<graphs.cycle>}, L{circulant<graphs.circulant>} and edge-swap random
    regular graphs. Families are looked up by name through
    L{get_family<graphs.get_family>}, so sweeps can name them in JSON.

    Landscapes
    ----------
    iid Gaussian landscapes, random energy model dynamics with
    B_ij = (1 - lambda)(W_i + W_j), and one-sided separable barriers.

    Correlation
    -----------
    L{rho_report<stats.rho_report>} returns rho = Corr(-log pi_I, log q_I) for a
    uniform state I, plus rho_hat = Corr(W_I, A_I) and r = sqrt(Var A_I / Var W_I)
    for reversible chains, where A_i is the log-sum-exp of the negated barriers
    around i.

    Examples
    --------

    >>> g = hypercube(4)
    >>> land = sample_iid(g, sigma_w=1.0, sigma_b=0.0, rng=7)
    >>> rm = build_rates(land)
    >>> st = solve_stationary(land, rm)
    >>> st.method.value
    'closed_form'
    >>> report = rho_report(st.neg_log_pi, exit_log_rates(rm), land.W, barrier_functional(land), degree=g.degree)
    >>> report.rho
    1.0

"""

from .__about__ import __version__
from .dynamics import (
    RateMatrix,
    StationaryResult,
    barrier_functional,
    build_rates,
    detailed_balance_residual,
    exit_log_rates,
    solve_stationary,
    stationary_general,
    stationary_reversible,
)
from .graphs import Graph, GraphSpec, complete_graph, cycle, circulant, hypercube, random_regular_by_swaps, validate
from .landscape import Landscape, sample_iid, sample_rem, sample_separable
from .stats import rho_report, theorem1_bound, theorem2_bound

# Package version
VERSION = __version__
