import math

import numpy as np
import pytest
from scipy.special import logsumexp

from arrhenius.dynamics import barrier_functional, build_rates, exit_log_rates, solve_stationary
from arrhenius.exceptions import DegenerateError, InvalidArgumentError, InvalidStateError
from arrhenius.graphs import hypercube
from arrhenius.landscape import sample_iid
from arrhenius.stats import (
    ASYMPTOTIC_BARRIER_COEFFICIENT,
    ASYMPTOTIC_REM_COEFFICIENT,
    central_moment_bound,
    decomposed_rho,
    empirical_moment_suite,
    invgamma_moments,
    lse,
    lse_gap_variance_cap,
    lse_property_violations,
    pearson,
    population_variance,
    proposition_check,
    ratio_bound,
    ratio_coefficient,
    rho_report,
    summarize,
    theorem1_bound,
    theorem2_bound,
)

from .common import random_reversible


def report_for(landscape):
    rm = build_rates(landscape)
    st = solve_stationary(landscape, rm)
    return rho_report(
        st.neg_log_pi, exit_log_rates(rm), landscape.W, barrier_functional(landscape), degree=landscape.graph.degree
    )


def test_population_variance():
    assert population_variance([1, 2, 3, 4]) == pytest.approx(1.25)
    assert population_variance([7.0]) == 0.0
    assert population_variance(np.full(100, 0.1)) == 0.0
    big = 1e9 + np.array([1.0, 2.0, 3.0, 4.0])
    assert population_variance(big) == pytest.approx(1.25, rel=1e-9)
    with pytest.raises(InvalidArgumentError):
        population_variance([])


def test_pearson():
    assert pearson([1, 2, 3], [2, 4, 6]) == pytest.approx(1.0)
    assert pearson([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)
    assert pearson([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(0.8)
    with pytest.raises(DegenerateError):
        pearson([1, 1, 1], [1, 2, 3])
    with pytest.raises(InvalidArgumentError):
        pearson([1, 2], [1, 2, 3])


def test_summarize():
    mean, sd, se = summarize([1.0, 2.0, 3.0])
    assert (mean, sd) == (2.0, 1.0)
    assert se == pytest.approx(1 / math.sqrt(3))
    assert summarize([5.0])[0] == 5.0 and math.isnan(summarize([5.0])[1])
    assert all(math.isnan(x) for x in summarize([]))


def test_decomposed_rho():
    for r in (0.0, 0.3, 0.9):
        assert decomposed_rho(-r, r) == pytest.approx(math.sqrt(1 - r * r))
        assert decomposed_rho(1.0, r) == pytest.approx(1.0)
    assert decomposed_rho(0.0, 1.0) == pytest.approx(1 / math.sqrt(2))


def test_lse():
    assert lse([3.5]) == 3.5
    assert lse([0.0, 0.0]) == pytest.approx(math.log(2))
    assert lse([1000.0, 1000.0]) == pytest.approx(1000 + math.log(2))
    with pytest.raises(InvalidArgumentError):
        lse([])

    rows = np.random.default_rng(2).standard_normal((5, 7))
    by_row = lse(rows, axis=1)
    assert by_row.shape == (5,)
    assert np.allclose(by_row, [lse(row) for row in rows], rtol=1e-15, atol=0)
    with pytest.raises(InvalidArgumentError):
        lse(np.empty((0, 3)), axis=1)


def test_lse_properties():
    for dim in (1, 2, 8, 64):
        counts = lse_property_violations(dim, 2000, 0)
        assert counts["lipschitz"] == 0 and counts["sandwich"] == 0


def test_lse_properties_exercise_lse(monkeypatch):
    # a broken lse must show up as violations
    monkeypatch.setattr("arrhenius.stats.lse", lambda x, axis=None: np.max(x, axis=axis) + 10.0)
    counts = lse_property_violations(4, 100, 0)
    assert counts["sandwich"] == 100


def test_rho_report_matches_direct_correlation():
    land = random_reversible(6, seed=2)
    rm = build_rates(land)
    st = solve_stationary(land, rm)
    log_q = exit_log_rates(rm)
    report = report_for(land)
    assert report.reversible and not report.degenerate
    assert report.rho == pytest.approx(np.corrcoef(st.neg_log_pi, log_q)[0, 1], abs=1e-12)
    assert report.rho_hat == pytest.approx(np.corrcoef(land.W, barrier_functional(land))[0, 1], abs=1e-12)
    assert report.r2 == pytest.approx(np.var(barrier_functional(land)) / np.var(land.W), rel=1e-12)
    assert abs(report.rho - decomposed_rho(report.rho_hat, report.r)) <= 1e-10
    assert report.n == 64 and report.degree == 6


def test_rho_report_barrier_free():
    report = report_for(sample_iid(hypercube(5), 1.0, 0.0, 0.0, 3))
    assert report.rho == 1.0
    assert report.r == 0.0 and math.isnan(report.rho_hat)
    assert report.degenerate_a and not report.degenerate

    # A nearly constant, below the degeneracy threshold but not zero
    rng = np.random.default_rng(4)
    W = rng.standard_normal(32)
    A = 0.7 + 1e-14 * rng.standard_normal(32)
    report = rho_report(W + logsumexp(-W), W + A, W, A)
    assert 0 < report.var_a < 1e-24
    assert report.rho == 1.0 and report.degenerate_a and math.isnan(report.rho_hat)

    assert not report_for(random_reversible(4, seed=1)).degenerate_a


def test_rho_report_degenerate():
    report = rho_report(np.zeros(8), np.arange(8.0), np.zeros(8), np.arange(8.0))
    assert report.degenerate and math.isnan(report.rho)


def test_rho_report_forced_path():
    report = rho_report([0.0, 1.0, 3.0], [1.0, 0.0, -2.0], reversible=False)
    assert not report.reversible
    assert report.rho == pytest.approx(-1.0)
    assert math.isnan(report.rho_hat) and math.isnan(report.r)


def test_rho_report_inconsistent_inputs():
    rng = np.random.default_rng(0)
    W, A = rng.standard_normal(50), rng.standard_normal(50)
    with pytest.raises(InvalidStateError):
        rho_report(W, rng.standard_normal(50), W, A)


def test_ratio_coefficient():
    assert ratio_coefficient(1024) == pytest.approx(6.6178, abs=1e-3)
    assert ratio_coefficient(6) > ratio_coefficient(64) > ratio_coefficient(1024) > 4
    assert ratio_coefficient(10**12) == pytest.approx(4.0, rel=1e-4)
    with pytest.raises(InvalidArgumentError):
        ratio_coefficient(5)


def test_theorem1_bound():
    ev = theorem1_bound(1024, 0.1, 1.0)
    assert ev.rho_lower_bound == pytest.approx(0.8676, abs=1e-3)
    assert ev.c_r == pytest.approx(6.6178, abs=1e-3)
    assert ev.applicable and ev.binding
    assert theorem1_bound(1024, 0.0, 1.0).rho_lower_bound == 1.0
    assert not theorem1_bound(64, 1.0, 1.0).applicable
    assert ratio_bound(1024, 0.1, 1.0) == pytest.approx(0.066178, abs=1e-5)
    # the slope in (sigma_B / sigma_W)^2 tends to 8
    slope = (1 - theorem1_bound(10**12, 0.01, 1.0).rho_lower_bound) / 0.01**2
    assert slope == pytest.approx(ASYMPTOTIC_BARRIER_COEFFICIENT, rel=1e-4)


def test_theorem2_bound():
    assert theorem2_bound(1024, 1.0).rho_lower_bound == 1.0
    ev = theorem2_bound(1024, 0.9)
    assert ev.rho_lower_bound == pytest.approx(1 - 4 * ratio_coefficient(1024) * 0.01)
    assert ev.kind == "rem" and ev.parameter == 0.9
    slope = (1 - theorem2_bound(10**12, 0.99).rho_lower_bound) / 0.01**2
    assert slope == pytest.approx(ASYMPTOTIC_REM_COEFFICIENT, rel=1e-4)
    with pytest.raises(InvalidArgumentError):
        theorem2_bound(1024, 1.1)


def test_bounds_monotone_in_n():
    values = [theorem1_bound(n, 0.1, 1.0).rho_lower_bound for n in (16, 64, 256, 1024, 4096)]
    assert values == sorted(values)


def test_invgamma_moments():
    assert invgamma_moments(6, 1.0) == pytest.approx((2.0, 8.0))
    assert invgamma_moments(10, 1.0) == pytest.approx((10 / 7, 200 / 245))
    mean, var = invgamma_moments(10, 2.0)
    assert mean == pytest.approx(10 / 7 / 4) and var == pytest.approx(200 / 245 / 16)
    with pytest.raises(InvalidArgumentError):
        invgamma_moments(5, 1.0)


def test_central_moment_bound():
    assert central_moment_bound(2, 1.0) == pytest.approx(4.0)
    assert central_moment_bound(2, 0.5) == pytest.approx(1.0)
    assert central_moment_bound(4, 1.0) == pytest.approx(16.0)
    with pytest.raises(InvalidArgumentError):
        central_moment_bound(0, 1.0)


def test_lse_gap_variance_cap():
    assert lse_gap_variance_cap(1) == 0.0
    assert lse_gap_variance_cap(4) == pytest.approx(math.log(4) ** 2 / 4)


def test_empirical_moment_suite():
    report = empirical_moment_suite(hypercube(6), 1.0, 0.5, 200, 11)
    checks = {c.name: c for c in report.checks}
    for name in ("var_a_mean", "var_a_second_moment", "lse_gap_variance", "ratio_mean"):
        assert checks[name].passed, name
    for name in ("inverse_gamma_mean", "inverse_gamma_variance"):
        c = checks[name]
        assert abs(c.estimate - c.bound) <= 5 * c.std_error, name
    assert report.to_dict()["trials"] == 200
    assert report.master_seed == 11

    again = empirical_moment_suite(hypercube(6), 1.0, 0.5, 200, 11)
    assert again.to_dict() == report.to_dict()

    with pytest.raises(InvalidArgumentError):
        empirical_moment_suite(hypercube(6), 1.0, 0.5, 1, 0)


def test_proposition_check():
    checks = proposition_check([0.99, 0.98, 0.97, 0.99], [0.01, 0.02, 0.01, 0.02])
    assert [c.name for c in checks] == ["mean_rho_vs_ratio", "negative_rho_fraction"]
    assert all(c.passed for c in checks)

    checks = proposition_check([-0.5] * 4, [0.01] * 4)
    assert not any(c.passed for c in checks)

    with pytest.raises(InvalidArgumentError):
        proposition_check([0.5], [0.1])
