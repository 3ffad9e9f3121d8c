import arrhenius as ar
from arrhenius.dynamics import SolverMethod


def test_package_overview():
    """Converted from doctest of arrhenius/__init__.py"""
    g = ar.hypercube(4)
    land = ar.sample_iid(g, sigma_w=1.0, sigma_b=0.0, rng=7)
    rm = ar.build_rates(land)
    st = ar.solve_stationary(land, rm)
    assert st.method is SolverMethod.CLOSED_FORM
    assert st.method.value == "closed_form"
    report = ar.rho_report(st.neg_log_pi, ar.exit_log_rates(rm), land.W, ar.barrier_functional(land), degree=g.degree)
    assert report.rho == 1.0


def test_forced_overview():
    """Same walk-through with forces switched on, which routes through the numerical solver"""
    g = ar.hypercube(4)
    land = ar.sample_iid(g, sigma_w=1.0, sigma_b=1.0, sigma_f=1.0, rng=7)
    rm = ar.build_rates(land)
    st = ar.solve_stationary(land, rm)
    assert st.method is SolverMethod.LINEAR_SOLVE
    assert st.residual <= 1e-12
    report = ar.rho_report(st.neg_log_pi, ar.exit_log_rates(rm), degree=g.degree, reversible=False)
    assert -1 <= report.rho <= 1 and not report.reversible


def test_version():
    assert ar.VERSION == ar.__version__
