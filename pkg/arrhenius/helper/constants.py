from dataclasses import dataclass


@dataclass(frozen=True)
class Defaults:
    """Numerical thresholds and defaults shared across modules"""

    DEGENERATE_VARIANCE = 1e-24
    EXIT_RATE_RTOL = 1e-12
    IDENTITY_TOL = 1e-10
    DENSE_SOLVE_MAX_N = 2048
    POWER_TOL = 1e-13
    POWER_MAX_ITER = 200_000
    UNIFORMIZATION = 1.01
    SWAP_RETRY_FACTOR = 100
    SWAP_FACTOR = 10
    INDEX_BITS = 30
    MIN_VISITS = 10
    TRIALS = 25
    MIN_BOUND_N = 6


@dataclass(frozen=True)
class Header:
    """CSV column layouts"""

    STATE = ("state", "neg_log_pi", "log_q", "W", "A")
    TRAJECTORY = ("step", "state", "hold_time")
    TRIAL = (
        "graph",
        "n",
        "degree",
        "mode",
        "sigma_w",
        "sigma_b",
        "sigma_f",
        "lambda",
        "trial",
        "seed",
        "rho",
        "rho_hat",
        "r",
        "var_w",
        "var_a",
        "solver",
        "degenerate",
    )
    SUMMARY = (
        "point",
        "graph",
        "n",
        "degree",
        "mode",
        "sigma_w",
        "sigma_b",
        "sigma_f",
        "lambda",
        "valid",
        "degenerate",
        "errored",
        "mean_rho",
        "sd_rho",
        "se_rho",
        "mean_r2",
    )


@dataclass(frozen=True)
class ExitCode:
    SUCCESS = 0
    CONFIG = 1
    BOUND_FAILURE = 2
    RUNTIME = 3
