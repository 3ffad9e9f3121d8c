"""
Correlation statistics and the finite-n bound evaluators.

Variances use the population (1/n) convention everywhere. r^2 mixes Var A_I and Var W_I and the convention only
cancels because both sides use the same divisor.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.special import gamma, logsumexp
from scipy.stats import invgamma

from .dynamics import barrier_functional
from .exceptions import DegenerateError, InvalidArgumentError, InvalidStateError
from .graphs import Graph
from .helper import Defaults, derive_seed, logger, parallel_map, to_float_array, to_jsonable
from .landscape import sample_iid

ASYMPTOTIC_BARRIER_COEFFICIENT = 8
ASYMPTOTIC_REM_COEFFICIENT = 16
VAR_A_SECOND_MOMENT_CONSTANT = 1720
REPLACE_VAR_FOURTH_MOMENT_CONSTANT = 40


# ------------------------------ Basic statistics ------------------------------
def population_variance(x) -> float:
    """(1/n) sum (x_i - mean)^2, two-pass with a compensation term for the rounding in the mean."""
    x = to_float_array(x)
    n = len(x)
    if n == 0:
        raise InvalidArgumentError("variance of an empty vector")
    if np.ptp(x) == 0:
        return 0.0
    dev = x - math.fsum(x) / n
    return max((math.fsum(dev * dev) - math.fsum(dev) ** 2 / n) / n, 0.0)


def pearson(x, y) -> float:
    """Population Pearson correlation; raises DegenerateError when either variance is below the threshold."""
    x, y = to_float_array(x), to_float_array(y)
    if x.shape != y.shape:
        raise InvalidArgumentError(f"length mismatch {len(x)} != {len(y)}")
    var_x, var_y = population_variance(x), population_variance(y)
    if var_x < Defaults.DEGENERATE_VARIANCE or var_y < Defaults.DEGENERATE_VARIANCE:
        raise DegenerateError(f"variance below {Defaults.DEGENERATE_VARIANCE:g} (Var x={var_x:.3e}, Var y={var_y:.3e})")
    n = len(x)
    cov = math.fsum((x - math.fsum(x) / n) * (y - math.fsum(y) / n)) / n
    return float(np.clip(cov / math.sqrt(var_x * var_y), -1.0, 1.0))


def summarize(values) -> tuple[float, float, float]:
    """mean, sample SD (divisor len - 1) and standard error, with a deterministic reduction order."""
    values = to_float_array(values)
    k = len(values)
    if k == 0:
        return math.nan, math.nan, math.nan
    mean = math.fsum(values) / k
    if k == 1:
        return mean, math.nan, math.nan
    sd = math.sqrt(math.fsum((values - mean) ** 2) / (k - 1))
    return mean, sd, sd / math.sqrt(k)


def decomposed_rho(rho_hat: float, r: float) -> float:
    """rho from its (rho_hat, r) decomposition in the reversible case."""
    return (1 + rho_hat * r) / math.sqrt(1 + 2 * rho_hat * r + r * r)


@dataclass(frozen=True)
class RhoReport:
    """
    Local-global correlation of one chain.

    rho is Corr(-log pi_I, log q_I) for a uniform state I. rho_hat and r are only defined on the reversible path,
    where log q = W + A; they are nan for forced chains. When A is constant (Var A below the degeneracy threshold)
    rho is set to 1 without a correlation being computed, rho_hat is nan and degenerate_a is set.
    """

    rho: float
    rho_hat: float
    r: float
    var_w: float
    var_a: float
    n: int
    degree: int
    degenerate: bool = False
    reversible: bool = True
    degenerate_a: bool = False

    @property
    def r2(self) -> float:
        return self.r * self.r

    def to_dict(self) -> dict:
        return to_jsonable(asdict(self))


def rho_report(neg_log_pi, log_q, W=None, A=None, *, degree: int = None, reversible: bool = None) -> RhoReport:
    """
    Correlation report from the effective potential and the log exit rates.

    With W and A given the chain is taken as reversible unless told otherwise, and the decomposition
    rho = (1 + rho_hat r) / sqrt(1 + 2 rho_hat r + r^2) is checked against the direct value.
    """
    neg_log_pi, log_q = to_float_array(neg_log_pi), to_float_array(log_q)
    n = len(neg_log_pi)
    if reversible is None:
        reversible = W is not None and A is not None
    var_w = population_variance(W) if W is not None else math.nan
    var_a = population_variance(A) if A is not None and reversible else math.nan
    nan = math.nan

    if population_variance(neg_log_pi) < Defaults.DEGENERATE_VARIANCE or (
        population_variance(log_q) < Defaults.DEGENERATE_VARIANCE
    ):
        logger.warning(f"degenerate landscape on n={n}: rho undefined")
        return RhoReport(nan, nan, nan, var_w, var_a, n, degree, degenerate=True, reversible=reversible)

    if not reversible:
        return RhoReport(pearson(neg_log_pi, log_q), nan, nan, var_w, nan, n, degree, reversible=False)

    if W is None or A is None:
        raise InvalidArgumentError("the reversible report needs W and A")
    r = math.sqrt(var_a / var_w)
    if var_a < Defaults.DEGENERATE_VARIANCE:
        # barrier-free: pi_i is proportional to 1 / q_i
        return RhoReport(1.0, nan, r, var_w, var_a, n, degree, degenerate_a=True)
    rho = pearson(neg_log_pi, log_q)
    rho_hat = pearson(W, A)
    gap = abs(rho - decomposed_rho(rho_hat, r))
    if gap > Defaults.IDENTITY_TOL:
        raise InvalidStateError(f"rho decomposition off by {gap:.3e}", context="rho_report")
    return RhoReport(rho, rho_hat, r, var_w, var_a, n, degree)


def lse(x, axis: int = None):
    """log sum exp(x); with axis given, one value per slice along it."""
    if axis is not None:
        x = np.asarray(x, dtype=np.float64)
        if x.size == 0:
            raise InvalidArgumentError("lse of an empty array")
        return logsumexp(x, axis=axis)
    x = to_float_array(x)
    if len(x) == 0:
        raise InvalidArgumentError("lse of an empty vector")
    if len(x) == 1:
        return float(x[0])
    return float(logsumexp(x))


# ------------------------------ Bound evaluators ------------------------------
def _check_n(n: int):
    if n is None or n < Defaults.MIN_BOUND_N:
        raise InvalidArgumentError(f"bounds need n >= {Defaults.MIN_BOUND_N} (inverse gamma variance), got {n}")


def ratio_coefficient(n: int) -> float:
    """c_r(n) = 4n/(n-3) + 2 sqrt(1720) n / ((n-3) sqrt(n-5)); tends to 4."""
    _check_n(n)
    return 4 * n / (n - 3) + 2 * math.sqrt(VAR_A_SECOND_MOMENT_CONSTANT) * n / ((n - 3) * math.sqrt(n - 5))


@dataclass(frozen=True)
class BoundEvaluation:
    """
    Lower bound on E(rho) at one parameter point.

    parameter is sigma_B / sigma_W for the iid barrier bound and lambda for the random energy model bound.
    """

    kind: str
    n: int
    parameter: float
    c_r: float
    rho_lower_bound: float
    asymptotic_coefficient: int

    @property
    def applicable(self) -> bool:
        return self.rho_lower_bound > -1

    @property
    def binding(self) -> bool:
        return self.rho_lower_bound > 0

    def to_dict(self) -> dict:
        return to_jsonable(asdict(self))


def ratio_bound(n: int, sigma_b: float, sigma_w: float) -> float:
    """Upper bound c_r(n) (sigma_B / sigma_W)^2 on E(r^2)."""
    if not sigma_w > 0 or sigma_b < 0:
        raise InvalidArgumentError(f"need sigma_w > 0 and sigma_b >= 0, got {sigma_w}, {sigma_b}")
    return ratio_coefficient(n) * (sigma_b / sigma_w) ** 2


def theorem1_bound(n: int, sigma_b: float, sigma_w: float) -> BoundEvaluation:
    """E(rho) >= 1 - 2 c_r(n) (sigma_B / sigma_W)^2 for iid Gaussian wells and barriers."""
    c_r = ratio_coefficient(n)
    bound = 1 - 2 * ratio_bound(n, sigma_b, sigma_w)
    return BoundEvaluation("barrier", n, sigma_b / sigma_w, c_r, bound, ASYMPTOTIC_BARRIER_COEFFICIENT)


def theorem2_bound(n: int, lam: float) -> BoundEvaluation:
    """E(rho) >= 1 - 4 c_r(n) (1 - lambda)^2 for random energy model dynamics, uniformly in sigma_W."""
    if lam is None or not 0 <= lam <= 1:
        raise InvalidArgumentError(f"lambda must lie in [0, 1], got {lam}")
    c_r = ratio_coefficient(n)
    return BoundEvaluation("rem", n, lam, c_r, 1 - 4 * c_r * (1 - lam) ** 2, ASYMPTOTIC_REM_COEFFICIENT)


def invgamma_moments(n: int, sigma_w: float) -> tuple[float, float]:
    """
    Mean and variance of 1 / Var W_I for n iid N(0, sigma_w^2) wells.

    n Var W_I / sigma_w^2 is chi-squared with n - 1 degrees of freedom, so the reciprocal is inverse gamma with
    shape (n - 1) / 2 and scale n / (2 sigma_w^2).
    """
    _check_n(n)
    if not sigma_w > 0:
        raise InvalidArgumentError(f"sigma_w must be > 0, got {sigma_w}")
    mean, var = invgamma(a=(n - 1) / 2, scale=n / (2 * sigma_w**2)).stats(moments="mv")
    return float(mean), float(var)


def central_moment_bound(m: int, sigma: float) -> float:
    """m Gamma(m/2) (2 sigma^2)^(m/2), the Gaussian concentration bound on E|f - E f|^m for 1-Lipschitz f."""
    if m < 1 or not sigma > 0:
        raise InvalidArgumentError(f"need m >= 1 and sigma > 0, got m={m}, sigma={sigma}")
    return float(m * gamma(m / 2) * (2 * sigma**2) ** (m / 2))


def lse_gap_variance_cap(d: int) -> float:
    """The gap lse(b) - max(b) lies in [0, log d], so its variance is at most (log d)^2 / 4."""
    if d < 1:
        raise InvalidArgumentError(f"degree must be >= 1, got {d}")
    return math.log(d) ** 2 / 4


# ------------------------------ Monte Carlo checks ----------------------------
@dataclass(frozen=True)
class MomentCheck:
    """One empirical inequality: kind is 'upper' (estimate <= bound), 'lower' or 'equal' (within 3 SE)."""

    name: str
    estimate: float
    std_error: float
    bound: float
    kind: str = "upper"
    atol: float = 0.0

    @property
    def passed(self) -> bool:
        slack = 3 * self.std_error + self.atol
        if self.kind == "upper":
            return self.estimate <= self.bound + slack
        if self.kind == "lower":
            return self.estimate >= self.bound - slack
        return abs(self.estimate - self.bound) <= slack

    def to_dict(self) -> dict:
        return to_jsonable(
            {
                "name": self.name,
                "estimate": self.estimate,
                "std_error": self.std_error,
                "bound": self.bound,
                "pass": self.passed,
            }
        )


@dataclass(frozen=True)
class MomentReport:
    graph: str
    n: int
    degree: int
    sigma_w: float
    sigma_b: float
    trials: int
    master_seed: int
    checks: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        out = {k: v for k, v in asdict(self).items() if k != "checks"}
        out["checks"] = [c.to_dict() for c in self.checks]
        out["ok"] = self.ok
        return to_jsonable(out)


def _moment_sample(args) -> tuple:
    graph, sigma_w, sigma_b, seed = args
    landscape = sample_iid(graph, sigma_w, sigma_b, 0.0, seed)
    A = barrier_functional(landscape)
    o = graph.oriented
    peak = np.maximum.reduceat(-landscape.barrier_out(), o.indptr[:-1])
    var_w = population_variance(landscape.W)
    var_a = population_variance(A)
    return 1 / var_w, var_a, population_variance(A - peak), float(A[0]), var_a / var_w


def _variance_with_se(values: np.ndarray) -> tuple[float, float]:
    """Sample variance and the normal-theory standard error sqrt((m4 - s^4) / k)."""
    k = len(values)
    dev = values - math.fsum(values) / k
    s2 = math.fsum(dev**2) / (k - 1)
    m4 = math.fsum(dev**4) / k
    return s2, math.sqrt(max(m4 - s2 * s2, 0.0) / k)


def _fourth_central_moment(values: np.ndarray) -> tuple[float, float]:
    k = len(values)
    dev4 = (values - math.fsum(values) / k) ** 4
    mean, _, se = summarize(dev4)
    return mean, se


def empirical_moment_suite(
    graph: Graph, sigma_w: float, sigma_b: float, trials: int, rng=None, *, workers: int = 1
) -> MomentReport:
    """
    Monte Carlo check of the moment lemmas behind the correlation bounds.

    Each of the trials draws one iid landscape with its own derived seed. Reported: the inverse gamma law of
    1 / Var W_I, E(Var A_I) <= 4 sigma_B^2, E((Var A_I)^2) <= 1720 sigma_B^4, the log-sum-exp gap cap, the
    variance replacement inequalities with X_i = A_i, and E(r^2) against ratio_bound.
    """
    if trials is None or trials < 2:
        raise InvalidArgumentError(f"the moment suite needs at least 2 trials, got {trials}")
    n, d = graph.n, graph.degree
    _check_n(n)
    if isinstance(rng, np.random.Generator):
        master_seed = int(rng.integers(2**63))
    elif rng is None:
        master_seed = int(np.random.SeedSequence().generate_state(1, dtype=np.uint64)[0] >> 1)
    else:
        master_seed = int(rng)
    key = {"suite": "moments", "graph": graph.name, "n": n, "sigma_w": sigma_w, "sigma_b": sigma_b}
    jobs = [(graph, sigma_w, sigma_b, derive_seed(master_seed, key, t)) for t in range(trials)]
    logger.info(f"moment suite on {graph!r}: {trials} trials, sigma_w={sigma_w}, sigma_b={sigma_b}")
    samples = np.array(parallel_map(_moment_sample, jobs, workers=workers), dtype=np.float64)
    inv_var_w, var_a, gap_var, a0, r2 = samples.T

    ig_mean, ig_var = invgamma_moments(n, sigma_w)
    atol = 1e-12
    checks = []

    est, _, se = summarize(inv_var_w)
    checks.append(MomentCheck("inverse_gamma_mean", est, se, ig_mean, kind="equal"))
    est, se = _variance_with_se(inv_var_w)
    checks.append(MomentCheck("inverse_gamma_variance", est, se, ig_var, kind="equal"))

    est, _, se = summarize(var_a)
    var_a_bound = central_moment_bound(2, sigma_b) if sigma_b > 0 else 0.0
    checks.append(MomentCheck("var_a_mean", est, se, var_a_bound, atol=atol))
    est, _, se = summarize(var_a**2)
    checks.append(MomentCheck("var_a_second_moment", est, se, VAR_A_SECOND_MOMENT_CONSTANT * sigma_b**4, atol=atol))

    est, _, se = summarize(gap_var)
    checks.append(MomentCheck("lse_gap_variance", est, se, lse_gap_variance_cap(d), atol=atol))

    # replacing Var X_I by the single-site law of X_1 = A_0
    est, _, se = summarize(var_a)
    v1, v1_se = _variance_with_se(a0)
    checks.append(MomentCheck("replace_var_mean", est, math.hypot(se, v1_se), v1, atol=atol))
    est, _, se = summarize(var_a**2)
    mu4, mu4_se = _fourth_central_moment(a0)
    checks.append(
        MomentCheck(
            "replace_var_second_moment",
            est,
            math.hypot(se, REPLACE_VAR_FOURTH_MOMENT_CONSTANT * mu4_se),
            REPLACE_VAR_FOURTH_MOMENT_CONSTANT * mu4,
            atol=atol,
        )
    )

    est, _, se = summarize(r2)
    checks.append(MomentCheck("ratio_mean", est, se, ratio_bound(n, sigma_b, sigma_w), atol=atol))

    report = MomentReport(graph.name, n, d, sigma_w, sigma_b, trials, master_seed, checks)
    for check in report.failures():
        logger.warning(
            f"{check.name}: estimate {check.estimate:.6g} vs bound {check.bound:.6g} (SE {check.std_error:.3g})"
        )
    return report


def proposition_check(rhos, r2s) -> list[MomentCheck]:
    """
    E(rho) >= 1 - 2 E(r^2) and P(rho < 0) <= E(r^2), estimated from reversible trials.

    The 3 SE slack combines the error of both sides.
    """
    rhos, r2s = to_float_array(rhos), to_float_array(r2s)
    if len(rhos) != len(r2s) or len(rhos) < 2:
        raise InvalidArgumentError(f"need at least 2 paired trials, got {len(rhos)} and {len(r2s)}")
    mean_rho, _, se_rho = summarize(rhos)
    mean_r2, _, se_r2 = summarize(r2s)
    negative = float(np.mean(rhos < 0))
    se_negative = math.sqrt(negative * (1 - negative) / len(rhos))
    return [
        MomentCheck("mean_rho_vs_ratio", mean_rho, math.hypot(se_rho, 2 * se_r2), 1 - 2 * mean_r2, kind="lower"),
        MomentCheck("negative_rho_fraction", negative, math.hypot(se_negative, se_r2), mean_r2),
    ]


def lse_property_violations(dim: int, pairs: int, rng=None, scale: float = 3.0) -> dict:
    """
    Count violations of the Lipschitz and sandwich properties of lse over random pairs in dimension dim.

    |lse(x) - lse(y)| <= ||x - y||_2 and max(x) <= lse(x) <= max(x) + log(dim), with a 1e-12 rounding allowance.
    """
    if dim < 1 or pairs < 1:
        raise InvalidArgumentError(f"need dim >= 1 and pairs >= 1, got {dim}, {pairs}")
    rng = np.random.default_rng(rng)
    x = scale * rng.standard_normal((pairs, dim))
    y = scale * rng.standard_normal((pairs, dim))
    lx = lse(x, axis=1)
    ly = lse(y, axis=1)
    tol = 1e-12 * (1 + np.abs(lx))
    lipschitz = int(np.sum(np.abs(lx - ly) > np.linalg.norm(x - y, axis=1) + tol))
    top = x.max(axis=1)
    sandwich = int(np.sum((lx < top - tol) | (lx > top + math.log(dim) + tol)))
    return {"dim": dim, "pairs": pairs, "lipschitz": lipschitz, "sandwich": sandwich}
