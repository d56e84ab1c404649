"""Two-feature cyclostationarity presence test.

The decision statistic per feature is the Mahalanobis-type quadratic
form ``psi = U_s * chat * sigma^-1 * chat^T`` on the re/im vector of
the CAF estimate, asymptotically chi-square with 2 degrees of freedom
when the tested (cycle frequency, delay) point carries no cyclic
energy.  Two features are tested,

    feature 1: beta = 0,      tau = rho * M   (cyclic-prefix replica)
    feature 2: beta = 1/rho,  tau = 0         (symbol-rate line)

and their sum is compared against the chi-square(4) upper quantile at
the target false-alarm probability.  The statistic is invariant to
scaling of the input (chat scales by |a|^2, sigma by |a|^4), so no
automatic gain control is needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammainccinv

from .caf_estimation import estimate_caf, estimate_covariance
from .caf_theory import CafQuery
from .waveform import ComplexStream, SignalConfig

# regularize sigma when its condition number exceeds this
_COND_LIMIT = 1e12
_REG_EPS = 1e-10


class SingularCovarianceError(RuntimeError):
    """Covariance stayed singular after regularization."""


@dataclass(frozen=True)
class TestResult:
    psi1: float
    psi2: float
    upsilon: float
    gamma: float
    signal_present: bool
    p_fa_target: float

    @property
    def decision(self) -> str:
        return "H1_present" if self.signal_present else "H0_absent"


def threshold(p_fa: float) -> float:
    """chi-square(4) upper quantile: P{X >= gamma} = p_fa.

    Computed through the inverse regularized upper incomplete gamma
    function, Q(2, gamma/2) = p_fa.
    """
    if not 0.0 < p_fa < 1.0:
        raise ValueError(f"p_fa must be in (0, 1), got {p_fa}")
    return float(2.0 * gammainccinv(2.0, p_fa))


def feature_statistic(
    r: ComplexStream,
    query: CafQuery,
    u_sw: int | None = None,
    window: str = "rectangular",
) -> float:
    """psi = U_s * chat * sigma^-1 * chat^T for one feature point.

    Raises SingularCovarianceError when the 2x2 covariance cannot be
    inverted even after adding eps*trace/2 to the diagonal; degenerate
    near-constant inputs fail loudly instead of returning zero.
    """
    est = estimate_caf(r, query)
    cov = estimate_covariance(r, query, u_sw, window)
    sigma = cov.sigma
    c = np.array([est.value.real, est.value.imag])

    cond = np.linalg.cond(sigma)
    if not np.isfinite(cond) or cond > _COND_LIMIT:
        sigma = sigma + _REG_EPS * (np.trace(sigma) / 2.0) * np.eye(2)
    try:
        solved = np.linalg.solve(sigma, c)
    except np.linalg.LinAlgError as exc:
        raise SingularCovarianceError(
            f"covariance singular at (beta={query.beta}, tau={query.tau})"
        ) from exc
    psi = est.u_s * float(c @ solved)
    if not math.isfinite(psi):
        raise SingularCovarianceError(
            f"non-finite statistic at (beta={query.beta}, tau={query.tau})"
        )
    return psi


def detection_queries(config: SignalConfig) -> tuple[CafQuery, CafQuery]:
    """The two tested (cycle frequency, delay) points."""
    return (
        CafQuery(0.0, float(config.rho * config.m)),
        CafQuery(1.0 / config.rho, 0.0),
    )


def detect(
    r: ComplexStream,
    config: SignalConfig,
    p_fa: float,
    u_sw: int | None = None,
    window: str = "rectangular",
) -> TestResult:
    """Run the two-feature test on one record.

    The record must be longer than the prefix delay rho*M; the decision
    is H1 iff psi1 + psi2 >= the chi-square(4) quantile at p_fa.
    """
    gamma = threshold(p_fa)
    q1, q2 = detection_queries(config)
    if len(r) <= config.rho * config.m:
        raise ValueError(
            f"record of {len(r)} samples is too short for the "
            f"prefix-delay feature at {config.rho * config.m}"
        )
    psi1 = feature_statistic(r, q1, u_sw, window)
    psi2 = feature_statistic(r, q2, u_sw, window)
    upsilon = psi1 + psi2
    return TestResult(psi1, psi2, upsilon, gamma, upsilon >= gamma, p_fa)


def flop_count(u_s: int, u_sw: int) -> int:
    """Flops per decision: 10 U_s log2 U_s + 22 U_s + 50 U_sw + 42."""
    if u_s < 2:
        raise ValueError("u_s must be >= 2")
    return int(round(10.0 * u_s * math.log2(u_s) + 22.0 * u_s + 50.0 * u_sw + 42.0))
