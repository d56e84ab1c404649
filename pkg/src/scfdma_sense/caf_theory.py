"""Closed-form cyclic autocorrelation of the SC-FDMA signal.

The conjugate second-order cyclic autocorrelation (CAF) of the pulse
train has a piecewise closed form over delay, split by the delay in
symbol periods ``tau = mu*T + sgn(mu)*tau_s`` with ``0 <= tau_s < T``:

* ``|mu| <= M - L`` ("in-body" lags): nonzero only on the symbol-rate
  cycle-frequency grid ``beta = k/T``; the coefficient alternates
  between interpolations of c_x/4 (mu = 0), A(|mu|) at odd mu, and a
  ramp to A(|mu|+1) at even mu.
* ``M - L + 1 <= |mu| <= M + L - 1`` (cyclic-prefix lags): nonzero only
  on the block-rate grid ``beta = b/((M+L)T)``, carrying an L-term
  pulse-train sum; ``|mu| = M`` is the prefix replica of the zero-delay
  case.
* otherwise zero, exactly.

``A(mu) = c_x/(2N) * 1/(1 - exp(j*pi*|mu|/N))``.

Everything is exposed through the discrete-time mapping only:
``beta_norm = beta/f_s`` (cycles/sample) and ``tau_samples = tau*f_s``.
The pulse factor ``integral |g(t)|^2 exp(-j2 pi beta t) dt`` is a
Riemann sum over the same truncated RRC the generator uses, with taps
indexed symmetrically about zero, which makes the factor real for the
symmetric filter; under the discrete mapping the leading ``1/T``
becomes ``1/rho`` and ``1/((M+L)T)`` becomes ``1/(rho*(M+L))``.

The family assumes a constant cyclic-prefix length with M - L even
(it was derived for the integer expansion factor Q = 2); evaluation is
refused otherwise.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from .waveform import SignalConfig, rrc_taps

_GRID_ATOL = 1e-9


@dataclass(frozen=True)
class CafQuery:
    """A (cycle frequency, delay) point in discrete units.

    beta: normalized cycle frequency, cycles/sample, |beta| <= 1/2.
    tau: delay in samples; integer-valued when compared against the
    sample estimator, real-valued queries are legal for the theory.
    """

    beta: float
    tau: float

    def __post_init__(self) -> None:
        if abs(self.beta) > 0.5 + _GRID_ATOL:
            raise ValueError(f"|beta| must be <= 1/2 cycles/sample, got {self.beta}")


@dataclass(frozen=True)
class CafValue:
    value: complex
    query: CafQuery


@dataclass(frozen=True)
class CafSupport:
    """Where the theoretical CAF is nonzero, in discrete units.

    cp_feature / symbol_rate_feature are the two detection queries; the
    conjugate symbol-rate CF is kept as a diagnostic.  zero_cf_delays
    lists the delay lattice (in samples) carrying nonzero values at
    zero CF; block_cf_spacing is the CF grid step active for the delays
    around +/- rho*M.
    """

    cp_feature: CafQuery
    symbol_rate_feature: CafQuery
    conjugate_symbol_rate_feature: CafQuery
    zero_cf_delays: np.ndarray
    symbol_cf_spacing: float
    block_cf_spacing: float


def a_coefficient(mu: int, n: int, c_x: float = 1.0) -> complex:
    """Lag-coupling coefficient c_x/(2N) / (1 - exp(j pi |mu| / N))."""
    if mu == 0:
        raise ValueError("a_coefficient has a pole at mu = 0")
    if n < 2:
        raise ValueError("need N >= 2")
    return c_x / (2 * n) / (1.0 - cmath.exp(1j * np.pi * abs(mu) / n))


def n_squared_identity_check(n: int, shift: int = 0) -> float:
    """Sum of 1/(1 - cos(pi (2*shift - 2p + 1)/N)) over p = 0..N-1.

    Evaluates to N^2/2 for every shift; kept as a standing assertion on
    the zero-delay reduction of the closed form.
    """
    if n < 2:
        raise ValueError("need N >= 2")
    p = np.arange(n)
    return float(np.sum(1.0 / (1.0 - np.cos(np.pi * (2 * shift - 2 * p + 1) / n))))


def pulse_power_factor(config: SignalConfig, beta_norm: float) -> complex:
    """Sum over taps of |g|^2 * exp(-j 2 pi beta v), v centered on 0.

    Discrete stand-in for the pulse energy integral; equals 1 at
    beta = 0 for the unit-energy taps and is real for the symmetric
    RRC.
    """
    h = rrc_taps(config.rho, config.rolloff, config.rrc_span)
    v = np.arange(len(h)) - (len(h) - 1) / 2
    return complex(np.sum(h**2 * np.exp(-2j * np.pi * beta_norm * v)))


def _cp_train_factor(config: SignalConfig, cp_len: int, beta_norm: float) -> complex:
    """Geometric sum over the L prefix pulse positions."""
    u = np.arange(cp_len)
    return complex(np.sum(np.exp(-2j * np.pi * beta_norm * config.rho * u)))


def _require_constant_cp(config: SignalConfig) -> int:
    cp_len = config.constant_cp_len()
    if cp_len is None:
        raise ValueError(
            "closed-form CAF needs a constant cyclic-prefix length "
            "(short-CP slots mix two lengths)"
        )
    if (config.m - cp_len) % 2 != 0:
        raise ValueError("closed-form CAF needs M - L even")
    return cp_len


def _on_grid(x: float) -> bool:
    return abs(x - round(x)) <= _GRID_ATOL


def case_value(
    config: SignalConfig, beta_norm: float, mu: int, tau_s: float
) -> complex:
    """One branch of the piecewise family at delay (mu + sgn(mu)*tau_s)*T.

    tau_s is in symbol periods, [0, 1); tau_s = 1.0 is accepted to take
    one-sided limits at the case boundaries.  Returns exactly 0 when
    (mu, beta) select no branch.
    """
    cp_len = _require_constant_cp(config)
    m, n, c_x, rho = config.m, config.n, config.c_x, config.rho
    if not 0.0 <= tau_s <= 1.0:
        raise ValueError("tau_s must lie in [0, 1]")
    mu_abs = abs(mu)

    if mu_abs <= m - cp_len:
        # symbol-rate CF grid beta = k/T, i.e. beta_norm = k/rho
        if not _on_grid(beta_norm * rho):
            return 0.0 + 0.0j
        base = pulse_power_factor(config, beta_norm) / rho
        if mu_abs == 0:
            coeff = c_x * (
                (1.0 - tau_s) / 4.0
                + tau_s / (2.0 * n) / (1.0 - cmath.exp(1j * np.pi / n))
            )
        elif mu_abs % 2 == 1:
            coeff = (1.0 - tau_s) * a_coefficient(mu_abs, n, c_x)
        else:
            coeff = tau_s * a_coefficient(mu_abs + 1, n, c_x)
        return coeff * base

    if m - cp_len + 1 <= mu_abs <= m + cp_len - 1:
        # block-rate CF grid beta = b/((M+L)T)
        if not _on_grid(beta_norm * rho * (m + cp_len)):
            return 0.0 + 0.0j
        base = (
            pulse_power_factor(config, beta_norm)
            * _cp_train_factor(config, cp_len, beta_norm)
            / (rho * (m + cp_len))
        )
        if mu_abs == m:
            sign = 1.0 if mu >= 0 else -1.0
            coeff = c_x * (
                (1.0 - tau_s) / 4.0
                + tau_s / (2.0 * n) / (1.0 - cmath.exp(sign * 1j * np.pi / n))
            )
        elif mu_abs % 2 == 1:
            coeff = (1.0 - tau_s) * a_coefficient(mu_abs, n, c_x)
        else:
            coeff = tau_s * a_coefficient(mu_abs + 1, n, c_x)
        return coeff * base

    return 0.0 + 0.0j


def theoretical_caf(config: SignalConfig, query: CafQuery) -> CafValue:
    """Closed-form CAF at one (cycle frequency, delay) query.

    Total over valid queries: off-support points return exactly zero.
    """
    tau_periods = query.tau / config.rho
    a = abs(tau_periods)
    mu_abs = int(np.floor(a + _GRID_ATOL))
    tau_s = a - mu_abs
    if tau_s < _GRID_ATOL:
        tau_s = 0.0
    mu = mu_abs if tau_periods >= 0 else -mu_abs
    value = case_value(config, query.beta, mu, tau_s)
    return CafValue(value, query)


def caf_support(config: SignalConfig) -> CafSupport:
    """Feature queries and nonzero grids of the theoretical CAF."""
    m, rho = config.m, config.rho
    cp_len = config.l_of(0)
    cp_q = CafQuery(0.0, float(rho * m))
    sym_q = CafQuery(1.0 / rho, 0.0)
    conj_q = CafQuery(-1.0 / rho, 0.0)

    # delays (samples) with nonzero zero-CF value: tau = 0, odd lags up
    # to M-L-1, and the prefix band M-L+1 .. M+L-1 around +/- rho*M
    odd_body = np.arange(1, m - cp_len, 2)
    cp_band = np.arange(m - cp_len + 1, m + cp_len, 2)
    lags = np.concatenate([[0], odd_body, cp_band, [m]])
    lags = np.unique(lags) * rho
    delays = np.concatenate([-lags[::-1], lags[1:]])

    return CafSupport(
        cp_feature=cp_q,
        symbol_rate_feature=sym_q,
        conjugate_symbol_rate_feature=conj_q,
        zero_cf_delays=delays.astype(float),
        symbol_cf_spacing=1.0 / rho,
        block_cf_spacing=1.0 / (rho * (m + cp_len)),
    )
