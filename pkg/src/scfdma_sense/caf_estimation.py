"""Sample estimators for the CAF and its covariance.

The point estimator is the lag-product sum

    chat(beta, tau) = (1/U_s) * sum_u r(u) conj(r(u - tau)) e^{-j2 pi beta u}

over one record of U_s samples, with out-of-range lag indices
contributing zero (truncated, not circular: circular wrap-around would
manufacture spurious cycle frequencies).  The covariance of the
re/im feature vector is estimated from the cyclic periodogram
``F_tau(beta) = U_s * chat(beta, tau)`` smoothed by a spectral window
of odd length U_sw across the adjacent DFT frequencies
``beta + s/U_s``:

    Q20 = (U_s U_sw)^-1 sum_s W(s) F(beta - s/U_s) F(beta + s/U_s)
    Q21 = (U_s U_sw)^-1 sum_s W(s) |F(beta + s/U_s)|^2

assembled into the 2x2 block pattern

    sigma = [[Re(Q20+Q21)/2, Im(Q20-Q21)/2],
             [Im(Q20+Q21)/2, Re(Q21-Q20)/2]].

The shifted-frequency values are computed with one FFT of the rotated
lag product (the offsets are exactly DFT bins); the direct summation is
kept as the reference path and the two agree to near machine precision.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .caf_theory import CafQuery
from .waveform import ComplexStream


@dataclass(frozen=True)
class CafEstimate:
    value: complex
    query: CafQuery
    u_s: int


@dataclass(frozen=True)
class CovarianceEstimate:
    sigma: np.ndarray  # 2x2, real, symmetric
    u_sw: int
    window_kind: str


def default_window_length(u_s: int) -> int:
    """Nearest odd integer to 0.006 * U_s, at least 3."""
    target = 0.006 * u_s
    lo = int(np.floor(target))
    lo = lo if lo % 2 == 1 else lo - 1
    hi = lo + 2
    best = lo if abs(target - lo) <= abs(hi - target) else hi
    return max(best, 3)


def spectral_window(kind: str, u_sw: int) -> np.ndarray:
    """Window weights W(s), normalized so sum W = U_sw."""
    if kind == "rectangular":
        return np.ones(u_sw)
    if kind == "kaiser":
        w = np.kaiser(u_sw, 8.0)
        return w * (u_sw / w.sum())
    raise ValueError(f"unknown spectral window {kind!r}")


def _int_delay(tau: float) -> int:
    if abs(tau - round(tau)) > 1e-9:
        raise ValueError(f"estimator delays must be integer samples, got {tau}")
    return int(round(tau))


def lag_product(x: np.ndarray, tau: int) -> np.ndarray:
    """y(u) = x(u) * conj(x(u - tau)), zero where u - tau is out of range."""
    y = np.zeros(len(x), dtype=np.complex128)
    if tau >= 0:
        if tau < len(x):
            y[tau:] = x[tau:] * np.conj(x[: len(x) - tau])
    else:
        if -tau < len(x):
            y[:tau] = x[:tau] * np.conj(x[-tau:])
    return y


def estimate_caf(r: ComplexStream, query: CafQuery) -> CafEstimate:
    """CAF point estimate from one record."""
    tau = _int_delay(query.tau)
    u_s = len(r)
    if abs(tau) >= u_s:
        raise ValueError(f"|tau| = {abs(tau)} must be below the record length {u_s}")
    y = lag_product(r.samples, tau)
    u = np.arange(u_s)
    value = np.mean(y * np.exp(-2j * np.pi * query.beta * u))
    return CafEstimate(complex(value), query, u_s)


def cyclic_periodogram_component(r: ComplexStream, tau: float, beta: float) -> complex:
    """F_tau(beta) = sum_u r(u) conj(r(u-tau)) e^{-j2 pi beta u} = U_s * chat."""
    tau_i = _int_delay(tau)
    u_s = len(r)
    if abs(tau_i) >= u_s:
        raise ValueError(f"|tau| = {abs(tau_i)} must be below the record length {u_s}")
    y = lag_product(r.samples, tau_i)
    u = np.arange(u_s)
    return complex(np.sum(y * np.exp(-2j * np.pi * beta * u)))


def shifted_components(
    r: ComplexStream, tau: int, beta: float, offsets: np.ndarray, method: str = "fft"
) -> np.ndarray:
    """F_tau(beta + s/U_s) for integer bin offsets s.

    method "fft" rotates the lag product to beta and reads the DFT
    bins; "direct" sums each offset explicitly and is the reference.
    """
    u_s = len(r)
    if method == "direct":
        return np.array(
            [cyclic_periodogram_component(r, tau, beta + s / u_s) for s in offsets]
        )
    if method != "fft":
        raise ValueError(f"unknown method {method!r}")
    y = lag_product(r.samples, tau)
    u = np.arange(u_s)
    z = y * np.exp(-2j * np.pi * beta * u)
    spectrum = np.fft.fft(z)
    return spectrum[np.mod(offsets, u_s)]


def estimate_covariance(
    r: ComplexStream,
    query: CafQuery,
    u_sw: int | None = None,
    window: str = "rectangular",
) -> CovarianceEstimate:
    """2x2 covariance of the re/im CAF feature via windowed periodograms."""
    u_s = len(r)
    if u_sw is None:
        u_sw = default_window_length(u_s)
    if u_sw % 2 == 0 or u_sw < 3:
        raise ValueError(f"U_sw must be odd and >= 3, got {u_sw}")
    if u_sw >= u_s:
        raise ValueError(f"U_sw = {u_sw} must be well below U_s = {u_s}")
    tau = _int_delay(query.tau)
    half = (u_sw - 1) // 2
    s = np.arange(-half, half + 1)
    w = spectral_window(window, u_sw)

    y = lag_product(r.samples, tau)
    u = np.arange(u_s)
    spectrum = np.fft.fft(y * np.exp(-2j * np.pi * query.beta * u))
    f_plus = spectrum[np.mod(s, u_s)]
    f_minus = spectrum[np.mod(-s, u_s)]

    q20 = np.sum(w * f_minus * f_plus) / (u_s * u_sw)
    q21 = np.sum(w * np.conj(f_plus) * f_plus) / (u_s * u_sw)

    sigma = np.array(
        [
            [(q20 + q21).real / 2.0, (q20 - q21).imag / 2.0],
            [(q20 + q21).imag / 2.0, (q21 - q20).real / 2.0],
        ]
    )
    return CovarianceEstimate(sigma, u_sw, window)
