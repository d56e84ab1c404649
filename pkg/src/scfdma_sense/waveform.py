"""LTE SC-FDMA uplink baseband synthesis.

Discrete-time transmit chain: constellation mapping, N-point DFT
spreading, localized mapping onto M subcarriers, M-point inverse DFT,
per-symbol cyclic prefix, and root-raised-cosine pulse shaping at an
integer oversampling factor rho.

Conventions fixed here and relied on everywhere else:

* forward DFT unnormalized, inverse DFT scaled by 1/M, so that the
  time-domain samples at multiples of the expansion factor Q equal the
  input symbols divided by Q exactly;
* RRC taps normalized to unit sum of squares, so one symbol carries
  unit energy in the sample stream and the mean power of the stream is
  ``c_x * (N/M)**2 / rho`` for unit-variance constellations;
* ``generate_frame`` trims the filter group delay (half the tap count)
  so that sample 0 coincides with the first symbol instant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.signal import upfirdn

# slot layout on the M=128 numerology grid: 7 symbols per slot for the
# short prefix, first symbol gets the longer prefix
SHORT_CP_SLOT_SYMBOLS = 7
SHORT_CP_FIRST_NUM = 10
SHORT_CP_REST_NUM = 9
SHORT_CP_DEN = 128


@dataclass(frozen=True)
class SignalConfig:
    """SC-FDMA numerology and pulse-shaping parameters.

    Attributes
    ----------
    n : input block length (data symbols per block)
    m : subcarrier count, m > n
    cp_mode : "long" (L = M/4 every symbol) or "short" (L/M = 10/128 for
        the first symbol of a 7-symbol slot, 9/128 for the rest)
    rho : integer oversampling factor (samples per symbol period T)
    rolloff : RRC roll-off in [0, 1]
    delta_f : subcarrier spacing in Hz
    modulation : "16qam" or "qpsk"
    c_x : constellation second moment (1.0 for unit-variance mappings)
    rrc_span : RRC truncation, in symbol periods (taps = span*rho + 1)
    """

    n: int = 72
    m: int = 128
    cp_mode: str = "long"
    rho: int = 4
    rolloff: float = 0.35
    delta_f: float = 15e3
    modulation: str = "16qam"
    c_x: float = 1.0
    rrc_span: int = 12

    def __post_init__(self) -> None:
        if not (self.m > self.n >= 1):
            raise ValueError(f"need M > N >= 1, got N={self.n}, M={self.m}")
        if int(self.rho) != self.rho or self.rho < 1:
            raise ValueError(f"rho must be a positive integer, got {self.rho}")
        if self.cp_mode not in ("long", "short"):
            raise ValueError(f"unknown cp_mode {self.cp_mode!r}")
        if not 0.0 <= self.rolloff <= 1.0:
            raise ValueError(f"rolloff must be in [0, 1], got {self.rolloff}")
        if self.delta_f <= 0:
            raise ValueError("delta_f must be positive")
        if self.l_of(0) >= self.m:
            raise ValueError("cyclic prefix length must be below M")

    @property
    def expansion_factor(self) -> float:
        """Q = M/N; integer only for the closed-form configurations."""
        return self.m / self.n

    @property
    def symbol_period_s(self) -> float:
        """T = 1/(M*delta_f): spacing of the time-domain samples."""
        return 1.0 / (self.m * self.delta_f)

    @property
    def sample_rate_hz(self) -> float:
        """f_s = rho*M*delta_f."""
        return self.rho * self.m * self.delta_f

    def l_of(self, symbol_index: int) -> int:
        """Cyclic prefix length (in symbol periods) of one block."""
        if self.cp_mode == "long":
            return self.m // 4
        pos = symbol_index % SHORT_CP_SLOT_SYMBOLS
        num = SHORT_CP_FIRST_NUM if pos == 0 else SHORT_CP_REST_NUM
        return int(round(num * self.m / SHORT_CP_DEN))

    def constant_cp_len(self) -> int | None:
        """CP length if it is the same for every symbol, else None."""
        if self.cp_mode == "long":
            return self.m // 4
        return None


@dataclass(frozen=True)
class ComplexStream:
    """Complex baseband samples plus their sample rate."""

    samples: np.ndarray
    sample_rate_hz: float

    def __post_init__(self) -> None:
        if len(self.samples) == 0:
            raise ValueError("empty sample stream")
        if self.sample_rate_hz <= 0:
            raise ValueError("sample rate must be positive")

    def __len__(self) -> int:
        return len(self.samples)

    def power(self) -> float:
        return float(np.mean(np.abs(self.samples) ** 2))

    def replace(self, samples: np.ndarray) -> "ComplexStream":
        return ComplexStream(samples, self.sample_rate_hz)


_QAM16_LEVELS = np.array([-3.0, -1.0, 1.0, 3.0]) / math.sqrt(10.0)
_QPSK_POINTS = (np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j])) / math.sqrt(2.0)


def _as_rng(seed: int | np.random.Generator) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def map_symbols(
    seed: int | np.random.Generator, count: int, config: SignalConfig
) -> np.ndarray:
    """Draw `count` blocks of N constellation points, shape (count, N).

    Unit average power for both supported constellations, so the block
    second moment converges to c_x = 1.  Deterministic given the seed.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = _as_rng(seed)
    mod = config.modulation.lower()
    if mod in ("16qam", "qam16"):
        i = rng.integers(0, 4, size=(count, config.n))
        q = rng.integers(0, 4, size=(count, config.n))
        return _QAM16_LEVELS[i] + 1j * _QAM16_LEVELS[q]
    if mod == "qpsk":
        k = rng.integers(0, 4, size=(count, config.n))
        return _QPSK_POINTS[k]
    raise ValueError(f"unsupported modulation {config.modulation!r}")


def lfdma_block_dft(block: np.ndarray, config: SignalConfig) -> np.ndarray:
    """Localized-FDMA time samples of one block via the DFT pipeline.

    N-point forward DFT (unnormalized), placement on subcarriers
    0..N-1 of M with the rest zero, M-point inverse DFT (1/M).
    """
    block = np.asarray(block, dtype=np.complex128)
    if block.shape != (config.n,):
        raise ValueError(f"block must have length N={config.n}")
    spectrum = np.zeros(config.m, dtype=np.complex128)
    spectrum[: config.n] = np.fft.fft(block)
    return np.fft.ifft(spectrum)


def lfdma_block_closed_form(block: np.ndarray, config: SignalConfig) -> np.ndarray:
    """Direct evaluation of the two-branch LFDMA sample expression.

    Valid for integer expansion factors Q = M/N; the q = 0 branch gives
    x_n / Q at sample positions Qn, the q != 0 branch the weighted sum
    over the whole input block.  Used as the oracle for the DFT path.
    """
    block = np.asarray(block, dtype=np.complex128)
    if block.shape != (config.n,):
        raise ValueError(f"block must have length N={config.n}")
    q_exp = config.m / config.n
    if abs(q_exp - round(q_exp)) > 1e-12 or round(q_exp) < 1:
        raise ValueError(f"closed form needs integer Q >= 1, got M/N={q_exp}")
    bigq = int(round(q_exp))
    n_sz = config.n

    out = np.empty(config.m, dtype=np.complex128)
    n_idx = np.arange(n_sz)
    out[::bigq] = block / bigq
    p_idx = np.arange(n_sz)
    for q in range(1, bigq):
        factor = (1.0 - np.exp(2j * np.pi * q / bigq)) / (bigq * n_sz)
        # denom[n, p] = 1 - exp(j 2 pi ((n - p)/N + q/(Q N)))
        phase = (n_idx[:, None] - p_idx[None, :]) / n_sz + q / (bigq * n_sz)
        denom = 1.0 - np.exp(2j * np.pi * phase)
        out[q::bigq] = factor * (block / denom).sum(axis=1)
    return out


def add_cp(body: np.ndarray, cp_len: int) -> np.ndarray:
    """Prepend the last `cp_len` samples of the body (cyclic prefix)."""
    body = np.asarray(body)
    if not 0 < cp_len < len(body):
        raise ValueError(f"cp length must be in (0, {len(body)}), got {cp_len}")
    return np.concatenate([body[-cp_len:], body])


@lru_cache(maxsize=16)
def rrc_taps(rho: int, rolloff: float, span: int = 12) -> np.ndarray:
    """Root-raised-cosine taps, span*rho + 1 of them, unit sum of squares."""
    n_taps = span * rho + 1
    t = (np.arange(n_taps) - (n_taps - 1) / 2) / rho  # in symbol periods
    a = rolloff
    h = np.empty(n_taps)
    for i, ti in enumerate(t):
        if abs(ti) < 1e-12:
            h[i] = 1.0 - a + 4.0 * a / np.pi
        elif a > 0 and abs(abs(ti) - 1.0 / (4.0 * a)) < 1e-12:
            h[i] = (a / math.sqrt(2.0)) * (
                (1.0 + 2.0 / np.pi) * math.sin(np.pi / (4.0 * a))
                + (1.0 - 2.0 / np.pi) * math.cos(np.pi / (4.0 * a))
            )
        else:
            num = math.sin(np.pi * ti * (1.0 - a)) + 4.0 * a * ti * math.cos(
                np.pi * ti * (1.0 + a)
            )
            den = np.pi * ti * (1.0 - (4.0 * a * ti) ** 2)
            h[i] = num / den
    return h / math.sqrt(np.sum(h**2))


def rrc_group_delay(config: SignalConfig) -> int:
    """Group delay of the transmit RRC in samples."""
    return config.rrc_span * config.rho // 2


def pulse_shape(blocks: list[np.ndarray], config: SignalConfig) -> ComplexStream:
    """T-spaced symbols through the RRC at rho samples per symbol.

    The CP-extended blocks are concatenated into one symbol stream and
    convolved as a whole (continuous-stream shaping, not per block).
    The returned stream keeps the filter group delay of
    ``rrc_group_delay(config)`` samples; callers that need symbol 0 at
    sample 0 trim it.
    """
    if not blocks:
        raise ValueError("no blocks to shape")
    z = np.concatenate([np.asarray(b, dtype=np.complex128) for b in blocks])
    h = rrc_taps(config.rho, config.rolloff, config.rrc_span)
    shaped = upfirdn(h, z, up=config.rho)
    return ComplexStream(shaped, config.sample_rate_hz)


def generate_frame(
    config: SignalConfig, duration_s: float, seed: int | np.random.Generator
) -> ComplexStream:
    """End-to-end SC-FDMA stream of round(duration_s * f_s) samples.

    map_symbols -> DFT spreading -> CP (per-symbol length under the
    short prefix) -> RRC shaping, with the leading group delay trimmed
    so sample 0 aligns with the first symbol instant.
    """
    fs = config.sample_rate_hz
    n_out = int(round(duration_s * fs))
    first_block = (config.m + config.l_of(0)) * config.rho
    if n_out < first_block:
        raise ValueError(
            f"duration {duration_s} s is shorter than one block "
            f"({first_block / fs} s)"
        )
    gd = rrc_group_delay(config)
    taps = config.rrc_span * config.rho + 1
    needed = math.ceil((n_out + gd + taps) / config.rho)

    # enough whole blocks to cover the record plus the filter tail
    n_blocks, total = 0, 0
    while total < needed:
        total += config.m + config.l_of(n_blocks)
        n_blocks += 1

    symbols = map_symbols(seed, n_blocks, config)
    blocks = []
    for b in range(n_blocks):
        body = lfdma_block_dft(symbols[b], config)
        blocks.append(add_cp(body, config.l_of(b)))
    shaped = pulse_shape(blocks, config)
    return ComplexStream(shaped.samples[gd : gd + n_out], fs)
