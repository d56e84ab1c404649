"""Receive-side impairment chain.

Stage order is fixed: multipath fading -> additive interference ->
CFO/phase/timing offsets -> low-pass receive filter -> AWGN (the SNR is
referenced to the filtered signal power) -> ADC quantization.  Every
stochastic stage is deterministic under an explicit seed, so a whole
chain replays bit-exactly.

Fading taps follow the ITU-R M.1225 power-delay profiles with tap
delays rounded to the nearest sample (coincident taps merge their
power) and a Jakes Doppler spectrum realized as a 32-oscillator
sum of sinusoids per tap.  The fading processes are synthesized on a
coarse time grid (the Doppler bandwidth is orders of magnitude below
the sample rate) and interpolated linearly onto the sample grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import butter, sosfilt

from .waveform import ComplexStream

# ITU-R M.1225 tapped-delay-line profiles: (delay ns, mean power dB)
PEDESTRIAN_A_TAPS = ((0.0, 0.0), (110.0, -9.7), (190.0, -19.2), (410.0, -22.8))
VEHICULAR_A_TAPS = (
    (0.0, 0.0),
    (310.0, -1.0),
    (710.0, -9.0),
    (1090.0, -10.0),
    (1730.0, -15.0),
    (2510.0, -20.0),
)

PEDESTRIAN_DOPPLER_HZ = 9.72
VEHICULAR_DOPPLER_HZ = 194.44

JAKES_OSCILLATORS = 32
FRACTIONAL_DELAY_TAPS = 33
DEFAULT_RECEIVE_CUTOFF_HZ = 2.0e6


@dataclass(frozen=True)
class ChannelProfile:
    """Tapped-delay-line description with a maximum Doppler frequency."""

    kind: str
    taps: tuple[tuple[float, float], ...]
    doppler_hz: float

    def __post_init__(self) -> None:
        if not self.taps:
            raise ValueError("profile needs at least one tap")
        delays = [t[0] for t in self.taps]
        if any(d < 0 for d in delays) or sorted(delays) != delays:
            raise ValueError("tap delays must be non-negative and increasing")

    @staticmethod
    def awgn_only() -> "ChannelProfile":
        return ChannelProfile("awgn_only", ((0.0, 0.0),), 0.0)

    @staticmethod
    def pedestrian_a(doppler_hz: float = PEDESTRIAN_DOPPLER_HZ) -> "ChannelProfile":
        return ChannelProfile("pedestrian_a", PEDESTRIAN_A_TAPS, doppler_hz)

    @staticmethod
    def vehicular_a(doppler_hz: float = VEHICULAR_DOPPLER_HZ) -> "ChannelProfile":
        return ChannelProfile("vehicular_a", VEHICULAR_A_TAPS, doppler_hz)


@dataclass(frozen=True)
class Scenario:
    """One simulated reception condition."""

    profile: ChannelProfile = field(default_factory=ChannelProfile.pedestrian_a)
    snr_db: float = 0.0
    sir_db: float | None = None
    cfo_hz: float = 500e3
    phase_offset: float | None = None  # None: uniform over [-pi, pi) per trial
    timing_offset: float | None = None  # None: uniform over [0, 1) per trial
    observation_s: float = 12.8e-3
    quantizer_bits: int = 16
    overloading_factor: float = 4.0
    p_fa: float = 0.01
    receive_cutoff_hz: float = DEFAULT_RECEIVE_CUTOFF_HZ

    def __post_init__(self) -> None:
        if self.observation_s <= 0:
            raise ValueError("observation time must be positive")
        if self.quantizer_bits < 2:
            raise ValueError("quantizer needs at least 2 bits")
        if not 0.0 < self.p_fa < 1.0:
            raise ValueError("p_fa must be in (0, 1)")
        if self.phase_offset is not None and not -np.pi <= self.phase_offset < np.pi:
            raise ValueError("phase offset must lie in [-pi, pi)")
        if self.timing_offset is not None and not 0.0 <= self.timing_offset < 1.0:
            raise ValueError("timing offset must lie in [0, 1)")


def _merged_sample_taps(
    profile: ChannelProfile, fs: float
) -> tuple[np.ndarray, np.ndarray]:
    """Round tap delays to samples, merge coincident taps, unit total power."""
    powers: dict[int, float] = {}
    for delay_ns, p_db in profile.taps:
        d = int(round(delay_ns * 1e-9 * fs))
        powers[d] = powers.get(d, 0.0) + 10.0 ** (p_db / 10.0)
    delays = np.array(sorted(powers))
    lin = np.array([powers[d] for d in delays])
    return delays, lin / lin.sum()


def jakes_process(
    rng: np.random.Generator,
    doppler_hz: float,
    t: np.ndarray,
    oscillators: int = JAKES_OSCILLATORS,
) -> np.ndarray:
    """Unit-power complex Rayleigh fading with a Jakes Doppler spectrum.

    Sum of `oscillators` equal-amplitude tones at Doppler shifts
    fd*cos(alpha_k), arrival angles uniformly rotated per realization,
    independent phases.  Time-average autocorrelation approximates
    J0(2 pi fd tau).
    """
    k = np.arange(oscillators)
    alpha = 2.0 * np.pi * (k + rng.uniform()) / oscillators
    phases = rng.uniform(0.0, 2.0 * np.pi, size=oscillators)
    freqs = doppler_hz * np.cos(alpha)
    h = np.zeros(len(t), dtype=np.complex128)
    for fk, pk in zip(freqs, phases):
        h += np.exp(1j * (2.0 * np.pi * fk * t + pk))
    return h / np.sqrt(oscillators)


def apply_fading(
    r: ComplexStream, profile: ChannelProfile, seed: int | np.random.Generator
) -> ComplexStream:
    """Tapped-delay-line Rayleigh fading with Jakes Doppler per tap.

    A single zero-delay tap with no Doppler (the AWGN-only profile)
    passes the input through unchanged.
    """
    fs = r.sample_rate_hz
    delays, powers = _merged_sample_taps(profile, fs)
    if len(delays) == 1 and delays[0] == 0 and profile.doppler_hz == 0.0:
        return r
    if delays[-1] >= len(r):
        raise ValueError(
            f"tap delay of {delays[-1]} samples exceeds the record length {len(r)}"
        )
    rng = np.random.default_rng(seed) if not isinstance(seed, np.random.Generator) else seed
    x = r.samples
    n = len(x)
    out = np.zeros(n, dtype=np.complex128)

    if profile.doppler_hz > 0.0:
        # synthesize fading well above the Doppler rate, then interpolate
        fading_fs = max(50.0 * profile.doppler_hz, 1e3)
        n_coarse = max(int(np.ceil(n / fs * fading_fs)) + 2, 4)
        t_coarse = np.arange(n_coarse) / fading_fs
        t_fine = np.arange(n) / fs

    for d, p in zip(delays, powers):
        if profile.doppler_hz > 0.0:
            h_coarse = jakes_process(rng, profile.doppler_hz, t_coarse)
            h = np.interp(t_fine, t_coarse, h_coarse.real) + 1j * np.interp(
                t_fine, t_coarse, h_coarse.imag
            )
        else:
            # static draw: same oscillator sum collapsed to one instant
            h = jakes_process(rng, 0.0, np.zeros(1))[0]
        shifted = np.concatenate([np.zeros(d, dtype=np.complex128), x[: n - d]])
        out += np.sqrt(p) * h * shifted
    return r.replace(out)


def _fractional_delay(x: np.ndarray, delay_samples: float) -> np.ndarray:
    """Windowed-sinc fractional delay, FRACTIONAL_DELAY_TAPS taps."""
    n_taps = FRACTIONAL_DELAY_TAPS
    center = (n_taps - 1) // 2
    k = np.arange(n_taps)
    h = np.sinc(k - center - delay_samples) * np.blackman(n_taps)
    h /= h.sum()
    y = np.convolve(x, h, mode="full")
    return y[center : center + len(x)]


def apply_impairments(
    r: ComplexStream,
    cfo_hz: float = 0.0,
    phase: float = 0.0,
    timing_frac: float = 0.0,
    samples_per_symbol: int = 1,
) -> ComplexStream:
    """Carrier frequency offset, phase rotation, sub-sample timing shift.

    timing_frac is a fraction of the symbol period, i.e. a delay of
    timing_frac * samples_per_symbol samples realized by a windowed
    sinc interpolator.  All three at zero return the input unchanged.
    """
    fs = r.sample_rate_hz
    if abs(cfo_hz) >= fs / 2:
        raise ValueError(f"CFO {cfo_hz} Hz is beyond Nyquist for fs = {fs}")
    x = r.samples
    if cfo_hz != 0.0 or phase != 0.0:
        u = np.arange(len(x))
        x = x * np.exp(1j * (2.0 * np.pi * cfo_hz * u / fs + phase))
    if timing_frac != 0.0:
        x = _fractional_delay(x, timing_frac * samples_per_symbol)
    return r.replace(x) if x is not r.samples else r


def receive_filter(
    r: ComplexStream, cutoff_hz: float = DEFAULT_RECEIVE_CUTOFF_HZ, order: int = 13
) -> ComplexStream:
    """Low-pass Butterworth, cascaded second-order sections."""
    fs = r.sample_rate_hz
    if not 0.0 < cutoff_hz < fs / 2:
        raise ValueError(f"cutoff must be in (0, fs/2), got {cutoff_hz}")
    sos = butter(order, cutoff_hz, btype="low", fs=fs, output="sos")
    return r.replace(sosfilt(sos, r.samples))


def add_awgn(
    r: ComplexStream,
    snr_db: float,
    reference_power: float,
    seed: int | np.random.Generator,
) -> ComplexStream:
    """Circular complex Gaussian noise at reference_power / 10^(snr/10)."""
    rng = np.random.default_rng(seed) if not isinstance(seed, np.random.Generator) else seed
    noise_power = reference_power * 10.0 ** (-snr_db / 10.0)
    scale = np.sqrt(noise_power / 2.0)
    n = len(r)
    noise = scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    return r.replace(r.samples + noise)


def add_interference(
    r: ComplexStream,
    sir_db: float | None,
    reference_power: float,
    seed: int | np.random.Generator,
) -> ComplexStream:
    """Wideband Gaussian multiuser interference at the given SIR.

    sir_db None (or infinite) leaves the stream untouched.
    """
    if sir_db is None or np.isinf(sir_db):
        return r
    return add_awgn(r, sir_db, reference_power, seed)


def quantize(
    r: ComplexStream, bits: int, overloading_factor: float = 4.0
) -> ComplexStream:
    """Uniform mid-rise ADC on I and Q, clip at overloading_factor * rms.

    2^bits levels span [-clip, +clip] per rail; inputs beyond the clip
    level saturate at the outermost codes.
    """
    if bits < 2:
        raise ValueError("quantizer needs at least 2 bits")
    x = r.samples
    rms = np.sqrt(np.mean(x.real**2 + x.imag**2) / 2.0)
    if rms == 0.0:
        return r
    clip = overloading_factor * rms
    step = 2.0 * clip / (2**bits)
    top = clip - step / 2.0

    def rail(v: np.ndarray) -> np.ndarray:
        q = step * (np.floor(v / step) + 0.5)
        return np.clip(q, -top, top)

    return r.replace(rail(x.real) + 1j * rail(x.imag))
