"""Analog front end of the sensor node, from structure motion to ADC codes.

The simulated chain is:

    base excitation -> structural modes -> MEMS accelerometer -> 12-bit ADC

Structural response is modeled as white noise driving one second-order
resonator per mode (outputs summed), which stands in for the shaker used on
the physical test structure.  The accelerometer adds its own broadband noise
and maps acceleration to a ratiometric voltage around mid-supply.  The ADC is
an ideal mid-tread quantizer with saturation accounting.

Units: acceleration in g, voltage in volts, frequencies in Hz.  All
randomness flows through an explicit seed; the same seed gives the same
series, sample for sample.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import signal


@dataclass(frozen=True)
class ModeSpec:
    """One structural vibration mode."""

    freq_hz: float
    damping_ratio: float = 0.01
    rms_amp_g: float = 0.01

    def __post_init__(self):
        if self.freq_hz <= 0:
            raise ValueError(f"mode frequency must be positive, got {self.freq_hz}")
        if not 0 < self.damping_ratio < 1:
            raise ValueError(f"damping ratio must be in (0, 1), got {self.damping_ratio}")
        if self.rms_amp_g < 0:
            raise ValueError(f"mode rms amplitude must be >= 0, got {self.rms_amp_g}")


@dataclass(frozen=True)
class StructureModel:
    """A set of modes plus a human-readable condition label."""

    modes: tuple[ModeSpec, ...]
    label: str = "structure"

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        if not self.modes:
            raise ValueError("structure model needs at least one mode")
        freqs = [m.freq_hz for m in self.modes]
        if any(b <= a for a, b in zip(freqs, freqs[1:])):
            raise ValueError("modes must be strictly ascending in frequency")

    def mode_freqs(self) -> list[float]:
        return [m.freq_hz for m in self.modes]


@dataclass(frozen=True)
class SensorSpec:
    """MEMS accelerometer: LIS344ALH-class analog output part."""

    noise_density_ug_sqrthz: float = 50.0
    sensitivity_v_per_g: float = 0.66
    full_scale_g: float = 2.0
    supply_v: float = 3.3

    def __post_init__(self):
        if self.noise_density_ug_sqrthz < 0:
            raise ValueError("noise density must be >= 0")
        if self.sensitivity_v_per_g <= 0 or self.full_scale_g <= 0 or self.supply_v <= 0:
            raise ValueError("sensitivity, full scale and supply must be positive")

    def noise_rms_g(self, f_os_hz: float) -> float:
        """Broadband noise RMS over the oversampled bandwidth [0, f_os/2]."""
        return self.noise_density_ug_sqrthz * 1e-6 * np.sqrt(f_os_hz / 2.0)


@dataclass(frozen=True)
class AdcSpec:
    """Ideal unsigned ADC sampling at the oversampled rate."""

    bits: int = 12
    vref_v: float = 3.3
    f_os_hz: float = 25600.0

    def __post_init__(self):
        if not 1 <= self.bits <= 24:
            raise ValueError(f"ADC bits out of range: {self.bits}")
        if self.vref_v <= 0 or self.f_os_hz <= 0:
            raise ValueError("vref and sample rate must be positive")

    @property
    def n_codes(self) -> int:
        return 1 << self.bits

    @property
    def midscale(self) -> int:
        return 1 << (self.bits - 1)


@dataclass(frozen=True)
class EventSpec:
    """A transient burst riding on the ambient response."""

    onset_s: float
    peak_g: float
    duration_s: float

    def __post_init__(self):
        if self.onset_s < 0 or self.duration_s < 0:
            raise ValueError("event onset and duration must be >= 0")
        if self.peak_g < 0:
            raise ValueError("event peak must be >= 0")


def _resonator_coeffs(freq_hz: float, damping: float, fs_hz: float):
    # Matched-pole mapping of s^2 + 2*zeta*w0*s + w0^2; gain is irrelevant
    # because the output is rescaled to the requested RMS afterwards.
    w0 = 2.0 * np.pi * freq_hz / fs_hz
    r = np.exp(-damping * w0)
    theta = w0 * np.sqrt(1.0 - damping * damping)
    a = np.array([1.0, -2.0 * r * np.cos(theta), r * r])
    b = np.array([1.0])
    return b, a


def synth_structure_response(
    model: StructureModel,
    duration_s: float,
    f_os_hz: float = 25600.0,
    seed: int = 0,
    excitation: str = "ambient",
) -> np.ndarray:
    """Synthesize the acceleration seen at the sensor mount, in g.

    excitation="ambient": each mode is an independent white-noise
    realization filtered by its resonator.  The realized spectral peak of
    such a record wanders around the mode frequency by a fraction of the
    resonance width (roughly damping_ratio * freq); that is physics, not
    estimator error.

    excitation="dwell": a coherent tone per mode (random phase), the way a
    shaker dwelling on the resonances excites the structure.  Use this for
    tone-accuracy comparisons where sub-bin truth matters.

    Either way the per-mode sample RMS equals ``rms_amp_g`` exactly, and a
    model where every mode has rms_amp_g == 0 returns an all-zero series.
    """
    if duration_s <= 0:
        raise ValueError(f"duration must be positive, got {duration_s}")
    if excitation not in ("ambient", "dwell"):
        raise ValueError(f"unknown excitation {excitation!r}")
    nyquist = f_os_hz / 2.0
    for m in model.modes:
        if m.freq_hz >= nyquist:
            raise ValueError(
                f"mode at {m.freq_hz} Hz is at or above Nyquist ({nyquist} Hz)"
            )

    n = int(round(duration_s * f_os_hz))
    t = np.arange(n) / f_os_hz
    rng = np.random.default_rng(seed)
    accel = np.zeros(n)
    for m in model.modes:
        if excitation == "dwell":
            phase = rng.uniform(0.0, 2.0 * np.pi)
            if m.rms_amp_g == 0.0:
                continue
            accel += m.rms_amp_g * np.sqrt(2.0) * np.sin(2.0 * np.pi * m.freq_hz * t + phase)
            continue
        noise = rng.standard_normal(n)
        if m.rms_amp_g == 0.0:
            continue  # draw consumed anyway so seeds stay comparable across models
        b, a = _resonator_coeffs(m.freq_hz, m.damping_ratio, f_os_hz)
        y = signal.lfilter(b, a, noise)
        rms = np.sqrt(np.mean(y * y))
        if rms > 0:
            accel += y * (m.rms_amp_g / rms)
    return accel


def inject_transient(
    accel: np.ndarray,
    event: EventSpec,
    f_os_hz: float = 25600.0,
    carrier_freq_hz: float = 2.807,
) -> np.ndarray:
    """Add a half-sine-enveloped tone burst; returns a new array.

    The carrier is phased to hit its crest at the envelope center, so the
    burst peak equals ``event.peak_g`` up to sampling granularity.  Samples
    outside [onset, onset + duration) are unchanged.
    """
    n = len(accel)
    i0 = int(round(event.onset_s * f_os_hz))
    i1 = int(round((event.onset_s + event.duration_s) * f_os_hz))
    if i1 > n:
        raise ValueError("event extends past the end of the series")
    out = np.array(accel, dtype=float, copy=True)
    if i1 <= i0 or event.peak_g == 0.0:
        return out
    t = (np.arange(i0, i1) / f_os_hz) - event.onset_s
    envelope = np.sin(np.pi * t / event.duration_s)
    carrier = np.cos(2.0 * np.pi * carrier_freq_hz * (t - event.duration_s / 2.0))
    out[i0:i1] += event.peak_g * envelope * carrier
    return out


def trigger_index(accel: np.ndarray, threshold_g: float) -> int | None:
    """First sample index where |accel| crosses the wake threshold, else None.

    Models the wake-on-event comparator of the always-on companion
    accelerometer; the main node treats a crossing as a wake request.
    """
    if threshold_g <= 0:
        raise ValueError("trigger threshold must be positive")
    hits = np.nonzero(np.abs(accel) >= threshold_g)[0]
    return int(hits[0]) if hits.size else None


def apply_sensor(
    accel: np.ndarray,
    spec: SensorSpec = SensorSpec(),
    f_os_hz: float = 25600.0,
    seed: int = 0,
) -> np.ndarray:
    """Map acceleration to sensor output voltage, adding broadband noise.

    v[n] = supply/2 + sensitivity * (a[n] + w[n]) with w white Gaussian,
    RMS = density * sqrt(f_os/2).  The default density over a 12.8 kHz
    bandwidth works out to about 5.66 mg RMS.
    """
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal(len(accel)) * spec.noise_rms_g(f_os_hz)
    return spec.supply_v / 2.0 + spec.sensitivity_v_per_g * (np.asarray(accel) + noise)


def quantize(volts: np.ndarray, adc: AdcSpec = AdcSpec()) -> tuple[np.ndarray, int]:
    """Quantize voltage to ADC codes; returns (codes, saturated sample count).

    code = floor(v / vref * 2^bits), clipped to [0, 2^bits - 1].  Mid-supply
    lands exactly on the midscale code (2048 for 12 bits).
    """
    v = np.asarray(volts, dtype=float)
    raw = np.floor(v / adc.vref_v * adc.n_codes).astype(np.int64)
    n_sat = int(np.count_nonzero((raw < 0) | (raw > adc.n_codes - 1)))
    codes = np.clip(raw, 0, adc.n_codes - 1)
    return codes, n_sat


def dequantize(codes: np.ndarray, adc: AdcSpec = AdcSpec()) -> np.ndarray:
    """Code-center reconstruction; quantize(dequantize(c)) == c for valid c."""
    return (np.asarray(codes, dtype=float) + 0.5) * (adc.vref_v / adc.n_codes)
