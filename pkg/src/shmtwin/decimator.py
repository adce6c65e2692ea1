"""Multistage FIR decimation from the oversampled ADC rate to the output rate.

The default chain takes 25.6 kHz down to 100 Hz (256x) in six stages.  Each
stage is a linear-phase Kaiser-windowed lowpass designed just tight enough
that the cascade protects the measurement band: any input frequency that would
fold onto the protected band after full decimation is attenuated by the
stated stopband floor, while the protected band itself stays flat within the
stated ripple.  Early stages run at high rate but have generous transition
bands and therefore very few taps; the final stage does the sharp work at
the lowest rate.  This is the standard trade that keeps the whole chain a
few hundred coefficients instead of tens of thousands for a single-stage
design.

The protected band is [0, 0.9 * cutoff]: the outer 10 % of the nominal
passband is transition region, and ripple/attenuation are specified and
measured against the protected band.  With the default 50 Hz cutoff that
means flatness to 45 Hz and aliasing protection for everything folding onto
0..45 Hz.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import signal

from .signals import AdcSpec, SensorSpec, apply_sensor, quantize


class FilterDesignError(Exception):
    """Raised when a chain cannot meet its spec within the coefficient budget."""


@dataclass
class FilterStage:
    """One FIR lowpass plus the decimation that follows it."""

    coeffs: np.ndarray
    decim: int

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if self.coeffs.ndim != 1 or self.coeffs.size == 0:
            raise ValueError("stage needs a non-empty 1-D coefficient vector")
        if self.decim < 1:
            raise ValueError(f"decimation factor must be >= 1, got {self.decim}")

    @property
    def n_taps(self) -> int:
        return int(self.coeffs.size)

    def is_symmetric(self, tol: float = 1e-12) -> bool:
        return bool(np.allclose(self.coeffs, self.coeffs[::-1], atol=tol))


def _default_stage_decims(total_decim: int, n_stages: int) -> tuple[int, ...]:
    """Split total_decim into n_stages factors, big factors last.

    Prime-factorize, then merge smallest factors until the count fits; pad
    with 1s in front if there are fewer factors than stages.  For the default
    256x / 6-stage chain this yields (2, 2, 2, 2, 4, 4).
    """
    factors = []
    rest = total_decim
    p = 2
    while rest > 1:
        while rest % p == 0:
            factors.append(p)
            rest //= p
        p += 1 if p == 2 else 2
    factors.sort()
    while len(factors) > n_stages:
        merged = factors[0] * factors[1]
        factors = sorted([merged] + factors[2:])
    while len(factors) < n_stages:
        factors.insert(0, 1)
    return tuple(factors)


@dataclass(frozen=True)
class DecimatorSpec:
    """Target figures for the whole cascade."""

    n_stages: int = 6
    total_decim: int = 256
    f_in_hz: float = 25600.0
    f_out_hz: float = 100.0
    cutoff_hz: float = 50.0
    passband_ripple_db: float = 0.1
    stopband_atten_db: float = 60.0
    coeff_budget: int = 1000
    stage_decims: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.n_stages < 1 or self.total_decim < 1:
            raise ValueError("need at least one stage and decimation >= 1")
        if abs(self.f_in_hz / self.total_decim - self.f_out_hz) > 1e-9 * self.f_out_hz:
            raise ValueError(
                f"rates inconsistent: {self.f_in_hz}/{self.total_decim} != {self.f_out_hz}"
            )
        if not 0 < self.cutoff_hz <= self.f_out_hz / 2.0:
            raise ValueError("cutoff must lie in (0, f_out/2]")
        if self.passband_ripple_db <= 0 or self.stopband_atten_db <= 0:
            raise ValueError("ripple and attenuation targets must be positive")
        decims = self.stage_decims
        if decims is None:
            decims = _default_stage_decims(self.total_decim, self.n_stages)
            object.__setattr__(self, "stage_decims", decims)
        decims = tuple(int(d) for d in decims)
        object.__setattr__(self, "stage_decims", decims)
        if len(decims) != self.n_stages:
            raise ValueError(f"{len(decims)} stage factors for {self.n_stages} stages")
        if math.prod(decims) != self.total_decim:
            raise ValueError(f"stage factors {decims} do not multiply to {self.total_decim}")

    @property
    def protected_edge_hz(self) -> float:
        """Upper edge of the band the chain keeps flat and alias-free."""
        return 0.9 * self.cutoff_hz


@dataclass(frozen=True)
class FilterReport:
    """Measured figures of a designed cascade."""

    passband_ripple_db: float
    stopband_atten_db: float
    total_coeffs: int
    group_delay_samples_out: float
    stage_taps: tuple[int, ...] = ()


# ---------------------------------------------------------------------------
# design


def _ripple_db_to_delta(pp_db: float) -> float:
    r = 10.0 ** (pp_db / 20.0)
    return (r - 1.0) / (r + 1.0)


def _kaiser_taps(atten_db: float, trans_frac: float) -> int:
    # Kaiser's length estimate; the design loop verifies and grows from here
    n = int(math.ceil((atten_db - 7.95) / (2.285 * 2.0 * math.pi * trans_frac))) + 1
    return max(n | 1, 3)


def _stage_meets(h, fs, f_pass, f_stop, pp_budget_db, atten_target_db) -> bool:
    wpass = np.linspace(0.0, f_pass, 512)
    _, hp = signal.freqz(h, worN=wpass, fs=fs)
    mag = np.abs(hp) / abs(np.sum(h))
    pp = 20.0 * (np.log10(mag.max()) - np.log10(mag.min()))
    if pp > pp_budget_db:
        return False
    wstop = np.linspace(f_stop, fs / 2.0, 2048)
    _, hs = signal.freqz(h, worN=wstop, fs=fs)
    atten = -20.0 * np.log10(np.maximum(np.abs(hs) / abs(np.sum(h)), 1e-12))
    return bool(atten.min() >= atten_target_db)


def design_decimator(spec: DecimatorSpec = DecimatorSpec()) -> list[FilterStage]:
    """Design all stages and verify the cascade against the spec.

    Raises FilterDesignError if a stage cannot close, the coefficient budget
    is exceeded, or the composite response misses the targets.
    """
    f_protect = spec.protected_edge_hz
    filtering = [d for d in spec.stage_decims if d > 1]
    n_filtering = max(len(filtering), 1)
    # Split the composite ripple evenly; cascaded peak-to-peak ripples add
    # to first order.  Stopband gets a fixed 3 dB design margin.
    pp_budget = spec.passband_ripple_db / n_filtering
    delta_p = _ripple_db_to_delta(pp_budget)
    atten_target = spec.stopband_atten_db + 3.0
    delta_s = 10.0 ** (-atten_target / 20.0)

    stages: list[FilterStage] = []
    fs = spec.f_in_hz
    for d in spec.stage_decims:
        if d == 1:
            stages.append(FilterStage(np.array([1.0]), 1))
            continue
        f_next = fs / d
        f_stop = f_next - f_protect
        if f_stop <= f_protect:
            raise FilterDesignError(
                f"no transition band left at stage rate {fs} Hz / {d}: "
                f"stop edge {f_stop} Hz <= pass edge {f_protect} Hz"
            )
        # Kaiser-windowed sinc: passband and stopband deviations are equal,
        # so size the window for whichever requirement is tighter.
        delta = min(delta_p, delta_s)
        atten_design = -20.0 * math.log10(delta)
        beta = signal.kaiser_beta(atten_design)
        n = _kaiser_taps(atten_design, (f_stop - f_protect) / fs)
        n_cap = 4 * n + 257
        while True:
            h = signal.firwin(
                n,
                (f_protect + f_stop) / 2.0,
                window=("kaiser", beta),
                fs=fs,
            )
            h = 0.5 * (h + h[::-1])  # symmetry is exact up to rounding
            if _stage_meets(h, fs, f_protect, f_stop, pp_budget, atten_target):
                break
            n += 2
            if n > n_cap:
                raise FilterDesignError(
                    f"stage at {fs} Hz did not converge by {n_cap} taps"
                )
        stages.append(FilterStage(h / np.sum(h), d))
        fs = f_next

    total = sum(s.n_taps for s in stages)
    if total > spec.coeff_budget:
        raise FilterDesignError(
            f"chain needs {total} coefficients, budget is {spec.coeff_budget}"
        )
    report = measure_response(stages, spec)
    if report.passband_ripple_db > spec.passband_ripple_db:
        raise FilterDesignError(
            f"composite ripple {report.passband_ripple_db:.4f} dB exceeds "
            f"{spec.passband_ripple_db} dB"
        )
    if len(filtering) and report.stopband_atten_db < spec.stopband_atten_db:
        raise FilterDesignError(
            f"composite attenuation {report.stopband_atten_db:.2f} dB below "
            f"{spec.stopband_atten_db} dB"
        )
    return stages


# ---------------------------------------------------------------------------
# measurement


def _alias_bands(spec: DecimatorSpec) -> list[tuple[float, float]]:
    """Input-rate bands that fold onto the protected band after decimation."""
    f_protect = spec.protected_edge_hz
    bands = []
    m = 1
    while True:
        lo = m * spec.f_out_hz - f_protect
        hi = m * spec.f_out_hz + f_protect
        if lo > spec.f_in_hz / 2.0:
            break
        bands.append((max(lo, f_protect), min(hi, spec.f_in_hz / 2.0)))
        m += 1
    return bands


def _composite_gain(stages: list[FilterStage], spec: DecimatorSpec, freqs: np.ndarray):
    """|H| of the cascade referred to the input rate, normalized to DC."""
    h_total = np.ones(len(freqs), dtype=complex)
    dc = 1.0
    fs = spec.f_in_hz
    for st in stages:
        _, hf = signal.freqz(st.coeffs, worN=freqs, fs=fs)
        h_total *= hf
        dc *= np.sum(st.coeffs)
        fs /= st.decim
    return np.abs(h_total) / abs(dc)


def measure_response(stages: list[FilterStage], spec: DecimatorSpec) -> FilterReport:
    """Sweep the cascade and report ripple, attenuation, size and delay.

    Attenuation is the worst case over every alias band; a chain with no
    decimation has no alias bands and honestly reports 0 dB.
    """
    f_protect = spec.protected_edge_hz
    wpass = np.linspace(0.0, f_protect, 2001)
    gpass = _composite_gain(stages, spec, wpass)
    ripple = 20.0 * (np.log10(gpass.max()) - np.log10(gpass.min()))

    atten = 0.0
    bands = _alias_bands(spec)
    if bands:
        worst = np.inf
        for lo, hi in bands:
            n_pts = max(int((hi - lo) / 0.1), 64) + 1
            w = np.linspace(lo, hi, n_pts)
            g = np.maximum(_composite_gain(stages, spec, w), 1e-12)
            worst = min(worst, float(np.min(-20.0 * np.log10(g))))
        atten = worst

    delay = 0.0
    remaining = float(spec.total_decim)
    for st in stages:
        delay += (st.n_taps - 1) / 2.0 / remaining
        remaining /= st.decim
    return FilterReport(
        passband_ripple_db=float(ripple),
        stopband_atten_db=float(atten),
        total_coeffs=sum(s.n_taps for s in stages),
        group_delay_samples_out=delay,
        stage_taps=tuple(s.n_taps for s in stages),
    )


# ---------------------------------------------------------------------------
# running


def warmup_input_samples(stages: list[FilterStage]) -> int:
    """Cascade group delay referred to the input rate, rounded up."""
    delay = 0.0
    rate_factor = 1  # input samples per sample at the current stage's input
    for st in stages:
        delay += (st.n_taps - 1) / 2.0 * rate_factor
        rate_factor *= st.decim
    return int(math.ceil(delay))


def cascade(x: np.ndarray, stages: list[FilterStage]) -> np.ndarray:
    """Filter-and-decimate through all stages (float in, float out).

    Polyphase evaluation with phase-0 alignment: output sample k of a stage
    equals the full convolution at input index k * decim, so the result
    matches naive lfilter-then-slice composition sample for sample.
    """
    y = np.asarray(x, dtype=float)
    for st in stages:
        n_out = -(-len(y) // st.decim)  # ceil
        y = signal.upfirdn(st.coeffs, y, up=1, down=st.decim)[:n_out]
    return y


def run_chain(
    codes: np.ndarray,
    stages: list[FilterStage],
    adc: AdcSpec = AdcSpec(),
    sensor: SensorSpec = SensorSpec(),
) -> np.ndarray:
    """Decimate raw ADC codes to a signed 16-bit series at the output rate.

    Midscale is subtracted first, so a rail-to-rail-centered input maps to
    zero and the output is signed acceleration: full scale +/-32768 counts
    corresponds to +/-sensor.full_scale_g.
    """
    codes = np.asarray(codes)
    need = warmup_input_samples(stages)
    if len(codes) < max(need, 1):
        raise ValueError(
            f"input of {len(codes)} samples is shorter than the chain warm-up ({need})"
        )
    x = codes.astype(float) - adc.midscale
    y = cascade(x, stages)
    lsb_to_g = adc.vref_v / adc.n_codes / sensor.sensitivity_v_per_g
    counts = np.rint(y * lsb_to_g * (32768.0 / sensor.full_scale_g))
    return np.clip(counts, -32768, 32767).astype(np.int16)


def measure_enob(
    stages: list[FilterStage],
    adc: AdcSpec = AdcSpec(),
    test_freq_hz: float = 10.0,
    sensor: SensorSpec = SensorSpec(),
    dither_density_ug_sqrthz: float = 2.0,
    duration_s: float = 40.0,
    seed: int = 1,
    quantize_output: bool = True,
) -> float:
    """Effective bits of the quantize-and-decimate chain, (SINAD - 1.76)/6.02.

    Drives a full-scale sine (amplitude = sensor full scale) through the
    sensor model, the quantizer and the chain, then takes SINAD from an FFT
    of the steady-state output.  Everything that is not the fundamental or
    DC counts as noise-plus-distortion, spurs included.

    The dither density models the broadband noise present at the quantizer
    input.  The default is a fraction of an LSB over the oversampled band:
    enough to decorrelate quantization error, small enough not to dominate
    the decimated noise floor.  Pass 0 for a bare quantizer measurement.

    quantize_output=False skips the 16-bit output rounding and measures the
    float cascade instead; useful to observe the oversampling law itself,
    which the fixed output word length otherwise starts to mask.
    """
    total_decim = math.prod(st.decim for st in stages)
    n = int(round(duration_s * adc.f_os_hz))
    t = np.arange(n) / adc.f_os_hz
    accel = sensor.full_scale_g * np.sin(2.0 * np.pi * test_freq_hz * t)
    dither_sensor = SensorSpec(
        noise_density_ug_sqrthz=dither_density_ug_sqrthz,
        sensitivity_v_per_g=sensor.sensitivity_v_per_g,
        full_scale_g=sensor.full_scale_g,
        supply_v=sensor.supply_v,
    )
    volts = apply_sensor(accel, dither_sensor, adc.f_os_hz, seed=seed)
    codes, _ = quantize(volts, adc)
    if quantize_output:
        out = run_chain(codes, stages, adc, sensor).astype(float)
    else:
        y = cascade(codes.astype(float) - adc.midscale, stages)
        lsb_to_g = adc.vref_v / adc.n_codes / sensor.sensitivity_v_per_g
        out = y * lsb_to_g * (32768.0 / sensor.full_scale_g)

    skip = int(math.ceil(warmup_input_samples(stages) / total_decim)) * 2 + 8
    x = out[skip:]
    if len(x) < 256:
        raise ValueError("record too short for a meaningful SINAD estimate")

    fs_out = adc.f_os_hz / total_decim
    period = fs_out / test_freq_hz
    if abs(period - round(period)) < 1e-9:
        # Coherent record: truncate to whole carrier periods so the tone and
        # all its distortion products land exactly on bins.  No window needed
        # and no leakage skirt to bias the noise estimate.
        p = int(round(period))
        x = x[: (len(x) // p) * p]
        window = np.ones(len(x))
        guard = 1
    else:
        window = np.hanning(len(x))
        guard = 8
    spec_mag2 = np.abs(np.fft.rfft(window * x)) ** 2
    f_bin = fs_out / len(x)
    k0 = int(round(test_freq_hz / f_bin))
    lo, hi = max(k0 - guard, 0), min(k0 + guard + 1, len(spec_mag2))
    p_fund = float(np.sum(spec_mag2[lo:hi]))
    p_dc = float(np.sum(spec_mag2[: guard + 1]))
    p_total = float(np.sum(spec_mag2))
    p_nd = max(p_total - p_fund - p_dc, 1e-300)
    sinad_db = 10.0 * np.log10(p_fund / p_nd)
    return (sinad_db - 1.76) / 6.02


# ---------------------------------------------------------------------------
# stage file format


def save_stages(path, stages: list[FilterStage]) -> None:
    """Write the chain as text: one block per stage, full-precision taps."""
    lines = [f"# decimation chain: {len(stages)} stages"]
    for i, st in enumerate(stages, start=1):
        lines.append(f"stage {i}")
        lines.append(f"decim {st.decim}")
        lines.append(f"taps {st.n_taps}")
        lines.extend(repr(float(c)) for c in st.coeffs)
        lines.append("")
    with open(path, "w") as f:
        f.write("\n".join(lines))


def load_stages(path) -> list[FilterStage]:
    with open(path) as f:
        tokens = [
            ln.strip()
            for ln in f
            if ln.strip() and not ln.lstrip().startswith("#")
        ]
    stages = []
    i = 0
    while i < len(tokens):
        if not tokens[i].startswith("stage"):
            raise ValueError(f"expected 'stage', got {tokens[i]!r}")
        decim = int(tokens[i + 1].split()[1])
        n_taps = int(tokens[i + 2].split()[1])
        coeffs = [float(tok) for tok in tokens[i + 3 : i + 3 + n_taps]]
        if len(coeffs) != n_taps:
            raise ValueError("stage file truncated")
        stages.append(FilterStage(np.array(coeffs), decim))
        i += 3 + n_taps
    if not stages:
        raise ValueError("no stages found")
    return stages
