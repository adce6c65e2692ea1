"""Reproduction targets: published values versus the model, one row per cell.

Each target recomputes one published table or figure from the packaged
constants and presets, emitting (published, computed, tolerance, PASS/FAIL)
rows.  Known model-measurement gaps keep their documented widened
tolerances and are flagged in the row name rather than silently absorbed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import presets
from .decimator import design_decimator, measure_response, run_chain
from .energy import (
    DAYS_PER_YEAR,
    LS336000,
    VL34570,
    battery_life_days,
    energy_acquisition_j,
    energy_day,
    energy_transmission_j,
    lifetime_curve,
    simulate_power_trace,
    validate_window,
)
from .modal import compute_spectrum, detect_peaks
from .radio import (
    DEFAULT_DISPERSION_SIGMA,
    CoverageClass,
    EnergyParams,
    epb_uj_per_bit,
    session_energy_j,
)
from .signals import AdcSpec, SensorSpec, apply_sensor, quantize, synth_structure_response


@dataclass(frozen=True)
class ReproRow:
    name: str
    published: float
    computed: float
    tolerance: str
    ok: bool


def _pct_row(name: str, published: float, computed: float, tol_pct: float) -> ReproRow:
    ok = abs(computed - published) <= abs(published) * tol_pct / 100.0
    return ReproRow(name, published, computed, f"{tol_pct}%", ok)


def _abs_row(name: str, published: float, computed: float, tol_abs: float) -> ReproRow:
    return ReproRow(name, published, computed, f"abs {tol_abs}",
                    abs(computed - published) <= tol_abs)


def _floor_row(name: str, floor: float, computed: float) -> ReproRow:
    return ReproRow(name, floor, computed, f">= {floor}", computed >= floor)


def repro_table1(outdir=None) -> list[ReproRow]:
    """Energy-per-bit column of the payload characterization."""
    return [
        _pct_row(f"epb_{nbytes}B_uj", epb_pub, epb_uj_per_bit(nbytes, e_j), 0.5)
        for nbytes, e_j, epb_pub in presets.PAYLOAD_EPB_ROWS
    ]


def repro_table2_check(outdir=None) -> list[ReproRow]:
    """Energy contribution constants and the session identities above them."""
    p = EnergyParams()
    rows = [
        _abs_row(name, pub, getattr(p, name), 1e-12)
        for name, pub in presets.ENERGY_CONTRIBUTIONS_MJ.items()
    ]
    plan = presets.TABLE3_PLAN
    e_tx = energy_transmission_j(plan)
    e_acq = energy_acquisition_j(plan)
    rows.append(_pct_row("e_tx_10pkt_j", presets.TABLE3_PUBLISHED["e_tx_j"], e_tx, 0.1))
    rows.append(_pct_row("e_acq_10pkt_j", presets.TABLE3_PUBLISHED["e_acq_j"], e_acq, 0.1))
    rows.append(_abs_row("e_tot_identity_j", e_tx + e_acq,
                         energy_day(plan).e_session_j, 0.0))
    return rows


def repro_table3(outdir=None) -> list[ReproRow]:
    """Long-term plan summary: all nine published cells."""
    pub = presets.TABLE3_PUBLISHED
    plan = presets.TABLE3_PLAN
    bd = energy_day(plan)
    life_y = battery_life_days(plan, VL34570) / DAYS_PER_YEAR
    return [
        _abs_row("n_sessions", pub["n_sessions"], bd.n_sessions, 0.0),
        _abs_row("t_acq_s", pub["t_acq_s"], bd.t_acq_s, 0.0),
        _abs_row("t_active_s", pub["t_active_s"], bd.t_active_s, 1e-9),
        _abs_row("t_sleep_s", pub["t_sleep_s"], bd.t_sleep_s, 1e-9),
        _pct_row("e_tx_j", pub["e_tx_j"], bd.e_tx_session_j, 0.1),
        _pct_row("e_acq_j", pub["e_acq_j"], bd.e_acq_session_j, 0.1),
        _pct_row("e_day_j", pub["e_day_j"], bd.e_day_j, 1.0),
        _abs_row("e_cell_j", pub["e_cell_j"], VL34570.usable_j, 1e-6),
        _pct_row("battery_life_y", pub["battery_life_y"], life_y, 2.0),
    ]


def repro_table5(outdir=None, seed: int = 0) -> list[ReproRow]:
    """Tone comparison: run the full sensing pipeline on the reference modes
    and compare each estimated frequency to the reference column."""
    sensor = SensorSpec()
    adc = AdcSpec()
    accel = synth_structure_response(presets.NO_DAMAGE, 180.0, seed=seed,
                                     excitation="dwell")
    volts = apply_sensor(accel, sensor, f_os_hz=adc.f_os_hz, seed=seed + 1)
    codes, _ = quantize(volts, adc)
    stages = design_decimator()
    samples = run_chain(codes, stages, adc, sensor)
    est = detect_peaks(compute_spectrum(samples))
    freqs = est.freqs()
    rows = []
    for (label, _mems_hz, ref_hz, _delta), got in zip(presets.TONE_COMPARISON, freqs):
        rows.append(_pct_row(f"mode_{label}_hz", ref_hz, got, 0.1))
    if len(freqs) != len(presets.TONE_COMPARISON):
        rows.append(_abs_row("n_modes", len(presets.TONE_COMPARISON), len(freqs), 0.0))
    return rows


def repro_fig5(outdir=None) -> list[ReproRow]:
    """Lifetime curves plus the two headline points read off them."""
    curve = lifetime_curve(presets.LIFETIME_TACQ_GRID_S,
                           presets.LIFETIME_SESSION_COUNTS, LS336000)
    if outdir is not None:
        path = Path(outdir) / "fig5_curve.csv"
        with open(path, "w", newline="", encoding="utf-8") as f:
            f.write("t_acq_s,n_sessions,lifetime_days\n")
            for t_acq, n_sess, days in curve:
                f.write(f"{t_acq!r},{n_sess},{days!r}\n")

    ten_y = battery_life_days(presets.TEN_YEAR_PLAN, LS336000) / DAYS_PER_YEAR
    drain_d = battery_life_days(presets.DRAIN_PLAN, LS336000)
    monotone = all(
        b[2] < a[2]
        for a, b in zip(curve, curve[1:])
        if a[1] == b[1]   # same session count, t_acq grows by 60 s
    )
    rows = [
        _floor_row("ten_year_plan_years", 10.0, ten_y),
        _pct_row("drain_plan_days_widened", presets.DRAIN_POINT_DAYS, drain_d,
                 presets.DRAIN_POINT_TOL * 100),
        _abs_row("curves_strictly_decreasing", 1.0, float(monotone), 0.0),
    ]
    return rows


def repro_fig3_classes(outdir=None, seed: int = 0, n_draws: int = 4000) -> list[ReproRow]:
    """Coverage-class energy ratios and the good-coverage dispersion."""
    p = EnergyParams()
    mult_bad = p.coverage_multiplier(CoverageClass.BAD)
    mult_med = p.coverage_multiplier(CoverageClass.MEDIUM)
    good_1300 = dict((b, e) for b, e, _ in presets.PAYLOAD_EPB_ROWS)[1300]

    rng = np.random.default_rng(seed)
    s = DEFAULT_DISPERSION_SIGMA
    draws = good_1300 * np.exp(s * rng.standard_normal(n_draws) - 0.5 * s * s)
    p95_over_mean = float(np.quantile(draws, 0.95) / np.mean(draws))
    frac_below_2j = float(np.mean(draws <= presets.GOOD_SINGLE_CAP_J))

    return [
        _abs_row("bad_over_good", 3.8, mult_bad, 1e-12),
        _abs_row("bad_over_medium", 2.8, mult_bad / mult_med, 1e-12),
        _pct_row("bad_mean_1300B_j", presets.BAD_MEAN_1300B_J, good_1300 * mult_bad, 5.0),
        ReproRow("good_mean_1300B_j", presets.GOOD_MEAN_CAP_J, good_1300,
                 f"<= {presets.GOOD_MEAN_CAP_J}", good_1300 <= presets.GOOD_MEAN_CAP_J),
        _pct_row("p95_over_mean_good", 2.0, p95_over_mean, 10.0),
        _pct_row("frac_good_below_2j", 0.95, frac_below_2j, 3.0),
    ]


def repro_validation_window(outdir=None) -> list[ReproRow]:
    """1000 s bench window: closed-form model against an integrated trace."""
    plan = presets.VALIDATION_PLAN
    t, p = simulate_power_trace(plan)
    v = validate_window(t, p, plan)
    gap_pct = (v.e_model_j - presets.WINDOW_MEASURED_J) / presets.WINDOW_MEASURED_J * 100
    return [
        _pct_row("model_window_j", presets.WINDOW_MODEL_J, v.e_model_j, 0.5),
        _pct_row("trace_integral_j", presets.WINDOW_MEASURED_J, v.e_measured_j, 1.5),
        _abs_row("model_vs_bench_pct", 0.9, gap_pct, 0.25),
    ]


TARGETS = {
    "table1": repro_table1,
    "table2_check": repro_table2_check,
    "table3": repro_table3,
    "table5": repro_table5,
    "fig5": repro_fig5,
    "fig3_classes": repro_fig3_classes,
    "validation_window": repro_validation_window,
}


def run_repro(target: str, outdir=None) -> tuple[list[ReproRow], bool]:
    """Run one target, optionally writing its CSV report; returns (rows, all ok)."""
    if target not in TARGETS:
        raise ValueError(f"unknown repro target {target!r}; one of {sorted(TARGETS)}")
    if outdir is not None:
        Path(outdir).mkdir(parents=True, exist_ok=True)
    rows = TARGETS[target](outdir=outdir)
    if outdir is not None:
        with open(Path(outdir) / f"{target}.csv", "w", newline="", encoding="utf-8") as f:
            f.write("name,published,computed,tolerance,status\n")
            for r in rows:
                f.write(f"{r.name},{r.published!r},{r.computed!r},{r.tolerance},"
                        f"{'PASS' if r.ok else 'FAIL'}\n")
    return rows, all(r.ok for r in rows)
