import numpy as np
import pytest

from shmtwin.energy import (
    DAYS_PER_YEAR,
    LS336000,
    SECONDS_PER_DAY,
    VL34570,
    BatterySpec,
    HarvesterSpec,
    SessionPlan,
    battery_life_days,
    battery_life_days_sim,
    battery_life_years,
    energy_acquisition_j,
    energy_day,
    energy_neutral,
    energy_transmission_j,
    harvest_day_j,
    harvest_day_wh,
    session_active_s,
    simulate_power_trace,
    validate_window,
)
from shmtwin.presets import (
    DEFAULT_HARVESTER,
    TABLE3_PLAN,
    TEN_YEAR_PLAN,
    VALIDATION_PLAN,
)
from shmtwin.radio import CoverageClass, EnergyParams

SLEEP_W = 34e-6 * 3.3


def test_plan_derived_quantities():
    assert TABLE3_PLAN.samples_per_session == 6000
    assert TABLE3_PLAN.n_packets == 10
    assert TABLE3_PLAN.block_s == 6.5
    assert TEN_YEAR_PLAN.n_packets == 65          # 42000 samples / 650
    assert TEN_YEAR_PLAN.daily_data_bytes() == 84000
    with pytest.raises(ValueError):
        SessionPlan(n_sessions_per_day=-1)
    with pytest.raises(ValueError):
        SessionPlan(t_acq_s=0.0)


def test_battery_presets_and_validation():
    assert LS336000.capacity_j == 226440.0
    assert VL34570.capacity_j == 71928.0
    assert BatterySpec.from_ah("a", 17.0, 3.7).capacity_j == pytest.approx(226440.0, abs=1e-6)
    assert BatterySpec.from_ah("b", 5.4, 3.7).capacity_j == pytest.approx(71928.0, abs=1e-6)
    derated = BatterySpec("c", 1000.0, derating=0.8)
    assert derated.usable_j == 800.0
    with pytest.raises(ValueError):
        BatterySpec("d", -5.0)
    with pytest.raises(ValueError):
        BatterySpec("e", 100.0, derating=1.5)


def test_harvester_daily_energy():
    assert harvest_day_wh(DEFAULT_HARVESTER) == 3.24    # 72 * 15 * 4 * 0.75 / 1000
    assert harvest_day_j(DEFAULT_HARVESTER) == 3.24 * 3600.0
    with pytest.raises(ValueError):
        HarvesterSpec(area_cm2=-1.0)
    with pytest.raises(ValueError):
        HarvesterSpec(loss_frac=1.0)


def test_session_energies_match_hand_arithmetic():
    assert energy_acquisition_j(TABLE3_PLAN) == pytest.approx(3.440556, abs=1e-9)
    assert energy_acquisition_j(VALIDATION_PLAN) == pytest.approx(3.177576, abs=1e-9)
    assert energy_transmission_j(TABLE3_PLAN) == pytest.approx(5.33416, abs=1e-9)


def test_active_time_is_physical_not_billing():
    # 10 blocks of 6.5 s plus 6 s connect plus 20 s airtime
    assert session_active_s(TABLE3_PLAN) == pytest.approx(91.0)
    # the acquisition billing constant must not move wall-clock time
    assert session_active_s(VALIDATION_PLAN) == pytest.approx(91.0)
    # ECL 2 repetitions quadruple airtime only
    assert session_active_s(TABLE3_PLAN, CoverageClass.BAD) == pytest.approx(151.0)


def test_daily_breakdown_reference_plan():
    b = energy_day(TABLE3_PLAN)
    assert b.t_active_s == pytest.approx(546.0)
    assert b.t_sleep_s == pytest.approx(85854.0)
    assert b.e_session_j == b.e_acq_session_j + b.e_tx_session_j
    assert b.e_day_j == pytest.approx(62.2811, abs=1e-3)
    assert b.e_day_j == pytest.approx(
        6 * b.e_session_j + b.t_sleep_s * SLEEP_W, rel=1e-12)
    keys = [k for k, _ in b.rows()]
    assert keys[:3] == ["n_sessions", "t_acq_s", "n_packets"]


def test_sleep_only_floor():
    b = energy_day(SessionPlan(n_sessions_per_day=0))
    assert b.e_day_j == pytest.approx(SECONDS_PER_DAY * SLEEP_W, rel=1e-12)
    assert b.e_day_j == pytest.approx(9.69408, abs=1e-9)


def test_overcommitted_day_rejected():
    with pytest.raises(ValueError):
        energy_day(SessionPlan(n_sessions_per_day=6, t_acq_s=14400.0))


def test_reference_lifetime():
    assert battery_life_years(TABLE3_PLAN, VL34570) == pytest.approx(3.18, rel=0.02)
    assert battery_life_years(TEN_YEAR_PLAN, LS336000) >= 10.0


def test_lifetime_monotone_in_load():
    lives = [battery_life_days(SessionPlan(n_sessions_per_day=6, t_acq_s=t), VL34570)
             for t in (60.0, 120.0, 240.0, 480.0, 960.0)]
    assert all(a > b for a, b in zip(lives, lives[1:]))
    lives = [battery_life_days(SessionPlan(n_sessions_per_day=n, t_acq_s=600.0), VL34570)
             for n in (1, 2, 4, 6)]
    assert all(a > b for a, b in zip(lives, lives[1:]))


def test_sim_agrees_with_closed_form():
    plans = [SessionPlan(n_sessions_per_day=n, t_acq_s=t)
             for n in (1, 2, 3, 4, 5) for t in (30.0, 60.0, 300.0, 900.0)]
    assert len(plans) >= 20
    for plan in plans:
        closed = battery_life_days(plan, VL34570)
        sim = battery_life_days_sim(plan, VL34570)
        assert abs(sim - closed) / closed < 0.01, plan


def test_sim_bad_coverage_shortens_life():
    good = battery_life_days_sim(TABLE3_PLAN, VL34570)
    bad = battery_life_days_sim(TABLE3_PLAN, VL34570, CoverageClass.BAD)
    assert bad < 0.5 * good


def test_energy_neutrality():
    neutral, margin = energy_neutral(TABLE3_PLAN, DEFAULT_HARVESTER)
    assert neutral and margin == pytest.approx(187.3, rel=0.01)
    neutral, margin = energy_neutral(TABLE3_PLAN, HarvesterSpec(sun_hours=0.0))
    assert not neutral and margin == 0.0
    neutral, margin = energy_neutral(TABLE3_PLAN, HarvesterSpec(area_cm2=72.0 / 200))
    assert not neutral and margin < 1.0


def test_window_model_value():
    t, p = simulate_power_trace(VALIDATION_PLAN)
    v = validate_window(t, p, VALIDATION_PLAN)
    assert v.e_model_j == pytest.approx(8.6137258, abs=1e-6)
    assert abs(v.error_pct) < 0.05      # synthetic trace edges land on the grid


def test_window_all_sleep():
    t, p = simulate_power_trace(VALIDATION_PLAN, sessions_in_window=0)
    assert np.all(p == pytest.approx(SLEEP_W))
    v = validate_window(t, p, VALIDATION_PLAN, sessions_in_window=0)
    assert v.e_model_j == pytest.approx(1000.0 * SLEEP_W, rel=1e-9)
    assert abs(v.error_pct) < 0.01


def test_window_two_sessions():
    t, p = simulate_power_trace(VALIDATION_PLAN, sessions_in_window=2)
    v = validate_window(t, p, VALIDATION_PLAN, sessions_in_window=2)
    assert abs(v.error_pct) < 0.05
    single = validate_window(*simulate_power_trace(VALIDATION_PLAN),
                             plan=VALIDATION_PLAN).e_model_j
    assert v.e_model_j > 1.9 * single - 1000.0 * SLEEP_W


def test_window_rejects_malformed_traces():
    t, p = simulate_power_trace(VALIDATION_PLAN)
    with pytest.raises(ValueError):
        validate_window(t[::-1], p, VALIDATION_PLAN)            # non-increasing
    keep = np.concatenate([np.arange(0, 40000), np.arange(60000, t.size)])
    with pytest.raises(ValueError):
        validate_window(t[keep], p[keep], VALIDATION_PLAN)      # 200 s gap
    with pytest.raises(ValueError):
        validate_window(t[:-5], p, VALIDATION_PLAN)             # shape mismatch
    short_t = np.linspace(0.0, 50.0, 5001)
    short_p = np.full_like(short_t, SLEEP_W)
    with pytest.raises(ValueError):
        validate_window(short_t, short_p, VALIDATION_PLAN)      # 91 s active > 50 s


def test_years_days_consistency():
    assert battery_life_years(TABLE3_PLAN, VL34570) * DAYS_PER_YEAR == pytest.approx(
        battery_life_days(TABLE3_PLAN, VL34570))
