"""Built-in reference data: structure presets, published measurement values,
and the deployment plans used by the reproduction targets.

The published values live here, in one place, so reproduction reports can
print reference-versus-computed tables without scattering magic numbers.
"""

from __future__ import annotations

from .energy import LS336000, VL34570, BatterySpec, HarvesterSpec, SessionPlan
from .signals import ModeSpec, StructureModel

# ---------------------------------------------------------------------------
# structures
#
# Ground-truth modes of the lab test structure.  Damage cases shift the
# first mode down; higher modes are left in place, which is the dominant
# signature observed on the physical frame.

NO_DAMAGE = StructureModel(
    modes=(ModeSpec(2.807), ModeSpec(8.379), ModeSpec(13.125), ModeSpec(16.052)),
    label="NO_DAMAGE",
)
DAMAGE_1 = StructureModel(
    modes=(ModeSpec(2.718), ModeSpec(8.379), ModeSpec(13.125), ModeSpec(16.052)),
    label="DAMAGE_1",
)
DAMAGE_2 = StructureModel(
    modes=(ModeSpec(2.284), ModeSpec(8.379), ModeSpec(13.125), ModeSpec(16.052)),
    label="DAMAGE_2",
)

STRUCTURES = {s.label: s for s in (NO_DAMAGE, DAMAGE_1, DAMAGE_2)}

BATTERIES: dict[str, BatterySpec] = {b.name: b for b in (LS336000, VL34570)}

# ---------------------------------------------------------------------------
# published reference values

# Tone comparison: (mode name, MEMS pipeline Hz, reference accelerometer Hz,
# published delta %).  The reference column doubles as synthesis ground truth.
TONE_COMPARISON = (
    ("I", 2.805, 2.807, -0.07),
    ("II", 8.383, 8.379, +0.05),
    ("III", 13.133, 13.125, +0.06),
    ("IV", 16.066, 16.052, +0.08),
)

# First-mode shifts of the damage cases, Hz.
DAMAGE_SHIFTS_HZ = {"DAMAGE_1": -0.089, "DAMAGE_2": -0.523}

# Payload characterization: (payload bytes, mean session energy J,
# published energy-per-bit uJ).
PAYLOAD_EPB_ROWS = (
    (10, 0.7130, 8912.0),
    (200, 0.8123, 507.7),
    (500, 0.9405, 235.1),
    (1300, 1.0326, 99.29),
    (5400, 2.1199, 49.07),
    (10800, 3.6702, 42.48),
)

# Energy contribution constants, mJ, as published.
ENERGY_CONTRIBUTIONS_MJ = {
    "e_acq_1s_mj": 52.596,
    "e_sd_write_mj": 2.1816,
    "e_connect_first_tx_mj": 659.72,
    "e_packet_tx_mj": 450.83,
    "e_session_tail_mj": 616.97,
}

# Coverage characterization (1300 B single-packet sessions).
BAD_MEAN_1300B_J = 4.071       # mean in bad coverage, ECL 2
GOOD_MEAN_CAP_J = 1.1          # good-coverage mean stays below this
GOOD_SINGLE_CAP_J = 2.0        # good-coverage draws stay below this (one outlier)

# Long-term plan summary cells as published (6 x 60 s on the Li-ion cell).
TABLE3_PUBLISHED = {
    "n_sessions": 6,
    "t_acq_s": 60.0,
    "t_active_s": 546.0,
    "t_sleep_s": 85854.0,
    "e_tx_j": 5.334,
    "e_acq_j": 3.441,
    "e_day_j": 61.998,
    "e_cell_j": 71928.0,
    "battery_life_y": 3.18,
}

# 1000 s bench window with one session.
WINDOW_MEASURED_J = 8.535
WINDOW_MODEL_J = 8.613

# Lifetime claims on the primary cell.
TEN_YEAR_DAILY_BYTES = 84000
DRAIN_POINT_DAYS = 214.0       # 6 x 20 min plan; model lands ~18% high
DRAIN_POINT_TOL = 0.20

CLAIMED_ENOB_BITS = 16.0         # resolution claim for the oversampled chain

# ---------------------------------------------------------------------------
# deployment plans

TABLE3_PLAN = SessionPlan(n_sessions_per_day=6, t_acq_s=60.0, k_acq=6.5)
# Same schedule billed at the bench-calibrated acquisition factor; used by
# the 1000 s window validation.
VALIDATION_PLAN = SessionPlan(n_sessions_per_day=6, t_acq_s=60.0, k_acq=6.0)
TEN_YEAR_PLAN = SessionPlan(n_sessions_per_day=1, t_acq_s=420.0, k_acq=6.0)
DRAIN_PLAN = SessionPlan(n_sessions_per_day=6, t_acq_s=1200.0, k_acq=6.5)

# Lifetime curve grid: 4 to 20 minutes, four session counts.
LIFETIME_TACQ_GRID_S = tuple(float(t) for t in range(240, 1201, 60))
LIFETIME_SESSION_COUNTS = (1, 2, 4, 6)

DEFAULT_HARVESTER = HarvesterSpec()
