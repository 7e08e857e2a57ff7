#!/usr/bin/env python3
"""Smoke test for the qlink Python extension.

Build the module first, then run the script from anywhere:

    cargo build -p qlink-py
    python3 python/smoke_test.py

The script stages the compiled cdylib under the import name `qlink`; no
packaging tooling is required.
"""

import json
import math
import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]


def load_module():
    candidates = [
        ROOT / "target" / profile / name
        for profile in ("debug", "release")
        for name in ("libqlink.so", "qlink.so", "libqlink.dylib")
    ]
    for candidate in candidates:
        if candidate.exists():
            staging = Path(tempfile.mkdtemp(prefix="qlink-py-"))
            shutil.copy2(candidate, staging / "qlink.so")
            sys.path.insert(0, str(staging))
            import qlink

            return qlink
    sys.exit("extension not built; run `cargo build -p qlink-py` first")


qlink = load_module()
checks = 0


def check(condition, label):
    global checks
    if not condition:
        sys.exit(f"FAIL: {label}")
    checks += 1


# Turbulence and collection. The reference value comes from a much finer
# quadrature of the same integral; the production panel count sits within
# a few 1e-8 of it.
r0 = qlink.fried_parameter_m(800.0, 500.0)
check(math.isclose(r0, 0.08773763141479304, rel_tol=1e-6), f"uplink fried parameter, got {r0}")

budget = qlink.link_attenuation(800.0, 500.0, receiver_radius_m=0.025)
check(budget["attenuation_db"] >= 50.0, f"small-aperture uplink attenuation, got {budget}")

widths = qlink.beam_widths_m(800.0, 2000.0)
identity = widths["w_lt_m"] ** 2 - widths["w_st_m"] ** 2 - 2.0 * widths["beta_sq_m2"]
check(abs(identity) <= 1e-12 * widths["w_lt_m"] ** 2, "width/wander identity")
check(0.0 < widths["wander_ratio"] < 0.10, f"wander ratio, got {widths['wander_ratio']}")

# Background light and per-gate SNR.
alpha = qlink.default_moon_factor()
check(1e-6 <= alpha <= 5e-6, f"moon factor, got {alpha}")
day = qlink.uplink_background_rate(0.075, 1e-5, period="day")
night = qlink.uplink_background_rate(0.075, 1e-5, period="night")
check(night == alpha * day, "night/day background ratio")

report = qlink.snr_report(signal_rate_hz=1e5, noise_rate_hz=0.0, dark_rate_hz=200.0)
check(math.isclose(report["snr"], 1e5 / 200.0), f"snr arithmetic, got {report}")

# Key rates.
decoy = qlink.decoy_rate(eta=1e-3)
weak = qlink.optimal_weak_pulse(eta=1e-3)
check(decoy["per_pulse"] > weak["per_pulse"] > 0.0, "decoy protocol must beat non-decoy")

budget = qlink.entanglement_snr(1e6, (0.5, 200.0, 200.0), (7.2e-6, 300.0, 200.0), gate_ns=1.0)
check(budget["feasible"] and budget["snr"] >= 6.0, f"local+uplink pair budget, got {budget}")

# Polarization compensation.
matched = qlink.probe_compensation_qber(500.0, probe_wavelength_nm=800.0, passes=20)
offset = qlink.probe_compensation_qber(500.0, probe_wavelength_nm=850.0, passes=20)
check(matched <= 1e-12, f"matched-wavelength probe qber, got {matched}")
check(0.0 < offset < 0.01, f"offset probe qber, got {offset}")

drift = qlink.stokes_drift_stats(500.0, passes=20)
check(0.005 <= drift["max_abs_per_s"] <= 0.03, f"stokes drift peak, got {drift['max_abs_per_s']}")

# Clock synchronization.
rate = qlink.required_sync_rate(40e-6, accuracy_ns=1.0)
check(rate["base_hz"] == 40000.0, f"sync rate, got {rate}")
check(rate["margin_low_hz"] == 50000.0 and rate["margin_high_hz"] == 100000.0, "margin band")

drift = qlink.pass_drift_stats(400.0)
check(20e-6 <= drift["max_abs"] <= 80e-6, f"pass drift, got {drift['max_abs']}")

# Figure pipeline against the shipped fixtures.
check(qlink.validate_scenario(ROOT / "scenarios" / "fig5_snr.json") == "fig5_snr", "validate")

table = qlink.run_figure("fig2", ROOT / "scenarios" / "default_uplink.json")
check(table["columns"] == ["L_km", "beta2_m2", "ratio"], f"fig2 columns, got {table['columns']}")
check(len(table["rows"]) == 16, f"fig2 row count, got {len(table['rows'])}")
check(all(float(row[2]) < 0.10 for row in table["rows"]), "fig2 ratios")
check(table["meta"]["scenario"] == "default_uplink", "fig2 meta")

with tempfile.TemporaryDirectory() as tmp:
    scenario = Path(tmp) / "probe.json"
    scenario.write_text(
        json.dumps(
            {
                "name": "probe_small",
                "geometry": {},
                "pass": {"ensemble_size": 10},
                "sweep": {"axes": [{"name": "probe_wavelength_nm", "values": [780, 820]}]},
            }
        )
    )
    first = qlink.run_figure("fig10", scenario, seed=11)
    second = qlink.run_figure("fig10", scenario, seed=11)
    check(first["rows"] == second["rows"], "seeded reruns must be identical")
    check(first["meta"]["seed"] == 11, "seed override lands in meta")

try:
    qlink.run_figure("fig8", ROOT / "scenarios" / "default_uplink.json")
    sys.exit("FAIL: fig8 must be rejected as a schematic")
except ValueError as err:
    check("schematic" in str(err), f"fig8 rejection message, got {err}")

print(f"smoke test passed: {checks} checks")
