"""Synthetic 40-model fleet fixture and reference statistics.

The reference values are computed with numpy, scipy and statsmodels so that
the Rust implementation is checked against an independent code base.
Run from this directory: python3 generate_fixture.py
"""

import csv
import json

import numpy as np
from scipy import stats
import statsmodels.api as sm
from statsmodels.stats.diagnostic import het_breuschpagan

rng = np.random.default_rng(20240611)

COLUMNS = [
    "model_id", "entry_year", "range_km", "consumption_kwh_per100", "battery_kwh",
    "mass_kg", "accel_0_100_s", "cost_eur", "drivetrain", "motor_power_kw",
    "motor_torque_nm", "dc_charge_kw", "ac_charge_kw", "sys_voltage_v", "length_m",
    "width_m", "height_m", "seats", "payload_kg", "boot_l", "tow_kg",
    "warranty_km", "one_stop_km", "inverter_tech",
]
NUMERIC = [c for c in COLUMNS if c not in ("model_id", "drivetrain", "inverter_tech")]

YEARS = ([2011, 2012, 2013, 2013, 2014, 2014, 2016, 2017, 2017, 2018, 2018, 2019, 2019, 2019]
         + [2020, 2020, 2021, 2021, 2021, 2022, 2022, 2022, 2023, 2023, 2023]
         + [2024] * 8 + [2025] * 7)
assert len(YEARS) == 40


def model(i, year):
    era = (year - 2010) / 15.0
    battery = float(np.clip(rng.normal(25 + 70 * era, 12), 16, 120))
    consumption = float(np.clip(rng.normal(19 - 3 * era, 1.8), 12.5, 26))
    range_km = battery / consumption * 100 * rng.uniform(0.86, 0.95)
    power = float(np.clip(rng.normal(60 + 260 * era, 70), 45, 620))
    mass = 1150 + 6.5 * battery + 0.6 * power + rng.normal(0, 90)
    tech = rng.choice(["Si", "SiC", "mixed", "unknown"], p=[0.5 - 0.35 * era, 0.2 + 0.45 * era, 0.15, 0.15 - 0.1 * era])
    volt = 800.0 if (tech == "SiC" and rng.random() < 0.6) else 400.0
    row = {
        "model_id": f"M{i + 1:03d}",
        "entry_year": year,
        "range_km": round(range_km, 1),
        "consumption_kwh_per100": round(consumption, 1),
        "battery_kwh": round(battery, 1),
        "mass_kg": round(mass),
        "accel_0_100_s": round(float(np.clip(2.0 + 3400 / (power + 40) * rng.uniform(0.8, 1.2) / 2.4, 2.5, 15)), 1),
        "cost_eur": round(18000 + 380 * battery + 90 * power + rng.normal(0, 6000), -2),
        "drivetrain": rng.choice(["FWD", "RWD", "AWD"], p=[0.45 - 0.2 * era, 0.3, 0.25 + 0.2 * era]),
        "motor_power_kw": round(power),
        "motor_torque_nm": round(power * rng.uniform(1.6, 2.4)),
        "dc_charge_kw": round(float(np.clip(30 + 1.6 * battery + (120 if volt == 800 else 0) + rng.normal(0, 20), 22, 350))),
        "ac_charge_kw": float(rng.choice([3.7, 7.4, 11.0, 22.0], p=[0.1, 0.3, 0.5, 0.1])),
        "sys_voltage_v": volt,
        "length_m": round(3.6 + 0.012 * battery + rng.normal(0, 0.15), 2),
        "width_m": round(1.70 + 0.002 * battery + rng.normal(0, 0.04), 2),
        "height_m": round(rng.normal(1.55, 0.08), 2),
        "seats": int(rng.choice([4, 5, 7], p=[0.2, 0.7, 0.1])),
        "payload_kg": round(rng.normal(430, 60)),
        "boot_l": round(rng.normal(380 + 1.5 * battery, 70)),
        "tow_kg": round(float(np.clip(rng.normal(900 + 12 * battery, 300), 300, 2500)), -1),
        "warranty_km": float(rng.choice([100000, 160000, 200000])),
        "one_stop_km": round(range_km * rng.uniform(1.05, 1.5)),
        "inverter_tech": tech,
    }
    return row


rows = [model(i, y) for i, y in enumerate(YEARS)]

# sparse optional attributes, as in real fleet data
for col, share in [("tow_kg", 0.3), ("payload_kg", 0.15), ("boot_l", 0.1), ("one_stop_km", 0.2),
                   ("motor_torque_nm", 0.1), ("height_m", 0.05), ("drivetrain", 0.05),
                   ("accel_0_100_s", 0.05), ("cost_eur", 0.05)]:
    for r in rows:
        if rng.random() < share:
            r[col] = None
# one implausibly expensive model, so that the outlier pass has work to do
rows[35]["cost_eur"] = 395000.0

with open("fixture.csv", "w", newline="") as f:
    w = csv.writer(f, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow(["" if r[c] is None else r[c] for c in COLUMNS])

# reference statistics, recomputed from the written file
data = {c: [] for c in COLUMNS}
with open("fixture.csv") as f:
    for rec in csv.DictReader(f):
        for c in COLUMNS:
            v = rec[c]
            if c in NUMERIC:
                data[c].append(float(v) if v != "" else np.nan)
            else:
                data[c].append(v)
cols = {c: np.array(data[c]) for c in NUMERIC}
years = cols["entry_year"]

golden = {"cohorts": [], "quartiles": [], "shapiro": [], "breusch_pagan": [], "pearson": [], "filter": {}}

for start, end in [(2010, 2014), (2015, 2019), (2020, 2025)]:
    cells = {}
    for c in NUMERIC:
        v = cols[c][(years >= start) & (years <= end)]
        v = v[~np.isnan(v)]
        if len(v) == 0:
            continue
        cells[c] = {"mean": float(np.mean(v)), "std": float(np.std(v, ddof=1)) if len(v) > 1 else 0.0, "count": int(len(v))}
    golden["cohorts"].append({"window": [start, end], "cells": cells})

for c, year in [("motor_power_kw", 2024), ("range_km", 2024), ("battery_kwh", 2025), ("dc_charge_kw", 2025), ("mass_kg", 2024)]:
    v = cols[c][years == year]
    v = np.sort(v[~np.isnan(v)])
    assert len(v) >= 4, (c, year)
    q1, med, q3 = np.percentile(v, [25, 50, 75], method="linear")
    whisker = float(v[v <= q3 + 1.5 * (q3 - q1)].max())
    golden["quartiles"].append({"variable": c, "year": year, "q1": q1, "median": med, "q3": q3, "whisker_max": whisker})

for c in NUMERIC:
    v = cols[c][~np.isnan(cols[c])]
    if len(v) >= 3 and np.ptp(v) > 0:
        r = stats.shapiro(v)
        golden["shapiro"].append({"variable": c, "w": float(r.statistic), "p": float(r.pvalue)})


def complete(a, b):
    m = ~np.isnan(a) & ~np.isnan(b)
    return a[m], b[m]


def bp(x, y):
    X = sm.add_constant(x)
    e = sm.OLS(y, X).fit().resid
    lm, p, _, _ = het_breuschpagan(e, X, robust=True)
    return float(lm), float(p)


for a, b in [("battery_kwh", "range_km"), ("motor_power_kw", "mass_kg"), ("cost_eur", "battery_kwh"), ("consumption_kwh_per100", "accel_0_100_s")]:
    x, y = complete(cols[a], cols[b])
    lm, p = bp(x, y)
    golden["breusch_pagan"].append({"x": a, "y": b, "n": int(len(x)), "lm": lm, "p": p})

for a in NUMERIC:
    for b in NUMERIC:
        if a < b:
            x, y = complete(cols[a], cols[b])
            if len(x) >= 3 and np.ptp(x) > 0 and np.ptp(y) > 0:
                golden["pearson"].append({"x": a, "y": b, "n": int(len(x)), "r": float(np.corrcoef(x, y)[0, 1])})

FILTER_VARS = ["range_km", "consumption_kwh_per100", "battery_kwh", "mass_kg", "accel_0_100_s",
               "cost_eur", "motor_power_kw", "dc_charge_kw", "length_m"]
ALPHA, ZCUT = 0.05, 3.0
cleaned = {}
outliers = {}
for c in FILTER_VARS:
    v = cols[c].copy()
    present = v[~np.isnan(v)]
    z = (v - present.mean()) / present.std(ddof=1)
    out = ~np.isnan(v) & (np.abs(z) > ZCUT)
    outliers[c] = int(out.sum())
    v[out] = np.nan
    cleaned[c] = v


def sw_p(v):
    return float(stats.shapiro(v).pvalue) if len(v) >= 3 else None


pairs = []
for i, a in enumerate(FILTER_VARS):
    for b in FILTER_VARS[i + 1:]:
        x, y = complete(cleaned[a], cleaned[b])
        px, py = sw_p(x), sw_p(y)
        pb = min(bp(x, y)[1], bp(y, x)[1])
        if px <= ALPHA or py <= ALPHA:
            gate = "non_normal"
        elif pb <= ALPHA:
            gate = "heteroscedastic"
        else:
            gate = None
        pairs.append({"x": a, "y": b, "n_used": int(len(x)), "shapiro_p_x": px, "shapiro_p_y": py,
                      "bp_p": pb, "r": float(np.corrcoef(x, y)[0, 1]), "gate": gate})
golden["filter"] = {
    "variables": FILTER_VARS,
    "alpha": ALPHA,
    "z_cut": ZCUT,
    "outliers_removed": outliers,
    "column_shapiro_p": {c: sw_p(cleaned[c][~np.isnan(cleaned[c])]) for c in FILTER_VARS},
    "pairs": pairs,
}


def plain(o):
    if isinstance(o, dict):
        return {k: plain(v) for k, v in o.items()}
    if isinstance(o, list):
        return [plain(v) for v in o]
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    return o


with open("golden.json", "w") as f:
    json.dump(plain(golden), f, indent=1, sort_keys=True)
    f.write("\n")
