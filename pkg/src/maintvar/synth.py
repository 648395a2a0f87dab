"""Synthetic 13-column plant logs with planted maintenance effects.

Four indicators (grid failure, inverter failure, module cleaning, cloudy) are
thresholded from persistent latent AR processes and shift the day's total
generation. Eight further labels appear at random with no effect. Issue text
is rendered from phrase templates with inconsistent case and punctuation so
that extraction has real work to do.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass

import numpy as np

from maintvar.evaluate import SyntheticSpec, simulate_var_array
from maintvar.ingest import DailyRecord, PlantDataset
from maintvar.rng import stream

PLANTED = ("Grid Failure", "Inverter Failure", "Module Cleaning", "Cloudy")
NOISE_LABELS = (
    "Rainy Day",
    "No Module Cleaning",
    "Transformer Replacement and Maintenance",
    "Cable and Fuse Maintenance",
    "Plant Shutdown",
    "Internet",
    "Battery",
    "Module Cleaning by Rain",
)

# effect on total kWh of each planted indicator
EFFECTS = {"Grid Failure": -220.0, "Inverter Failure": -160.0, "Module Cleaning": 90.0, "Cloudy": -280.0}
# latent threshold (in latent standard deviations) controls event frequency
CUTS = {"Grid Failure": 1.3, "Inverter Failure": 1.4, "Module Cleaning": 1.1, "Cloudy": 1.0}
NOISE_RATE = 0.04
CAPACITY_KW = (250.0, 250.0, 250.0, 250.0, 15.0)

TEMPLATES = {
    "Grid Failure": ("Grid failure from 10:00 to 11:30", "GRID FAIL in afternoon", "grid tripped twice", "Power cut ,grid down"),
    "Inverter Failure": ("Inverter fault (no. 2)", "inverter tripped at noon", "INVERTER NOT WORKING", "inverter failure (block B)"),
    "Module Cleaning": ("Module cleaning done", "modules cleaned; array 3", "MODULE WASHING in progress", "panel cleaning"),
    "Cloudy": ("cloudy day", "Overcast sky", "CLOUDY", "clouds after 2pm"),
    "Rainy Day": ("light rain", "Heavy RAIN in evening", "drizzle"),
    "No Module Cleaning": ("No module cleaning", "cleaning not done (water shortage)"),
    "Transformer Replacement and Maintenance": ("Transformer oil check", "transformer maintenance"),
    "Cable and Fuse Maintenance": ("fuse replaced in SCB-4", "Cable fault repaired"),
    "Plant Shutdown": ("plant shutdown for inspection", "Plant shut down 2 hrs"),
    "Internet": ("Internet down", "data logger offline"),
    "Battery": ("UPS battery replaced", "battery check"),
    "Module Cleaning by Rain": ("modules cleaned by rain", "natural cleaning"),
}


@dataclass(frozen=True)
class PlantTruth:
    """Ground truth behind a synthetic log: the label set planted per day."""

    labels: tuple[frozenset[str], ...]


def _latent_spec(n_days: int, seed: int) -> SyntheticSpec:
    # latent order: generation deviation, grid, inverter, cleaning, cloudy
    b1 = np.array([
        [0.55, -0.10, -0.08, 0.05, -0.12],
        [0.00, 0.60, 0.05, 0.00, 0.00],
        [0.00, 0.05, 0.65, 0.00, 0.00],
        [0.00, 0.00, 0.00, 0.45, -0.10],
        [0.00, 0.00, 0.00, 0.00, 0.55],
    ])
    b2 = np.diag([0.15, 0.10, 0.05, 0.10, 0.15])
    beta = np.stack([b1, b2])
    return SyntheticSpec(np.zeros(5), beta, np.eye(5), n_days, seed)


def synthetic_plant(
    n_days: int = 1200,
    seed: int = 0,
    start: dt.date = dt.date(2012, 1, 1),
    base_kwh: float = 4200.0,
    noise_kwh: float = 60.0,
    missing_rate: float = 0.0,
) -> tuple[PlantDataset, PlantTruth]:
    latent = simulate_var_array(_latent_spec(n_days, seed))
    sd = latent.std(axis=0)
    bits = {lab: latent[:, i + 1] > CUTS[lab] * sd[i + 1] for i, lab in enumerate(PLANTED)}
    g = stream(seed, "synthetic_plant")
    noise_bits = {lab: g.random(n_days) < NOISE_RATE for lab in NOISE_LABELS}

    total = base_kwh + noise_kwh * latent[:, 0] / sd[0]
    for lab in PLANTED:
        total = total + EFFECTS[lab] * bits[lab]
    total = np.maximum(total, 0.0)

    records, truth = [], []
    meter = 1.0e6
    share = np.array(CAPACITY_KW) / sum(CAPACITY_KW)
    for d in range(n_days):
        day_labels = [lab for lab in PLANTED if bits[lab][d]] + [lab for lab in NOISE_LABELS if noise_bits[lab][d]]
        pieces = [TEMPLATES[lab][int(g.integers(len(TEMPLATES[lab])))] for lab in day_labels]
        order = g.permutation(len(pieces)) if pieces else []
        text = ". ".join(pieces[i] for i in order)
        tot = float(round(total[d], 3))
        arrays = [float(round(tot * s, 3)) for s in share]
        meter += tot
        insolation = float(round(5.6 - 1.8 * bits["Cloudy"][d] + 0.2 * g.standard_normal(), 3))
        pr = float(round(100.0 * tot / (sum(CAPACITY_KW) * max(insolation, 0.5)), 3))
        values = [tot, float(round(meter, 3)), float(round(tot - sum(arrays), 3)), float(round(0.98 * tot, 3)), insolation, pr]
        if missing_rate and d > 0:
            values = [None if g.random() < missing_rate else v for v in values]
            arrays = [None if g.random() < missing_rate else v for v in arrays]
        records.append(DailyRecord(start + dt.timedelta(days=d), tuple(arrays), *values, text))
        truth.append(frozenset(day_labels))
    ds = PlantDataset(tuple(records), "synthetic", n_days, ())
    return ds, PlantTruth(tuple(truth))
