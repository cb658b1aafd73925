"""Synthetic office-occupancy sensor data.

Generates a table with the column layout of the public room-occupancy
benchmark (date, Temperature, Humidity, Light, CO2, HumidityRatio,
Occupancy) for tests and demonstrations when the real files are not at hand.
The numbers are simulated, not measurements.
"""

from __future__ import annotations

import csv
from datetime import datetime, timedelta
from pathlib import Path

import numpy as np

HEADER = ("date", "Temperature", "Humidity", "Light", "CO2", "HumidityRatio", "Occupancy")


def simulate(n_days=6, step_minutes=1, seed=0, start=datetime(2015, 2, 2)):
    """Return a list of row tuples in :data:`HEADER` order.

    Weekdays are occupied roughly 08:30-18:00 with a lunch gap and random
    absences; weekends are mostly empty.  Light tracks occupancy and daylight,
    CO2 accumulates while people are present and decays otherwise, and the
    temperature follows a daily cycle nudged up by occupancy.
    """
    rng = np.random.default_rng(seed)
    rows = []
    co2 = 450.0
    temp = 20.0
    steps_per_day = 24 * 60 // step_minutes
    for d in range(n_days):
        day = start + timedelta(days=d)
        weekday = day.weekday() < 5
        arrive = 8.5 + rng.normal(0, 0.4)
        leave = 17.8 + rng.normal(0, 0.5)
        lunch = 12.5 + rng.normal(0, 0.3)
        # a weekday evening session now and then
        late = weekday and rng.random() < 0.3
        late_start, late_end = 19.5 + rng.random(), 21.0 + rng.random()
        present = False
        for s in range(steps_per_day):
            ts = day + timedelta(minutes=s * step_minutes)
            h = ts.hour + ts.minute / 60.0
            scheduled = weekday and arrive <= h < leave and not (lunch <= h < lunch + 0.75)
            if late and late_start <= h < late_end:
                scheduled = True
            if not weekday and 10.0 <= h < 13.0 and d % 7 == 5:
                scheduled = True
            # short absences and chance presence
            if scheduled:
                present = rng.random() > 0.03 if present else rng.random() < 0.5
            else:
                present = present and rng.random() < 0.05
            daylight = max(0.0, np.sin(np.pi * (h - 7.0) / 10.0)) if 7.0 <= h <= 17.0 else 0.0
            light = 70.0 * daylight * (0.5 + 0.5 * rng.random())
            if present:
                light += 430.0 + rng.normal(0, 40)
            elif rng.random() < 0.01:
                light += 400.0
            light = max(0.0, light + rng.normal(0, 3))
            co2 += (14.0 * rng.uniform(0.5, 1.5) if present else 0.0) - 0.02 * (co2 - 430.0)
            co2 = max(400.0, co2 + rng.normal(0, 4))
            target = 19.8 + 1.2 * daylight + (1.2 if present else 0.0)
            temp += 0.03 * (target - temp) + rng.normal(0, 0.02)
            humidity = 25.0 + 3.0 * np.sin(2 * np.pi * (d + h / 24.0) / 5.0) + rng.normal(0, 0.3)
            ratio = 0.0038 + 0.00005 * (humidity - 25.0)
            rows.append((ts.strftime("%Y-%m-%d %H:%M:%S"), round(temp, 4), round(humidity, 4),
                         round(light, 2), round(co2, 2), round(ratio, 7), int(present)))
    return rows


def write_csv(path, rows, row_ids=True):
    """Write rows like the public files: quoted header, optional leading row id."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, quoting=csv.QUOTE_NONNUMERIC)
        w.writerow(HEADER)
        for i, row in enumerate(rows, 1):
            w.writerow((str(i),) + tuple(row) if row_ids else row)
    return path
