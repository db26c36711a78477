#!/usr/bin/env python3
"""Writes the reference storm wind record (two stations, hourly, 3 days).

The station-mean speed is calm until 4 Aug 18:00, rises to its single
maximum of exactly 29.0 m/s at 5 Aug 14:00 and decays to about 8 m/s by
6 Aug 12:00. The two stations differ by a symmetric offset, so the mean is
exactly the profile below.
"""
import math
import sys
from datetime import datetime, timedelta, timezone

START = datetime(2025, 8, 4, tzinfo=timezone.utc)
HOURS = 72
PEAK_HOUR = 38


def fused(h):
    if h <= 18:
        return 6.0 + 0.8 * math.sin(2 * math.pi * h / 11.0)
    if h <= PEAK_HOUR:
        u = (h - 18) / (PEAK_HOUR - 18)
        base = 6.0 + 0.8 * math.sin(2 * math.pi * 18 / 11.0)
        return base + (29.0 - base) * 0.5 * (1 - math.cos(math.pi * u))
    if h <= 60:
        u = (h - PEAK_HOUR) / (60 - PEAK_HOUR)
        return 29.0 - 21.0 * 0.5 * (1 - math.cos(math.pi * u))
    return 8.0 - 0.6 * math.sin(2 * math.pi * (h - 60) / 12.0)


def main(path):
    rows = []
    for h in range(HOURS + 1):
        f = round(fused(h), 1)
        d = 0.0 if h == PEAK_HOUR else round(1.5 * math.sin(2 * math.pi * h / 17.0), 1)
        t = (START + timedelta(hours=h)).strftime("%Y-%m-%dT%H:%M:%SZ")
        rows.append((t, "coastal", round(f - d, 1)))
        rows.append((t, "offshore", round(f + d, 1)))
    with open(path, "w") as out:
        out.write("timestamp,station_id,speed_mps\n")
        for t, s, v in rows:
            out.write(f"{t},{s},{v:.1f}\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "wind.csv")
