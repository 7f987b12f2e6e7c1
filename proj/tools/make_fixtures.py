#!/usr/bin/env python3
"""Regenerate the bundled CSV fixtures under tests/fixtures.

Output is deterministic (fixed seeds), so rerunning leaves the committed
files unchanged.
"""

import argparse
import math
import pathlib

import numpy as np

HOUR = 3600.0
DAY = 86400.0

# Fig. 11 line frequencies (Hz) and the near-monthly harmonic.
F1 = 1653.04e-9
F2 = 11575.48e-9
F_MONTH = 1.0 / (30.34074 * DAY)


def write_series(path, dt, columns):
    names = list(columns)
    n = len(columns[names[0]])
    with open(path, "w") as f:
        f.write("time," + ",".join(names) + "\n")
        for i in range(n):
            f.write(repr(i * dt) + "," + ",".join(repr(float(columns[c][i])) for c in names) + "\n")


def write_events(path, stamps, comment):
    with open(path, "w") as f:
        f.write(f"# {comment}\n")
        f.write("timestamp\n")
        for t in stamps:
            f.write(t + "\n")


def iso(seconds):
    days, rem = divmod(int(seconds), 86400)
    hh, rem = divmod(rem, 3600)
    mm, ss = divmod(rem, 60)
    d = np.datetime64("2020-01-01") + np.timedelta64(days, "D")
    return f"{d}T{hh:02d}:{mm:02d}:{ss:02d}Z"


def comb_24h(out):
    # 8 consecutive event hours every day: a 24 h comb whose fundamental
    # dominates its harmonics. 8192 hourly bins.
    stamps = []
    for hour in range(8192):
        if 8 <= hour % 24 < 16:
            stamps.append(iso(hour * HOUR + 1800))
    write_events(out / "comb24h_events.csv", stamps, "hourly bins, events 08:00-16:00 every day, 8192 h")


def fig11(out):
    rng = np.random.default_rng(11)
    n = 65536
    t = np.arange(n) * HOUR
    p = (0.08 + 0.03 * np.cos(2 * math.pi * F1 * t) + 0.05 * np.cos(2 * math.pi * F2 * t)
         + 0.02 * np.cos(2 * math.pi * F_MONTH * t))
    hit = rng.random(n) < p
    stamps = [repr(float(v)) for v in t[hit] + 1800.0]
    write_events(out / "fig11_events.csv", stamps,
                 "hourly Bernoulli events, lines at 1653.04 nHz, 11575.48 nHz and 30.34074 d, 65536 h")


def process_complex(out):
    # y = 0.8 b + 0.5 c + e with b, c independent AR(1) inputs.
    rng = np.random.default_rng(5)
    n = 4096

    def ar1(phi):
        x = np.zeros(n)
        e = rng.standard_normal(n)
        for i in range(1, n):
            x[i] = phi * x[i - 1] + e[i]
        return x

    b = ar1(0.6)
    c = ar1(-0.3)
    y = 0.8 * b + 0.5 * c + 0.7 * rng.standard_normal(n)
    write_series(out / "process_complex.csv", 1.0, {"y": y, "b": b, "c": c})


def classes(out):
    rng = np.random.default_rng(7)
    n = 512
    for label, phi, scale in (("a", 0.2, 1.0), ("b", 0.8, 1.6)):
        cols = {}
        for k in range(8):
            x = np.zeros(n)
            e = rng.standard_normal(n) * scale
            for i in range(1, n):
                x[i] = phi * x[i - 1] + e[i]
            cols[f"r{k}"] = x + 5.0
        write_series(out / f"class_{label}.csv", 1.0, cols)


def decay(out):
    rng = np.random.default_rng(3)
    n = 200
    t = np.arange(n) * 0.1
    y = 4.0 * np.exp(-0.3 * t) * np.exp(0.02 * rng.standard_normal(n))
    write_series(out / "decay.csv", 0.1, {"y": y})


def every_hour(out):
    # One event in every hourly bin: a constant telegraph wave.
    stamps = [repr(h * HOUR + 1800.0) for h in range(1024)]
    write_events(out / "every_hour_events.csv", stamps, "an event in every hour, 1024 h")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "tests" / "fixtures"))
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    comb_24h(out)
    fig11(out)
    process_complex(out)
    classes(out)
    decay(out)
    every_hour(out)


if __name__ == "__main__":
    main()
