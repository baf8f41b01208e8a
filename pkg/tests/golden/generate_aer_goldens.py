#!/usr/bin/env python3
"""Standalone generator for the address-event encoding golden files.

Deliberately independent of the package: plain lists, the statistics module
for the sample standard deviation, and no numpy. Run from this directory to
(re)write channels.csv and the two golden event files; the test suite only
reads the committed outputs.

Per channel x of length n:
    d[t] = x[t+1] - x[t] for t < n-1, d[n-1] = d[n-2]
    upper = mean(d) + factor * stdev(d)
    lower = mean(d) - factor * stdev(d)     (symmetric mode)
    lower = upper                           (literal mode)
    event[t] = +1 if d[t] > upper, -1 if d[t] < lower, else 0
"""

import math
import random
from pathlib import Path
from statistics import mean, stdev

FACTOR = 0.5
LENGTH = 64
HERE = Path(__file__).parent


def fixed_channels():
    channels = []
    channels.append([3.25] * LENGTH)                              # constant
    channels.append([0.25 * t for t in range(LENGTH)])            # exact linear ramp
    channels.append([float(t % 2) for t in range(LENGTH)])        # alternating
    channels.append([math.sin(2 * math.pi * 3 * t / LENGTH) for t in range(LENGTH)])
    channels.append([
        math.sin(2 * math.pi * 5 * t / LENGTH) + 0.5 * math.cos(2 * math.pi * 11 * t / LENGTH)
        for t in range(LENGTH)
    ])
    channels.append([0.0 if t < LENGTH // 2 else 5.0 for t in range(LENGTH)])  # step

    walk_rng = random.Random(7)
    walk, value = [], 0.0
    for _ in range(LENGTH):
        value += walk_rng.uniform(-1.0, 1.0)
        walk.append(value)
    channels.append(walk)

    noise_rng = random.Random(11)
    channels.append([noise_rng.uniform(-2.0, 2.0) for _ in range(LENGTH)])

    pulses = [0.0] * LENGTH
    for position in (5, 19, 40, 57):
        pulses[position] = 9.0
    channels.append(pulses)

    channels.append([
        math.exp(-t / 20.0) * math.sin(2 * math.pi * 6 * t / LENGTH) for t in range(LENGTH)
    ])
    return channels


def encode_channel(x, factor, literal):
    d = [x[t + 1] - x[t] for t in range(len(x) - 1)]
    d.append(d[-1])
    m = mean(d)
    s = stdev(d)  # sample standard deviation, n - 1 denominator
    upper = m + factor * s
    lower = upper if literal else m - factor * s
    events = []
    for value in d:
        if value > upper:
            events.append(1)
        elif value < lower:
            events.append(-1)
        else:
            events.append(0)
    return events


def write_csv(path, rows, fmt):
    with open(path, "w") as handle:
        for row in rows:
            handle.write(",".join(fmt(v) for v in row) + "\n")


def main():
    channels = fixed_channels()
    write_csv(HERE / "channels.csv", channels, lambda v: repr(float(v)))
    for literal, name in ((False, "golden_symmetric.csv"), (True, "golden_literal.csv")):
        encoded = [encode_channel(x, FACTOR, literal) for x in channels]
        write_csv(HERE / name, encoded, str)
    print(f"wrote {len(channels)} channels of length {LENGTH} to {HERE}")


if __name__ == "__main__":
    main()
