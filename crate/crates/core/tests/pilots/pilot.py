"""Pilot runs that pin Monte Carlo thresholds for the Rust tests.

Uses numpy's PCG64, independent of the Xoshiro streams in the crate, and the
same Euler scheme. For each statistic it prints the pilot fraction p and the
one-sided 99% threshold for a fresh N-path run,

    p + 2.326 * sqrt(p (1 - p) (1/N + 1/N_pilot)),

which also absorbs the pilot's own sampling error.

    python3 pilot.py lil        # BM, window [10, 1e4], dt 0.1, eps 0.5
    python3 pilot.py envelope   # 3-d radial BM vs sqrt(Ct log Ct), C = 4
"""

import sys

import numpy as np

Z99 = 2.326


def lil(n_paths, seed, dt=0.1, t0=10.0, horizon=1e4, eps=(0.0, 0.25, 0.5, 1.0)):
    rng = np.random.Generator(np.random.PCG64(seed))
    steps = int(round(horizon / dt))
    x = np.zeros(n_paths)
    stat = np.zeros(n_paths)
    sdt = np.sqrt(dt)
    for k in range(1, steps + 1):
        x += sdt * rng.standard_normal(n_paths)
        t = k * dt
        if t >= t0 - 1e-9:
            np.maximum(stat, np.abs(x) / np.sqrt(2 * t * np.log(np.log(t))), out=stat)
    return {e: float(np.mean(stat > 1 + e)) for e in eps}


def envelope(n_paths, seed, dt=1e-2, t0=10.0, horizon=1e3, c=4.0, x0=1.0, floor=1e-6):
    rng = np.random.Generator(np.random.PCG64(seed))
    steps = int(round(horizon / dt))
    x = np.full(n_paths, x0)
    hit = np.zeros(n_paths, dtype=bool)
    sdt = np.sqrt(2 * dt)
    for k in range(1, steps + 1):
        x = np.maximum(floor, x + 2.0 / x * dt + sdt * rng.standard_normal(n_paths))
        t = k * dt
        if t >= t0 - 1e-9:
            ct = c * t
            hit |= x > np.sqrt(ct * np.log(ct))
    return float(np.mean(hit))


def threshold(p, n, n_pilot):
    return p + Z99 * np.sqrt(p * (1 - p) * (1 / n + 1 / n_pilot))


def main():
    which = sys.argv[1] if len(sys.argv) > 1 else "lil"
    n_pilot, n = 20_000, 10_000
    if which == "lil":
        fr = lil(n_pilot, seed=20240611)
        for e, p in fr.items():
            print(f"eps={e} p={p:.5f} threshold={threshold(p, n, n_pilot):.5f}")
    else:
        p = envelope(n_pilot, seed=20240612)
        print(f"C=4 p={p:.5f} threshold={threshold(p, n, n_pilot):.5f}")


if __name__ == "__main__":
    main()
