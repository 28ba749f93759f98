#!/usr/bin/env python3
"""Regenerate the frozen reference table for the closed-form constants
calculators (crates/cli/data/constants_reference.csv).

Every output value is evaluated with mpmath at 50 significant digits and
printed to 17, so the table is an independent extended-precision oracle for
the f64 implementations. Inputs are ordinary doubles written with repr(), so
both sides parse bit-identical operands. The sampling is seeded; rerunning
the script reproduces the table byte for byte.
"""

import csv
import os
import random

from mpmath import gamma, mp, mpf, pi, sqrt

mp.dps = 50

SEED = 20260816
ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
OUT = os.path.join(ROOT, "crates", "cli", "data", "constants_reference.csv")


def unit_ball_volume(n):
    # Closed form pi^(n/2) / Gamma(n/2 + 1); the implementation under test
    # uses the integer recurrence instead.
    n = mpf(n)
    return pi ** (n / 2) / gamma(n / 2 + 1)


def imposc(c1, q, n, mu, l, f_sup):
    c1, q, mu, l, f_sup = map(mpf, (c1, q, mu, l, f_sup))
    vol = unit_ball_volume(n)
    nn = mpf(n)
    theta = mpf("0.5") * c1 * vol ** (1 / q) * mu ** (1 / q) * l
    cap = 1 / (4 * sqrt(nn))
    scale = sqrt(
        c1 * vol ** (1 / q - 1 / nn) * mu ** (1 / q) * l / (2 * 4 * sqrt(nn) * (f_sup + 1))
    )
    return min(cap, scale), theta


def lipschitz(beta, c1, c2, osc):
    beta, c1, c2, osc = map(mpf, (beta, c1, c2, osc))
    g = beta / 2 + 1
    kappa0 = 1 / (g * mpf(2) ** (g + 1))
    c3 = beta / mpf(2) ** (beta / 2 + 3)
    r = mpf("0.5") * (6 * c2 / (c1 * c3)) ** (1 / (beta / 2 - 1))
    m = 8 * osc / (r * r)
    l_lower = max(2 * c2 * sqrt(m) / (c1 * c3), m + 1)
    return g, kappa0, c3, r, m, l_lower


def alpha_from(g, tau):
    g, tau = mpf(g), mpf(tau)
    return mp.log(g) / mp.log(tau)


def fmt(x):
    return mp.nstr(x, 17)


def log_uniform(rng, lo_exp, hi_exp):
    return 10.0 ** rng.uniform(lo_exp, hi_exp)


def main():
    rng = random.Random(SEED)
    rows = []

    # hand-picked instances covering the caps and the zero branches
    imposc_inputs = [
        (1.0, 1.0, 2, 0.1, 0.5, 0.0),
        (2.0 / 3.141592653589793, 1.0, 2, 1.0, 0.999, 0.0),
        (1.0, 2.0, 3, 1.0, 0.9, 0.0),
        (0.5, 1.0, 1, 0.5, 0.5, 10.0),
    ]
    while len(imposc_inputs) < 34:
        imposc_inputs.append(
            (
                log_uniform(rng, -2, 2),
                log_uniform(rng, -0.7, 0.7),
                rng.randint(1, 6),
                rng.uniform(0.01, 1.0),
                rng.uniform(0.05, 0.95),
                0.0 if rng.random() < 0.25 else log_uniform(rng, -2, 2),
            )
        )
    for c1, q, n, mu, l, f_sup in imposc_inputs:
        tau, theta = imposc(c1, q, n, mu, l, f_sup)
        rows.append(
            ["imposc", repr(c1), repr(q), str(n), repr(mu), repr(l), repr(f_sup), fmt(tau), fmt(theta), "", "", "", ""]
        )

    lips_inputs = [
        (0.5, 1.0, 1.0, 0.0),
        (0.5, 1.0, 1.0, 2.0),
        (0.9, 0.1, 10.0, 1.0),
    ]
    while len(lips_inputs) < 33:
        lips_inputs.append(
            (
                rng.uniform(0.05, 0.95),
                log_uniform(rng, -2, 2),
                log_uniform(rng, -2, 2),
                0.0 if rng.random() < 0.25 else log_uniform(rng, -2, 2),
            )
        )
    for beta, c1, c2, osc in lips_inputs:
        g, kappa0, c3, r, m, l_lower = lipschitz(beta, c1, c2, osc)
        rows.append(
            ["lipschitz", repr(beta), repr(c1), repr(c2), repr(osc), "", "", fmt(g), fmt(kappa0), fmt(c3), fmt(r), fmt(m), fmt(l_lower)]
        )

    alpha_inputs = [(0.5, 0.25), (0.9, 0.1), (0.25, 0.25)]
    while len(alpha_inputs) < 33:
        alpha_inputs.append((rng.uniform(0.001, 0.999), rng.uniform(0.001, 0.999)))
    for g, tau in alpha_inputs:
        rows.append(
            ["alpha", repr(g), repr(tau), "", "", "", "", fmt(alpha_from(g, tau)), "", "", "", "", ""]
        )

    os.makedirs(os.path.dirname(OUT), exist_ok=True)
    with open(OUT, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["kind", "i1", "i2", "i3", "i4", "i5", "i6", "o1", "o2", "o3", "o4", "o5", "o6"])
        w.writerows(rows)
    print(f"wrote {len(rows)} rows to {OUT}")


if __name__ == "__main__":
    main()
