#!/usr/bin/env python3
"""Freeze high-precision Faddeeva reference values for the C++ test suites.

W(z) = exp(-z^2) erfc(-iz) is evaluated with mpmath at 50 significant digits.
A subset is cross-checked against direct quadrature of the defining integral
W(z) = (i/pi) * int exp(-t^2) / (z - t) dt  (Im z > 0).
"""
import random
import sys

import mpmath as mp

mp.mp.dps = 50


def w_ref(z):
    z = mp.mpc(z)
    return mp.exp(-z * z) * mp.erfc(-1j * z)


def w_quad(z):
    z = mp.mpc(z)
    f = lambda t: mp.exp(-t * t) / (z - t)
    return 1j / mp.pi * mp.quad(f, [-mp.inf, z.real - 5, z.real, z.real + 5, mp.inf])


def main(path):
    rng = random.Random(20240611)
    pts = [complex(0, 0), complex(1, 0), complex(0, 2), complex(5, 1e-8), complex(-3.2, 0.4)]
    # upper half-plane, mixing scales from 1e-3 to 30
    while len(pts) < 150:
        mag = 10 ** rng.uniform(-3, 1.48)
        ang = rng.uniform(0, mp.pi)
        z = complex(mag * mp.cos(ang), mag * mp.sin(ang))
        if rng.random() < 0.15:
            z = complex(z.real, 10 ** rng.uniform(-10, -2))
        pts.append(z)
    # lower half-plane down to Im z = -30; keep points whose value is representable
    # and not dominated by cancellation against 2 exp(-z^2)
    while len(pts) < 200:
        y = -10 ** rng.uniform(-3, 1.48)
        x = rng.choice([-1, 1]) * rng.uniform(0, 30)
        z = complex(x, y)
        if y * y - x * x > 600:
            continue
        w = w_ref(z)
        if abs(w) < 1e-3 * abs(2 * mp.exp(-mp.mpc(z) ** 2)):
            continue
        pts.append(z)

    for z in pts[:12]:
        if z.imag > 1e-3:
            a, b = w_ref(z), w_quad(z)
            assert abs(a - b) <= mp.mpf("1e-30") * abs(a), (z, a, b)

    with open(path, "w") as f:
        f.write("re,im,w_re,w_im\n")
        for z in pts:
            w = w_ref(z)
            f.write(f"{z.real!r},{z.imag!r},{mp.nstr(w.real, 20)},{mp.nstr(w.imag, 20)}\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "faddeeva_reference.csv")
