"""Smoke test for the perspec_py extension module.

Build and install first:  pip install --no-build-isolation -e crates/python
"""

import math
import sys

import numpy as np

import perspec_py as ps


def check(name, ok, detail=""):
    print(f"{'ok  ' if ok else 'FAIL'} {name} {detail}")
    return ok


def main():
    results = []

    free = ps.Potential.zeros([2, 3])
    sr = free.spectrum(grid=16, refine=10)
    lo, hi = sr["merged"][0]["lower"], sr["merged"][0]["upper"]
    results.append(check("free spectrum", len(sr["gaps"]) == 0 and abs(lo + 4) < 1e-4 and abs(hi - 4) < 1e-4, f"[{lo:.6f}, {hi:.6f}]"))

    v = ps.Potential.random([2, 3], seed=3, norm=1.0)
    theta = [0.1, 0.2]
    a = v.fiber_eigenvalues(theta, "momentum")
    b = v.fiber_eigenvalues(theta, "space")
    results.append(check("basis equivalence", np.max(np.abs(np.subtract(a, b))) < 1e-9))

    # numpy oracle: dense space-basis fiber.
    p, q = v.period
    vals = np.array(v.values).reshape(p, q)
    h = np.zeros((p * q, p * q), dtype=complex)
    for i in range(p):
        for j in range(q):
            n = i * q + j
            h[n, n] = vals[i, j]
            for di, dj, ph in ((1, 0, theta[0] * p), (0, 1, theta[1] * q)):
                ii, jj = i + di, j + dj
                wrap = np.exp(2j * math.pi * ph) if (ii == p or jj == q) else 1.0
                m = (ii % p) * q + (jj % q)
                h[n, m] += wrap
                h[m, n] += np.conj(wrap)
    oracle = np.linalg.eigvalsh(h)
    results.append(check("numpy fiber oracle", np.max(np.abs(oracle - a)) < 1e-9, f"{np.max(np.abs(oracle - a)):.1e}"))

    one_d = ps.Potential.zeros([1])
    energies = [-1.5, 0.0, 0.9]
    k = one_d.ids(energies, theta_n=4096)
    exact = [math.acos(-e / 2) / math.pi for e in energies]
    results.append(check("free IDS", max(abs(x - y) for x, y in zip(k, exact)) < 2e-3))

    z = 0.3 + 0.5j
    results.append(check("Herglotz", v.stieltjes(z).imag > 0))

    m = free.spectral_density([([0, 0], 1.0 + 0j)], list(np.linspace(-4.5, 4.5, 3601)), eps=0.01, theta_n=32)
    results.append(check("spectral mass", abs(m["mass"] - 1.0) < 0.02, f"{m['mass']:.4f}"))

    cert = ps.Potential.random([2, 3], seed=5, norm=0.1).certify(0.37, samples=4)
    results.append(check("certification", cert["verdict"] == "certified-finite", f"{cert['best_f_relative_log10']:.2f}"))

    cb = ps.verify_checkerboard_gap(2, 0.5, grid=16, refine=8)
    results.append(check("checkerboard gap", cb["inner_edges"][0] <= -0.5 + 1e-6 and cb["inner_edges"][1] >= 0.5 - 1e-6))

    stair = ps.Potential.staircase([2, 2]).spectrum(grid=8, refine=6)
    results.append(check("staircase gaps", len(stair["gaps"]) == 3))

    try:
        ps.Potential([2, 0], [])
        results.append(check("validation error", False))
    except ValueError as e:
        results.append(check("validation error", "InvalidInput" in str(e)))

    plan = ps.construct_lp(2, 3, 1, seed=1, fraction=0.5, grid=12, refine=6)
    results.append(check("limit-periodic plan", plan["stages"][0]["interval"]))

    print(f"{sum(results)}/{len(results)} checks passed")
    return 0 if all(results) else 1


if __name__ == "__main__":
    sys.exit(main())
