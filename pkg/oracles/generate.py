"""Independent high-precision reference values, frozen into tests/oracle_values.json.

Uses mpmath only; nothing here imports the package. Re-run with

    python3 oracles/generate.py

and commit the JSON when a definition changes.
"""

import json
import os
from fractions import Fraction

import mpmath as mp

mp.mp.dps = 50


def prod(xs):
    out = mp.mpf(1)
    for x in xs:
        out *= x
    return out


def factors(k, n, m):
    if k == 2:
        return [m, n - 2 - m]
    if k == 4:
        return [m, m + 2, n - 2 - m, n - 4 - m]
    return [m, m + 2, m + 4, n - 2 - m, n - 4 - m, n - 6 - m]


def double_root_gap(k, n, m):
    """Linearisation at the vertex a = (n-k)/2 minus p L^(p-1); zero at p_JL."""
    p = 1 + mp.mpf(k) / m
    a = mp.mpf(n - k) / 2
    at_vertex = prod(factors(k, n, a))
    return at_vertex - p * prod(factors(k, n, m))


def jl(k, n):
    lo, hi = mp.mpf("1e-30"), mp.mpf(n - k) / 2
    f = lambda m: double_root_gap(k, n, m)
    if f(hi * (1 - mp.mpf("1e-30"))) * f(lo) > 0:
        return None
    m = mp.findroot(f, (lo, hi * (1 - mp.mpf("1e-30"))), solver="anderson")
    # polish by bisection-safe secant
    m = mp.findroot(f, m)
    return 1 + mp.mpf(k) / m


def decay(n, p, k=6):
    m = mp.mpf(k) / (p - 1)
    return m, prod(factors(k, n, m)) ** (1 / (p - 1))


def char_poly_coeffs(n, p):
    m, L = decay(n, p)
    # product of linear factors in lambda: (m+lam) ... ; build by polynomial multiplication
    polys = [[1, m], [1, m + 2], [1, m + 4], [-1, n - 2 - m], [-1, n - 4 - m], [-1, n - 6 - m]]
    c = [mp.mpf(1)]
    for a, b in polys:
        new = [mp.mpf(0)] * (len(c) + 1)
        for i, ci in enumerate(c):
            new[i] += ci * a
            new[i + 1] += ci * b
        c = new
    c[-1] -= p * L ** (p - 1)
    return c


def spectrum(n, p):
    roots = mp.polyroots(char_poly_coeffs(n, p), maxsteps=500, extraprec=400)
    real = sorted([r.real for r in roots if abs(r.imag) < mp.mpf("1e-30") and r.real > 0])
    m, _ = decay(n, p)
    lam3, lam4 = real[0], real[1]
    return {"lambda3": lam3, "lambda4": lam4, "l": m + lam3, "k0": min(m + lam4, 2 * (m + lam3) - m),
            "roots": sorted(roots, key=lambda z: (z.real, z.imag))}


def cp_sup(p):
    p = mp.mpf(p)
    g = lambda z: ((1 - z) ** p - 1 + p * z) / z**2
    zs = [mp.mpf(i) / 2000 for i in range(1, 2001)]
    best = max(zs, key=g)
    lo, hi = max(best - mp.mpf(1) / 2000, mp.mpf("1e-40")), min(best + mp.mpf(1) / 2000, 1)
    phi = (mp.sqrt(5) - 1) / 2
    for _ in range(200):
        a, b = hi - phi * (hi - lo), lo + phi * (hi - lo)
        if g(a) < g(b):
            lo = a
        else:
            hi = b
    zmax = (lo + hi) / 2
    limit = p * (p - 1) / 2  # z -> 0
    return max(g(zmax), limit), zmax


def minus_lap(f, n):
    return lambda r: -(mp.diff(f, r, 2) + (n - 1) / r * mp.diff(f, r, 1))


def sub_radii_super(n, p, b):
    m, L = decay(n, p)
    l = spectrum(n, p)["l"]
    u = lambda r: L * r ** (-m) - b * r ** (-l)
    v = minus_lap(u, n)
    w = minus_lap(v, n)
    r1 = (b / L) ** (1 / (l - m))
    r2 = first_root_after(v, r1)
    r3 = first_root_after(w, r2)
    return r1, r2, r3


def first_root_after(f, lo):
    x = lo
    step = lo * mp.mpf("0.001")
    while f(x + step) < 0:
        x += step
    lo, hi = x, x + step
    for _ in range(120):
        mid = (lo + hi) / 2
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def main():
    out = {}
    out["jl6"] = {str(n): mp.nstr(jl(6, n), 30) for n in range(15, 41)}
    out["jl4"] = {str(n): mp.nstr(jl(4, n), 30) for n in (13, 14, 15, 20, 30)}
    out["jl2"] = {str(n): mp.nstr(jl(2, n), 30) for n in (11, 12, 15, 20, 30)}
    # exact integers and fractions
    n = 15
    two_k0 = (-27 * n**6 + 324 * n**5 - 756 * n**4 - 2592 * n**3 + 25776 * n**2
              + 5184 * n - 23744)
    out["two_k0_n15"] = two_k0
    out["Q6_n15"] = str(Fraction(12 * 8 * 10 * 7 * 5 * 3) - Fraction(81 * 169 * 289, 64))

    pjl20 = jl(6, 20)
    m, L = decay(20, pjl20)
    out["n20_jl"] = {"p": mp.nstr(pjl20, 30), "m": mp.nstr(m, 30), "L": mp.nstr(L, 30),
                     "lambda3": mp.nstr(mp.mpf(7) - m, 30)}
    p15 = mp.mpf("1.5") * pjl20
    sp = spectrum(20, p15)
    m15, L15 = decay(20, p15)
    out["n20_15jl"] = {"p": mp.nstr(p15, 30), "m": mp.nstr(m15, 30), "L": mp.nstr(L15, 30),
                       "lambda3": mp.nstr(sp["lambda3"], 30), "lambda4": mp.nstr(sp["lambda4"], 30),
                       "l": mp.nstr(sp["l"], 30), "k0": mp.nstr(sp["k0"], 30),
                       "roots": [[mp.nstr(z.real, 25), mp.nstr(z.imag, 25)] for z in sp["roots"]]}
    r1, r2, r3 = sub_radii_super(20, p15, 1)
    out["n20_15jl"]["sub_radii"] = [mp.nstr(x, 25) for x in (r1, r2, r3)]

    # cubic at n=15, p=2: x^3 + 74 x^2 + 1144 x - 100800
    xs = mp.polyroots([1, 74, 1144, -100800], extraprec=200)
    out["cubic_15_2"] = [[mp.nstr(z.real, 25), mp.nstr(z.imag, 25)]
                         for z in sorted(xs, key=lambda z: (z.real, z.imag))]

    out["cp_sup"] = {}
    for p in ("1.5", "2", "2.5", "3", "4", "7"):
        s, z = cp_sup(p)
        out["cp_sup"][p] = {"sup": mp.nstr(s, 25), "argmax": mp.nstr(z, 10)}

    # critical sub radii at n=20, b=1, from mu = 1.1 * max of the five bounds
    lc = mp.mpf(7)
    bounds = [1 / (lc - m),
              (20 - 2 - 2 * lc) / ((20 - 2 - lc - m) * (lc - m)),
              lc * (20 - 2 - lc) / (m * (20 - 2 - m) * (lc - m)),
              (20 - 2 - 2 * lc) / (lc * (20 - 2 - lc)),
              lc * (lc + 2) * (20 - 2 - lc) * (20 - 4 - lc)
              / (m * (m + 2) * (20 - 2 - m) * (20 - 4 - m) * (lc - m))]
    mu = mp.mpf("1.1") * max(bounds)
    r1c = (mu / L) ** (1 / (lc - m))
    R = mp.e ** (-mu) * r1c
    u = lambda r: L * r ** (-m) - r ** (-lc) * mp.log(r / R)
    v = minus_lap(u, 20)
    w = minus_lap(v, 20)
    r2c = first_root_after(v, r1c)
    r3c = first_root_after(w, r2c)
    out["n20_jl"]["critical_sub"] = {"mu": mp.nstr(mu, 25), "R": mp.nstr(R, 25),
                                     "r1": mp.nstr(r1c, 25), "r2": mp.nstr(r2c, 25),
                                     "r3": mp.nstr(r3c, 25)}

    path = os.path.join(os.path.dirname(__file__), "..", "tests", "oracle_values.json")
    with open(path, "w") as fh:
        json.dump(out, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print("wrote", os.path.normpath(path))


if __name__ == "__main__":
    main()
