import json
import math

import numpy as np
import pytest

from triharmonic import Problem, evaluate
from triharmonic.barriers import (BarrierTriple, build_sub_critical, build_sub_supercritical,
                                  build_super_critical, build_super_supercritical,
                                  critical_coefficients, verify_barrier)
from triharmonic.barriers.core import InnerPower, Piecewise, inner_super_pieces, scan_sign_changes
from triharmonic.barriers.critical import quartic_poly
from triharmonic.barriers.supercritical import c_lower_bounds, sub_radii
from triharmonic.barriers.verify import weak_margin
from triharmonic.pipeline import build_barriers
from triharmonic.spectrum import solve_spectrum


def test_sub_radii_frozen(oracle, super_pair):
    want = [float(x) for x in oracle["n20_15jl"]["sub_radii"]]
    got = [super_pair.sub.radii[k] for k in ("r1", "r2", "r3")]
    assert got == pytest.approx(want, rel=1e-12)


def test_sub_r1_is_one_when_b_equals_L():
    prob0 = Problem.parse(20, "1.5xjl")
    prob = Problem(20, prob0.p, prob0.L)
    r1, r2, r3 = sub_radii(prob, solve_spectrum(prob))
    assert r1 == pytest.approx(1.0, rel=1e-14)
    assert 0 < r1 < r2 < r3


def test_sub_u_at_r2(super_pair):
    prob, l = super_pair.problem, super_pair.spectrum.l
    r2 = super_pair.sub.radii["r2"]
    val = super_pair.sub.u.value(r2)[0]
    assert val == pytest.approx(prob.L * r2 ** (-prob.m) - prob.b * r2 ** (-l), rel=1e-14)
    assert val > 0


def test_sub_rejects_degenerate(critical_pair):
    with pytest.raises(ValueError):
        build_sub_supercritical(critical_pair.problem, critical_pair.spectrum)
    with pytest.raises(ValueError):
        build_super_supercritical(critical_pair.problem, critical_pair.spectrum)


def test_critical_rejects_nondegenerate(super_pair):
    with pytest.raises(ValueError):
        build_sub_critical(super_pair.problem, super_pair.spectrum)


def test_super_rejects_k_outside(super_pair):
    prob, spec = super_pair.problem, super_pair.spectrum
    with pytest.raises(ValueError):
        build_super_supercritical(prob, spec, k=spec.l - 0.1)
    with pytest.raises(ValueError):
        build_super_supercritical(prob, spec, k=spec.k0 + 0.1)


def test_super_default_k_and_c(super_pair):
    prob, spec, sup = super_pair.problem, super_pair.spectrum, super_pair.sup
    k = sup.params["k"]
    assert k == pytest.approx(0.5 * (spec.l + spec.k0))
    bounds = c_lower_bounds(prob, spec, k)
    assert sup.params["c"] == pytest.approx(1.1 * max(bounds["quadratic_remainder"],
                                                      bounds["outer_radius_order"]))


def test_super_borderline_ordering(super_pair):
    rd = super_pair.sup.radii
    chain = [rd["r1_bar"], rd["r1_eps"], rd["r2_bar"], rd["r2_eps"], rd["r3_bar"], rd["r3_eps"],
             rd["r3_bar"] + 1]
    assert all(a < b for a, b in zip(chain, chain[1:]))


def test_psi1_sign_pattern_in_limit(super_pair):
    sup = super_pair.sup
    inner = inner_super_pieces(super_pair.problem, 0.0)[0]
    r1 = sup.radii["r1_bar"]
    psi = lambda r: inner.limit_value(r) - sup.u.outer(r)
    assert psi(0.9 * r1) < 0 < psi(1.1 * r1)
    assert abs(psi(r1)) < 1e-10 * inner.limit_value(r1)


def test_eps_monotone_and_convergent(super_pair):
    prob = super_pair.problem
    r = np.geomspace(0.01, 5, 200)
    prev = None
    for eps in (1e-1, 1e-2, 1e-3):
        val = inner_super_pieces(prob, eps)[0].value(r)
        if prev is not None:
            assert np.all(val >= prev)
        prev = val


def test_junction_radii_approach_limits_along_ladder(super_pair):
    prob, spec = super_pair.problem, super_pair.spectrum
    gaps = []
    for eps in (1e-2, 1e-4, 1e-6):
        sup = build_super_supercritical(prob, spec, eps=eps)
        gaps.append(sup.radii["r1_eps"] - sup.radii["r1_bar"])
    assert all(g > 0 for g in gaps)
    assert gaps[0] > gaps[1] > gaps[2]


def test_gap_functions_single_sign_change(super_pair):
    sup = super_pair.sup
    inners = inner_super_pieces(super_pair.problem, sup.params["eps"])
    lo = sup.radii["r1_bar"] * 1e-3
    for comp, inner in zip(sup.components, inners):
        br = scan_sign_changes(lambda r: inner.value(r) - comp.outer(r), lo, sup.radii["r3_bar"] + 1)
        assert len([b for b in br if b[1] >= comp.junction * 0.999 and b[0] <= comp.junction * 1.001]) == 1
        lo = comp.junction


def test_super_inner_inequality(super_pair):
    prob = super_pair.problem
    k = prob.m
    r = np.geomspace(1e-3, 10, 500)
    for eps in (1e-1, 1e-4):
        inner = inner_super_pieces(prob, eps)[0]
        lhs = inner.minus_laplacian(r, prob.n)
        rhs = k * (prob.n - 2 - k) * inner.A * (r * r + eps) ** (-(k + 2) / 2)
        assert np.all(lhs - rhs >= 0)


def test_sub_zero_region(super_pair):
    sub = super_pair.sub
    r = np.linspace(1e-3, 0.99 * sub.radii["r1"], 50)
    assert np.all(sub.values(r) == 0)
    assert np.all(np.stack([c.minus_laplacian(r) for c in sub.components]) == 0)


@pytest.mark.parametrize("which", ["sub", "sup"])
def test_verify_supercritical_defaults(super_pair, which):
    rep = verify_barrier(getattr(super_pair, which))
    assert rep.passed, rep.failures()


@pytest.mark.parametrize("which", ["sub", "sup"])
def test_verify_critical_defaults(critical_pair, which):
    rep = verify_barrier(getattr(critical_pair, which))
    assert rep.passed, rep.failures()


def test_weak_margin_at_sub_r1(super_pair):
    sub = super_pair.sub
    r1 = sub.radii["r1"]
    assert weak_margin(sub, 0, r1, r1 / 10, super_pair.problem.p) >= -1e-9


def test_verification_detects_bad_barrier(super_pair):
    sup = super_pair.sup
    # 5 x super: -Delta (5 w) = 5 (-Delta w) falls short of (5 u)^p where the inequality is tight
    comps = tuple(Piecewise(c.junction, 5.0 * c.outer, InnerPower(5.0 * c.inner.A, c.inner.alpha, c.inner.eps), c.n)
                  for c in sup.components)
    bad = BarrierTriple("super", sup.regime, sup.problem, comps, sup.params, sup.radii)
    rep = verify_barrier(bad)
    assert not rep.passed
    assert any("u^p" in f for f in rep.failures())


def test_sandwich_sub_below_super(super_pair, critical_pair):
    for pair in (super_pair, critical_pair):
        r = np.geomspace(1e-3, 50 * pair.r3_bar, 5000)
        assert np.all(pair.sub.values(r) <= pair.sup.values(r) * (1 + 1e-9))


def test_nonnegative_components(super_pair, critical_pair):
    for pair in (super_pair, critical_pair):
        for trip in (pair.sub, pair.sup):
            r = np.geomspace(1e-3, 100 * pair.r3_bar, 3000)
            assert np.all(trip.values(r) >= 0)


def test_continuity_at_junctions(super_pair, critical_pair):
    for pair in (super_pair, critical_pair):
        for trip in (pair.sub, pair.sup):
            for comp in trip.components:
                j = comp.junction
                left = comp.value(j * (1 - 1e-12))[0]
                right = comp.value(j)[0]
                scale = np.max(np.abs(comp.value(np.linspace(0.5 * j, 2 * j, 50))))
                assert abs(left - right) <= 1e-9 * scale


def test_json_round_trip(super_pair, critical_pair):
    for pair in (super_pair, critical_pair):
        for trip in (pair.sub, pair.sup):
            back = BarrierTriple.from_json(trip.to_json())
            r = np.geomspace(0.05, 10, 100)
            assert np.array_equal(back.values(r), trip.values(r))
            assert json.loads(back.to_json()) == json.loads(trip.to_json())


# critical regime -------------------------------------------------------------

def test_critical_sub_frozen(oracle, critical_pair):
    o = oracle["n20_jl"]["critical_sub"]
    sub = critical_pair.sub
    assert sub.params["mu"] == pytest.approx(float(o["mu"]), rel=1e-10)
    for key in ("R", "r1", "r2", "r3"):
        assert sub.radii[key] == pytest.approx(float(o[key]), rel=1e-9)


def test_critical_sub_phi_signs(critical_pair):
    prob, sub = critical_pair.problem, critical_pair.sub
    L, m, b, l = prob.L, prob.m, prob.b, critical_pair.spectrum.l
    R, r1, r2, mu = sub.radii["R"], sub.radii["r1"], sub.radii["r2"], sub.params["mu"]
    assert L * r1 ** (l - m) == pytest.approx(b * math.log(r1 / R), rel=1e-12)
    assert b * math.log(r1 / R) == pytest.approx(b * mu, rel=1e-12)
    assert sub.v.outer(r1) < 0
    assert sub.w.outer(r2) < 0
    assert R < r1 < r2 < sub.radii["r3"]


@pytest.mark.parametrize("n", [20, 25])
def test_critical_coefficient_identities(n):
    prob = Problem.parse(n, "jl")
    l = (n - 6) / 2
    for beta in (0.25, 0.5, 0.75):
        co = critical_coefficients(prob, l, beta)
        scale = max(abs(v) for v in co.values())
        for key in ("A2", "B1", "B3", "B5"):
            assert abs(co[key]) <= 1e-9 * scale
        assert co["B2"] == pytest.approx(beta * (1 - beta) * quartic_poly(n) / 16, rel=1e-12)
        # corrected factor 1/4 (see the ledger): beta(1-beta)(2-beta)(3-beta)(3n^2-12n+44)/4
        assert co["B4"] == pytest.approx(beta * (1 - beta) * (2 - beta) * (3 - beta)
                                         * (3 * n * n - 12 * n + 44) / 4, rel=1e-12)


def test_critical_B4_ratio_constraint(critical_pair):
    n = critical_pair.problem.n
    sup = critical_pair.sup
    beta, t = sup.params["beta"], sup.params["t"]
    ratio = 24 * (2 - beta) * (3 - beta) * (3 * n * n - 12 * n + 44) / quartic_poly(n)
    assert ratio / t**2 < 1


def test_critical_super_ordering(critical_pair):
    sub, sup = critical_pair.sub, critical_pair.sup
    rd = sup.radii
    chain = [sub.radii["r1"], sub.radii["r2"], sub.radii["r3"], rd["r1_bar"], rd["r1_eps"],
             rd["r2_bar"], rd["r2_eps"], rd["r3_bar"], rd["r3_eps"], rd["r3_bar"] + 1]
    assert all(a < b for a, b in zip(chain, chain[1:]))


def test_critical_g_increasing(critical_pair):
    prob, sup = critical_pair.problem, critical_pair.sup
    l, m, beta, R = critical_pair.spectrum.l, prob.m, sup.params["beta"], sup.params["R"]
    r = np.geomspace(sup.radii["r1_bar"], 1e3 * sup.radii["r1_bar"], 1000)
    g = r ** (l - m) * np.log(r / R) ** (beta - 4)
    assert np.all(np.diff(g) > 0)


def test_critical_super_rejects_beta(critical_pair):
    with pytest.raises(ValueError):
        build_super_critical(critical_pair.problem, critical_pair.spectrum, beta=1.0)


def test_critical_t_bounds_respected(critical_pair):
    sup = critical_pair.sup
    assert sup.params["t"] > max(sup.params["t_bounds"].values())
    assert sup.params["c"] == pytest.approx(1.1 * sup.params["c_min"])


def test_exact_outer_pieces_are_laplacian_chain(critical_pair):
    n = critical_pair.problem.n
    sub = critical_pair.sub
    r = np.geomspace(sub.radii["r3"], 20, 20)
    v_from_u = -evaluate(sub.u.outer.laplacian(n), r)
    assert np.allclose(v_from_u, sub.v.outer(r), rtol=1e-13)


def test_build_barriers_regime_switch():
    assert build_barriers(Problem.parse(25, "2xjl", 0.5)).regime == "supercritical"
    assert build_barriers(Problem.parse(25, "jl")).regime == "critical"
    with pytest.raises(ValueError):
        build_barriers(Problem.parse(20, "jl"), k=5.0)
