import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from triharmonic import (PowerLogSum, PowerLogTerm, Problem, binomial_cp, evaluate, jl_exponent,
                         radial_laplacian, triharmonic_residual)


def fd_laplacian(f, r, n, h):
    d1 = (-f(r + 2 * h) + 8 * f(r + h) - 8 * f(r - h) + f(r - 2 * h)) / (12 * h)
    d2 = (-f(r + 2 * h) + 16 * f(r + h) - 30 * f(r) + 16 * f(r - h) - f(r - 2 * h)) / (12 * h * h)
    return d2 + (n - 1) / r * d1


def test_laplacian_of_power_exact():
    out = radial_laplacian(PowerLogSum.power(1.0, 6.0), 15)
    assert out == PowerLogSum([PowerLogTerm(-42.0, 8.0)])


def test_laplacian_of_constant_is_zero():
    assert len(radial_laplacian(PowerLogSum.power(3.0, 0.0), 15)) == 0


@pytest.mark.parametrize("r", [2.0, 5.0, 10.0])
def test_laplacian_log_term_against_fd(r):
    R = 1.0
    f = PowerLogSum.power(1.0, 4.0, 1.0, R)
    exact = evaluate(radial_laplacian(f, 15), r * R)
    fd = fd_laplacian(lambda x: evaluate(f, x), r * R, 15, 1e-4 * r)
    assert fd == pytest.approx(exact, rel=1e-6)


@given(alpha=st.one_of(st.just(0.0), st.floats(1e-6, 12.0)), n=st.integers(3, 40), a=st.floats(-5, 5).filter(lambda x: abs(x) > 1e-3))
def test_power_specialisation_coefficients(alpha, n, a):
    out = radial_laplacian(PowerLogSum.power(a, alpha), n)
    coef = -a * alpha * (n - 2 - alpha)
    if abs(coef) < 1e-300:
        assert len(out) == 0
    else:
        (t,) = out.terms
        assert t.alpha == pytest.approx(alpha + 2)
        assert t.a == pytest.approx(coef, rel=1e-14)


term_st = st.builds(lambda a, al, g: PowerLogTerm(a, al, g, 0.5),
                    st.floats(-3, 3), st.floats(0, 8), st.integers(0, 3))


@given(terms=st.lists(term_st, min_size=1, max_size=6), n=st.integers(3, 30),
       r=st.floats(1.5 * 0.5, 100 * 0.5))
def test_random_sums_against_fd(terms, n, r):
    f = PowerLogSum(terms)
    exact = evaluate(radial_laplacian(f, n), r)
    h = 1e-3 * r
    fd = fd_laplacian(lambda x: evaluate(f, x), r, n, h)
    assert abs(exact - fd) / (1 + abs(exact)) < 1e-6 * max(1.0, max(abs(t.a) for t in terms))


@given(t1=st.lists(term_st, max_size=4), t2=st.lists(term_st, max_size=4), c=st.floats(-4, 4), n=st.integers(3, 20))
def test_linearity(t1, t2, c, n):
    f, g = PowerLogSum(t1), PowerLogSum(t2)
    lhs = radial_laplacian(f + g, n)
    rhs = radial_laplacian(f, n) + radial_laplacian(g, n)
    r = np.array([1.0, 3.0, 10.0])
    assert np.allclose(evaluate(lhs, r), evaluate(rhs, r), rtol=1e-12, atol=1e-12)
    assert np.allclose(evaluate(radial_laplacian(c * f, n), r), c * evaluate(radial_laplacian(f, n), r),
                       rtol=1e-12, atol=1e-12)


def test_canonical_merging():
    f = PowerLogSum([PowerLogTerm(1.0, 2.0), PowerLogTerm(2.0, 2.0 + 1e-13), PowerLogTerm(0.0, 3.0)])
    assert len(f) == 1
    assert f.terms[0].a == pytest.approx(3.0)


def test_eval_basics():
    prob = Problem.parse(20, "1.5xjl")
    assert evaluate(PowerLogSum(), 2.0) == 0.0
    assert evaluate(PowerLogSum.power(prob.L, prob.m), 1.0) == pytest.approx(prob.L)
    with pytest.raises(ValueError):
        evaluate(PowerLogSum.power(1.0, 1.0), 0.0)


def test_sub_outer_vanishes_at_r1(super_pair):
    prob, spec = super_pair.problem, super_pair.spectrum
    u = PowerLogSum.power(prob.L, prob.m) - PowerLogSum.power(prob.b, spec.l)
    r1 = (prob.b / prob.L) ** (1 / (spec.l - prob.m))
    assert abs(evaluate(u, r1)) < 1e-13 * prob.L * r1 ** (-prob.m)


@pytest.mark.parametrize("n, fac", [(15, 1.0), (20, 1.5), (30, 2.0)])
def test_singular_solution_residual(n, fac):
    prob = Problem(n, fac * jl_exponent(6, n))
    f = PowerLogSum.power(prob.L, prob.m)
    r = np.array([1.0, 10.0, 100.0])
    res = triharmonic_residual(f, n, prob.p, r)
    assert np.all(np.abs(res) <= 1e-9 * evaluate(f, r) ** prob.p)


def test_half_singular_residual():
    prob = Problem.parse(20, "1.5xjl")
    f = 0.5 * PowerLogSum.power(prob.L, prob.m)
    r = 3.0
    want = (0.5 - 0.5**prob.p) * prob.L**prob.p * r ** (-prob.m - 6)
    assert triharmonic_residual(f, 20, prob.p, r) == pytest.approx(want, rel=1e-10)


def test_residual_rejects_non_positive():
    with pytest.raises(ValueError):
        triharmonic_residual(-1.0 * PowerLogSum.power(1.0, 1.0), 20, 2.0, 1.0)


@pytest.mark.parametrize("p", ["1.5", "2", "2.5", "3", "4", "7"])
def test_cp_against_frozen_supremum(oracle, p):
    sup = float(oracle["cp_sup"][p]["sup"])
    cp = binomial_cp(float(p))
    assert sup <= cp <= 1.01 * sup * (1 + 1e-12)


def test_cp_two_is_padded_unit():
    assert 1.0 <= binomial_cp(2.0) <= 1.01


@pytest.mark.parametrize("p", [2.5, 4.0, 7.0])
def test_binomial_inequalities_random(p):
    z = np.random.default_rng(1).uniform(0, 1, 100_000)
    cp = binomial_cp(p)
    mid = (1 - z) ** p
    assert np.all(1 - p * z <= mid + 1e-15)
    assert np.all(mid <= 1 - p * z + cp * z * z + 1e-15)


def test_cp_rejects():
    with pytest.raises(ValueError):
        binomial_cp(1.0)
