import math

import numpy as np
import pytest

from jacobiscatter import (
    InputError,
    Perturbation,
    PerturbedOperator,
    SheetPoint,
    build_xi_data,
    fundamental_solutions,
    jost_evaluate,
    perturbed_tilde_solutions,
    sqrt_branch,
    xi_eval,
)
from jacobiscatter.jost import xi_eval_mp

from conftest import make_op, pipeline, random_background, random_canonical


def poly_close(got, want, tol=1e-12):
    diff = got - want
    scale = max(
        [1e-30]
        + [abs(c) for c in got.coeffs]
        + [abs(c) for c in want.coeffs]
    )
    return max((abs(c) for c in diff.coeffs), default=0.0) <= tol * max(scale, 1.0)


def section6_polys(bg, fund, v0, v1):
    """Closed-form A and J for p=1, u=0."""
    a00 = bg.a0(0)
    j = (
        -(v0 / a00) * fund.phi_q
        + (v1 / a00) * fund.theta_q1
        + (v0 * v1 / a00**2) * fund.weyl_phi
    )
    a = -v0 * v1 / (2.0 * a00**2)
    return a, j


def test_perturbation_validation():
    with pytest.raises(InputError):
        Perturbation(p=1, u=(0.0,), v=(1.0, 1.0))
    with pytest.raises(InputError):
        bg_a = 1.0
        PerturbedOperator(
            __import__("jacobiscatter").PeriodicBackground(q=1, a=(bg_a,), b=(0.0,)),
            Perturbation(p=0, u=(-2.0,), v=(1.0,)),
        )


def test_canonical_flag():
    assert Perturbation(p=1, u=(0.0, 0.0), v=(1.0, 2.0)).canonical
    assert not Perturbation(p=1, u=(0.0, 0.0), v=(0.0, 2.0)).canonical


def test_tilde_trivial(q3_bg):
    fund, _ = pipeline(q3_bg, nmax=5)
    op = make_op(q3_bg, 2, (0.0, 0.0, 0.0), (0.0, 0.0, 0.0))
    th0, th1, ph0, ph1 = perturbed_tilde_solutions(op, fund)
    for got, want in ((th0, fund.theta(0)), (th1, fund.theta(1)), (ph0, fund.phi(0)), (ph1, fund.phi(1))):
        assert poly_close(got, want)


def test_tilde_section6_case(q2_bg):
    fund, _ = pipeline(q2_bg, nmax=5)
    v1 = -0.8
    op = make_op(q2_bg, 1, (0.0, 0.0), (0.5, v1))
    th0, th1, ph0, ph1 = perturbed_tilde_solutions(op, fund)
    a00 = q2_bg.a0(0)
    assert list(th0.coeffs) == [1.0]
    assert th1.is_zero()
    assert np.allclose(ph0.coeffs, [-v1 / a00])
    assert list(ph1.coeffs) == [1.0]


def test_tilde_single_site_diagonal(q3_bg):
    # p=0 with u=0: the backward step is unperturbed, tilde = plain
    fund, _ = pipeline(q3_bg, nmax=5)
    op = make_op(q3_bg, 0, (0.0,), (2.0,))
    th0, th1, ph0, ph1 = perturbed_tilde_solutions(op, fund)
    assert np.allclose(th0.coeffs, fund.theta(0).coeffs)
    assert np.allclose(ph1.coeffs, fund.phi(1).coeffs)
    assert ph0.is_zero()


def test_xi_data_trivial(q2_bg):
    fund, _ = pipeline(q2_bg, nmax=5)
    op = make_op(q2_bg, 1, (0.0, 0.0), (0.0, 0.0))
    data = build_xi_data(op, fund)
    assert data.a_poly.is_zero()
    assert data.j_poly.is_zero()
    want = -4.0 * fund.delta_sq_minus_1
    assert np.allclose(data.f_poly.coeffs, want.coeffs, rtol=1e-12)


def test_xi_data_section6_closed_form():
    rng = np.random.default_rng(11)
    for _ in range(6):
        bg = random_background(rng)
        fund = fundamental_solutions(bg, nmax=bg.q + 3)
        v0, v1 = rng.uniform(0.2, 2.0, 2) * rng.choice([-1.0, 1.0], 2)
        op = make_op(bg, 1, (0.0, 0.0), (v0, v1))
        data = build_xi_data(op, fund)
        a_want, j_want = section6_polys(bg, fund, v0, v1)
        assert np.allclose(data.a_poly.coeffs, [a_want], rtol=1e-10)
        top = max(abs(j_want.coeffs))
        assert np.allclose(data.j_poly.coeffs, j_want.coeffs, rtol=1e-10, atol=1e-10 * top)


def test_state_poly_degree_example():
    # q=2, p=2 with an off-diagonal defect at the endpoint: 2p+2q-1 = 7
    rng = np.random.default_rng(12)
    bg = random_background(rng, qmax=2)
    while bg.q != 2:
        bg = random_background(rng, qmax=2)
    op = make_op(bg, 2, (0.1, -0.05, 0.2), (0.7, 0.1, -0.9))
    fund = fundamental_solutions(bg, nmax=6)
    data = build_xi_data(op, fund)
    assert data.f_poly.degree == 7


def test_xi_sheet_product_is_state_poly(q3_bg):
    rng = np.random.default_rng(13)
    op = make_op(q3_bg, 2, (0.1, 0.0, -0.2), (0.6, -0.4, 1.1))
    fund, _ = pipeline(q3_bg, nmax=6)
    data = build_xi_data(op, fund)
    for _ in range(20):
        lam = complex(rng.uniform(-4, 4), rng.uniform(-2, 2))
        prod = xi_eval(fund, data, SheetPoint(lam, True)) * xi_eval(
            fund, data, SheetPoint(lam, False)
        )
        want = data.f_poly(lam)
        assert abs(prod - want) < 1e-8 * (1 + abs(want))


def test_xi_real_on_gaps(q2_bg):
    fund, bands = pipeline(q2_bg, nmax=5)
    op = make_op(q2_bg, 1, (0.0, 0.0), (0.5, -0.8))
    data = build_xi_data(op, fund)
    x = 0.5  # inside the finite gap (0, 1)
    for phys in (True, False):
        val = xi_eval(fund, data, SheetPoint(x, phys))
        assert abs(val.imag) < 1e-12 * (1 + abs(val))


def test_xi_vanishes_at_edges_unperturbed(free_bg):
    fund, bands = pipeline(free_bg, nmax=4)
    op = make_op(free_bg, 0, (0.0,), (0.0,))
    data = build_xi_data(op, fund)
    for e in bands.edges:
        assert abs(xi_eval(fund, data, SheetPoint(e, True))) < 1e-10


def test_jost_unperturbed_reduces_to_bloch(q3_bg):
    fund, _ = pipeline(q3_bg, nmax=6)
    op = make_op(q3_bg, 0, (0.0,), (0.0,))
    lam = complex(1.3, 0.9)
    ev = jost_evaluate(op, fund, SheetPoint(lam, True))
    assert abs(ev.alpha - 1.0) < 1e-10
    want = 2.0 * sqrt_branch(fund, SheetPoint(lam, True))
    assert abs(ev.xi - want) < 1e-10 * (1 + abs(want))


def test_jost_wronskian_site_independent(q3_bg):
    fund, _ = pipeline(q3_bg, nmax=8)
    op = make_op(q3_bg, 2, (0.1, 0.0, -0.2), (0.6, -0.4, 1.1))
    lam = complex(0.7, 1.1)
    ev = jost_evaluate(op, fund, SheetPoint(lam, True), window=range(-3, 6))
    w_at = [
        op.a(n) * (ev.fminus[n] * ev.fplus[n + 1] - ev.fminus[n + 1] * ev.fplus[n])
        for n in (-2, 0, 3)
    ]
    for w in w_at[1:]:
        assert abs(w - w_at[0]) < 1e-9 * (1 + abs(w_at[0]))


def test_jost_matches_polynomial_route():
    rng = np.random.default_rng(14)
    for _ in range(4):
        op = random_canonical(rng, qmax=3, pmax=3)
        fund = fundamental_solutions(op.bg, nmax=max(op.bg.q + 2, op.p + 3))
        data = build_xi_data(op, fund)
        for _ in range(4):
            lam = complex(rng.uniform(-3, 3), rng.uniform(0.4, 1.5))
            for phys in (True, False):
                ev = jost_evaluate(op, fund, SheetPoint(lam, phys))
                want = xi_eval(fund, data, SheetPoint(lam, phys))
                assert abs(ev.xi - want) < 1e-8 * (1 + abs(want))


def test_state_poly_positive_on_bands(q3_bg):
    fund, bands = pipeline(q3_bg, nmax=6)
    op = make_op(q3_bg, 2, (0.0, 0.1, 0.3), (0.6, -0.4, 1.1))
    data = build_xi_data(op, fund)
    for lo, hi in bands.bands:
        for frac in np.linspace(0.05, 0.95, 10):
            x = lo + frac * (hi - lo)
            assert data.f_poly(x) > 0.0
            assert data.s_poly(x) >= -1e-10 * (1 + abs(data.f_poly(x)))


def test_degree_and_leading_dichotomy():
    rng = np.random.default_rng(15)
    for mode in (0, 1, 2, 0, 1, 2):
        op = random_canonical(rng, mode=mode)
        q, p = op.bg.q, op.p
        fund = fundamental_solutions(op.bg, nmax=max(q + 2, p + 3))
        data = build_xi_data(op, fund)
        prod_a = op.bg.prod_a
        big_q = op.prod_a_support()
        if p == 0:
            assert data.f_poly.degree == 2 * q
            assert data.f_poly.leading == pytest.approx(-1.0 / prod_a**2, rel=1e-6)
            continue
        ap0, ap = op.bg.a0(p), op.a(p)
        if op.pert.u[p] != 0.0:
            assert data.f_poly.degree == 2 * p + 2 * q - 1
            want = -op.pert.v[0] * (ap0**2 - ap**2) / (prod_a**2 * big_q**2)
        else:
            assert data.f_poly.degree == 2 * p + 2 * q - 2
            want = op.pert.v[0] * op.pert.v[p] * ap0**2 / (prod_a**2 * big_q**2)
            if p == 1:
                want -= 1.0 / prod_a**2
        assert data.f_poly.leading == pytest.approx(want, rel=1e-6)


def test_xi_growth_constant_high_precision():
    rng = np.random.default_rng(16)
    op = random_canonical(rng, qmax=3, pmax=3, mode=2)
    fund = fundamental_solutions(op.bg, nmax=max(op.bg.q + 2, op.p + 3))
    bands_scale = 1.0 + max(abs(c) for c in (op.bg.sum_b, 4.0 * max(op.bg.a)))
    data = build_xi_data(op, fund)
    lam = 1e3 * bands_scale
    got = xi_eval_mp(fund, data, lam, True, dps=120).real / lam**op.bg.q
    want = -op.prod_a0_support() / (op.bg.prod_a * op.prod_a_support())
    assert got == pytest.approx(want, rel=1e-2)
