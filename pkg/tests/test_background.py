import math

import numpy as np
import pytest

from jacobiscatter import (
    DirichletPoleError,
    InputError,
    PeriodicBackground,
    SheetPoint,
    band_structure,
    bloch_solution,
    floquet_multiplier,
    fundamental_solutions,
    quasimomentum,
    sqrt_branch,
    weyl_m,
)

from conftest import pipeline, random_background

GOLDEN = (3.0 - math.sqrt(5.0)) / 2.0  # Floquet multiplier of the free lattice at 3


def test_background_validation():
    with pytest.raises(InputError):
        PeriodicBackground(q=2, a=(1.0,), b=(0.0, 0.0))
    with pytest.raises(InputError):
        PeriodicBackground(q=1, a=(-1.0,), b=(0.0,))


def test_periodic_accessor():
    bg = PeriodicBackground(q=2, a=(1.5, 0.7), b=(0.2, -0.3))
    assert bg.a0(0) == bg.a0(2) == 0.7  # a_0 = a_q
    assert bg.a0(1) == bg.a0(3) == 1.5
    assert bg.b0(-1) == bg.b0(1) == 0.2
    assert bg.prod_a == pytest.approx(1.05)


def test_free_fundamental_solutions(free_bg):
    fund = fundamental_solutions(free_bg, nmax=3)
    assert list(fund.phi(2).coeffs) == [0.0, 1.0]
    assert fund.theta(1).is_zero()
    assert list(fund.theta(2).coeffs) == [-1.0]
    assert list(fund.delta.coeffs) == [0.0, 0.5]


def test_initial_conditions(q3_bg):
    fund = fundamental_solutions(q3_bg)
    assert fund.theta(0)(0.3) == 1.0
    assert fund.theta(1)(0.3) == 0.0
    assert fund.phi(0)(0.3) == 0.0
    assert fund.phi(1)(0.3) == 1.0


def test_q2_discriminant_by_hand(q2_bg):
    fund = fundamental_solutions(q2_bg)
    # two recurrence steps by hand give (lam^2 - lam - 2) / 2
    assert np.allclose(fund.delta.coeffs, [-1.0, -0.5, 0.5])


def test_recurrence_satisfied_at_random_points(q3_bg):
    rng = np.random.default_rng(3)
    fund = fundamental_solutions(q3_bg, nmax=8)
    for lam in rng.uniform(-3, 3, 5):
        for seq in (fund.theta, fund.phi):
            for n in range(1, 7):
                lhs = q3_bg.a0(n - 1) * seq(n - 1)(lam) + q3_bg.a0(n) * seq(n + 1)(lam) \
                    + q3_bg.b0(n) * seq(n)(lam)
                assert abs(lhs - lam * seq(n)(lam)) < 1e-10 * (1 + abs(lam * seq(n)(lam)))


def test_wronskian_constant(q3_bg):
    rng = np.random.default_rng(4)
    fund = fundamental_solutions(q3_bg, nmax=8)
    a00 = q3_bg.a0(0)
    for lam in rng.uniform(-3, 3, 10):
        for n in range(0, 7):
            w = q3_bg.a0(n) * (
                fund.theta(n)(lam) * fund.phi(n + 1)(lam)
                - fund.theta(n + 1)(lam) * fund.phi(n)(lam)
            )
            assert abs(w - a00) < 1e-10 * abs(a00)


def test_leading_coefficients_match_growth(q3_bg):
    fund = fundamental_solutions(q3_bg, nmax=6)
    denom = 1.0
    for n in range(2, 6):
        denom *= q3_bg.a0(n - 1)  # now a_1 ... a_{n-1}
        phi_n = fund.phi(n)
        assert phi_n.degree == n - 1
        assert phi_n.leading == pytest.approx(1.0 / denom, rel=1e-12)
        theta_n = fund.theta(n)
        assert theta_n.degree == n - 2
        assert theta_n.leading == pytest.approx(-q3_bg.a0(0) / denom, rel=1e-12)


def test_free_band_structure(free_bg):
    fund, bands = pipeline(free_bg)
    assert bands.edges == (-2.0, 2.0)
    assert bands.bands == ((-2.0, 2.0),)
    assert bands.mu == () and bands.nu == () and bands.alpha == ()


def test_q2_band_structure(q2_bg):
    fund, bands = pipeline(q2_bg)
    want = sorted([(1 - math.sqrt(17)) / 2, 0.0, 1.0, (1 + math.sqrt(17)) / 2])
    assert np.allclose(bands.edges, want, atol=1e-9)
    assert bands.finite_gaps() == [(1, pytest.approx(0.0, abs=1e-9), pytest.approx(1.0))]
    assert len(bands.mu) == 1 and abs(bands.mu[0] - 1.0) < 1e-9


def test_closed_gap_detection():
    bg = PeriodicBackground(q=2, a=(1.0, 1.0), b=(0.0, 0.0))
    fund, bands = pipeline(bg)
    assert bands.closed_gaps == {1}
    assert abs(bands.lam_minus(1)) < 1e-9 and abs(bands.lam_plus(1)) < 1e-9
    assert bands.h[0] == 0.0


def test_delta_at_edges_and_gap_h(q3_bg):
    fund, bands = pipeline(q3_bg)
    q = q3_bg.q
    for j, e in enumerate(bands.edges):
        k = (j + 1) // 2
        assert abs(fund.delta(e) - (-1.0) ** (q - k)) < 1e-9
    for k, lo, hi in bands.finite_gaps():
        ak, hk = bands.alpha[k - 1], bands.h[k - 1]
        assert lo <= ak <= hi
        assert hk > 0.0
        assert (-1.0) ** (q - k) * fund.delta(ak) == pytest.approx(math.cosh(hk), rel=1e-12)


def test_dirichlet_neumann_factorizations(q3_bg):
    rng = np.random.default_rng(5)
    fund, bands = pipeline(q3_bg)
    a00, prod_a = q3_bg.a0(0), q3_bg.prod_a
    for lam in rng.uniform(-4, 4, 10):
        lhs = fund.phi_q(lam)
        rhs = a00 / prod_a * np.prod([lam - m for m in bands.mu])
        assert abs(lhs - rhs) < 1e-8 * (1 + abs(rhs))
        lhs = fund.theta_q1(lam)
        rhs = -a00 / prod_a * np.prod([lam - m for m in bands.nu])
        assert abs(lhs - rhs) < 1e-8 * (1 + abs(rhs))


def test_sqrt_branch_free_golden(free_bg):
    fund, _ = pipeline(free_bg)
    s = sqrt_branch(fund, SheetPoint(3.0, physical=True))
    assert s == pytest.approx(-math.sqrt(5) / 2, rel=1e-14)
    assert sqrt_branch(fund, SheetPoint(3.0, physical=False)) == pytest.approx(math.sqrt(5) / 2)


def test_sqrt_branch_vanishes_at_edges(q2_bg):
    fund, bands = pipeline(q2_bg)
    for e in bands.edges:
        assert abs(sqrt_branch(fund, SheetPoint(e, True))) < 1e-7


def test_sqrt_branch_conjugate_symmetry(q3_bg):
    rng = np.random.default_rng(6)
    fund, _ = pipeline(q3_bg)
    for _ in range(8):
        lam = complex(rng.uniform(-3, 3), rng.uniform(0.1, 2))
        for phys in (True, False):
            a = sqrt_branch(fund, SheetPoint(lam, phys))
            b = sqrt_branch(fund, SheetPoint(lam.conjugate(), phys))
            assert abs(b - a.conjugate()) < 1e-12 * (1 + abs(a))


def test_floquet_multiplier(free_bg, q3_bg):
    fund, _ = pipeline(free_bg)
    assert floquet_multiplier(fund, SheetPoint(3.0, True)) == pytest.approx(GOLDEN, rel=1e-14)
    fund3, bands3 = pipeline(q3_bg)
    for e in bands3.edges:
        z = floquet_multiplier(fund3, SheetPoint(e, True))
        assert abs(abs(z) - 1.0) < 1e-7
    # |z| = 1 inside bands, physical modulus <= 1 everywhere
    for lo, hi in bands3.bands:
        x = 0.5 * (lo + hi)
        assert abs(abs(floquet_multiplier(fund3, SheetPoint(x, True))) - 1.0) < 1e-12
    rng = np.random.default_rng(7)
    for _ in range(10):
        lam = complex(rng.uniform(-3, 3), rng.uniform(0.05, 1.5))
        zp = floquet_multiplier(fund3, SheetPoint(lam, True))
        zn = floquet_multiplier(fund3, SheetPoint(lam, False))
        assert abs(zp) <= 1.0 + 1e-12
        assert abs(zn) >= 1.0 - 1e-12
        assert abs(zp * zn - 1.0) < 1e-10


def test_quasimomentum_regions(q3_bg):
    fund, bands = pipeline(q3_bg)
    q = q3_bg.q
    for lo, hi in bands.bands:
        kappa = quasimomentum(fund, bands, lo + 0.37 * (hi - lo), physical=True)
        assert abs(kappa.imag) < 1e-10
    for k, lo, hi in bands.finite_gaps():
        kappa = quasimomentum(fund, bands, lo + 0.4 * (hi - lo), physical=True)
        assert kappa.real == pytest.approx((q - k) * math.pi / q, rel=1e-12)
        assert kappa.imag > 0
        nonp = quasimomentum(fund, bands, lo + 0.4 * (hi - lo), physical=False)
        assert nonp.imag < 0
        # gap maximum: Im(q kappa) equals the arccosh height
        ak, hk = bands.alpha[k - 1], bands.h[k - 1]
        kap = quasimomentum(fund, bands, ak, physical=True)
        assert q * kap.imag == pytest.approx(hk, abs=1e-8)


def test_quasimomentum_free_beyond_spectrum(free_bg):
    fund, bands = pipeline(free_bg)
    kappa = quasimomentum(fund, bands, 3.0, physical=True)
    assert kappa.real == pytest.approx(0.0, abs=1e-14)
    assert kappa.imag == pytest.approx(-math.log(GOLDEN), rel=1e-12)


def test_weyl_m_free(free_bg):
    fund, _ = pipeline(free_bg)
    assert weyl_m(fund, SheetPoint(3.0, True)) == pytest.approx(GOLDEN, rel=1e-14)


def test_weyl_product_identity(q3_bg):
    rng = np.random.default_rng(8)
    fund, _ = pipeline(q3_bg)
    for _ in range(10):
        lam = complex(rng.uniform(-4, 4), rng.uniform(0.3, 1.5))
        mp_ = weyl_m(fund, SheetPoint(lam, True))
        mm_ = weyl_m(fund, SheetPoint(lam, False))
        want = -fund.theta_q1(lam) / fund.phi_q(lam)
        assert abs(mp_ * mm_ - want) < 1e-9 * (1 + abs(want))


def test_weyl_dirichlet_pole(q2_bg):
    fund, bands = pipeline(q2_bg)
    with pytest.raises(DirichletPoleError, match="Dirichlet pole"):
        weyl_m(fund, SheetPoint(bands.mu[0], True))


def test_bloch_solutions(free_bg, q3_bg):
    fund, _ = pipeline(free_bg)
    pt = SheetPoint(3.0, True)
    for n in range(-3, 6):
        assert bloch_solution(fund, pt, n) == pytest.approx(GOLDEN**n, rel=1e-10)
    fund3, _ = pipeline(q3_bg)
    rng = np.random.default_rng(9)
    for _ in range(5):
        lam = complex(rng.uniform(-3, 3), rng.uniform(0.3, 1.2))
        pt = SheetPoint(lam, True)
        z = floquet_multiplier(fund3, pt)
        assert bloch_solution(fund3, pt, 0) == pytest.approx(1.0)
        psi_q = bloch_solution(fund3, pt, q3_bg.q)
        assert abs(psi_q - z) < 1e-9 * (1 + abs(z))
        for n in (-2, 1, 4):
            lhs = bloch_solution(fund3, pt, n + q3_bg.q)
            rhs = z * bloch_solution(fund3, pt, n)
            assert abs(lhs - rhs) < 1e-9 * (1 + abs(rhs))
        # decay along the lattice off the spectrum
        assert abs(bloch_solution(fund3, pt, 12)) < abs(bloch_solution(fund3, pt, 3))


def test_weyl_phi_identity_random_backgrounds():
    rng = np.random.default_rng(10)
    for _ in range(5):
        bg = random_background(rng)
        fund = fundamental_solutions(bg)
        for lam in rng.uniform(-3, 3, 4):
            lhs = fund.weyl_phi(lam) ** 2 + 1.0 - fund.delta(lam) ** 2
            rhs = -fund.theta_q1(lam) * fund.phi_q(lam)
            assert abs(lhs - rhs) < 1e-9 * (1 + abs(rhs))


def test_invalid_background_rejected():
    # a genuinely complex "edge" cannot arise from a Jacobi period, so feed a
    # doctored fundamental pair by hand is overkill; instead check count guard
    bg = PeriodicBackground(q=2, a=(1.0, 1.0), b=(1.0, 0.0))
    fund = fundamental_solutions(bg)
    bands = band_structure(bg, fund)
    assert len(bands.edges) == 2 * bg.q
