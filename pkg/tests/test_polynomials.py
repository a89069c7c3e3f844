import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jacobiscatter import Poly, ZeroPolynomialError, from_roots


def test_add_cancellation():
    p = Poly([1.0, 1.0]) + Poly([1.0, -1.0])
    assert p.degree == 0 and p.coeff(0) == 2.0


def test_add_identity():
    p = Poly([3.0, -1.0, 2.0])
    assert (p + Poly()) == p
    assert (Poly() + p) == p


def test_add_degree_max():
    p = Poly([0.0, 0.0, 1.0]) + Poly([0.0, 1.0])
    assert p.degree == 2
    assert list(p.coeffs) == [0.0, 1.0, 1.0]


def test_mul_difference_of_squares():
    p = Poly([-1.0, 1.0]) * Poly([1.0, 1.0])
    assert list(p.coeffs) == [-1.0, 0.0, 1.0]


def test_mul_identity():
    p = Poly([2.0, 0.5, -3.0])
    assert p * Poly([1.0]) == p


def test_mul_pointwise_oracle():
    rng = np.random.default_rng(0)
    for _ in range(5):
        p = Poly(rng.uniform(-2, 2, rng.integers(1, 8)))
        q = Poly(rng.uniform(-2, 2, rng.integers(1, 8)))
        prod = p * q
        for lam in rng.uniform(-3, 3, 10):
            want = p(lam) * q(lam)
            assert abs(prod(lam) - want) <= 1e-12 * (1.0 + abs(want))


def test_eval_basics():
    p = Poly([-1.0, 0.0, 1.0])
    assert p(2.0) == 3.0
    assert p(1j) == -2.0 + 0.0j
    q = Poly([4.5, 1.0, -2.0, 0.25])
    assert q(0.0) == 4.5


def test_eval_real_stays_real():
    p = Poly([1.0, 2.0, 3.0])
    assert isinstance(p(1.5), float)


def test_derivative():
    assert list(Poly([0.0, 0.0, 1.0]).deriv().coeffs) == [0.0, 2.0]
    assert Poly([5.0]).deriv().is_zero()


def test_derivative_central_difference():
    rng = np.random.default_rng(1)
    p = Poly(rng.uniform(-2, 2, 7))
    d = p.deriv()
    h = 1e-6
    for lam in rng.uniform(-2, 2, 5):
        fd = (p(lam + h) - p(lam - h)) / (2 * h)
        assert abs(fd - d(lam)) <= 1e-7 * (1.0 + abs(d(lam)))


def test_derivative_linearity_and_product_rule():
    rng = np.random.default_rng(2)
    p = Poly(rng.uniform(-2, 2, 6))
    q = Poly(rng.uniform(-2, 2, 5))
    lin = (p + q).deriv()
    prod = (p * q).deriv()
    for lam in rng.uniform(-2, 2, 8):
        assert abs(lin(lam) - (p.deriv()(lam) + q.deriv()(lam))) <= 1e-11 * (1 + abs(lin(lam)))
        want = p.deriv()(lam) * q(lam) + p(lam) * q.deriv()(lam)
        assert abs(prod(lam) - want) <= 1e-10 * (1 + abs(want))


def test_roots_simple_pair():
    got = dict(Poly([-1.0, 0.0, 1.0]).roots())
    assert got == {(-1 + 0j): 1, (1 + 0j): 1}


def test_roots_double():
    got = Poly([4.0, -4.0, 1.0]).roots()
    assert len(got) == 1
    (r, m), = got
    assert m == 2 and abs(r - 2.0) < 1e-6


def test_roots_free_lattice_discriminant():
    # Delta = lam/2 for the free lattice, so Delta^2 - 1 has roots +-2
    delta = Poly([0.0, 0.5])
    got = sorted(r.real for r, m in (delta * delta - 1.0).roots())
    assert np.allclose(got, [-2.0, 2.0], atol=1e-12)


def test_roots_zero_polynomial_raises():
    with pytest.raises(ZeroPolynomialError, match="identically zero"):
        Poly().roots()


def test_roots_conjugate_pairs():
    p = Poly([1.0, 0.0, 0.0, 0.0, 1.0])  # lam^4 + 1
    roots = Poly(p.coeffs).roots()
    ups = sorted(r for r, _ in roots if r.imag > 0)
    downs = sorted(r for r, _ in roots if r.imag < 0)
    assert len(ups) == 2 and len(downs) == 2
    for r in ups:
        assert r.conjugate() in [d for d in downs]


@settings(max_examples=30, deadline=None)
@given(
    st.lists(st.floats(min_value=-2, max_value=2), min_size=2, max_size=13).filter(
        lambda c: abs(c[-1]) > 1e-3
    )
)
def test_roots_reconstruct_polynomial(coeffs):
    p = Poly(coeffs)
    if p.degree < 1:
        return
    rebuilt = from_roots(p.roots(), leading=p.leading)
    rng = np.random.default_rng(7)
    for lam in rng.uniform(-2.5, 2.5, 20):
        scale = max(1.0, float(np.sum(np.abs(p.coeffs) * np.abs(lam) ** np.arange(p.degree + 1))))
        assert abs(rebuilt(lam) - p(lam)) <= 1e-8 * scale


@settings(max_examples=30, deadline=None)
@given(
    st.lists(st.floats(min_value=-3, max_value=3), min_size=1, max_size=7),
    st.lists(st.floats(min_value=-3, max_value=3), min_size=1, max_size=7),
    st.floats(min_value=-3, max_value=3),
)
def test_mul_eval_homomorphism(c1, c2, lam):
    p, q = Poly(c1), Poly(c2)
    want = p(lam) * q(lam)
    assert abs((p * q)(lam) - want) <= 1e-12 * (1.0 + abs(want))


def test_immutable():
    p = Poly([1.0, 2.0])
    with pytest.raises(AttributeError):
        p.coeffs = np.array([3.0])
    with pytest.raises(ValueError):
        p.coeffs[0] = 5.0
