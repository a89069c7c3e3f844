"""Perturbed operator, Jost solutions and the state polynomial.

The perturbation (u, v) lives on sites 0..p.  Two independent routes to the
same analytic object are kept side by side:

* a symbolic route that assembles the polynomials A and J from the perturbed
  fundamental solutions at sites 0 and 1, giving the sheet function
  xi = 2i*Omega*(1+A) - J and the state polynomial F = xi_+ * xi_- =
  4(1-Delta^2)(1+A)^2 + J^2 without any square roots;
* a numeric route through Jost solutions and Wronskians, used as a standing
  cross-check and for scattering quantities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath

from .background import (
    FundamentalPair,
    PeriodicBackground,
    SheetPoint,
    sqrt_branch,
    weyl_m,
)
from .errors import InputError
from .polynomials import Poly


@dataclass(frozen=True)
class Perturbation:
    """Finitely supported diagonal (v) and off-diagonal (u) defects on sites 0..p."""

    p: int
    u: tuple[float, ...]
    v: tuple[float, ...]

    def __post_init__(self):
        if self.p < 0:
            raise InputError("support endpoint p must be >= 0")
        if len(self.u) != self.p + 1 or len(self.v) != self.p + 1:
            raise InputError(f"u and v must have p+1 = {self.p + 1} entries")
        object.__setattr__(self, "u", tuple(float(x) for x in self.u))
        object.__setattr__(self, "v", tuple(float(x) for x in self.v))

    @property
    def canonical(self) -> bool:
        """True when v_0 != 0 and v_p != 0 (the support is genuinely 0..p)."""
        return self.v[0] != 0.0 and self.v[self.p] != 0.0

    def is_trivial(self) -> bool:
        return all(x == 0.0 for x in self.u) and all(x == 0.0 for x in self.v)


@dataclass(frozen=True)
class PerturbedOperator:
    """H = H0 + perturbation; accessors give the full coefficient sequences."""

    bg: PeriodicBackground
    pert: Perturbation

    def __post_init__(self):
        for j in range(self.pert.p + 1):
            if self.bg.a0(j) + self.pert.u[j] <= 0.0:
                raise InputError(f"perturbed off-diagonal at site {j} is not positive")

    def a(self, n: int) -> float:
        base = self.bg.a0(n)
        if 0 <= n <= self.pert.p:
            return base + self.pert.u[n]
        return base

    def b(self, n: int) -> float:
        base = self.bg.b0(n)
        if 0 <= n <= self.pert.p:
            return base + self.pert.v[n]
        return base

    @property
    def p(self) -> int:
        return self.pert.p

    def prod_a0_support(self) -> float:
        return math.prod(self.bg.a0(j) for j in range(self.p + 1))

    def prod_a_support(self) -> float:
        return math.prod(self.a(j) for j in range(self.p + 1))


@dataclass(frozen=True)
class XiData:
    """Polynomial data of the sheet function.

    a_poly is the real-part correction (Re alpha - 1 on the spectrum), j_poly
    the imaginary-part polynomial, f_poly the state polynomial whose roots
    enumerate all states, s_poly = f_poly - 4(1-Delta^2) the reflection part.
    theta0/theta1/phi0/phi1 are the perturbed fundamental solutions at sites
    0 and 1.
    """

    a_poly: Poly
    j_poly: Poly
    f_poly: Poly
    s_poly: Poly
    theta0: Poly
    theta1: Poly
    phi0: Poly
    phi1: Poly


def perturbed_tilde_solutions(
    op: PerturbedOperator, fund: FundamentalPair
) -> tuple[Poly, Poly, Poly, Poly]:
    """Perturbed fundamental solutions at sites 0 and 1.

    They agree with theta, phi above the support; the backward recurrence
    y_{n-1} = ((lam - b_n) y_n - a_n y_{n+1}) / a_{n-1} with the perturbed
    coefficients carries them down to site 0.
    """
    p = op.p
    fund.ensure(0, p + 2)
    th = {p + 1: fund.theta(p + 1), p + 2: fund.theta(p + 2)}
    ph = {p + 1: fund.phi(p + 1), p + 2: fund.phi(p + 2)}
    for n in range(p + 1, 0, -1):
        fac = Poly([-op.b(n), 1.0])
        for d in (th, ph):
            d[n - 1] = (fac * d[n] - op.a(n) * d[n + 1]) / op.a(n - 1)
    return th[0], th[1], ph[0], ph[1]


def build_xi_data(op: PerturbedOperator, fund: FundamentalPair) -> XiData:
    """Assemble A, J, F, S in polynomial arithmetic."""
    th0, th1, ph0, ph1 = perturbed_tilde_solutions(op, fund)
    a00 = op.bg.a0(0)
    r = op.a(0) / a00
    v0 = op.pert.v[0]
    phi_q = fund.phi_q
    theta_q1 = fund.theta_q1
    w_phi = fund.weyl_phi

    a_poly = 0.5 * ((r * ph1 - fund.phi(1)) + (v0 / a00) * ph0 + (th0 - fund.theta(0)))
    j_poly = -(
        r * (phi_q * th1)
        + w_phi * (r * ph1 - th0)
        + (v0 / a00) * (phi_q * th0 + w_phi * ph0)
        + theta_q1 * ph0
    )
    one_plus_a = a_poly + 1.0
    four_omega_sq = -4.0 * fund.delta_sq_minus_1  # 4(1 - Delta^2)
    addend1 = four_omega_sq * one_plus_a.square()
    addend2 = j_poly.square()
    f_poly = addend1 + addend2
    # the top degrees of the two addends cancel exactly; drop the leftover
    # rounding noise (relative to the addend size, not to F) so the degree of
    # F is honest
    noise = 1e-11 * max(
        float(max(abs(addend1.coeffs), default=0.0)),
        float(max(abs(addend2.coeffs), default=0.0)),
    )
    coeffs = list(f_poly.coeffs)
    while coeffs and abs(coeffs[-1]) < noise:
        coeffs.pop()
    f_poly = Poly(coeffs)
    s_poly = f_poly - four_omega_sq
    return XiData(
        a_poly=a_poly,
        j_poly=j_poly,
        f_poly=f_poly,
        s_poly=s_poly,
        theta0=th0,
        theta1=th1,
        phi0=ph0,
        phi1=ph1,
    )


def xi_eval(fund: FundamentalPair, data: XiData, pt: SheetPoint) -> complex:
    """xi = 2*sqrt(Delta^2-1)*(1+A) - J on the requested sheet."""
    lam = complex(pt.lam)
    s = sqrt_branch(fund, pt)
    return 2.0 * s * (1.0 + data.a_poly(lam)) - data.j_poly(lam)


def xi_eval_mp(
    fund: FundamentalPair, data: XiData, lam, physical: bool, dps: int = 60
) -> complex:
    """High-precision xi for cancellation-prone regimes (large |lambda|).

    The double-precision expression 2*S*(1+A) - J loses all digits once the
    top-degree terms of its two legs cancel, which is exactly the large-lambda
    regime probed by the asymptotic checks.
    """
    with mpmath.workdps(dps):
        lam_mp = mpmath.mpmathify(lam)
        d = fund.delta.eval_mp(lam_mp, mpmath)
        s = mpmath.sqrt(d * d - 1)
        if abs(d + s) > abs(d - s):
            s = -s
        if not physical:
            s = -s
        val = 2 * s * (1 + data.a_poly.eval_mp(lam_mp, mpmath)) - data.j_poly.eval_mp(
            lam_mp, mpmath
        )
        return complex(val)


@dataclass(frozen=True)
class JostEvaluation:
    """Jost solutions over a site window plus the derived Wronskian data."""

    lam: complex
    physical: bool
    fplus: dict[int, complex]
    fminus: dict[int, complex]
    w: complex
    s: complex
    alpha: complex
    xi: complex


def jost_evaluate(
    op: PerturbedOperator,
    fund: FundamentalPair,
    pt: SheetPoint,
    window: range = range(-2, 4),
) -> JostEvaluation:
    """Numeric Jost solutions by recurrence from Bloch seeds.

    f+ equals the decaying Bloch solution above the support and is carried
    backward; f- equals the opposite Bloch solution at sites <= 0 and is
    carried forward.  Wronskians use the perturbed weights:
    {f, g}_n = a_n (f_n g_{n+1} - f_{n+1} g_n).
    """
    lam = complex(pt.lam)
    p = op.p
    nmin = min(-2, min(window) - 1)
    nmax = max(p + 2, max(window) + 1)
    fund.ensure(nmin, nmax + 1)

    m_here = weyl_m(fund, pt)
    m_other = weyl_m(fund, pt.flipped())

    fplus: dict[int, complex] = {}
    for n in (p + 1, p + 2):
        fplus[n] = fund.theta(n)(lam) + m_here * fund.phi(n)(lam)
    for n in range(p + 1, nmin, -1):
        fplus[n - 1] = ((lam - op.b(n)) * fplus[n] - op.a(n) * fplus[n + 1]) / op.a(n - 1)
    for n in range(p + 2, nmax):
        fplus[n + 1] = ((lam - op.b(n)) * fplus[n] - op.a(n - 1) * fplus[n - 1]) / op.a(n)

    def _seeded_minus(m_val: complex) -> dict[int, complex]:
        g: dict[int, complex] = {}
        for n in (-1, 0):
            g[n] = fund.theta(n)(lam) + m_val * fund.phi(n)(lam)
        for n in range(0, nmax):
            g[n + 1] = ((lam - op.b(n)) * g[n] - op.a(n - 1) * g[n - 1]) / op.a(n)
        for n in range(-1, nmin, -1):
            g[n - 1] = ((lam - op.b(n)) * g[n] - op.a(n) * g[n + 1]) / op.a(n - 1)
        return g

    fminus = _seeded_minus(m_other)
    # conjugate-type companion of f-: same recurrence, seeded from the other branch
    fminus_star = _seeded_minus(m_here)

    def _wronskian(f: dict[int, complex], g: dict[int, complex], n: int) -> complex:
        return op.a(n) * (f[n] * g[n + 1] - f[n + 1] * g[n])

    w = _wronskian(fminus, fplus, 0)
    s = _wronskian(fplus, fminus_star, 0)

    a00 = op.bg.a0(0)
    phi_q_val = fund.phi_q(lam)
    two_i_omega = 2.0 * sqrt_branch(fund, pt)
    alpha = phi_q_val * w / (a00 * two_i_omega) if two_i_omega != 0.0 else complex("nan")
    xi = phi_q_val * w / a00
    return JostEvaluation(
        lam=lam,
        physical=pt.physical,
        fplus=fplus,
        fminus=fminus,
        w=w,
        s=s,
        alpha=alpha,
        xi=xi,
    )


