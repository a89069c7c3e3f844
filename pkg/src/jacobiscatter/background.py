"""The unperturbed q-periodic Jacobi operator.

Fundamental solutions of the three-term recurrence, the discriminant (half
trace of the monodromy), band/gap structure, Dirichlet and Neumann points,
the two-sheeted square root, Floquet multipliers, quasimomentum, Weyl
functions and Bloch solutions.

Index conventions: the stored arrays hold one period a_1..a_q, b_1..b_q and
are extended periodically to all integers, so a_0 = a_q.  The physical sheet
is the one where the Floquet multiplier satisfies |z| <= 1; on the spectrum
itself the tie is broken by the limit from the upper half plane.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import DirichletPoleError, InputError, NumericalError
from .polynomials import Poly

#: relative imaginary offset used to break |z|=1 ties on the spectrum
_TIE_EPS = 1e-9

#: relative threshold below which |phi_q(lam)| counts as a Dirichlet pole
_POLE_REL = 1e-11


@dataclass(frozen=True)
class PeriodicBackground:
    """Period-q coefficient sequences a_n > 0 (off-diagonal) and b_n (diagonal)."""

    q: int
    a: tuple[float, ...]
    b: tuple[float, ...]

    def __post_init__(self):
        if self.q < 1:
            raise InputError("period q must be >= 1")
        if len(self.a) != self.q or len(self.b) != self.q:
            raise InputError(f"need exactly q={self.q} entries in a and b")
        if any(x <= 0 for x in self.a):
            raise InputError("all off-diagonal entries must be positive")
        object.__setattr__(self, "a", tuple(float(x) for x in self.a))
        object.__setattr__(self, "b", tuple(float(x) for x in self.b))

    def a0(self, n: int) -> float:
        """Periodic accessor, any integer site (a0(0) == a0(q))."""
        return self.a[(n - 1) % self.q]

    def b0(self, n: int) -> float:
        return self.b[(n - 1) % self.q]

    @property
    def prod_a(self) -> float:
        return float(np.prod(self.a))

    @property
    def sum_b(self) -> float:
        return float(np.sum(self.b))


class FundamentalPair:
    """Fundamental solutions theta, phi of the periodic recurrence as polynomials.

    theta_0 = 1, theta_1 = 0, phi_0 = 0, phi_1 = 1.  Any integer index is
    reachable through ensure(); the constructor covers 0..max(q+1, nmax).
    Extension mutates an internal cache, so pre-extend before sharing across
    threads.
    """

    def __init__(self, bg: PeriodicBackground, nmax: int | None = None):
        self.bg = bg
        self._theta: dict[int, Poly] = {0: Poly([1.0]), 1: Poly([0.0])}
        self._phi: dict[int, Poly] = {0: Poly([0.0]), 1: Poly([1.0])}
        self._lo, self._hi = 0, 1
        self.ensure(0, max(bg.q + 1, nmax if nmax is not None else 0))
        q = bg.q
        self.delta = (self._phi[q + 1] + self._theta[q]) / 2.0
        self.weyl_phi = (self._phi[q + 1] - self._theta[q]) / 2.0
        self.phi_q = self._phi[q]
        self.theta_q1 = self._theta[q + 1]
        self.delta_sq_minus_1 = self.delta.square() - 1.0

    def ensure(self, nmin: int, nmax: int) -> None:
        bg = self.bg
        while self._hi < nmax:
            n = self._hi
            fac = Poly([-bg.b0(n), 1.0])
            for d in (self._theta, self._phi):
                d[n + 1] = (fac * d[n] - bg.a0(n - 1) * d[n - 1]) / bg.a0(n)
            self._hi += 1
        while self._lo > nmin:
            n = self._lo
            fac = Poly([-bg.b0(n), 1.0])
            for d in (self._theta, self._phi):
                d[n - 1] = (fac * d[n] - bg.a0(n) * d[n + 1]) / bg.a0(n - 1)
            self._lo -= 1

    def theta(self, n: int) -> Poly:
        self.ensure(min(n, 0), max(n, 1))
        return self._theta[n]

    def phi(self, n: int) -> Poly:
        self.ensure(min(n, 0), max(n, 1))
        return self._phi[n]


def fundamental_solutions(bg: PeriodicBackground, nmax: int | None = None) -> FundamentalPair:
    """Run the forward recurrence in polynomial arithmetic from the seeds."""
    return FundamentalPair(bg, nmax)


@dataclass(frozen=True)
class SheetPoint:
    """A spectral parameter together with the sheet it lives on."""

    lam: complex
    physical: bool = True

    def flipped(self) -> "SheetPoint":
        return SheetPoint(self.lam, not self.physical)


@dataclass(frozen=True)
class BandStructure:
    """Band edges, gaps, Dirichlet/Neumann points and gap maxima of H0."""

    edges: tuple[float, ...]              # 2q values ascending, with multiplicity
    bands: tuple[tuple[float, float], ...]
    mu: tuple[float, ...]                 # Dirichlet points, one per finite gap closure
    nu: tuple[float, ...]                 # Neumann points
    alpha: tuple[float, ...]              # gap maxima locations, per finite gap
    h: tuple[float, ...]                  # cosh h_k = (-1)^(q-k) Delta(alpha_k)
    closed_gaps: frozenset[int]

    @property
    def q(self) -> int:
        return len(self.edges) // 2

    def lam_minus(self, k: int) -> float:
        """Left endpoint of gap k (k=1..q); lam_minus(q) is the top band edge."""
        return self.edges[2 * k - 1]

    def lam_plus(self, k: int) -> float:
        """Right endpoint of gap k (k=0..q-1); lam_plus(0) is the bottom edge."""
        return self.edges[2 * k]

    def finite_gaps(self) -> list[tuple[int, float, float]]:
        return [
            (k, self.lam_minus(k), self.lam_plus(k))
            for k in range(1, self.q)
            if k not in self.closed_gaps
        ]

    def gap_of(self, x: float) -> int | None:
        """Index of the open gap containing x strictly, 0 and q for the infinite
        ones; None if x is in a band or at an edge or in a closed gap."""
        if x < self.lam_plus(0):
            return 0
        if x > self.lam_minus(self.q):
            return self.q
        for k in range(1, self.q):
            if k not in self.closed_gaps and self.lam_minus(k) < x < self.lam_plus(k):
                return k
        return None

    def in_band_interior(self, x: float, margin: float = 0.0) -> bool:
        return any(lo + margin < x < hi - margin for lo, hi in self.bands)

    def open_gap_edges(self) -> list[tuple[int, float]]:
        """(gap index, edge value) for every edge bounding an open gap."""
        out = [(0, self.lam_plus(0)), (self.q, self.lam_minus(self.q))]
        for k, lo, hi in self.finite_gaps():
            out.append((k, lo))
            out.append((k, hi))
        return out

    def edge_scale(self) -> float:
        return 1.0 + max(abs(self.edges[0]), abs(self.edges[-1]))


def band_structure(bg: PeriodicBackground, fund: FundamentalPair, tol: float = 1e-8) -> BandStructure:
    """Edges from the roots of Delta^2 - 1, paired per the standard enumeration."""
    q = bg.q
    snap = 1e-7
    roots = fund.delta_sq_minus_1.roots(snap)
    edges: list[float] = []
    for r, m in roots:
        if r.imag != 0.0:
            raise NumericalError(
                f"background not a valid Jacobi period: complex edge {r!r}"
            )
        edges.extend([r.real] * m)
    edges.sort()
    if len(edges) != 2 * q:
        raise NumericalError("background not a valid Jacobi period: edge count")
    for j, e in enumerate(edges):
        k = (j + 1) // 2
        want = (-1.0) ** (q - k)
        if abs(fund.delta(e) - want) > 1e-9 * (1.0 + abs(want)):
            raise NumericalError(
                f"background not a valid Jacobi period: Delta({e}) != {want}"
            )
    bands = tuple((edges[2 * n], edges[2 * n + 1]) for n in range(q))

    closed = frozenset(
        k for k in range(1, q)
        if edges[2 * k] - edges[2 * k - 1] <= tol * (1.0 + abs(edges[2 * k]))
    )

    def _interval_points(poly: Poly) -> list[float]:
        if poly.degree < 1:
            return []
        pts = sorted(r for r, m in poly.real_roots(snap) for _ in range(m))
        if len(pts) != q - 1:
            raise NumericalError("Dirichlet/Neumann point count mismatch")
        # clamp tiny excursions back into the gap closure
        for i, x in enumerate(pts):
            k = i + 1
            lo, hi = edges[2 * k - 1], edges[2 * k]
            pts[i] = min(max(x, lo), hi)
        return pts

    mu = _interval_points(fund.phi_q)
    nu = _interval_points(fund.theta_q1)

    dprime = fund.delta.deriv()
    alpha: list[float] = []
    h: list[float] = []
    for k in range(1, q):
        lo, hi = edges[2 * k - 1], edges[2 * k]
        if k in closed:
            alpha.append(lo)
            h.append(0.0)
            continue
        sgn = (-1.0) ** (q - k)
        g = lambda x: sgn * dprime(x)
        a_, b_ = lo, hi
        ga, gb = g(a_), g(b_)
        if not (ga > 0.0 > gb):
            raise NumericalError(f"gap maximum bracketing failed in gap {k}")
        for _ in range(200):
            mid = 0.5 * (a_ + b_)
            gm = g(mid)
            if gm > 0.0:
                a_ = mid
            else:
                b_ = mid
            if b_ - a_ <= 1e-15 * (1.0 + abs(mid)):
                break
        ak = 0.5 * (a_ + b_)
        alpha.append(ak)
        h.append(float(np.arccosh(max(1.0, sgn * fund.delta(ak)))))

    return BandStructure(
        edges=tuple(edges),
        bands=bands,
        mu=tuple(mu),
        nu=tuple(nu),
        alpha=tuple(alpha),
        h=tuple(h),
        closed_gaps=closed,
    )


def sqrt_branch(fund: FundamentalPair, pt: SheetPoint) -> complex:
    """sqrt(Delta^2 - 1) on the requested sheet.

    The physical value is the one for which z = Delta + sqrt(Delta^2-1) has
    |z| <= 1; on the spectrum (where both candidates have |z| = 1) the choice
    is the limit from the upper half plane.  The nonphysical sheet negates.
    """
    lam = complex(pt.lam)
    d = fund.delta(lam)
    if lam.imag == 0.0:
        dr = d.real
        if abs(dr) < 1.0:
            # band interior: decide the sign at lam + i*eps and snap back
            eps = _TIE_EPS * (1.0 + abs(lam.real))
            s_off = _select_small(fund.delta(complex(lam.real, eps)))
            s = 1j * math.sqrt(1.0 - dr * dr)
            if s_off.imag < 0.0:
                s = -s
        elif abs(dr) == 1.0:
            s = 0.0 + 0.0j
        else:
            s = -cmath.sqrt(complex(dr * dr - 1.0, 0.0))
            if abs(d + s) > abs(d - s):
                s = -s
    else:
        s = _select_small(d)
    return s if pt.physical else -s


def _select_small(d: complex) -> complex:
    """Root s of s^2 = d^2-1 for which |d + s| <= 1."""
    s = cmath.sqrt(d * d - 1.0)
    if abs(d + s) > abs(d - s):
        s = -s
    return s


def floquet_multiplier(fund: FundamentalPair, pt: SheetPoint) -> complex:
    """z = Delta + sqrt(Delta^2-1), |z| <= 1 on the physical sheet.

    Computed through the reciprocal when the direct sum would cancel.
    """
    d = fund.delta(complex(pt.lam))
    s = sqrt_branch(fund, pt)
    direct = d + s
    other = d - s
    if abs(other) > abs(direct):
        return 1.0 / other
    return direct


def quasimomentum(
    fund: FundamentalPair, bands: BandStructure, lam: complex, physical: bool = True
) -> complex:
    """kappa with exp(i q kappa) = z.

    On gap k the real part is pinned to (q-k)pi/q with Im kappa >= 0 on the
    physical sheet; on band interiors kappa is real and interpolates the
    neighbouring gap values.  Off the real axis the principal branch is
    reduced so that Re kappa lies in [0, pi].
    """
    q = bands.q
    z = floquet_multiplier(fund, SheetPoint(lam, physical))
    lamc = complex(lam)
    if lamc.imag == 0.0:
        x = lamc.real
        k = bands.gap_of(x)
        if k is None and not bands.in_band_interior(x):
            # edge or closed-gap point; |z| = 1 there so only Re kappa matters
            for kc in bands.closed_gaps:
                if abs(x - bands.lam_minus(kc)) <= 1e-12 * bands.edge_scale():
                    k = kc
                    break
            else:
                k = _nearest_gap(bands, x)
        if k is not None:
            v = -math.log(abs(z)) / q
            return complex((q - k) * math.pi / q, v)
        n = next(i + 1 for i, (lo, hi) in enumerate(bands.bands) if lo <= x <= hi)
        d = fund.delta(x).real
        arg = min(1.0, max(-1.0, (-1.0) ** (q - n) * d))
        return complex(((q - n) * math.pi + math.acos(arg)) / q, 0.0)
    kappa = -1j * cmath.log(z) / q
    while kappa.real < 0.0:
        kappa += 2.0 * math.pi / q
    while kappa.real > math.pi:
        kappa -= 2.0 * math.pi / q
    return kappa


def _nearest_gap(bands: BandStructure, x: float) -> int | None:
    best, dist = None, math.inf
    for k, e in bands.open_gap_edges():
        if abs(x - e) < dist:
            best, dist = k, abs(x - e)
    return best


def weyl_m(fund: FundamentalPair, pt: SheetPoint) -> complex:
    """Weyl function on the given sheet: (phi + sqrt(Delta^2-1)) / phi_q.

    The physical sheet carries the decaying branch m_+, the nonphysical sheet
    the growing one.  Raises at Dirichlet poles.
    """
    lam = complex(pt.lam)
    den = fund.phi_q(lam)
    scale = float(np.sum(np.abs(fund.phi_q.coeffs) * np.abs(lam) ** np.arange(fund.phi_q.coeffs.size))) or 1.0
    if abs(den) < _POLE_REL * scale:
        raise DirichletPoleError(f"Dirichlet pole at lambda={lam}")
    return (fund.weyl_phi(lam) + sqrt_branch(fund, pt)) / den


def bloch_solution(fund: FundamentalPair, pt: SheetPoint, n: int) -> complex:
    """psi_n = theta_n + m phi_n on the requested sheet; psi_0 = 1."""
    m = weyl_m(fund, pt)
    lam = complex(pt.lam)
    return fund.theta(n)(lam) + m * fund.phi(n)(lam)
