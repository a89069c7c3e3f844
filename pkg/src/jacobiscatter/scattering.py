"""Scattering matrix on the bands and the resolvent kernel.

On the absolutely continuous spectrum the transmission and reflection
coefficients come out of two Wronskians of Jost solutions; the 2x2 scattering
matrix is unitary and its determinant equals conj(alpha)/alpha.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .background import BandStructure, FundamentalPair, SheetPoint, sqrt_branch
from .errors import InputError, NumericalError
from .jost import PerturbedOperator, jost_evaluate


@dataclass(frozen=True)
class ScatteringPoint:
    """S-matrix data at one energy inside a band."""

    lam: float
    t: complex
    r_plus: complex
    r_minus: complex
    alpha: complex
    beta_plus: complex
    beta_minus: complex

    @property
    def unitarity_defect(self) -> float:
        return max(
            abs(abs(self.t) ** 2 + abs(self.r_plus) ** 2 - 1.0),
            abs(abs(self.t) ** 2 + abs(self.r_minus) ** 2 - 1.0),
        )

    @property
    def det_s(self) -> complex:
        return self.t * self.t - self.r_plus * self.r_minus


def scattering_at(
    op: PerturbedOperator,
    fund: FundamentalPair,
    bands: BandStructure,
    lam: float,
    margin_rel: float = 1e-6,
) -> ScatteringPoint:
    """T, R+- at a band-interior energy from the physical-sheet limit.

    Rejects points outside the bands and points too close to band edges or
    Dirichlet points, where the Wronskian normalization degenerates.
    """
    lam = float(lam)
    margin = margin_rel * bands.edge_scale()
    if not bands.in_band_interior(lam):
        raise InputError(f"lambda={lam} is not in ac spectrum")
    if not bands.in_band_interior(lam, margin=margin):
        raise NumericalError(f"ill-conditioned point: lambda={lam} is too close to a band edge")
    if any(abs(lam - m) < margin for m in bands.mu):
        raise NumericalError(f"ill-conditioned point: lambda={lam} is too close to a Dirichlet point")

    ev = jost_evaluate(op, fund, SheetPoint(lam, physical=True))
    a00 = op.bg.a0(0)
    phi_q_val = fund.phi_q(lam)
    two_i_omega = 2.0 * sqrt_branch(fund, SheetPoint(lam, physical=True))
    alpha = ev.alpha
    # sign of beta_plus pinned by solving f- = alpha conj(f+) + beta_plus f+
    # directly; it also makes conj(beta+) = -beta- and det S = conj(a)/a hold
    beta_plus = phi_q_val * np.conjugate(ev.s) / (a00 * two_i_omega)
    beta_minus = phi_q_val * ev.s / (a00 * two_i_omega)
    t = 1.0 / alpha
    return ScatteringPoint(
        lam=lam,
        t=t,
        r_plus=beta_plus / alpha,
        r_minus=beta_minus / alpha,
        alpha=alpha,
        beta_plus=beta_plus,
        beta_minus=beta_minus,
    )


def band_sample(
    bands: BandStructure, count: int, margin_rel: float = 1e-4, rng=None
) -> list[float]:
    """Deterministic (or seeded) band-interior sample avoiding edges and
    Dirichlet points."""
    margin = margin_rel * bands.edge_scale()
    pts: list[float] = []
    widths = [hi - lo for lo, hi in bands.bands]
    total = sum(widths)
    for (lo, hi), wd in zip(bands.bands, widths):
        n = max(1, round(count * wd / total))
        if rng is None:
            xs = np.linspace(lo + 2 * margin, hi - 2 * margin, n)
        else:
            xs = rng.uniform(lo + 2 * margin, hi - 2 * margin, n)
        for x in xs:
            if all(abs(x - m) > 2 * margin for m in bands.mu):
                pts.append(float(x))
    return pts[:count] if len(pts) > count else pts


def resolvent_kernel(
    op: PerturbedOperator, fund: FundamentalPair, pt: SheetPoint, n: int, m: int
) -> complex:
    """Kernel of (H - lambda)^{-1} at sites (n, m): f_min(n) f_plus(m) / w.

    Symmetric in (n, m); requires lambda away from the states (w != 0).
    """
    if n > m:
        n, m = m, n
    lo, hi = min(n, -2), max(m, op.p + 2)
    ev = jost_evaluate(op, fund, pt, window=range(lo, hi + 1))
    wscale = 1.0 + abs(ev.fminus[0] * ev.fplus[1]) + abs(ev.fminus[1] * ev.fplus[0])
    if abs(ev.w) < 1e-10 * wscale:
        raise NumericalError(f"at a state: Wronskian vanished at lambda={pt.lam}")
    return ev.fminus[n] * ev.fplus[m] / ev.w


def truncated_resolvent_entry(
    op: PerturbedOperator, lam: complex, n: int, m: int, n_sites: int = 1000
) -> complex:
    """Dense-section oracle for the resolvent: banded solve of (H_N - lam) x = e_m."""
    sites = np.arange(-n_sites, n_sites + 1)
    size = sites.size
    ab = np.zeros((3, size), dtype=complex)
    ab[1, :] = np.array([op.b(int(s)) for s in sites]) - lam
    offs = np.array([op.a(int(s)) for s in sites[:-1]])
    ab[0, 1:] = offs
    ab[2, :-1] = offs
    rhs = np.zeros(size, dtype=complex)
    rhs[m + n_sites] = 1.0
    x = solve_banded((1, 1), ab, rhs)
    return complex(x[n + n_sites])
