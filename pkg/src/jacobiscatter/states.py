"""Locating and classifying states: bound, antibound, resonances, virtual.

All states of H are roots of the state polynomial F; each root is placed on
the two-sheeted surface by comparing the sheet residuals of xi, except for
roots at open-gap edges (virtual states) and for the double roots sitting at
closed-gap points, which are excluded from the count.  An independent
finite-section eigenvalue oracle cross-checks the bound states.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .background import BandStructure, FundamentalPair, SheetPoint
from .errors import AmbiguousSheetError, NumericalError, StateCountError
from .jost import PerturbedOperator, XiData, xi_eval_mp

PHYSICAL = "physical"
NONPHYSICAL = "nonphysical"
EDGE = "edge"

BOUND = "bound"
ANTIBOUND = "antibound"
RESONANCE = "resonance"
VIRTUAL = "virtual"


@dataclass(frozen=True)
class State:
    """A classified zero of the sheet function."""

    lam: complex
    sheet: str
    kind: str
    multiplicity: int
    gap_index: int | None = None
    residual_physical: float | None = None
    residual_nonphysical: float | None = None


@dataclass(frozen=True)
class StateReport:
    states: tuple[State, ...]
    total_with_multiplicity: int
    expected_total: int | None
    bound_count: int
    per_gap_counts: dict[int, int]
    closed_gap_exclusions: int
    degree_f: int
    canonical: bool

    def bound_states(self) -> list[State]:
        return [s for s in self.states if s.kind == BOUND]


def _sheet_distances(fund, data: XiData, x: float) -> tuple[float, float]:
    """Newton-step distance |xi / xi'| to the nearest zero of xi, per sheet.

    Evaluated in high precision: in double arithmetic xi at a gap root is
    cancellation noise, and for far-out states the rounding of the state
    polynomial shifts its root off the true zero of xi by more than the
    achievable |xi| floor, so plain residual magnitudes cannot separate the
    sheets.  The step distance is scale-free and tolerates both effects.
    """
    h = 1e-7 * (1.0 + abs(x))
    dps = 40 + int((data.f_poly.degree + 2) * math.log10(1.0 + abs(x) + h))
    out = []
    for physical in (True, False):
        f0 = xi_eval_mp(fund, data, x, physical, dps=dps)
        fp = xi_eval_mp(fund, data, x + h, physical, dps=dps)
        fm = xi_eval_mp(fund, data, x - h, physical, dps=dps)
        deriv = (fp - fm) / (2.0 * h)
        out.append(math.inf if deriv == 0.0 else abs(f0 / deriv))
    return out[0], out[1]


def expected_state_total(op: PerturbedOperator) -> int | None:
    """Predicted degree of the state polynomial, canonical supports only.

    2p+2q-1 when the off-diagonal defect at site p survives, 2p+2q-2 when it
    does not; a pure diagonal defect on a single site (p=0) always yields 2q.
    Each closed gap binds two of these roots as excluded non-states, so the
    located state count is this number minus twice the closed-gap count.
    """
    if not op.pert.canonical:
        return None
    q = op.bg.q
    p = op.p
    if p == 0:
        return 2 * q
    if op.pert.u[p] != 0.0:
        return 2 * p + 2 * q - 1
    return 2 * p + 2 * q - 2


def locate_states(
    op: PerturbedOperator,
    fund: FundamentalPair,
    bands: BandStructure,
    data: XiData,
    tol: float = 1e-7,
    edge_snap: float = 1e-7,
    ratio_min: float = 1e3,
    closed_snap: float = 1e-6,
) -> StateReport:
    """Roots of F classified on the surface.

    Classification of a real gap root: evaluate xi on both sheets and assign
    to the sheet with the (much) smaller normalized residual; the dichotomy
    is enforced by requiring the residual ratio to exceed ratio_min.
    closed_snap is kept separate from edge_snap because double roots are only
    located to square-root-of-epsilon accuracy.
    """
    f_poly = data.f_poly
    degree_f = f_poly.degree
    roots = f_poly.roots(tol)

    closed_points = [(k, bands.lam_minus(k)) for k in sorted(bands.closed_gaps)]
    edge_points = bands.open_gap_edges()
    scale_of = lambda x: 1.0 + abs(x)

    states: list[State] = []
    exclusions = 0

    for root, mult in roots:
        if root.imag != 0.0:
            states.append(
                State(lam=root, sheet=NONPHYSICAL, kind=RESONANCE, multiplicity=mult)
            )
            continue
        x = root.real
        excluded = False
        for k, pt in closed_points:
            if abs(x - pt) <= closed_snap * scale_of(pt):
                if mult < 2:
                    raise NumericalError(
                        f"expected a double zero at the closed-gap point {pt}, got multiplicity {mult}"
                    )
                exclusions += 2
                if mult > 2:
                    raise NumericalError(
                        f"state of multiplicity {mult - 2} at the closed-gap point {pt} cannot be classified"
                    )
                excluded = True
                break
        if excluded:
            continue

        edge_hit = None
        for k, e in edge_points:
            if abs(x - e) <= edge_snap * scale_of(e):
                edge_hit = (k, e)
                break
        if edge_hit is not None:
            k, e = edge_hit
            states.append(
                State(lam=complex(e), sheet=EDGE, kind=VIRTUAL, multiplicity=mult, gap_index=k)
            )
            continue

        gap = bands.gap_of(x)
        if gap is None:
            raise NumericalError(
                f"real root {x} of the state polynomial lies inside a band "
                "(forbidden: F > 0 on band interiors)"
            )

        r_phys, r_nonp = _sheet_distances(fund, data, x)
        if min(r_phys, r_nonp) > 1e-5 * (1.0 + abs(x)):
            raise NumericalError(
                f"root {x} of the state polynomial is not near a zero of xi on either sheet"
            )
        lo, hi = min(r_phys, r_nonp), max(r_phys, r_nonp)
        ratio = math.inf if lo == 0.0 else hi / lo
        if ratio < ratio_min:
            raise AmbiguousSheetError(x, r_phys, r_nonp)
        physical = r_phys < r_nonp
        states.append(
            State(
                lam=complex(x),
                sheet=PHYSICAL if physical else NONPHYSICAL,
                kind=BOUND if physical else ANTIBOUND,
                multiplicity=mult,
                gap_index=gap,
                residual_physical=r_phys,
                residual_nonphysical=r_nonp,
            )
        )

    total = sum(s.multiplicity for s in states)
    if total + exclusions != degree_f:
        raise StateCountError(
            f"state count violation: {total} states + {exclusions} exclusions != deg F = {degree_f}"
        )
    expected = expected_state_total(op)
    if expected is not None and total + exclusions != expected:
        raise StateCountError(
            f"state count violation: located {total} (+{exclusions} closed-gap "
            f"exclusions), predicted degree {expected}"
        )

    per_gap: dict[int, int] = {}
    for s in states:
        if s.gap_index is not None and 1 <= s.gap_index <= op.bg.q - 1:
            per_gap[s.gap_index] = per_gap.get(s.gap_index, 0) + s.multiplicity

    return StateReport(
        states=tuple(sorted(states, key=lambda s: (s.lam.real, s.lam.imag))),
        total_with_multiplicity=total,
        expected_total=expected,
        bound_count=sum(s.multiplicity for s in states if s.kind == BOUND),
        per_gap_counts=per_gap,
        closed_gap_exclusions=exclusions,
        degree_f=degree_f,
        canonical=op.pert.canonical,
    )


def _truncated_gap_eigs(
    op: PerturbedOperator, bands: BandStructure, n_sites: int, margin: float
) -> np.ndarray:
    """Eigenvalues of the (2N+1)-section of H lying in open gaps (margin off edges).

    Eigenvectors are inspected and eigenvalues carried by states localized at
    the artificial boundaries (surface states of the cut, stable under
    N -> 2N) are discarded; genuine bound states localize around the
    perturbation support in the middle.
    """
    sites = np.arange(-n_sites, n_sites + 1)
    diag = np.array([op.b(int(n)) for n in sites])
    off = np.array([op.a(int(n)) for n in sites[:-1]])
    found: list[float] = []
    lo_bound = diag.min() - 2.0 * off.max() - 1.0
    hi_bound = diag.max() + 2.0 * off.max() + 1.0
    windows = [(lo_bound, bands.lam_plus(0) - margin), (bands.lam_minus(bands.q) + margin, hi_bound)]
    windows += [(lo + margin, hi - margin) for _, lo, hi in bands.finite_gaps()]
    half = n_sites // 2
    mid = (np.abs(sites) <= half)
    for lo, hi in windows:
        if hi <= lo:
            continue
        vals, vecs = eigh_tridiagonal(diag, off, select="v", select_range=(lo, hi))
        for v, vec in zip(vals, vecs.T):
            if float(np.sum(vec[mid] ** 2)) >= 0.5:
                found.append(float(v))
    return np.sort(np.array(found))


def oracle_bound_states(
    op: PerturbedOperator,
    bands: BandStructure,
    n_sites: int = 2000,
    stable_tol: float = 1e-6,
    margin_rel: float = 1e-7,
) -> list[float]:
    """Gap eigenvalues of the finite section of H, stability-filtered.

    An eigenvalue is trusted only if the runs at N and 2N sites agree within
    stable_tol; this rejects truncation artifacts near band edges.
    """
    margin = margin_rel * bands.edge_scale()
    eigs_n = _truncated_gap_eigs(op, bands, n_sites, margin)
    eigs_2n = _truncated_gap_eigs(op, bands, 2 * n_sites, margin)
    stable = []
    for x in eigs_n:
        if eigs_2n.size and np.min(np.abs(eigs_2n - x)) <= stable_tol:
            stable.append(float(x))
    return stable
