"""Small-perturbation asymptotics and large-energy leading coefficients.

For a pure diagonal perturbation scaled by t, the two real states that split
off each open gap edge move like lam(t) = edge + t^2 * c + O(t^3) with
c = J1^2 / (4 (Delta^2)'(edge)), and the side of the surface they land on is
decided by the sign of (-1)^(q-n+1) J at the state.  J1 admits three
equivalent expressions (Bloch-amplitude sum, polynomial site sum, shifted
sine-type solutions); all are exposed and cross-checked.

The large-energy block predicts the degree and leading coefficient of the
state polynomial and the growth constants of the sheet function.  The
verified constants are

    xi_physical    ~ -lam^q  * P / (A * Q)
    F (u_p != 0)   ~  lam^(2p+2q-1) * v_0 (a_p~^2 - a_p^2) / (A^2 Q^2)
    F (u_p  = 0)   ~  lam^(2p+2q-2) * v_0 v_p a_p^2 / (A^2 Q^2)     (p >= 2)

with A = prod of one period of a, P/Q = products of unperturbed/perturbed
off-diagonals over the support.  For p <= 1 the unperturbed -lam^(2q)/A^2
term enters at the same order and is included.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .background import (
    BandStructure,
    FundamentalPair,
    PeriodicBackground,
    SheetPoint,
    band_structure,
    fundamental_solutions,
)
from .errors import InputError, NumericalError
from .jost import PerturbedOperator, Perturbation, XiData, build_xi_data, xi_eval_mp
from .polynomials import Poly
from .states import BOUND, ANTIBOUND


# ---------------------------------------------------------------------------
# first-order coefficient J1
# ---------------------------------------------------------------------------

def site_weight_poly(fund: FundamentalPair, k: int) -> Poly:
    """phi_q psi_k^+ psi_k^- as a polynomial:
    phi_q theta_k^2 + 2 phi theta_k phi_k - theta_{q+1} phi_k^2."""
    th, ph = fund.theta(k), fund.phi(k)
    return (
        fund.phi_q * th.square()
        + 2.0 * (fund.weyl_phi * (th * ph))
        - fund.theta_q1 * ph.square()
    )


def j1_polynomial(bg: PeriodicBackground, fund: FundamentalPair, v) -> Poly:
    """J1(lam) = -(1/a_0) sum_k v_k (phi_q psi_k^+ psi_k^-)(lam)."""
    a00 = bg.a0(0)
    out = Poly()
    for k, vk in enumerate(v):
        if vk != 0.0:
            out = out + (-(vk / a00)) * site_weight_poly(fund, k)
    return out


def shifted_sine_solution(bg: PeriodicBackground, j: int, n: int | None = None) -> Poly:
    """Sine-type solution of the j-shifted period problem, value at index n
    (default q): seeds y_0 = 0, y_1 = 1 under the shifted coefficients."""
    q = bg.q
    n = q if n is None else n
    ym1, y = Poly([0.0]), Poly([1.0])
    for k in range(1, n):
        ym1, y = y, (Poly([-bg.b0(k + j), 1.0]) * y - bg.a0(k + j - 1) * ym1) / bg.a0(k + j)
    return y


def j1_shifted_form(bg: PeriodicBackground, v) -> Poly:
    """J1 via shifted solutions: -sum_k (v_k / a_k) phi_q^(k)."""
    out = Poly()
    for k, vk in enumerate(v):
        if vk != 0.0:
            out = out + (-(vk / bg.a0(k))) * shifted_sine_solution(bg, k)
    return out


def j1_at_edge(
    bg: PeriodicBackground,
    fund: FundamentalPair,
    bands: BandStructure,
    v,
    gap_index: int,
    side: str,
    u=None,
) -> float:
    """J1 at the chosen edge of an open gap, via the Bloch-amplitude form.

    When the edge coincides with the Dirichlet point the amplitude form
    degenerates and the Neumann-polynomial form takes over.  Only diagonal
    perturbations are covered; a nonzero u is rejected.
    """
    v = tuple(float(x) for x in v)
    if u is not None and any(float(x) != 0.0 for x in u):
        raise InputError("theorem requires u=0")
    if gap_index in bands.closed_gaps:
        raise InputError(f"gap {gap_index} is closed")
    if side not in ("minus", "plus"):
        raise InputError("side must be 'minus' or 'plus'")
    edge = bands.lam_minus(gap_index) if side == "minus" else bands.lam_plus(gap_index)
    a00 = bg.a0(0)
    scale = bands.edge_scale()
    mu = bands.mu[gap_index - 1] if 1 <= gap_index <= bg.q - 1 else None
    if mu is not None and abs(edge - mu) < 1e-8 * scale:
        acc = 0.0
        for k, vk in enumerate(v):
            acc += vk * fund.phi(k)(mu) ** 2
        return float(fund.theta_q1(mu) / a00 * acc)
    phi_q_e = fund.phi_q(edge)
    ratio = fund.weyl_phi(edge) / phi_q_e
    acc = 0.0
    for k, vk in enumerate(v):
        amp = fund.theta(k)(edge) + ratio * fund.phi(k)(edge)
        acc += vk * amp * amp
    return float(-phi_q_e / a00 * acc)


# ---------------------------------------------------------------------------
# small-t predictions and their verification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SmallTPrediction:
    gap_index: int
    side: str                  # 'minus' | 'plus'
    edge: float
    j1: float
    delta_sq_prime: float      # (Delta^2)'(edge)
    second_order: float        # J1^2 / (4 (Delta^2)')
    predicted_kind: str        # bound | antibound | virtual


def small_t_prediction(
    bg: PeriodicBackground,
    fund: FundamentalPair,
    bands: BandStructure,
    v,
    gap_index: int,
    side: str,
) -> SmallTPrediction:
    edge = bands.lam_minus(gap_index) if side == "minus" else bands.lam_plus(gap_index)
    j1 = j1_at_edge(bg, fund, bands, v, gap_index, side)
    d2p = (fund.delta.square()).deriv()(edge)
    if side == "minus" and not d2p > 0.0:
        raise NumericalError(f"(Delta^2)' must be positive at the left edge, got {d2p}")
    if side == "plus" and not d2p < 0.0:
        raise NumericalError(f"(Delta^2)' must be negative at the right edge, got {d2p}")
    sign = (-1.0) ** (bg.q - gap_index + 1) * j1
    kind = BOUND if sign > 0 else (ANTIBOUND if sign < 0 else "virtual")
    return SmallTPrediction(
        gap_index=gap_index,
        side=side,
        edge=float(edge),
        j1=float(j1),
        delta_sq_prime=float(d2p),
        second_order=float(j1 * j1 / (4.0 * d2p)),
        predicted_kind=kind,
    )


@dataclass(frozen=True)
class SmallTRow:
    t: float
    lam_minus: float
    lam_plus: float
    kind_minus: str
    kind_plus: str


@dataclass(frozen=True)
class SmallTComparison:
    gap_index: int
    prediction_minus: SmallTPrediction
    prediction_plus: SmallTPrediction
    rows: tuple[SmallTRow, ...]
    fitted_minus: float
    fitted_plus: float
    straddle_ok: bool
    kinds_match: bool

    def rel_err(self, side: str) -> float:
        pred = self.prediction_minus if side == "minus" else self.prediction_plus
        fit = self.fitted_minus if side == "minus" else self.fitted_plus
        return abs(fit - pred.second_order) / max(abs(pred.second_order), 1e-300)


def _two_gap_states_mp(fund, data: XiData, bands: BandStructure, gap_index: int):
    """The two real states in the closure of an open gap, in high precision.

    Roots of the state polynomial taken from its double coefficients are too
    noisy near band edges to resolve O(t^2) displacements, so the candidates
    (global roots plus the two edges as seeds) are Newton-polished against the
    product 4(1-Delta^2)(1+A)^2 + J^2 evaluated exactly from the stored A, J.
    Returns [(position, kind), ...] sorted, classified by sheet distances.
    """
    import mpmath

    from .states import _sheet_distances

    lo, hi = bands.lam_minus(gap_index), bands.lam_plus(gap_index)
    width = hi - lo
    seeds = [lo, hi]
    for r, m in data.f_poly.roots():
        if r.imag == 0.0 and lo - 0.05 * width < r.real < hi + 0.05 * width:
            seeds.append(r.real)

    def product_poly(x):
        d = fund.delta.eval_mp(x, mpmath)
        one_a = 1 + data.a_poly.eval_mp(x, mpmath)
        j = data.j_poly.eval_mp(x, mpmath)
        return 4 * (1 - d * d) * one_a * one_a + j * j

    found: list[float] = []
    with mpmath.workdps(50):
        h = mpmath.mpf(1e-9) * (1 + abs(lo) + abs(hi))
        for seed in seeds:
            x = mpmath.mpf(seed)
            ok = False
            for _ in range(60):
                f0 = product_poly(x)
                d0 = (product_poly(x + h) - product_poly(x - h)) / (2 * h)
                if d0 == 0:
                    break
                step = f0 / d0
                x = x - step
                if not (lo - width < x < hi + width):
                    break
                if abs(step) < mpmath.mpf(1e-25) * (1 + abs(x)):
                    ok = True
                    break
            if ok and lo - 1e-9 * width <= x <= hi + 1e-9 * width:
                xf = float(x)
                if all(abs(xf - y) > 1e-6 * width for y in found):
                    found.append(xf)
    if len(found) != 2:
        raise NumericalError(
            f"expected exactly two simple real states in gap {gap_index}, found {len(found)}"
        )
    found.sort()
    out = []
    for xf in found:
        d_phys, d_nonp = _sheet_distances(fund, data, xf)
        out.append((xf, BOUND if d_phys < d_nonp else ANTIBOUND))
    return out


def predict_and_verify_small_t(
    bg: PeriodicBackground,
    v,
    gap_index: int,
    t_grid=(1e-3, 5e-4, 2.5e-4),
    t_floor: float = 1e-6,
) -> SmallTComparison:
    """Run the full pipeline at scaled perturbations t*v and compare the
    measured quadratic edge motion with the predicted coefficient.

    Uses three-point Richardson in t (the remainder is O(t^3)); if a t value
    yields anything but two simple straddling states it is retried at t/4
    down to t_floor.
    """
    v = tuple(float(x) for x in v)
    p = len(v) - 1
    fund = fundamental_solutions(bg, nmax=p + 3)
    bands = band_structure(bg, fund)
    if gap_index in bands.closed_gaps or not (1 <= gap_index <= bg.q - 1):
        raise InputError(f"gap {gap_index} is not an open finite gap")
    pred_m = small_t_prediction(bg, fund, bands, v, gap_index, "minus")
    pred_p = small_t_prediction(bg, fund, bands, v, gap_index, "plus")
    alpha_k = bands.alpha[gap_index - 1]
    lo_edge, hi_edge = bands.lam_minus(gap_index), bands.lam_plus(gap_index)

    rows: list[SmallTRow] = []
    coeff_m: list[float] = []
    coeff_p: list[float] = []
    straddle_ok = True
    kinds_match = True
    for t0 in t_grid:
        t = float(t0)
        while True:
            pert = Perturbation(p=p, u=(0.0,) * (p + 1), v=tuple(t * x for x in v))
            op = PerturbedOperator(bg, pert)
            data = build_xi_data(op, fund)
            try:
                (x_lo, kind_lo), (x_hi, kind_hi) = _two_gap_states_mp(
                    fund, data, bands, gap_index
                )
            except NumericalError:
                if t / 4.0 < t_floor:
                    raise
                t /= 4.0
                continue
            break
        straddle_ok &= x_lo < alpha_k < x_hi
        sgn = (-1.0) ** (bg.q - gap_index + 1)
        kinds_match &= (kind_lo == BOUND) == (sgn * data.j_poly(x_lo) > 0)
        kinds_match &= (kind_hi == BOUND) == (sgn * data.j_poly(x_hi) > 0)
        rows.append(
            SmallTRow(
                t=t,
                lam_minus=x_lo,
                lam_plus=x_hi,
                kind_minus=kind_lo,
                kind_plus=kind_hi,
            )
        )
        coeff_m.append((x_lo - lo_edge) / t**2)
        coeff_p.append((x_hi - hi_edge) / t**2)

    return SmallTComparison(
        gap_index=gap_index,
        prediction_minus=pred_m,
        prediction_plus=pred_p,
        rows=tuple(rows),
        fitted_minus=float(_richardson(rows, coeff_m)),
        fitted_plus=float(_richardson(rows, coeff_p)),
        straddle_ok=bool(straddle_ok),
        kinds_match=bool(kinds_match),
    )


def _richardson(rows, coeffs) -> float:
    """Extrapolate c(t) = c + O(t) to t -> 0 from successively halved t."""
    if len(coeffs) == 1:
        return coeffs[0]
    ts = [r.t for r in rows]
    extr = []
    for i in range(len(coeffs) - 1):
        ratio = ts[i] / ts[i + 1]
        extr.append((ratio * coeffs[i + 1] - coeffs[i]) / (ratio - 1.0))
    return extr[-1]


# ---------------------------------------------------------------------------
# large-energy leading coefficients
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LeadingCoefficients:
    degree_predicted: int
    degree_actual: int
    f_lead_predicted: float
    f_lead_actual: float
    f_lead_rel_err: float
    xi_phys_const_predicted: float
    xi_phys_const_measured: float
    xi_phys_rel_err: float
    xi_nonphys_const_predicted: float | None
    xi_nonphys_const_measured: float | None
    unperturbed: bool


def predicted_f_degree(op: PerturbedOperator) -> int:
    q, p = op.bg.q, op.p
    if p == 0:
        return 2 * q
    if op.pert.u[p] != 0.0:
        return 2 * p + 2 * q - 1
    return 2 * p + 2 * q - 2


def predicted_f_leading(op: PerturbedOperator) -> float:
    """Top coefficient of the state polynomial for a canonical perturbation."""
    q, p = op.bg.q, op.p
    prod_a = op.bg.prod_a
    big_q = op.prod_a_support()
    v0 = op.pert.v[0]
    if p == 0:
        return -1.0 / prod_a**2
    ap0 = op.bg.a0(p)
    ap = op.a(p)
    if op.pert.u[p] != 0.0:
        return -v0 * (ap0**2 - ap**2) / (prod_a**2 * big_q**2)
    vp = op.pert.v[p]
    lead = v0 * vp * ap0**2 / (prod_a**2 * big_q**2)
    if p == 1:
        lead -= 1.0 / prod_a**2
    return lead


def predicted_xi_constants(op: PerturbedOperator) -> tuple[float, int, float | None, int | None]:
    """(physical const, q) and, when meaningful, (nonphysical const, degree)."""
    q, p = op.bg.q, op.p
    prod_a = op.bg.prod_a
    big_p = op.prod_a0_support()
    big_q = op.prod_a_support()
    phys = -big_p / (prod_a * big_q)
    if not op.pert.canonical:
        return phys, q, None, None
    v0 = op.pert.v[0]
    if p == 0:
        return phys, q, big_q / (prod_a * big_p), q
    ap0, ap = op.bg.a0(p), op.a(p)
    if op.pert.u[p] != 0.0:
        return phys, q, v0 * (ap0**2 - ap**2) / (prod_a * big_p * big_q), 2 * p + q - 1
    vp = op.pert.v[p]
    if p == 1:
        a0t = op.a(0)
        return phys, q, (a0t**2 - v0 * vp) / (prod_a * op.bg.a0(0) * a0t), q
    return phys, q, -v0 * vp * ap0**2 / (prod_a * big_p * big_q), 2 * p + q - 2


def leading_coefficients(
    op: PerturbedOperator,
    fund: FundamentalPair,
    bands: BandStructure,
    data: XiData,
    lam_factor: float = 1e3,
) -> LeadingCoefficients:
    """Compare predictions against the assembled state polynomial and against
    high-precision evaluation of xi at a large energy."""
    if op.pert.is_trivial():
        f_act = data.f_poly
        want = -4.0 * fund.delta_sq_minus_1
        diff = max(
            abs(f_act.coeff(k) - want.coeff(k)) for k in range(max(f_act.degree, want.degree) + 1)
        )
        rel = diff / max(abs(want.leading), 1e-300)
        phys_pred = -1.0 / op.bg.prod_a
        lam_big = lam_factor * bands.edge_scale()
        xi_m = xi_eval_mp(fund, data, lam_big, True, dps=_dps_for(data, lam_big))
        meas = float(xi_m.real / lam_big**op.bg.q)
        return LeadingCoefficients(
            degree_predicted=2 * op.bg.q,
            degree_actual=f_act.degree,
            f_lead_predicted=want.leading,
            f_lead_actual=f_act.leading,
            f_lead_rel_err=rel,
            xi_phys_const_predicted=phys_pred,
            xi_phys_const_measured=meas,
            xi_phys_rel_err=abs(meas - phys_pred) / abs(phys_pred),
            xi_nonphys_const_predicted=None,
            xi_nonphys_const_measured=None,
            unperturbed=True,
        )
    if not op.pert.canonical:
        raise InputError("leading-coefficient predictions need a canonical perturbation")
    deg_pred = predicted_f_degree(op)
    lead_pred = predicted_f_leading(op)
    lead_act = data.f_poly.leading
    deg_act = data.f_poly.degree
    lam_big = lam_factor * bands.edge_scale()
    dps = _dps_for(data, lam_big)
    phys_pred, qdeg, nonp_pred, nonp_deg = predicted_xi_constants(op)
    xi_p = xi_eval_mp(fund, data, lam_big, True, dps=dps)
    meas_p = float(xi_p.real / lam_big**qdeg)
    meas_n = None
    if nonp_pred is not None:
        xi_n = xi_eval_mp(fund, data, lam_big, False, dps=dps)
        meas_n = float(xi_n.real / lam_big**nonp_deg)
    return LeadingCoefficients(
        degree_predicted=deg_pred,
        degree_actual=deg_act,
        f_lead_predicted=lead_pred,
        f_lead_actual=lead_act,
        f_lead_rel_err=abs(lead_act - lead_pred) / max(abs(lead_pred), 1e-300),
        xi_phys_const_predicted=phys_pred,
        xi_phys_const_measured=meas_p,
        xi_phys_rel_err=abs(meas_p - phys_pred) / abs(phys_pred),
        xi_nonphys_const_predicted=nonp_pred,
        xi_nonphys_const_measured=meas_n,
        unperturbed=False,
    )


def _dps_for(data: XiData, lam_big: float) -> int:
    deg = max(data.f_poly.degree, 1)
    return 40 + int(deg * math.log10(max(lam_big, 10.0)))
