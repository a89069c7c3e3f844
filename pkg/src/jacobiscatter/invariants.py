"""Cross-checking battery: every identity the construction must satisfy.

Each check returns its worst measured deviation together with the tolerance
it is held to, so the battery doubles as the `verify` CLI task and as the
backbone of the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .background import (
    BandStructure,
    FundamentalPair,
    SheetPoint,
    band_structure,
    bloch_solution,
    floquet_multiplier,
    fundamental_solutions,
    quasimomentum,
    sqrt_branch,
    weyl_m,
)
from .errors import DirichletPoleError
from .jost import PerturbedOperator, build_xi_data, jost_evaluate, xi_eval
from .scattering import band_sample, resolvent_kernel, scattering_at, truncated_resolvent_entry
from .states import StateReport, locate_states, oracle_bound_states
from .asympt import leading_coefficients


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    measured: float
    threshold: float
    detail: str = ""


def _result(name: str, measured: float, threshold: float, detail: str = "") -> CheckResult:
    return CheckResult(name, bool(measured <= threshold), float(measured), float(threshold), detail)


def _rel(a, b) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1e-30)


def _band_exterior_points(bands: BandStructure, rng, count: int) -> list[complex]:
    s = bands.edge_scale()
    return [
        complex(rng.uniform(bands.edges[0] - s, bands.edges[-1] + s), rng.uniform(0.6, 1.5) * s)
        for _ in range(count)
    ]


def run_battery(
    op: PerturbedOperator,
    seed: int = 0,
    oracle_sites: int = 0,
    resolvent_sites: int = 1000,
) -> tuple[list[CheckResult], StateReport | None]:
    """Run every invariant on one instance.

    oracle_sites > 0 additionally compares bound states against the
    finite-section eigenvalue oracle at that truncation size.
    """
    rng = np.random.default_rng(seed)
    bg = op.bg
    q = bg.q
    fund = fundamental_solutions(bg, nmax=max(q + 2, op.p + 3))
    bands = band_structure(bg, fund)
    data = build_xi_data(op, fund)
    out: list[CheckResult] = []
    scale = bands.edge_scale()

    # -- background layer --------------------------------------------------
    lam_r = rng.uniform(bands.edges[0] - 1, bands.edges[-1] + 1, 10)
    worst = 0.0
    a00 = bg.a0(0)
    for n in range(0, 2 * q + 2):
        wr = bg.a0(n) * (
            fund.theta(n)(lam_r) * fund.phi(n + 1)(lam_r)
            - fund.theta(n + 1)(lam_r) * fund.phi(n)(lam_r)
        )
        worst = max(worst, float(np.max(np.abs(wr - a00))) / abs(a00))
    out.append(_result("wronskian_constant", worst, 1e-10))

    lam_c = [complex(rng.uniform(-2, 2) * scale, rng.uniform(-2, 2) * scale) for _ in range(20)]
    worst = max(
        _rel(
            fund.weyl_phi(z) ** 2 + 1.0 - fund.delta(z) ** 2,
            -fund.theta_q1(z) * fund.phi_q(z),
        )
        for z in lam_c
    )
    out.append(_result("discriminant_factor_identity", worst, 1e-9))

    worst = max(
        abs(fund.delta(e) - (-1.0) ** (q - (j + 1) // 2)) for j, e in enumerate(bands.edges)
    )
    out.append(_result("delta_at_edges", worst, 1e-9))

    out.append(
        _result(
            "edge_and_gap_count",
            0.0 if len(bands.edges) == 2 * q and len(bands.mu) == q - 1 else 1.0,
            0.5,
        )
    )

    worst = 0.0
    for z in lam_c[:10]:
        for phys in (True, False):
            pt = SheetPoint(z, phys)
            zmul = floquet_multiplier(fund, pt)
            worst = max(worst, _rel(2.0 * sqrt_branch(fund, pt), zmul - 1.0 / zmul))
    out.append(_result("two_i_omega_equals_z_minus_zinv", worst, 1e-9))

    worst = 0.0
    for z in lam_c[:10]:
        prod = floquet_multiplier(fund, SheetPoint(z, True)) * floquet_multiplier(
            fund, SheetPoint(z, False)
        )
        worst = max(worst, abs(prod - 1.0))
    out.append(_result("floquet_multipliers_reciprocal", worst, 1e-10))

    worst = 0.0
    for k, lo, hi in bands.finite_gaps():
        for frac in (0.11, 0.31, 0.52, 0.73, 0.9):
            x = lo + frac * (hi - lo)
            kappa = quasimomentum(fund, bands, x, physical=True)
            v = kappa.imag
            if v <= 0:
                worst = max(worst, 1.0)
                continue
            lhs = sqrt_branch(fund, SheetPoint(x, True))
            rhs = -((-1.0) ** (q - k)) * math.sinh(q * v)
            worst = max(worst, _rel(lhs, rhs))
            worst = max(worst, abs(kappa.real - (q - k) * math.pi / q))
    out.append(_result("gap_sqrt_sinh_identity", worst, 1e-8))

    worst = 0.0
    for k, lo, hi in bands.finite_gaps():
        ak = bands.alpha[k - 1]
        hk = bands.h[k - 1]
        kappa = quasimomentum(fund, bands, ak, physical=True)
        worst = max(worst, abs(q * kappa.imag - hk))
    out.append(_result("gap_maximum_quasimomentum", worst, 1e-8))

    worst = 0.0
    for x in band_sample(bands, 8, rng=rng):
        kappa = quasimomentum(fund, bands, x, physical=True)
        worst = max(worst, abs(kappa.imag))
    out.append(_result("band_quasimomentum_real", worst, 1e-10))

    worst = 0.0
    for z in _band_exterior_points(bands, rng, 10):
        try:
            mp_ = weyl_m(fund, SheetPoint(z, True))
            mm_ = weyl_m(fund, SheetPoint(z, False))
        except DirichletPoleError:
            continue
        worst = max(worst, _rel(mp_ * mm_, -fund.theta_q1(z) / fund.phi_q(z)))
    out.append(_result("weyl_product_identity", worst, 1e-9))

    worst = 0.0
    for z in _band_exterior_points(bands, rng, 4):
        pt = SheetPoint(z, True)
        try:
            m_val = weyl_m(fund, pt)
            zmul = floquet_multiplier(fund, pt)
            psi0 = bloch_solution(fund, pt, 0)
            psiq = bloch_solution(fund, pt, q)
            worst = max(worst, abs(psi0 - 1.0))
            worst = max(worst, _rel(psiq, zmul))
            for n in (-1, 1, 3):
                lhs = bloch_solution(fund, pt, n + q)
                rhs = zmul * bloch_solution(fund, pt, n)
                # psi is the cancelling combination theta + m phi, so measure
                # the defect against the legs actually summed
                legs = abs(fund.theta(n + q)(z)) + abs(m_val) * abs(fund.phi(n + q)(z))
                worst = max(worst, abs(lhs - rhs) / max(abs(rhs), legs, 1.0))
        except DirichletPoleError:
            continue
    out.append(_result("bloch_floquet_periodicity", worst, 1e-9))

    prod_a = bg.prod_a
    worst = 0.0
    for z in lam_c[:10]:
        lhs = fund.phi_q(z)
        rhs = a00 / prod_a
        for m in bands.mu:
            rhs = rhs * (z - m)
        worst = max(worst, _rel(lhs, rhs))
        lhs = fund.theta_q1(z)
        rhs = -a00 / prod_a
        for m in bands.nu:
            rhs = rhs * (z - m)
        worst = max(worst, _rel(lhs, rhs))
    out.append(_result("dirichlet_neumann_factorization", worst, 1e-8))

    worst = 0.0
    for k, lo, hi in bands.finite_gaps():
        for val, name in ((bands.mu[k - 1], "mu"), (bands.nu[k - 1], "nu"), (bands.alpha[k - 1], "alpha")):
            worst = max(worst, max(0.0, lo - val, val - hi))
    out.append(_result("gap_points_inside_gaps", worst, 1e-12))

    # -- sheet function layer ----------------------------------------------
    four_omega_sq = -4.0 * fund.delta_sq_minus_1
    diff = data.f_poly - (four_omega_sq + data.s_poly)
    top = max(abs(data.f_poly.leading), 1e-30)
    out.append(
        _result(
            "state_poly_decomposition",
            max((abs(c) for c in diff.coeffs), default=0.0) / top,
            1e-9,
        )
    )

    worst = 0.0
    for z in lam_c:
        prod = xi_eval(fund, data, SheetPoint(z, True)) * xi_eval(fund, data, SheetPoint(z, False))
        worst = max(worst, _rel(prod, data.f_poly(z)))
    out.append(_result("xi_product_equals_state_poly", worst, 1e-8))

    worst = 0.0
    count = 0
    for z in _band_exterior_points(bands, rng, 6):
        for phys in (True, False):
            try:
                ev = jost_evaluate(op, fund, SheetPoint(z, phys))
            except DirichletPoleError:
                continue
            worst = max(worst, _rel(ev.xi, xi_eval(fund, data, SheetPoint(z, phys))))
            count += 1
    out.append(_result("wronskian_route_matches_polynomial_route", worst, 1e-8, f"{count} points"))

    worst = 0.0
    for z in _band_exterior_points(bands, rng, 3):
        try:
            ev = jost_evaluate(op, fund, SheetPoint(z, True), window=range(-2, op.p + 4))
        except DirichletPoleError:
            continue
        w_vals = [
            op.a(n) * (ev.fminus[n] * ev.fplus[n + 1] - ev.fminus[n + 1] * ev.fplus[n])
            for n in (0, 1, 2)
        ]
        worst = max(worst, max(_rel(w_vals[0], wv) for wv in w_vals[1:]))
    out.append(_result("wronskian_site_independence", worst, 1e-9))

    worst = 0.0
    for lo, hi in bands.bands:
        for frac in np.linspace(0.05, 0.95, 10):
            x = float(lo + frac * (hi - lo))
            fval = data.f_poly(x)
            sval = data.s_poly(x)
            if fval <= 0.0:
                worst = max(worst, -fval + 1.0)
            if sval < -1e-9 * (1.0 + abs(fval)):
                worst = max(worst, -sval)
    out.append(_result("state_poly_positive_on_bands", worst, 1e-12))

    # -- scattering layer ---------------------------------------------------
    worst_uni = worst_det = worst_beta = worst_mod = worst_refl = 0.0
    pts = band_sample(bands, 20, rng=rng)
    for x in pts:
        try:
            sp = scattering_at(op, fund, bands, x)
        except Exception:
            continue
        worst_uni = max(worst_uni, sp.unitarity_defect)
        worst_det = max(worst_det, abs(sp.det_s - np.conjugate(sp.alpha) / sp.alpha))
        worst_beta = max(worst_beta, abs(np.conjugate(sp.beta_plus) + sp.beta_minus))
        worst_mod = max(
            worst_mod, abs(abs(sp.alpha) ** 2 - 1.0 - abs(sp.beta_plus) ** 2)
        )
        if abs(sp.alpha) < 1.0 - 1e-9:
            worst_mod = max(worst_mod, 1.0)
        ev = jost_evaluate(op, fund, SheetPoint(x, True))
        worst_refl = max(worst_refl, abs(sp.r_plus - np.conjugate(ev.s) / ev.w))
        worst_refl = max(worst_refl, abs(sp.r_minus - ev.s / ev.w))
    out.append(_result("scattering_unitarity", worst_uni, 1e-10))
    out.append(_result("scattering_determinant_identity", worst_det, 1e-10))
    out.append(_result("reflection_antisymmetry", worst_beta, 1e-10))
    out.append(_result("alpha_modulus_identity", worst_mod, 1e-9))
    out.append(_result("reflection_wronskian_crosscheck", worst_refl, 1e-9))

    # -- resolvent ------------------------------------------------------------
    lam0 = complex(0.5 * (bands.edges[0] + bands.edges[-1]), 0.8 * scale)
    pt0 = SheetPoint(lam0, True)
    worst = _rel(
        resolvent_kernel(op, fund, pt0, 0, 2), resolvent_kernel(op, fund, pt0, 2, 0)
    )
    out.append(_result("resolvent_symmetry", worst, 1e-10))
    worst = 0.0
    for n, m in ((0, 0), (-2, 3), (1, 4)):
        rk = resolvent_kernel(op, fund, pt0, n, m)
        tr = truncated_resolvent_entry(op, lam0, n, m, n_sites=resolvent_sites)
        worst = max(worst, abs(rk - tr))
    out.append(_result("resolvent_truncation_agreement", worst, 1e-6))

    # -- states ----------------------------------------------------------------
    report = None
    try:
        report = locate_states(op, fund, bands, data)
    except Exception as exc:  # propagate as a failed check, keep battery running
        out.append(_result("state_location", 1.0, 0.5, f"{type(exc).__name__}: {exc}"))
    if report is not None:
        ok = report.total_with_multiplicity + report.closed_gap_exclusions == report.degree_f
        out.append(_result("state_count_matches_degree", 0.0 if ok else 1.0, 0.5))
        if report.expected_total is not None:
            out.append(
                _result(
                    "state_count_matches_prediction",
                    abs(
                        report.total_with_multiplicity
                        + report.closed_gap_exclusions
                        - report.expected_total
                    ),
                    0.5,
                )
            )
        parity_bad = sum(1 for k, c in report.per_gap_counts.items() if c % 2 != 0)
        out.append(_result("per_gap_parity_even", float(parity_bad), 0.5))
        out.append(
            _result(
                "bound_count_parity",
                float((report.bound_count + q) % 2) if report.canonical else 0.0,
                0.5,
            )
        )
        worst = 0.0
        for s in report.states:
            if s.lam.imag != 0.0:
                partner = [
                    t
                    for t in report.states
                    if abs(t.lam - s.lam.conjugate()) < 1e-12 * scale
                    and t.multiplicity == s.multiplicity
                ]
                if not partner:
                    worst = 1.0
        out.append(_result("resonances_conjugate_paired", worst, 0.5))

        if oracle_sites > 0:
            oracle = oracle_bound_states(op, bands, n_sites=oracle_sites)
            located = sorted(
                x
                for s in report.bound_states()
                for x in [s.lam.real] * s.multiplicity
            )
            worst = 0.0
            if len(oracle) != len(located):
                worst = 1.0
            else:
                for a_, b_ in zip(sorted(oracle), located):
                    worst = max(worst, abs(a_ - b_))
            out.append(_result("oracle_bound_state_agreement", worst, 1e-6, f"{len(located)} states"))

    # -- leading coefficients ----------------------------------------------------
    if op.pert.canonical or op.pert.is_trivial():
        lc = leading_coefficients(op, fund, bands, data)
        out.append(
            _result(
                "state_poly_degree",
                abs(lc.degree_actual - lc.degree_predicted),
                0.5,
            )
        )
        out.append(_result("state_poly_leading_coefficient", lc.f_lead_rel_err, 1e-6))
        out.append(_result("xi_growth_physical_sheet", lc.xi_phys_rel_err, 1e-2))
        if lc.xi_nonphys_const_predicted is not None and lc.xi_nonphys_const_measured is not None:
            out.append(
                _result(
                    "xi_growth_nonphysical_sheet",
                    _rel(lc.xi_nonphys_const_measured, lc.xi_nonphys_const_predicted),
                    1e-2,
                )
            )
    return out, report
