"""Command line driver.

Subcommands mirror the pipeline tasks: bands, states, scattering, smallt,
asymptotics, verify.  Configuration is a flat TOML document with scalar
fields and bracketed numeric lists; command-line flags override it.

Exit codes: 0 success, 1 invariant failure, 2 input error, 3 numerical
failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

import numpy as np

from .asympt import leading_coefficients, predict_and_verify_small_t
from .background import PeriodicBackground, band_structure, fundamental_solutions
from .errors import AmbiguousSheetError, InputError, NumericalError, StateCountError
from .invariants import run_battery
from .jost import PerturbedOperator, Perturbation, build_xi_data
from .polynomials import ZeroPolynomialError
from .report import csv_table, render_figures, write_csv, write_json
from .scattering import band_sample, scattering_at
from .states import locate_states

TASKS = ("bands", "states", "scattering", "smallt", "asymptotics", "verify")

EXIT_OK = 0
EXIT_INVARIANT = 1
EXIT_INPUT = 2
EXIT_NUMERICAL = 3


@dataclass
class JobConfig:
    task: str
    q: int
    a0: list[float]
    b0: list[float]
    p: int
    u: list[float]
    v: list[float]
    seed: int = 0
    tol: float = 1e-7
    fmt: str = "json"
    out: str | None = None
    plot: bool = False
    scattering_points: int = 100
    scattering_grid: list[float] | None = None
    smallt_gap: int = 1
    smallt_t_grid: list[float] | None = None
    oracle_sites: int = 2000
    resolvent_sites: int = 1000


_REQUIRED = ("q", "a0", "b0", "p", "u", "v")


def load_config(path: Path, task: str | None, overrides: dict) -> JobConfig:
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError:
        raise InputError(f"config file not found: {path}")
    except tomllib.TOMLDecodeError as exc:
        raise InputError(f"config is not valid TOML: {exc}")
    for key in _REQUIRED:
        if key not in raw:
            raise InputError(f"config is missing required field '{key}'")
    cfg = JobConfig(
        task=task or raw.get("task", ""),
        q=int(raw["q"]),
        a0=[float(x) for x in raw["a0"]],
        b0=[float(x) for x in raw["b0"]],
        p=int(raw["p"]),
        u=[float(x) for x in raw["u"]],
        v=[float(x) for x in raw["v"]],
        seed=int(raw.get("seed", 0)),
        tol=float(raw.get("tol", 1e-7)),
        fmt=str(raw.get("format", "json")),
        out=raw.get("out"),
        scattering_points=int(raw.get("scattering_points", 100)),
        scattering_grid=[float(x) for x in raw["scattering_grid"]] if "scattering_grid" in raw else None,
        smallt_gap=int(raw.get("smallt_gap", 1)),
        smallt_t_grid=[float(x) for x in raw.get("smallt_t_grid", [1e-3, 5e-4, 2.5e-4])],
        oracle_sites=int(raw.get("oracle_sites", 2000)),
        resolvent_sites=int(raw.get("resolvent_sites", 1000)),
    )
    for key, val in overrides.items():
        if val is not None:
            setattr(cfg, key, val)
    if not cfg.task:
        raise InputError("no task: pass a subcommand or set 'task' in the config")
    if cfg.task not in TASKS:
        raise InputError(f"unknown task '{cfg.task}'")
    if cfg.fmt not in ("json", "csv"):
        raise InputError(f"format must be json or csv, got '{cfg.fmt}'")
    if len(cfg.a0) != cfg.q or len(cfg.b0) != cfg.q:
        raise InputError("a0 and b0 must each have exactly q entries")
    if len(cfg.u) != cfg.p + 1 or len(cfg.v) != cfg.p + 1:
        raise InputError("u and v must each have exactly p+1 entries")
    if cfg.tol <= 0:
        raise InputError("tol must be positive")
    return cfg


def _build(cfg: JobConfig):
    bg = PeriodicBackground(q=cfg.q, a=tuple(cfg.a0), b=tuple(cfg.b0))
    pert = Perturbation(p=cfg.p, u=tuple(cfg.u), v=tuple(cfg.v))
    op = PerturbedOperator(bg, pert)
    fund = fundamental_solutions(bg, nmax=max(cfg.q + 2, cfg.p + 3))
    bands = band_structure(bg, fund)
    return op, fund, bands


def _config_echo(cfg: JobConfig) -> dict:
    return {
        "q": cfg.q, "a0": cfg.a0, "b0": cfg.b0,
        "p": cfg.p, "u": cfg.u, "v": cfg.v,
        "seed": cfg.seed, "tol": cfg.tol,
    }


def run(cfg: JobConfig) -> int:
    """Execute one task; writes artifacts and returns the exit code."""
    op, fund, bands = _build(cfg)
    payload: dict = {"task": cfg.task, "config": _config_echo(cfg)}
    status = EXIT_OK

    if cfg.task == "bands":
        payload.update(
            edges=list(bands.edges),
            bands=[list(b) for b in bands.bands],
            gaps=[
                {"index": k, "lo": bands.lam_minus(k), "hi": bands.lam_plus(k),
                 "closed": k in bands.closed_gaps}
                for k in range(1, cfg.q)
            ],
            mu=list(bands.mu),
            nu=list(bands.nu),
            gap_maxima=[
                {"index": k + 1, "alpha": a, "h": h}
                for k, (a, h) in enumerate(zip(bands.alpha, bands.h))
            ],
            closed_gaps=sorted(bands.closed_gaps),
            delta_coeffs=list(fund.delta.coeffs),
        )
    elif cfg.task == "states":
        data = build_xi_data(op, fund)
        report = locate_states(op, fund, bands, data, tol=cfg.tol)
        payload.update(
            degree_f=report.degree_f,
            expected_total=report.expected_total,
            total=report.total_with_multiplicity,
            bound_count=report.bound_count,
            canonical=report.canonical,
            closed_gap_exclusions=report.closed_gap_exclusions,
            per_gap_counts={str(k): v for k, v in sorted(report.per_gap_counts.items())},
            states=[
                {
                    "re": s.lam.real, "im": s.lam.imag, "sheet": s.sheet,
                    "kind": s.kind, "multiplicity": s.multiplicity,
                    "gap_index": s.gap_index,
                    "residual_physical": s.residual_physical,
                    "residual_nonphysical": s.residual_nonphysical,
                }
                for s in report.states
            ],
            bands=[list(b) for b in bands.bands],
        )
    elif cfg.task == "scattering":
        if cfg.scattering_grid is not None:
            grid = list(cfg.scattering_grid)
        else:
            grid = band_sample(bands, cfg.scattering_points)
        rows = []
        for lam in grid:
            sp = scattering_at(op, fund, bands, lam)
            rows.append(
                {
                    "lambda": sp.lam,
                    "re_t": sp.t.real, "im_t": sp.t.imag,
                    "re_rplus": sp.r_plus.real, "im_rplus": sp.r_plus.imag,
                    "re_rminus": sp.r_minus.real, "im_rminus": sp.r_minus.imag,
                    "unitarity_defect": sp.unitarity_defect,
                    "det_defect": abs(sp.det_s - np.conjugate(sp.alpha) / sp.alpha),
                }
            )
        payload.update(rows=rows)
    elif cfg.task == "smallt":
        bg = op.bg
        cmp_ = predict_and_verify_small_t(
            bg, cfg.v, cfg.smallt_gap, t_grid=tuple(cfg.smallt_t_grid or (1e-3, 5e-4, 2.5e-4))
        )
        payload.update(
            gap=cmp_.gap_index,
            edge_minus=cmp_.prediction_minus.edge,
            edge_plus=cmp_.prediction_plus.edge,
            j1_minus=cmp_.prediction_minus.j1,
            j1_plus=cmp_.prediction_plus.j1,
            predicted_coeff_minus=cmp_.prediction_minus.second_order,
            predicted_coeff_plus=cmp_.prediction_plus.second_order,
            predicted_kind_minus=cmp_.prediction_minus.predicted_kind,
            predicted_kind_plus=cmp_.prediction_plus.predicted_kind,
            fitted_coeff_minus=cmp_.fitted_minus,
            fitted_coeff_plus=cmp_.fitted_plus,
            rel_err_minus=cmp_.rel_err("minus"),
            rel_err_plus=cmp_.rel_err("plus"),
            straddle_ok=cmp_.straddle_ok,
            kinds_match=cmp_.kinds_match,
            rows=[
                {
                    "t": r.t, "lam_minus": r.lam_minus, "lam_plus": r.lam_plus,
                    "kind_minus": r.kind_minus, "kind_plus": r.kind_plus,
                }
                for r in cmp_.rows
            ],
        )
        if not (cmp_.straddle_ok and cmp_.kinds_match):
            status = EXIT_INVARIANT
    elif cfg.task == "asymptotics":
        data = build_xi_data(op, fund)
        lc = leading_coefficients(op, fund, bands, data)
        payload.update(
            degree_predicted=lc.degree_predicted,
            degree_actual=lc.degree_actual,
            f_lead_predicted=lc.f_lead_predicted,
            f_lead_actual=lc.f_lead_actual,
            f_lead_rel_err=lc.f_lead_rel_err,
            xi_phys_const_predicted=lc.xi_phys_const_predicted,
            xi_phys_const_measured=lc.xi_phys_const_measured,
            xi_phys_rel_err=lc.xi_phys_rel_err,
            xi_nonphys_const_predicted=lc.xi_nonphys_const_predicted,
            xi_nonphys_const_measured=lc.xi_nonphys_const_measured,
            unperturbed=lc.unperturbed,
        )
        if lc.degree_actual != lc.degree_predicted or lc.f_lead_rel_err > 1e-6:
            status = EXIT_INVARIANT
    elif cfg.task == "verify":
        checks, report = run_battery(
            op, seed=cfg.seed, oracle_sites=cfg.oracle_sites,
            resolvent_sites=cfg.resolvent_sites,
        )
        payload.update(
            checks=[
                {
                    "name": c.name, "passed": c.passed, "measured": c.measured,
                    "threshold": c.threshold, "detail": c.detail,
                }
                for c in checks
            ],
            all_passed=all(c.passed for c in checks),
            state_total=None if report is None else report.total_with_multiplicity,
        )
        for c in checks:
            mark = "pass" if c.passed else "FAIL"
            print(f"[{mark}] {c.name}: measured {c.measured:.3e} vs {c.threshold:.1e} {c.detail}")
        if not payload["all_passed"]:
            status = EXIT_INVARIANT

    out = Path(cfg.out) if cfg.out else Path(f"{cfg.task}.{cfg.fmt}")
    if cfg.fmt == "json":
        write_json(out, payload)
    else:
        header, rows = csv_table(cfg.task, payload)
        write_csv(out, header, rows)
    print(f"wrote {out}")
    if cfg.plot:
        for p in render_figures(cfg.task, payload, out.with_suffix("")):
            print(f"wrote {p}")
    return status


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="jacobiscatter",
        description="Spectral picture of a periodic Jacobi operator with a finitely supported perturbation",
    )
    sub = parser.add_subparsers(dest="task", required=True)
    for name in TASKS:
        sp = sub.add_parser(name, help=f"run the {name} task")
        sp.add_argument("--config", required=True, type=Path, help="TOML configuration")
        sp.add_argument("--out", type=str, default=None, help="output path")
        sp.add_argument("--format", dest="fmt", choices=("json", "csv"), default=None)
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--tol", type=float, default=None)
        sp.add_argument("--plot", action="store_true", help="render figures next to the data file")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(
            args.config,
            args.task,
            {"out": args.out, "fmt": args.fmt, "seed": args.seed, "tol": args.tol,
             "plot": args.plot or None},
        )
        return run(cfg)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (AmbiguousSheetError, StateCountError) as exc:
        print(f"invariant failure: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (NumericalError, ZeroPolynomialError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
