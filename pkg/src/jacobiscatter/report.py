"""Machine-readable output (json / csv) and optional rendered figures.

CSV cells carry 17 significant digits with '.' decimal separator so that a
re-parse reproduces every double bit-for-bit; JSON relies on the shortest
round-trip float representation for the same guarantee.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path


def _fmt(x) -> str:
    if isinstance(x, float):
        if math.isfinite(x):
            return format(x, ".17g")
        return repr(x)
    return str(x)


def _jsonable(obj):
    """Coerce numpy scalars/arrays so payloads always serialize."""
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        return obj.item()
    return obj


def write_json(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(_jsonable(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(x) for x in row])


def csv_table(task: str, payload: dict) -> tuple[list[str], list[list]]:
    """Flatten a task payload to a single table."""
    if task == "bands":
        header = ["kind", "index", "value1", "value2"]
        rows: list[list] = []
        for j, e in enumerate(payload["edges"]):
            rows.append(["edge", j, e, ""])
        for n, (lo, hi) in enumerate(payload["bands"], start=1):
            rows.append(["band", n, lo, hi])
        for g in payload["gaps"]:
            rows.append(["gap", g["index"], g["lo"], g["hi"]])
        for k, m in enumerate(payload["mu"], start=1):
            rows.append(["mu", k, m, ""])
        for k, m in enumerate(payload["nu"], start=1):
            rows.append(["nu", k, m, ""])
        for g in payload["gap_maxima"]:
            rows.append(["alpha", g["index"], g["alpha"], g["h"]])
        return header, rows
    if task == "states":
        header = [
            "re", "im", "sheet", "kind", "multiplicity", "gap_index",
            "residual_physical", "residual_nonphysical",
        ]
        rows = [
            [
                s["re"], s["im"], s["sheet"], s["kind"], s["multiplicity"],
                "" if s["gap_index"] is None else s["gap_index"],
                "" if s["residual_physical"] is None else s["residual_physical"],
                "" if s["residual_nonphysical"] is None else s["residual_nonphysical"],
            ]
            for s in payload["states"]
        ]
        return header, rows
    if task == "scattering":
        header = [
            "lambda", "re_t", "im_t", "re_rplus", "im_rplus",
            "re_rminus", "im_rminus", "unitarity_defect", "det_defect",
        ]
        rows = [
            [
                r["lambda"], r["re_t"], r["im_t"], r["re_rplus"], r["im_rplus"],
                r["re_rminus"], r["im_rminus"], r["unitarity_defect"], r["det_defect"],
            ]
            for r in payload["rows"]
        ]
        return header, rows
    if task == "smallt":
        header = [
            "gap", "t", "lam_minus", "lam_plus", "kind_minus", "kind_plus",
            "predicted_minus", "predicted_plus",
        ]
        rows = [
            [
                payload["gap"], r["t"], r["lam_minus"], r["lam_plus"],
                r["kind_minus"], r["kind_plus"],
                payload["edge_minus"] + r["t"] ** 2 * payload["predicted_coeff_minus"],
                payload["edge_plus"] + r["t"] ** 2 * payload["predicted_coeff_plus"],
            ]
            for r in payload["rows"]
        ]
        return header, rows
    if task == "asymptotics":
        header = ["key", "value"]
        rows = [[k, v] for k, v in sorted(payload.items()) if not isinstance(v, (dict, list))]
        return header, rows
    if task == "verify":
        header = ["name", "passed", "measured", "threshold", "detail"]
        rows = [
            [c["name"], c["passed"], c["measured"], c["threshold"], c["detail"]]
            for c in payload["checks"]
        ]
        return header, rows
    raise ValueError(f"no csv layout for task {task!r}")


# ---------------------------------------------------------------------------
# figures
# ---------------------------------------------------------------------------

def render_figures(task: str, payload: dict, out_stem: Path) -> list[Path]:
    """Render the task's figures next to the data file; returns written paths."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    written: list[Path] = []

    def _save(fig, suffix: str) -> None:
        p = out_stem.with_name(out_stem.name + f"_{suffix}.png")
        fig.savefig(p, dpi=150, bbox_inches="tight")
        plt.close(fig)
        written.append(p)

    if task == "bands":
        import numpy as np

        edges = payload["edges"]
        coeffs = payload["delta_coeffs"]
        span = edges[-1] - edges[0]
        xs = np.linspace(edges[0] - 0.1 * span, edges[-1] + 0.1 * span, 800)
        delta = np.polynomial.polynomial.polyval(xs, coeffs)
        fig, ax = plt.subplots(figsize=(7, 4))
        ax.plot(xs, delta, lw=1.2, label="discriminant")
        ax.axhline(1.0, color="0.4", lw=0.7)
        ax.axhline(-1.0, color="0.4", lw=0.7)
        for lo, hi in payload["bands"]:
            ax.axvspan(lo, hi, color="tab:blue", alpha=0.15)
        if payload["mu"]:
            ax.plot(payload["mu"], [0.0] * len(payload["mu"]), "x", color="tab:red", label="Dirichlet")
        if payload["nu"]:
            ax.plot(payload["nu"], [0.0] * len(payload["nu"]), "+", color="tab:green", label="Neumann")
        ax.set_xlabel(r"$\lambda$")
        ax.set_ylabel(r"$\Delta(\lambda)$")
        ax.set_ylim(-3, 3)
        ax.legend(loc="upper left", fontsize=8)
        _save(fig, "bands")
    elif task == "states":
        fig, ax = plt.subplots(figsize=(7, 4))
        for lo, hi in payload["bands"]:
            ax.plot([lo, hi], [0.0, 0.0], color="tab:blue", lw=3, alpha=0.5)
        style = {
            "bound": ("o", "tab:green"),
            "antibound": ("s", "tab:orange"),
            "resonance": ("^", "tab:red"),
            "virtual": ("d", "tab:purple"),
        }
        seen = set()
        for s in payload["states"]:
            mk, color = style[s["kind"]]
            label = s["kind"] if s["kind"] not in seen else None
            seen.add(s["kind"])
            ax.plot(s["re"], s["im"], mk, color=color, label=label, ms=6)
        ax.set_xlabel(r"Re $\lambda$")
        ax.set_ylabel(r"Im $\lambda$")
        ax.axhline(0.0, color="0.8", lw=0.5)
        if seen:
            ax.legend(fontsize=8)
        _save(fig, "states")
    elif task == "scattering":
        lam = [r["lambda"] for r in payload["rows"]]
        t2 = [r["re_t"] ** 2 + r["im_t"] ** 2 for r in payload["rows"]]
        rp2 = [r["re_rplus"] ** 2 + r["im_rplus"] ** 2 for r in payload["rows"]]
        fig, ax = plt.subplots(figsize=(7, 4))
        ax.plot(lam, t2, ".", ms=3, label=r"$|T|^2$")
        ax.plot(lam, rp2, ".", ms=3, label=r"$|R_+|^2$")
        ax.set_xlabel(r"$\lambda$")
        ax.set_ylim(-0.05, 1.05)
        ax.legend(fontsize=8)
        _save(fig, "scattering")
    elif task == "smallt":
        fig, ax = plt.subplots(figsize=(7, 4))
        ts = [r["t"] for r in payload["rows"]]
        for side, key, coeff, edge in (
            ("-", "lam_minus", payload["predicted_coeff_minus"], payload["edge_minus"]),
            ("+", "lam_plus", payload["predicted_coeff_plus"], payload["edge_plus"]),
        ):
            meas = [r[key] - edge for r in payload["rows"]]
            ax.plot([t**2 for t in ts], meas, "o", label=f"measured, edge {side}")
            ax.plot(
                [t**2 for t in ts],
                [coeff * t**2 for t in ts],
                "--",
                label=f"predicted, edge {side}",
            )
        ax.set_xlabel(r"$t^2$")
        ax.set_ylabel(r"$\lambda(t) - \lambda(0)$")
        ax.legend(fontsize=8)
        _save(fig, "smallt")
    return written
