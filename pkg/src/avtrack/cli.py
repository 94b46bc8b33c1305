"""Command-line surface.

    avtrack simulate|feasibility|economics|optimize|sweep|table2
            --scenario <path> --out <dir> [--dump-timesteps] [--threads N]

Commands compute everything first and only then write files, so a failing
run leaves no partial outputs. Exit codes: 0 success, 2 configuration
error, 3 data error. All outputs (CSV and SVG) are byte-deterministic for
identical inputs.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from pathlib import Path

import numpy as np

from . import agronomy, economics
from .agronomy import default_curves
from .ingest import (
    IngestError,
    ParseError,
    Scenario,
    SchemaError,
    ValidationError,
    load_scenario,
)
from .planner import (
    InfeasibleError,
    SimContext,
    SWEEP_COLUMNS,
    feasible_st_window,
    optimize_ct,
    run_sweep,
    table2,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3


def _fmt(v) -> str:
    if isinstance(v, float):
        if v != v:  # NaN
            return "nan"
        return f"{v:.6g}"
    return str(v)


def _csv_bytes(header, rows) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue().encode()


# ---------------------------------------------------------------------------
# Minimal deterministic SVG plots
# ---------------------------------------------------------------------------

_COLORS = ("#1f6fb4", "#d95f02", "#1b9e77", "#7570b3", "#e7298a", "#666666")
_W, _H = 640, 440
_ML, _MR, _MT, _MB = 70, 20, 20, 50


def _ticks(lo: float, hi: float, n: int = 6) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / max(n - 1, 1)
    mag = 10.0 ** np.floor(np.log10(raw))
    for m in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= m * mag:
            step = m * mag
            break
    start = np.ceil(lo / step) * step
    out = []
    v = start
    while v <= hi + 1e-12 * step:
        out.append(round(v, 10))
        v += step
    return out


def emit_plot(series: dict[str, list[tuple[float, float]]], title: str = "",
              x_label: str = "", y_label: str = "") -> bytes:
    """Self-contained SVG with one polyline per named series.

    Input is name -> [(x, y), ...]; identical input yields identical bytes.
    """
    if not series or all(len(pts) == 0 for pts in series.values()):
        raise ValueError("emit_plot needs at least one non-empty series")
    xs = [p[0] for pts in series.values() for p in pts]
    ys = [p[1] for pts in series.values() for p in pts if p[1] == p[1]]
    if not ys:
        raise ValueError("emit_plot found no finite y values")
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5
    pad = 0.05 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad

    def sx(x):
        return _ML + (x - x_lo) / (x_hi - x_lo) * (_W - _ML - _MR)

    def sy(y):
        return _H - _MB - (y - y_lo) / (y_hi - y_lo) * (_H - _MT - _MB)

    out = io.StringIO()
    out.write('<?xml version="1.0" encoding="UTF-8"?>\n')
    out.write(
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{_W}" height="{_H}" viewBox="0 0 {_W} {_H}">\n'
    )
    out.write(f'<rect width="{_W}" height="{_H}" fill="white"/>\n')
    out.write(
        f'<line x1="{_ML}" y1="{_H - _MB}" x2="{_W - _MR}" y2="{_H - _MB}" '
        f'stroke="black" stroke-width="1"/>\n'
        f'<line x1="{_ML}" y1="{_MT}" x2="{_ML}" y2="{_H - _MB}" '
        f'stroke="black" stroke-width="1"/>\n'
    )
    for tx in _ticks(x_lo, x_hi):
        if not x_lo <= tx <= x_hi:
            continue
        out.write(
            f'<line x1="{sx(tx):.2f}" y1="{_H - _MB}" x2="{sx(tx):.2f}" '
            f'y2="{_H - _MB + 5}" stroke="black" stroke-width="1"/>\n'
            f'<text x="{sx(tx):.2f}" y="{_H - _MB + 18}" font-size="11" '
            f'text-anchor="middle" font-family="sans-serif">{_fmt(float(tx))}</text>\n'
        )
    for ty in _ticks(y_lo, y_hi):
        if not y_lo <= ty <= y_hi:
            continue
        out.write(
            f'<line x1="{_ML - 5}" y1="{sy(ty):.2f}" x2="{_ML}" y2="{sy(ty):.2f}" '
            f'stroke="black" stroke-width="1"/>\n'
            f'<text x="{_ML - 8}" y="{sy(ty):.2f}" font-size="11" '
            f'text-anchor="end" dominant-baseline="middle" '
            f'font-family="sans-serif">{_fmt(float(ty))}</text>\n'
        )
    if title:
        out.write(
            f'<text x="{(_ML + _W - _MR) / 2:.1f}" y="{_MT - 5}" font-size="13" '
            f'text-anchor="middle" font-family="sans-serif">{title}</text>\n'
        )
    if x_label:
        out.write(
            f'<text x="{(_ML + _W - _MR) / 2:.1f}" y="{_H - 12}" font-size="12" '
            f'text-anchor="middle" font-family="sans-serif">{x_label}</text>\n'
        )
    if y_label:
        out.write(
            f'<text x="16" y="{(_MT + _H - _MB) / 2:.1f}" font-size="12" '
            f'text-anchor="middle" font-family="sans-serif" '
            f'transform="rotate(-90 16 {(_MT + _H - _MB) / 2:.1f})">{y_label}</text>\n'
        )
    for i, (name, pts) in enumerate(series.items()):
        color = _COLORS[i % len(_COLORS)]
        finite = [(x, y) for x, y in pts if y == y]
        if len(finite) == 1:
            x, y = finite[0]
            out.write(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="3" fill="{color}"/>\n')
        elif finite:
            path = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in finite)
            out.write(
                f'<polyline points="{path}" fill="none" stroke="{color}" '
                f'stroke-width="1.5"/>\n'
            )
        ly = _MT + 16 + 16 * i
        out.write(
            f'<line x1="{_W - _MR - 120}" y1="{ly}" x2="{_W - _MR - 95}" y2="{ly}" '
            f'stroke="{color}" stroke-width="2"/>\n'
            f'<text x="{_W - _MR - 90}" y="{ly + 4}" font-size="11" '
            f'font-family="sans-serif">{name}</text>\n'
        )
    out.write("</svg>\n")
    return out.getvalue().encode()


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _write_all(out_dir: Path, files: dict[str, bytes]) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, data in files.items():
        (out_dir / name).write_bytes(data)


def cmd_simulate(scenario: Scenario, out_dir: Path, dump_timesteps: bool) -> dict[str, bytes]:
    ctx = SimContext(scenario)
    series = ctx.series(scenario.scheme, scenario.layout.a_lm)
    y_pv_m = series.monthly_y_pv()
    shading_m = series.monthly_shading_ratio()
    par_m = series.monthly_par_fraction()
    curves = default_curves()
    rows = []
    for m in range(1, 13):
        row = [m, y_pv_m[m - 1], shading_m[m - 1]]
        for cls in ("S", "T", "L"):
            row.append(agronomy.y_crop(curves[cls], float(min(1.0, par_m[m - 1]))))
        rows.append(row)
    files = {
        "yield_monthly.csv": _csv_bytes(
            ["month", "y_pv", "shading_ratio", "y_crop_S", "y_crop_T", "y_crop_L"], rows
        )
    }
    if dump_timesteps:
        day = series.daylight
        ratio = np.full(series.ghi.size, float("nan"))
        ratio[day] = series.ground_mean[day] / series.ghi[day]
        ts_rows = [
            [t.isoformat(), series.theta[i], series.front[i], series.rear[i], ratio[i]]
            for i, t in enumerate(series.times)
        ]
        files["timesteps.csv"] = _csv_bytes(
            ["timestamp", "rotation_deg", "front_poa", "rear_poa", "shading_ratio"], ts_rows
        )
    return files


def cmd_feasibility(scenario: Scenario, out_dir: Path) -> dict[str, bytes]:
    ctx = SimContext(scenario)
    report = feasible_st_window(scenario, ctx=ctx)
    rows = []
    for i, n in enumerate(report.n_grid):
        rows.append([
            n,
            np.nanmin(report.y_pv[i]),
            np.nanmin(report.y_crop[i]) if not np.all(np.isnan(report.y_crop[i])) else float("nan"),
            report.y_pv_period[i],
            report.y_crop_period[i],
            int(report.feasible[i]),
        ])
    csv_data = _csv_bytes(
        ["st_hours", "y_pv_min_month", "y_crop_min_month",
         "y_pv_period", "y_crop_period", "feasible"],
        rows,
    )
    plot = emit_plot(
        {
            "Y_PV (worst month)": [(n, float(np.nanmin(report.y_pv[i])))
                                   for i, n in enumerate(report.n_grid)],
            "Y_Crop (worst month)": [
                (n, float(np.nanmin(report.y_crop[i])))
                for i, n in enumerate(report.n_grid)
                if not np.all(np.isnan(report.y_crop[i]))
            ],
        },
        title="Feasibility vs daily tracking hours",
        x_label="tracking hours per day",
        y_label="yield fraction",
    )
    return {"feasibility.csv": csv_data, "feasibility.svg": plot}


def _econ_rows(scenario: Scenario, ctx: SimContext) -> list[list]:
    series = ctx.series(scenario.scheme, scenario.layout.a_lm)
    cropres = ctx.rotation_result(scenario.scheme, scenario.layout.a_lm, scenario.crops)
    res = economics.evaluate(
        scenario.econ,
        scenario.scheme,
        scenario.layout.a_lm,
        float(series.monthly_module_energy().sum()
              / series.reference.monthly_module_energy().sum()),
        cropres.mean_y_crop,
        cropres.total_revenue_full_sun,
        ctx.yy_ref(scenario.econ.a_lm_gmpv),
    )
    return [[
        scenario.scheme.label(),
        scenario.layout.a_lm,
        scenario.econ.m_l,
        scenario.crops.name,
        res.p_prime,
        res.pb_prime,
        res.ppr,
        res.delta_fit_th_pct,
    ]]


def cmd_economics(scenario: Scenario, out_dir: Path) -> dict[str, bytes]:
    ctx = SimContext(scenario)
    header = ["scheme", "a_lm", "M_L", "crop_plan", "p_prime", "pb_prime", "ppr",
              "delta_fit_th_pct"]
    return {"economics.csv": _csv_bytes(header, _econ_rows(scenario, ctx))}


def cmd_optimize(scenario: Scenario, out_dir: Path) -> dict[str, bytes]:
    ctx = SimContext(scenario)
    n_star, res = optimize_ct(scenario, ctx=ctx)
    header = ["st_hours", "p_prime", "pb_prime", "ppr", "feasible_ppr",
              "delta_fit_th_pct", "y_pv", "y_crop"]
    row = [n_star, res.p_prime, res.pb_prime, res.ppr, int(res.feasible),
           res.delta_fit_th_pct, res.y_pv, res.y_crop]
    return {"optimize.csv": _csv_bytes(header, [row])}


def _sweep_files(rows: list[dict], name: str) -> dict[str, bytes]:
    header = list(SWEEP_COLUMNS) + ["error"]
    data = [[row[c] for c in header] for row in rows]
    return {name: _csv_bytes(header, data)}


def cmd_sweep(scenario: Scenario, out_dir: Path, threads: int) -> dict[str, bytes]:
    if scenario.sweep is None:
        raise SchemaError("scenario has no [sweep] section")
    rows = run_sweep(scenario.sweep, scenario, threads=threads)
    return _sweep_files(rows, "sweep.csv")


def cmd_table2(scenario: Scenario, out_dir: Path, threads: int) -> dict[str, bytes]:
    rows = table2(scenario, threads=threads)
    return _sweep_files(rows, "table2.csv")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="avtrack",
        description="Agrivoltaic tracking simulator and techno-economic optimizer",
    )
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb in ("simulate", "feasibility", "economics", "optimize", "sweep", "table2"):
        p = sub.add_parser(verb)
        p.add_argument("--scenario", required=True, help="scenario TOML file")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--threads", type=int, default=1)
        if verb == "simulate":
            p.add_argument("--dump-timesteps", action="store_true")
    args = parser.parse_args(argv)

    try:
        scenario = load_scenario(args.scenario)
    except IngestError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out_dir = Path(args.out)
    try:
        if args.verb == "simulate":
            files = cmd_simulate(scenario, out_dir, args.dump_timesteps)
        elif args.verb == "feasibility":
            files = cmd_feasibility(scenario, out_dir)
        elif args.verb == "economics":
            files = cmd_economics(scenario, out_dir)
        elif args.verb == "optimize":
            files = cmd_optimize(scenario, out_dir)
        elif args.verb == "sweep":
            files = cmd_sweep(scenario, out_dir, args.threads)
        else:
            files = cmd_table2(scenario, out_dir, args.threads)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ParseError, ValidationError, InfeasibleError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except IngestError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA

    _write_all(out_dir, files)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
