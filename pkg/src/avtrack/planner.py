"""Design-space search: feasible tracking windows and economic sweeps.

A CT(n) schedule only ever switches each timestep between the ST and AT
rotations, so one ST run and one AT run per layout are enough to compose
every n on the grid by masking timesteps with |solar time - noon| <= n/2.
SimContext caches those base runs (and the GMPV reference) per layout so
feasibility scans and sweeps stay cheap.

Thresholds are enforced per calendar month by default (the tracking hours
are not re-tuned across months); period-mean enforcement is available via
basis="period" for annual-curve style studies.
"""

from __future__ import annotations

import calendar
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from datetime import date
from itertools import product

import numpy as np

from . import agronomy, economics
from .agronomy import get_response, plan_response_classes, rotation_yield
from .ingest import Scenario, SweepSpec, ValidationError, builtin_crop_plan
from .optics import (
    ArrayLayout,
    YieldSeries,
    build_sun_table,
    resolve_bifacial,
    simulate_reference,
    simulate_scheme,
)
from .solar import TrackMode, TrackingScheme, daylight_hours

N_GRID = tuple(np.arange(0.0, 14.0 + 1e-9, 0.5))


class InfeasibleError(RuntimeError):
    """No tracking-hours choice satisfies the thresholds."""

    def __init__(self, message: str, binding: str):
        super().__init__(message)
        self.binding = binding


def parse_scheme(label: str) -> TrackingScheme:
    """Scheme from a sweep label: a mode name, "N/S", or CT(n)."""
    label = label.strip()
    if label.upper().startswith("CT(") and label.endswith(")"):
        return TrackingScheme(TrackMode.CT, float(label[3:-1]))
    norm = label.upper().replace("/", "").replace("-", "_")
    if norm in ("NS", "N_S"):
        norm = "NS_FIXED"
    try:
        return TrackingScheme(TrackMode(norm))
    except ValueError:
        raise ValidationError(f"unknown scheme label {label!r}") from None


class SimContext:
    """Weather, sun table, and cached simulations for one scenario site."""

    def __init__(self, scenario: Scenario, weather=None):
        self.scenario = scenario
        self.weather = weather if weather is not None else scenario.load_weather()
        self.sun = build_sun_table(scenario.site, self.weather.times)
        self._series: dict = {}
        self._yield: dict = {}

    def _layout(self, a_lm: float, scheme: TrackingScheme) -> ArrayLayout:
        lc = self.scenario.layout
        return ArrayLayout(
            module_width=lc.module_width,
            a_lm=a_lm,
            height=lc.height,
            bifacial_rear_weight=resolve_bifacial(scheme, lc.bifacial_rear_weight),
        )

    def reference(self, a_lm: float) -> YieldSeries:
        key = ("__ref__", a_lm)
        if key not in self._series:
            lay = self._layout(a_lm, TrackingScheme(TrackMode.NS_FIXED))
            self._series[key] = simulate_reference(lay, self.scenario.site, self.weather)
        return self._series[key]

    def series(self, scheme: TrackingScheme, a_lm: float) -> YieldSeries:
        key = (scheme.label(), scheme.rotation_limit, scheme.fixed_tilt, a_lm)
        if key not in self._series:
            self._series[key] = simulate_scheme(
                self._layout(a_lm, scheme),
                scheme,
                self.scenario.site,
                self.weather,
                reference=self.reference(a_lm),
            )
        return self._series[key]

    def family(self, a_lm: float, rotation_limit: float = 90.0) -> "CTFamily":
        key = ("__family__", a_lm, rotation_limit)
        if key not in self._series:
            st = self.series(TrackingScheme(TrackMode.ST, rotation_limit=rotation_limit), a_lm)
            at = self.series(TrackingScheme(TrackMode.AT, rotation_limit=rotation_limit), a_lm)
            self._series[key] = CTFamily(self, st, at)
        return self._series[key]

    def rotation_result(self, scheme: TrackingScheme, a_lm: float, plan):
        key = (scheme.label(), a_lm, plan.name)
        if key not in self._yield:
            self._yield[key] = rotation_yield(plan, self.series(scheme, a_lm))
        return self._yield[key]

    def yy_ref(self, a_lm: float = 2.0) -> float:
        return self.reference(a_lm).annual_module_energy_kwh()


@dataclass
class FamilyPoint:
    n: float
    y_pv_monthly: np.ndarray  # (12,)
    par_monthly: np.ndarray  # (12,)
    y_pv_annual: float
    par_annual: float


class CTFamily:
    """Composes any CT(n) outcome from the cached ST and AT base runs."""

    def __init__(self, ctx: SimContext, st: YieldSeries, at: YieldSeries):
        self.ctx = ctx
        self.st = st
        self.at = at
        self._points: dict[float, FamilyPoint] = {}
        ref = st.reference
        self._ref_monthly = ref.monthly_module_energy()
        self._ghi_monthly = np.zeros(12)
        np.add.at(self._ghi_monthly, st.month - 1, st.ghi)

    def point(self, n: float) -> FamilyPoint:
        n = float(n)
        if n in self._points:
            return self._points[n]
        sun = self.ctx.sun
        mask = sun.day & (np.abs(sun.solar_time - 12.0) <= n / 2.0)
        energy = np.where(mask, self.st.module_energy, self.at.module_energy)
        gmean = np.where(mask, self.st.ground_mean, self.at.ground_mean)
        e_m = np.zeros(12)
        g_m = np.zeros(12)
        np.add.at(e_m, self.st.month - 1, energy)
        np.add.at(g_m, self.st.month - 1, gmean)
        with np.errstate(invalid="ignore", divide="ignore"):
            y_pv_m = np.where(self._ref_monthly > 0, e_m / self._ref_monthly, np.nan)
            par_m = np.where(self._ghi_monthly > 0, g_m / self._ghi_monthly, np.nan)
        pt = FamilyPoint(
            n=n,
            y_pv_monthly=y_pv_m,
            par_monthly=np.minimum(par_m, 1.0),
            y_pv_annual=float(e_m.sum() / self._ref_monthly.sum()),
            par_annual=float(min(1.0, g_m.sum() / self._ghi_monthly.sum())),
        )
        self._points[n] = pt
        return pt

    def par_over(self, n: float, months) -> float:
        """Irradiance-weighted PAR fraction over a month set at CT(n)."""
        pt = self.point(n)
        months = [m - 1 for m in months]
        num = (pt.par_monthly[months] * self._ghi_monthly[months]).sum()
        den = self._ghi_monthly[months].sum()
        return float(num / den)


@dataclass
class FeasibilityReport:
    """Threshold pass/fail over the tracking-hours grid.

    y_pv and y_crop are (N, 12) monthly values (y_crop is NaN on fallow or
    out-of-period months); window lists grid points feasible in every
    evaluated month (or on the period mean for basis="period").
    """

    n_grid: tuple
    months: tuple
    basis: str
    theta_energy: float
    theta_crop: float
    y_pv: np.ndarray
    y_crop: np.ndarray
    y_pv_period: np.ndarray  # (N,)
    y_crop_period: np.ndarray  # (N,)
    feasible: np.ndarray  # (N,) bool
    window: tuple

    def window_bounds(self) -> tuple[float, float] | None:
        if not self.window:
            return None
        return (min(self.window), max(self.window))


def feasible_st_window(
    scenario: Scenario,
    thresholds: tuple[float, float] | None = None,
    period=None,
    basis: str = "monthly",
    ctx: SimContext | None = None,
    n_grid=N_GRID,
) -> FeasibilityReport:
    """Scan the tracking-hours grid against energy and crop thresholds.

    basis="monthly" requires both thresholds in every month of the period;
    basis="period" requires them on the period aggregate. The crop check
    uses each calendar month's (or the period's) PAR with the response
    class of the crop planted in that month; fallow months only face the
    energy threshold.
    """
    if basis not in ("monthly", "period"):
        raise ValidationError(f"basis must be 'monthly' or 'period': {basis!r}")
    th_e, th_c = thresholds if thresholds else (scenario.theta_energy, scenario.theta_crop)
    months = tuple(sorted(set(int(m) for m in (period or range(1, 13)))))
    if not months:
        raise ValidationError("empty evaluation period")
    ctx = ctx or SimContext(scenario)
    fam = ctx.family(scenario.layout.a_lm, scenario.scheme.rotation_limit)
    classes = plan_response_classes(scenario.crops)

    n_n = len(n_grid)
    y_pv = np.full((n_n, 12), np.nan)
    y_crop = np.full((n_n, 12), np.nan)
    y_pv_period = np.zeros(n_n)
    y_crop_period = np.zeros(n_n)
    feasible = np.zeros(n_n, dtype=bool)
    for i, n in enumerate(n_grid):
        pt = fam.point(n)
        y_pv[i] = pt.y_pv_monthly
        for m in months:
            if m in classes:
                resp = get_response(classes[m])
                y_crop[i, m - 1] = agronomy.y_crop(resp, float(pt.par_monthly[m - 1]))
        # Period aggregates: energy over the period, crop per entry season.
        e_sel = [m - 1 for m in months]
        y_pv_period[i] = float(
            np.nansum(pt.y_pv_monthly[e_sel] * fam._ref_monthly[e_sel])
            / fam._ref_monthly[e_sel].sum()
        )
        crop_vals = []
        for entry in scenario.crops.entries:
            emonths = sorted(set(entry.months) & set(months))
            if not emonths or entry.is_fallow:
                continue
            resp = get_response(entry.response_class)
            crop_vals.append(agronomy.y_crop(resp, fam.par_over(n, emonths)))
        y_crop_period[i] = min(crop_vals) if crop_vals else np.nan

        if basis == "monthly":
            ok_e = all(y_pv[i, m - 1] >= th_e for m in months)
            ok_c = all(
                y_crop[i, m - 1] >= th_c for m in months if not np.isnan(y_crop[i, m - 1])
            )
        else:
            ok_e = y_pv_period[i] >= th_e
            ok_c = np.isnan(y_crop_period[i]) or y_crop_period[i] >= th_c
        feasible[i] = ok_e and ok_c

    window = tuple(float(n) for n, ok in zip(n_grid, feasible) if ok)
    return FeasibilityReport(
        n_grid=tuple(float(n) for n in n_grid),
        months=months,
        basis=basis,
        theta_energy=th_e,
        theta_crop=th_c,
        y_pv=y_pv,
        y_crop=y_crop,
        y_pv_period=y_pv_period,
        y_crop_period=y_crop_period,
        feasible=feasible,
        window=window,
    )


def _mean_daylight_hours(site, year: int, month: int) -> float:
    days = calendar.monthrange(year, month)[1]
    return float(
        np.mean([daylight_hours(site, date(year, month, d)) for d in range(1, days + 1)])
    )


def max_st_hours_per_month(
    scenario: Scenario,
    thresholds: tuple[float, float] | None = None,
    ctx: SimContext | None = None,
    n_grid=N_GRID,
) -> np.ndarray:
    """Largest allowed daily tracking hours per calendar month (12,).

    The grid answer is capped at the month's mean daylight length; months
    with no feasible grid point report 0.
    """
    th_e, th_c = thresholds if thresholds else (scenario.theta_energy, scenario.theta_crop)
    ctx = ctx or SimContext(scenario)
    fam = ctx.family(scenario.layout.a_lm, scenario.scheme.rotation_limit)
    classes = plan_response_classes(scenario.crops)
    year = ctx.weather.times[0].year

    out = np.zeros(12)
    for m in range(1, 13):
        resp = get_response(classes[m]) if m in classes else None
        best = None
        for n in n_grid:
            pt = fam.point(n)
            if not pt.y_pv_monthly[m - 1] >= th_e:
                continue
            if resp is not None:
                if not agronomy.y_crop(resp, float(pt.par_monthly[m - 1])) >= th_c:
                    continue
            best = float(n)
        if best is not None:
            out[m - 1] = min(best, _mean_daylight_hours(scenario.site, year, m))
    return out


def optimize_ct(
    scenario: Scenario,
    thresholds: tuple[float, float] | None = None,
    period=None,
    basis: str = "monthly",
    ctx: SimContext | None = None,
    n_grid=N_GRID,
):
    """Most economic tracking hours within the feasible window.

    Scans the grid exhaustively for the minimum price-performance ratio;
    ties break toward more tracking hours (higher energy). Raises
    InfeasibleError naming the binding constraint when the window is empty.
    """
    ctx = ctx or SimContext(scenario)
    report = feasible_st_window(scenario, thresholds, period, basis, ctx, n_grid)
    if not report.window:
        if basis == "monthly":
            e_ok = np.array(
                [all(report.y_pv[i, m - 1] >= report.theta_energy for m in report.months)
                 for i in range(len(report.n_grid))]
            )
            c_ok = np.array(
                [all(report.y_crop[i, m - 1] >= report.theta_crop
                     for m in report.months if not np.isnan(report.y_crop[i, m - 1]))
                 for i in range(len(report.n_grid))]
            )
        else:
            e_ok = report.y_pv_period >= report.theta_energy
            c_ok = np.isnan(report.y_crop_period) | (report.y_crop_period >= report.theta_crop)
        if not e_ok.any() and not c_ok.any():
            binding = "energy+crop"
        elif not e_ok.any():
            binding = "energy"
        elif not c_ok.any():
            binding = "crop"
        else:
            binding = "overlap"
        raise InfeasibleError(
            f"no tracking hours satisfy thresholds "
            f"(energy>={report.theta_energy}, crop>={report.theta_crop}); "
            f"binding constraint: {binding}",
            binding,
        )

    fam = ctx.family(scenario.layout.a_lm, scenario.scheme.rotation_limit)
    yy_ref = ctx.yy_ref(scenario.econ.a_lm_gmpv)
    best = None
    for n in report.window:
        pt = fam.point(n)
        y_crop_vals = []
        realized = 0.0
        full = 0.0
        for entry in scenario.crops.entries:
            if entry.is_fallow:
                continue
            resp = get_response(entry.response_class)
            yc = agronomy.y_crop(resp, fam.par_over(n, sorted(entry.months)))
            y_crop_vals.append(yc)
            realized += yc * entry.revenue_full_sun
            full += entry.revenue_full_sun
        mean_yc = realized / full if full > 0 else 0.0
        res = economics.evaluate(
            scenario.econ,
            TrackingScheme(TrackMode.CT, n),
            scenario.layout.a_lm,
            pt.y_pv_annual,
            mean_yc,
            full,
            yy_ref,
        )
        # Strict improvement or tie toward larger n.
        if best is None or res.ppr < best[1].ppr or np.isclose(res.ppr, best[1].ppr):
            best = (n, res)
    return best


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------

AXIS_ORDER = ("m_l", "a_lm", "scheme", "crop_plan", "delta_fit")

SWEEP_COLUMNS = (
    "m_l", "a_lm", "scheme", "crop_plan", "delta_fit_pct",
    "y_pv", "y_crop", "p_prime", "pb_prime", "ppr", "delta_fit_th_pct",
)


def run_sweep(
    spec: SweepSpec,
    base: Scenario,
    ctx: SimContext | None = None,
    threads: int = 1,
) -> list[dict]:
    """Evaluate the grid spanned by the sweep axes.

    Rows come back in deterministic lexicographic cell order regardless of
    thread count; per-cell failures are recorded in an "error" field and
    the sweep continues.
    """
    axes = spec.axes()
    if not axes:
        raise ValidationError("sweep has no axes")
    if spec.cell_count() > spec.max_cells:
        raise ValidationError(
            f"sweep spans {spec.cell_count()} cells, above the cap {spec.max_cells}"
        )
    ctx = ctx or SimContext(base)

    names = [a for a in AXIS_ORDER if a in axes]
    value_lists = [axes[a] for a in names]
    cells = list(product(*value_lists))

    # Warm simulation caches serially; cells after this are arithmetic.
    # Invalid axis values are skipped here and surface as per-cell errors.
    for s in axes.get("scheme", (base.scheme.label(),)):
        for a in axes.get("a_lm", (base.layout.a_lm,)):
            try:
                ctx.series(parse_scheme(str(s)), float(a))
            except (ValidationError, ValueError):
                pass
    yy_ref = ctx.yy_ref(base.econ.a_lm_gmpv)

    def resolve_plan(name: str):
        if name == base.crops.name:
            return base.crops
        return builtin_crop_plan(name)

    def cell_row(values) -> dict:
        cell = dict(zip(names, values))
        row = {
            "m_l": float(cell.get("m_l", base.econ.m_l)),
            "a_lm": float(cell.get("a_lm", base.layout.a_lm)),
            "scheme": str(cell.get("scheme", base.scheme.label())),
            "crop_plan": str(cell.get("crop_plan", base.crops.name)),
            "delta_fit_pct": float(cell.get("delta_fit", base.econ.delta_fit_pct)),
        }
        try:
            scheme = parse_scheme(row["scheme"])
            plan = resolve_plan(row["crop_plan"])
            series = ctx.series(scheme, row["a_lm"])
            cropres = ctx.rotation_result(scheme, row["a_lm"], plan)
            econ = replace(base.econ, m_l=row["m_l"], delta_fit_pct=row["delta_fit_pct"])
            res = economics.evaluate(
                econ,
                scheme,
                row["a_lm"],
                float(series.monthly_module_energy().sum()
                      / series.reference.monthly_module_energy().sum()),
                cropres.mean_y_crop,
                cropres.total_revenue_full_sun,
                yy_ref,
            )
            row.update(res.row())
            row["error"] = ""
        except Exception as exc:  # per-cell failures stay in-row
            row.update({k: float("nan") for k in
                        ("y_pv", "y_crop", "p_prime", "pb_prime", "ppr", "delta_fit_th_pct")})
            row["error"] = f"{type(exc).__name__}: {exc}"
        return row

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(cell_row, cells))
    else:
        rows = [cell_row(c) for c in cells]
    return rows


TABLE2_SPEC = SweepSpec(
    m_l=(10.0, 15.0, 20.0, 25.0, 30.0),
    a_lm=(2.0, 4.0, 6.0),
    scheme=("NS_FIXED", "ST", "AT"),
    crop_plan=("HV", "LV"),
)


def table2(base: Scenario, ctx: SimContext | None = None, threads: int = 1) -> list[dict]:
    """FIT-premium threshold grid over M_L x A_LM x scheme x crop plan."""
    return run_sweep(TABLE2_SPEC, base, ctx, threads)
