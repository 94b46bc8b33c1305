"""Crop shade response and rotation revenue.

Relative biomass yield is modeled as a quadratic in the PAR reduction
x = 1 - par, pinned to 1.0 at full sun, fitted to control points. Three
default sensitivity classes ship as package data: S (shade sensitive,
steep early losses), T (shade tolerant, gradual losses) and L (shade
loving, nearly flat with a slight over-unity bump at light shade). Custom
classes can be loaded from a `class,par,yield` CSV.

Seasonal PAR aggregation is irradiance-weighted: biomass responds to
cumulative light, so months are combined as total ground irradiance over
total unshaded irradiance rather than a plain time mean.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .ingest import CropPlan
from .optics import YieldSeries


class AgronomyError(ValueError):
    pass


@dataclass(frozen=True)
class ShadeResponse:
    """Monotone-calibrated PAR -> relative yield map for one crop class."""

    name: str
    b1: float  # linear coefficient in x = 1 - par
    b2: float  # quadratic coefficient

    def __call__(self, par: float) -> float:
        return y_crop(self, par)

    @classmethod
    def fit(cls, name: str, par: np.ndarray, yld: np.ndarray) -> "ShadeResponse":
        """Least-squares quadratic through control points with f(1) = 1."""
        par = np.asarray(par, dtype=float)
        yld = np.asarray(yld, dtype=float)
        if par.size < 3:
            raise AgronomyError(f"class {name}: need at least 3 control points")
        if np.any((par < 0) | (par > 1)):
            raise AgronomyError(f"class {name}: par values outside [0, 1]")
        x = 1.0 - par
        basis = np.stack([x, x * x], axis=1)
        coef, *_ = np.linalg.lstsq(basis, yld - 1.0, rcond=None)
        return cls(name, float(coef[0]), float(coef[1]))


def y_crop(response: ShadeResponse, par: float) -> float:
    """Relative biomass yield at a seasonal PAR fraction, clamped at 0."""
    if not 0.0 <= par <= 1.0:
        raise AgronomyError(f"par fraction out of range [0, 1]: {par}")
    x = 1.0 - par
    return max(0.0, 1.0 + response.b1 * x + response.b2 * x * x)


def load_response_curves(path=None) -> dict[str, ShadeResponse]:
    """Fit response classes from a control-point CSV (default: package data)."""
    if path is None:
        text = resources.files("avtrack").joinpath("data/shade_response.csv").read_text()
        lines = text.splitlines()
    else:
        lines = Path(path).read_text().splitlines()
    reader = csv.DictReader(lines)
    if reader.fieldnames is None or set(reader.fieldnames) != {"class", "par", "yield"}:
        raise AgronomyError("curve file must have header class,par,yield")
    by_class: dict[str, list[tuple[float, float]]] = {}
    for row in reader:
        by_class.setdefault(row["class"], []).append((float(row["par"]), float(row["yield"])))
    out = {}
    for name, pts in by_class.items():
        par, yld = np.array(pts).T
        out[name] = ShadeResponse.fit(name, par, yld)
    return out


_DEFAULT_CURVES: dict[str, ShadeResponse] | None = None


def default_curves() -> dict[str, ShadeResponse]:
    global _DEFAULT_CURVES
    if _DEFAULT_CURVES is None:
        _DEFAULT_CURVES = load_response_curves()
    return _DEFAULT_CURVES


def get_response(name: str, curves: dict[str, ShadeResponse] | None = None) -> ShadeResponse:
    curves = curves or default_curves()
    try:
        return curves[name]
    except KeyError:
        raise AgronomyError(f"unknown shade response class {name!r}") from None


def seasonal_par_fraction(series: YieldSeries, months) -> float:
    """Irradiance-weighted mean shading ratio over the given months."""
    months = set(int(m) for m in months)
    if not months:
        raise AgronomyError("empty month selection")
    sel = np.isin(series.month, list(months)) & series.daylight
    if not sel.any():
        raise AgronomyError(f"no daylight data in months {sorted(months)}")
    return float(series.ground_mean[sel].sum() / series.ghi[sel].sum())


def monthly_y_crop(response: ShadeResponse, series: YieldSeries, month: int) -> float:
    """Yield fraction from a single month's PAR (threshold checks)."""
    par = series.monthly_par_fraction()[month - 1]
    if np.isnan(par):
        raise AgronomyError(f"no irradiance data for month {month}")
    return y_crop(response, min(1.0, float(par)))


@dataclass(frozen=True)
class CropYield:
    crop_name: str
    months: tuple[int, ...]
    response_class: str
    par: float
    y_crop: float
    revenue_full_sun: float
    revenue_realized: float


@dataclass(frozen=True)
class CropYieldResult:
    """Per-entry yields and rotation totals for one simulated year."""

    entries: tuple[CropYield, ...]

    @property
    def total_revenue_realized(self) -> float:
        return sum(e.revenue_realized for e in self.entries)

    @property
    def total_revenue_full_sun(self) -> float:
        return sum(e.revenue_full_sun for e in self.entries)

    @property
    def mean_y_crop(self) -> float:
        """Revenue-weighted rotation yield (fallow entries excluded)."""
        full = self.total_revenue_full_sun
        if full <= 0:
            return float("nan")
        return self.total_revenue_realized / full


def rotation_yield(
    plan: CropPlan,
    series: YieldSeries,
    curves: dict[str, ShadeResponse] | None = None,
) -> CropYieldResult:
    """Evaluate every entry of a crop plan against a simulated year.

    Fallow entries contribute zero revenue and are excluded from yield
    aggregation. Each entry's PAR is the irradiance-weighted fraction over
    its own months.
    """
    out = []
    for entry in plan.entries:
        if entry.is_fallow:
            out.append(
                CropYield(entry.crop_name, tuple(sorted(entry.months)),
                          entry.response_class, float("nan"), float("nan"), 0.0, 0.0)
            )
            continue
        response = get_response(entry.response_class, curves)
        par = min(1.0, seasonal_par_fraction(series, entry.months))
        yc = y_crop(response, par)
        out.append(
            CropYield(
                crop_name=entry.crop_name,
                months=tuple(sorted(entry.months)),
                response_class=entry.response_class,
                par=par,
                y_crop=yc,
                revenue_full_sun=entry.revenue_full_sun,
                revenue_realized=yc * entry.revenue_full_sun,
            )
        )
    return CropYieldResult(tuple(out))


def plan_response_classes(plan: CropPlan) -> dict[int, str]:
    """Month -> response class map (fallow months absent)."""
    out: dict[int, str] = {}
    for entry in plan.entries:
        if entry.is_fallow:
            continue
        for m in entry.months:
            out[m] = entry.response_class
    return out
