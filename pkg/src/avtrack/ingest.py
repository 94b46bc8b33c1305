"""Input layer: weather series, crop tables, and scenario files.

Weather is hourly GHI/DNI/DHI in W/m2 with civil local timestamps. Loaders
exist for a plain CSV layout (`timestamp,ghi,dni,dhi`) and for EPW files;
a deterministic synthetic generator provides a Khanewal-like typical year
when no measured file is available (monthly cloudiness factors applied to
an airmass-attenuated clear-sky model).

Scenario files are TOML with sections [site], [weather], [layout],
[scheme], [crops], [econ], [thresholds] and optionally [sweep]. Unknown
keys are rejected. `dump_scenario` emits a canonical document that reloads
to an equal Scenario.
"""

from __future__ import annotations

import csv
import math
import io
from dataclasses import dataclass, field, replace
from datetime import datetime, timedelta
from pathlib import Path

import numpy as np

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover - depends on interpreter
    import tomli as tomllib

from .solar import TrackMode, TrackingScheme


class IngestError(ValueError):
    """Base class for input-layer failures."""


class ParseError(IngestError):
    """Malformed file content."""


class ValidationError(IngestError):
    """Well-formed content violating a physical or schema invariant."""


class SchemaError(IngestError):
    """Scenario file structure problem; message carries the key path."""


# GHI may exceed DNI+DHI slightly in measured data (sensor mismatch).
COMPONENT_TOLERANCE_WM2 = 50.0
HOURS_PER_YEAR = 8760


@dataclass(frozen=True)
class SiteConfig:
    latitude: float
    longitude: float
    utc_offset: float
    albedo: float = 0.25

    def __post_init__(self) -> None:
        if not -90.0 <= self.latitude <= 90.0:
            raise ValidationError(f"latitude out of range [-90, 90]: {self.latitude}")
        if not -180.0 <= self.longitude <= 180.0:
            raise ValidationError(f"longitude out of range [-180, 180]: {self.longitude}")
        if not 0.0 <= self.albedo <= 1.0:
            raise ValidationError(f"albedo out of range [0, 1]: {self.albedo}")


# Case-study site: Khanewal, Punjab, Pakistan (PKT = UTC+5).
KHANEWAL = SiteConfig(latitude=30.2864, longitude=71.9320, utc_offset=5.0)


@dataclass(frozen=True)
class WeatherSeries:
    """Validated hourly irradiance record.

    times is a list of naive civil-local datetimes at a strict 1-hour
    cadence; ghi/dni/dhi are parallel float arrays (W/m2).
    """

    site: SiteConfig
    times: tuple[datetime, ...]
    ghi: np.ndarray
    dni: np.ndarray
    dhi: np.ndarray

    def __len__(self) -> int:
        return len(self.times)

    def records(self):
        """Iterate (timestamp, ghi, dni, dhi) tuples in order."""
        return zip(self.times, self.ghi, self.dni, self.dhi)

    def month_of(self) -> np.ndarray:
        return np.array([t.month for t in self.times], dtype=np.int64)

    def __eq__(self, other) -> bool:  # arrays break dataclass eq
        if not isinstance(other, WeatherSeries):
            return NotImplemented
        return (
            self.site == other.site
            and self.times == other.times
            and np.array_equal(self.ghi, other.ghi)
            and np.array_equal(self.dni, other.dni)
            and np.array_equal(self.dhi, other.dhi)
        )


def _validate_series(site: SiteConfig, times, ghi, dni, dhi) -> WeatherSeries:
    ghi = np.asarray(ghi, dtype=float)
    dni = np.asarray(dni, dtype=float)
    dhi = np.asarray(dhi, dtype=float)
    n = len(times)
    if not (len(ghi) == len(dni) == len(dhi) == n):
        raise ValidationError("irradiance columns have inconsistent lengths")
    step = timedelta(hours=1)
    for i in range(1, n):
        delta = times[i] - times[i - 1]
        if delta == step:
            continue
        if delta <= timedelta(0):
            raise ValidationError(f"timestamps not strictly increasing at row {i}")
        raise ValidationError(f"gap or non-hourly cadence at row {i}: step {delta}")
    for name, col in (("ghi", ghi), ("dni", dni), ("dhi", dhi)):
        bad = np.flatnonzero(~np.isfinite(col) | (col < 0.0))
        if bad.size:
            raise ValidationError(f"negative or non-finite {name} at row {int(bad[0])}")
    bad = np.flatnonzero(ghi > dni + dhi + COMPONENT_TOLERANCE_WM2)
    if bad.size:
        i = int(bad[0])
        raise ValidationError(
            f"component inconsistency at row {i}: ghi={ghi[i]:.1f} exceeds "
            f"dni+dhi+{COMPONENT_TOLERANCE_WM2:.0f}"
        )
    if n < HOURS_PER_YEAR:
        raise ValidationError(
            f"weather record covers {n} hours; at least one calendar year "
            f"({HOURS_PER_YEAR}) is required"
        )
    return WeatherSeries(site=site, times=tuple(times), ghi=ghi, dni=dni, dhi=dhi)


def load_weather(path, fmt: str = "csv", site: SiteConfig | None = None) -> WeatherSeries:
    """Load and validate an hourly weather file.

    fmt "csv" expects a `timestamp,ghi,dni,dhi` header with ISO-8601 local
    timestamps; a SiteConfig must be supplied. fmt "epw" reads the standard
    EnergyPlus weather layout and takes the site from the LOCATION header
    unless one is passed explicitly. EPW hour-ending stamps are shifted to
    hour-beginning.
    """
    path = Path(path)
    if not path.exists():
        raise ParseError(f"weather file not found: {path}")
    if fmt == "csv":
        if site is None:
            raise ValidationError("CSV weather needs an explicit SiteConfig")
        return _load_csv(path, site)
    if fmt == "epw":
        return _load_epw(path, site)
    raise ValidationError(f"unknown weather format: {fmt!r}")


def _load_csv(path: Path, site: SiteConfig) -> WeatherSeries:
    times: list[datetime] = []
    ghi: list[float] = []
    dni: list[float] = []
    dhi: list[float] = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"timestamp", "ghi", "dni", "dhi"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise ParseError(f"{path}: header must contain {sorted(required)}")
        for i, row in enumerate(reader):
            try:
                times.append(datetime.fromisoformat(row["timestamp"]))
                ghi.append(float(row["ghi"]))
                dni.append(float(row["dni"]))
                dhi.append(float(row["dhi"]))
            except (TypeError, ValueError) as exc:
                raise ParseError(f"{path}: malformed row {i}: {exc}") from None
    return _validate_series(site, times, ghi, dni, dhi)


# EPW field positions (0-based) after the 8 header lines.
_EPW_GHI, _EPW_DNI, _EPW_DHI = 13, 14, 15


def _load_epw(path: Path, site: SiteConfig | None) -> WeatherSeries:
    with open(path, newline="") as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].upper().startswith("LOCATION"):
        raise ParseError(f"{path}: missing EPW LOCATION header")
    if site is None:
        loc = lines[0].split(",")
        try:
            site = SiteConfig(
                latitude=float(loc[6]), longitude=float(loc[7]), utc_offset=float(loc[8])
            )
        except (IndexError, ValueError) as exc:
            raise ParseError(f"{path}: unparseable LOCATION header: {exc}") from None
    times: list[datetime] = []
    ghi: list[float] = []
    dni: list[float] = []
    dhi: list[float] = []
    for i, line in enumerate(lines[8:]):
        if not line.strip():
            continue
        f = line.split(",")
        try:
            # EPW stamps the hour ending; shift to hour beginning.
            t = datetime(int(f[0]), int(f[1]), int(f[2]), int(f[3]) - 1)
            times.append(t)
            ghi.append(float(f[_EPW_GHI]))
            dni.append(float(f[_EPW_DNI]))
            dhi.append(float(f[_EPW_DHI]))
        except (IndexError, ValueError) as exc:
            raise ParseError(f"{path}: malformed EPW data row {i}: {exc}") from None
    return _validate_series(site, times, ghi, dni, dhi)


def write_weather_csv(series: WeatherSeries, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["timestamp", "ghi", "dni", "dhi"])
        for t, g, b, d in zip(series.times, series.ghi, series.dni, series.dhi):
            writer.writerow([t.isoformat(), repr(float(g)), repr(float(b)), repr(float(d))])


# ---------------------------------------------------------------------------
# Synthetic typical year
# ---------------------------------------------------------------------------

SOLAR_CONSTANT = 1361.0

# Monthly beam transmittance and diffuse scaling for a southern-Punjab-like
# climate: clear and dry Oct-Nov and Apr-May, winter fog Dec-Jan, monsoon
# cloud Jul-Aug.
KHANEWAL_BEAM = (0.68, 0.74, 0.78, 0.80, 0.80, 0.72, 0.50, 0.50, 0.70, 0.83, 0.83, 0.68)
KHANEWAL_DIFFUSE = (0.16, 0.16, 0.17, 0.17, 0.17, 0.20, 0.25, 0.25, 0.19, 0.13, 0.13, 0.16)

CLEARSKY_BEAM = 0.95
CLEARSKY_DIFFUSE = 0.10


def _airmass(zenith_deg: float) -> float:
    # Kasten & Young (1989); very large near the horizon.
    if zenith_deg >= 90.0:
        return float("inf")
    return 1.0 / (
        math.cos(math.radians(zenith_deg))
        + 0.50572 * (96.07995 - zenith_deg) ** -1.6364
    )


def synthesize_weather(
    site: SiteConfig,
    year: int = 2019,
    beam: float | tuple = CLEARSKY_BEAM,
    diffuse: float | tuple = CLEARSKY_DIFFUSE,
) -> WeatherSeries:
    """Deterministic hourly irradiance year for a site.

    DNI follows an airmass-attenuated clear beam scaled by a monthly beam
    factor; DHI is a monthly fraction of extraterrestrial irradiance scaled
    by cos(zenith); GHI closes the component identity exactly. Scalars apply
    the same factor to all twelve months.
    """
    from .solar import sun_position  # local import to avoid cycle at module load

    beam12 = tuple(beam) if isinstance(beam, (tuple, list)) else (float(beam),) * 12
    diff12 = tuple(diffuse) if isinstance(diffuse, (tuple, list)) else (float(diffuse),) * 12
    if len(beam12) != 12 or len(diff12) != 12:
        raise ValidationError("beam/diffuse factors must be scalars or 12-vectors")

    t0 = datetime(year, 1, 1, 0, 0)
    n = HOURS_PER_YEAR
    times = [t0 + timedelta(hours=i) for i in range(n)]
    ghi = np.zeros(n)
    dni = np.zeros(n)
    dhi = np.zeros(n)
    for i, t in enumerate(times):
        pos = sun_position(site, t)
        if not pos.is_up:
            continue
        doy = t.timetuple().tm_yday
        e0 = SOLAR_CONSTANT * (1.0 + 0.033 * math.cos(2.0 * math.pi * doy / 365.0))
        cos_z = math.cos(math.radians(pos.zenith))
        am = _airmass(pos.zenith)
        b = beam12[t.month - 1] * e0 * 0.7 ** (am**0.678)
        d = diff12[t.month - 1] * e0 * cos_z
        dni[i] = b
        dhi[i] = d
        ghi[i] = b * cos_z + d
    return _validate_series(site, times, ghi, dni, dhi)


def khanewal_weather(year: int = 2019) -> WeatherSeries:
    """Built-in Khanewal-like typical meteorological year."""
    return synthesize_weather(KHANEWAL, year, KHANEWAL_BEAM, KHANEWAL_DIFFUSE)


# ---------------------------------------------------------------------------
# Crop plans
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CropEntry:
    months: frozenset[int]
    crop_name: str
    revenue_full_sun: float  # $/ha for the season
    response_class: str = "T"

    def __post_init__(self) -> None:
        if not self.months or not all(1 <= m <= 12 for m in self.months):
            raise ValidationError(f"invalid months for {self.crop_name}: {sorted(self.months)}")
        if self.revenue_full_sun < 0:
            raise ValidationError(f"negative revenue for {self.crop_name}")

    @property
    def is_fallow(self) -> bool:
        return self.crop_name.lower() == "fallow"


@dataclass(frozen=True)
class CropPlan:
    name: str
    entries: tuple[CropEntry, ...]

    def __post_init__(self) -> None:
        seen: set[int] = set()
        for e in self.entries:
            overlap = seen & e.months
            if overlap:
                raise ValidationError(
                    f"crop plan {self.name}: months {sorted(overlap)} assigned twice"
                )
            seen |= e.months

    def covered_months(self) -> frozenset[int]:
        out: set[int] = set()
        for e in self.entries:
            out |= e.months
        return frozenset(out)

    def total_revenue(self) -> float:
        return sum(e.revenue_full_sun for e in self.entries if not e.is_fallow)


def _months(lo: int, hi: int) -> frozenset[int]:
    """Inclusive month span, wrapping across the new year."""
    if lo <= hi:
        return frozenset(range(lo, hi + 1))
    return frozenset(list(range(lo, 13)) + list(range(1, hi + 1)))


def builtin_crop_tables() -> list[CropPlan]:
    """Default low-value and high-value Khanewal crop rotations.

    Revenues are net $/ha per season; all crops use the shade-tolerant
    response class.
    """
    lv = CropPlan(
        "LV",
        (
            CropEntry(_months(4, 9), "cotton", 69.88),
            CropEntry(_months(10, 3), "wheat", 228.43),
        ),
    )
    hv = CropPlan(
        "HV",
        (
            CropEntry(_months(4, 6), "tomato", 948.81),
            CropEntry(_months(7, 9), "cauliflower", 1145.98),
            CropEntry(_months(10, 3), "garlic", 7097.54),
        ),
    )
    return [lv, hv]


def builtin_crop_plan(name: str) -> CropPlan:
    for plan in builtin_crop_tables():
        if plan.name == name.upper():
            return plan
    raise ValidationError(f"unknown builtin crop plan: {name!r}")


def uniform_crop_plan(response_class: str, revenue_full_sun: float = 0.0) -> CropPlan:
    """Single synthetic crop covering the whole year (feasibility studies)."""
    return CropPlan(
        f"uniform-{response_class}",
        (CropEntry(_months(1, 12), f"class-{response_class}", revenue_full_sun, response_class),),
    )


# ---------------------------------------------------------------------------
# Scenario
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EconConfig:
    """Economic constants; see the economics module for their use.

    rho_l above 1 reflects the higher land-related soft costs of elevated
    AV structures relative to GMPV; together with epsilon = 1 it also keeps
    the FIT-premium threshold monotone in M_L across the full design grid.
    """

    kappa_m: float | None = None  # None: resolved from scheme (tracker premium)
    rho_l: float = 1.2
    epsilon: float = 1.0
    m_l: float = 10.0
    a_lm_gmpv: float = 2.0
    d: float = 0.01
    r: float = 0.05
    horizon: int | None = None  # None = infinite
    c_m_gmpv: float = 100.0  # $/m2 module hardware, GMPV benchmark
    fit_baseline: float = 0.06  # $/kWh
    delta_fit_pct: float = 0.0  # FIT premium, % of baseline

    def __post_init__(self) -> None:
        for name in ("rho_l", "m_l", "a_lm_gmpv", "c_m_gmpv", "fit_baseline"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"econ.{name} must be positive")
        if not 0.0 < self.epsilon <= 1.0:
            raise ValidationError(f"econ.epsilon out of range (0, 1]: {self.epsilon}")
        for name in ("d", "r"):
            if not 0.0 <= getattr(self, name) < 1.0:
                raise ValidationError(f"econ.{name} out of range [0, 1)")
        if self.delta_fit_pct < 0.0:
            raise ValidationError("econ.delta_fit_pct must be >= 0")


@dataclass(frozen=True)
class LayoutConfig:
    """Row geometry; mirrors optics.ArrayLayout but stays file-shaped."""

    module_width: float = 2.0
    a_lm: float = 2.0
    height: float = 3.0
    bifacial_rear_weight: float | None = None  # None: 1 for EW_VERTICAL else 0

    def __post_init__(self) -> None:
        if self.module_width <= 0 or self.height < 0:
            raise ValidationError("layout width must be > 0 and height >= 0")
        if self.a_lm < 1.0:
            raise ValidationError(f"layout.a_lm must be >= 1: {self.a_lm}")
        if self.bifacial_rear_weight is not None and not 0.0 <= self.bifacial_rear_weight <= 1.0:
            raise ValidationError("layout.bifacial_rear_weight out of range [0, 1]")

    @property
    def pitch(self) -> float:
        return self.a_lm * self.module_width


@dataclass(frozen=True)
class SweepSpec:
    """Axes for a grid sweep; empty lists mean 'hold at scenario value'."""

    a_lm: tuple = ()
    m_l: tuple = ()
    delta_fit: tuple = ()
    crop_plan: tuple = ()
    scheme: tuple = ()
    max_cells: int = 10000

    def axes(self) -> dict[str, tuple]:
        out = {}
        for name in ("a_lm", "m_l", "delta_fit", "crop_plan", "scheme"):
            vals = getattr(self, name)
            if vals:
                out[name] = tuple(vals)
        return out

    def cell_count(self) -> int:
        n = 1
        for vals in self.axes().values():
            n *= len(vals)
        return n


@dataclass(frozen=True)
class Scenario:
    site: SiteConfig
    weather_source: str = "synthetic:khanewal"
    layout: LayoutConfig = field(default_factory=LayoutConfig)
    scheme: TrackingScheme = field(default_factory=lambda: TrackingScheme(TrackMode.CT, 6.0))
    crops: CropPlan = field(default_factory=lambda: builtin_crop_plan("HV"))
    econ: EconConfig = field(default_factory=EconConfig)
    theta_energy: float = 0.8
    theta_crop: float = 0.8
    sweep: SweepSpec | None = None

    def __post_init__(self) -> None:
        for name, th in (("theta_energy", self.theta_energy), ("theta_crop", self.theta_crop)):
            if not 0.0 < th <= 1.0:
                raise ValidationError(f"thresholds.{name} out of range (0, 1]: {th}")

    def load_weather(self) -> WeatherSeries:
        return resolve_weather(self.weather_source, self.site)


def resolve_weather(source: str, site: SiteConfig) -> WeatherSeries:
    kind, _, arg = source.partition(":")
    if kind == "synthetic":
        if arg in ("khanewal", ""):
            return khanewal_weather()
        if arg == "clearsky":
            return synthesize_weather(site)
        raise ValidationError(f"unknown synthetic weather {arg!r}")
    if kind in ("csv", "epw"):
        return load_weather(arg, kind, site)
    raise ValidationError(f"unknown weather source {source!r}")


_SCHEMA: dict[str, set[str]] = {
    "site": {"latitude", "longitude", "utc_offset", "albedo"},
    "weather": {"source"},
    "layout": {"module_width", "a_lm", "pitch", "height", "bifacial_rear_weight"},
    "scheme": {"mode", "st_hours", "rotation_limit", "fixed_tilt"},
    "crops": {"plan", "response_class", "entries"},
    "econ": {
        "kappa_m", "rho_l", "epsilon", "m_l", "a_lm_gmpv", "d", "r",
        "horizon", "c_m_gmpv", "fit_baseline", "delta_fit_pct",
    },
    "thresholds": {"energy", "crop"},
    "sweep": {"a_lm", "m_l", "delta_fit", "crop_plan", "scheme", "max_cells"},
}
_ENTRY_KEYS = {"months", "name", "revenue", "response"}


def _check_keys(doc: dict) -> None:
    for section, body in doc.items():
        if section not in _SCHEMA:
            raise SchemaError(f"unknown section [{section}]")
        if not isinstance(body, dict):
            raise SchemaError(f"section [{section}] must be a table")
        for key in body:
            if key not in _SCHEMA[section]:
                raise SchemaError(f"unknown key {section}.{key}")


def load_scenario(path) -> Scenario:
    path = Path(path)
    if not path.exists():
        raise ParseError(f"scenario file not found: {path}")
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from None
    return scenario_from_dict(doc)


def scenario_from_dict(doc: dict) -> Scenario:
    _check_keys(doc)
    if "site" not in doc:
        raise SchemaError("missing required section [site]")
    site = SiteConfig(
        latitude=float(doc["site"].get("latitude", 0.0)),
        longitude=float(doc["site"].get("longitude", 0.0)),
        utc_offset=float(doc["site"].get("utc_offset", 0.0)),
        albedo=float(doc["site"].get("albedo", 0.25)),
    )
    weather_source = doc.get("weather", {}).get("source", "synthetic:khanewal")

    lay = doc.get("layout", {})
    width = float(lay.get("module_width", 2.0))
    if "a_lm" in lay:
        a_lm = float(lay["a_lm"])
        if "pitch" in lay and not math.isclose(float(lay["pitch"]), a_lm * width):
            raise SchemaError("layout.pitch inconsistent with layout.a_lm * module_width")
    elif "pitch" in lay:
        a_lm = float(lay["pitch"]) / width
    else:
        a_lm = 2.0
    layout = LayoutConfig(
        module_width=width,
        a_lm=a_lm,
        height=float(lay.get("height", 3.0)),
        bifacial_rear_weight=(
            float(lay["bifacial_rear_weight"]) if "bifacial_rear_weight" in lay else None
        ),
    )

    sch = doc.get("scheme", {})
    try:
        mode = TrackMode(str(sch.get("mode", "CT")))
    except ValueError:
        raise SchemaError(f"scheme.mode not recognized: {sch.get('mode')!r}") from None
    st_hours = sch.get("st_hours")
    if mode is TrackMode.CT and st_hours is None:
        st_hours = 6.0
    scheme = TrackingScheme(
        mode=mode,
        st_hours=float(st_hours) if st_hours is not None else None,
        rotation_limit=float(sch.get("rotation_limit", 90.0)),
        fixed_tilt=float(sch["fixed_tilt"]) if "fixed_tilt" in sch else None,
    )

    crops_doc = doc.get("crops", {})
    if "entries" in crops_doc:
        entries = []
        for i, e in enumerate(crops_doc["entries"]):
            extra = set(e) - _ENTRY_KEYS
            if extra:
                raise SchemaError(f"unknown key crops.entries[{i}].{sorted(extra)[0]}")
            entries.append(
                CropEntry(
                    months=frozenset(int(m) for m in e["months"]),
                    crop_name=str(e["name"]),
                    revenue_full_sun=float(e["revenue"]),
                    response_class=str(e.get("response", "T")),
                )
            )
        crops = CropPlan("custom", tuple(entries))
    else:
        crops = builtin_crop_plan(str(crops_doc.get("plan", "HV")))
        if "response_class" in crops_doc:
            cls = str(crops_doc["response_class"])
            crops = CropPlan(
                crops.name, tuple(replace(e, response_class=cls) for e in crops.entries)
            )

    econ_doc = dict(doc.get("econ", {}))
    horizon = econ_doc.pop("horizon", None)
    kappa_m = econ_doc.pop("kappa_m", None)
    econ = EconConfig(
        kappa_m=float(kappa_m) if kappa_m is not None else None,
        horizon=int(horizon) if horizon is not None else None,
        **{k: float(v) for k, v in econ_doc.items()},
    )

    th = doc.get("thresholds", {})
    sweep = None
    if "sweep" in doc:
        sw = doc["sweep"]
        sweep = SweepSpec(
            a_lm=tuple(float(v) for v in sw.get("a_lm", ())),
            m_l=tuple(float(v) for v in sw.get("m_l", ())),
            delta_fit=tuple(float(v) for v in sw.get("delta_fit", ())),
            crop_plan=tuple(str(v) for v in sw.get("crop_plan", ())),
            scheme=tuple(str(v) for v in sw.get("scheme", ())),
            max_cells=int(sw.get("max_cells", 10000)),
        )
    return Scenario(
        site=site,
        weather_source=weather_source,
        layout=layout,
        scheme=scheme,
        crops=crops,
        econ=econ,
        theta_energy=float(th.get("energy", 0.8)),
        theta_crop=float(th.get("crop", 0.8)),
        sweep=sweep,
    )


def _toml_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, float)):
        return repr(v)
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    raise TypeError(f"cannot serialize {type(v)}")


def dump_scenario(sc: Scenario) -> str:
    """Canonical TOML text; load_scenario of it returns an equal Scenario."""
    out = io.StringIO()

    def section(name: str, pairs: list[tuple[str, object]]) -> None:
        out.write(f"[{name}]\n")
        for k, v in pairs:
            if v is not None:
                out.write(f"{k} = {_toml_value(v)}\n")
        out.write("\n")

    section("site", [
        ("latitude", sc.site.latitude),
        ("longitude", sc.site.longitude),
        ("utc_offset", sc.site.utc_offset),
        ("albedo", sc.site.albedo),
    ])
    section("weather", [("source", sc.weather_source)])
    section("layout", [
        ("module_width", sc.layout.module_width),
        ("a_lm", sc.layout.a_lm),
        ("height", sc.layout.height),
        ("bifacial_rear_weight", sc.layout.bifacial_rear_weight),
    ])
    section("scheme", [
        ("mode", sc.scheme.mode.value),
        ("st_hours", sc.scheme.st_hours),
        ("rotation_limit", sc.scheme.rotation_limit),
        ("fixed_tilt", sc.scheme.fixed_tilt),
    ])
    builtin_names = {p.name for p in builtin_crop_tables()}
    if sc.crops.name in builtin_names:
        classes = {e.response_class for e in sc.crops.entries}
        pairs: list[tuple[str, object]] = [("plan", sc.crops.name)]
        if len(classes) == 1 and classes != {"T"}:
            pairs.append(("response_class", next(iter(classes))))
        section("crops", pairs)
    else:
        out.write("[crops]\n")
        parts = []
        for e in sc.crops.entries:
            parts.append(
                "{months = %s, name = %s, revenue = %s, response = %s}"
                % (
                    _toml_value(sorted(e.months)),
                    _toml_value(e.crop_name),
                    _toml_value(e.revenue_full_sun),
                    _toml_value(e.response_class),
                )
            )
        out.write("entries = [\n    " + ",\n    ".join(parts) + ",\n]\n\n")
    section("econ", [
        ("kappa_m", sc.econ.kappa_m),
        ("rho_l", sc.econ.rho_l),
        ("epsilon", sc.econ.epsilon),
        ("m_l", sc.econ.m_l),
        ("a_lm_gmpv", sc.econ.a_lm_gmpv),
        ("d", sc.econ.d),
        ("r", sc.econ.r),
        ("horizon", sc.econ.horizon),
        ("c_m_gmpv", sc.econ.c_m_gmpv),
        ("fit_baseline", sc.econ.fit_baseline),
        ("delta_fit_pct", sc.econ.delta_fit_pct),
    ])
    section("thresholds", [("energy", sc.theta_energy), ("crop", sc.theta_crop)])
    if sc.sweep is not None:
        section("sweep", [
            ("a_lm", list(sc.sweep.a_lm) or None),
            ("m_l", list(sc.sweep.m_l) or None),
            ("delta_fit", list(sc.sweep.delta_fit) or None),
            ("crop_plan", list(sc.sweep.crop_plan) or None),
            ("scheme", list(sc.sweep.scheme) or None),
            ("max_cells", sc.sweep.max_cells),
        ])
    return out.getvalue()
