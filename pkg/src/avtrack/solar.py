"""Sun position and single-axis tracker rotation schedules.

Sun position follows the NOAA solar-calculator equations (fractional-year
Fourier series for declination and the equation of time), which stay within
a few hundredths of a degree of high-precision ephemerides for the years
relevant to weather files. Timestamps are civil local time; the conversion
to true solar time uses the site longitude, the fixed UTC offset, and the
equation of time.

Tracker geometry: the rotation axis is horizontal and the module rotates
about it in the vertical plane perpendicular to the rows. For north-south
axes (the tracked modes and the vertical east-west fence) the transverse
direction is east; for east-west axes (fixed equator-facing tilt) it is
north. A rotation of 0 is a flat module; negative rotations tilt the module
normal toward the transverse minus direction (east for tracked rows).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date, datetime, time, timedelta
from enum import Enum


class SolarError(ValueError):
    """Invalid request to the solar geometry layer (e.g. sun below horizon)."""


@dataclass(frozen=True)
class SunPosition:
    """Topocentric sun position at one instant.

    zenith: degrees from vertical, in [0, 180].
    azimuth: degrees clockwise from north, in [0, 360).
    """

    zenith: float
    azimuth: float

    @property
    def is_up(self) -> bool:
        return self.zenith < 90.0

    @property
    def elevation(self) -> float:
        return 90.0 - self.zenith

    def unit_vector(self) -> tuple[float, float, float]:
        """Unit vector toward the sun in (east, north, up) coordinates."""
        z = math.radians(self.zenith)
        a = math.radians(self.azimuth)
        return (math.sin(z) * math.sin(a), math.sin(z) * math.cos(a), math.cos(z))


class TrackMode(str, Enum):
    ST = "ST"
    AT = "AT"
    CT = "CT"
    NS_FIXED = "NS_FIXED"
    EW_VERTICAL = "EW_VERTICAL"


@dataclass(frozen=True)
class TrackingScheme:
    """Module attitude policy for the year.

    st_hours is the daily sun-tracking window length n (hours, centered on
    solar noon) and is meaningful only for CT; CT with n=0 degenerates to
    anti-tracking and CT with n covering all daylight degenerates to
    standard tracking. fixed_tilt applies to NS_FIXED only (None means
    |latitude|).
    """

    mode: TrackMode
    st_hours: float | None = None
    rotation_limit: float = 90.0
    fixed_tilt: float | None = None

    def __post_init__(self) -> None:
        if not isinstance(self.mode, TrackMode):
            object.__setattr__(self, "mode", TrackMode(str(self.mode)))
        if self.mode is TrackMode.CT:
            if self.st_hours is None:
                raise SolarError("CT scheme requires st_hours")
            if not 0.0 <= self.st_hours <= 24.0:
                raise SolarError(f"st_hours out of range [0, 24]: {self.st_hours}")
        elif self.st_hours is not None:
            raise SolarError(f"st_hours only valid for CT mode, got mode={self.mode.value}")
        if not 0.0 < self.rotation_limit <= 90.0:
            raise SolarError(f"rotation_limit out of range (0, 90]: {self.rotation_limit}")
        if self.fixed_tilt is not None and self.mode is not TrackMode.NS_FIXED:
            raise SolarError("fixed_tilt only valid for NS_FIXED mode")

    def label(self) -> str:
        if self.mode is TrackMode.CT:
            return f"CT({self.st_hours:g})"
        return self.mode.value


@dataclass(frozen=True)
class RotationState:
    """Module attitude in the row-transverse vertical plane.

    rotation: degrees about the row axis; 0 is flat, sign follows the
    transverse axis convention (negative = normal tilted east for N-S rows).
    axis: "ns" for north-south rows (transverse = east) or "ew" for
    east-west rows (transverse = north).
    tracking: True when the rotation came from an ST branch (used by
    schedule introspection, not by the optics).
    """

    rotation: float
    axis: str = "ns"
    tracking: bool = False

    def __post_init__(self) -> None:
        if self.axis not in ("ns", "ew"):
            raise SolarError(f"axis must be 'ns' or 'ew', got {self.axis!r}")
        if not -90.0 <= self.rotation <= 90.0:
            raise SolarError(f"rotation out of range [-90, 90]: {self.rotation}")


PARKED_NS = RotationState(0.0, "ns")
PARKED_EW = RotationState(0.0, "ew")


def _fractional_year(t: datetime) -> float:
    doy = t.timetuple().tm_yday
    return 2.0 * math.pi / 365.0 * (doy - 1 + (t.hour - 12) / 24.0)


def equation_of_time(t: datetime) -> float:
    """Equation of time in minutes (apparent solar minus mean clock time)."""
    g = _fractional_year(t)
    return 229.18 * (
        0.000075
        + 0.001868 * math.cos(g)
        - 0.032077 * math.sin(g)
        - 0.014615 * math.cos(2 * g)
        - 0.040849 * math.sin(2 * g)
    )


def declination(t: datetime) -> float:
    """Solar declination in degrees."""
    g = _fractional_year(t)
    decl = (
        0.006918
        - 0.399912 * math.cos(g)
        + 0.070257 * math.sin(g)
        - 0.006758 * math.cos(2 * g)
        + 0.000907 * math.sin(2 * g)
        - 0.002697 * math.cos(3 * g)
        + 0.00148 * math.sin(3 * g)
    )
    return math.degrees(decl)


def true_solar_time(longitude: float, utc_offset: float, t: datetime) -> float:
    """True solar time in fractional hours (12.0 = solar noon)."""
    clock_min = t.hour * 60.0 + t.minute + t.second / 60.0
    offset = equation_of_time(t) + 4.0 * longitude - 60.0 * utc_offset
    return ((clock_min + offset) % 1440.0) / 60.0


def sun_position(site, t: datetime) -> SunPosition:
    """Sun zenith/azimuth for a site at a civil local timestamp.

    `site` needs latitude, longitude and utc_offset attributes (degrees,
    degrees east, hours).
    """
    lat = math.radians(site.latitude)
    decl = math.radians(declination(t))
    tst = true_solar_time(site.longitude, site.utc_offset, t)
    ha = math.radians(15.0 * (tst - 12.0))

    cos_zen = math.sin(lat) * math.sin(decl) + math.cos(lat) * math.cos(decl) * math.cos(ha)
    cos_zen = min(1.0, max(-1.0, cos_zen))
    zenith = math.degrees(math.acos(cos_zen))

    s_east = -math.cos(decl) * math.sin(ha)
    s_north = math.sin(decl) * math.cos(lat) - math.cos(decl) * math.cos(ha) * math.sin(lat)
    azimuth = math.degrees(math.atan2(s_east, s_north)) % 360.0
    return SunPosition(zenith=zenith, azimuth=azimuth)


def solar_noon(site, day: date) -> datetime:
    """Civil local time of solar noon (minimum zenith) on the given date."""
    # Evaluate the equation of time at approximate noon, then refine once.
    approx = datetime.combine(day, time(12, 0))
    for _ in range(2):
        minutes = 720.0 - equation_of_time(approx) - 4.0 * site.longitude + 60.0 * site.utc_offset
        minutes %= 1440.0
        approx = datetime.combine(day, time(0, 0)) + timedelta(minutes=minutes)
    return approx


def daylight_hours(site, day: date) -> float:
    """Length of the day in hours from the sunrise hour angle."""
    decl = math.radians(declination(datetime.combine(day, time(12, 0))))
    lat = math.radians(site.latitude)
    x = -math.tan(lat) * math.tan(decl)
    if x <= -1.0:
        return 24.0
    if x >= 1.0:
        return 0.0
    return 2.0 * math.degrees(math.acos(x)) / 15.0


def _transverse_components(sun: SunPosition, axis: str) -> tuple[float, float]:
    e, n, u = sun.unit_vector()
    return (e if axis == "ns" else n), u


def st_rotation(sun: SunPosition, limit: float = 90.0) -> RotationState:
    """Sun-tracking rotation: align the module normal with the beam's
    projection onto the transverse plane, clamped to the rotation limit.

    Among admissible rotations this maximizes the front beam incidence
    cosine, which varies as cos(rotation - optimum) in the transverse plane.
    """
    if not sun.is_up:
        raise SolarError("st_rotation requires the sun above the horizon")
    s_t, s_z = _transverse_components(sun, "ns")
    theta = math.degrees(math.atan2(-s_t, s_z))
    return RotationState(min(limit, max(-limit, theta)), "ns", tracking=True)


def at_rotation(sun: SunPosition, limit: float = 90.0) -> RotationState:
    """Anti-tracking rotation: module face parallel to the beam.

    Orthogonal to the sun-tracking rotation; the 90 degree offset is taken
    toward zero (theta_ST = 0 maps to +90), then clamped.
    """
    if not sun.is_up:
        raise SolarError("at_rotation requires the sun above the horizon")
    s_t, s_z = _transverse_components(sun, "ns")
    theta_st = math.degrees(math.atan2(-s_t, s_z))
    theta_at = theta_st + 90.0 if theta_st <= 0.0 else theta_st - 90.0
    return RotationState(min(limit, max(-limit, theta_at)), "ns")


def ct_rotation(scheme: TrackingScheme, site, t: datetime) -> RotationState:
    """Rotation state at a timestamp for any scheme.

    CT uses the ST rotation when true solar time is within st_hours/2 of
    solar noon and the AT rotation otherwise. Fixed schemes return their
    constant attitude. With the sun below the horizon, tracked modules park
    flat and fixed modules keep their attitude (irradiance is zero either
    way).
    """
    mode = scheme.mode
    if mode is TrackMode.NS_FIXED:
        tilt = abs(site.latitude) if scheme.fixed_tilt is None else scheme.fixed_tilt
        rot = tilt if site.latitude >= 0.0 else -tilt
        return RotationState(rot, "ew")
    if mode is TrackMode.EW_VERTICAL:
        return RotationState(90.0, "ns")

    sun = sun_position(site, t)
    if not sun.is_up:
        return PARKED_NS
    if mode is TrackMode.ST:
        return st_rotation(sun, scheme.rotation_limit)
    if mode is TrackMode.AT:
        return at_rotation(sun, scheme.rotation_limit)
    # CT: sun-track within n/2 hours of solar noon, anti-track otherwise
    tst = true_solar_time(site.longitude, site.utc_offset, t)
    if abs(tst - 12.0) <= scheme.st_hours / 2.0:
        return st_rotation(sun, scheme.rotation_limit)
    return at_rotation(sun, scheme.rotation_limit)
