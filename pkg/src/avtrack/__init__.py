"""Simulator and optimizer for single-axis-tracked agrivoltaic systems."""

from .ingest import (
    CropEntry,
    CropPlan,
    EconConfig,
    KHANEWAL,
    LayoutConfig,
    Scenario,
    SiteConfig,
    SweepSpec,
    WeatherSeries,
    builtin_crop_plan,
    builtin_crop_tables,
    dump_scenario,
    khanewal_weather,
    load_scenario,
    load_weather,
    synthesize_weather,
)
from .optics import ArrayLayout, GroundProfile, YieldSeries, simulate_year, y_pv
from .solar import RotationState, SunPosition, TrackMode, TrackingScheme

__version__ = "0.1.0"

__all__ = [
    "ArrayLayout",
    "CropEntry",
    "CropPlan",
    "EconConfig",
    "GroundProfile",
    "KHANEWAL",
    "LayoutConfig",
    "RotationState",
    "Scenario",
    "SiteConfig",
    "SunPosition",
    "SweepSpec",
    "TrackMode",
    "TrackingScheme",
    "WeatherSeries",
    "YieldSeries",
    "builtin_crop_plan",
    "builtin_crop_tables",
    "dump_scenario",
    "khanewal_weather",
    "load_scenario",
    "load_weather",
    "simulate_year",
    "synthesize_weather",
    "y_pv",
]
