"""Two-dimensional infinite-row irradiance model.

The scene is one module row repeated at a fixed pitch, infinitely long and
infinitely repeated, so everything reduces to the vertical plane transverse
to the rows: x across the rows (one pitch is periodic), z up. A module is
an opaque zero-thickness chord of width w centered at hub height h.

Beam terms are closed-form: projecting the chord endpoints along the beam
gives the ground shadow band, and the module-intercepted and ground beam
fluxes are exact complements of the incident flux through one pitch.

Diffuse terms use view factors. Sky diffuse on the ground is computed by
exact angular-interval arithmetic (the angle subtended by every obstructing
chord is removed from the sky dome and the remainder integrated). Sky and
ground-reflected terms on the module faces are integrated by an equal
view-factor binned sweep over the face's hemicircle, classifying each
direction as sky, ground cell, or blocked by a neighboring row. Modules are
treated as black (no module-reflected light), and flat ground cannot see
itself, so the ground profile has no albedo term while module faces do.

All per-timestep operations are vectorized over a full year; the
rotation-dependent view-factor tables are precomputed per layout on a one
degree rotation grid and cached.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import datetime

import numpy as np

from .solar import RotationState, SunPosition, TrackMode, TrackingScheme, ct_rotation

# Nominal electrical conversion efficiency. It cancels in energy-yield
# ratios and only scales absolute kWh/m2 outputs.
MODULE_EFFICIENCY = 0.20

THETA_GRID = np.linspace(-90.0, 90.0, 181)
GROUND_ROWS = 64  # neighbor rows each side for ground sky view factors
MODULE_ROWS = 24  # neighbor rows each side for module-face view factors
MODULE_SAMPLES = 16  # chord sample points
U_BINS = 512  # equal view-factor bins per module-face hemicircle

_EPS = 1e-12


class OpticsError(ValueError):
    pass


@dataclass(frozen=True)
class ArrayLayout:
    """Row geometry. a_lm is the land-to-module area ratio pitch/width;
    the usual density presets are a_lm = 2 (full), 4 (half), 6 (one-third).
    """

    module_width: float = 2.0
    a_lm: float = 2.0
    height: float = 3.0
    bifacial_rear_weight: float = 0.0
    ground_points: int = 100

    def __post_init__(self) -> None:
        if self.module_width <= 0.0:
            raise OpticsError(f"module_width must be > 0: {self.module_width}")
        if self.a_lm < 1.0:
            raise OpticsError(f"a_lm must be >= 1: {self.a_lm}")
        if self.height < 0.0:
            raise OpticsError(f"height must be >= 0: {self.height}")
        if not 0.0 <= self.bifacial_rear_weight <= 1.0:
            raise OpticsError("bifacial_rear_weight out of range [0, 1]")
        if self.ground_points < 32:
            raise OpticsError(f"ground_points must be >= 32: {self.ground_points}")

    @property
    def pitch(self) -> float:
        return self.a_lm * self.module_width

    def ground_x(self) -> np.ndarray:
        k = self.ground_points
        return (np.arange(k) + 0.5) * self.pitch / k


@dataclass(frozen=True)
class GroundProfile:
    """Irradiance across one pitch at a single timestep."""

    points: np.ndarray
    irradiance: np.ndarray
    unshaded_ghi: float


def _chord_endpoints(layout: ArrayLayout, theta_deg, row_offsets) -> np.ndarray:
    """Segment endpoints (S, 4) as x1,z1,x2,z2 for rows at the offsets."""
    th = math.radians(theta_deg)
    hw = 0.5 * layout.module_width
    cx = np.asarray(row_offsets, dtype=float) * layout.pitch
    x1 = cx + hw * math.cos(th)
    z1 = np.full_like(cx, layout.height + hw * math.sin(th))
    x2 = cx - hw * math.cos(th)
    z2 = np.full_like(cx, layout.height - hw * math.sin(th))
    return np.stack([x1, z1, x2, z2], axis=1)


def _merged_blocked(lo: np.ndarray, hi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Union of [lo, hi] intervals, both returned sorted and disjoint."""
    keep = hi > lo
    lo, hi = lo[keep], hi[keep]
    if lo.size == 0:
        return lo, hi
    order = np.argsort(lo, kind="stable")
    lo, hi = lo[order], hi[order]
    cmax = np.maximum.accumulate(hi)
    new = np.empty(lo.size, dtype=bool)
    new[0] = True
    new[1:] = lo[1:] > cmax[:-1]
    starts = np.flatnonzero(new)
    return lo[starts], np.maximum.reduceat(hi, starts)


def _ground_sky_vf(layout: ArrayLayout, theta_deg: float) -> np.ndarray:
    """Exact sky view factor at each ground sample point for one rotation.

    The view factor from a horizontal element to the sky band between
    in-plane angles [a, b] (measured from the +x horizon) is
    (cos a - cos b) / 2; obstructed bands are removed by interval union.
    """
    rows = np.arange(-GROUND_ROWS, GROUND_ROWS + 1)
    segs = _chord_endpoints(layout, theta_deg, rows)
    xs = layout.ground_x()
    out = np.empty(xs.size)
    for j, px in enumerate(xs):
        a1 = np.arctan2(segs[:, 1], segs[:, 0] - px)
        a2 = np.arctan2(segs[:, 3], segs[:, 2] - px)
        lo = np.minimum(a1, a2)
        hi = np.maximum(a1, a2)
        # A chord dipping below grade blocks only with its above-ground
        # part. Spans over pi wide are the wrapped arcs of ground-crossing
        # chords behind the point; their sky part is [hi, pi].
        wrapped = hi - lo > math.pi
        lo = np.where(wrapped, hi, lo)
        hi = np.where(wrapped, math.pi, hi)
        lo, hi = _merged_blocked(np.clip(lo, 0.0, math.pi), np.clip(hi, 0.0, math.pi))
        blocked = 0.5 * np.sum(np.cos(lo) - np.cos(hi))
        out[j] = 1.0 - blocked
    return out


def _module_face_tables(layout: ArrayLayout, theta_deg: float, rear: bool):
    """Sky view factor and per-ground-cell kernel for one module face.

    Sweeps the face hemicircle in equal view-factor bins; each direction is
    attributed to the sky, to the first blocking neighbor chord (black), or
    to the ground cell it lands in. Returns (sky_vf, kernel[K]) averaged
    over chord sample points; albedo * kernel . ground_irradiance gives the
    reflected term.
    """
    th = math.radians(theta_deg)
    p = layout.pitch
    k = layout.ground_points
    beta = th + (math.pi / 2.0 if not rear else -math.pi / 2.0)

    frac = (np.arange(MODULE_SAMPLES) + 0.5) / MODULE_SAMPLES - 0.5
    px = frac * layout.module_width * math.cos(th)
    pz = layout.height + frac * layout.module_width * math.sin(th)

    rows = np.concatenate([np.arange(-MODULE_ROWS, 0), np.arange(1, MODULE_ROWS + 1)])
    segs = _chord_endpoints(layout, theta_deg, rows)

    u_edges = np.linspace(-1.0, 1.0, U_BINS + 1)
    u_mid = 0.5 * (u_edges[:-1] + u_edges[1:])
    w_bin = 0.5 * (u_edges[1:] - u_edges[:-1])  # view factor weight per bin
    gamma = np.arcsin(u_mid)
    dx = np.cos(beta + gamma)  # (B,)
    dz = np.sin(beta + gamma)

    # Ray-segment intersections, (S samples, B bins, G segments)
    ax, az = segs[:, 0], segs[:, 1]
    bx, bz = segs[:, 2] - ax, segs[:, 3] - az
    apx = ax[None, None, :] - px[:, None, None]
    apz = az[None, None, :] - pz[:, None, None]
    denom = dx[None, :, None] * bz[None, None, :] - dz[None, :, None] * bx[None, None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (apx * bz[None, None, :] - apz * bx[None, None, :]) / denom
        s = (apx * dz[None, :, None] - apz * dx[None, :, None]) / denom
    hit = (np.abs(denom) > _EPS) & (t > 1e-9) & (s >= 0.0) & (s <= 1.0)
    t_obs = np.where(hit, t, np.inf).min(axis=2)  # (S, B)

    with np.errstate(divide="ignore", invalid="ignore"):
        t_gnd = np.where(dz[None, :] < -_EPS, -pz[:, None] / dz[None, :], np.inf)
    t_gnd = np.where(t_gnd > 0.0, t_gnd, np.inf)

    sky = (dz[None, :] >= -_EPS) & (t_obs == np.inf)
    gnd = t_gnd < t_obs
    sky_vf = float(np.sum(sky * w_bin[None, :]) / MODULE_SAMPLES)

    kernel = np.zeros(k)
    with np.errstate(invalid="ignore"):
        x_hit = np.where(gnd, (px[:, None] + t_gnd * dx[None, :]) % p, 0.0)
    cell = np.clip((x_hit / p * k).astype(int), 0, k - 1)
    np.add.at(kernel, cell[gnd], np.broadcast_to(w_bin, gnd.shape)[gnd])
    kernel /= MODULE_SAMPLES
    return sky_vf, kernel


@dataclass
class _VFTables:
    ground_sky: np.ndarray  # (181, K)
    mod_sky: np.ndarray  # (181, 2) front/rear
    mod_gnd: np.ndarray  # (181, 2, K)


_TABLE_CACHE: dict[tuple, _VFTables] = {}


def vf_tables(layout: ArrayLayout) -> _VFTables:
    key = (layout.module_width, layout.a_lm, layout.height, layout.ground_points)
    tab = _TABLE_CACHE.get(key)
    if tab is not None:
        return tab
    k = layout.ground_points
    n = THETA_GRID.size
    ground_sky = np.empty((n, k))
    mod_sky = np.empty((n, 2))
    mod_gnd = np.empty((n, 2, k))
    for i, th in enumerate(THETA_GRID):
        ground_sky[i] = _ground_sky_vf(layout, th)
        for side, rear in ((0, False), (1, True)):
            mod_sky[i, side], mod_gnd[i, side] = _module_face_tables(layout, th, rear)
    tab = _VFTables(ground_sky, mod_sky, mod_gnd)
    _TABLE_CACHE[key] = tab
    return tab


def _interp_rows(table: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """Linear interpolation of per-rotation table rows at each timestep."""
    pos = np.clip(theta + 90.0, 0.0, 180.0)
    i = np.minimum(pos.astype(int), 179)
    f = pos - i
    lo = table[i]
    hi = table[i + 1]
    return lo + (hi - lo) * (f.reshape((-1,) + (1,) * (table.ndim - 1)))


# ---------------------------------------------------------------------------
# Vectorized evaluation
# ---------------------------------------------------------------------------


@dataclass
class SunTable:
    """Per-timestep sun geometry shared across schemes for one site/year."""

    s_east: np.ndarray
    s_north: np.ndarray
    s_up: np.ndarray
    solar_time: np.ndarray  # true solar hours

    @property
    def day(self) -> np.ndarray:
        return self.s_up > 1e-9


_SUN_CACHE: dict[tuple, SunTable] = {}


def build_sun_table(site, times) -> SunTable:
    from .solar import sun_position, true_solar_time

    key = (site.latitude, site.longitude, site.utc_offset, times[0], times[-1], len(times))
    tab = _SUN_CACHE.get(key)
    if tab is not None:
        return tab
    n = len(times)
    s_e = np.empty(n)
    s_n = np.empty(n)
    s_u = np.empty(n)
    tst = np.empty(n)
    for i, t in enumerate(times):
        e, nn, u = sun_position(site, t).unit_vector()
        s_e[i], s_n[i], s_u[i] = e, nn, u
        tst[i] = true_solar_time(site.longitude, site.utc_offset, t)
    tab = SunTable(s_e, s_n, s_u, tst)
    _SUN_CACHE[key] = tab
    return tab


def rotation_series(scheme: TrackingScheme, site, sun: SunTable):
    """(theta_deg array, axis, st_mask) for a scheme over a sun table."""
    lim = scheme.rotation_limit
    if scheme.mode is TrackMode.NS_FIXED:
        tilt = abs(site.latitude) if scheme.fixed_tilt is None else scheme.fixed_tilt
        rot = tilt if site.latitude >= 0.0 else -tilt
        theta = np.full(sun.s_up.size, rot)
        return theta, "ew", np.zeros(sun.s_up.size, dtype=bool)
    if scheme.mode is TrackMode.EW_VERTICAL:
        return np.full(sun.s_up.size, 90.0), "ns", np.zeros(sun.s_up.size, dtype=bool)

    day = sun.day
    theta_st = np.degrees(np.arctan2(-sun.s_east, np.maximum(sun.s_up, _EPS)))
    theta_st = np.clip(theta_st, -lim, lim)
    theta_at = np.where(theta_st <= 0.0, theta_st + 90.0, theta_st - 90.0)
    theta_at = np.clip(theta_at, -lim, lim)
    if scheme.mode is TrackMode.ST:
        st_mask = day.copy()
    elif scheme.mode is TrackMode.AT:
        st_mask = np.zeros(day.size, dtype=bool)
    else:  # CT
        st_mask = day & (np.abs(sun.solar_time - 12.0) <= scheme.st_hours / 2.0)
    theta = np.where(st_mask, theta_st, theta_at)
    theta = np.where(day, theta, 0.0)  # parked flat at night
    return theta, "ns", st_mask


@dataclass(eq=False)
class YieldSeries:
    """Per-timestep irradiance outcome of a year simulation.

    front/rear are module plane-of-array W/m2; ground is (T, K) W/m2 across
    one pitch; module_energy is electrical Wh/m2 per hour step. The beam_*
    arrays carry the exact per-pitch beam flux bookkeeping (W per meter of
    row) used by the conservation checks. reference is the GMPV comparison
    run (None on the reference itself).
    """

    times: tuple
    month: np.ndarray
    theta: np.ndarray
    axis: str
    front: np.ndarray
    rear: np.ndarray
    ground: np.ndarray
    ghi: np.ndarray
    dni: np.ndarray
    dhi: np.ndarray
    module_energy: np.ndarray
    beam_incident: np.ndarray
    beam_module: np.ndarray
    beam_ground: np.ndarray
    st_mask: np.ndarray
    reference: "YieldSeries | None" = None
    _monthly: dict = field(default_factory=dict, repr=False)

    @property
    def daylight(self) -> np.ndarray:
        return self.ghi > 0.0

    @property
    def ground_mean(self) -> np.ndarray:
        return self.ground.mean(axis=1)

    def _cache(self, key, fn):
        if key not in self._monthly:
            self._monthly[key] = fn()
        return self._monthly[key]

    def monthly_module_energy(self) -> np.ndarray:
        """Electrical Wh/m2 per calendar month (12,)."""

        def compute():
            out = np.zeros(12)
            np.add.at(out, self.month - 1, self.module_energy)
            return out

        return self._cache("energy", compute)

    def monthly_shading_ratio(self) -> np.ndarray:
        """Plain mean of ground_mean/ghi over daylight steps per month."""

        def compute():
            out = np.full(12, np.nan)
            day = self.daylight
            ratio = np.zeros_like(self.ghi)
            ratio[day] = self.ground_mean[day] / self.ghi[day]
            for m in range(1, 13):
                sel = day & (self.month == m)
                if sel.any():
                    out[m - 1] = ratio[sel].mean()
            return out

        return self._cache("shading", compute)

    def monthly_par_fraction(self) -> np.ndarray:
        """Irradiance-weighted shading ratio per month (12,)."""

        def compute():
            num = np.zeros(12)
            den = np.zeros(12)
            np.add.at(num, self.month - 1, self.ground_mean)
            np.add.at(den, self.month - 1, self.ghi)
            with np.errstate(invalid="ignore", divide="ignore"):
                return np.where(den > 0, num / den, np.nan)

        return self._cache("par", compute)

    def monthly_y_pv(self) -> np.ndarray:
        if self.reference is None:
            raise OpticsError("series has no reference run")
        ref = self.reference.monthly_module_energy()
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(ref > 0, self.monthly_module_energy() / ref, np.nan)

    def annual_module_energy_kwh(self) -> float:
        return float(self.module_energy.sum()) / 1000.0


def evaluate_series(
    layout: ArrayLayout,
    albedo: float,
    theta: np.ndarray,
    axis: str,
    sun: SunTable,
    ghi: np.ndarray,
    dni: np.ndarray,
    dhi: np.ndarray,
):
    """Core vectorized irradiance evaluation; returns a dict of arrays."""
    p = layout.pitch
    w = layout.module_width
    h = layout.height
    xs = layout.ground_x()

    s_t = sun.s_east if axis == "ns" else sun.s_north
    s_z = sun.s_up
    day = sun.day
    th = np.radians(theta)

    dip = 0.5 * w * float(np.abs(np.sin(th)).max()) - h
    if dip > 1e-9:
        raise OpticsError(
            f"rotation schedule sweeps the module {dip:.2f} m below grade; "
            f"raise the hub height or tighten the rotation limit"
        )

    cos_i = -np.sin(th) * s_t + np.cos(th) * s_z  # front beam incidence cosine
    sz_safe = np.maximum(s_z, _EPS)
    shadow_len = w * np.abs(cos_i) / sz_safe
    f_unsh = np.minimum(1.0, p / np.maximum(shadow_len, _EPS))
    beam = dni * day
    front_direct = beam * np.maximum(cos_i, 0.0) * f_unsh
    rear_direct = beam * np.maximum(-cos_i, 0.0) * f_unsh

    # Ground beam shadow band from chord endpoint projections (periodic).
    hw = 0.5 * w
    e1x, e1z = hw * np.cos(th), h + hw * np.sin(th)
    e2x, e2z = -hw * np.cos(th), h - hw * np.sin(th)
    ratio = s_t / sz_safe
    g1 = e1x - e1z * ratio
    g2 = e2x - e2z * ratio
    g_lo = np.minimum(g1, g2)
    band = np.abs(g1 - g2)
    rel = (xs[None, :] - g_lo[:, None]) % p
    lit = rel >= np.minimum(band, p)[:, None]
    gnd_direct = (beam * s_z)[:, None] * lit

    if theta.size <= 4:
        # Few rotations (single-timestep API): exact view factors at each
        # requested angle instead of the interpolated rotation-grid tables.
        gsky = np.empty((theta.size, xs.size))
        msky = np.empty((theta.size, 2))
        mgnd = np.empty((theta.size, 2, xs.size))
        for i, td in enumerate(theta):
            gsky[i] = _ground_sky_vf(layout, float(td))
            for side, rear in ((0, False), (1, True)):
                msky[i, side], mgnd[i, side] = _module_face_tables(layout, float(td), rear)
        gnd_sky = dhi[:, None] * gsky
        ground = gnd_direct + gnd_sky
        mod_sky, mod_gnd = msky, mgnd
    else:
        tabs = vf_tables(layout)
        gnd_sky = dhi[:, None] * _interp_rows(tabs.ground_sky, theta)
        ground = gnd_direct + gnd_sky
        mod_sky = _interp_rows(tabs.mod_sky, theta)  # (T, 2)
        mod_gnd = _interp_rows(tabs.mod_gnd, theta)  # (T, 2, K)
    front_sky = dhi * mod_sky[:, 0]
    rear_sky = dhi * mod_sky[:, 1]
    front_refl = albedo * np.einsum("tk,tk->t", mod_gnd[:, 0, :], ground)
    rear_refl = albedo * np.einsum("tk,tk->t", mod_gnd[:, 1, :], ground)

    beam_incident = beam * s_z * p
    beam_module = beam * np.abs(cos_i) * w * f_unsh
    beam_ground = beam * s_z * np.maximum(p - band, 0.0)

    return {
        "front": front_direct + front_sky + front_refl,
        "rear": rear_direct + rear_sky + rear_refl,
        "ground": ground,
        "beam_incident": beam_incident,
        "beam_module": beam_module,
        "beam_ground": beam_ground,
    }


def simulate_scheme(
    layout: ArrayLayout,
    scheme: TrackingScheme,
    site,
    weather,
    reference: "YieldSeries | None" = None,
) -> YieldSeries:
    """Simulate one scheme over a weather year (no reference attached)."""
    sun = build_sun_table(site, weather.times)
    theta, axis, st_mask = rotation_series(scheme, site, sun)
    out = evaluate_series(
        layout, site.albedo, theta, axis, sun, weather.ghi, weather.dni, weather.dhi
    )
    phi = layout.bifacial_rear_weight
    energy = MODULE_EFFICIENCY * (out["front"] + phi * out["rear"])
    month = np.array([t.month for t in weather.times], dtype=np.int64)
    return YieldSeries(
        times=weather.times,
        month=month,
        theta=theta,
        axis=axis,
        front=out["front"],
        rear=out["rear"],
        ground=out["ground"],
        ghi=weather.ghi,
        dni=weather.dni,
        dhi=weather.dhi,
        module_energy=energy,
        beam_incident=out["beam_incident"],
        beam_module=out["beam_module"],
        beam_ground=out["beam_ground"],
        st_mask=st_mask,
        reference=reference,
    )


def reference_layout(layout: ArrayLayout) -> ArrayLayout:
    """GMPV comparison geometry: full density, monofacial, same hardware."""
    return ArrayLayout(
        module_width=layout.module_width,
        a_lm=2.0,
        height=layout.height,
        bifacial_rear_weight=0.0,
        ground_points=layout.ground_points,
    )


REFERENCE_SCHEME = TrackingScheme(TrackMode.NS_FIXED)


def simulate_reference(layout: ArrayLayout, site, weather) -> YieldSeries:
    return simulate_scheme(reference_layout(layout), REFERENCE_SCHEME, site, weather)


def resolve_bifacial(scheme: TrackingScheme, configured: float | None) -> float:
    """Rear-side weight: vertical east-west fences are bifacial by default."""
    if configured is not None:
        return configured
    return 1.0 if scheme.mode is TrackMode.EW_VERTICAL else 0.0


def simulate_year(scenario, weather=None) -> YieldSeries:
    """Simulate a scenario's scheme and attach the GMPV reference run."""
    if weather is None:
        weather = scenario.load_weather()
    phi = resolve_bifacial(scenario.scheme, scenario.layout.bifacial_rear_weight)
    layout = ArrayLayout(
        module_width=scenario.layout.module_width,
        a_lm=scenario.layout.a_lm,
        height=scenario.layout.height,
        bifacial_rear_weight=phi,
    )
    ref = simulate_reference(layout, scenario.site, weather)
    return simulate_scheme(layout, scenario.scheme, scenario.site, weather, reference=ref)


def y_pv(series: YieldSeries, months=None) -> float:
    """Module energy per m2 of the run divided by the reference's, over the
    given months (all twelve when None)."""
    if series.reference is None:
        raise OpticsError("series has no reference run")
    if months is None:
        months = range(1, 13)
    months = sorted(set(int(m) for m in months))
    if not months:
        raise OpticsError("empty month selection")
    av = series.monthly_module_energy()
    ref = series.reference.monthly_module_energy()
    num = sum(av[m - 1] for m in months)
    den = sum(ref[m - 1] for m in months)
    if den <= 0:
        raise OpticsError("reference energy is zero over the selected months")
    return float(num / den)


# ---------------------------------------------------------------------------
# Single-timestep operations
# ---------------------------------------------------------------------------


def _single(layout, rotation: RotationState, weather_t, sun: SunPosition, albedo: float):
    ghi, dni, dhi = (float(v) for v in weather_t)
    e, n, u = sun.unit_vector()
    tab = SunTable(
        s_east=np.array([e]), s_north=np.array([n]), s_up=np.array([u]),
        solar_time=np.array([12.0]),
    )
    return evaluate_series(
        layout,
        albedo,
        np.array([rotation.rotation]),
        rotation.axis,
        tab,
        np.array([ghi]),
        np.array([dni]),
        np.array([dhi]),
    )


def poa_irradiance(
    layout: ArrayLayout,
    rotation: RotationState,
    weather_t,
    sun: SunPosition,
    albedo: float = 0.25,
) -> tuple[float, float]:
    """Front and rear plane-of-array irradiance (W/m2) at one timestep.

    weather_t is a (ghi, dni, dhi) triple in W/m2. Night returns zeros.
    """
    out = _single(layout, rotation, weather_t, sun, albedo)
    return float(out["front"][0]), float(out["rear"][0])


def ground_profile(
    layout: ArrayLayout,
    rotation: RotationState,
    weather_t,
    sun: SunPosition,
    k: int | None = None,
    albedo: float = 0.25,
) -> GroundProfile:
    """Spatially resolved ground irradiance across one pitch."""
    if k is not None and k != layout.ground_points:
        layout = ArrayLayout(
            module_width=layout.module_width,
            a_lm=layout.a_lm,
            height=layout.height,
            bifacial_rear_weight=layout.bifacial_rear_weight,
            ground_points=k,
        )
    out = _single(layout, rotation, weather_t, sun, albedo)
    return GroundProfile(
        points=layout.ground_x(),
        irradiance=out["ground"][0],
        unshaded_ghi=float(weather_t[0]),
    )


def shading_ratio(profile: GroundProfile) -> float:
    """Mean ground irradiance relative to the unshaded value."""
    if profile.unshaded_ghi <= 0.0:
        raise OpticsError("shading ratio undefined without unshaded irradiance")
    return float(profile.irradiance.mean() / profile.unshaded_ghi)


def rotation_at(scheme: TrackingScheme, site, t: datetime) -> RotationState:
    """Convenience re-export of the schedule dispatch for CLI dumps."""
    return ct_rotation(scheme, site, t)
