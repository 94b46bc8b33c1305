"""Price-performance economics of agrivoltaic systems against GMPV.

All quantities are normalized by the GMPV hardware cost basis
A_M * c_M_gmpv / chi, where chi is the discounted-depreciation factor
sum_k (1-d)^k (1+r)^-k. Normalized price:

    p' = kappa_M + kappa_L - Y'_PV
    kappa_L = eps * (a_lm_av / M_L) * rho_L
    Y'_PV  = (a_lm_gmpv / M_L + 1) * y_pv

Normalized performance benefit from crop income (per m2 of module, with
the land-to-module factor making it per unit land):

    pb' = a_lm_av * (y_crop * P_fullsun / A_land) / (c_M_gmpv / chi)

A feed-in-tariff premium adds delta_fit * yy * chi / c_M_gmpv, with yy the
annual electrical energy per module area. ppr = p'/pb'; the system is
economically favorable against GMPV when ppr <= 1. The premium that lands
exactly on ppr = 1 has the closed form max(0, (p' - pb'0) / energy_coeff).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .ingest import EconConfig
from .solar import TrackMode, TrackingScheme

M2_PER_HA = 10000.0

# Hardware premium of elevated AV mounting over GMPV, and the extra
# multiplier when the mounting also tracks.
KAPPA_M_ELEVATED = 1.38
TRACKER_PREMIUM = 1.20


class EconomicsError(ValueError):
    pass


def chi(d: float, r: float, horizon: int | None = None) -> float:
    """Discounted-depreciation factor sum_{k=1..N} ((1-d)/(1+r))^k.

    Infinite horizon (None) uses the closed form (1-d)/(r+d), which
    requires r + d > 0 and (1-d)/(1+r) < 1 to converge.
    """
    q = (1.0 - d) / (1.0 + r)
    if horizon is None:
        if r + d <= 0.0 or q >= 1.0:
            raise EconomicsError(f"chi diverges for d={d}, r={r}")
        return (1.0 - d) / (r + d)
    if horizon < 1:
        raise EconomicsError(f"horizon must be >= 1 year: {horizon}")
    if math.isclose(q, 1.0):
        return float(horizon)
    return q * (1.0 - q**horizon) / (1.0 - q)


def kappa_l(epsilon: float, a_lm_av: float, m_l: float, rho_l: float) -> float:
    """Normalized soft-cost term of the price equation."""
    if m_l <= 0:
        raise EconomicsError(f"M_L must be positive: {m_l}")
    return epsilon * (a_lm_av / m_l) * rho_l


def y_pv_prime(a_lm_gmpv: float, m_l: float, y_pv: float) -> float:
    """Energy term of the price equation: (a_lm_gmpv/M_L + 1) * y_pv."""
    if y_pv < 0:
        raise EconomicsError(f"y_pv must be >= 0: {y_pv}")
    return (a_lm_gmpv / m_l + 1.0) * y_pv


def price_normalized(kappa_m: float, kappa_l_: float, y_pv_prime_: float) -> float:
    """p' = kappa_M + kappa_L - Y'_PV; negative means AV cheaper than GMPV."""
    return kappa_m + kappa_l_ - y_pv_prime_


def pb_normalized(
    crop_profit_per_land: float,  # $/m2 of land per year
    a_lm_av: float,
    c_m_gmpv: float,
    chi_: float,
) -> float:
    """Normalized crop performance benefit."""
    if c_m_gmpv <= 0 or chi_ <= 0:
        raise EconomicsError("c_m_gmpv and chi must be positive")
    return a_lm_av * crop_profit_per_land / (c_m_gmpv / chi_)


def energy_coefficient(yy_ref: float, y_pv: float, chi_: float, c_m_gmpv: float) -> float:
    """pb' gained per $/kWh of FIT premium: yy * chi / c_M_gmpv."""
    return yy_ref * y_pv * chi_ / c_m_gmpv


def apply_fit(
    pb_prime: float,
    delta_fit_pct: float,
    fit_baseline: float,
    yy_ref: float,
    y_pv: float,
    chi_: float,
    c_m_gmpv: float,
) -> float:
    """Performance benefit with a FIT premium (percent of the baseline FIT)."""
    if delta_fit_pct < 0:
        raise EconomicsError(f"delta_fit must be >= 0: {delta_fit_pct}")
    delta_abs = delta_fit_pct / 100.0 * fit_baseline
    return pb_prime + delta_abs * energy_coefficient(yy_ref, y_pv, chi_, c_m_gmpv)


def ppr(p_prime: float, pb_prime: float) -> float:
    """Price-performance ratio; <= 1 is economically favorable.

    Zero benefit with positive price is infeasible at any scale (+inf).
    """
    if pb_prime > 0.0:
        return p_prime / pb_prime
    if p_prime <= 0.0:
        return 0.0
    return float("inf")


def delta_fit_threshold(
    p_prime: float,
    pb_prime_0: float,
    fit_baseline: float,
    yy_ref: float,
    y_pv: float,
    chi_: float,
    c_m_gmpv: float,
) -> float:
    """Smallest FIT premium (percent of baseline) achieving ppr <= 1."""
    coeff = energy_coefficient(yy_ref, y_pv, chi_, c_m_gmpv)
    if coeff <= 0.0:
        raise EconomicsError("energy coefficient must be positive")
    if fit_baseline <= 0.0:
        raise EconomicsError("fit_baseline must be positive")
    delta_abs = max(0.0, (p_prime - pb_prime_0) / coeff)
    return delta_abs / fit_baseline * 100.0


def resolve_kappa_m(econ: EconConfig, scheme: TrackingScheme) -> float:
    """Hardware cost ratio; tracker modes carry the tracker premium."""
    if econ.kappa_m is not None:
        return econ.kappa_m
    if scheme.mode in (TrackMode.ST, TrackMode.AT, TrackMode.CT):
        return KAPPA_M_ELEVATED * TRACKER_PREMIUM
    return KAPPA_M_ELEVATED


@dataclass(frozen=True)
class EconResult:
    chi: float
    kappa_m: float
    kappa_l: float
    y_pv: float
    y_pv_prime: float
    y_crop: float
    p_prime: float
    pb_prime_0: float  # before FIT
    pb_prime: float  # after FIT
    ppr: float
    feasible: bool
    delta_fit_pct: float
    delta_fit_th_pct: float
    p_abs: float  # $ per m2 of AV module
    pb_abs: float  # $ per m2 of AV module

    def row(self) -> dict:
        return {
            "p_prime": self.p_prime,
            "pb_prime": self.pb_prime,
            "ppr": self.ppr,
            "delta_fit_th_pct": self.delta_fit_th_pct,
            "y_pv": self.y_pv,
            "y_crop": self.y_crop,
        }


def evaluate(
    econ: EconConfig,
    scheme: TrackingScheme,
    a_lm_av: float,
    y_pv: float,
    y_crop: float,
    revenue_full_sun_per_ha: float,
    yy_ref: float,
    delta_fit_pct: float | None = None,
) -> EconResult:
    """Assemble the full economic result for one simulated configuration.

    yy_ref is the GMPV reference annual electrical yield (kWh/m2/yr) from
    the optics run; revenue is the rotation's full-sun total in $/ha/yr.
    """
    if not 5.0 <= econ.m_l <= 35.0:
        warnings.warn(f"M_L={econ.m_l} outside the typical 5-35 band", stacklevel=2)
    chi_ = chi(econ.d, econ.r, econ.horizon)
    km = resolve_kappa_m(econ, scheme)
    kl = kappa_l(econ.epsilon, a_lm_av, econ.m_l, econ.rho_l)
    ypp = y_pv_prime(econ.a_lm_gmpv, econ.m_l, y_pv)
    p_prime = price_normalized(km, kl, ypp)

    profit_per_land = y_crop * revenue_full_sun_per_ha / M2_PER_HA
    pb0 = pb_normalized(profit_per_land, a_lm_av, econ.c_m_gmpv, chi_)
    dfit = econ.delta_fit_pct if delta_fit_pct is None else delta_fit_pct
    pb = apply_fit(pb0, dfit, econ.fit_baseline, yy_ref, y_pv, chi_, econ.c_m_gmpv)
    r = ppr(p_prime, pb)
    th = delta_fit_threshold(
        p_prime, pb0, econ.fit_baseline, yy_ref, y_pv, chi_, econ.c_m_gmpv
    )
    basis = econ.c_m_gmpv / chi_  # $ per m2 module, annualized
    return EconResult(
        chi=chi_,
        kappa_m=km,
        kappa_l=kl,
        y_pv=y_pv,
        y_pv_prime=ypp,
        y_crop=y_crop,
        p_prime=p_prime,
        pb_prime_0=pb0,
        pb_prime=pb,
        ppr=r,
        feasible=r <= 1.0,
        delta_fit_pct=dfit,
        delta_fit_th_pct=th,
        p_abs=p_prime * basis,
        pb_abs=pb * basis,
    )
