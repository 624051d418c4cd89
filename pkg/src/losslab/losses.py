"""Mass-flow loss and gain coefficients of the volumetric-efficiency budget.

Five contributions are quantified against the ideal intake
rho_s * N * V_2: suction-gas heating, leakage (roller-cylinder radial gap
and vane edges, both treated as critically choked nozzles), clearance-volume
re-expansion, discharge-valve backflow and the supercharging gain.  The
predicted volumetric efficiency is 1 minus their sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from .errors import ConfigError
from .geometry import Geometry, swept_volume, vane_extension
from .props import GasModel
from .traces import CycleTrace, ValveEvents

TWO_PI = 2.0 * math.pi


@dataclass
class MassLossBreakdown:
    """The five loss coefficients, their raw mass-flow rates and the
    measured/predicted volumetric efficiencies.

    lambda_sc is negative when the chamber is supercharged (a gain);
    eta_v_pred = 1 - sum(lambda) holds by construction.
    """

    lambda_sh: float
    lambda_lk: float
    lambda_cv: float
    lambda_bf: float
    lambda_sc: float
    m_dot_Lrc: float
    m_dot_Lve: float
    m_dot_Llk: float
    m_dot_Lcv: float
    m_dot_Lbf: float
    m_dot_sc: float
    eta_v_pred: float
    eta_v_meas: float

    @property
    def lambdas(self) -> dict[str, float]:
        return {"lambda_sh": self.lambda_sh, "lambda_lk": self.lambda_lk,
                "lambda_cv": self.lambda_cv, "lambda_bf": self.lambda_bf,
                "lambda_sc": self.lambda_sc}


def lambda_suction_heating(rho_s: float, rho_sh: float) -> float:
    """Suction-heating loss coefficient (rho_s - rho_sh)/rho_s.

    rho_sh is the density reached at suction close when only heating acts
    (solver run at flat reference pressure, supercharging disabled).
    """
    if rho_s <= 0:
        raise ValueError("reference suction density must be positive")
    return (rho_s - rho_sh) / rho_s


def critical_pressure_ratio(gamma: float) -> float:
    """Downstream/upstream ratio below which an orifice chokes:
    (2/(gamma+1))^(gamma/(gamma-1))."""
    return (2.0 / (gamma + 1.0)) ** (gamma / (gamma - 1.0))


def _choked_flux_density(p: np.ndarray, T: np.ndarray, model: GasModel) -> np.ndarray:
    """Critically-choked mass flux per unit area divided by pressure:
    sqrt(gamma/(R*T) * (2/(gamma+1))^((gamma+1)/(gamma-1)))."""
    g = model.gamma
    theta = (2.0 / (g + 1.0)) ** ((g + 1.0) / (g - 1.0))
    return np.sqrt(g / (model.R * T) * theta)


def _domain_integral(alpha: np.ndarray, f: np.ndarray, lo: float, hi: float,
                     extend_to: float | None = None) -> float:
    """Integrate samples f(alpha) over [lo, hi] with Simpson's rule.

    The integrand is linearly resampled onto a uniform quadrature grid
    aligned to the exact bounds, so off-node bounds do not bias the result.
    ``extend_to`` allows the domain to run past the last sample (held at the
    final value), for upper limits at exactly 2*pi.
    """
    if hi <= lo:
        return 0.0
    a = alpha
    if extend_to is not None and extend_to > alpha[-1]:
        a = np.append(alpha, extend_to)
        f = np.append(f, f[-1])
    n_quad = max(1025, 2 * a.size + 1)
    grid = np.linspace(lo, hi, n_quad)
    vals = np.interp(grid, a, f)
    return float(simpson(vals, x=grid))


@dataclass
class LeakageResult:
    m_dot_Lrc: float
    m_dot_Lve: float
    m_dot_Llk: float
    lambda_lk: float


def leakage(trace: CycleTrace, geom: Geometry, model: GasModel, p_s: float,
            T_ref: float, rho_s: float,
            T_dt: np.ndarray | None = None,
            delta_rc_profile: np.ndarray | None = None,
            delta_vc_profile: np.ndarray | None = None) -> LeakageResult:
    """Leakage through the roller-cylinder radial gap and the vane edges.

    Both paths are modelled as critically choked nozzles driven by the
    compression-chamber pressure p_dt:

        m_dot_Lrc = (N*H/omega) * int_{alpha_s}^{2pi - alpha_d}
                     delta_rc * p_dt * sqrt(gamma/(R*T_dt) * theta) dalpha
        m_dot_Lve = (N/omega)   * int_{alpha_s}^{2pi}
                     delta_vc * H_v * p_dt * sqrt(...) dalpha

    with theta = (2/(gamma+1))^((gamma+1)/(gamma-1)).  N/omega = 1/(2*pi),
    so the rates are speed-free and lambda_lk = m_dot_Llk/(rho_s*N*V_2)
    scales as 1/N.  T_dt defaults to the isentropic map of the measured
    p_dt from the reference state (p_s, T_ref); passing an explicit array
    pins the temperature (used by the linear-scaling property check).

    The integration limits follow the loss model as stated: the radial-gap
    path stops at 2*pi - alpha_d, the vane-edge path runs to 2*pi.
    Per-angle clearance profiles may override the constant clearances.
    """
    if geom.delta_rc < 0 or geom.delta_vc < 0:
        raise ConfigError("negative sealing clearance")
    alpha = trace.alpha
    p_dt = trace.p_dt
    if T_dt is None:
        T_dt = T_ref * (p_dt / p_s) ** ((model.gamma - 1.0) / model.gamma)
    T_dt = np.asarray(T_dt, dtype=float)

    d_rc = np.full(alpha.size, geom.delta_rc) if delta_rc_profile is None \
        else np.asarray(delta_rc_profile, dtype=float)
    d_vc = np.full(alpha.size, geom.delta_vc) if delta_vc_profile is None \
        else np.asarray(delta_vc_profile, dtype=float)
    if d_rc.size != alpha.size or d_vc.size != alpha.size:
        raise ConfigError("clearance profile length mismatch")
    if np.any(d_rc < 0) or np.any(d_vc < 0):
        raise ConfigError("negative sealing clearance in profile")

    flux = p_dt * _choked_flux_density(p_dt, T_dt, model)
    f_rc = d_rc * flux
    f_ve = d_vc * np.atleast_1d(vane_extension(geom, alpha)) * flux

    I_rc = _domain_integral(alpha, f_rc, geom.alpha_s, TWO_PI - geom.alpha_d)
    I_ve = _domain_integral(alpha, f_ve, geom.alpha_s, TWO_PI, extend_to=TWO_PI)

    m_rc = geom.H / TWO_PI * I_rc
    m_ve = I_ve / TWO_PI
    m_lk = m_rc + m_ve
    lam = m_lk / (rho_s * trace.meta.N_rps * swept_volume(geom))
    return LeakageResult(m_dot_Lrc=m_rc, m_dot_Lve=m_ve, m_dot_Llk=m_lk,
                         lambda_lk=lam)


def lambda_clearance(model: GasModel, rho_d: float, rho_2: float,
                     V_clearance: float, V_2: float, rho_s: float,
                     N: float) -> tuple[float, float]:
    """Clearance-volume loss: the dead volume re-expands gas at discharge
    density instead of admitting fresh charge.

        m_dot_Lcv = N * (rho_d - rho_2) * V_clearance
        lambda_cv = (rho_d - rho_2) * V_clearance / (rho_s * V_2)

    The speed cancels in lambda_cv exactly.
    """
    if rho_d <= 0 or rho_2 <= 0 or rho_s <= 0:
        raise ValueError("densities must be positive")
    m_cv = N * (rho_d - rho_2) * V_clearance
    lam = (rho_d - rho_2) * V_clearance / (rho_s * V_2)
    return m_cv, lam


def backflow_flux(p_down: float, p_up: float, rho_up: float, gamma: float,
                  eps_b: float, A_b: float) -> float:
    """Orifice mass flux through the discharge valve gap [kg/s per rad... W].

    Pressure-ratio orientation: r = p_down/p_up (chamber over discharge).
    Subsonic branch for r > r* = (2/(gamma+1))^(gamma/(gamma-1)):

        eps_b*A_b*sqrt(2g/(g-1) * rho_up*p_up * (r^(2/g) - r^((g+1)/g)))

    choked branch for r <= r*:

        eps_b*A_b*(2/(g+1))^(1/(g-1)) * sqrt(2g/(g+1) * rho_up*p_up)

    The two branches agree identically at r = r*.
    """
    if p_down >= p_up:
        return 0.0
    r = p_down / p_up
    r_crit = critical_pressure_ratio(gamma)
    if r > r_crit:
        bracket = r ** (2.0 / gamma) - r ** ((gamma + 1.0) / gamma)
        return eps_b * A_b * math.sqrt(2.0 * gamma / (gamma - 1.0)
                                       * rho_up * p_up * bracket)
    return (eps_b * A_b * (2.0 / (gamma + 1.0)) ** (1.0 / (gamma - 1.0))
            * math.sqrt(2.0 * gamma / (gamma + 1.0) * rho_up * p_up))


def backflow(trace: CycleTrace, geom: Geometry, model: GasModel,
             events: ValveEvents, p_d: float, rho_d: float, rho_s: float,
             eps_b: float = 0.7) -> tuple[float, float]:
    """Backflow through a late-closing discharge valve.

    Gas can only return into the suction chamber after the roller passes
    the seam, i.e. over the valve-open tail past 2*pi; a valve that closes
    at or before 360 deg gives exactly zero.  Per-node flux uses the
    throttled-orifice model of :func:`backflow_flux` with effective area
    A_b = min(pi*d_port^2/4, pi*d_port*y_p), integrated only where the
    valve is open and the discharge pressure exceeds the chamber pressure:

        m_dot_Lbf = (N/omega) * int_{2pi}^{alpha_c} flux dalpha
    """
    if not events.wrapped or events.alpha_close <= TWO_PI:
        return 0.0, 0.0
    # wrapped tail lives at the head of the periodic trace
    tail = trace.alpha <= (events.alpha_close - TWO_PI) + trace.dalpha
    alpha_t = trace.alpha[tail]
    y_t = trace.y_p[tail]
    p_t = trace.p_st[tail]
    A_port = math.pi * geom.d_port**2 / 4.0
    flux = np.array([
        backflow_flux(p, p_d, rho_d, model.gamma, eps_b,
                      min(A_port, math.pi * geom.d_port * y))
        if y > 0.0 else 0.0
        for p, y in zip(p_t, y_t)
    ])
    I = _domain_integral(alpha_t, flux, 0.0, events.alpha_close - TWO_PI)
    m_bf = I / TWO_PI
    lam = m_bf / (rho_s * trace.meta.N_rps * swept_volume(geom))
    return m_bf, lam


def supercharge_gain(model: GasModel, rho_s: float, p_s: float, p_2: float,
                     T_s3: float, N: float, V_2: float) -> tuple[float, float]:
    """Supercharging mass gain from above-reference end-of-suction pressure.

    rho_sc is evaluated at (p_2, T) with T mapped isentropically from the
    heated pipe-outlet state (p_s, T_s3):

        m_dot_sc  = N * (rho_sc - rho_s) * V_2
        lambda_sc = (rho_s - rho_sc)/rho_s   (negative = gain)
    """
    if p_2 <= 0:
        raise ValueError("end-of-suction pressure must be positive")
    T_sc = model.isentropic_temperature(T_s3, p_s, p_2)
    rho_sc = model.density(p_2, T_sc)
    m_sc = N * (rho_sc - rho_s) * V_2
    lam = (rho_s - rho_sc) / rho_s
    return m_sc, lam


def volumetric_efficiency(lambda_sh: float, lambda_lk: float, lambda_cv: float,
                          lambda_bf: float, lambda_sc: float,
                          m_dot_meas: float, rho_s: float, N: float,
                          V_2: float) -> tuple[float, float]:
    """Predicted vs measured volumetric efficiency.

    eta_v_pred = 1 - lambda_sh - lambda_lk - lambda_cv - lambda_bf - lambda_sc
    eta_v_meas = m_dot_meas / (rho_s * N * V_2)
    """
    eta_pred = 1.0 - lambda_sh - lambda_lk - lambda_cv - lambda_bf - lambda_sc
    eta_meas = m_dot_meas / (rho_s * N * V_2) if math.isfinite(m_dot_meas) \
        else float("nan")
    return eta_pred, eta_meas
