"""Forward quasi-steady cycle generator with controllable loss injection.

Produces physically consistent traces (suction pulsation, delayed valve,
over-compression, leakage clearances, suction heating, sensor noise) plus
the matching ground-truth measured rates, so the whole decomposition chain
can be closed against known injections.  The generator is deliberately much
simpler than a predictive simulator: it is a consistency oracle for the
loss formulas, not a physics surrogate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError
from .geometry import Geometry, chamber_volume, swept_volume, vane_extension
from .props import GasModel
from .thermo import pipe_htc
from .traces import CycleTrace, RunMeta

TWO_PI = 2.0 * math.pi

# shape constants of the pulsation model: the early dip is 60% as deep as
# the end-of-suction rise, spans a quarter revolution, and the rise window
# covers the final quarter revolution
DIP_DEPTH_RATIO = 0.6
DIP_WIDTH = 0.5 * math.pi
RISE_WIDTH = 0.5 * math.pi
VALVE_LIFT_RATIO = 0.3      # peak lift as a fraction of the port diameter
RELAX_WIDTH = math.radians(12.0)  # over-compression decay window


@dataclass(frozen=True)
class Scenario:
    """Loss-injection knobs for one generated cycle.

    pulsation_amp is the end-of-suction overpressure as a fraction of the
    reference suction pressure (p_2 = (1 + amp)*p_s); the early dip scales
    with it.  Angles in radians.  delta_rc/delta_vc override the geometry's
    sealing clearances for both the generated truth and the analysed trace.
    eta_mf fixes the electrical input power via W_in = W_real/eta_mf.
    """

    pulsation_amp: float = 0.0
    pulsation_phase: float = math.radians(40.0)
    valve_delay: float = 0.0
    valve_lag_close: float = 0.0
    delta_rc: float | None = None
    delta_vc: float | None = None
    heating_dT: float = 0.0
    discharge_overpressure: float = 0.0
    noise_p: float = 0.0
    noise_x: float = 0.0
    noise_y: float = 0.0
    eta_mf: float = 0.85
    seed: int = 0

    def __post_init__(self):
        if self.pulsation_amp < 0 or self.discharge_overpressure < 0:
            raise ConfigError("pulsation and overpressure amplitudes must be >= 0")
        if not (0.0 <= self.valve_delay <= 0.5 * math.pi):
            raise ConfigError("valve_delay must lie in [0, pi/2]")
        if not (0.0 <= self.valve_lag_close <= 0.5 * math.pi):
            raise ConfigError("valve_lag_close must lie in [0, pi/2]")
        if min(self.noise_p, self.noise_x, self.noise_y) < 0:
            raise ConfigError("noise levels must be >= 0")
        if not (0.0 < self.eta_mf <= 1.0):
            raise ConfigError("eta_mf must lie in (0, 1]")

    def apply_clearances(self, geom: Geometry) -> Geometry:
        """Geometry with the scenario's sealing clearances substituted."""
        kw = {}
        if self.delta_rc is not None:
            kw["delta_rc"] = self.delta_rc
        if self.delta_vc is not None:
            kw["delta_vc"] = self.delta_vc
        return replace(geom, **kw) if kw else geom


def _dip_shape(alpha: np.ndarray, start: float, width: float) -> np.ndarray:
    """Raised-cosine bump, 0 outside [start, start+width], peak 1 inside."""
    x = (alpha - start) / width
    return np.where((x >= 0) & (x <= 1), np.sin(math.pi * x) ** 2, 0.0)


def _rise_shape(alpha: np.ndarray, width: float) -> np.ndarray:
    """Raised-cosine step from 0 to 1 over the last ``width`` radians."""
    x = (alpha - (TWO_PI - width)) / width
    y = 0.5 * (1.0 - np.cos(math.pi * np.clip(x, 0.0, 1.0)))
    return np.where(alpha >= TWO_PI - width, y, 0.0)


def suction_pressure_profile(alpha: np.ndarray, p_s: float,
                             scenario: Scenario) -> np.ndarray:
    """Suction-port pressure over one revolution: early dip, late rise,
    ending at p_2 = (1 + pulsation_amp)*p_s."""
    a = scenario.pulsation_amp
    dip = _dip_shape(alpha, scenario.pulsation_phase, DIP_WIDTH)
    rise = _rise_shape(alpha, RISE_WIDTH)
    return p_s * (1.0 - DIP_DEPTH_RATIO * a * dip + a * rise)


def generate(geom: Geometry, model: GasModel, meta: RunMeta,
             scenario: Scenario, p_s: float, p_d: float,
             n: int = 3600) -> CycleTrace:
    """Generate one synthetic revolution on a uniform n-point grid.

    Suction leg: pulsation profile ending at p_2.  Compression leg:
    isentrope from (p_2, V_2) in the complementary chamber.  Discharge leg:
    reference pressure with an optional lift-gated overpressure, entered
    through a short relaxation from the (possibly over-compressed) valve
    opening point.  Valve lift is a kinematic half-sine between the delayed
    opening and the (possibly lagged) closing; vane displacement follows
    the exact kinematics, which also fixes the phase origin.
    """
    geom = scenario.apply_clearances(geom)
    if n < 64:
        raise ConfigError("need at least 64 samples per revolution")
    alpha = np.arange(n) * (TWO_PI / n)
    gamma = model.gamma
    V_2 = swept_volume(geom)
    V_c = V_2 - np.atleast_1d(chamber_volume(geom, alpha))

    p_st = suction_pressure_profile(alpha, p_s, scenario)
    p_2 = float(p_st[-1])

    # natural valve opening: isentrope from (p_2, V_2) reaches p_d
    V_open = V_2 * (p_2 / p_d) ** (1.0 / gamma)
    idx = np.nonzero(V_c <= V_open)[0]
    if idx.size == 0:
        raise ConfigError("compression never reaches the discharge pressure")
    alpha_nat = float(alpha[idx[0]])
    alpha_open = alpha_nat + scenario.valve_delay
    alpha_close = TWO_PI + scenario.valve_lag_close

    with np.errstate(divide="ignore"):
        p_iso = np.where(V_c > 0.0, p_2 * (V_2 / np.maximum(V_c, 1e-30)) ** gamma,
                         np.inf)
    p_open = float(np.interp(alpha_open, alpha, np.minimum(p_iso, 50.0 * p_d)))

    # valve lift half-sine over [alpha_open, alpha_close]
    span = alpha_close - alpha_open
    y_max = VALVE_LIFT_RATIO * geom.d_port
    phase = (alpha - alpha_open) / span
    phase_wrap = (alpha + TWO_PI - alpha_open) / span  # lagged tail past the seam
    lift = np.where((phase >= 0) & (phase <= 1), np.sin(math.pi * phase), 0.0)
    lift_tail = np.where((phase_wrap >= 0) & (phase_wrap <= 1),
                         np.sin(math.pi * phase_wrap), 0.0)
    y_p = y_max * np.maximum(lift, lift_tail)

    # discharge plateau with lift-gated overpressure
    gate = np.where(phase > 0, lift, 0.0)
    p_plateau = p_d * (1.0 + scenario.discharge_overpressure * gate)
    relax = np.clip((alpha - alpha_open) / RELAX_WIDTH, 0.0, 1.0)
    blend = 0.5 * (1.0 - np.cos(math.pi * relax))
    p_disc = (1.0 - blend) * max(p_open, p_d) + blend * p_plateau
    p_dt = np.where(alpha < alpha_open, np.minimum(p_iso, max(p_open, p_d)),
                    p_disc)
    p_dt = np.maximum(p_dt, 1.0)

    x_vane = np.atleast_1d(vane_extension(geom, alpha))

    if scenario.noise_p > 0 or scenario.noise_x > 0 or scenario.noise_y > 0:
        rng = np.random.default_rng(scenario.seed)
        p_st = p_st + rng.normal(0.0, scenario.noise_p, n)
        p_dt = p_dt + rng.normal(0.0, scenario.noise_p, n)
        x_vane = x_vane + rng.normal(0.0, scenario.noise_x, n)
        y_p = np.maximum(y_p + rng.normal(0.0, scenario.noise_y, n), 0.0)

    if np.any(p_st <= 0.0) or np.any(p_dt <= 0.0):
        raise ConfigError("scenario produces non-positive pressures")

    return CycleTrace(alpha=alpha, p_st=p_st, p_dt=p_dt, x_vane=x_vane,
                      y_p=y_p, meta=meta)


def inject_measured_rates(trace: CycleTrace, scenario: Scenario,
                          geom: Geometry, model: GasModel, p_s: float,
                          p_d: float, T_s: float,
                          eps_b: float = 0.7) -> RunMeta:
    """Ground-truth measured rates and consistent boundary temperatures.

    The measured mass flow is the ideal intake minus the injected heating,
    leakage, clearance and backflow losses plus the supercharge gain, each
    evaluated directly from the scenario (independent trapezoidal
    quadrature, not the analysis-side routines).  The electrical input is
    W_in = W_real/eta_mf from the generated diagram.  Pipe-segment wall
    temperatures are back-solved so the analysis heating chain lands on the
    injected fill temperature, and the oil/wall metadata is chosen to keep
    the net cylinder heat exchange near zero around that temperature.
    """
    geom = scenario.apply_clearances(geom)
    meta = trace.meta
    N = meta.N_rps
    alpha = trace.alpha
    gamma = model.gamma
    kappa = (gamma - 1.0) / gamma
    V_2 = swept_volume(geom)

    rho_s = model.density(p_s, T_s)
    m_ideal = rho_s * N * V_2
    T_fill = T_s + scenario.heating_dT
    p_2 = float(trace.p_st[-1])
    T_2 = T_fill * (p_2 / p_s) ** kappa

    # heating deficit and supercharge gain at the injected fill state
    m_sh = N * V_2 * (rho_s - model.density(p_s, T_fill))
    m_sc = N * (model.density(p_2, T_2) - rho_s) * V_2

    # leakage: choked-nozzle quadrature over the stated windows
    T_dt = T_fill * (trace.p_dt / p_s) ** kappa
    theta = (2.0 / (gamma + 1.0)) ** ((gamma + 1.0) / (gamma - 1.0))
    flux = trace.p_dt * np.sqrt(gamma / (model.R * T_dt) * theta)
    rc_win = (alpha >= geom.alpha_s) & (alpha <= TWO_PI - geom.alpha_d)
    ve_win = alpha >= geom.alpha_s
    H_v = np.atleast_1d(vane_extension(geom, alpha))
    m_rc = geom.H / TWO_PI * float(np.trapezoid((geom.delta_rc * flux)[rc_win],
                                                alpha[rc_win]))
    m_ve = 1.0 / TWO_PI * float(np.trapezoid((geom.delta_vc * H_v * flux)[ve_win],
                                             alpha[ve_win]))
    m_lk = m_rc + m_ve

    # clearance re-expansion at the injected temperatures
    rho_d_true = model.density(p_d, T_fill * (p_d / p_s) ** kappa)
    m_cv = N * (rho_d_true - model.density(p_2, T_2)) * geom.V_clearance

    # backflow over the lagged tail past the seam
    m_bf = 0.0
    if scenario.valve_lag_close > 0.0:
        tail = alpha <= scenario.valve_lag_close
        r = trace.p_st[tail] / p_d
        r_crit = (2.0 / (gamma + 1.0)) ** (gamma / (gamma - 1.0))
        A_b = np.minimum(math.pi * geom.d_port**2 / 4.0,
                         math.pi * geom.d_port * trace.y_p[tail])
        sub = np.sqrt(np.maximum(2.0 * gamma / (gamma - 1.0) * rho_d_true * p_d
                                 * (r ** (2.0 / gamma) - r ** ((gamma + 1.0) / gamma)),
                                 0.0))
        cho = ((2.0 / (gamma + 1.0)) ** (1.0 / (gamma - 1.0))
               * math.sqrt(2.0 * gamma / (gamma + 1.0) * rho_d_true * p_d))
        f = eps_b * A_b * np.where(r > r_crit, sub, cho)
        f = np.where(r < 1.0, f, 0.0)
        m_bf = float(np.trapezoid(f, alpha[tail])) / TWO_PI

    m_meas = m_ideal - m_sh - m_lk - m_cv - m_bf + m_sc

    # real indicated work of the generated diagram (shoelace, wraps the seam)
    V_s = np.atleast_1d(chamber_volume(geom, alpha))
    V_path = np.concatenate([V_s, V_2 - V_s])
    p_path = np.concatenate([trace.p_st, trace.p_dt])
    dV = np.diff(V_path, append=V_path[:1])
    W_real = -N * float(np.sum(0.5 * (p_path + np.roll(p_path, -1)) * dV))
    W_in = W_real / scenario.eta_mf

    # boundary temperatures consistent with the injected fill temperature
    h_p = pipe_htc(model, max(m_meas, 1e-9), meta.D).h_p
    C = max(m_meas, 1e-9) * model.cp
    K = 1.0
    for L in (meta.L_A, meta.L_B, meta.L_C):
        a = h_p * math.pi * meta.D * L
        K *= (C - 0.5 * a) / (C + 0.5 * a)
    T_wall = (T_fill - K * T_s) / (1.0 - K) if scenario.heating_dT > 0 else T_s

    # area-weighted share of the surfaces that sit at the wall distribution
    ar_a = np.atleast_1d(chamber_volume(geom, alpha)) * 2.0 / geom.H
    A_o = geom.H * geom.r1 * alpha
    A_p = geom.H * geom.r2 * alpha
    A_v = 2.0 * H_v * geom.H
    w_cyl = float(np.sum(A_o + ar_a) / np.sum(A_o + ar_a + A_p + A_v))

    return meta.replace(m_dot_meas=m_meas, W_in=W_in,
                        T_s=T_s, T_0=308.15,
                        T_os=T_fill + 3.5 * w_cyl,
                        T_A=T_wall, T_B=T_wall, T_C=T_wall)


def scenario_lattice() -> list[tuple[str, Scenario]]:
    """The 3 x 3 x 2 closure-test lattice: pulsation amplitudes x valve
    delays x leakage levels, all with a 6 K suction-heating injection."""
    out = []
    for amp in (0.0, 0.04, 0.08):
        for delay_deg in (0.0, 5.0, 10.0):
            for d_leak in (0.0, 12e-6):
                name = f"amp{int(amp * 100):02d}_delay{int(delay_deg):02d}_" \
                       f"leak{int(d_leak * 1e6):02d}"
                out.append((name, Scenario(pulsation_amp=amp,
                                           valve_delay=math.radians(delay_deg),
                                           valve_lag_close=0.0,
                                           delta_rc=d_leak, delta_vc=d_leak,
                                           heating_dT=6.0)))
    return out
