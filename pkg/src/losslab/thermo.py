"""Suction heating chain and the suction-chamber control-volume solver.

The suction pipe is treated as three lumped segments with measured wall
temperatures; the cylinder-side heat exchange uses a rotating-machine
convection correlation together with an empirical wall-temperature
distribution.  The chamber itself is marched over the suction span with an
open-system first law + mass conservation scheme: the measured chamber
pressure closes the system through the equation of state, and the inflow
density at each step is converged by fixed-point iteration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .errors import ConfigError, ConvergenceError
from .geometry import Geometry, chamber_volume, heating_areas, hydraulic_diameter
from .props import GasModel
from .traces import CycleTrace, RunMeta

TWO_PI = 2.0 * math.pi


class PipeHTC(NamedTuple):
    h_p: float      # convection coefficient [W/(m2 K)]
    re_d: float     # pipe Reynolds number [-]
    laminar: bool   # True when Re_D < 2300 (correlation extrapolated)


def pipe_htc(model: GasModel, m_dot: float, D: float,
             p: float | None = None, T: float | None = None) -> PipeHTC:
    """Turbulent pipe convection coefficient h_p = 0.023*(k/D)*Re^0.8*Pr^0.4.

    Re_D = 4*m_dot/(pi*D*mu).  Below Re_D = 2300 the value is still returned
    but flagged laminar, since the correlation only holds for turbulent flow.
    """
    if m_dot < 0 or D <= 0:
        raise ValueError(f"need m_dot >= 0 and D > 0 (got {m_dot}, {D})")
    tr = model.transport(p, T)
    re_d = 4.0 * m_dot / (math.pi * D * tr.mu)
    h_p = 0.023 * (tr.k / D) * re_d**0.8 * tr.Pr**0.4
    return PipeHTC(h_p=h_p, re_d=re_d, laminar=bool(re_d < 2300.0))


def suction_pipe_heating(meta: RunMeta, model: GasModel, m_dot: float,
                         h_p: float | None = None) -> tuple[float, float, float]:
    """Outlet temperatures (T_s1, T_s2, T_s3) of the three pipe segments.

    Each segment balances wall convection against the stream's enthalpy
    rise, h_p*pi*D*Lـ*(T_wall - (T_in+T_out)/2) = m_dot*cp*(T_out - T_in),
    solved in closed form segment by segment:

        T_out = (a*T_wall + (C - a/2)*T_in) / (C + a/2),
        a = h_p*pi*D*L,  C = m_dot*cp.

    Requires C > a/2 for every segment (otherwise the lumped balance can
    overshoot the wall temperature and is no longer meaningful).
    """
    if h_p is None:
        h_p = pipe_htc(model, m_dot, meta.D).h_p
    C = m_dot * model.cp
    T = meta.T_s
    outs = []
    for label, L, T_wall in (("A", meta.L_A, meta.T_A),
                             ("B", meta.L_B, meta.T_B),
                             ("C", meta.L_C, meta.T_C)):
        a = h_p * math.pi * meta.D * L
        if C <= 0.5 * a:
            raise ConfigError(f"segment balance singular in segment {label}: "
                              f"m_dot*cp = {C:.4g} <= h_p*pi*D*L/2 = {0.5 * a:.4g}; "
                              "use finer segmentation")
        T = (a * T_wall + (C - 0.5 * a) * T) / (C + 0.5 * a)
        outs.append(T)
    return tuple(outs)


def cylinder_htc(model: GasModel, geom: Geometry, alpha: float, omega: float,
                 rho: float, p: float | None = None, T: float | None = None) -> float:
    """In-cylinder convection coefficient.

    h_c = 0.025*(k/D_h)*Re^0.8*Pr^0.4*(1 + 1.77*D_h/r_ave) with the
    hydraulic diameter D_h = 4V/A_c and Re based on the characteristic
    speed u = 2*omega*r1 and the current gas density.
    """
    if alpha <= 0.0:
        return 0.0
    d_h = hydraulic_diameter(geom, alpha)
    if d_h <= 0.0:
        return 0.0
    tr = model.transport(p, T)
    u = 2.0 * omega * geom.r1
    re = rho * u * d_h / tr.mu
    return 0.025 * (tr.k / d_h) * re**0.8 * tr.Pr**0.4 * (1.0 + 1.77 * d_h / geom.r_ave)


def wall_temperature(alpha, T_os: float, T_0: float):
    """Cylinder inner-wall temperature distribution [K].

    Empirical correlation, all temperatures in kelvin; constants verbatim:

        T_c = (T_os - 3.5) + 2*(alpha - pi)/(2*pi)
              - 0.0028*(T_0 - 308.15)^2 + 0.178*(T_0 - 308.15)
    """
    return ((T_os - 3.5) + 2.0 * (np.asarray(alpha) - math.pi) / TWO_PI
            - 0.0028 * (T_0 - 308.15) ** 2 + 0.178 * (T_0 - 308.15))


def heat_rate(alpha: float, T_gas: float, rho: float, geom: Geometry,
              meta: RunMeta, model: GasModel, adiabatic: bool = False,
              wall_temp_fn: Callable[[float], float] | None = None,
              h_c: float | None = None) -> float:
    """Gas/wall heat transfer rate dQ/dalpha [J/rad] for the suction chamber.

    (1/omega)*h_c*[A_o*(T_c - T) + A_p*(T_os - T) + A_h*(T_c - T)
                   + A_v*(T_os - T)]

    The cylinder-wall distribution T_c comes from :func:`wall_temperature`
    unless ``wall_temp_fn`` overrides it; roller and vane surfaces sit at
    the oil temperature T_os.  Returns exactly 0 under the adiabatic flag.
    """
    if adiabatic:
        return 0.0
    if h_c is None:
        h_c = cylinder_htc(model, geom, alpha, meta.omega, rho)
    if h_c == 0.0:
        return 0.0
    ar = heating_areas(geom, alpha)
    T_c = wall_temp_fn(alpha) if wall_temp_fn is not None else \
        float(wall_temperature(alpha, meta.T_os, meta.T_0))
    return (h_c / meta.omega) * (ar["A_o"] * (T_c - T_gas)
                                 + ar["A_p"] * (meta.T_os - T_gas)
                                 + ar["A_h"] * (T_c - T_gas)
                                 + ar["A_v"] * (meta.T_os - T_gas))


@dataclass
class SolverSettings:
    """Iteration controls for the density scheme.

    rho_tol: relative tolerance on |rho0 - rho_m|/rho0; adiabatic kills the
    wall heat-exchange term entirely.
    """

    rho_tol: float = 1e-6
    max_iter: int = 50
    adiabatic: bool = False

    def __post_init__(self):
        if self.rho_tol <= 0:
            raise ConfigError("rho_tol must be positive")
        if self.max_iter < 1:
            raise ConfigError("max_iter must be at least 1")


@dataclass
class ChamberState:
    """Suction-chamber state at one march node."""

    alpha: float  # [rad]
    m_c: float    # in-chamber mass [kg]
    U: float      # internal energy [J]
    T: float      # gas temperature [K]
    rho: float    # density [kg/m3]
    p: float      # measured chamber pressure [Pa]
    dQ: float     # heat accumulated since the march start [J]


@dataclass
class SolverResult:
    states: list[ChamberState]
    rho_2: float
    T_2: float
    p_2: float
    max_iterations: int            # worst per-step iteration count
    sum_dQ: float = 0.0            # energy ledger, for bookkeeping checks
    sum_dW: float = 0.0
    sum_h_dm_in: float = 0.0
    sum_h_dm_out: float = 0.0
    residual_history: list = field(default_factory=list)  # per-step residual sequences

    @property
    def alpha(self):
        return np.array([s.alpha for s in self.states])

    @property
    def temperature(self):
        return np.array([s.T for s in self.states])

    @property
    def density(self):
        return np.array([s.rho for s in self.states])


def solve_suction_chamber(trace: CycleTrace, geom: Geometry, model: GasModel,
                          settings: SolverSettings,
                          T_inflow: float | None = None,
                          wall_temp_fn: Callable[[float], float] | None = None,
                          p_override: np.ndarray | None = None) -> SolverResult:
    """March the suction chamber over the suction span.

    The march runs on the trace grid from the suction port angle to the end
    of the revolution.  At each step the port flux is seeded with the
    previous density: dm = rho0*V_j - m_{j-1}, i.e. the full increment of
    the homogeneous chamber mass rho*V (the volume-sweep term rho*dV plus
    the V*drho packing term, which carries the supercharging/pulsation
    physics and keeps rho = m_c/V exact).  The first law

        dU = dQ - p*dV + h_i*dm_i - h_o*dm_o

    gives the new temperature, and the measured pressure recovers the
    density through the equation of state.  The seed is replaced by the
    recovered density until |rho0 - rho_m|/rho0 <= rho_tol.

    T_inflow is the suction-pipe outlet temperature (T_s3); inflow enthalpy
    is evaluated at (T_inflow, local port pressure), outflow (if the seeded
    mass increment ever goes negative) at the current chamber state.
    ``p_override`` substitutes the suction pressure channel (used for the
    heating-only run at flat reference pressure).

    Raises ConvergenceError carrying the worst residual and step index when
    the iteration cap is hit.
    """
    meta = trace.meta
    if T_inflow is None:
        T_inflow = suction_pipe_heating(meta, model, meta.m_dot_meas)[2] \
            if math.isfinite(meta.m_dot_meas) else meta.T_s

    p_st = trace.p_st if p_override is None else np.asarray(p_override, dtype=float)
    if p_st.size != trace.n:
        raise ConfigError("p_override length mismatch")

    # march nodes: trace grid restricted to [alpha_s, 2*pi)
    sel = trace.alpha >= geom.alpha_s - 1e-12
    alphas = trace.alpha[sel]
    press = p_st[sel]
    if alphas.size < 8:
        raise ConfigError("suction span covers too few trace nodes")

    V = np.atleast_1d(chamber_volume(geom, alphas))
    h_in = model.enthalpy(press[0], T_inflow) if model.backend == "table" \
        else model.cp * T_inflow

    # geometry and wall profiles at the step midpoints, hoisted out of the loop
    a_mid = 0.5 * (alphas[:-1] + alphas[1:])
    if settings.adiabatic:
        A_cyl = A_oil = T_c_mid = htc_geo = np.zeros(a_mid.size)
    else:
        ar = heating_areas(geom, a_mid)
        A_cyl = ar["A_o"] + ar["A_h"]   # surfaces at the wall distribution T_c
        A_oil = ar["A_p"] + ar["A_v"]   # surfaces at the oil temperature T_os
        if wall_temp_fn is not None:
            T_c_mid = np.array([wall_temp_fn(a) for a in a_mid])
        else:
            T_c_mid = np.asarray(wall_temperature(a_mid, meta.T_os, meta.T_0))
        d_h = np.atleast_1d(hydraulic_diameter(geom, a_mid))
        u = 2.0 * meta.omega * geom.r1
        tr = model.transport(press[0], T_inflow) if model.backend == "table" \
            else model.transport()
        # h_c = htc_geo * rho^0.8 for fixed transport properties
        with np.errstate(divide="ignore", invalid="ignore"):
            htc_geo = np.where(
                d_h > 0.0,
                0.025 * tr.k * (u / tr.mu) ** 0.8 * d_h**-0.2 * tr.Pr**0.4
                * (1.0 + 1.77 * d_h / geom.r_ave),
                0.0)

    T0 = T_inflow
    rho = model.density(press[0], T0)
    m_c = rho * V[0]
    U = m_c * model.internal_energy(press[0], T0)
    states = [ChamberState(alpha=float(alphas[0]), m_c=m_c, U=U, T=T0,
                           rho=rho, p=float(press[0]), dQ=0.0)]

    ideal = model.backend == "ideal"
    cp, cv, R_gas = model.cp, model.cv, model.R
    omega = meta.omega
    T_os = meta.T_os

    sum_dQ = sum_dW = s_in = s_out = 0.0
    dQ_acc = 0.0
    max_iters = 0
    residual_history: list[list[float]] = []

    m_prev, U_prev, T_prev, rho_prev = m_c, U, T0, rho
    for j in range(1, alphas.size):
        dV = float(V[j] - V[j - 1])
        p_mid = 0.5 * (press[j - 1] + press[j])
        p_j = float(press[j])
        da = float(alphas[j] - alphas[j - 1])

        if settings.adiabatic:
            dQ = 0.0
        else:
            h_c = htc_geo[j - 1] * rho_prev**0.8
            dQ = (h_c / omega) * (A_cyl[j - 1] * (T_c_mid[j - 1] - T_prev)
                                  + A_oil[j - 1] * (T_os - T_prev)) * da

        rho0 = rho_prev
        resids: list[float] = []
        converged = False
        for _ in range(settings.max_iter):
            dm = rho0 * V[j] - m_prev
            m_new = m_prev + dm
            if dm >= 0.0:
                dU_flux = h_in * dm
            elif ideal:
                dU_flux = cp * T_prev * dm
            else:
                dU_flux = model.enthalpy(p_j, T_prev) * dm
            U_new = U_prev + dQ - p_mid * dV + dU_flux
            if m_new <= 0.0 or U_new <= 0.0:
                resids.append(math.inf)
                rho0 = max(rho0 * 0.5, 1e-12)
                continue
            if ideal:
                T_new = (U_new / m_new) / cv
                rho_m = p_j / (R_gas * T_new)
            else:
                T_new = model.temperature_from_internal_energy(p_j, U_new / m_new)
                rho_m = model.density(p_j, T_new)
            if T_new <= 0.0 or rho_m <= 0.0:
                resids.append(math.inf)
                rho0 = max(rho0 * 0.5, 1e-12)
                continue
            resid = abs(rho0 - rho_m) / rho0
            resids.append(resid)
            rho0 = rho_m
            if resid <= settings.rho_tol:
                converged = True
                break
        if not converged:
            best = min(resids) if resids else math.inf
            raise ConvergenceError(
                f"density iteration failed at step {j} (alpha={alphas[j]:.4f} rad): "
                f"best residual {best:.3e} after {settings.max_iter} iterations",
                worst_residual=best, step_index=j)
        max_iters = max(max_iters, len(resids))
        residual_history.append(resids)

        dm = rho0 * V[j] - m_prev
        m_new = m_prev + dm
        if dm >= 0.0:
            dU_flux = h_in * dm
        elif ideal:
            dU_flux = cp * T_prev * dm
        else:
            dU_flux = model.enthalpy(p_j, T_prev) * dm
        U_new = U_prev + dQ - p_mid * dV + dU_flux
        if ideal:
            T_new = (U_new / m_new) / cv
        else:
            T_new = model.temperature_from_internal_energy(p_j, U_new / m_new)

        sum_dQ += dQ
        sum_dW += -p_mid * dV
        if dm >= 0.0:
            s_in += dU_flux
        else:
            s_out += -dU_flux
        dQ_acc += dQ

        states.append(ChamberState(alpha=float(alphas[j]), m_c=m_new, U=U_new,
                                   T=T_new, rho=rho0, p=p_j, dQ=dQ_acc))
        m_prev, U_prev, T_prev, rho_prev = m_new, U_new, T_new, rho0

    last = states[-1]
    return SolverResult(states=states, rho_2=last.rho, T_2=last.T, p_2=last.p,
                        max_iterations=max_iters, sum_dQ=sum_dQ, sum_dW=sum_dW,
                        sum_h_dm_in=s_in, sum_h_dm_out=s_out,
                        residual_history=residual_history)


def march_closed_adiabatic(alphas: np.ndarray, pressures: np.ndarray,
                           volumes: np.ndarray, model: GasModel,
                           T_start: float) -> SolverResult:
    """Closed-volume adiabatic energy march (no flux terms).

    Integrates dU = -p dV with the explicit midpoint rule over a fixed gas
    mass and recovers temperature and density through the equation of state
    at the measured pressure.  On an exact isentrope trace the product
    p*rho^(-gamma) is conserved up to the scheme's discretisation error.
    """
    alphas = np.asarray(alphas, dtype=float)
    pressures = np.asarray(pressures, dtype=float)
    volumes = np.asarray(volumes, dtype=float)
    rho0 = model.density(pressures[0], T_start)
    m = rho0 * volumes[0]
    U = m * model.internal_energy(pressures[0], T_start)
    states = [ChamberState(alpha=float(alphas[0]), m_c=m, U=U, T=T_start,
                           rho=rho0, p=float(pressures[0]), dQ=0.0)]
    sum_dW = 0.0
    for j in range(1, alphas.size):
        dV = volumes[j] - volumes[j - 1]
        p_mid = 0.5 * (pressures[j - 1] + pressures[j])
        U = U - p_mid * dV
        sum_dW += -p_mid * dV
        T = model.temperature_from_internal_energy(pressures[j], U / m)
        rho = model.density(pressures[j], T)
        states.append(ChamberState(alpha=float(alphas[j]), m_c=m, U=U, T=T,
                                   rho=rho, p=float(pressures[j]), dQ=0.0))
    last = states[-1]
    return SolverResult(states=states, rho_2=last.rho, T_2=last.T, p_2=last.p,
                        max_iterations=1, sum_dW=sum_dW)
