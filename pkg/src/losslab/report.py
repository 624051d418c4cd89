"""Efficiency chain, per-factor net effects, sweep aggregation and reports.

This is the top of the analysis stack: it wires the solver, mass-loss and
power modules together for one operating point, derives the efficiency
chain and the mass-per-power net effect of every loss factor, and
serialises everything into a deterministic JSON document plus plot-ready
CSV tables for speed sweeps.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import LosslabError
from .geometry import Geometry, swept_volume
from .losses import (MassLossBreakdown, backflow, lambda_clearance,
                     lambda_suction_heating, leakage, supercharge_gain,
                     volumetric_efficiency)
from .power import PowerBreakdown, power_breakdown
from .props import GasModel
from .thermo import SolverSettings, pipe_htc, solve_suction_chamber, suction_pipe_heating
from .traces import CycleTrace, ValveEvents, smooth_pressures, valve_events
from .errors import NoDischargeEvent

FACTORS = ("ideal", "suction-heating", "leakage", "clearance", "backflow",
           "supercharging", "actual")


@dataclass
class AnalysisOptions:
    """Analysis-stage knobs (config section [analysis])."""

    eps_b: float = 0.7              # backflow orifice flow coefficient
    lift_threshold: float = 2e-6    # valve event threshold [m]
    dw_c_ratio_variant: str = "p2"  # bracket pressure ratio of dW_c
    smoothing_window: int = 0       # pressure moving average, off by default


@dataclass
class EfficiencyChain:
    """eta_total = eta_v * eta_c * eta_mf; eta_mf bundles the mechanical and
    motor losses (no shaft-torque channel exists to split them)."""

    eta_v: float
    eta_c: float
    eta_mf: float
    eta_total: float


@dataclass
class NetEffect:
    """Mass-flow per unit power attributable to one loss factor [kg/J]."""

    factor: str
    rate: float


def efficiency_chain(mass: MassLossBreakdown, power: PowerBreakdown,
                     W_in: float) -> EfficiencyChain:
    """Build the efficiency chain from the two breakdowns.

    eta_c = W_ideal/W_real, eta_mf = W_real/W_in,
    eta_total = eta_v_meas * eta_c * eta_mf.
    """
    if power.W_real <= 0.0:
        raise LosslabError(f"non-positive indicated work W_real={power.W_real}")
    eta_c = power.W_ideal / power.W_real
    eta_mf = power.W_real / W_in if (W_in and W_in > 0 and math.isfinite(W_in)) \
        else float("nan")
    eta_total = mass.eta_v_meas * eta_c * eta_mf
    return EfficiencyChain(eta_v=mass.eta_v_meas, eta_c=eta_c, eta_mf=eta_mf,
                           eta_total=eta_total)


def net_effect(factor: str, m_ideal: float, m_loss: float, W_ideal: float,
               dW_loss: float) -> NetEffect:
    """rate = (m_ideal + m_loss)/(W_ideal + dW_loss).

    Loss factors contribute a negative m_loss at zero extra power;
    supercharging contributes its mass gain together with dW_s + dW_p.
    """
    denom = W_ideal + dW_loss
    if denom <= 0.0:
        raise LosslabError(f"non-positive net-effect denominator for {factor}")
    return NetEffect(factor=factor, rate=(m_ideal + m_loss) / denom)


def net_effects_table(mass: MassLossBreakdown, power: PowerBreakdown,
                      m_ideal: float, m_meas: float) -> list[NetEffect]:
    """Net effects of every factor, plus the all-in 'actual' rate."""
    m_sh = mass.lambda_sh * m_ideal
    rows = [
        net_effect("ideal", m_ideal, 0.0, power.W_ideal, 0.0),
        net_effect("suction-heating", m_ideal, -m_sh, power.W_ideal, 0.0),
        net_effect("leakage", m_ideal, -mass.m_dot_Llk, power.W_ideal, 0.0),
        net_effect("clearance", m_ideal, -mass.m_dot_Lcv, power.W_ideal, 0.0),
        net_effect("backflow", m_ideal, -mass.m_dot_Lbf, power.W_ideal, 0.0),
        net_effect("supercharging", m_ideal, mass.m_dot_sc, power.W_ideal,
                   power.dW_s + power.dW_p),
    ]
    if math.isfinite(m_meas):
        rows.append(net_effect("actual", m_ideal, m_meas - m_ideal,
                               power.W_ideal, power.W_real - power.W_ideal))
    return rows


@dataclass
class PointReport:
    """Full decomposition of one operating point."""

    label: str
    N_rps: float
    p_s: float
    p_d: float
    p_2: float
    gamma: float
    V_2: float
    rho_s: float
    T_s3: float
    m_dot_ideal: float
    m_dot_meas: float
    W_in: float
    mass: MassLossBreakdown
    power: PowerBreakdown
    chain: EfficiencyChain
    net_effects: list[NetEffect]
    warnings: list[str] = field(default_factory=list)
    valve: ValveEvents | None = None
    solver_states: object = None  # SolverResult of the real-trace run (not serialised)


def analyze(trace: CycleTrace, geom: Geometry, model: GasModel, p_s: float,
            p_d: float, settings: SolverSettings | None = None,
            options: AnalysisOptions | None = None,
            label: str = "") -> PointReport:
    """Run the full decomposition chain on one aligned trace.

    Sequence: suction-pipe heating -> chamber solve on the measured trace
    (supercharged end state) and on a flat reference-pressure trace
    (heating-only state) -> the five mass-loss coefficients -> P-V power
    decomposition -> efficiency chain and net effects.
    """
    settings = settings or SolverSettings()
    options = options or AnalysisOptions()
    meta = trace.meta
    warnings = list(trace.warnings)

    if options.smoothing_window > 1:
        trace = smooth_pressures(trace, options.smoothing_window)
        warnings = list(trace.warnings)

    N = meta.N_rps
    V_2 = swept_volume(geom)
    rho_s = model.density(p_s, meta.T_s)
    m_ideal = rho_s * N * V_2

    m_dot_pipe = meta.m_dot_meas if math.isfinite(meta.m_dot_meas) else m_ideal
    htc = pipe_htc(model, m_dot_pipe, meta.D)
    if htc.laminar:
        warnings.append(f"pipe flow laminar (Re_D={htc.re_d:.0f}); "
                        "turbulent correlation extrapolated")
    T_s1, T_s2, T_s3 = suction_pipe_heating(meta, model, m_dot_pipe, h_p=htc.h_p)

    # measured-trace solve: supercharged end-of-suction state
    sol = solve_suction_chamber(trace, geom, model, settings, T_inflow=T_s3)
    p_2, rho_2 = sol.p_2, sol.rho_2

    # heating-only solve at flat reference pressure (supercharging disabled)
    sol_sh = solve_suction_chamber(trace, geom, model, settings, T_inflow=T_s3,
                                   p_override=np.full(trace.n, p_s))
    rho_sh = model.density(p_s, sol_sh.T_2)
    lam_sh = lambda_suction_heating(rho_s, rho_sh)

    lk = leakage(trace, geom, model, p_s, T_s3, rho_s)

    rho_d = model.density(p_d, model.isentropic_temperature(T_s3, p_s, p_d))
    m_cv, lam_cv = lambda_clearance(model, rho_d, rho_2, geom.V_clearance,
                                    V_2, rho_s, N)

    try:
        events = valve_events(trace, options.lift_threshold)
        if events.wrapped:
            warnings.append("delayed valve closing: lift still above threshold "
                            f"past 360 deg (closes at "
                            f"{math.degrees(events.alpha_close):.1f} deg)")
    except NoDischargeEvent:
        events = None
        warnings.append("no discharge event detected; backflow and discharge "
                        "loss taken as zero")
    if events is not None:
        m_bf, lam_bf = backflow(trace, geom, model, events, p_d, rho_d, rho_s,
                                eps_b=options.eps_b)
    else:
        m_bf, lam_bf = 0.0, 0.0

    m_sc, lam_sc = supercharge_gain(model, rho_s, p_s, p_2, T_s3, N, V_2)

    eta_pred, eta_meas = volumetric_efficiency(lam_sh, lk.lambda_lk, lam_cv,
                                               lam_bf, lam_sc,
                                               meta.m_dot_meas, rho_s, N, V_2)
    mass = MassLossBreakdown(
        lambda_sh=lam_sh, lambda_lk=lk.lambda_lk, lambda_cv=lam_cv,
        lambda_bf=lam_bf, lambda_sc=lam_sc, m_dot_Lrc=lk.m_dot_Lrc,
        m_dot_Lve=lk.m_dot_Lve, m_dot_Llk=lk.m_dot_Llk, m_dot_Lcv=m_cv,
        m_dot_Lbf=m_bf, m_dot_sc=m_sc, eta_v_pred=eta_pred, eta_v_meas=eta_meas)

    if events is not None:
        pw = power_breakdown(trace, geom, model.gamma, p_s, p_d, p_2, events,
                             N, ratio_variant=options.dw_c_ratio_variant)
    else:
        fake = ValveEvents(alpha_open=2.0 * math.pi, alpha_close=2.0 * math.pi,
                           wrapped=False)
        pw = power_breakdown(trace, geom, model.gamma, p_s, p_d, p_2, fake, N,
                             ratio_variant=options.dw_c_ratio_variant)
    warnings.append("sign conventions: dW_s as N*int((p_s - p_st) dV); "
                    "backflow ratio as p_st/p_d (reciprocal of the printed "
                    "orifice form)")
    if options.dw_c_ratio_variant == "ps":
        warnings.append("dW_c bracket uses p_d/p_s: five-term power identity "
                        "not closed by construction")

    chain = efficiency_chain(mass, pw, meta.W_in)
    if not (math.isfinite(meta.W_in) and meta.W_in > 0):
        warnings.append("W_in missing: eta_mf and eta_total not available")

    rows = net_effects_table(mass, pw, m_ideal, meta.m_dot_meas)

    return PointReport(label=label, N_rps=N, p_s=p_s, p_d=p_d, p_2=p_2,
                       gamma=model.gamma, V_2=V_2, rho_s=rho_s, T_s3=T_s3,
                       m_dot_ideal=m_ideal, m_dot_meas=meta.m_dot_meas,
                       W_in=meta.W_in, mass=mass, power=pw, chain=chain,
                       net_effects=rows, warnings=warnings, valve=events,
                       solver_states=sol)


# -- serialisation -----------------------------------------------------------


def _num(x):
    """JSON-safe float: NaN/inf become None (deterministic output)."""
    if x is None or (isinstance(x, float) and not math.isfinite(x)):
        return None
    return float(x)


def point_report_to_dict(rep: PointReport) -> dict:
    d = {
        "meta": {
            "label": rep.label,
            "N_rps": _num(rep.N_rps),
            "p_s_Pa": _num(rep.p_s),
            "p_d_Pa": _num(rep.p_d),
            "p_2_Pa": _num(rep.p_2),
            "gamma": _num(rep.gamma),
            "V_2_m3": _num(rep.V_2),
            "rho_s_kgm3": _num(rep.rho_s),
            "T_s3_K": _num(rep.T_s3),
            "m_dot_ideal_kgs": _num(rep.m_dot_ideal),
            "m_dot_meas_kgs": _num(rep.m_dot_meas),
            "W_in_W": _num(rep.W_in),
            "valve_open_deg": _num(math.degrees(rep.valve.alpha_open))
            if rep.valve else None,
            "valve_close_deg": _num(math.degrees(rep.valve.alpha_close))
            if rep.valve else None,
        },
        "mass_losses": {k: _num(v) for k, v in asdict(rep.mass).items()},
        "power_losses": {k: _num(v) for k, v in asdict(rep.power).items()},
        "efficiencies": {k: _num(v) for k, v in asdict(rep.chain).items()},
        "net_effects": {ne.factor: _num(ne.rate) for ne in rep.net_effects},
        "warnings": sorted(set(rep.warnings)),
    }
    return d


def report_to_json(d: dict) -> str:
    """Deterministic JSON rendering: sorted keys, fixed indentation, repr
    floats, no timestamps."""
    return json.dumps(d, indent=2, sort_keys=True) + "\n"


def report_from_json(text: str) -> dict:
    return json.loads(text)


# -- sweeps ------------------------------------------------------------------


@dataclass
class SweepReport:
    points: list[PointReport]
    errors: list[dict]

    def to_dict(self) -> dict:
        return {
            "points": [point_report_to_dict(p) for p in self.points],
            "errors": self.errors,
        }


def sweep(items, geom: Geometry, model: GasModel, p_s: float, p_d: float,
          settings: SolverSettings | None = None,
          options: AnalysisOptions | None = None) -> SweepReport:
    """Evaluate the pipeline for each (label, trace) pair.

    A failing point is isolated into an error record and does not abort the
    rest of the sweep.
    """
    points, errors = [], []
    for label, trace in items:
        try:
            points.append(analyze(trace, geom, model, p_s, p_d,
                                  settings=settings, options=options,
                                  label=label))
        except Exception as exc:  # per-point isolation is the contract
            errors.append({"label": label, "error": f"{type(exc).__name__}: {exc}"})
    points.sort(key=lambda p: (p.N_rps, p.label))
    return SweepReport(points=points, errors=errors)


def write_sweep_csvs(rep: SweepReport, out_dir) -> list[str]:
    """Emit the three plot-ready tables, one row per operating point."""
    import os

    written = []

    def emit(name, header, rows):
        path = os.path.join(out_dir, name)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            w.writerows(rows)
        written.append(path)

    emit("sweep_lambdas.csv",
         ["label", "N_rps", "lambda_sh", "lambda_lk", "lambda_cv", "lambda_bf",
          "lambda_sc", "eta_v_pred", "eta_v_meas"],
         [[p.label, p.N_rps, p.mass.lambda_sh, p.mass.lambda_lk,
           p.mass.lambda_cv, p.mass.lambda_bf, p.mass.lambda_sc,
           p.mass.eta_v_pred, p.mass.eta_v_meas] for p in rep.points])

    emit("sweep_power.csv",
         ["label", "N_rps", "W_ideal", "W_real", "dW_s", "dW_d", "dW_c", "dW_p"],
         [[p.label, p.N_rps, p.power.W_ideal, p.power.W_real, p.power.dW_s,
           p.power.dW_d, p.power.dW_c, p.power.dW_p] for p in rep.points])

    rate_cols = [f.replace("-", "_") for f in FACTORS]
    rows = []
    for p in rep.points:
        by = {ne.factor: ne.rate for ne in p.net_effects}
        rows.append([p.label, p.N_rps] + [by.get(f, float("nan")) for f in FACTORS])
    emit("sweep_rates.csv", ["label", "N_rps"] + [f"rate_{c}" for c in rate_cols],
         rows)
    return written
