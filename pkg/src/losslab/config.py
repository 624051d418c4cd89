"""Run-configuration and scenario files.

Flat INI files with ``key_unit = value`` lines; angles are degrees at this
boundary and radians inside the package.  Sections and keys::

    [geometry]  r1, r2, e, H, b_v, V_clearance, delta_rc, delta_vc, d_port,
                alpha_s_deg, alpha_d_deg
    [gas]       backend (ideal|table), R_JkgK, gamma and/or cp_JkgK,
                k_WmK, mu_Pas, Pr, table_path
    [operating] p_s_Pa, p_d_Pa, N_rps, T_s_K, T_0_K, T_os_K, T_A_K, T_B_K,
                T_C_K, L_A_m, L_B_m, L_C_m, D_m
                (optional m_dot_meas_kgs, W_in_W)
    [solver]    rho_tol, max_iter, adiabatic
    [analysis]  eps_b, lift_threshold_m, dw_c_pressure_ratio, smoothing_window

Scenario files carry a single [scenario] section (see :class:`~.synth.Scenario`).
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass

from .errors import ConfigError
from .geometry import Geometry
from .props import GasModel, PropertyTable
from .report import AnalysisOptions
from .synth import Scenario
from .thermo import SolverSettings

GEOMETRY_KEYS = ["r1", "r2", "e", "H", "b_v", "V_clearance", "delta_rc",
                 "delta_vc", "d_port", "alpha_s_deg", "alpha_d_deg"]

OPERATING_REQUIRED = ["p_s_Pa", "p_d_Pa", "N_rps", "T_s_K", "T_0_K", "T_os_K",
                      "T_A_K", "T_B_K", "T_C_K", "L_A_m", "L_B_m", "L_C_m", "D_m"]


@dataclass
class RunConfig:
    geometry: Geometry
    model: GasModel
    operating: dict          # reference pressures + RunMeta field defaults
    solver: SolverSettings
    analysis: AnalysisOptions

    @property
    def p_s(self) -> float:
        return self.operating["p_s_Pa"]

    @property
    def p_d(self) -> float:
        return self.operating["p_d_Pa"]

    def meta_defaults(self) -> dict:
        """RunMeta field defaults derived from the [operating] section."""
        op = self.operating
        out = {"N_rps": op["N_rps"], "T_s": op["T_s_K"], "T_0": op["T_0_K"],
               "T_os": op["T_os_K"], "T_A": op["T_A_K"], "T_B": op["T_B_K"],
               "T_C": op["T_C_K"], "L_A": op["L_A_m"], "L_B": op["L_B_m"],
               "L_C": op["L_C_m"], "D": op["D_m"]}
        if "m_dot_meas_kgs" in op:
            out["m_dot_meas"] = op["m_dot_meas_kgs"]
        if "W_in_W" in op:
            out["W_in"] = op["W_in_W"]
        return out


def _read_ini(path) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    read = cp.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    return cp


def _get_float(section, key, where) -> float:
    if key not in section:
        raise ConfigError(f"missing config key `{key}` in section [{where}]")
    try:
        return float(section[key])
    except ValueError as exc:
        raise ConfigError(f"non-numeric value for `{key}` in [{where}]: "
                          f"{section[key]!r}") from exc


def _parse_geometry(cp) -> Geometry:
    if "geometry" not in cp:
        raise ConfigError("missing config section [geometry]")
    g = cp["geometry"]
    vals = {k: _get_float(g, k, "geometry") for k in GEOMETRY_KEYS}
    return Geometry(r1=vals["r1"], r2=vals["r2"], e=vals["e"], H=vals["H"],
                    b_v=vals["b_v"], V_clearance=vals["V_clearance"],
                    delta_rc=vals["delta_rc"], delta_vc=vals["delta_vc"],
                    d_port=vals["d_port"],
                    alpha_s=math.radians(vals["alpha_s_deg"]),
                    alpha_d=math.radians(vals["alpha_d_deg"]))


def _parse_gas(cp) -> GasModel:
    if "gas" not in cp:
        raise ConfigError("missing config section [gas]")
    g = cp["gas"]
    backend = g.get("backend", "ideal").strip()
    R = _get_float(g, "R_JkgK", "gas")
    gamma = float(g["gamma"]) if "gamma" in g else None
    cp_val = float(g["cp_JkgK"]) if "cp_JkgK" in g else None
    k = float(g.get("k_WmK", 0.0125))
    mu = float(g.get("mu_Pas", 1.2e-5))
    Pr = float(g["Pr"]) if "Pr" in g else None
    if backend == "ideal":
        return GasModel.ideal(R=R, cp=cp_val, gamma=gamma, k=k, mu=mu, Pr=Pr)
    if backend == "table":
        if "table_path" not in g:
            raise ConfigError("missing config key `table_path` in section [gas]")
        if gamma is None:
            raise ConfigError("table backend requires an explicit `gamma`")
        table = PropertyTable.from_csv(g["table_path"])
        return GasModel.from_table(table, R=R, gamma=gamma)
    raise ConfigError(f"unknown gas backend {backend!r}")


def _parse_operating(cp) -> dict:
    if "operating" not in cp:
        raise ConfigError("missing config section [operating]")
    o = cp["operating"]
    out = {k: _get_float(o, k, "operating") for k in OPERATING_REQUIRED}
    for opt in ("m_dot_meas_kgs", "W_in_W"):
        if opt in o:
            out[opt] = float(o[opt])
    if out["p_d_Pa"] <= out["p_s_Pa"]:
        raise ConfigError("operating section requires p_d_Pa > p_s_Pa")
    return out


def _parse_solver(cp) -> SolverSettings:
    if "solver" not in cp:
        return SolverSettings()
    s = cp["solver"]
    return SolverSettings(rho_tol=float(s.get("rho_tol", 1e-6)),
                          max_iter=int(float(s.get("max_iter", 50))),
                          adiabatic=s.get("adiabatic", "false").strip().lower()
                          in ("1", "true", "yes", "on"))


def _parse_analysis(cp) -> AnalysisOptions:
    if "analysis" not in cp:
        return AnalysisOptions()
    a = cp["analysis"]
    variant = a.get("dw_c_pressure_ratio", "p2").strip()
    if variant not in ("p2", "ps"):
        raise ConfigError(f"dw_c_pressure_ratio must be 'p2' or 'ps', got {variant!r}")
    return AnalysisOptions(eps_b=float(a.get("eps_b", 0.7)),
                           lift_threshold=float(a.get("lift_threshold_m", 2e-6)),
                           dw_c_ratio_variant=variant,
                           smoothing_window=int(float(a.get("smoothing_window", 0))))


def load_config(path) -> RunConfig:
    """Parse and validate a run configuration file."""
    cp = _read_ini(path)
    return RunConfig(geometry=_parse_geometry(cp), model=_parse_gas(cp),
                     operating=_parse_operating(cp), solver=_parse_solver(cp),
                     analysis=_parse_analysis(cp))


def load_scenario(path) -> tuple[Scenario, int]:
    """Parse a scenario file; returns the scenario and the sample count."""
    cp = _read_ini(path)
    if "scenario" not in cp:
        raise ConfigError("missing config section [scenario]")
    s = cp["scenario"]

    def opt(key, default):
        return float(s.get(key, default))

    n = int(float(s.get("n_samples", 3600)))
    kwargs = dict(
        pulsation_amp=opt("pulsation_amp", 0.0),
        pulsation_phase=math.radians(opt("pulsation_phase_deg", 40.0)),
        valve_delay=math.radians(opt("valve_delay_deg", 0.0)),
        valve_lag_close=math.radians(opt("valve_lag_close_deg", 0.0)),
        heating_dT=opt("heating_dT_K", 0.0),
        discharge_overpressure=opt("discharge_overpressure", 0.0),
        noise_p=opt("noise_p_Pa", 0.0),
        noise_x=opt("noise_x_m", 0.0),
        noise_y=opt("noise_y_m", 0.0),
        eta_mf=opt("eta_mf", 0.85),
        seed=int(float(s.get("seed", 0))),
    )
    if "delta_rc" in s:
        kwargs["delta_rc"] = float(s["delta_rc"])
    if "delta_vc" in s:
        kwargs["delta_vc"] = float(s["delta_vc"])
    try:
        scenario = Scenario(**kwargs)
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(f"invalid scenario: {exc}") from exc
    return scenario, n
