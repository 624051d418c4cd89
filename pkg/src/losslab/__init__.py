"""losslab: loss decomposition for rolling-piston compressor cycles.

Decomposes measured (or synthesized) crank-angle pressure/displacement
traces into mass-flow loss coefficients and power-loss terms, derives the
efficiency chain and per-factor net effects, and ships a forward synthetic
oracle for closing the decomposition against known injections.
"""

from .errors import (ConfigError, ConvergenceError, LosslabError,
                     NoDischargeEvent, PhaseAlignError, TraceError)
from .geometry import (Geometry, chamber_volume, compression_volume,
                       heating_areas, hydraulic_diameter, swept_volume,
                       vane_extension)
from .losses import (LeakageResult, MassLossBreakdown, backflow,
                     backflow_flux, critical_pressure_ratio, lambda_clearance,
                     lambda_suction_heating, leakage, supercharge_gain,
                     volumetric_efficiency)
from .power import (PowerBreakdown, dw_compression, dw_discharge,
                    dw_suction, dw_supercharge, power_breakdown, pv_diagram,
                    w_ideal, w_real_indicated)
from .props import (GasModel, GasState, PropertyTable, Transport,
                    gamma_isentropic)
from .report import (AnalysisOptions, EfficiencyChain, NetEffect, PointReport,
                     SweepReport, analyze, efficiency_chain, net_effect,
                     net_effects_table, point_report_to_dict, report_from_json,
                     report_to_json, sweep, write_sweep_csvs)
from .synth import Scenario, generate, inject_measured_rates, scenario_lattice
from .thermo import (ChamberState, PipeHTC, SolverResult, SolverSettings,
                     cylinder_htc, heat_rate, march_closed_adiabatic, pipe_htc,
                     solve_suction_chamber, suction_pipe_heating,
                     wall_temperature)
from .traces import (CycleTrace, RawTrace, RunMeta, ValveEvents, align_phase,
                     dump_trace_csv, format_trace_csv, load_trace, resample,
                     smooth_pressures, valve_events)

__version__ = "0.1.0"
