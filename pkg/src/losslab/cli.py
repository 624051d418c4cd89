"""Command-line entry point: ingest -> analysis -> report, plus synthesis.

Subcommands::

    losslab analyze --config CFG --trace CSV --out DIR [--dump-states] [--adiabatic]
    losslab sweep   --config CFG --traces GLOB --out DIR [--jobs N]
    losslab synth   --config CFG --scenario SCN --out CSV

Exit codes: 0 success, 1 configuration error, 2 trace error, 3 solver
non-convergence.  The environment variable ``LOSSLAB_LOG`` selects the log
level (DEBUG/INFO/WARNING/ERROR).  All file writes are atomic
(write-temp-then-rename).
"""

from __future__ import annotations

import argparse
import csv
import glob
import logging
import math
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor

from .config import load_config, load_scenario
from .errors import ConfigError, ConvergenceError, LosslabError, TraceError
from .power import pv_diagram
from .report import (SweepReport, analyze, point_report_to_dict,
                     report_to_json, write_sweep_csvs)
from .synth import generate, inject_measured_rates
from .traces import RunMeta, align_phase, format_trace_csv, load_trace

log = logging.getLogger("losslab")

EXIT_OK, EXIT_CONFIG, EXIT_TRACE, EXIT_SOLVER = 0, 1, 2, 3


def _setup_logging() -> None:
    level = os.environ.get("LOSSLAB_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _atomic_write(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".losslab-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _load_aligned(cfg, trace_path):
    raw = load_trace(trace_path, defaults=cfg.meta_defaults())
    return align_phase(raw)


def _analyze_one(cfg, trace_path, label=""):
    trace = _load_aligned(cfg, trace_path)
    return analyze(trace, cfg.geometry, cfg.model, cfg.p_s, cfg.p_d,
                   settings=cfg.solver, options=cfg.analysis, label=label), trace


def cmd_analyze(args) -> int:
    cfg = load_config(args.config)
    if args.adiabatic:
        cfg.solver.adiabatic = True
    rep, trace = _analyze_one(cfg, args.trace,
                              label=os.path.basename(args.trace))

    _atomic_write(os.path.join(args.out, "report.json"),
                  report_to_json(point_report_to_dict(rep)))

    rows = pv_diagram(trace, cfg.geometry, rep.valve)
    buf = ["V_m3,p_Pa,leg"]
    buf += [f"{v!r},{p!r},{leg}" for v, p, leg in rows]
    _atomic_write(os.path.join(args.out, "pv_diagram.csv"), "\n".join(buf) + "\n")

    if args.dump_states:
        states = rep.solver_states.states
        buf = ["alpha_deg,T_K,rho_kgm3,m_c_kg,dQ_J"]
        buf += [f"{math.degrees(s.alpha)!r},{s.T!r},{s.rho!r},{s.m_c!r},{s.dQ!r}"
                for s in states]
        _atomic_write(os.path.join(args.out, "chamber_states.csv"),
                      "\n".join(buf) + "\n")

    log.info("analyze: eta_v_pred=%.4f eta_v_meas=%.4f",
             rep.mass.eta_v_pred, rep.mass.eta_v_meas)
    return EXIT_OK


def _sweep_worker(payload):
    config_path, trace_path = payload
    cfg = load_config(config_path)
    label = os.path.basename(trace_path)
    try:
        rep, _ = _analyze_one(cfg, trace_path, label=label)
        return ("ok", label, point_report_to_dict(rep), rep)
    except Exception as exc:
        return ("err", label, f"{type(exc).__name__}: {exc}", None)


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)  # validate early; workers re-load
    paths = sorted(glob.glob(args.traces))
    if not paths:
        raise TraceError(f"no trace matches glob {args.traces!r}")

    points, errors = [], []
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_sweep_worker,
                                    [(args.config, p) for p in paths]))
    else:
        results = [_sweep_worker((args.config, p)) for p in paths]
    for status, label, payload, rep in results:
        if status == "ok":
            points.append(rep)
        else:
            errors.append({"label": label, "error": payload})
            log.warning("sweep point %s failed: %s", label, payload)

    points.sort(key=lambda p: (p.N_rps, p.label))
    sweep_rep = SweepReport(points=points, errors=errors)
    import json as _json
    _atomic_write(os.path.join(args.out, "sweep_report.json"),
                  _json.dumps(sweep_rep.to_dict(), indent=2, sort_keys=True) + "\n")
    os.makedirs(args.out, exist_ok=True)
    write_sweep_csvs(sweep_rep, args.out)
    return EXIT_OK


def cmd_synth(args) -> int:
    cfg = load_config(args.config)
    scenario, n = load_scenario(args.scenario)
    meta0 = RunMeta(**cfg.meta_defaults())
    trace = generate(cfg.geometry, cfg.model, meta0, scenario,
                     cfg.p_s, cfg.p_d, n=n)
    meta = inject_measured_rates(trace, scenario, cfg.geometry, cfg.model,
                                 cfg.p_s, cfg.p_d,
                                 T_s=cfg.operating["T_s_K"],
                                 eps_b=cfg.analysis.eps_b)
    trace = trace.replace(meta=meta)
    _atomic_write(args.out, format_trace_csv(trace))
    log.info("synth: wrote %s (m_dot_meas=%.5g kg/s)", args.out, meta.m_dot_meas)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="losslab",
                                 description="Rolling-piston compressor loss "
                                             "decomposition toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="decompose one measured/synthetic trace")
    a.add_argument("--config", required=True)
    a.add_argument("--trace", required=True)
    a.add_argument("--out", required=True)
    a.add_argument("--dump-states", action="store_true")
    a.add_argument("--adiabatic", action="store_true",
                   help="force dQ = 0 in the chamber solver")
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("sweep", help="analyze every trace matching a glob")
    s.add_argument("--config", required=True)
    s.add_argument("--traces", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--jobs", type=int, default=1)
    s.set_defaults(func=cmd_sweep)

    g = sub.add_parser("synth", help="generate a synthetic trace from a scenario")
    g.add_argument("--config", required=True)
    g.add_argument("--scenario", required=True)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_synth)
    return ap


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"losslab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TraceError as exc:
        print(f"losslab: trace error: {exc}", file=sys.stderr)
        return EXIT_TRACE
    except ConvergenceError as exc:
        print(f"losslab: solver did not converge: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except LosslabError as exc:
        print(f"losslab: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
