"""Crank-angle trace ingestion, phase alignment, resampling and valve events.

Trace CSV schema (exact header)::

    alpha_deg,p_suction_Pa,p_discharge_Pa,x_vane_m,y_valve_m

optionally preceded by metadata lines ``# key = value`` carrying run
metadata (``N_rps, m_dot_meas_kgs, W_in_W, T_s_K, T_0_K, T_os_K, T_A_K,
T_B_K, T_C_K, L_A_m, L_B_m, L_C_m, D_m``).  Angles are degrees at the file
boundary and radians everywhere inside the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .errors import NoDischargeEvent, PhaseAlignError, TraceError

TWO_PI = 2.0 * math.pi

TRACE_COLUMNS = ["alpha_deg", "p_suction_Pa", "p_discharge_Pa", "x_vane_m", "y_valve_m"]

META_KEYS = {
    "N_rps": "N_rps",
    "m_dot_meas_kgs": "m_dot_meas",
    "W_in_W": "W_in",
    "T_s_K": "T_s",
    "T_0_K": "T_0",
    "T_os_K": "T_os",
    "T_A_K": "T_A",
    "T_B_K": "T_B",
    "T_C_K": "T_C",
    "L_A_m": "L_A",
    "L_B_m": "L_B",
    "L_C_m": "L_C",
    "D_m": "D",
}


@dataclass
class RunMeta:
    """Operating-point metadata attached to one averaged revolution.

    Speeds in Hz, temperatures in K, lengths in m, mass flow kg/s, power W.
    T_s is the gas temperature entering the suction pipe, T_0 the suction
    inlet temperature used by the wall-temperature correlation, T_os the
    lubricating-oil temperature, T_A/T_B/T_C the measured wall temperatures
    of the three pipe segments of lengths L_A/L_B/L_C and bore D.
    """

    N_rps: float
    m_dot_meas: float = float("nan")
    W_in: float = float("nan")
    T_s: float = 267.15
    T_0: float = 267.15
    T_os: float = 320.0
    T_A: float = 295.0
    T_B: float = 300.0
    T_C: float = 305.0
    L_A: float = 0.15
    L_B: float = 0.20
    L_C: float = 0.10
    D: float = 0.0095

    def __post_init__(self):
        if self.N_rps <= 0:
            raise TraceError(f"rotational speed must be positive, got {self.N_rps}")
        for name in ("T_s", "T_0", "T_os", "T_A", "T_B", "T_C"):
            if getattr(self, name) <= 0:
                raise TraceError(f"temperature {name} must be positive")
        for name in ("L_A", "L_B", "L_C", "D"):
            if getattr(self, name) <= 0:
                raise TraceError(f"length {name} must be positive")

    @property
    def omega(self) -> float:
        """Shaft angular speed [rad/s]."""
        return TWO_PI * self.N_rps

    def replace(self, **kw) -> "RunMeta":
        return replace(self, **kw)


@dataclass
class RawTrace:
    """Parsed but not yet phase-aligned channel data (one revolution)."""

    alpha: np.ndarray
    p_st: np.ndarray
    p_dt: np.ndarray
    x_vane: np.ndarray
    y_p: np.ndarray
    meta: RunMeta


@dataclass
class CycleTrace:
    """One phase-aligned averaged revolution on a uniform angle grid.

    alpha strictly increasing, alpha[0] = 0, alpha[-1] < 2*pi, uniform
    spacing; pressures positive; valve lift non-negative.
    """

    alpha: np.ndarray
    p_st: np.ndarray
    p_dt: np.ndarray
    x_vane: np.ndarray
    y_p: np.ndarray
    meta: RunMeta
    warnings: list = field(default_factory=list)

    def __post_init__(self):
        n = self.alpha.size
        for name in ("p_st", "p_dt", "x_vane", "y_p"):
            if getattr(self, name).size != n:
                raise TraceError(f"channel {name} length mismatch")
        d = np.diff(self.alpha)
        if self.alpha[0] != 0.0 or np.any(d <= 0) or self.alpha[-1] >= TWO_PI:
            raise TraceError("alpha grid must start at 0, increase strictly and stay below 2*pi")
        if not np.allclose(d, d[0], rtol=1e-9, atol=1e-12):
            raise TraceError("alpha grid must be uniform")
        if np.any(self.p_st <= 0) or np.any(self.p_dt <= 0):
            raise TraceError("pressure samples must be positive")
        if np.any(self.y_p < 0):
            raise TraceError("valve lift must be non-negative")

    @property
    def n(self) -> int:
        return self.alpha.size

    @property
    def dalpha(self) -> float:
        return float(self.alpha[1] - self.alpha[0])

    def replace(self, **kw) -> "CycleTrace":
        return replace(self, **kw)


class ValveEvents(NamedTuple):
    alpha_open: float   # first upward threshold crossing [rad]
    alpha_close: float  # last downward crossing, unwrapped past 2*pi if needed
    wrapped: bool       # True when the valve is still open across the cycle seam


def _parse_meta_line(line: str, row: int) -> tuple[str, float]:
    body = line.lstrip("#").strip()
    if "=" not in body:
        raise TraceError(f"row {row}: malformed metadata line {line.strip()!r}")
    key, val = (s.strip() for s in body.split("=", 1))
    try:
        return key, float(val)
    except ValueError as exc:
        raise TraceError(f"row {row}: non-numeric metadata value in {line.strip()!r}") from exc


def load_trace(path, defaults: dict[str, float] | None = None) -> RawTrace:
    """Parse a trace CSV with per-column validation.

    Multi-revolution files (cumulative angle beyond 360 deg) are folded and
    phase-averaged onto the first revolution's grid before returning.
    ``defaults`` supplies run-metadata fields (RunMeta field names) that the
    file may omit; metadata present in the file always wins.
    Raises TraceError naming the offending row for missing columns,
    non-monotone angles, duplicates and NaNs.
    """
    meta_kv: dict[str, float] = {}
    header = None
    rows: list[list[float]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for i, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, val = _parse_meta_line(line, i)
                meta_kv[key] = val
                continue
            if header is None:
                header = [c.strip() for c in line.split(",")]
                if header != TRACE_COLUMNS:
                    missing = [c for c in TRACE_COLUMNS if c not in header]
                    if missing:
                        raise TraceError(f"row {i}: missing column(s) {', '.join(missing)}")
                    raise TraceError(f"row {i}: columns must be exactly "
                                     f"{','.join(TRACE_COLUMNS)}, got {line!r}")
                continue
            parts = line.split(",")
            if len(parts) != len(TRACE_COLUMNS):
                raise TraceError(f"row {i}: expected {len(TRACE_COLUMNS)} fields, "
                                 f"got {len(parts)}")
            try:
                vals = [float(p) for p in parts]
            except ValueError as exc:
                raise TraceError(f"row {i}: non-numeric field") from exc
            if any(math.isnan(v) for v in vals):
                raise TraceError(f"row {i}: NaN value")
            rows.append(vals)
    if header is None or not rows:
        raise TraceError("trace file has no data rows")

    data = np.asarray(rows, dtype=float)
    alpha_deg = data[:, 0]
    d = np.diff(alpha_deg)
    dup = np.nonzero(d == 0.0)[0]
    if dup.size:
        raise TraceError(f"row {dup[0] + 3}: duplicate angle {alpha_deg[dup[0]]}")
    if np.any(d < 0):
        bad = int(np.nonzero(d < 0)[0][0])
        raise TraceError(f"row {bad + 3}: non-monotone angle")

    channels = data[:, 1:]
    if alpha_deg[-1] - alpha_deg[0] >= 360.0:
        alpha_deg, channels = _phase_average(alpha_deg, channels)

    meta_fields = {META_KEYS[k]: v for k, v in meta_kv.items() if k in META_KEYS}
    unknown = [k for k in meta_kv if k not in META_KEYS]
    if unknown:
        raise TraceError(f"unknown metadata key(s): {', '.join(sorted(unknown))}")
    for key, val in (defaults or {}).items():
        meta_fields.setdefault(key, val)
    if "N_rps" not in meta_fields:
        raise TraceError("N_rps missing: provide it as trace metadata or via defaults")
    meta = RunMeta(**meta_fields)

    return RawTrace(alpha=np.radians(alpha_deg), p_st=channels[:, 0],
                    p_dt=channels[:, 1], x_vane=channels[:, 2],
                    y_p=channels[:, 3], meta=meta)


def _phase_average(alpha_deg: np.ndarray, channels: np.ndarray):
    """Fold a multi-revolution record modulo 360 deg and average revolutions.

    Assumes a uniform angle step; the number of samples per revolution is
    inferred from it.
    """
    step = alpha_deg[1] - alpha_deg[0]
    if not np.allclose(np.diff(alpha_deg), step, rtol=1e-6, atol=1e-9):
        raise TraceError("multi-revolution averaging requires a uniform angle step")
    per_rev = int(round(360.0 / step))
    n_rev = alpha_deg.size // per_rev
    if n_rev < 1:
        return alpha_deg, channels
    trimmed = channels[: n_rev * per_rev]
    avg = trimmed.reshape(n_rev, per_rev, channels.shape[1]).mean(axis=0)
    folded = (alpha_deg[:per_rev] % 360.0)
    order = np.argsort(folded)
    return folded[order], avg[order]


def align_phase(raw: RawTrace, noise_floor: float = 1e-7) -> CycleTrace:
    """Rotate samples so the vane-displacement minimum lands on alpha = 0.

    The minimum location is estimated from the phase of the fundamental
    Fourier component of the vane signal (the vane waveform is symmetric
    about its minimum, so the fundamental's phase pins the true minimum and
    is robust to sample noise).  Samples are rotated by an integer number of
    grid steps and the angle axis is re-based onto [0, 2*pi).

    Raises PhaseAlignError when the vane channel is flat to within
    ``noise_floor``.
    """
    x = raw.x_vane
    n = x.size
    if n < 8:
        raise TraceError("too few samples to phase-align")
    if np.max(x) - np.min(x) <= noise_floor:
        raise PhaseAlignError("cannot phase-align: vane displacement is flat "
                              f"(span {np.max(x) - np.min(x):.3g} m)")
    # fundamental of -x peaks where x is minimal; for a waveform even about
    # its minimum at phi the bin-1 coefficient is (A/2)*exp(-i*phi)
    k = np.arange(n)
    c1 = np.sum(-x * np.exp(-1j * TWO_PI * k / n)) / n
    phi = (-math.atan2(c1.imag, c1.real)) % TWO_PI
    shift = int(round(phi / (TWO_PI / n))) % n
    dalpha = TWO_PI / n

    def rot(ch):
        return np.roll(ch, -shift)

    return CycleTrace(alpha=k * dalpha, p_st=rot(raw.p_st), p_dt=rot(raw.p_dt),
                      x_vane=rot(x), y_p=rot(raw.y_p), meta=raw.meta)


def resample(trace: CycleTrace, n_target: int) -> CycleTrace:
    """Periodic linear resampling onto a uniform n_target grid.

    The interpolation wraps the cycle end onto the start; resampling onto
    the same grid is an identity to round-off.
    """
    if n_target < 64:
        raise TraceError(f"resample target too small ({n_target} < 64)")
    n = trace.n
    new_alpha = np.arange(n_target) * (TWO_PI / n_target)
    alpha_ext = np.concatenate([trace.alpha, [TWO_PI]])

    def interp(ch):
        ext = np.concatenate([ch, [ch[0]]])
        return np.interp(new_alpha, alpha_ext, ext)

    return CycleTrace(alpha=new_alpha, p_st=interp(trace.p_st),
                      p_dt=interp(trace.p_dt), x_vane=interp(trace.x_vane),
                      y_p=interp(trace.y_p), meta=trace.meta,
                      warnings=list(trace.warnings))


def smooth_pressures(trace: CycleTrace, window: int) -> CycleTrace:
    """Optional circular moving-average smoothing of both pressure channels.

    Disabled by default (window <= 1 returns the trace unchanged); when
    applied, a note is appended to the trace warnings so it is never silent.
    """
    if window <= 1:
        return trace
    if window >= trace.n:
        raise TraceError("smoothing window exceeds trace length")
    kern = np.ones(window) / window
    pad = window // 2

    def smooth(ch):
        ext = np.concatenate([ch[-pad:], ch, ch[:pad]])
        out = np.convolve(ext, kern, mode="same")
        return out[pad:pad + trace.n]

    return trace.replace(p_st=smooth(trace.p_st), p_dt=smooth(trace.p_dt),
                         warnings=trace.warnings + [f"pressure channels smoothed "
                                                    f"with {window}-sample moving average"])


def format_trace_csv(trace: CycleTrace) -> str:
    """Render a trace in the same CSV schema :func:`load_trace` reads.

    All finite run-metadata fields are emitted as ``# key = value`` lines,
    making the file self-contained for a later analysis run.
    """
    meta = trace.meta
    inv = {v: k for k, v in META_KEYS.items()}
    lines = []
    for field_name, key in sorted(inv.items(), key=lambda kv: kv[1]):
        val = getattr(meta, field_name)
        if math.isfinite(val):
            lines.append(f"# {key} = {val!r}")
    lines.append(",".join(TRACE_COLUMNS))
    alpha_deg = np.degrees(trace.alpha)
    for row in zip(alpha_deg, trace.p_st, trace.p_dt, trace.x_vane, trace.y_p):
        lines.append(",".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"


def dump_trace_csv(trace: CycleTrace, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_trace_csv(trace))


def valve_events(trace: CycleTrace, lift_threshold: float = 2e-6) -> ValveEvents:
    """Detect discharge-valve open/close angles from the lift channel.

    The default threshold is the 2 um displacement-sensor resolution; lift
    below it is indistinguishable from noise.  Crossing locations are
    refined by linear sub-grid interpolation.  When the valve is open across
    the cycle seam, the close angle is unwrapped past 2*pi and ``wrapped``
    is set (delayed closing).
    """
    y = trace.y_p
    alpha = trace.alpha
    n = y.size
    above = y > lift_threshold
    if not np.any(above):
        raise NoDischargeEvent("no discharge event: valve lift never exceeds "
                               f"{lift_threshold:.3g} m")
    if np.all(above):
        raise NoDischargeEvent("valve lift exceeds the threshold everywhere; "
                               "cannot locate events")

    dalpha = trace.dalpha

    def cross(i, j):
        # linear interpolation of the threshold crossing between nodes i, j
        yi, yj = y[i], y[j]
        frac = (lift_threshold - yi) / (yj - yi)
        return alpha[i] + frac * dalpha

    up = [i for i in range(n) if above[(i + 1) % n] and not above[i]]
    down = [i for i in range(n) if above[i] and not above[(i + 1) % n]]

    wrapped = bool(above[0] and above[-1])
    alpha_open = min(cross(i, (i + 1) % n) for i in up)
    closes = [cross(i, (i + 1) % n) for i in down]
    if wrapped:
        # open interval spans the seam: the physical close is the crossing
        # that lands inside the wrapped head of the cycle
        head = [c for c in closes if c < alpha_open]
        tail = [c for c in closes if c >= alpha_open]
        alpha_close = (max(head) + TWO_PI) if head else max(tail)
    else:
        alpha_close = max(closes)
    if alpha_close <= alpha_open:
        raise NoDischargeEvent("inconsistent valve events "
                               f"(open {alpha_open}, close {alpha_close})")
    return ValveEvents(alpha_open=alpha_open, alpha_close=alpha_close, wrapped=wrapped)
