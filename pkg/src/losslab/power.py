"""P-V power accounting: ideal work, the four loss terms, real indicated work.

All terms carry the rotational speed and are reported in watts with a
positive-loss sign convention.  The compression-process loss is the
residual of the decomposition, so

    W_real = W_ideal + dW_s + dW_d + dW_c + dW_p

holds identically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Geometry, chamber_volume, swept_volume
from .traces import CycleTrace, ValveEvents

TWO_PI = 2.0 * math.pi


@dataclass
class PowerBreakdown:
    W_ideal: float
    W_real: float
    dW_s: float
    dW_d: float
    dW_c: float
    dW_p: float
    p_2: float

    @property
    def residual(self) -> float:
        """Decomposition identity residual; zero by construction."""
        return self.W_real - (self.W_ideal + self.dW_s + self.dW_d
                              + self.dW_c + self.dW_p)


def _isentropic_work_rate(gamma: float, p_from: float, p_to: float,
                          V: float, N: float) -> float:
    """N * p*V * (g/(g-1)) * ((p_to/p_from)^((g-1)/g) - 1); the adiabatic
    compression power from (p_from, V) up to p_to."""
    k = (gamma - 1.0) / gamma
    return N * p_from * V * (gamma / (gamma - 1.0)) * ((p_to / p_from) ** k - 1.0)


def w_ideal(gamma: float, p_s: float, p_d: float, V_2: float, N: float) -> float:
    """Ideal adiabatic compression power [W] for the reference pressures."""
    if p_d <= p_s or p_s <= 0:
        raise ValueError(f"need p_d > p_s > 0 (got p_s={p_s}, p_d={p_d})")
    return _isentropic_work_rate(gamma, p_s, p_d, V_2, N)


def w_real_indicated(trace: CycleTrace, geom: Geometry, N: float) -> float:
    """Indicated input power N * |closed-loop p dV| [W].

    The loop pairs the suction-chamber pressure with the growing suction
    volume and the compression-chamber pressure with the complementary
    shrinking volume; trapezoidal integration around the closed polygon,
    wrapping the seam, makes the result independent of the start index.
    """
    V_s = np.atleast_1d(chamber_volume(geom, trace.alpha))
    V_2 = swept_volume(geom)
    V_path = np.concatenate([V_s, V_2 - V_s])
    p_path = np.concatenate([trace.p_st, trace.p_dt])
    return N * float(-loop_integral(p_path, V_path))


def loop_integral(p: np.ndarray, V: np.ndarray) -> float:
    """Trapezoidal closed contour integral of p dV (polygon wraps to start)."""
    dV = np.diff(V, append=V[:1])
    p_mid = 0.5 * (p + np.roll(p, -1))
    return float(np.sum(p_mid * dV))


def dw_suction(trace: CycleTrace, geom: Geometry, p_s: float, N: float) -> float:
    """Suction-process loss N * int (p_s - p_st) dV over the suction leg [W].

    Positive when the chamber fills below the reference suction pressure.
    The integral runs over the full suction sweep 0..2*pi so a uniform
    pressure offset c yields exactly c*V_2*N; the sliver between the last
    sample and 2*pi is closed with the end-sample pressure.
    """
    V = np.atleast_1d(chamber_volume(geom, trace.alpha))
    V = np.append(V, swept_volume(geom))
    p = np.append(trace.p_st, trace.p_st[-1])
    dV = np.diff(V)
    p_mid = 0.5 * (p[:-1] + p[1:])
    return N * float(np.sum((p_s - p_mid) * dV))


def dw_discharge(trace: CycleTrace, geom: Geometry, p_d: float,
                 events: ValveEvents, N: float) -> float:
    """Discharge-process loss N * int (p_d - p_dt) dV over the open-valve
    discharge leg [W].

    dV is the compression-chamber increment (negative on discharge), so
    chamber pressure above the reference yields a positive loss.  The leg
    spans [alpha_open, min(alpha_close, 2*pi)] with sub-node interpolation
    at both edges.
    """
    a_lo = events.alpha_open
    a_hi = min(events.alpha_close, TWO_PI)
    if a_hi <= a_lo:
        return 0.0
    alpha = trace.alpha
    V_2 = swept_volume(geom)

    inside = (alpha > a_lo) & (alpha < a_hi)
    a_nodes = alpha[inside]
    p_nodes = trace.p_dt[inside]
    a_grid = np.concatenate([[a_lo], a_nodes, [a_hi]])
    alpha_ext = np.append(alpha, TWO_PI)
    p_ext = np.append(trace.p_dt, trace.p_dt[-1])
    p_grid = np.concatenate([[np.interp(a_lo, alpha_ext, p_ext)], p_nodes,
                             [np.interp(a_hi, alpha_ext, p_ext)]])
    V_c = V_2 - np.atleast_1d(chamber_volume(geom, np.minimum(a_grid, TWO_PI)))
    dV = np.diff(V_c)
    p_mid = 0.5 * (p_grid[:-1] + p_grid[1:])
    return N * float(np.sum((p_d - p_mid) * dV))


def dw_supercharge(gamma: float, p_s: float, p_d: float, p_2: float,
                   V_2: float, N: float) -> float:
    """Extra compression power from starting the adiabatic process at the
    supercharged end-of-suction pressure p_2 instead of p_s [W]:

        N*( g/(g-1)*p_2*V_2*[(p_d/p_2)^((g-1)/g) - 1]
          - g/(g-1)*p_s*V_2*[(p_d/p_s)^((g-1)/g) - 1]
          + (p_2 - p_s)*V_2 )
    """
    if p_2 <= 0:
        raise ValueError("end-of-suction pressure must be positive")
    return (_isentropic_work_rate(gamma, p_2, p_d, V_2, N)
            - _isentropic_work_rate(gamma, p_s, p_d, V_2, N)
            + N * (p_2 - p_s) * V_2)


def dw_compression(W_real: float, dW_s: float, dW_d: float, gamma: float,
                   p_s: float, p_d: float, p_2: float, V_2: float, N: float,
                   ratio_variant: str = "p2") -> float:
    """Compression-process loss: the real diagram minus the suction and
    discharge losses and the supercharged adiabatic reference [W].

        dW_c = W_real - (dW_s + dW_d)
               - [N*p_2*V_2*(g/(g-1))*((p_d/p_x)^((g-1)/g) - 1)
                  + N*(p_2 - p_s)*V_2]

    ``ratio_variant`` selects the pressure ratio p_d/p_x of the bracketed
    adiabatic term: the default "p2" closes the five-term decomposition
    identity exactly (the bracket then cancels against dW_p and W_ideal);
    "ps" keeps the ratio at the reference suction pressure, which leaves a
    residual of N*p_2*V_2*(phi(p_d/p_2) - phi(p_d/p_s)) in the identity.
    May legitimately be negative (leaky or wall-cooled compression).
    """
    if ratio_variant == "p2":
        adiabatic = _isentropic_work_rate(gamma, p_2, p_d, V_2, N)
    elif ratio_variant == "ps":
        k = (gamma - 1.0) / gamma
        adiabatic = N * p_2 * V_2 * (gamma / (gamma - 1.0)) * ((p_d / p_s) ** k - 1.0)
    else:
        raise ValueError(f"unknown ratio_variant {ratio_variant!r}")
    return W_real - (dW_s + dW_d) - (adiabatic + N * (p_2 - p_s) * V_2)


def power_breakdown(trace: CycleTrace, geom: Geometry, gamma: float,
                    p_s: float, p_d: float, p_2: float, events: ValveEvents,
                    N: float, ratio_variant: str = "p2") -> PowerBreakdown:
    """Assemble the full power decomposition for one operating point."""
    V_2 = swept_volume(geom)
    W_id = w_ideal(gamma, p_s, p_d, V_2, N)
    W_re = w_real_indicated(trace, geom, N)
    d_s = dw_suction(trace, geom, p_s, N)
    d_d = dw_discharge(trace, geom, p_d, events, N)
    d_p = dw_supercharge(gamma, p_s, p_d, p_2, V_2, N)
    d_c = dw_compression(W_re, d_s, d_d, gamma, p_s, p_d, p_2, V_2, N,
                         ratio_variant=ratio_variant)
    return PowerBreakdown(W_ideal=W_id, W_real=W_re, dW_s=d_s, dW_d=d_d,
                          dW_c=d_c, dW_p=d_p, p_2=p_2)


def pv_diagram(trace: CycleTrace, geom: Geometry,
               events: ValveEvents | None = None):
    """Plot-ready P-V rows (V [m3], p [Pa], leg label).

    Legs: 'suction' pairs the suction pressure with the growing chamber,
    'compression' and 'discharge' pair the compression-chamber pressure
    with the shrinking complementary volume, split at the valve opening.
    """
    V_s = np.atleast_1d(chamber_volume(geom, trace.alpha))
    V_2 = swept_volume(geom)
    rows = [(float(v), float(p), "suction") for v, p in zip(V_s, trace.p_st)]
    a_open = events.alpha_open if events is not None else TWO_PI
    for a, v, p in zip(trace.alpha, V_2 - V_s, trace.p_dt):
        rows.append((float(v), float(p),
                     "discharge" if a >= a_open else "compression"))
    return rows
