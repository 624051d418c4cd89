"""Rolling-piston kinematics.

Chamber volume, heating areas, vane extension and hydraulic diameter as
functions of shaft angle alpha in [0, 2*pi].  Zero shaft angle is the
roller/cylinder tangency at the vane line; the suction chamber grows from
V(0) = 0 to the full swept volume V(2*pi) = pi*H*(r1^2 - r2^2).

The chamber cross-section is integrated exactly (no small-eccentricity
approximation) with fixed-order Gauss-Legendre quadrature; the integrand
is analytic so 64 nodes resolve it to machine precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

TWO_PI = 2.0 * math.pi

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(64)


@dataclass(frozen=True)
class Geometry:
    """Cylinder/roller/vane/clearance dimensions.  All lengths in metres,
    angles in radians, volumes in m^3."""

    r1: float            # cylinder inner radius
    r2: float            # roller outer radius
    e: float             # eccentricity; tangency demands e = r1 - r2
    H: float             # roller / cylinder height
    b_v: float           # vane thickness
    V_clearance: float   # clearance (dead) volume
    delta_rc: float      # radial roller-cylinder sealing clearance
    delta_vc: float      # vane-edge axial clearance
    d_port: float        # discharge port diameter
    alpha_s: float       # suction port angle
    alpha_d: float       # discharge cutoff angle

    def __post_init__(self):
        if not (self.r1 > self.r2 > 0.0):
            raise ConfigError(f"need r1 > r2 > 0, got r1={self.r1}, r2={self.r2}")
        if abs(self.e - (self.r1 - self.r2)) > 1e-9:
            raise ConfigError(f"tangency violated: e={self.e} but r1-r2={self.r1 - self.r2}")
        if self.H <= 0.0:
            raise ConfigError("roller height H must be positive")
        if self.V_clearance < 0.0:
            raise ConfigError("clearance volume must be non-negative")
        if self.delta_rc < 0.0 or self.delta_vc < 0.0:
            raise ConfigError("sealing clearances must be non-negative")
        if not (0.0 <= self.alpha_s < self.alpha_d < TWO_PI):
            raise ConfigError("need 0 <= alpha_s < alpha_d < 2*pi "
                              f"(got {self.alpha_s}, {self.alpha_d})")

    @property
    def r_ave(self) -> float:
        return 0.5 * (self.r1 + self.r2)


def _check_alpha(alpha):
    a = np.asarray(alpha, dtype=float)
    if np.any(a < -1e-12) or np.any(a > TWO_PI + 1e-12):
        raise ValueError(f"shaft angle outside [0, 2*pi]: {alpha}")
    return np.clip(a, 0.0, TWO_PI)


def roller_radius_line(geom: Geometry, theta):
    """Distance from the cylinder centre to the roller surface along
    direction theta: l = e*cos(theta) + sqrt(r2^2 - e^2 sin^2 theta)."""
    th = np.asarray(theta, dtype=float)
    return geom.e * np.cos(th) + np.sqrt(geom.r2**2 - (geom.e * np.sin(th)) ** 2)


def vane_extension(geom: Geometry, alpha):
    """Vane protrusion past the cylinder bore, H_v = r1 - l(alpha) [m].

    Zero at tangency (alpha=0), maximum 2e at alpha=pi.
    """
    a = _check_alpha(alpha)
    return geom.r1 - roller_radius_line(geom, a)


def _integral_volume(geom: Geometry, alpha):
    """H * integral_0^alpha 0.5*(r1^2 - l(theta)^2) dtheta, vectorised."""
    a = np.atleast_1d(np.asarray(alpha, dtype=float))
    # map GL nodes from [-1, 1] onto [0, alpha] per query angle
    theta = 0.5 * a[:, None] * (_GL_NODES[None, :] + 1.0)
    l_theta = roller_radius_line(geom, theta)
    integrand = 0.5 * (geom.r1**2 - l_theta**2)
    vals = geom.H * 0.5 * a * (integrand @ _GL_WEIGHTS)
    return vals


def chamber_volume(geom: Geometry, alpha):
    """Suction-chamber volume V(alpha) [m^3].

    Exact annular-sweep integral minus the vane-occupied volume, with half
    the vane attributed to each chamber.  The vane term is capped at half
    the swept integral: the nominal b_v*H_v*H/2 correction exceeds the gas
    volume actually swept in the first few degrees after tangency, which
    would make V negative and non-monotone there.  The cap only acts below
    ~3*b_v/r1 rad and preserves V(0)=0, strict monotonicity and all values
    away from tangency.
    """
    a = _check_alpha(alpha)
    scalar = np.isscalar(alpha) or np.asarray(alpha).ndim == 0
    v_int = _integral_volume(geom, a)
    vane = 0.5 * geom.b_v * geom.H * np.atleast_1d(vane_extension(geom, a))
    v = v_int - np.minimum(vane, 0.5 * v_int)
    return float(v[0]) if scalar else v


def swept_volume(geom: Geometry) -> float:
    """Full swept volume V_2 = V(2*pi) = pi*H*(r1^2 - r2^2); the vane term
    vanishes there because H_v(2*pi) = 0."""
    return float(chamber_volume(geom, TWO_PI))


def compression_volume(geom: Geometry, alpha):
    """Compression-chamber volume, complementary to the suction chamber:
    V_c(alpha) = V(2*pi) - V(alpha)."""
    return swept_volume(geom) - chamber_volume(geom, alpha)


def heating_areas(geom: Geometry, alpha):
    """Heating areas wetted by the suction-chamber gas [m^2].

    A_o: cylinder inner wall; A_p: roller outer wall; A_h: the two head
    walls (2*V/H); A_v: the two vane flanks; A_c: total.
    """
    a = _check_alpha(alpha)
    A_o = geom.H * geom.r1 * a
    A_p = geom.H * geom.r2 * a
    A_h = 2.0 * chamber_volume(geom, a) / geom.H
    A_v = 2.0 * vane_extension(geom, a) * geom.H
    return {"A_o": A_o, "A_p": A_p, "A_h": A_h, "A_v": A_v,
            "A_c": A_o + A_p + A_h + A_v}


def hydraulic_diameter(geom: Geometry, alpha):
    """Hydraulic diameter D_h = 4*V(alpha)/A_c(alpha) [m].

    Both V and A_c vanish at tangency; the limit is 0 and is returned
    without a division error.
    """
    a = _check_alpha(alpha)
    scalar = np.isscalar(alpha) or np.asarray(alpha).ndim == 0
    a_arr = np.atleast_1d(a)
    areas = heating_areas(geom, a_arr)
    V = np.atleast_1d(chamber_volume(geom, a_arr))
    A_c = np.atleast_1d(areas["A_c"])
    out = np.zeros_like(a_arr)
    nz = A_c > 0.0
    out[nz] = 4.0 * V[nz] / A_c[nz]
    return float(out[0]) if scalar else out
