"""Refrigerant property backends.

Two backends cover the needs of the analysis chain:

* ``ideal`` -- ideal gas with constant transport properties.  Density is
  p/(R*T), enthalpy is cp*T (zero at 0 K; only differences enter any
  balance), internal energy is cv*T with cv = cp - R.
* ``table`` -- bilinear interpolation on a rectangular (p, T) property
  grid loaded from CSV.  Exact on grid nodes, hard error outside the grid.

The cycle-average isentropic exponent is estimated once per run from the
suction/discharge reference states (:func:`gamma_isentropic`) and then held
constant on the model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .errors import ConfigError

R_UNIVERSAL = 8.314462618  # J/(mol K)

PROPERTY_TABLE_COLUMNS = ["p_Pa", "T_K", "rho_kgm3", "h_Jkg", "k_WmK", "mu_Pas", "cp_JkgK"]


@dataclass(frozen=True)
class GasState:
    """Thermodynamic state of the refrigerant at one point in the cycle.

    p [Pa], T [K], rho [kg/m3], h [J/kg].
    """

    p: float
    T: float
    rho: float
    h: float

    def __post_init__(self):
        if self.T <= 0.0:
            raise ValueError(f"non-physical temperature T={self.T} K")
        if self.p < 0.0 or self.rho < 0.0:
            raise ValueError("negative pressure or density")


class Transport(NamedTuple):
    k: float    # thermal conductivity [W/(m K)]
    Pr: float   # Prandtl number [-]
    cp: float   # specific heat at constant pressure [J/(kg K)]
    mu: float   # dynamic viscosity [Pa s]


def gamma_isentropic(p_s: float, v_s: float, p_d: float, v_d: float) -> float:
    """Isentropic-exponent estimate from two states on one isentrope.

    gamma = ln(p_d/p_s) / ln(v_s/v_d).  Note the volume ratio orientation:
    p*v^gamma = const gives ln(p_d/p_s) = gamma*ln(v_s/v_d), so the
    denominator must use v_s/v_d for a positive exponent on a compression
    path (v_d < v_s).

    Raises ValueError when p_d == p_s or v_d == v_s (exponent undefined).
    """
    if p_s <= 0 or p_d <= 0 or v_s <= 0 or v_d <= 0:
        raise ValueError("reference pressures and specific volumes must be positive")
    if p_d == p_s or v_d == v_s:
        raise ValueError("undefined exponent: degenerate reference states "
                         f"(p_d/p_s={p_d / p_s}, v_d/v_s={v_d / v_s})")
    return math.log(p_d / p_s) / math.log(v_s / v_d)


class PropertyTable:
    """Rectangular (p, T) property grid with bilinear interpolation.

    The CSV layout is row-major in p then T: all T rows of the first
    pressure, then the next pressure, and so on.  Both grid vectors must be
    strictly monotone increasing.  Queries outside the grid raise.
    """

    def __init__(self, p_grid, T_grid, fields: dict[str, np.ndarray]):
        self.p_grid = np.asarray(p_grid, dtype=float)
        self.T_grid = np.asarray(T_grid, dtype=float)
        if self.p_grid.ndim != 1 or self.T_grid.ndim != 1:
            raise ConfigError("property table grids must be 1-D")
        if np.any(np.diff(self.p_grid) <= 0) or np.any(np.diff(self.T_grid) <= 0):
            raise ConfigError("property table requires strictly increasing p and T grids")
        shape = (self.p_grid.size, self.T_grid.size)
        self.fields = {}
        for name, arr in fields.items():
            arr = np.asarray(arr, dtype=float)
            if arr.shape != shape:
                raise ConfigError(f"property table field {name!r} has shape {arr.shape}, "
                                  f"expected {shape}")
            self.fields[name] = arr

    @classmethod
    def from_csv(cls, path) -> "PropertyTable":
        with open(path, "r", encoding="utf-8") as fh:
            header = fh.readline().strip()
            cols = [c.strip() for c in header.split(",")]
            if cols != PROPERTY_TABLE_COLUMNS:
                raise ConfigError(f"property table header must be exactly "
                                  f"{','.join(PROPERTY_TABLE_COLUMNS)!r}, got {header!r}")
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
        if data.shape[1] != len(PROPERTY_TABLE_COLUMNS):
            raise ConfigError("property table rows must have 7 columns")
        p_col, T_col = data[:, 0], data[:, 1]
        p_grid = np.unique(p_col)
        T_grid = np.unique(T_col)
        if p_grid.size * T_grid.size != data.shape[0]:
            raise ConfigError("property table rows do not form a rectangular grid")
        # verify row-major ordering in p then T
        expect_p = np.repeat(p_grid, T_grid.size)
        expect_T = np.tile(T_grid, p_grid.size)
        if not (np.array_equal(p_col, expect_p) and np.array_equal(T_col, expect_T)):
            raise ConfigError("property table must be row-major in p then T")
        shape = (p_grid.size, T_grid.size)
        fields = {name: data[:, i + 2].reshape(shape)
                  for i, name in enumerate(PROPERTY_TABLE_COLUMNS[2:])}
        return cls(p_grid, T_grid, fields)

    def _locate(self, grid: np.ndarray, x: float, label: str) -> tuple[int, float]:
        if x < grid[0] or x > grid[-1]:
            raise ValueError(f"out of table: {label}={x} outside "
                             f"[{grid[0]}, {grid[-1]}]")
        i = int(np.searchsorted(grid, x, side="right")) - 1
        i = min(max(i, 0), grid.size - 2)
        t = (x - grid[i]) / (grid[i + 1] - grid[i])
        return i, t

    def interp(self, name: str, p: float, T: float) -> float:
        """Bilinear interpolation of one field; exact on grid nodes."""
        f = self.fields[name]
        i, tp = self._locate(self.p_grid, p, "p")
        j, tt = self._locate(self.T_grid, T, "T")
        return ((1 - tp) * (1 - tt) * f[i, j] + tp * (1 - tt) * f[i + 1, j]
                + (1 - tp) * tt * f[i, j + 1] + tp * tt * f[i + 1, j + 1])


@dataclass(frozen=True)
class GasModel:
    """Immutable property backend shared by a whole analysis run.

    ``gamma`` is the cycle-average isentropic exponent used by every
    isentropic map and loss formula.  For the ideal backend it defaults to
    cp/(cp - R) so that the control-volume solver and the isentropic maps
    agree thermodynamically; it may be overridden (e.g. with the reference
    state estimate) at construction.
    """

    backend: str
    R: float
    cp: float
    k: float
    mu: float
    Pr: float
    gamma: float
    table: PropertyTable | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.backend not in ("ideal", "table"):
            raise ConfigError(f"unknown gas backend {self.backend!r}")
        if self.gamma <= 1.0:
            raise ConfigError(f"isentropic exponent must exceed 1, got {self.gamma}")
        if self.Pr <= 0:
            raise ConfigError("Prandtl number must be positive")
        if self.backend == "ideal" and self.cp <= self.R:
            raise ConfigError("ideal backend requires cp > R")
        if self.backend == "table" and self.table is None:
            raise ConfigError("table backend requires a property table")

    @classmethod
    def ideal(cls, R: float, cp: float | None = None, *, gamma: float | None = None,
              k: float = 0.0125, mu: float = 1.2e-5, Pr: float | None = None) -> "GasModel":
        """Ideal-gas backend.  Give cp or gamma (the other is derived)."""
        if cp is None and gamma is None:
            raise ConfigError("ideal backend needs cp or gamma")
        if cp is None:
            cp = gamma * R / (gamma - 1.0)
        if gamma is None:
            gamma = cp / (cp - R)
        if Pr is None:
            Pr = cp * mu / k
        return cls("ideal", R=R, cp=cp, k=k, mu=mu, Pr=Pr, gamma=gamma)

    @classmethod
    def from_table(cls, table: PropertyTable, R: float, *, gamma: float,
                   k: float = 0.0, mu: float = 0.0, Pr: float = 1.0,
                   cp: float = 0.0) -> "GasModel":
        """Table backend.  R is retained for the leakage flux formulas;
        fall-back transport constants are only used if the table lacks a
        field (it never does for CSV-loaded tables)."""
        if cp <= 0.0:
            cp = float(np.mean(table.fields["cp_JkgK"]))
        if k <= 0.0:
            k = float(np.mean(table.fields["k_WmK"]))
        if mu <= 0.0:
            mu = float(np.mean(table.fields["mu_Pas"]))
        if Pr <= 0.0 or Pr == 1.0:
            Pr = cp * mu / k
        return cls("table", R=R, cp=cp, k=k, mu=mu, Pr=Pr, gamma=gamma, table=table)

    def with_gamma(self, gamma: float) -> "GasModel":
        return replace(self, gamma=gamma)

    @property
    def cv(self) -> float:
        return self.cp - self.R

    # -- state evaluation ---------------------------------------------------

    def density(self, p, T):
        """Density [kg/m3] at (p [Pa], T [K]).

        Ideal backend: p/(R*T), exact.  Table backend: bilinear interpolation,
        exact on grid nodes, error outside the grid.
        """
        if np.any(np.asarray(T) <= 0.0):
            raise ValueError(f"non-physical temperature T={T}")
        if np.any(np.asarray(p) < 0.0):
            raise ValueError(f"negative pressure p={p}")
        if self.backend == "ideal":
            return p / (self.R * T)
        return self.table.interp("rho_kgm3", float(p), float(T))

    def enthalpy(self, p, T):
        """Specific enthalpy [J/kg]; cp*T for the ideal backend."""
        if self.backend == "ideal":
            return self.cp * T
        return self.table.interp("h_Jkg", float(p), float(T))

    def internal_energy(self, p, T):
        """Specific internal energy u = h - p/rho [J/kg]."""
        if self.backend == "ideal":
            return self.cv * T
        rho = self.density(p, T)
        return self.enthalpy(p, T) - p / rho

    def temperature_from_internal_energy(self, p: float, u: float) -> float:
        """Invert u(p, T) at fixed pressure.  Monotone in T for any sane gas."""
        if self.backend == "ideal":
            return u / self.cv
        grid = self.table.T_grid
        u_grid = np.array([self.internal_energy(p, Tg) for Tg in grid])
        if u < u_grid[0] or u > u_grid[-1]:
            raise ValueError(f"out of table: internal energy {u} outside grid span")
        return float(np.interp(u, u_grid, grid))

    def transport(self, p: float | None = None, T: float | None = None) -> Transport:
        """Transport bundle {k, Pr, cp, mu} at a state.

        Ideal backend returns the configured constants unchanged; the table
        backend interpolates (Pr recomputed from the interpolated values).
        """
        if self.backend == "ideal":
            return Transport(self.k, self.Pr, self.cp, self.mu)
        if p is None or T is None:
            raise ValueError("table backend transport needs (p, T)")
        k = self.table.interp("k_WmK", p, T)
        mu = self.table.interp("mu_Pas", p, T)
        cp = self.table.interp("cp_JkgK", p, T)
        return Transport(k, cp * mu / k, cp, mu)

    def state(self, p: float, T: float) -> GasState:
        return GasState(p=p, T=T, rho=self.density(p, T), h=self.enthalpy(p, T))

    def isentropic_temperature(self, T_from: float, p_from: float, p_to: float) -> float:
        """Map a temperature along the model isentrope: T*(p_to/p_from)^((g-1)/g)."""
        return T_from * (p_to / p_from) ** ((self.gamma - 1.0) / self.gamma)
