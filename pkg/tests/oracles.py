"""Independent numerical oracles used by the test suite.

These deliberately avoid the library's own code paths: brute-force
quadrature, fine-grid marching, and a Peng-Robinson equation of state for
realistic refrigerant reference states.
"""

import math

import numpy as np
from scipy.optimize import brentq

R_UNIVERSAL = 8.314462618


class PengRobinsonR32:
    """Peng-Robinson vapor-phase oracle for difluoromethane (R32).

    Literature constants: Tc = 351.255 K, pc = 5.782 MPa, acentric factor
    0.2769, molar mass 0.052024 kg/mol; ideal-gas molar heat capacity taken
    constant at 42.5 J/(mol K) over the 260-370 K span of interest.
    """

    TC = 351.255
    PC = 5.782e6
    OMEGA = 0.2769
    M = 0.052024
    CP0 = 42.5

    def __init__(self):
        self.b = 0.07780 * R_UNIVERSAL * self.TC / self.PC
        self.ac = 0.45724 * (R_UNIVERSAL * self.TC) ** 2 / self.PC
        self.kappa = (0.37464 + 1.54226 * self.OMEGA
                      - 0.26992 * self.OMEGA**2)

    def _a(self, T):
        return self.ac * (1 + self.kappa * (1 - math.sqrt(T / self.TC))) ** 2

    def _dadT(self, T):
        sq = math.sqrt(T / self.TC)
        return self.ac * 2 * (1 + self.kappa * (1 - sq)) * (
            -self.kappa / (2 * math.sqrt(T * self.TC)))

    def z_vapor(self, T, p):
        A = self._a(T) * p / (R_UNIVERSAL * T) ** 2
        B = self.b * p / (R_UNIVERSAL * T)
        roots = np.roots([1.0, -(1 - B), A - 3 * B**2 - 2 * B,
                          -(A * B - B**2 - B**3)])
        return float(max(roots[np.abs(roots.imag) < 1e-9].real))

    def rho(self, T, p):
        return p * self.M / (self.z_vapor(T, p) * R_UNIVERSAL * T)

    def entropy_rel(self, T, p, T_ref, p_ref):
        """s(T, p) - s_ideal(T_ref, p_ref), molar."""
        Z = self.z_vapor(T, p)
        B = self.b * p / (R_UNIVERSAL * T)
        dep = (R_UNIVERSAL * math.log(Z - B)
               + self._dadT(T) / (2 * math.sqrt(2) * self.b)
               * math.log((Z + (1 + math.sqrt(2)) * B)
                          / (Z + (1 - math.sqrt(2)) * B)))
        s_ig = self.CP0 * math.log(T / T_ref) - R_UNIVERSAL * math.log(p / p_ref)
        return s_ig + dep

    def isentropic_state(self, T_from, p_from, p_to):
        """(T, rho) at p_to on the isentrope through (T_from, p_from)."""
        s0 = self.entropy_rel(T_from, p_from, T_from, p_from)
        T = brentq(lambda t: self.entropy_rel(t, p_to, T_from, p_from) - s0,
                   T_from, 3.0 * T_from, xtol=1e-10)
        return T, self.rho(T, p_to)


def trapezoid_chamber_volume(r1, r2, e, H, alpha, n=1_000_001):
    """Brute-force sweep-integral oracle (no vane correction)."""
    th = np.linspace(0.0, alpha, n)
    l = e * np.cos(th) + np.sqrt(r2**2 - (e * np.sin(th)) ** 2)
    return H * np.trapezoid(0.5 * (r1**2 - l**2), th)


def pipe_outlet_marching(T_in, T_wall, h_p, D, L, m_dot, cp, n=10_000):
    """Fine-grid discretised pipe: dT/dx = h_p*pi*D*(T_wall - T)/(m_dot*cp)."""
    dx = L / n
    C = m_dot * cp
    T = T_in
    for _ in range(n):
        T = T + h_p * math.pi * D * dx * (T_wall - T) / C
    return T
