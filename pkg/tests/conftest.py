import math

import numpy as np
import pytest

from losslab import CycleTrace, GasModel, Geometry, RunMeta, vane_extension

PS = 0.5e6
PD = 2.1e6
TS = 267.15
R_R32 = 8.314462618 / 0.052024  # from the molar mass of difluoromethane


@pytest.fixture(scope="session")
def geom():
    return Geometry(r1=0.024, r2=0.020, e=0.004, H=0.018086, b_v=0.0032,
                    V_clearance=1.2e-7, delta_rc=0.0, delta_vc=0.0,
                    d_port=0.008, alpha_s=math.radians(25.0),
                    alpha_d=math.radians(30.0))


@pytest.fixture(scope="session")
def model():
    return GasModel.ideal(R=R_R32, gamma=1.25, k=0.0125, mu=1.2e-5)


@pytest.fixture
def meta():
    return RunMeta(N_rps=120.0, T_s=TS, T_0=TS, T_os=320.0)


def flat_trace(geom, n=3600, p_st=PS, p_dt=PD, N_rps=120.0, y_p=None,
               meta_kw=None):
    """Uniform-grid trace with constant pressures and kinematic vane."""
    alpha = np.arange(n) * (2.0 * math.pi / n)
    x_vane = np.atleast_1d(vane_extension(geom, alpha))
    y = np.zeros(n) if y_p is None else y_p
    kw = {"N_rps": N_rps, "T_s": TS, "T_0": TS, "T_os": 320.0}
    kw.update(meta_kw or {})
    return CycleTrace(alpha=alpha, p_st=np.full(n, float(p_st)),
                      p_dt=np.full(n, float(p_dt)), x_vane=x_vane, y_p=y,
                      meta=RunMeta(**kw))
