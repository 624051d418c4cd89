import math

import numpy as np
import pytest

from losslab import ConfigError, GasModel, GasState, PropertyTable, gamma_isentropic

from conftest import PS, PD, TS, R_R32
from oracles import PengRobinsonR32

# Frozen from the Peng-Robinson oracle at the reference states:
# suction (0.5 MPa, 267.15 K), discharge on the isentrope at 2.1 MPa.
PR_V_S = 0.07870125
PR_V_D = 0.02417787
PR_GAMMA = 1.215945


class TestGammaIsentropic:
    def test_r32_reference_states(self):
        pr = PengRobinsonR32()
        rho_s = pr.rho(TS, PS)
        T_d, rho_d = pr.isentropic_state(TS, PS, PD)
        v_s, v_d = 1.0 / rho_s, 1.0 / rho_d
        assert v_s == pytest.approx(PR_V_S, rel=1e-6)
        assert v_d == pytest.approx(PR_V_D, rel=1e-6)
        gamma = gamma_isentropic(PS, v_s, PD, v_d)
        assert gamma == pytest.approx(PR_GAMMA, rel=1e-6)
        # discharge lands superheated, not liquid: sanity of the oracle
        assert 350.0 < T_d < 380.0

    def test_constructed_isentrope_exact(self):
        v_s = 0.08
        v_d = v_s * (PS / PD) ** (1.0 / 1.25)
        assert gamma_isentropic(PS, v_s, PD, v_d) == pytest.approx(1.25, abs=1e-14)

    def test_degenerate_pressures_raise(self):
        with pytest.raises(ValueError, match="undefined exponent"):
            gamma_isentropic(PS, 0.08, PS, 0.02)

    def test_degenerate_volumes_raise(self):
        with pytest.raises(ValueError, match="undefined exponent"):
            gamma_isentropic(PS, 0.08, PD, 0.08)

    def test_scale_invariance(self):
        rng = np.random.default_rng(7)
        v_s = 0.08
        v_d = v_s * (PS / PD) ** (1.0 / 1.31)
        base = gamma_isentropic(PS, v_s, PD, v_d)
        for _ in range(50):
            c = 10.0 ** rng.uniform(-3, 3)
            cv = 10.0 ** rng.uniform(-3, 3)
            assert gamma_isentropic(c * PS, cv * v_s, c * PD, cv * v_d) == \
                pytest.approx(base, rel=1e-12)


class TestIdealDensity:
    def test_reference_suction_density(self, model):
        # R = 8.314462618/0.052024 -> rho = p/(R T), hand-checked
        assert model.density(PS, TS) == pytest.approx(11.710741, abs=1e-5)

    def test_zero_pressure(self, model):
        assert model.density(0.0, TS) == 0.0

    def test_nonpositive_temperature_raises(self, model):
        with pytest.raises(ValueError):
            model.density(PS, 0.0)
        with pytest.raises(ValueError):
            model.density(PS, -5.0)

    def test_equation_of_state_identity(self, model):
        rng = np.random.default_rng(21)
        for _ in range(1000):
            p = 10.0 ** rng.uniform(3, 7)
            T = rng.uniform(150.0, 500.0)
            rho = model.density(p, T)
            assert rho * model.R * T == pytest.approx(p, rel=1e-14)

    def test_enthalpy_and_internal_energy(self, model):
        T = 300.0
        assert model.enthalpy(PS, T) == pytest.approx(model.cp * T)
        u = model.internal_energy(PS, T)
        assert u == pytest.approx(model.cv * T)
        assert model.temperature_from_internal_energy(PS, u) == pytest.approx(T)


class TestGasModelConstruction:
    def test_gamma_cp_consistency(self):
        m = GasModel.ideal(R=100.0, gamma=1.4)
        assert m.cp == pytest.approx(1.4 * 100.0 / 0.4)
        m2 = GasModel.ideal(R=100.0, cp=350.0)
        assert m2.gamma == pytest.approx(350.0 / 250.0)

    def test_invalid_gamma_rejected(self):
        with pytest.raises(ConfigError):
            GasModel.ideal(R=100.0, gamma=0.9)

    def test_cp_below_R_rejected(self):
        with pytest.raises(ConfigError):
            GasModel.ideal(R=100.0, cp=80.0)

    def test_transport_constants_pass_through(self, model):
        tr = model.transport()
        assert (tr.k, tr.mu, tr.cp) == (model.k, model.mu, model.cp)
        assert tr.Pr == model.Pr

    def test_gas_state_invariants(self):
        with pytest.raises(ValueError):
            GasState(p=PS, T=-1.0, rho=10.0, h=1e5)


def _make_table(tmp_path, rho_fn=None):
    """Small rectangular grid written in the CSV schema."""
    p_grid = np.array([2e5, 4e5, 6e5, 8e5])
    T_grid = np.array([250.0, 280.0, 310.0, 340.0, 370.0])
    rho_fn = rho_fn or (lambda p, T: p / (R_R32 * T) * (1.0 + 2e-8 * p / T))
    lines = ["p_Pa,T_K,rho_kgm3,h_Jkg,k_WmK,mu_Pas,cp_JkgK"]
    for p in p_grid:
        for T in T_grid:
            rho = rho_fn(p, T)
            h = 800.0 * T + 1e-3 * p
            k = 0.010 + 3e-5 * (T - 250.0)
            mu = 1.0e-5 + 1e-8 * (T - 250.0)
            cp = 800.0 + 0.2 * (T - 250.0)
            lines.append(f"{p},{T},{rho},{h},{k},{mu},{cp}")
    path = tmp_path / "props.csv"
    path.write_text("\n".join(lines) + "\n")
    return path, p_grid, T_grid, rho_fn


class TestPropertyTable:
    def test_node_identity(self, tmp_path):
        path, p_grid, T_grid, rho_fn = _make_table(tmp_path)
        table = PropertyTable.from_csv(path)
        for p in p_grid:
            for T in T_grid:
                assert table.interp("rho_kgm3", p, T) == \
                    pytest.approx(rho_fn(p, T), rel=1e-14)

    def test_midcell_bracketed(self, tmp_path):
        path, p_grid, T_grid, _ = _make_table(tmp_path)
        table = PropertyTable.from_csv(path)
        rng = np.random.default_rng(3)
        for _ in range(200):
            i = rng.integers(0, p_grid.size - 1)
            j = rng.integers(0, T_grid.size - 1)
            p = rng.uniform(p_grid[i], p_grid[i + 1])
            T = rng.uniform(T_grid[j], T_grid[j + 1])
            corners = [table.interp("rho_kgm3", p_grid[a], T_grid[b])
                       for a in (i, i + 1) for b in (j, j + 1)]
            v = table.interp("rho_kgm3", p, T)
            assert min(corners) - 1e-12 <= v <= max(corners) + 1e-12

    def test_monotone_within_cell(self, tmp_path):
        path, p_grid, T_grid, _ = _make_table(tmp_path)
        table = PropertyTable.from_csv(path)
        # density rises with p at fixed T: bilinear preserves that inside a cell
        T = 295.0
        ps = np.linspace(p_grid[1], p_grid[2], 40)
        vals = [table.interp("rho_kgm3", p, T) for p in ps]
        assert all(b > a for a, b in zip(vals, vals[1:]))

    def test_out_of_table_raises(self, tmp_path):
        path, *_ = _make_table(tmp_path)
        table = PropertyTable.from_csv(path)
        with pytest.raises(ValueError, match="out of table"):
            table.interp("rho_kgm3", 1e5, 300.0)
        with pytest.raises(ValueError, match="out of table"):
            table.interp("rho_kgm3", 5e5, 400.0)

    def test_bad_header_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("pressure,T_K,rho\n1,2,3\n")
        with pytest.raises(ConfigError, match="header"):
            PropertyTable.from_csv(path)

    def test_ragged_grid_rejected(self, tmp_path):
        path, *_ = _make_table(tmp_path)
        lines = path.read_text().strip().splitlines()
        path.write_text("\n".join(lines[:-1]) + "\n")  # drop one row
        with pytest.raises(ConfigError, match="rectangular"):
            PropertyTable.from_csv(path)

    def test_table_backend_model(self, tmp_path):
        path, _, _, rho_fn = _make_table(tmp_path)
        m = GasModel.from_table(PropertyTable.from_csv(path), R=R_R32, gamma=1.25)
        assert m.density(4e5, 280.0) == pytest.approx(rho_fn(4e5, 280.0), rel=1e-14)
        tr = m.transport(4e5, 280.0)
        assert tr.k == pytest.approx(0.010 + 3e-5 * 30.0, rel=1e-12)
        u = m.internal_energy(4e5, 280.0)
        assert m.temperature_from_internal_energy(4e5, u) == \
            pytest.approx(280.0, rel=1e-9)
