import json

import pytest

from ent_tcu.cost import (
    CostTable,
    TableError,
    count_structure,
    default_cost_table,
    estimate,
    up_ratio_sweep,
)
from ent_tcu.encoding import encoded_width
from ent_tcu.simulator import KINDS, ArchConfig, ConfigError, Kind, Mode, build, scale_config


@pytest.fixture
def table():
    return default_cost_table()


class TestTable:
    def test_encoder_entry(self, table):
        row = table.encoders["MBE"]["8"]
        assert (row["Area"], row["Delay"], row["Power"]) == (28.22, 0.23, 24.06)

    def test_rme_multiplier(self, table):
        assert table.multipliers["RME_Ours"] == {"Area": 264.4, "Delay": 1.63, "Power": 188.9}

    def test_register_bit_power(self, table):
        assert table.register["bit_power_uw"] == pytest.approx(3.7825, abs=1e-12)

    def test_number_and_width_columns(self, table):
        for scheme, rows in table.encoders.items():
            for width, row in rows.items():
                assert (row["Number"], row["En-Width"]) == encoded_width(int(width), scheme.lower())

    def test_json_roundtrip(self, table, tmp_path):
        path = tmp_path / "table.json"
        table.dump(path)
        assert CostTable.load(path) == table
        assert json.loads(path.read_text())["multipliers"]["DW IP"]["Power"] == 211.4

    def test_unknown_section(self):
        with pytest.raises(TableError):
            CostTable.from_json('{"bogus": {}}')

    def test_missing_coefficient(self, table):
        del table.multipliers["RME_Ours"]
        with pytest.raises(TableError):
            estimate(ArchConfig(Kind.MATRIX_2D, 16, Mode.ENT_OURS), table)

    def test_negative_coefficient(self, table):
        table.wire["bit_power_uw"] = -1.0
        with pytest.raises(TableError):
            estimate(ArchConfig(Kind.MATRIX_2D, 16), table)


class TestStructure:
    def test_matrix_savings(self):
        counts = count_structure(ArchConfig(Kind.MATRIX_2D, 32, Mode.ENT_OURS))
        assert counts.boundary_encoders == 32
        assert counts.encoders_saved == 992

    def test_two_cubes(self):
        counts = count_structure(ArchConfig(Kind.CUBE_3D, 8, Mode.ENT_OURS, arrays=2))
        assert counts.boundary_encoders == 128
        assert counts.encoders_saved == 896

    def test_baseline(self):
        counts = count_structure(ArchConfig(Kind.SYSTOLIC_WS, 16))
        assert counts.boundary_encoders == 0
        assert counts.internal_encoders == 256

    @pytest.mark.parametrize("kind", KINDS)
    @pytest.mark.parametrize("mode", list(Mode))
    def test_agrees_with_simulator(self, kind, mode):
        cfg = ArchConfig(kind, 8, mode)
        counts = count_structure(cfg)
        _, stats = build(cfg).run_gemm([[1]], [[1]])
        assert counts.multipliers == stats.multipliers
        assert counts.boundary_encoders == stats.boundary_encoders
        assert counts.operand_register_bits == stats.operand_register_bits

    def test_scale_law(self):
        saved = [count_structure(ArchConfig(Kind.MATRIX_2D, s, Mode.ENT_OURS)).encoders_saved for s in (16, 32, 64)]
        assert saved == [s * s - s for s in (16, 32, 64)]
        cubes = [count_structure(ArchConfig(Kind.CUBE_3D, s, Mode.ENT_OURS)) for s in (4, 8, 16)]
        assert [c.encoders_saved for c in cubes] == [s**3 - s**2 for s in (4, 8, 16)]
        assert [c.boundary_encoders for c in cubes] == [s**2 for s in (4, 8, 16)]

    def test_ws_register_penalty(self):
        s = 16
        mbe = count_structure(ArchConfig(Kind.SYSTOLIC_WS, s, Mode.ENT_MBE))
        ours = count_structure(ArchConfig(Kind.SYSTOLIC_WS, s, Mode.ENT_OURS))
        assert mbe.operand_register_bits - ours.operand_register_bits == 3 * s * s
        assert ours.bus_width_per_lane < mbe.bus_width_per_lane


class TestEstimate:
    @pytest.mark.parametrize("kind", KINDS)
    def test_gops_at_16(self, kind, table):
        assert estimate(scale_config(kind, 16), table).gops == 256

    def test_ent_lowers_power(self, table):
        for s in (16, 32, 64):
            base = estimate(ArchConfig(Kind.MATRIX_2D, s), table)
            ours = estimate(ArchConfig(Kind.MATRIX_2D, s, Mode.ENT_OURS), table)
            assert ours.power_w < base.power_w

    @pytest.mark.parametrize("kind", KINDS)
    def test_monotone_savings_all_kinds(self, kind, table):
        for s in (16, 32, 64):
            base = estimate(scale_config(kind, s), table)
            ours = estimate(scale_config(kind, s, Mode.ENT_OURS), table)
            assert ours.power_w < base.power_w

    def test_size_guard(self):
        with pytest.raises(ConfigError):
            ArchConfig(Kind.MATRIX_2D, 2)

    def test_efficiency_definitions(self, table):
        rep = estimate(ArchConfig(Kind.SYSTOLIC_OS, 32, Mode.ENT_OURS), table)
        assert rep.area_eff == pytest.approx(rep.gops / rep.area_mm2)
        assert rep.energy_eff == pytest.approx(rep.gops / rep.power_w)
        assert rep.provenance == "modeled"

    def test_mbe_unit_strips_encoder(self, table):
        # one multiplier, no registers/wires/accumulator cost: pure unit price
        for section in ("register", "wire", "accumulator"):
            table.__dict__[section] = {"bit_power_uw": 0.0, "bit_area_um2": 0.0}
        rep = estimate(ArchConfig(Kind.MATRIX_2D, 4, Mode.ENT_MBE), table)
        unit = (212.2 - 24.06) * 16 + 24.06 * 4
        assert rep.power_w * 1e6 == pytest.approx(unit)


class TestSweep:
    def test_baseline_zero(self, table):
        result = up_ratio_sweep(KINDS, [16], table, modes=[Mode.BASELINE])
        assert all(r.up_ratio_area == 0 and r.up_ratio_energy == 0 for r in result.reports)

    def test_energy_trend(self, table):
        result = up_ratio_sweep(KINDS, [16, 32], table, modes=[Mode.ENT_OURS])
        e16 = result.averages[(16, "ent-ours")][1]
        e32 = result.averages[(32, "ent-ours")][1]
        assert 0 < e16 < e32

    def test_empty(self, table):
        with pytest.raises(ValueError):
            up_ratio_sweep([], [16], table)
