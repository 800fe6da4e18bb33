import csv
import io
import json

import pytest

from ent_tcu.cli import EXIT_INVALID, EXIT_IO, EXIT_MISMATCH, EXIT_OK, main
from ent_tcu.cost import default_cost_table


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


class TestEncode:
    def test_78(self, capsys):
        code, out, _ = run(capsys, "encode", "78", "--width", "8", "--scheme", "ours")
        assert code == EXIT_OK
        assert "{0,1,1,-1,2}" in out
        assert "width: 9" in out
        assert out.rstrip().splitlines()[2].endswith("= 78")

    def test_zero(self, capsys):
        code, out, _ = run(capsys, "encode", "0", "--width", "8")
        assert code == EXIT_OK and "{0,0,0,0,0}" in out

    def test_unsigned_carry(self, capsys):
        code, out, _ = run(capsys, "encode", "255", "--width", "8", "--unsigned")
        assert code == EXIT_OK and "carry_out: 1" in out

    def test_mbe(self, capsys):
        code, out, _ = run(capsys, "encode", "6", "--scheme", "mbe")
        assert code == EXIT_OK and "{0,0,2,-2}" in out and "width: 12" in out

    def test_out_of_range(self, capsys):
        code, _, err = run(capsys, "encode", "128")
        assert code == EXIT_INVALID and "error" in err


class TestVerify:
    def test_exhaustive_int8(self, capsys):
        code, out, _ = run(capsys, "verify", "--width", "8", "--exhaustive")
        assert code == EXIT_OK
        assert "65536 products checked, 0 mismatches" in out

    def test_sampled_deterministic(self, capsys):
        first = run(capsys, "verify", "--width", "16", "--sampled", "500", "--seed", "7")
        second = run(capsys, "verify", "--width", "16", "--sampled", "500", "--seed", "7")
        assert first == second and first[0] == EXIT_OK

    def test_odd_width(self, capsys):
        code, _, err = run(capsys, "verify", "--width", "9")
        assert code == EXIT_INVALID and err

    def test_mismatch_exit(self, capsys, monkeypatch):
        import ent_tcu.cli as cli
        from ent_tcu.multiplier import MultiplyTrace

        monkeypatch.setattr(cli, "ent_multiply", lambda a, b, n: MultiplyTrace((), a * b + 1))
        code, out, _ = run(capsys, "verify", "--width", "4", "--exhaustive")
        assert code == EXIT_MISMATCH and "256 mismatches" in out


class TestSim:
    def test_os_cycles(self, capsys):
        code, out, _ = run(capsys, "sim", "--kind", "systolic-os", "--size", "16", "--gemm", "16x16x16",
                           "--mode", "ent-ours")
        (row,) = rows(out)
        assert code == EXIT_OK
        assert row["cycles"] == row["closed_form_cycles"] == "46"
        assert row["correct"] == "1"

    def test_all_configs(self, capsys):
        code, out, _ = run(capsys, "sim", "--size", "8", "--gemm", "9x10x11")
        assert code == EXIT_OK
        table = rows(out)
        assert len(table) == 15 and all(r["correct"] == "1" for r in table)

    def test_bad_gemm(self, capsys):
        assert run(capsys, "sim", "--gemm", "16x16")[0] == EXIT_INVALID

    def test_bad_kind(self, capsys):
        assert run(capsys, "sim", "--kind", "hexagon")[0] == EXIT_INVALID

    def test_unknown_flag(self):
        with pytest.raises(SystemExit) as info:
            main(["sim", "--bogus"])
        assert info.value.code == 2


class TestReports:
    def test_cost_rows(self, capsys):
        code, out, _ = run(capsys, "cost", "--sizes", "16,32,64", "--modes", "baseline,ent-ours")
        table = rows(out)
        assert code == EXIT_OK and len(table) == 30
        for col in ("gops", "area_mm2", "power_w", "area_eff", "energy_eff", "up_ratio_area", "up_ratio_energy"):
            assert col in table[0]

    def test_cost_deterministic(self, capsys):
        assert run(capsys, "cost") == run(capsys, "cost")

    def test_sweep(self, capsys):
        code, out, _ = run(capsys, "sweep", "--sizes", "16,32", "--modes", "ent-ours")
        table = rows(out)
        assert code == EXIT_OK
        assert [r["scale"] for r in table] == ["16", "32"]
        assert float(table[0]["mean_up_ratio_energy"]) < float(table[1]["mean_up_ratio_energy"])

    def test_soc(self, capsys):
        code, out, _ = run(capsys, "soc", "--network", "resnet34.json", "--mode", "ent-ours", "--kinds", "matrix-2d")
        (row,) = rows(out)
        assert code == EXIT_OK
        assert float(row["reduction_ratio"]) > 0
        assert "tcu_j" in row and "global_buffer_read_j" in row

    def test_cost_table_override(self, capsys, tmp_path):
        table = default_cost_table()
        table.multipliers["DW IP"]["Power"] *= 2
        path = tmp_path / "t.json"
        table.dump(path)
        base = rows(run(capsys, "cost", "--sizes", "16", "--modes", "baseline")[1])
        doubled = rows(run(capsys, "cost", "--sizes", "16", "--modes", "baseline", "--cost-table", str(path))[1])
        assert all(float(d["power_w"]) > float(b["power_w"]) for b, d in zip(base, doubled))

    def test_bad_cost_table(self, capsys, tmp_path):
        path = tmp_path / "t.json"
        path.write_text(json.dumps({"nonsense": 1}))
        assert run(capsys, "cost", "--cost-table", str(path))[0] == EXIT_INVALID

    def test_out_dir_env(self, capsys, tmp_path, monkeypatch):
        monkeypatch.setenv("ENT_TCU_OUT_DIR", str(tmp_path))
        code, out, _ = run(capsys, "cost", "--sizes", "16", "--out", "report.csv")
        assert code == EXIT_OK and out == ""
        assert len(rows((tmp_path / "report.csv").read_text())) == 15

    def test_unwritable(self, capsys, tmp_path):
        code, _, err = run(capsys, "cost", "--sizes", "16", "--out", str(tmp_path / "missing" / "x.csv"))
        assert code == EXIT_IO and err

    def test_missing_network(self, capsys, tmp_path):
        assert run(capsys, "soc", "--network", str(tmp_path / "none.json"))[0] == EXIT_IO
