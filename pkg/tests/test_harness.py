import csv
import io
import json

import pytest

from bimix.harness import build_parser, read_config, run, simplex_points


def call(capsys, *argv):
    code = run(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_partition_check_command(capsys):
    code, out, _ = call(capsys, "graphs", "partition-check", "--n", "4")
    data = json.loads(out)
    assert code == 0
    assert data["schema"] == 1
    assert data["sum_2_pow_eprime"] == 38


def test_graph_counts(capsys):
    code, out, _ = call(capsys, "graphs", "count", "--n", "5")
    assert json.loads(out)["count"] == 728
    code, out, _ = call(capsys, "graphs", "count", "--class", "star-connected", "--m", "2", "--r", "1")
    assert json.loads(out)["count"] == 2


def test_sweep_csv(capsys, tmp_path):
    target = tmp_path / "sweep.csv"
    code, _, _ = call(capsys, "convergence", "sweep", "--zr", "0:0.1:11", "--criteria", "easy,kp",
                      "--out", str(target))
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(target.read_text())))
    assert len(rows) == 11
    assert list(rows[0]) == ["zr", "R", "r", "zhat_easy", "zR_easy", "zR_kp", "ratio"]
    assert all(float(r["ratio"]) >= 1.0 for r in rows)


def test_unknown_subcommand_exit_1(capsys):
    code, _, err = call(capsys, "bogus")
    assert code == 1
    assert "usage" in err


def test_unknown_flag_exit_1(capsys):
    code, _, err = call(capsys, "pressure", "--nope")
    assert code == 1


def test_zhat_command(capsys):
    code, out, _ = call(capsys, "effective", "zhat", "--zr", "0.1", "--zR", "1")
    assert code == 0
    assert json.loads(out)["value"] == pytest.approx(0.5726228, abs=1e-7)


def test_w_command(capsys):
    code, out, _ = call(capsys, "effective", "w", "--k", "2", "--dist", "2.0", "--zr", "0.1")
    assert json.loads(out)["value"] == pytest.approx(-0.0067021, abs=1e-7)


def test_coeff_carries_error_and_seed(capsys):
    code, out, _ = call(capsys, "coeff", "bm", "--m", "2", "--samples", "20000", "--seed", "3", "--zr", "0.1")
    data = json.loads(out)
    assert {"estimate", "stderr", "seed", "samples"} <= set(data)
    assert data["seed"] == 3


def test_pressure_outside_region_exit_2(capsys):
    code, _, err = call(capsys, "pressure", "--zr", "0.05", "--zR", "0.5", "--M", "2")
    assert code == 2
    assert "warning" in err
    code, _, _ = call(capsys, "pressure", "--zr", "0.05", "--zR", "0.5", "--M", "2", "--force")
    assert code == 0


def test_pressure_csv(capsys):
    code, out, _ = call(capsys, "pressure", "--zr", "0.05", "--zR", "0.003", "--M", "2", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert rows[0]["m"] == "offset"
    assert rows[-1]["m"] == "total"


def test_convergence_check_exit_codes(capsys):
    code, out, _ = call(capsys, "convergence", "check", "--criterion", "easy",
                        "--params", "R=1,r=0.1,zr=0.1,zR=0.01")
    assert code == 0 and json.loads(out)["satisfied"]
    code, _, _ = call(capsys, "convergence", "check", "--criterion", "easy", "--zr", "0.1", "--zR", "0.05")
    assert code == 2
    code, out, _ = call(capsys, "convergence", "check", "--criterion", "suff_hs", "--model", "colloid",
                        "--zr", "200", "--zR", "0.001")
    assert code == 2 and "error" in json.loads(out)


def test_config_file_and_override(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# desk case\nzr = 0.1\nzR=1\n")
    code, out, _ = call(capsys, "effective", "zhat", "--config", str(cfg))
    assert json.loads(out)["value"] == pytest.approx(0.5726228, abs=1e-7)
    code, out, _ = call(capsys, "effective", "zhat", "--config", str(cfg), "--zR", "2")
    assert json.loads(out)["value"] == pytest.approx(2 * 0.5726228, abs=1e-6)


def test_malformed_config(capsys, tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("no equals sign\n")
    assert call(capsys, "effective", "zhat", "--config", str(bad))[0] == 1
    bad.write_text("unknown_key = 3\n")
    assert call(capsys, "effective", "zhat", "--config", str(bad))[0] == 1
    bad.write_text("zr = abc\n")
    assert call(capsys, "effective", "zhat", "--config", str(bad))[0] == 1
    assert read_config(str(tmp_path / "bad.cfg")) == {"zr": "abc"}


def test_byte_identical_output(capsys):
    argv = ("coeff", "bm", "--m", "3", "--samples", "5000", "--seed", "11", "--zr", "0.1")
    _, a, _ = call(capsys, *argv)
    _, b, _ = call(capsys, *argv)
    assert a == b


def test_validate_subset(capsys):
    code, out, _ = call(capsys, "validate", "all", "--only", "2,9")
    data = json.loads(out)
    assert code == 0
    assert [c["id"] for c in data["criteria"]] == [2, 9]
    assert all(c["passed"] for c in data["criteria"])


def test_validate_outside_region_exit_2(capsys):
    code, out, err = call(capsys, "validate", "all", "--only", "8", "--zR", "0.05", "--samples", "20000")
    data = json.loads(out)
    assert code == 2
    assert data["criteria"][0]["detail"]["criterion_satisfied"] is False


def test_simplex_points_are_regular():
    import numpy as np
    pts = simplex_points(4, 2.1)
    d = [np.linalg.norm(pts[i] - pts[j]) for i in range(4) for j in range(i + 1, 4)]
    assert np.allclose(d, 2.1)


def test_parser_builds():
    assert build_parser().prog == "bimix"
