import csv
import io

import numpy as np
import pytest

from repower import cli
from repower.solver import NoConvergence, uniform_report
from repower.mtp import ProblemSpec


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr().out
    return code, out


def parse_csv(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


def test_weights_table_values(capsys):
    code, out = run_cli(capsys, "weights", "--means", "3.93,3.72,2.22,0.37",
                        "--alpha", "0.05")
    assert code == 0
    rows = parse_csv(out)
    w = [float(r["weight"]) for r in rows]
    assert w == pytest.approx([0.53, 0.47, 0.0, 0.0], abs=0.01)
    assert [r["in_alt"] for r in rows] == ["true", "true", "false", "false"]
    assert "# method=fixed_point" in out or "# method=grid" in out


def test_weights_forced_alt(capsys):
    code, out = run_cli(capsys, "weights", "--means", "2,2", "--alt", "1,2",
                        "--alpha", "0.05")
    assert code == 0
    w = [float(r["weight"]) for r in parse_csv(out)]
    assert w == pytest.approx([0.5, 0.5], abs=1e-6)


def test_weights_empty_alt_note(capsys):
    code, out = run_cli(capsys, "weights", "--means=-1,-1", "--alpha", "0.05")
    assert code == 0
    assert "empty alternative set" in out
    w = [float(r["weight"]) for r in parse_csv(out)]
    assert w == pytest.approx([0.5, 0.5])


def test_negative_vector_as_separate_token(capsys):
    code, out = run_cli(capsys, "weights", "--means", "-1,-1",
                        "--alpha", "0.05")
    assert code == 0


def test_invalid_flags_exit_2(capsys):
    assert cli.main(["weights", "--means", "2,2", "--alpha", "2.0"]) == 2
    assert cli.main(["weights", "--means", "2,2", "--m", "1"]) == 2
    assert cli.main(["sweep", "--family", "bogus", "--from", "0", "--to", "1",
                     "--step", "0.5", "--reps", "10"]) == 2
    capsys.readouterr()


def test_no_convergence_exit_3(capsys, monkeypatch):
    def boom(alt, spec, cfg):
        raise NoConvergence("forced", uniform_report(spec))

    monkeypatch.setattr(cli, "solve_fixed_point", boom)
    code = cli.main(["weights", "--means", "3,3,3,3", "--alpha", "0.05",
                     "--method", "fixed-point"])
    assert code == 3
    capsys.readouterr()


def test_power_command(capsys):
    code, out = run_cli(capsys, "power", "--means", "3,0", "--weights", "1,0",
                        "--alpha", "0.025")
    assert code == 0
    rows = parse_csv(out)
    assert float(rows[0]["marginal_power"]) == pytest.approx(
        0.8508384157958045, rel=1e-12)
    assert float(rows[1]["marginal_power"]) == 0.0


def test_replicate_command(capsys):
    code, out = run_cli(capsys, "replicate", "--z1", "3.93,3.72,2.22,0.37",
                        "--z2", "4,3.4,2,0.1", "--alpha", "0.05")
    assert code == 0
    rows = parse_csv(out)
    assert [r["reject_overall"] for r in rows] == ["true", "true", "false",
                                                   "false"]


def test_case_study_command(capsys):
    code, out = run_cli(capsys, "case-study")
    assert code == 0
    rows = parse_csv(out)
    assert len(rows) == 4 * 3 + 6 * 3  # three 4-endpoint and three 6-endpoint
    byname = {}
    for r in rows:
        byname.setdefault(r["analysis"], []).append(float(r["weight"]))
    assert byname["post-CAC Visit 3"] == pytest.approx([0.53, 0.47, 0, 0],
                                                       abs=0.01)


def test_case_study_hypothetical(capsys):
    code, out = run_cli(capsys, "case-study", "--hypothetical")
    assert code == 0
    rows = parse_csv(out)
    adj = [float(r["new_adj_p"]) for r in rows]
    assert adj[0] == pytest.approx(0.005, abs=0.005)
    assert adj[1:] == pytest.approx([1.0] * 5)


def test_simulate_header_and_determinism(capsys):
    argv = ["simulate", "--theta", "0,3", "--reps", "5000", "--seed", "1",
            "--alpha", "0.05"]
    code, out1 = run_cli(capsys, *argv)
    assert code == 0
    header = out1.splitlines()[0]
    assert header == "theta_1,theta_2,method,dpos,dpos_se,mpos_1,mpos_2,fwer1,fwer2"
    _, out2 = run_cli(capsys, *argv)
    assert out1 == out2


def test_csv_round_trip(capsys, tmp_path):
    path = tmp_path / "sim.csv"
    code = cli.main(["simulate", "--theta", "1,2", "--reps", "2000",
                     "--seed", "4", "--alpha", "0.05", "--out", str(path)])
    assert code == 0
    rows = parse_csv(path.read_text())
    assert {r["method"] for r in rows} == {"weighted", "unweighted"}
    # 17-significant-digit floats survive the round trip exactly
    v = float(rows[0]["dpos"])
    assert cli._fmt(v) == rows[0]["dpos"]
    capsys.readouterr()


def test_sweep_and_heatmap_and_fwer(capsys):
    code, out = run_cli(capsys, "sweep", "--family", "zero-theta", "--from",
                        "2", "--to", "2.5", "--step", "0.5", "--reps", "2000",
                        "--seed", "2", "--alpha", "0.05")
    assert code == 0
    rows = parse_csv(out)
    assert [r["theta"] for r in rows[:2]] == ["2", "2"]
    code, out = run_cli(capsys, "heatmap", "--family1", "half-theta",
                        "--family2", "swapped", "--from", "2", "--to", "3",
                        "--step", "0.5", "--reps", "1000", "--seed", "2")
    assert code == 0
    rows = parse_csv(out)
    assert len(rows) == 9
    assert set(rows[0]) == {"theta", "theta_prime", "diff_dpos",
                            "diff_mpos_1", "diff_mpos_2"}
    code, out = run_cli(capsys, "fwer", "--theta", "0,0", "--reps", "2000",
                        "--seed", "2")
    assert code == 0
    rows = parse_csv(out)
    assert len(rows) == 4


def test_fwer_without_null_exit_2(capsys):
    assert cli.main(["fwer", "--theta", "1,2", "--reps", "100"]) == 2
    capsys.readouterr()


def test_bench_m1_and_m2(capsys):
    code, out = run_cli(capsys, "bench", "--m", "1", "--instances", "5")
    assert code == 0
    assert "fixed_point" in out
    code, out = run_cli(capsys, "bench", "--m", "2", "--instances", "10",
                        "--seed", "3", "--alpha", "0.05")
    assert code == 0
    rows = parse_csv(out)
    by = {r["method"]: r for r in rows}
    assert float(by["grid"]["frac_fp_power_ge"]) == 1.0
    assert float(by["multistart_ascent"]["frac_fp_power_ge"]) == 1.0


def test_config_file_with_flag_override(capsys, tmp_path):
    cfgfile = tmp_path / "scenario.cfg"
    cfgfile.write_text("theta = 0,3\nreps = 2000\nseed = 9\nalpha = 0.05\n")
    code, out1 = run_cli(capsys, "simulate", "--config", str(cfgfile))
    assert code == 0
    # explicit flag overrides the file value
    code, out2 = run_cli(capsys, "simulate", "--config", str(cfgfile),
                         "--seed", "10")
    assert code == 0
    assert out1 != out2
    code, out3 = run_cli(capsys, "simulate", "--theta", "0,3", "--reps",
                         "2000", "--seed", "9", "--alpha", "0.05")
    assert out1 == out3


def test_missing_config_file_exit_2(capsys):
    assert cli.main(["simulate", "--config", "/nonexistent.cfg"]) == 2
    capsys.readouterr()
