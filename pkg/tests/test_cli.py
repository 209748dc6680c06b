import json
import subprocess
import sys

import pytest

from framebits.cli import main
from framebits.detection import poissonian_bin_probs
from framebits.frames import pair_info_11


def run_cli(capsys, *argv) -> tuple[int, str]:
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def parse_csv(text: str) -> tuple[list[str], list[list[str]]]:
    lines = [ln for ln in text.split("\r\n") if ln]
    header = lines[0].split(",")
    rows = [ln.split(",") for ln in lines[1:]]
    return header, rows


def test_bin_probs_matches_library(capsys):
    code, out = run_cli(capsys, "bin-probs", "--preset", "nanowire", "--lam", "1e-5")
    assert code == 0
    header, rows = parse_csv(out)
    got = dict(zip(header, map(float, rows[0])))
    bins = poissonian_bin_probs(1e-5, 0.9, 0.9, 1.3e-10, 1.3e-10)
    assert got["p00"] == bins.p00
    assert got["pcc"] == bins.pcc
    assert got["pa0"] == bins.pa0
    assert abs(sum(got[k] for k in ("p00", "p0c", "pc0", "pcc")) - 1.0) < 1e-12


def test_bin_probs_silent_source(capsys):
    code, out = run_cli(capsys, "bin-probs", "--lam", "0", "--eta", "0.5", "--q", "0")
    assert code == 0
    header, rows = parse_csv(out)
    got = dict(zip(header, map(float, rows[0])))
    assert got["p00"] == 1.0


def test_config_file_and_flag_override(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"preset": "spad", "lam": 5.33e-5, "md": 0}))
    code, out = run_cli(capsys, "bin-probs", "--config", str(cfg))
    assert code == 0
    _, rows_file = parse_csv(out)
    code, out = run_cli(capsys, "bin-probs", "--config", str(cfg), "--eta", "0.3")
    assert code == 0
    _, rows_flag = parse_csv(out)
    assert rows_file != rows_flag


def test_unknown_config_key_is_config_error(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"lambda": 1e-5}))
    code, _ = run_cli(capsys, "bin-probs", "--config", str(cfg))
    assert code == 2


def test_missing_parameters_is_config_error(capsys):
    code, _ = run_cli(capsys, "bin-probs")
    assert code == 2


def test_domain_error_exit_code(capsys):
    code, _ = run_cli(capsys, "bin-probs", "--lam", "1e-5", "--eta", "1.5")
    assert code == 3


def test_sweep_schema_and_values(capsys):
    code, out = run_cli(capsys, "sweep", "--lam", "5.33e-5", "--eta", "0.7",
                        "--q", "6.53e-8", "--sweep-start", "100", "--sweep-stop", "1000",
                        "--sweep-points", "5")
    assert code == 0
    header, rows = parse_csv(out)
    assert header == ["N", "bits_11_detected", "bits_22_detected", "bits_total",
                      "h_kk", "pClass_11", "pClass_22"]
    ns = [int(r[0]) for r in rows]
    assert ns == sorted(ns) and ns[0] == 100 and ns[-1] == 1000
    bins = poissonian_bin_probs(5.33e-5, 0.7, 0.7, 6.53e-8, 6.53e-8)
    want = pair_info_11(100, bins, 5.33e-5, 0.7, 0.7, 6.53e-8).detected
    assert float(rows[0][1]) == pytest.approx(want, rel=1e-12)
    # schema-stable, 12+ significant digits
    assert len(rows[0][1].split(".")[-1]) >= 10


def test_single_point_sweep_equals_frame_info(capsys):
    args = ["--lam", "1e-5", "--eta", "0.9", "--q", "1.3e-10"]
    code, out = run_cli(capsys, "sweep", *args, "--sweep-start", "3000",
                        "--sweep-stop", "3000", "--sweep-points", "1")
    assert code == 0
    _, rows = parse_csv(out)
    sweep_bits11 = float(rows[0][1])
    sweep_bits22 = float(rows[0][2])
    code, out = run_cli(capsys, "frame-info", *args, "--n", "3000",
                        "--classes", "1,1", "2,2")
    assert code == 0
    header, rows = parse_csv(out)
    bits = {(int(r[1]), int(r[2])): float(r[header.index("bits_detected")]) for r in rows}
    assert bits[(1, 1)] == pytest.approx(sweep_bits11, rel=1e-12)
    assert bits[(2, 2)] == pytest.approx(sweep_bits22, rel=1e-12)


def test_sweep_json_format(capsys):
    code, out = run_cli(capsys, "sweep", "--lam", "1e-4", "--eta", "0.5",
                        "--sweep-start", "10", "--sweep-stop", "20", "--sweep-step", "5",
                        "--format", "json")
    assert code == 0
    payload = json.loads(out)
    assert "config" in payload and "rows" in payload
    assert [r["N"] for r in payload["rows"]] == [10, 15, 20]


def test_sweep_rerun_is_byte_identical(tmp_path):
    argv = [sys.executable, "-m", "framebits.cli", "sweep", "--preset", "spad",
            "--lam", "5.33e-5", "--sweep-start", "50", "--sweep-stop", "500",
            "--sweep-points", "4"]
    a = subprocess.run(argv, capture_output=True)
    b = subprocess.run(argv, capture_output=True)
    assert a.returncode == 0
    assert a.stdout == b.stdout


def test_optimize_finds_headline_optimum(capsys):
    code, out = run_cli(capsys, "optimize", "--lam", "5.33e-5", "--eta", "0.3",
                        "--q", "6.53e-8", "--sweep-start", "200", "--sweep-stop", "100000",
                        "--sweep-points", "40", "--objective", "11")
    assert code == 0
    header, rows = parse_csv(out)
    n_star, bits = int(rows[0][0]), float(rows[0][1])
    assert abs(n_star - 3579) <= 0.01 * 3579
    assert bits == pytest.approx(10.3, abs=0.05)
    # local maximum property at unit step
    bins = poissonian_bin_probs(5.33e-5, 0.3, 0.3, 6.53e-8, 6.53e-8)
    here = pair_info_11(n_star, bins, 5.33e-5, 0.3, 0.3, 6.53e-8).detected
    assert here >= pair_info_11(n_star - 1, bins, 5.33e-5, 0.3, 0.3, 6.53e-8).detected
    assert here >= pair_info_11(n_star + 1, bins, 5.33e-5, 0.3, 0.3, 6.53e-8).detected


def test_optimize_boundary_warning(capsys):
    code = main(["optimize", "--lam", "1e-3", "--eta", "1", "--q", "0",
                 "--sweep-start", "10", "--sweep-stop", "100", "--sweep-points", "10"])
    captured = capsys.readouterr()
    assert code == 0
    assert "boundary" in captured.err
    header, rows = parse_csv(captured.out)
    assert int(rows[0][0]) == 100


def test_jitter_compare_output(capsys):
    code, out = run_cli(capsys, "jitter-compare", "--lam", "5.33e-5", "--eta", "0.7",
                        "--q", "6.53e-8", "--j0", "0.9", "--sweep-start", "8",
                        "--sweep-stop", "32", "--sweep-step", "8")
    assert code == 0
    header, rows = parse_csv(out)
    assert header == ["N", "H_exact", "H_approx", "pct_diff"]
    assert len(rows) == 4
    assert all(float(r[3]) < 0.01 for r in rows)


def test_simulate_deterministic_and_z_scores(capsys):
    args = ["simulate", "--lam", "1e-2", "--eta", "0.5", "--q", "1e-3",
            "--n", "8", "--frames", "100000", "--seed", "7"]
    code, out1 = run_cli(capsys, *args)
    assert code == 0
    code, out2 = run_cli(capsys, *args)
    assert out1 == out2
    header, rows = parse_csv(out1)
    assert header == ["quantity", "analytic", "empirical", "z_score"]
    by_name = {r[0]: r for r in rows}
    for name in ("P_00", "P_0c", "P_c0", "P_cc"):
        assert abs(float(by_name[name][3])) < 4.5
    assert "cond_mi_1_1" in by_name


def test_simulate_insufficient_samples_exit_code(capsys):
    code, _ = run_cli(capsys, "simulate", "--lam", "1e-4", "--eta", "0.5",
                      "--n", "8", "--frames", "2000", "--seed", "1",
                      "--estimate-mi", "1,1")
    assert code == 4


def test_simulate_tag_stream(tmp_path, capsys):
    tag = tmp_path / "clicks.bin"
    code, _ = run_cli(capsys, "simulate", "--lam", "1e-2", "--eta", "0.9",
                      "--n", "4", "--frames", "5000", "--seed", "3",
                      "--tag-out", str(tag))
    assert code == 0
    raw = tag.read_bytes()
    assert len(raw) % 9 == 0 and len(raw) > 0


def test_entry_point_help():
    proc = subprocess.run([sys.executable, "-m", "framebits.cli", "--help"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    for cmd in ("bin-probs", "sweep", "optimize", "jitter-compare", "simulate"):
        assert cmd in proc.stdout
