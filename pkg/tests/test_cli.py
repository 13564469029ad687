import csv
import json
import math
import os
import subprocess
import sys

import pytest

from entropy_lab import cli, scaling, specio
from entropy_lab.torus_sets import canonicalize


def run_cli(*argv, env_extra=None):
    env = dict(os.environ)
    if env_extra:
        env.update(env_extra)
    return subprocess.run([sys.executable, "-m", "entropy_lab.cli", *argv],
                          capture_output=True, text=True, env=env)


def write_spec(path, payload):
    path.write_text(json.dumps(payload))
    return str(path)


def test_cantor_subcommand_emits_truncation(tmp_path):
    out = tmp_path / "cantor.json"
    res = run_cli("cantor", "--q", "0.25", "--a", "1", "--depth", "1",
                  "--out", str(out))
    assert res.returncode == 0
    payload = json.loads(out.read_text())
    assert payload["version"] == 1
    assert payload["type"] == "intervals"
    assert payload["intervals"] == [[0.0, 0.375], [0.625, 1.0]]
    assert payload["metadata"]["predicted_alpha"] == pytest.approx(0.5)
    assert payload["metadata"]["depth"] == 1


def test_cantor_subcommand_rejects_bad_ratio():
    res = run_cli("cantor", "--q", "0.6", "--a", "1", "--depth", "1")
    assert res.returncode == 1
    assert "error" in res.stderr


def test_cantor_auto_depth(tmp_path):
    out = tmp_path / "auto.json"
    res = run_cli("cantor", "--q", "0.25", "--a", "1", "--nmax", "16384",
                  "--out", str(out))
    assert res.returncode == 0
    assert json.loads(out.read_text())["metadata"]["depth"] == 7


def test_scan_csv_anchors(tmp_path):
    spec = write_spec(tmp_path / "half.json",
                      {"version": 1, "type": "intervals", "intervals": [[0, 0.5]]})
    out = tmp_path / "scan.csv"
    res = run_cli("scan", "--set", spec, "--nmin", "1", "--nmax", "2",
                  "--ratio", "2", "--out", str(out))
    assert res.returncode == 0
    rows = list(csv.DictReader(out.open()))
    assert [r["N"] for r in rows] == ["1", "2"]
    assert float(rows[0]["S_N"]) == pytest.approx(math.log(2), abs=1e-12)
    assert float(rows[0]["P_N"]) == pytest.approx(0.25, abs=1e-12)
    assert float(rows[1]["S_N"]) == pytest.approx(0.9478932674675549, abs=1e-9)
    assert float(rows[1]["P_N"]) == pytest.approx(0.5 - 2 / math.pi ** 2, abs=1e-12)
    assert rows[0]["S_over_logN"] == ""          # log 1 = 0 has no quotient


def test_scan_proxy_mode_leaves_entropy_blank(tmp_path):
    spec = write_spec(tmp_path / "c.json",
                      {"version": 1, "type": "cantor", "q": 0.25, "a": 1.0,
                       "depth": "auto"})
    out = tmp_path / "proxy.csv"
    res = run_cli("scan", "--set", spec, "--mode", "proxy", "--nmin", "4",
                  "--nmax", "64", "--out", str(out))
    assert res.returncode == 0
    rows = list(csv.DictReader(out.open()))
    assert all(r["S_N"] == "" for r in rows)
    proxies = [float(r["P_N"]) for r in rows]
    assert all(b > a for a, b in zip(proxies, proxies[1:]))


def test_scan_full_torus_all_zero(tmp_path):
    spec = write_spec(tmp_path / "full.json",
                      {"version": 1, "type": "intervals", "intervals": [[0, 1]]})
    out = tmp_path / "full.csv"
    res = run_cli("scan", "--set", spec, "--nmin", "1", "--nmax", "8",
                  "--out", str(out))
    assert res.returncode == 0
    for row in csv.DictReader(out.open()):
        assert abs(float(row["S_N"])) < 1e-9
        assert abs(float(row["P_N"])) < 1e-9


def test_scan_bits_flag_renames_and_converts(tmp_path):
    spec = write_spec(tmp_path / "half.json",
                      {"version": 1, "type": "intervals", "intervals": [[0, 0.5]]})
    out = tmp_path / "bits.csv"
    res = run_cli("scan", "--set", spec, "--nmin", "1", "--nmax", "1",
                  "--bits", "--out", str(out))
    assert res.returncode == 0
    rows = list(csv.DictReader(out.open()))
    assert "S_N_bits" in rows[0]
    assert float(rows[0]["S_N_bits"]) == pytest.approx(1.0, abs=1e-12)


def test_round_trip_cantor_scan_bit_identical(tmp_path):
    # spec emitted by the cantor command, scanned from file, must match an
    # in-process scan on every value column
    cantor_file = tmp_path / "cantor.json"
    run_cli("cantor", "--q", "0.25", "--a", "1", "--depth", "4",
            "--out", str(cantor_file))
    out = tmp_path / "roundtrip.csv"
    res = run_cli("scan", "--set", str(cantor_file), "--nmin", "4",
                  "--nmax", "64", "--mode", "both", "--out", str(out))
    assert res.returncode == 0

    from entropy_lab.torus_sets import CantorSpec, cantor_generate
    K = cantor_generate(CantorSpec(0.25, 1.0, 4))
    records = scaling.scan(K, scaling.default_grid(4, 64), mode="both")
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == len(records)
    for row, rec in zip(rows, records):
        assert int(row["N"]) == rec.n
        assert row["S_N"] == f"{rec.entropy:.17g}"
        assert row["P_N"] == f"{rec.proxy:.17g}"


def test_scan_deterministic_across_thread_counts(tmp_path):
    spec = write_spec(tmp_path / "set.json",
                      {"version": 1, "type": "intervals",
                       "intervals": [[0.1, 0.35], [0.5, 0.8]]})
    outs = []
    for threads in ("1", "4"):
        out = tmp_path / f"t{threads}.csv"
        res = run_cli("scan", "--set", spec, "--nmin", "2", "--nmax", "32",
                      "--out", str(out),
                      env_extra={"ENTROPY_LAB_THREADS": threads})
        assert res.returncode == 0
        rows = list(csv.DictReader(out.open()))
        outs.append([(r["N"], r["S_N"], r["P_N"], r["S_over_logN"],
                      r["P_over_logN"]) for r in rows])
    assert outs[0] == outs[1]


def test_fit_recovers_synthetic_power_law(tmp_path):
    csv_path = tmp_path / "power.csv"
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(cli.CSV_COLUMNS)
        for n in scaling.default_grid(16, 2048):
            s = 2.0 * n ** 0.75
            writer.writerow([n, f"{s:.17g}", f"{s:.17g}", "", "", "0"])
    out = tmp_path / "fit.json"
    res = run_cli("fit", "--csv", str(csv_path), "--out", str(out))
    assert res.returncode == 0
    report = json.loads(out.read_text())
    assert report["fits"]["power"]["slope"] == pytest.approx(0.75, abs=1e-10)
    assert report["fits"]["power"]["r_squared"] == pytest.approx(1.0, abs=1e-10)
    assert report["alpha"] == pytest.approx(0.75, abs=1e-10)


def test_fit_cantor_report_includes_prediction(tmp_path):
    spec = write_spec(tmp_path / "c.json",
                      {"version": 1, "type": "cantor", "q": 0.25, "a": 1.0,
                       "depth": "auto"})
    scan_out = tmp_path / "scan.csv"
    res = run_cli("scan", "--set", spec, "--mode", "proxy", "--nmin", "128",
                  "--nmax", "4096", "--out", str(scan_out))
    assert res.returncode == 0
    fit_out = tmp_path / "fit.json"
    res = run_cli("fit", "--csv", str(scan_out), "--set", spec,
                  "--series", "proxy", "--out", str(fit_out))
    assert res.returncode == 0
    report = json.loads(fit_out.read_text())
    assert report["predicted_alpha"] == pytest.approx(0.5)
    assert "alpha_ok" in report["flags"]


def test_fit_rejects_malformed_csv(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("x,y\n1,2\n")
    res = run_cli("fit", "--csv", str(bad))
    assert res.returncode == 1


def test_spec_validation_errors(tmp_path):
    unknown_field = write_spec(tmp_path / "u.json",
                               {"version": 1, "type": "intervals",
                                "intervals": [[0, 0.5]], "extra": True})
    assert run_cli("scan", "--set", unknown_field).returncode == 1
    bad_version = write_spec(tmp_path / "v.json",
                             {"version": 2, "type": "intervals",
                              "intervals": [[0, 0.5]]})
    assert run_cli("scan", "--set", bad_version).returncode == 1
    bad_type = write_spec(tmp_path / "t.json", {"version": 1, "type": "disc"})
    assert run_cli("scan", "--set", bad_type).returncode == 1
    assert run_cli("scan", "--set", str(tmp_path / "missing.json")).returncode == 1


def test_fermi_subcommand(tmp_path):
    import numpy as np
    th = np.linspace(0.0, 1.0, 201)[:-1]
    spec = write_spec(tmp_path / "fermi.json",
                      {"version": 1, "type": "fermi",
                       "samples": [[float(t), float(math.cos(2 * math.pi * t))]
                                   for t in th],
                       "filling": 0.5})
    out = tmp_path / "sea.json"
    res = run_cli("fermi", "--set", spec, "--out", str(out))
    assert res.returncode == 0
    payload = json.loads(out.read_text())
    (a, b), = payload["intervals"]
    assert a == pytest.approx(0.25, abs=1e-9)
    assert b == pytest.approx(0.75, abs=1e-9)
    assert payload["metadata"]["filling"] == 0.5


def test_verify_default_passes(tmp_path):
    out = tmp_path / "verify.json"
    res = run_cli("verify", "--seed", "0", "--out", str(out))
    assert res.returncode == 0, res.stdout + res.stderr
    report = json.loads(out.read_text())
    assert report["all_passed"]
    assert set(report["suites"]) == {
        "eta_pointwise_bound", "oracle_equivalence", "route_agreement",
        "subadditivity", "set_invariances",
    }
    assert all("PASS" in line for line in res.stdout.splitlines()[:5])


def test_verify_exit_code_on_failure(monkeypatch, capsys):
    failing = {"seed": 0, "quick": False,
               "suites": {"oracle_equivalence": {"passed": False}},
               "all_passed": False}
    monkeypatch.setattr(cli, "run_verification", lambda **kw: failing)
    assert cli.main(["verify"]) == 2


def test_scan_route_disagreement_maps_to_exit_2(monkeypatch, tmp_path, capsys):
    spec = write_spec(tmp_path / "half.json",
                      {"version": 1, "type": "intervals", "intervals": [[0, 0.5]]})

    def boom(*a, **kw):
        raise scaling.VerificationError("routes disagree")

    monkeypatch.setattr(cli.scaling, "scan", boom)
    assert cli.main(["scan", "--set", spec, "--nmin", "1", "--nmax", "2"]) == 2


def test_spec_parse_accepts_missing_version():
    spec = specio.parse_spec({"type": "intervals", "intervals": [[0.0, 0.5]]})
    assert spec.kind == "intervals"
    assert spec.intervals.intervals == canonicalize([(0.0, 0.5)]).intervals


def test_read_scan_csv_converts_bits(tmp_path):
    path = tmp_path / "bits.csv"
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["N", "S_N_bits", "P_N", "S_over_logN_bits",
                         "P_over_logN", "wall_ms"])
        writer.writerow([4, "2.0", "0.5", "", "", "0"])
        writer.writerow([8, "3.0", "0.6", "", "", "0"])
    records = cli.read_scan_csv(str(path))
    assert records[0].entropy == pytest.approx(2.0 * math.log(2.0))
    assert records[1].proxy == 0.6
