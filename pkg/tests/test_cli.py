from __future__ import annotations

import json
import math
import subprocess
import sys

import numpy as np
import pytest

from photonsub import __version__
from photonsub.artifacts import OUT_DIR_ENV, read_rows_csv
from photonsub.cli import EXIT_INFEASIBLE, EXIT_OK, EXIT_USAGE, EXIT_VERIFY, main

SMALL_GRID = ["--grid-extent", "5", "--grid-points", "41"]


def _files(path):
    return {p.relative_to(path): p.read_bytes() for p in sorted(path.rglob("*")) if p.is_file()}


def test_usage_errors(tmp_path, capsys):
    assert main(["tradeoff", "--out", str(tmp_path)]) == EXIT_USAGE
    assert main(["plan", "--r-out-db", "2", "--out", str(tmp_path)]) == EXIT_USAGE
    assert main(["plan", "--r-out-db", "2", "--p-on", "0.1", "--w00", "-0.2"]) == EXIT_USAGE
    assert main(["sweep", "--r1-db", "3", "--out", str(tmp_path)]) == EXIT_USAGE
    assert main(["sweep", "--r1-db", "3", "--r2-db", "-3", "--t", "1.2", "--out", str(tmp_path)]) == EXIT_USAGE
    assert main(["tomo-sim", "--out", str(tmp_path)]) == EXIT_USAGE
    with pytest.raises(SystemExit) as exc:
        main(["no-such-command"])
    assert exc.value.code == EXIT_USAGE
    with pytest.raises(SystemExit) as exc:
        main(["plan", "--format", "xml"])
    assert exc.value.code == EXIT_USAGE


def test_plan_symmetric_zero_db(tmp_path):
    assert main(["plan", "--r-out-db", "0", "--p-on", "0.1", "--out", str(tmp_path)]) == EXIT_OK
    doc = json.loads((tmp_path / "plan.json").read_text())
    assert math.isclose(doc["T"], 0.5) and math.isclose(doc["r1_db"], -doc["r2_db"])
    assert doc["provenance"]["version"] == __version__
    assert "plan --r-out-db 0 --p-on 0.1" in doc["provenance"]["command"]


def test_plan_on_best_curve_with_losses(tmp_path):
    argv = ["plan", "--r-out-db", "2", "--w00", "-0.2", "--trigger-loss", "0.9", "--out", str(tmp_path)]
    assert main(argv) == EXIT_OK
    doc = json.loads((tmp_path / "plan.json").read_text())
    assert math.isclose(doc["lossless"]["w00"], -0.2, abs_tol=1e-9)
    assert math.isclose(doc["s"], 1.0, abs_tol=1e-9)
    assert doc["lossy"]["p_on"] < doc["lossless"]["p_on"]


def test_plan_infeasible(tmp_path):
    assert main(["plan", "--r-out-db", "2", "--w00", "-0.4", "--out", str(tmp_path)]) == EXIT_INFEASIBLE


def test_tradeoff_files_and_ordering(tmp_path):
    argv = ["tradeoff", "--r-out-db", "4", "0.5", "2", "--p-points", "12", "--out", str(tmp_path)]
    assert main(argv) == EXIT_OK
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == [f"{s}_p{d}dB.csv" for s in ("gps", "ps") for d in ("0_50", "2_00", "4_00")]
    gps = read_rows_csv(tmp_path / "gps_p2_00dB.csv")
    for db in ("0_50", "2_00", "4_00"):
        ps = read_rows_csv(tmp_path / f"ps_p{db}dB.csv")
        assert all(a["w00"] > b["w00"] for a, b in zip(ps, gps))
    header = (tmp_path / "gps_p2_00dB.csv").read_text().splitlines()[:4]
    assert header[0].startswith("# command: photonsub tradeoff")
    assert header[3] == "p_on,w00,r1_db,r2_db,T,s"


def test_tradeoff_with_losses_shifts_left(tmp_path):
    argv = ["tradeoff", "--r-out-db", "2", "--trigger-loss", "0.9", "--signal-loss", "0.25",
            "--p-min", "1e-3", "--p-max", "0.03", "--p-points", "4", "--out", str(tmp_path)] + SMALL_GRID
    assert main(argv) == EXIT_OK
    base = read_rows_csv(tmp_path / "gps_p2_00dB.csv")
    lossy = read_rows_csv(tmp_path / "gps_p2_00dB_lossy.csv")
    for a, b in zip(base, lossy):
        assert 0.1 < b["p_on"] / a["p_on"] < 0.105
        assert b["w00"] > a["w00"]


def test_tradeoff_reports_infeasible_points(tmp_path):
    # rates below double precision cannot be resolved by either scheme
    argv = ["tradeoff", "--r-out-db", "0.5", "--p-min", "1e-30", "--p-max", "1e-3", "--p-points", "3",
            "--out", str(tmp_path)]
    assert main(argv) == EXIT_OK
    fails = read_rows_csv(tmp_path / "tradeoff_failures.csv")
    assert {f["curve"] for f in fails} == {"ps 0.5 dB", "gps 0.5 dB"}
    assert len(read_rows_csv(tmp_path / "ps_p0_50dB.csv")) == 1


def test_sweep_symmetric_minimum(tmp_path):
    argv = ["sweep", "--r1-db", "3", "--r2-db", "-3", "--t", "0.3", "0.5", "0.7", "--out", str(tmp_path)] + SMALL_GRID
    assert main(argv) == EXIT_OK
    rows = read_rows_csv(tmp_path / "sweep_metrics.csv")
    assert [r["T"] for r in rows] == [0.3, 0.5, 0.7]
    assert min(rows, key=lambda r: r["w00_lossless"])["T"] == 0.5
    w = read_rows_csv(tmp_path / "wigner_T0_500_lossless.csv")
    assert len(w) == 41 * 41 and set(w[0]) == {"x", "p", "w"}


def test_sweep_lossy_and_jobs_give_same_bytes(tmp_path):
    base = ["sweep", "--r1-db", "2.8", "--r2-db", "-0.78", "--trigger-loss", "0.9", "--no-wigner"] + SMALL_GRID
    assert main(base + ["--out", str(tmp_path / "a")]) == EXIT_OK
    assert main(base + ["--out", str(tmp_path / "a"), "--jobs", "3"]) == EXIT_OK
    rows = read_rows_csv(tmp_path / "a" / "sweep_metrics.csv")
    rates = [r["p_on_lossy"] for r in rows]
    assert np.all(np.diff(rates) < 0)


def test_tables(tmp_path):
    assert main(["tables", "--out", str(tmp_path)]) == EXIT_OK
    rows = {r["label"]: r for r in read_rows_csv(tmp_path / "tables.csv")}
    assert len(rows) == 12
    g2 = rows["GPS-2"]
    assert abs(g2["r_out_db"] - 2.02) < 0.05
    assert abs(g2["rate_pred"] / 4.03e3 - 1) < 0.15
    assert all(abs(rows[f"GPS-{k}"]["s"] - 1) < 0.05 for k in range(1, 7))


def test_tables_duty_corrected(tmp_path):
    assert main(["tables", "--duty-corrected", "--calibration", "1.0e6", "--out", str(tmp_path)]) == EXIT_OK
    rows = {r["label"]: r for r in read_rows_csv(tmp_path / "tables.csv")}
    g2 = rows["GPS-2"]
    assert math.isclose(g2["rate_pred"], 1.0e6 * g2["p_on_lossy"] / 0.13, rel_tol=1e-12)
    assert math.isclose(g2["rate_listed"], 4.03e3 / 0.13, rel_tol=1e-12)


def test_oracle_check_pass_and_injected_failure(tmp_path, capsys):
    argv = ["oracle-check", "--n-cases", "4", "--seed", "3", "--cutoff", "40"]
    assert main(argv + ["--out", str(tmp_path / "ok")]) == EXIT_OK
    assert "4/4 passed" in capsys.readouterr().out
    assert main(argv + ["--inject-error", "--out", str(tmp_path / "bad")]) == EXIT_VERIFY


def test_oracle_check_is_bit_reproducible(tmp_path):
    argv = ["oracle-check", "--n-cases", "3", "--seed", "9"]
    main(argv + ["--out", str(tmp_path / "a")])
    main(argv + ["--out", str(tmp_path / "b")])
    a = (tmp_path / "a" / "oracle_check.csv").read_text().splitlines()[1:]
    b = (tmp_path / "b" / "oracle_check.csv").read_text().splitlines()[1:]
    assert a == b


def test_identical_invocations_are_byte_identical(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    argv = ["tomo-sim", "--preset", "GPS-2", "--samples", "400", "--mle-cutoff", "6", "--out", "run"]
    main(argv)
    first = _files(tmp_path / "run")
    main(argv)
    assert _files(tmp_path / "run") == first
    assert set(map(str, first)) == {
        "homodyne.csv", "reconstruction.json", "reconstruction_wigner.csv", "tomo_metrics.json",
    }


def test_tomo_sim_vacuum_and_json_format(tmp_path):
    argv = ["tomo-sim", "--preset", "vacuum", "--samples", "1000", "--mle-cutoff", "4", "--cutoff", "10",
            "--format", "json", "--out", str(tmp_path)] + SMALL_GRID
    assert main(argv) == EXIT_OK
    m = json.loads((tmp_path / "tomo_metrics.json").read_text())
    assert math.isclose(m["true"]["w00"], 1 / math.pi)
    assert m["reconstructed"]["w00"] > 0.3
    assert (tmp_path / "reconstruction_wigner.json").exists()


def test_tomo_sim_explicit_spec_and_spread(tmp_path):
    argv = ["tomo-sim", "--r1-db", "2.8", "--r2-db", "-0.78", "--t", "0.79", "--custom-losses",
            "--samples", "500", "--mle-cutoff", "6", "--repeats", "3", "--out", str(tmp_path)] + SMALL_GRID
    assert main(argv) == EXIT_OK
    m = json.loads((tmp_path / "tomo_metrics.json").read_text())
    assert m["true"]["w00"] < -0.2 and m["monte_carlo"]["repeats"] == 3
    assert m["mle"]["converged"]


def test_env_var_sets_default_out_dir(tmp_path, monkeypatch):
    monkeypatch.setenv(OUT_DIR_ENV, str(tmp_path / "envout"))
    assert main(["plan", "--r-out-db", "1", "--p-on", "0.05"]) == EXIT_OK
    assert (tmp_path / "envout" / "plan.json").exists()


def test_console_entry_point(tmp_path):
    out = subprocess.run(
        [sys.executable, "-m", "photonsub.cli", "--version"], capture_output=True, text=True, check=True
    )
    assert out.stdout.strip() == f"photonsub {__version__}"
