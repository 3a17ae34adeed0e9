import csv
import json
import os

import pytest

from rigid_points.cli import ValidationError, main, resolve_config


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_sample_ginibre_is_reproducible(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(["sample-ginibre", "--n", "8", "--seed", "3", "--out", str(a)], capsys)[0] == 0
    assert run(["sample-ginibre", "--n", "8", "--seed", "3", "--out", str(b)], capsys)[0] == 0
    assert (a / "sample.json").read_bytes() == (b / "sample.json").read_bytes()
    data = json.loads((a / "sample.json").read_text())
    assert len(data["points"]) == 8 and data["r0"] == 1.0
    report = json.loads((a / "report.json").read_text())
    assert report["config"]["n"] == 8 and "out" not in report["config"]


def test_sample_gaf_stream_changes_output(tmp_path, capsys):
    run(["sample-gaf", "--n", "6", "--stream", "0", "--out", str(tmp_path / "s0")], capsys)
    run(["sample-gaf", "--n", "6", "--stream", "1", "--out", str(tmp_path / "s1")], capsys)
    assert (tmp_path / "s0" / "sample.json").read_text() != (tmp_path / "s1" / "sample.json").read_text()


def test_unknown_key_in_config_file(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"n": 5, "bogus": 1}))
    code, _, err = run(["sample-gaf", "--config", str(cfg), "--out", str(tmp_path / "o")], capsys)
    assert code == 2
    payload = json.loads(err.strip().splitlines()[-1])
    assert payload["key"] == "bogus" and payload["error"] == "validation"


def test_flags_override_config_file(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"n": 5}))
    out = tmp_path / "o"
    assert run(["sample-gaf", "--config", str(cfg), "--n", "7", "--out", str(out)], capsys)[0] == 0
    assert len(json.loads((out / "sample.json").read_text())["points"]) == 7


def test_bad_values_exit_2(tmp_path, capsys):
    assert run(["sample-gaf", "--n", "500", "--out", str(tmp_path / "o")], capsys)[0] == 2
    assert run(["rigidity-count", "--eps", "2.0", "--out", str(tmp_path / "o")], capsys)[0] == 2
    assert run(["nonsense"], capsys)[0] == 2


def test_numerical_failure_exit_3(tmp_path, capsys):
    code, _, err = run(["power-tails", "--model", "gaf", "--n", "20", "--scales", "1", "2", "3",
                        "--r0", "1.0", "--replicas", "2", "--out", str(tmp_path / "o")], capsys)
    assert code == 3 and "InsufficientScale" in err


def test_resolve_config_defaults_and_env(monkeypatch):
    monkeypatch.setenv("RIGIDPOINTS_THREADS", "3")
    cfg = resolve_config("vieta-check", {}, {})
    assert cfg["threads"] == 3 and cfg["replicas"] == 100 and cfg["n"] == 20
    with pytest.raises(ValidationError):
        resolve_config("vieta-check", {"schema_version": 9}, {})
    with pytest.raises(ValidationError):
        resolve_config("vieta-check", {"n": "twenty"}, {})
    with pytest.raises(ValidationError):
        resolve_config("rigidity-count", {"eps": []}, {})


def test_thread_count_does_not_change_results(tmp_path, capsys):
    for threads in ("1", "3"):
        run(["vieta-check", "--n", "10", "--replicas", "6", "--threads", threads,
             "--out", str(tmp_path / threads)], capsys)
    assert (tmp_path / "1" / "rows.csv").read_text() == (tmp_path / "3" / "rows.csv").read_text()


def test_report_files(tmp_path, capsys):
    out = tmp_path / "r"
    code, stdout, _ = run(["reconstruct", "--n", "20", "--replicas", "12", "--out", str(out)], capsys)
    assert code == 0
    assert sorted(os.listdir(out)) == ["plotdata.csv", "report.json", "rows.csv"]
    rows = list(csv.reader((out / "rows.csv").open()))
    assert rows[0][0] == "replica" and len(rows) == 13
    plot = list(csv.reader((out / "plotdata.csv").open()))
    assert plot[0] == ["series", "x", "y", "yerr"]
    summary = json.loads(stdout)["summary"]
    assert 0 <= summary["phase_ks_pvalue"] <= 1
