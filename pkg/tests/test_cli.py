import json

import numpy as np

from hklab.cli import EXIT_BUDGET, EXIT_OK, EXIT_VALIDATION, ResultCache, main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_count_prints_value(capsys):
    code, out, _ = run_cli(capsys, "count", "--s", "3", "--k", "2", "--n", "3,3",
                           "--method", "both")
    assert code == EXIT_OK and out.strip().splitlines()[0] == "1"


def test_count_budget_exit(capsys):
    code, _, err = run_cli(capsys, "count", "--s", "6", "--k", "2",
                           "--n", "60,1000", "--method", "naive",
                           "--budget", "10")
    assert code == EXIT_BUDGET and "budget" in err


def test_count_bad_variant(capsys):
    code, _, err = run_cli(capsys, "count", "--s", "2", "--k", "2", "--n", "3,3",
                           "--variant", "nonsense")
    assert code == EXIT_VALIDATION


def test_vinogradov_table(capsys):
    code, out, _ = run_cli(capsys, "vinogradov", "--t", "1", "--k", "2",
                           "--X", "8,16,32")
    assert code == EXIT_OK and "slope=1.0" in out


def test_sums_complete(capsys):
    code, out, _ = run_cli(capsys, "sums", "complete", "--q", "3", "--a", "0,1")
    assert code == EXIT_OK and "|S|=1.73205" in out


def test_sums_weyl_and_integral(capsys):
    code, out, _ = run_cli(capsys, "sums", "weyl", "--k", "2",
                           "--alpha", "0,0.25", "--X", "4")
    assert code == EXIT_OK and out.startswith("3 +2")
    code, out, _ = run_cli(capsys, "sums", "integral", "--beta", "0,1",
                           "--X", "1")
    assert code == EXIT_OK and "0.24412" in out


def test_sums_grid_csv(tmp_path, capsys):
    out_path = tmp_path / "grid.csv"
    code, _, _ = run_cli(capsys, "sums", "weyl", "--k", "2", "--X", "5",
                         "--grid", "4", "--out", str(out_path))
    assert code == EXIT_OK
    lines = out_path.read_text().strip().splitlines()
    assert lines[0] == "alpha_1,alpha_2,re,im"
    assert len(lines) == 1 + 16
    first = lines[1].split(",")
    assert float(first[2]) == 6.0                          # f(0) = X+1


def test_sums_csv_input_batch(tmp_path, capsys):
    in_path = tmp_path / "alphas.csv"
    np.savetxt(in_path, np.array([[0.0, 0.25], [0.5, 0.0]]), delimiter=",")
    out_path = tmp_path / "vals.csv"
    code, _, _ = run_cli(capsys, "sums", "weyl", "--k", "2", "--X", "4",
                         "--csv", str(in_path), "--out", str(out_path))
    assert code == EXIT_OK
    lines = out_path.read_text().strip().splitlines()
    re0, im0 = float(lines[1].split(",")[2]), float(lines[1].split(",")[3])
    assert abs(complex(re0, im0) - (3 + 2j)) < 1e-9


def test_arcs_membership_mode(capsys):
    code, out, _ = run_cli(capsys, "arcs", "--k", "2", "--X", "100",
                           "--Q", "5", "--alpha", "0.5,0.5")
    assert code == EXIT_OK and "major (q=2, a=1)" in out
    code, out, _ = run_cli(capsys, "arcs", "--k", "2", "--X", "100",
                           "--Q", "5", "--alpha", "0.5,0.6180339887")
    assert code == EXIT_OK and "minor" in out


def test_local_json(tmp_path, capsys):
    out_path = tmp_path / "local.json"
    code, out, _ = run_cli(capsys, "local", "--s", "6", "--k", "2",
                           "--n", "1,2", "--out", str(out_path))
    assert code == EXIT_OK and "insoluble" in out
    data = json.loads(out_path.read_text())
    assert data["verdict"] == "insoluble"


def test_densities_json_meta(tmp_path, capsys):
    out_path = tmp_path / "dens.json"
    code, _, _ = run_cli(capsys, "densities", "--s", "6", "--k", "2",
                         "--n", "96,1934", "--method", "euler",
                         "--pmax", "13", "--out", str(out_path))
    assert code == EXIT_OK
    data = json.loads(out_path.read_text())
    assert set(data["meta"]) == {"code_version", "config_hash", "seed",
                                 "wall_time_s"}
    assert data["series_euler"]["value"] > 0


def test_densities_csv_terms(tmp_path, capsys):
    csv_path = tmp_path / "terms.csv"
    code, _, _ = run_cli(capsys, "densities", "--s", "6", "--k", "2",
                         "--n", "3,3", "--method", "qsum", "--qmax", "6",
                         "--csv", str(csv_path))
    assert code == EXIT_OK
    lines = csv_path.read_text().strip().splitlines()
    assert lines[0] == "q,A_q"
    assert len(lines) == 7


def test_arcs_classify_csv(tmp_path, capsys):
    in_path = tmp_path / "alphas.csv"
    rows = np.array([[0.0, 0.0, 0.0], [0.31, 0.7, 0.6180339887]])
    np.savetxt(in_path, rows, delimiter=",")
    out_path = tmp_path / "classes.csv"
    code, out, _ = run_cli(capsys, "arcs", "--k", "3", "--X", "10000",
                           "--csv", str(in_path), "--out", str(out_path))
    assert code == EXIT_OK
    lines = out_path.read_text().strip().splitlines()
    assert lines[1].split(",")[3] == "W4"
    assert lines[2].split(",")[3] == "W1"


def test_experiment_cache_byte_identical(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("HK_CACHE_DIR", str(tmp_path / "cache"))
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "name": "minor-decay", "s": 12, "k": 3, "X": 2000.0,
        "Q_list": [5, 10, 20], "samples": 60, "seed": 11}))
    out1 = tmp_path / "r1.json"
    out2 = tmp_path / "r2.json"
    code, _, _ = run_cli(capsys, "experiment", "--config", str(cfg),
                         "--out", str(out1))
    assert code == EXIT_OK
    code, out, _ = run_cli(capsys, "experiment", "--config", str(cfg),
                           "--out", str(out2))
    assert code == EXIT_OK and "cache hit" in out
    assert out1.read_bytes() == out2.read_bytes()
    data = json.loads(out1.read_text())
    assert data["meta"]["code_version"]
    assert data["meta"]["seed"] == 11
    assert data["meta"]["config_hash"]
    assert "wall_time_s" in data["meta"]


def test_experiment_rejects_unknown_keys(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"name": "minor-decay", "bogus": 1}))
    code, _, err = run_cli(capsys, "experiment", "--config", str(cfg))
    assert code == EXIT_VALIDATION and "bogus" in err


def test_experiment_rejects_unknown_name(tmp_path, capsys):
    cfg = tmp_path / "bad2.json"
    cfg.write_text(json.dumps({"name": "mystery"}))
    code, _, err = run_cli(capsys, "experiment", "--config", str(cfg))
    assert code == EXIT_VALIDATION


def test_report_merges_and_warns(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("HK_CACHE_DIR", str(tmp_path / "cache"))
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "name": "minor-decay", "s": 12, "k": 3, "X": 2000.0,
        "Q_list": [5, 10, 20], "samples": 60, "seed": 11}))
    results = tmp_path / "results"
    results.mkdir()
    run_cli(capsys, "experiment", "--config", str(cfg),
            "--out", str(results / "a.json"))
    code, out, _ = run_cli(capsys, "report", "--dir", str(results))
    assert code == EXIT_OK
    assert (results / "merged_minor-decay.csv").exists()
    assert "minor-decay: 1 result(s), 3 row(s)" in out
    # single result: merged rows echo the source rows
    merged = (results / "merged_minor-decay.csv").read_text().splitlines()
    assert len(merged) == 4
    # mixed-version warning
    (results / "old.json").write_text(json.dumps(
        {"experiment": "minor-decay", "result": {"rows": []},
         "meta": {"code_version": "0.0.1"}}))
    code, out, _ = run_cli(capsys, "report", "--dir", str(results))
    assert "mixed code versions" in out


def test_report_empty_dir(tmp_path, capsys):
    code, _, err = run_cli(capsys, "report", "--dir", str(tmp_path))
    assert code == EXIT_VALIDATION


def test_verify_identities_cli(capsys):
    code, out, _ = run_cli(capsys, "verify", "identities", "--k", "2",
                           "--X", "10", "--trials", "5")
    assert code == EXIT_OK and "all identity checks pass" in out


def test_result_cache_version_keyed(tmp_path, monkeypatch):
    monkeypatch.setenv("HK_CACHE_DIR", str(tmp_path))
    cache = ResultCache()
    key = cache.key("op", {"a": 1})
    assert cache.get(key) is None
    cache.put(key, b"payload")
    assert cache.get(key) == b"payload"
    # version participates in the key
    import hklab

    other = json.dumps({"op": "op", "inputs": {"a": 1}, "version": "different"},
                       sort_keys=True, separators=(",", ":"))
    import hashlib

    assert hashlib.sha256(other.encode()).hexdigest() != key
