"""Command-line driver: subcommands, exit codes, file outputs, determinism."""

import csv
import json
import os

import numpy as np
import pytest

import sepcert as sc
from sepcert.cli import main


def run(argv):
    return main([str(a) for a in argv])


def test_generate_werner(tmp_path, capsys):
    assert run(["generate", "werner", "--lambda", "0", "--out", tmp_path]) == 0
    path = tmp_path / "werner_lam0.json"
    ds = sc.read_dataset(path)
    assert sorted(v for _, v in ds.two_items()) == [-1.0, -1.0, -1.0]
    manifest = json.loads((tmp_path / "werner_lam0.manifest.json").read_text())
    assert manifest["config"]["noise"] == 0.0
    assert "timestamp" in manifest


def test_generate_quench_t0(tmp_path):
    assert run(["generate", "quench-1d", "--n", 8, "--time", 0, "--out", tmp_path]) == 0
    ds = sc.read_dataset(tmp_path / "quench1d_n8_t0.json")
    assert abs(ds.one(0, "Z") + 1.0) < 1e-12


def test_generate_thermal(tmp_path):
    assert run(["generate", "thermal", "--model", "ising", "--n", 4, "--g", 1,
                "--temp", 0.1, "--out", tmp_path]) == 0
    ds = sc.read_dataset(tmp_path / "thermal_ising_n4_g1_T0.1.json")
    assert ds.n_sites == 4


def test_generate_product_random(tmp_path):
    assert run(["generate", "product-random", "--n", 5, "--seed", 9,
                "--out", tmp_path]) == 0
    ds = sc.read_dataset(tmp_path / "product_n5_seed9.json")
    assert ds.n_entries() == 15 + 9 * 10


def test_certify_werner_exit_code_and_witness(tmp_path, capsys):
    run(["generate", "werner", "--lambda", "0", "--out", tmp_path])
    code = run(["certify", tmp_path / "werner_lam0.json", "--out", tmp_path])
    assert code == 3  # entangled
    out = capsys.readouterr().out
    assert "entangled" in out
    sol = json.loads((tmp_path / "werner_lam0.solution.json").read_text())
    assert abs(sol["lambda_star"] - 2.0 / 3.0) <= 1e-6
    wit = sc.read_witness(tmp_path / "werner_lam0.witness.json")
    assert abs(wit.separable_bound - 1.0 / 3.0) <= 1e-6


def test_certify_product_exit_zero(tmp_path):
    run(["generate", "product-random", "--n", 4, "--seed", 2, "--out", tmp_path])
    code = run(["certify", tmp_path / "product_n4_seed2.json", "--out", tmp_path])
    assert code == 0
    assert not (tmp_path / "product_n4_seed2.witness.json").exists()


def test_certify_quench_witness_label_groups(tmp_path):
    run(["generate", "quench-1d", "--n", 8, "--time", 2, "--out", tmp_path])
    code = run(["certify", tmp_path / "quench1d_n8_t2.json", "--out", tmp_path])
    assert code == 3
    wit = sc.read_witness(tmp_path / "quench1d_n8_t2.witness.json")
    kinds = {lbl[:2] for lbl in wit.coefficients}
    assert kinds == {"Z[", "XX", "YY", "ZZ"}
    # transverse coefficients come in equal XX/YY pairs
    for lbl, w in wit.coefficients.items():
        if lbl.startswith("XX"):
            assert abs(w - wit.coefficients["YY" + lbl[2:]]) <= 1e-6


def test_certify_missing_file(tmp_path):
    assert run(["certify", tmp_path / "nope.json"]) == 2


def test_certify_dump_layout_and_trace(tmp_path, capsys):
    run(["generate", "werner", "--lambda", "0.2", "--out", tmp_path])
    capsys.readouterr()
    code = run(["certify", tmp_path / "werner_lam0.2.json", "--out", tmp_path,
                "--dump-layout", "--solver-trace"])
    assert code == 3
    out = capsys.readouterr().out
    assert out.splitlines()[0].startswith("1")  # layout grid first
    with open(tmp_path / "werner_lam0.2.trace.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert rows and "relgap" in rows[0]


def test_certify_forced_scheme(tmp_path):
    run(["generate", "quench-1d", "--n", 6, "--time", 1, "--out", tmp_path])
    a = run(["certify", tmp_path / "quench1d_n6_t1.json", "--out", tmp_path,
             "--scheme", "general"])
    b = run(["certify", tmp_path / "quench1d_n6_t1.json", "--out", tmp_path,
             "--scheme", "transverse"])
    assert a == b == 3


def test_witness_eval_roundtrip(tmp_path, capsys):
    run(["generate", "werner", "--lambda", "0", "--out", tmp_path])
    run(["certify", tmp_path / "werner_lam0.json", "--out", tmp_path])
    code = run(["witness", "eval", tmp_path / "werner_lam0.witness.json",
                tmp_path / "werner_lam0.json"])
    assert code == 0
    out = capsys.readouterr().out
    assert "violated=true" in out


def test_oracle_product_search(tmp_path, capsys):
    run(["generate", "werner", "--lambda", "0", "--out", tmp_path])
    run(["certify", tmp_path / "werner_lam0.json", "--out", tmp_path])
    code = run(["oracle", "product-search", tmp_path / "werner_lam0.witness.json",
                "--n", 2, "--restarts", 64, "--out", tmp_path])
    assert code == 0
    doc = json.loads((tmp_path / "product_search.json").read_text())
    assert abs(doc["best_value"] - doc["bound"]) <= 1e-4


def test_sweep_quench(tmp_path):
    code = run(["sweep", "quench-1d", "--n", 6, "--grid", "0.5,1.0",
                "--workers", 1, "--out", tmp_path])
    assert code == 0
    with open(tmp_path / "sweep_quench1d.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert [r["parameter"] for r in rows] == ["0.5", "1.0"]
    assert all(r["status"] == "optimal" for r in rows)
    assert all(float(r["lambda_star"]) > 0 for r in rows)
    assert all(r["concurrence_robustness"] != "" for r in rows)
    assert rows[0]["bipartite_witness"] == ""  # n=6 not divisible by 4


def test_sweep_thermal_heisenberg(tmp_path):
    code = run(["sweep", "thermal", "--model", "heisenberg", "--n", 4,
                "--grid", "0.3,5.0", "--workers", 1, "--out", tmp_path])
    assert code == 0
    with open(tmp_path / "sweep_thermal.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert float(rows[0]["structure_witness"]) < 2.0 < float(rows[1]["structure_witness"])
    assert all(r["concurrence_robustness"] == "" for r in rows)
    assert all(r["bipartite_witness"] != "" for r in rows)


def test_sweep_empty_grid(tmp_path):
    assert run(["sweep", "quench-1d", "--n", 6, "--grid", "", "--out", tmp_path]) == 2


def test_sweep_worker_pool(tmp_path):
    code = run(["sweep", "quench-1d", "--n", 6, "--grid", "0.5,1.0,1.5",
                "--workers", 2, "--out", tmp_path])
    assert code == 0
    with open(tmp_path / "sweep_quench1d.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert [r["parameter"] for r in rows] == ["0.5", "1.0", "1.5"]


def test_rerun_determinism(tmp_path):
    out1 = tmp_path / "a"
    out2 = tmp_path / "b"
    for out in (out1, out2):
        run(["generate", "product-random", "--n", 4, "--seed", 5, "--out", out])
        run(["certify", out / "product_n4_seed5.json", "--out", out])
    ds_a = (out1 / "product_n4_seed5.json").read_text()
    ds_b = (out2 / "product_n4_seed5.json").read_text()
    assert ds_a == ds_b
    sol_a = (out1 / "product_n4_seed5.solution.json").read_text()
    sol_b = (out2 / "product_n4_seed5.solution.json").read_text()
    assert sol_a == sol_b
    # manifests differ only in the timestamp field
    ma = json.loads((out1 / "product_n4_seed5.manifest.json").read_text())
    mb = json.loads((out2 / "product_n4_seed5.manifest.json").read_text())
    for doc in (ma, mb):
        doc.pop("timestamp")
        doc.pop("outputs")
        doc["config"].pop("out")
        doc["config"].pop("dataset")
    assert ma == mb


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as exc:
        run(["generate", "werner"])  # missing --lambda
    assert exc.value.code == 2


def test_entry_point_help(capsys):
    with pytest.raises(SystemExit) as exc:
        run(["--help"])
    assert exc.value.code == 0
    assert "certify" in capsys.readouterr().out
