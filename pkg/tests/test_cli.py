import json
from pathlib import Path

import pytest

from spacer_ga import bench
from spacer_ga.cli import main

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def write_config(tmp_path, doc, name="run.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def small_moox(**ga):
    doc = {
        "landscape": {"kind": "reference_moox"},
        "ga": {"population_size": 6, "max_generation": 20, "mutation": {"probability_pct": 50},
               "selection": "roulette", "seed": 3, **ga},
        "batch": {"runs": 8, "root_seed": 0},
    }
    return doc


@pytest.mark.parametrize(
    "config, expected",
    [("zno.json", "argmax t=30nm, simulations=81"),
     ("moox.json", "argmax t=8nm, simulations=31"),
     ("two_layer.json", "argmax ZnO=24nm,MoOx=8nm, simulations=2511")],
)
def test_sweep_reports_argmax(tmp_path, capsys, config, expected):
    out = tmp_path / "sweep"
    assert main(["sweep", "--config", str(CONFIGS / config), "--out", str(out)]) == 0
    assert expected in capsys.readouterr().out
    doc = json.loads(out.with_suffix(".json").read_text())
    assert doc["simulation_count"] == int(expected.rsplit("=", 1)[1])
    assert out.with_suffix(".csv").exists()


def test_zero_step_is_config_error(tmp_path, capsys):
    doc = {"grid": [{"name": "t", "min_nm": 0, "max_nm": 30, "step_nm": 0}], "landscape": {"kind": "reference_moox"}}
    out = tmp_path / "sweep"
    assert main(["sweep", "--config", write_config(tmp_path, doc), "--out", str(out)]) == 2
    assert "step_nm" in capsys.readouterr().err
    assert list(tmp_path.iterdir()) == [tmp_path / "run.json"]


def test_mismatched_grid_is_config_error(tmp_path):
    doc = {"grid": [{"name": "MoOx", "min_nm": 0, "max_nm": 20}], "landscape": {"kind": "reference_moox"}}
    assert main(["sweep", "--config", write_config(tmp_path, doc), "--out", str(tmp_path / "s")]) == 2


def test_unknown_key_is_config_error(tmp_path, capsys):
    doc = small_moox(elitism=False)
    assert main(["ga", "--config", write_config(tmp_path, doc), "--out", str(tmp_path / "r.json")]) == 2
    assert "elitism" in capsys.readouterr().err
    assert not (tmp_path / "r.json").exists()


def test_bad_csv_is_data_error(tmp_path, capsys):
    (tmp_path / "land.csv").write_text("t,fitness\n0,1\n1,oops\n")
    doc = {"landscape": {"kind": "tabulated", "path": "land.csv"}}
    assert main(["sweep", "--config", write_config(tmp_path, doc), "--out", str(tmp_path / "s")]) == 3
    assert "row 3" in capsys.readouterr().err
    assert main(["landscape", "validate", "--csv", str(tmp_path / "land.csv")]) == 3


def test_missing_csv_is_data_error(tmp_path):
    doc = {"landscape": {"kind": "tabulated", "path": "absent.csv"}}
    assert main(["sweep", "--config", write_config(tmp_path, doc), "--out", str(tmp_path / "s")]) == 3


def test_ga_deterministic_and_seed_override(tmp_path, capsys):
    cfg = write_config(tmp_path, small_moox())
    paths = [tmp_path / f"{n}.json" for n in "abc"]
    assert main(["ga", "--config", cfg, "--out", str(paths[0])]) == 0
    assert main(["ga", "--config", cfg, "--out", str(paths[1])]) == 0
    assert main(["ga", "--config", cfg, "--out", str(paths[2]), "--seed", "4"]) == 0
    a, b, c = (p.read_bytes() for p in paths)
    assert a == b
    assert a != c
    doc = json.loads(a)
    assert doc["unique_evaluations"] <= 31
    assert "unique_evaluations=" in capsys.readouterr().out


def test_bench_single_run(tmp_path):
    out = tmp_path / "bench.csv"
    cfg = write_config(tmp_path, small_moox())
    assert main(["bench", "--config", cfg, "--out", str(out), "--runs", "1", "--workers", "1"]) == 0
    rows = bench.read_csv(out.read_text())
    assert len(rows) == 1
    assert rows[0]["std_unique_evals"] == 0.0
    assert (tmp_path / "bench.txt").exists()


def test_singleton_grid_equals_bench(tmp_path):
    doc = small_moox()
    doc["grid_search"] = {"populations": [6], "generations": [20], "mutation_pct": [50], "runs": 8}
    cfg = write_config(tmp_path, doc)
    b, g = tmp_path / "bench.csv", tmp_path / "grid.csv"
    assert main(["bench", "--config", cfg, "--out", str(b), "--workers", "2"]) == 0
    assert main(["grid", "--config", cfg, "--out", str(g), "--seed", "0", "--workers", "1"]) == 0
    assert b.read_text() == g.read_text()


def test_grid_budget_exceeded(tmp_path, capsys):
    doc = small_moox()
    doc["grid_search"] = {"populations": [4, 6], "generations": [5, 10], "mutation_pct": [25, 75],
                          "runs": 10, "budget": 50}
    out = tmp_path / "grid.csv"
    assert main(["grid", "--config", write_config(tmp_path, doc), "--out", str(out)]) == 4
    assert "budget" in capsys.readouterr().err
    assert not out.exists() and not (tmp_path / "grid.txt").exists()


def test_bench_without_batch_section(tmp_path):
    doc = small_moox()
    del doc["batch"]
    assert main(["bench", "--config", write_config(tmp_path, doc), "--out", str(tmp_path / "b.csv")]) == 2


def test_landscape_export_validate_round_trip(tmp_path, capsys):
    csv_path = tmp_path / "two_layer.csv"
    assert main(["landscape", "export", "--config", str(CONFIGS / "two_layer.json"), "--out", str(csv_path)]) == 0
    assert main(["landscape", "validate", "--csv", str(csv_path)]) == 0
    assert "ok: 2511 points" in capsys.readouterr().out
    doc = {"landscape": {"kind": "tabulated", "path": csv_path.name}}
    assert main(["sweep", "--config", write_config(tmp_path, doc), "--out", str(tmp_path / "s")]) == 0
    assert "argmax ZnO=24nm,MoOx=8nm, simulations=2511" in capsys.readouterr().out


def test_missing_config_file(tmp_path):
    assert main(["sweep", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path / "s")]) == 2


def test_bad_seed_argument(tmp_path):
    with pytest.raises(SystemExit) as info:
        main(["ga", "--config", str(CONFIGS / "moox.json"), "--out", str(tmp_path / "r"), "--seed", "-1"])
    assert info.value.code == 2
