import csv
import json

import pytest

from cli import build_parser, main
from conftest import CONFIGS
from scripts.errors import ConfigError
from scripts.experiment_config import config_hash
from scripts.tasks import TASK_NAMES, run_task


def write_config(tmp_path, name, edit=None):
    data = json.loads((CONFIGS / name).read_text(encoding="utf-8"))
    if edit:
        edit(data)
    path = tmp_path / f"edited_{name}"
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


def run(task, config, out, *extra):
    return main([task, "--config", str(config), "--out", str(out), *extra])


def read_json(path):
    return json.loads(path.read_text(encoding="utf-8"))


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))


def test_parser_lists_every_task():
    parser = build_parser()
    for task in TASK_NAMES:
        args = parser.parse_args([task, "--config", "x.json"])
        assert args.task == task and args.threads is None
    with pytest.raises(SystemExit):
        parser.parse_args(["-v", "-q", "validate", "--config", "x.json"])


def test_validate_exit_codes(tmp_path):
    assert run("validate", CONFIGS / "tate.json", tmp_path / "ok") == 0
    assert read_json(tmp_path / "ok" / "validation.json")["ok"] is True

    def bad_schema(data):
        data["prime"] = "three"

    def asymmetric(data):
        data["coupling"]["weights"] = [[0, "1/2"], ["1/3", 0]]

    def divergent(data):
        data["coupling"] = {"alpha_z": "1/2"}

    assert run("validate", write_config(tmp_path, "tate.json", bad_schema), tmp_path / "schema") == 2
    assert run("validate", write_config(tmp_path, "tate_coupled.json", asymmetric), tmp_path / "weights") == 2
    assert run("validate", write_config(tmp_path, "genus2.json", divergent), tmp_path / "divergent") == 3
    manifest = read_json(tmp_path / "divergent" / "manifest.json")
    assert manifest["exit_code"] == 3
    assert manifest["summary"]["failures"] == 1

    def divergent_alpha(data):
        data["components"][0]["alpha"] = "1/2"

    assert run("validate", write_config(tmp_path, "genus2.json", divergent_alpha), tmp_path / "alpha") == 3
    assert read_json(tmp_path / "alpha" / "manifest.json")["summary"]["failures"] == 1


def test_missing_config(tmp_path):
    assert run("spectrum", tmp_path / "nope.json", tmp_path / "out") == 2


def test_divergent_spectrum_writes_manifest(tmp_path):
    def divergent(data):
        data["coupling"] = {"alpha_z": "1/2"}

    assert run("spectrum", write_config(tmp_path, "genus2.json", divergent), tmp_path / "out") == 3
    manifest = read_json(tmp_path / "out" / "manifest.json")
    assert manifest["summary"]["error"] == "DivergenceError"


def test_spectrum_bundle(tmp_path):
    out = tmp_path / "spectrum"
    assert run("spectrum", CONFIGS / "tate.json", out) == 0
    manifest = read_json(out / "manifest.json")
    raw = json.loads((CONFIGS / "tate.json").read_text(encoding="utf-8"))
    assert manifest["task"] == "spectrum"
    assert manifest["config_hash"] == config_hash(raw)
    assert set(manifest["versions"]) == {"ultralap", "python", "numpy", "scipy"}
    assert {"leaves.csv", "spectrum.csv", "spectrum_aggregated.csv", "summary.json"} <= set(manifest["files"])
    rows = read_csv(out / "spectrum.csv")
    assert list(rows[0]) == ["component", "anchor_id", "depth", "eigenvalue", "multiplicity", "tail_bound"]
    assert sum(int(r["multiplicity"]) for r in rows) == 9
    summary = read_json(out / "summary.json")
    assert summary["largest_nonzero"] == pytest.approx(-(3 + 8 / 9))
    assert summary["eigen_residual"] <= 1e-8
    assert summary["refinement_delta"] <= 1e-10
    assert all(summary["operator_checks"].values())
    assert len(read_csv(out / "spectrum_aggregated.csv")) == 3


def test_heat_and_kernel(tmp_path):
    assert run("heat", CONFIGS / "tate.json", tmp_path / "heat") == 0
    heat = read_json(tmp_path / "heat" / "summary.json")
    assert heat["mass_drift"] <= 1e-12
    assert heat["semigroup_residual"] <= 1e-8
    assert len(read_csv(tmp_path / "heat" / "heat.csv")) == 4 * 9

    assert run("kernel", CONFIGS / "tate.json", tmp_path / "kernel") == 0
    rows = read_csv(tmp_path / "kernel" / "kernel.csv")
    assert len(rows) == 3 * 9
    early = [r for r in rows if float(r["time"]) == 0.1]
    assert all(r["converged"] == "false" for r in early)
    assert all(r["converged"] == "true" for r in rows if float(r["time"]) == 1.0)
    assert read_json(tmp_path / "kernel" / "summary.json")["unconverged"] == 9


def test_sample_is_reproducible(tmp_path):
    assert run("sample", CONFIGS / "tate.json", tmp_path / "a", "--seed", "5") == 0
    assert run("sample", CONFIGS / "tate.json", tmp_path / "b", "--seed", "5", "--threads", "3") == 0
    first = (tmp_path / "a" / "paths.csv").read_bytes()
    assert first == (tmp_path / "b" / "paths.csv").read_bytes()
    summary = read_json(tmp_path / "a" / "summary.json")
    assert summary["seed"] == 5
    assert summary["total_variation"] <= 0.1
    assert run("sample", CONFIGS / "tate.json", tmp_path / "c", "--seed", "6") == 0
    assert (tmp_path / "c" / "paths.csv").read_bytes() != first


@pytest.mark.parametrize("name", ["tate.json", "genus2.json"])
def test_bvp_supported(tmp_path, name):
    assert run("bvp", CONFIGS / name, tmp_path) == 0
    report = read_json(tmp_path / "bvp_report.json")
    assert report["supported"] is True
    assert report["violations"] == []
    assert (tmp_path / "bvp_solution.csv").exists()


def test_bvp_unsupported(tmp_path):
    def indicator(data):
        data["bvp"]["initial"] = {"type": "indicator", "leaves": [0]}

    assert run("bvp", write_config(tmp_path, "tate.json", indicator), tmp_path / "out") == 4
    report = read_json(tmp_path / "out" / "bvp_report.json")
    assert report["supported"] is False
    assert report["reason"] == "expansion"
    assert report["solution_csv_path"] is None
    assert report["boundary"] == list(range(3, 9))


def test_run_task_default_output(monkeypatch, tmp_path):
    monkeypatch.setattr("scripts.experiment_config.platformdirs.user_data_dir", lambda name: str(tmp_path / name))
    result = run_task("validate", CONFIGS / "tate.json")
    assert result.exit_code == 0
    assert result.out_dir.parent.parent == tmp_path / "ultralap" / "runs"
    assert (result.out_dir / "manifest.json").exists()
    with pytest.raises(ConfigError):
        run_task("plot", CONFIGS / "tate.json", tmp_path)
