import json

import pytest

from foonc.cli import main
from foonc.config import DATA_DIR

VODKA_ICE = str(DATA_DIR / "vodka_ice.foon")
VODKA_ICE_KITCHEN = str(DATA_DIR / "vodka_ice_kitchen.txt")
RECIPE = str(DATA_DIR / "bloody_mary.foon")


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    monkeypatch.delenv("FOONC_CONFIG", raising=False)
    monkeypatch.delenv("FOONC_DATABASE_URL", raising=False)


def recipe_args(*extra, out):
    return [*extra, "--foon", RECIPE, "--goal", "drinking_glass", "--out", str(out)]


def test_validate_reports_units(capsys):
    assert main(["validate", VODKA_ICE]) == 0
    assert "ok, 2 units" in capsys.readouterr().out


def test_validate_missing_terminator(tmp_path, capsys):
    path = tmp_path / "broken.foon"
    path.write_text("O\tbottle\nI\tvodka\nM\tpour\nO\tbottle\n")
    assert main(["validate", str(path)]) == 1
    assert "not terminated" in capsys.readouterr().out


def test_validate_empty_file_only_warns(tmp_path):
    path = tmp_path / "empty.foon"
    path.write_text("")
    assert main(["validate", str(path)]) == 0


def test_validate_missing_file(tmp_path):
    assert main(["validate", str(tmp_path / "nope.foon")]) == 2


def test_compile_writes_documents(tmp_path, golden):
    args = ["compile", "--foon", VODKA_ICE, "--kitchen", VODKA_ICE_KITCHEN, "--goal", "drinking_glass", "--out", str(tmp_path)]
    assert main(args) == 0
    assert (tmp_path / "macro_domain.pddl").read_text() == golden("vodka_ice_macro_domain.pddl")
    assert (tmp_path / "macro_problem.pddl").read_text() == golden("vodka_ice_macro_problem.pddl")
    assert "(define (domain foon_micro)" in (tmp_path / "micro_domain.pddl").read_text()


def test_compile_unknown_goal(tmp_path):
    args = ["compile", "--foon", VODKA_ICE, "--kitchen", VODKA_ICE_KITCHEN, "--goal", "teapot", "--out", str(tmp_path)]
    assert main(args) == 2


def test_retrieve_lists_units(tmp_path, capsys):
    assert main(recipe_args("retrieve", out=tmp_path)) == 0
    assert "9 units" in capsys.readouterr().out


def test_merge_writes_reparsable_file(tmp_path):
    assert main(["merge", "--foon", VODKA_ICE, RECIPE, "--out", str(tmp_path)]) == 0
    assert main(["validate", str(tmp_path / "merged.foon")]) == 0


def test_plan_budget_exhausted(tmp_path):
    assert main(recipe_args("plan", "--node-budget", "1", out=tmp_path)) == 3


def test_plan_for_satisfied_goal_is_empty(tmp_path):
    kitchen = tmp_path / "kitchen.txt"
    kitchen.write_text("O\tdrinking_glass\nI\tvodka,ice\n")
    args = ["plan", "--foon", VODKA_ICE, "--kitchen", str(kitchen), "--goal", "drinking_glass", "--out", str(tmp_path)]
    assert main(args) == 0
    assert json.loads((tmp_path / "plan.json").read_text())["length"] == 0


def test_plan_then_execute_with_library(tmp_path):
    library = tmp_path / "contexts" / "library.json"
    assert main(recipe_args("plan", "--library-out", "contexts/library.json", out=tmp_path)) == 0
    plan = tmp_path / "plan.json"
    assert json.loads(plan.read_text())["length"] == 26
    assert main(["execute", "--plan", str(plan), "--library", str(library), "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["outcome"] == "success"
    assert len(report["resolved_motions"]) == 26


def test_execute_with_empty_library_fails(tmp_path):
    assert main(recipe_args("plan", out=tmp_path)) == 0
    library = tmp_path / "library.json"
    library.write_text(json.dumps({"version": 1, "categories": {}, "contexts": []}))
    args = ["execute", "--plan", str(tmp_path / "plan.json"), "--library", str(library), "--out", str(tmp_path)]
    assert main(args) == 4
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["stage"] == "context"


def test_execute_missing_plan_file(tmp_path):
    assert main(["execute", "--plan", str(tmp_path / "plan.json"), "--out", str(tmp_path)]) == 2


def test_config_file_supplies_inputs(tmp_path, monkeypatch):
    config = tmp_path / "foonc.json"
    config.write_text(json.dumps({"foon": [RECIPE], "goal": "drinking_glass", "out_dir": str(tmp_path)}))
    monkeypatch.setenv("FOONC_CONFIG", str(config))
    assert main(["retrieve"]) == 0


def test_bench_writes_plot_files(tmp_path):
    config = tmp_path / "bench.json"
    config.write_text(json.dumps({"n_range": [1], "trials": 1, "heuristics": ["hff"]}))
    assert main(recipe_args("bench", "--config", str(config), out=tmp_path)) == 0
    lines = (tmp_path / "bench.csv").read_text().splitlines()
    assert len(lines) == 4
    assert "set logscale y" in (tmp_path / "bench.gp").read_text()


@pytest.mark.parametrize("name", ["../library.json", "/tmp/foonc-library.json"])
def test_library_out_stays_inside_out_dir(tmp_path, name):
    out = tmp_path / "out"
    assert main(recipe_args("plan", "--library-out", name, out=out)) == 2
    assert not (tmp_path / "library.json").exists()
    assert not (out / "plan.json").exists()
