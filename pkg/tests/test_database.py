from sqlmodel import Session, select

from foonc.database import get_engine, record_bench, record_trials
from foonc.models import BenchRecord, TrialRecord
from foonc.services.bench import HIERARCHICAL, TimingReport, TimingRow
from foonc.services.sim_exec import ExecutionReport, MacroResult


def test_record_trials(tmp_path):
    url = f"sqlite:///{tmp_path / 'trials.db'}"
    ok = ExecutionReport(steps_attempted=3, steps_succeeded=3, seed=1)
    ok.macro_results.append(MacroResult("pour_vodka_0", True, steps=["(pick bottle cell_9)"]))
    failed = ExecutionReport(seed=2)
    failed.fail("planning", "node budget exhausted")
    record_trials([ok, failed], "drinking_glass", url)

    with Session(get_engine(url)) as session:
        rows = session.exec(select(TrialRecord).order_by(TrialRecord.seed)).all()
    assert [(r.seed, r.outcome, r.stage) for r in rows] == [(1, "success", None), (2, "failure", "planning")]
    assert rows[0].macro_results[0]["name"] == "pour_vodka_0"
    assert rows[0].plan_length == 1


def test_record_bench(tmp_path):
    url = f"sqlite:///{tmp_path / 'bench.db'}"
    report = TimingReport([TimingRow(1, HIERARCHICAL, "hff", 0.5, 10, 30, plan_length=3)], trials=2)
    stored = record_bench(report, "drinking_glass", url)
    assert stored[0].id is not None

    with Session(get_engine(url)) as session:
        row = session.exec(select(BenchRecord)).one()
    assert (row.n_units, row.mode, row.trials, row.expanded) == (1, HIERARCHICAL, 2, 10.0)
