import logging
import os

from dotenv import load_dotenv
from sqlmodel import Session, SQLModel, create_engine

from foonc.config import DATABASE_ENV_VAR
from foonc.models import BenchRecord, TrialRecord

load_dotenv()

logger = logging.getLogger(__name__)

# sqlite fallback for local runs
DEFAULT_DATABASE_URL = "sqlite:///foonc.db"

_engines = {}


def database_url(url=None):
    return url or os.environ.get(DATABASE_ENV_VAR) or DEFAULT_DATABASE_URL


def get_engine(url=None):
    url = database_url(url)
    engine = _engines.get(url)
    if engine is None:
        connect_args = {"check_same_thread": False} if url.startswith("sqlite") else {}
        engine = create_engine(url, echo=False, connect_args=connect_args)
        _engines[url] = engine
    return engine


def create_db_and_tables(url=None):
    engine = get_engine(url)
    SQLModel.metadata.create_all(engine)
    return engine


def record_trials(reports, goal, url=None):
    """Store one TrialRecord per execution report; returns the stored rows."""
    engine = create_db_and_tables(url)
    records = [
        TrialRecord(
            goal=goal,
            mode=report.mode,
            seed=report.seed,
            outcome=report.outcome,
            stage=report.stage,
            reason=report.reason,
            steps_attempted=report.steps_attempted,
            steps_succeeded=report.steps_succeeded,
            plan_length=report.plan_length,
            macro_results=report.to_dict()["macro_results"],
        )
        for report in reports
    ]
    with Session(engine) as session:
        for record in records:
            session.add(record)
        session.commit()
        for record in records:
            session.refresh(record)
    logger.info("recorded %d trials", len(records))
    return records


def record_bench(report, goal, url=None):
    engine = create_db_and_tables(url)
    records = [
        BenchRecord(
            goal=goal,
            n_units=row.n_units,
            mode=row.mode,
            heuristic=row.heuristic,
            wall_time=row.wall_time,
            expanded=row.expanded,
            generated=row.generated,
            outcome=row.outcome,
            plan_length=row.plan_length,
            flagged=row.flagged,
            trials=report.trials,
        )
        for row in report.rows
    ]
    with Session(engine) as session:
        for record in records:
            session.add(record)
        session.commit()
        for record in records:
            session.refresh(record)
    logger.info("recorded %d bench rows", len(records))
    return records
