from datetime import datetime
from typing import List, Optional

from sqlalchemy import Column
from sqlmodel import JSON, Field, SQLModel

# Models


class TrialRecord(SQLModel, table=True):
    __tablename__ = "trials"
    id: Optional[int] = Field(default=None, primary_key=True)
    goal: str = Field(index=True)
    mode: str  # whole, partial
    seed: Optional[int] = None
    outcome: str  # success, failure
    stage: Optional[str] = None  # stage that failed
    reason: Optional[str] = None
    steps_attempted: int = 0
    steps_succeeded: int = 0
    plan_length: int = 0
    macro_results: List[dict] = Field(sa_column=Column(JSON), default=[])
    created_at: datetime = Field(default_factory=datetime.utcnow)


class BenchRecord(SQLModel, table=True):
    __tablename__ = "bench_rows"
    id: Optional[int] = Field(default=None, primary_key=True)
    goal: str = Field(index=True)
    n_units: int
    mode: str  # hierarchical, monolithic
    heuristic: str
    wall_time: float
    expanded: float
    generated: float
    outcome: str  # solved, resource_limit, no_plan
    plan_length: int = 0
    flagged: bool = Field(default=False)
    trials: int = 1
    created_at: datetime = Field(default_factory=datetime.utcnow)
