"""Hierarchical versus monolithic micro planning over growing prefixes of a task tree."""

import csv
import io
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import List, NamedTuple

from foonc.errors import FooncError, NoPlan, ResourceLimit
from foonc.services.foon_graph import retrieve_task_tree
from foonc.services.macro_compiler import compile_task_tree
from foonc.services.micro_domain import micro_domain, micro_goal, relax, scene_symbols
from foonc.services.pddl import render_template
from foonc.services.planner import DEFAULT_NODE_BUDGET, astar, ground, validate
from foonc.services.predicates import ordered_unique, scene_static_facts, scene_to_state
from foonc.services.scene import scene_kitchen
from foonc.services.sim_exec import execute_steps, plan_segment

logger = logging.getLogger(__name__)

HIERARCHICAL = "hierarchical"
MONOLITHIC = "monolithic"
MODES = (HIERARCHICAL, MONOLITHIC)

SOLVED = "solved"
RESOURCE_LIMIT = "resource_limit"
NO_PLAN = "no_plan"

CSV_COLUMNS = (
    "n", "mode", "heuristic", "mean_time", "mean_expanded", "outcome",
    "mean_generated", "plan_length", "flagged",
)

ORDER_SENSITIVE = ("pour-all", "pour-some", "sprinkle")


def ordering_violations(steps):
    """Indices (mix, later) where a container is mixed before something is still poured into it."""
    flagged = []
    steps = list(steps)
    for i, step in enumerate(steps):
        name = getattr(step, "action_name", None) or step.name
        if name != "mix":
            continue
        container = step.args[-1]
        for j in range(i + 1, len(steps)):
            later = steps[j]
            later_name = getattr(later, "action_name", None) or later.name
            if later_name in ORDER_SENSITIVE and later.args[-1] == container:
                flagged.append((i, j))
    return flagged


def accumulated_goal(operators):
    """Goal of a single problem covering every operator in order.

    Each operator first removes what it deletes from the running goal, then
    contributes its own micro goal.
    """
    goal = ()
    for op in operators:
        deleted = set(relax(op.delete_effects))
        goal = ordered_unique((*(f for f in goal if f not in deleted), *micro_goal(op)))
    return goal


@dataclass
class TimingRow:
    n_units: int
    mode: str
    heuristic: str
    wall_time: float = 0.0
    expanded: float = 0.0
    generated: float = 0.0
    outcome: str = SOLVED
    plan_length: int = 0
    flagged: bool = False


@dataclass
class TimingReport:
    rows: List[TimingRow] = field(default_factory=list)
    trials: int = 1

    def cell(self, n, mode, heuristic):
        for row in self.rows:
            if (row.n_units, row.mode, row.heuristic) == (n, mode, heuristic):
                return row
        raise KeyError((n, mode, heuristic))

    def to_dict(self):
        return {"trials": self.trials, "rows": [asdict(r) for r in self.rows]}


def _hierarchical_run(operators, scene, heuristic, node_budget):
    expanded = generated = 0
    wall = 0.0
    steps = []
    for op in operators:
        segment = plan_segment(op, scene, heuristic, node_budget)
        scene = execute_steps(scene, segment.steps)
        steps.extend(segment.steps)
        expanded += segment.stats.expanded
        generated += segment.stats.generated
        wall += segment.stats.wall_time
    return wall, expanded, generated, steps


def plan_monolithic(operators, scene, heuristic="hmax", node_budget=DEFAULT_NODE_BUDGET):
    """One micro problem for the whole operator prefix, goal accumulated across operators."""
    init = scene_to_state(scene).facts | scene_static_facts(scene)
    missing = [f for f in relax(operators[0].preconditions) if f not in init]
    if missing:
        raise NoPlan(f"{operators[0].name}: unsatisfied " + " ".join(str(f) for f in missing))
    task = ground(micro_domain(), scene_symbols(scene), init, accumulated_goal(operators))
    plan = astar(task, heuristic, node_budget)
    if not validate(plan, task):
        raise NoPlan("monolithic plan does not validate")
    return plan


def _monolithic_run(operators, scene, heuristic, node_budget):
    plan = plan_monolithic(operators, scene, heuristic, node_budget)
    return plan.stats.wall_time, plan.stats.expanded, plan.stats.generated, list(plan.steps)


def _run_cell(job):
    operators, scene, n, mode, heuristic, trials, node_budget = job
    row = TimingRow(n, mode, heuristic)
    runner = _hierarchical_run if mode == HIERARCHICAL else _monolithic_run
    totals = [0.0, 0, 0]
    started = time.perf_counter()
    for _ in range(trials):
        try:
            wall, expanded, generated, steps = runner(operators[:n], scene, heuristic, node_budget)
        except ResourceLimit as e:
            row.outcome = RESOURCE_LIMIT
            row.expanded, row.generated = e.expanded, e.generated
            row.wall_time = time.perf_counter() - started
            logger.info("n=%d %s %s: resource limit after %d expansions", n, mode, heuristic, e.expanded)
            return row
        except FooncError as e:
            row.outcome = NO_PLAN
            logger.warning("n=%d %s %s: %s", n, mode, heuristic, e)
            return row
        totals[0] += wall
        totals[1] += expanded
        totals[2] += generated
    row.wall_time = totals[0] / trials
    row.expanded = totals[1] / trials
    row.generated = totals[2] / trials
    row.plan_length = len(steps)
    row.flagged = bool(ordering_violations(steps))
    logger.info("n=%d %s %s: %.0f expanded, %d steps", n, mode, heuristic, row.expanded, row.plan_length)
    return row


def run_comparison(
    foon,
    goal,
    scene,
    n_range=None,
    heuristics=("hmax", "hff"),
    trials=10,
    node_budget=DEFAULT_NODE_BUDGET,
    workers=1,
):
    """Time both planning modes for every (n, mode, heuristic) cell.

    `n_range` defaults to 1..N for a task tree of N units. Cells that exhaust
    the node budget are recorded as resource_limit rows.
    """
    tree = retrieve_task_tree(foon, goal, scene_kitchen(scene))
    operators = compile_task_tree(tree)
    n_values = list(n_range) if n_range else list(range(1, len(operators) + 1))
    for n in n_values:
        if not 1 <= n <= len(operators):
            raise ValueError(f"n={n} is outside 1..{len(operators)}")

    jobs = [
        (operators, scene, n, mode, heuristic, trials, node_budget)
        for n in n_values
        for mode in MODES
        for heuristic in heuristics
    ]
    if workers <= 1:
        rows = [_run_cell(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_cell, jobs))
    return TimingReport(rows, trials)


class PlotData(NamedTuple):
    csv: str
    script: str


def emit_plot_data(report, csv_name="bench.csv"):
    """CSV of the report rows plus a gnuplot script that plots them."""
    buffer = io.StringIO()
    buffer.write("# mean over trials; plot mean_expanded or mean_time on a log scale\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in report.rows:
        writer.writerow(
            [
                row.n_units,
                row.mode,
                row.heuristic,
                f"{row.wall_time:.6f}",
                f"{row.expanded:.1f}",
                row.outcome,
                f"{row.generated:.1f}",
                row.plan_length,
                int(row.flagged),
            ]
        )
    series = sorted({(r.mode, r.heuristic) for r in report.rows})
    script = render_template("plot.gp.j2", csv_name=csv_name, series=series)
    return PlotData(buffer.getvalue(), script)
