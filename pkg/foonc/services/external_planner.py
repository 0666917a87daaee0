"""Adapter for an external PDDL planner such as Fast Downward.

The command is a template with the tokens {domain}, {problem} and
{plan_out}; it must write one `(action arg ...)` per line to {plan_out}.
"""

import logging
import shlex
import subprocess
import tempfile
import time
from pathlib import Path

from foonc.errors import ExternalPlannerFailed
from foonc.services.planner import Plan, PlanStats, validate

logger = logging.getLogger(__name__)


def parse_plan_text(text):
    """(name, args) pairs from planner output; `;` lines are comments."""
    steps = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split(";", 1)[0].strip()
        if not line:
            continue
        if not (line.startswith("(") and line.endswith(")")):
            raise ExternalPlannerFailed(f"plan line {number} is not an action: {raw!r}")
        name, *args = line[1:-1].lower().split()
        steps.append((name, tuple(args)))
    return steps


def run_external_planner(command, domain, problem, task, timeout=None):
    started = time.perf_counter()
    with tempfile.TemporaryDirectory(prefix="foonc-") as workdir:
        workdir = Path(workdir)
        domain_path = workdir / "domain.pddl"
        problem_path = workdir / "problem.pddl"
        plan_path = workdir / "plan.txt"
        domain.write(domain_path)
        problem.write(problem_path)

        argv = [
            token.format(domain=domain_path, problem=problem_path, plan_out=plan_path)
            for token in shlex.split(command)
        ]
        logger.info("running external planner: %s", " ".join(argv))
        try:
            completed = subprocess.run(argv, capture_output=True, text=True, timeout=timeout, cwd=workdir)
        except (OSError, subprocess.TimeoutExpired) as e:
            raise ExternalPlannerFailed(f"external planner could not run: {e}")
        if completed.returncode != 0:
            logger.error("external planner stderr: %s", completed.stderr.strip())
            raise ExternalPlannerFailed(f"external planner exited with code {completed.returncode}")
        if not plan_path.exists():
            raise ExternalPlannerFailed("external planner wrote no plan file")
        pairs = parse_plan_text(plan_path.read_text(encoding="utf-8"))

    steps = []
    for name, args in pairs:
        action = task.lookup(name, args)
        if action is None:
            raise ExternalPlannerFailed(f"plan step ({name} {' '.join(args)}) is not a ground action of the task")
        steps.append(action)
    plan = Plan(tuple(steps), PlanStats(0, 0, time.perf_counter() - started))
    if not validate(plan, task):
        raise ExternalPlannerFailed("external plan does not validate")
    return plan
