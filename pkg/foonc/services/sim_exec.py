"""Symbolic execution of micro plans and the whole/partial recipe drivers."""

import json
import logging
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple

from foonc.errors import FooncError, IngredientCollision, NoPlan, PreconditionViolated
from foonc.services.action_context import GroundStep, resolve_plan
from foonc.services.foon_graph import FunctionalUnit, TaskTree, retrieve_task_tree
from foonc.services.macro_compiler import compile_task_tree
from foonc.services.micro_domain import (
    build_micro_problem,
    emit_micro_domain,
    emit_micro_problem,
    micro_domain,
    micro_goal,
    operator_named,
    relax,
    scene_symbols,
)
from foonc.services.pddl import parse_atoms, render_template
from foonc.services.planner import DEFAULT_NODE_BUDGET, PlanStats, ground, solve, validate
from foonc.services.predicates import object_node_to_predicates, scene_static_facts, scene_to_state
from foonc.services.scene import UPRIGHT, random_scene, scene_kitchen

logger = logging.getLogger(__name__)

PLAN_FORMAT_VERSION = 1
POURING_MOTIONS = ("pour", "sprinkle")

WHOLE = "whole"
PARTIAL = "partial"


@dataclass(frozen=True)
class TrialMode:
    kind: str = WHOLE
    seed: Optional[int] = None

    @classmethod
    def partial(cls, seed):
        return cls(PARTIAL, seed)

    def __str__(self):
        return self.kind if self.seed is None else f"{self.kind}({self.seed})"


def _as_step(step):
    if isinstance(step, GroundStep):
        return step
    return GroundStep(step.name, step.args)


def apply_action(scene, step):
    """Execute one micro action on the scene; raises PreconditionViolated."""
    step = _as_step(step)
    try:
        op = operator_named(step.action_name)
    except KeyError:
        raise PreconditionViolated(step, []) from None
    if len(step.args) != len(op.parameters):
        raise ValueError(f"{step} expects {len(op.parameters)} arguments")
    binding = {name: arg for (name, _), arg in zip(op.parameters, step.args)}
    facts = scene_to_state(scene).facts | scene_static_facts(scene)
    try:
        required = [f.substitute(binding) for f in op.preconditions]
    except ValueError:
        raise PreconditionViolated(step, []) from None
    missing = [f for f in required if f not in facts]
    if missing:
        raise PreconditionViolated(step, missing)

    name, args = step.action_name, step.args
    occupants = dict(scene.occupants)
    stacks = dict(scene.stacks)

    if name == "pick":
        obj, surface = args
        if scene.is_cell(surface):
            del occupants[surface]
        else:
            del stacks[obj]
        return replace(scene, occupants=occupants, stacks=stacks, gripper=obj)

    if name in ("place-small", "place-large"):
        obj, cell = args
        occupants[cell] = obj
        ordered = {c.id: occupants[c.id] for c in scene.cells if c.id in occupants}
        return replace(scene, occupants=ordered, gripper=None)

    if name in ("pour-all", "pour-some", "sprinkle"):
        item, source, target = args
        if name == "pour-all":
            src = scene.object(source)
            scene = scene.with_object(replace(src, contents=tuple(c for c in src.contents if c != item)))
        tgt = scene.object(target)
        if item not in tgt.contents:
            scene = scene.with_object(replace(tgt, contents=tgt.contents + (item,)))
        return scene

    if name == "mix":
        _, container = args
        obj = scene.object(container)
        if "mixed" not in obj.attributes:
            scene = scene.with_object(replace(obj, attributes=obj.attributes + ("mixed",)))
        return scene

    if name == "insert":
        item, target = args
        tgt = scene.object(target)
        scene = scene.with_object(replace(tgt, contents=tgt.contents + (item,)))
        return replace(scene, gripper=None)

    if name == "flip":
        (obj,) = args
        return scene.with_object(replace(scene.object(obj), orientation=UPRIGHT))

    raise PreconditionViolated(step, [])


def target_cell(scene, step, last_cells):
    symbol = step.args[-1]
    if scene.is_cell(symbol):
        return scene.cell(symbol).coord
    if scene.has_object(symbol):
        cell_id = scene.resting_cell(symbol) or last_cells.get(symbol)
        if cell_id is not None:
            return scene.cell(cell_id).coord
    return None


def locate_steps(plan, scene):
    """Attach target cells to plan steps by replaying them on the scene."""
    steps = plan.steps if hasattr(plan, "steps") else plan
    located = []
    last_cells = {}
    for raw in steps:
        step = _as_step(raw)
        located.append(step.located(target_cell(scene, step, last_cells)))
        if step.action_name == "pick":
            last_cells[step.args[0]] = scene.resting_cell(step.args[0])
        scene = apply_action(scene, step)
    return located


def execute_steps(scene, steps):
    for step in steps:
        scene = apply_action(scene, step)
    return scene


def scene_facts(scene):
    return scene_to_state(scene).facts | scene_static_facts(scene)


@dataclass(frozen=True)
class Segment:
    """The micro plan that realizes one macro operator."""

    macro: str
    goal: Tuple = ()
    steps: Tuple[GroundStep, ...] = ()
    stats: PlanStats = PlanStats()


def plan_segment(macro_po, scene, heuristic="hmax", node_budget=DEFAULT_NODE_BUDGET, external_cmd=None):
    """Plan one macro operator from the live scene."""
    current = scene_to_state(scene).union(scene_static_facts(scene))
    problem = build_micro_problem(macro_po, current, scene_symbols(scene))
    task = ground(micro_domain(), problem.objects, problem.init.facts, problem.goal)
    documents = (emit_micro_domain(), emit_micro_problem(problem)) if external_cmd else None
    plan = solve(task, heuristic, node_budget, external_cmd, documents)
    if not validate(plan, task):
        raise NoPlan(f"{macro_po.name}: planner returned an invalid plan")
    steps = locate_steps(plan, scene)
    logger.info("%s: %d micro steps", macro_po.name, len(steps))
    return Segment(macro_po.name, problem.goal, tuple(steps), plan.stats)


@dataclass
class RecipePlan:
    segments: List[Segment]
    final_scene: object

    @property
    def steps(self):
        return [s for seg in self.segments for s in seg.steps]

    def __len__(self):
        return sum(len(seg.steps) for seg in self.segments)


def plan_recipe(tree, scene, heuristic="hmax", node_budget=DEFAULT_NODE_BUDGET, external_cmd=None):
    """Hierarchical planning: one micro problem per macro operator, scene re-read in between."""
    segments = []
    for macro_po in compile_task_tree(tree):
        segment = plan_segment(macro_po, scene, heuristic, node_budget, external_cmd)
        scene = execute_steps(scene, segment.steps)
        segments.append(segment)
    return RecipePlan(segments, scene)


# reports

@dataclass
class MacroResult:
    name: str
    achieved: bool
    violated_facts: List[str] = field(default_factory=list)
    steps: List[str] = field(default_factory=list)


@dataclass
class ExecutionReport:
    steps_attempted: int = 0
    steps_succeeded: int = 0
    macro_results: List[MacroResult] = field(default_factory=list)
    outcome: str = "success"
    reason: Optional[str] = None
    stage: Optional[str] = None
    gaps: List[str] = field(default_factory=list)
    mode: str = WHOLE
    seed: Optional[int] = None
    resolved_motions: List[str] = field(default_factory=list)

    @property
    def success(self):
        return self.outcome == "success"

    @property
    def plan_length(self):
        return sum(len(m.steps) for m in self.macro_results)

    @property
    def steps(self):
        return [s for m in self.macro_results for s in m.steps]

    def fail(self, stage, reason):
        self.outcome = "failure"
        self.stage = stage
        self.reason = reason
        logger.warning("trial failed during %s: %s", stage, reason)

    def to_dict(self):
        return {
            "mode": self.mode,
            "seed": self.seed,
            "outcome": self.outcome,
            "stage": self.stage,
            "reason": self.reason,
            "steps_attempted": self.steps_attempted,
            "steps_succeeded": self.steps_succeeded,
            "plan_length": self.plan_length,
            "macro_results": [
                {"name": m.name, "achieved": m.achieved, "violated_facts": m.violated_facts, "steps": m.steps}
                for m in self.macro_results
            ],
            "gaps": self.gaps,
            "resolved_motions": self.resolved_motions,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)

    def render_table(self):
        return render_template("report.txt.j2", report=self)


def _execute_segment(report, segment, scene, library):
    """Resolve contexts and run one segment; returns the new scene or None on failure."""
    result = MacroResult(segment.macro, False, steps=[str(s) for s in segment.steps])
    report.macro_results.append(result)

    resolution = None
    if library is not None:
        try:
            resolution = resolve_plan(library, segment.steps, scene)
        except PreconditionViolated:
            pass  # the step replay below reports the inapplicable step
    if resolution is not None:
        if not resolution.complete:
            report.gaps.extend(f"{segment.macro} step {g.step_index}: {g.step}" for g in resolution.gaps)
            report.fail("context", f"{len(resolution.gaps)} steps lack a demonstration")
            return None
        report.resolved_motions.extend(p.motion_id for p in resolution.payloads)

    for step in segment.steps:
        report.steps_attempted += 1
        try:
            scene = apply_action(scene, step)
        except PreconditionViolated as e:
            result.violated_facts = [str(f) for f in e.missing]
            report.fail("execution", str(e))
            return None
        report.steps_succeeded += 1

    facts = scene_facts(scene)
    missing = [str(f) for f in segment.goal if f not in facts]
    result.violated_facts = missing
    result.achieved = not missing
    if missing:
        report.fail("execution", f"{segment.macro} left {len(missing)} goal facts unmet")
        return None
    return scene


def execute_plan(segments, scene, library=None):
    """Symbolically execute a stitched plan, segment by segment."""
    report = ExecutionReport()
    for segment in segments:
        scene = _execute_segment(report, segment, scene, library)
        if scene is None:
            break
    return report


# partial recipes

def gained_ingredients(unit):
    gained = []
    for node in unit.outputs:
        before = unit.input_named(node.label)
        for item in node.ingredients:
            if (before is None or item not in before.ingredients) and item not in gained:
                gained.append(item)
    return gained


def pouring_units(tree):
    return [i for i, unit in enumerate(tree.units) if unit.motion.label in POURING_MOTIONS]


def drop_ingredients(tree, goal, ingredients):
    """Remove the units that add `ingredients` and strip them from every remaining node."""
    dropped = set(ingredients)

    def strip(node):
        return node.replace(ingredients=tuple(i for i in node.ingredients if i not in dropped))

    units, provenance = [], []
    for unit, source in zip(tree.units, tree.provenance):
        if unit.motion.label in POURING_MOTIONS and set(gained_ingredients(unit)) & dropped:
            continue
        try:
            units.append(FunctionalUnit(tuple(strip(n) for n in unit.inputs), unit.motion, tuple(strip(n) for n in unit.outputs)))
        except ValueError as e:
            raise IngredientCollision(f"dropping {', '.join(sorted(dropped))} from {unit}: {e}") from e
        provenance.append(source)
    return TaskTree(tuple(units), tuple(provenance)), strip(goal)


def choose_dropped_ingredients(tree, rng):
    """A random non-empty proper subset of the poured/sprinkled ingredients."""
    candidates = pouring_units(tree)
    if len(candidates) < 2:
        return []
    count = rng.randint(1, len(candidates) - 1)
    chosen = sorted(rng.sample(candidates, count))
    dropped = []
    for index in chosen:
        for item in gained_ingredients(tree.units[index]):
            if item not in dropped:
                dropped.append(item)
    return dropped


def run_trial(
    foon,
    goal,
    scene,
    mode=TrialMode(),
    library=None,
    heuristic="hmax",
    node_budget=DEFAULT_NODE_BUDGET,
    external_cmd=None,
):
    """Retrieve, compile, plan per macro operator, resolve contexts and execute.

    Without a library the context stage is skipped.
    """
    report = ExecutionReport(mode=mode.kind, seed=mode.seed)
    stage = "retrieval"
    try:
        tree = retrieve_task_tree(foon, goal, scene_kitchen(scene))
        if mode.kind == PARTIAL:
            dropped = choose_dropped_ingredients(tree, random.Random(mode.seed))
            logger.info("partial recipe without %s", ", ".join(dropped) or "nothing")
            tree, goal = drop_ingredients(tree, goal, dropped)
        stage = "compile"
        operators = compile_task_tree(tree)
        for macro_po in operators:
            stage = "planning"
            segment = plan_segment(macro_po, scene, heuristic, node_budget, external_cmd)
            stage = "execution"
            scene = _execute_segment(report, segment, scene, library)
            if scene is None:
                return report
        stage = "goal"
        facts = scene_facts(scene)
        missing = [str(f) for f in relax(object_node_to_predicates(goal)) if f not in facts]
        if missing:
            report.fail(stage, "goal not reached: " + " ".join(missing))
    except FooncError as e:
        report.fail(stage, str(e))
    return report


def _trial_job(args):
    foon, goal, seed, kind, library, heuristic, node_budget, upside_down, stack = args
    scene = random_scene(seed, upside_down, stack)
    mode = TrialMode.partial(seed) if kind == PARTIAL else TrialMode()
    report = run_trial(foon, goal, scene, mode, library, heuristic, node_budget)
    report.seed = seed
    return report


def run_trials(
    foon,
    goal,
    seeds,
    kind=WHOLE,
    library=None,
    heuristic="hmax",
    node_budget=DEFAULT_NODE_BUDGET,
    workers=1,
    upside_down_probability=0.25,
    stack_probability=0.3,
):
    """Independent seeded trials, optionally spread over worker processes."""
    jobs = [
        (foon, goal, seed, kind, library, heuristic, node_budget, upside_down_probability, stack_probability)
        for seed in seeds
    ]
    if workers <= 1:
        return [_trial_job(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_trial_job, jobs))


# plan files

def segments_to_json(segments, goal_label=None, heuristic=None):
    return {
        "version": PLAN_FORMAT_VERSION,
        "goal": goal_label,
        "heuristic": heuristic,
        "length": sum(len(s.steps) for s in segments),
        "segments": [
            {
                "macro": s.macro,
                "goal": [str(f) for f in s.goal],
                "steps": [[step.action_name, *step.args] for step in s.steps],
                "target_cells": [list(step.target_cell) if step.target_cell else None for step in s.steps],
                "expanded": s.stats.expanded,
                "generated": s.stats.generated,
            }
            for s in segments
        ],
    }


def segments_from_json(data):
    if data.get("version") != PLAN_FORMAT_VERSION:
        raise ValueError(f"unsupported plan version {data.get('version')!r}")
    segments = []
    for entry in data["segments"]:
        goal = parse_atoms(" ".join(entry.get("goal", [])))
        cells = entry.get("target_cells") or [None] * len(entry["steps"])
        steps = tuple(GroundStep(s[0], tuple(s[1:]), cell) for s, cell in zip(entry["steps"], cells))
        segments.append(Segment(entry["macro"], goal, steps))
    return segments


def load_plan(path):
    with open(path, encoding="utf-8") as f:
        return segments_from_json(json.load(f))


def save_plan(segments, path, goal_label=None, heuristic=None):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(segments_to_json(segments, goal_label, heuristic), f, indent=2)
        f.write("\n")
