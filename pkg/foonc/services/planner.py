"""Grounded STRIPS planning: grounding, A* search and plan validation."""

import heapq
import itertools
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Dict, Tuple

from foonc.errors import NoPlan, ResourceLimit, UndeclaredSymbol
from foonc.services.heuristics import HEURISTICS, iter_bits
from foonc.services.pddl import is_subtype
from foonc.services.predicates import Predicate

logger = logging.getLogger(__name__)

DEFAULT_NODE_BUDGET = 10**6


@dataclass(frozen=True)
class GroundAction:
    name: str
    args: Tuple[str, ...]
    pre: int
    add: int
    delete: int

    @property
    def key(self):
        return (self.name, self.args)

    def __str__(self):
        return "(" + " ".join((self.name, *self.args)) + ")"


@dataclass(frozen=True)
class GroundedTask:
    facts: Tuple[Predicate, ...]
    actions: Tuple[GroundAction, ...]
    init: int
    goal: int
    index: Dict[Predicate, int] = field(default_factory=dict, compare=False, repr=False)
    relaxed_actions: Tuple[Tuple[int, int, int], ...] = field(default=(), compare=False, repr=False)
    action_index: Dict[tuple, int] = field(default_factory=dict, compare=False, repr=False)

    @classmethod
    def build(cls, facts, actions, init, goal):
        """Index a fact universe; `actions` are (name, args, pre, add, delete) with fact collections."""
        universe = sorted(set(facts))
        index = {fact: i for i, fact in enumerate(universe)}

        def bits(collection):
            value = 0
            for fact in collection:
                value |= 1 << index[fact]
            return value

        ground = tuple(
            GroundAction(name, tuple(args), bits(pre), bits(add), bits(delete))
            for name, args, pre, add, delete in actions
        )
        return cls(
            facts=tuple(universe),
            actions=ground,
            init=bits(init),
            goal=bits(goal),
            index=index,
            relaxed_actions=tuple((i, a.pre, a.add) for i, a in enumerate(ground)),
            action_index={a.key: i for i, a in enumerate(ground)},
        )

    def bits(self, facts):
        value = 0
        for fact in facts:
            value |= 1 << self.index[fact]
        return value

    def decode(self, state):
        return frozenset(self.facts[i] for i in iter_bits(state))

    def is_goal(self, state):
        return self.goal & ~state == 0

    def progress(self, state, action):
        return (state & ~action.delete) | action.add

    def lookup(self, name, args):
        i = self.action_index.get((name, tuple(args)))
        return None if i is None else self.actions[i]


@dataclass(frozen=True)
class PlanStats:
    expanded: int = 0
    generated: int = 0
    wall_time: float = 0.0


@dataclass(frozen=True)
class Plan:
    steps: Tuple[GroundAction, ...] = ()
    stats: PlanStats = PlanStats()

    @property
    def cost(self):
        return len(self.steps)

    def __len__(self):
        return len(self.steps)


def _static_names(domain):
    changed = set()
    for op in domain:
        changed.update(f.name for f in (*op.add_effects, *op.delete_effects))
    return changed


def _bind(facts, binding):
    return [f.substitute(binding) for f in facts]


def ground(domain, objects, init, goal):
    """Instantiate every type-consistent binding, then prune unreachable actions.

    Distinct parameters never bind the same object. An action is pruned when
    one of its preconditions is absent from init and added by no remaining
    action; this is repeated until nothing changes.
    """
    init = frozenset(init)
    goal = frozenset(goal)
    declared = {s.name for s in objects}
    for fact in goal:
        unknown = [a for a in fact.args if a not in declared]
        if unknown:
            raise UndeclaredSymbol(f"goal fact {fact} uses undeclared {', '.join(unknown)}")

    changing = _static_names(domain)
    candidates = []
    for op in domain:
        names = [name for name, _ in op.parameters]
        domains = [[s.name for s in objects if is_subtype(s.type, kind)] for _, kind in op.parameters]
        static_pre = [f for f in op.preconditions if f.name not in changing]
        for values in itertools.product(*domains):
            if len(set(values)) != len(values):
                continue
            binding = dict(zip(names, values))
            try:
                if any(f not in init for f in _bind(static_pre, binding)):
                    continue
                pre = _bind(op.preconditions, binding)
                add = _bind(op.add_effects, binding)
                delete = _bind(op.delete_effects, binding)
            except ValueError:
                # binding relates a symbol to itself
                continue
            candidates.append((op.name, tuple(values), pre, add, delete))

    while True:
        addable = set(init)
        for _, _, _, add, _ in candidates:
            addable.update(add)
        kept = [c for c in candidates if all(f in addable for f in c[2])]
        if len(kept) == len(candidates):
            break
        candidates = kept

    universe = set(init) | set(goal)
    for _, _, pre, add, delete in candidates:
        universe.update(pre)
        universe.update(add)
        universe.update(delete)
    task = GroundedTask.build(universe, candidates, init, goal)
    logger.debug("grounded %d actions over %d facts", len(task.actions), len(task.facts))
    return task


def astar(task, heuristic="hmax", node_budget=DEFAULT_NODE_BUDGET):
    """A* with open list ordered by (f, h, insertion order)."""
    h_fn = HEURISTICS[heuristic]
    started = time.perf_counter()
    counter = itertools.count()
    init = task.init

    h_cache = {init: h_fn(init, task)}
    if h_cache[init] == math.inf:
        raise NoPlan("goal is unreachable even under delete relaxation")

    open_list = [(h_cache[init], h_cache[init], next(counter), init)]
    best_g = {init: 0}
    parent = {init: None}
    closed = set()
    expanded = 0
    generated = 1

    while open_list:
        _, h, _, state = heapq.heappop(open_list)
        if state in closed:
            continue
        g = best_g[state]
        if task.goal & ~state == 0:
            steps = []
            while parent[state] is not None:
                state, action_index = parent[state]
                steps.append(task.actions[action_index])
            steps.reverse()
            stats = PlanStats(expanded, generated, time.perf_counter() - started)
            logger.debug("%s search: %d steps, %d expanded, %d generated", heuristic, len(steps), expanded, generated)
            return Plan(tuple(steps), stats)
        if expanded >= node_budget:
            raise ResourceLimit(
                f"node budget of {node_budget} expansions exhausted",
                expanded=expanded,
                generated=generated,
            )
        closed.add(state)
        expanded += 1

        for i, action in enumerate(task.actions):
            if action.pre & ~state:
                continue
            successor = (state & ~action.delete) | action.add
            cost = g + 1
            if cost >= best_g.get(successor, math.inf):
                continue
            closed.discard(successor)
            best_g[successor] = cost
            parent[successor] = (state, i)
            generated += 1
            hs = h_cache.get(successor)
            if hs is None:
                hs = h_cache[successor] = h_fn(successor, task)
            if hs == math.inf:
                continue
            heapq.heappush(open_list, (cost + hs, hs, next(counter), successor))

    raise NoPlan("search space exhausted without reaching the goal")


def validate(plan, task):
    """True iff the plan's steps apply in sequence from init and reach the goal."""
    state = task.init
    for step in plan.steps:
        action = task.lookup(step.name, step.args)
        if action is None or action.pre & ~state:
            return False
        state = (state & ~action.delete) | action.add
    return task.goal & ~state == 0


def solve(task, heuristic="hmax", node_budget=DEFAULT_NODE_BUDGET, external_cmd=None, documents=None):
    """Search with the embedded A*, or hand the PDDL documents to an external planner."""
    if external_cmd:
        from foonc.services.external_planner import run_external_planner

        domain, problem = documents
        return run_external_planner(external_cmd, domain, problem, task)
    return astar(task, heuristic, node_budget)
