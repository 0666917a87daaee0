"""Micro-level robot skills and one micro problem per macro operator."""

import logging
from dataclasses import dataclass, field
from typing import Tuple

from foonc.errors import InconsistentInit, PreconditionUnsatisfied
from foonc.services.pddl import PlanningOperator, TypedSymbol, parse_atoms, render_domain, render_problem
from foonc.services.predicates import AIR, HAND, TABLE, Predicate, State, check_consistency, ordered_unique
from foonc.services.scene import CONTAINER, INGREDIENT

logger = logging.getLogger(__name__)

MICRO_DOMAIN_NAME = "foon_micro"
MICRO_TYPES = "container ingredient surface robot - object"
MICRO_CONSTANTS = (TypedSymbol(HAND, "robot"), TypedSymbol(AIR, "object"))

HAND_FREE = Predicate("in", (HAND, AIR))


def _params(text):
    tokens = text.split()
    return tuple((tokens[i], tokens[i + 2]) for i in range(0, len(tokens), 3))


def _op(name, params, pre, add, delete=""):
    return PlanningOperator(name, _params(params), parse_atoms(pre), parse_atoms(add), parse_atoms(delete))


_HOLD = "(in hand ?obj) (on ?obj hand) (under ?obj air)"
_POUR_PRE = (
    "(under ?source air) (in ?source ?obj) (under ?obj ?source) (in hand ?source) "
    "(on ?target air) (vessel ?target) (upright ?target)"
)
_POUR_KEEP_ADD = "(in ?target ?obj) (under ?obj ?target) (filled ?target)"

CATALOG = (
    _op(
        "pick",
        "?obj - object ?surface - object",
        "(on ?obj air) (under ?obj ?surface) (on ?surface ?obj) (in hand air)",
        "(on ?obj hand) (in hand ?obj) (under ?obj air) (on ?surface air)",
        "(on ?obj air) (under ?obj ?surface) (on ?surface ?obj) (in hand air) (placed ?obj)",
    ),
    _op(
        "place-small",
        "?obj - object ?surface - surface",
        f"{_HOLD} (on ?surface air) (small ?obj)",
        "(on ?obj air) (in hand air) (under ?obj ?surface) (on ?surface ?obj) (placed ?obj)",
        f"{_HOLD} (on ?surface air)",
    ),
    _op(
        "place-large",
        "?obj - object ?surface - surface",
        f"{_HOLD} (on ?surface air) (large ?obj) (large-surface ?surface)",
        "(on ?obj air) (in hand air) (under ?obj ?surface) (on ?surface ?obj) (placed ?obj)",
        f"{_HOLD} (on ?surface air)",
    ),
    _op(
        "pour-all",
        "?obj - ingredient ?source - container ?target - container",
        f"{_POUR_PRE} (pourer ?source)",
        f"(in ?source air) {_POUR_KEEP_ADD}",
        "(in ?source ?obj) (in ?target air) (under ?obj ?source) (filled ?source)",
    ),
    _op(
        "pour-some",
        "?obj - ingredient ?source - container ?target - container",
        f"{_POUR_PRE} (pourer ?source)",
        _POUR_KEEP_ADD,
        "(in ?target air)",
    ),
    _op(
        "sprinkle",
        "?obj - ingredient ?source - container ?target - container",
        f"{_POUR_PRE} (shaker ?source)",
        _POUR_KEEP_ADD,
        "(in ?target air)",
    ),
    _op(
        "mix",
        "?tool - object ?container - container",
        "(in hand ?tool) (on ?tool hand) (tool ?tool) (filled ?container) (on ?container air) "
        "(vessel ?container) (upright ?container)",
        "(is-mixed ?container)",
    ),
    _op(
        "insert",
        "?obj - ingredient ?target - container",
        f"{_HOLD} (vessel ?target) (upright ?target)",
        "(in ?target ?obj) (under ?obj ?target) (in hand air) (filled ?target)",
        f"{_HOLD} (in ?target air)",
    ),
    _op(
        "flip",
        "?obj - object",
        "(in hand ?obj) (upside-down ?obj)",
        "(upright ?obj)",
        "(upside-down ?obj)",
    ),
)


def micro_domain():
    """The lifted skill catalog."""
    return list(CATALOG)


def operator_named(name):
    for op in CATALOG:
        if op.name == name:
            return op
    raise KeyError(name)


def emit_micro_domain():
    return render_domain(MICRO_DOMAIN_NAME, CATALOG, constants=MICRO_CONSTANTS, types=MICRO_TYPES)


@dataclass(frozen=True)
class MicroProblem:
    init: State
    goal: Tuple[Predicate, ...]
    domain_ref: str = MICRO_DOMAIN_NAME
    source_macro: str = ""
    objects: Tuple[TypedSymbol, ...] = field(default=())

    def __post_init__(self):
        if not self.goal:
            raise ValueError("micro problem goal is empty")


def relax_fact(fact):
    """Map a table-level placement to `(placed x)`; other facts pass through."""
    if fact.is_relation and TABLE in fact.args:
        if fact.name == "on" and fact.focal == TABLE:
            return Predicate.attribute("placed", fact.relative)
        if fact.name == "under" and fact.relative == TABLE:
            return Predicate.attribute("placed", fact.focal)
    return fact


def relax(facts):
    return ordered_unique(relax_fact(f) for f in facts)


def micro_goal(macro_po):
    deleted = set(macro_po.delete_effects)
    kept = [f for f in macro_po.preconditions if f not in deleted]
    return ordered_unique((*relax(macro_po.add_effects), *relax(kept), HAND_FREE))


def build_micro_problem(macro_po, current, objects=()):
    """Init is the current scene state; the goal is the macro operator's outcome.

    `current` must already hold any static catalog facts the skills need.
    """
    current = current if isinstance(current, State) else State(current)
    missing = current.missing(relax(macro_po.preconditions))
    if missing:
        raise PreconditionUnsatisfied(macro_po.name, missing)
    problems = check_consistency(current.facts)
    if problems:
        raise InconsistentInit(problems)
    goal = micro_goal(macro_po)
    logger.debug("micro problem for %s: %d goal facts", macro_po.name, len(goal))
    return MicroProblem(current, goal, MICRO_DOMAIN_NAME, macro_po.name, tuple(objects))


def scene_symbols(scene):
    """Typed objects of a scene: constants, cells, catalog objects, substances."""
    symbols = list(MICRO_CONSTANTS)
    symbols.extend(TypedSymbol(c.id, "surface") for c in scene.cells)
    for obj in scene.objects:
        if obj.kind == CONTAINER:
            kind = "container"
        elif obj.kind == INGREDIENT:
            kind = "ingredient"
        else:
            kind = "object"
        symbols.append(TypedSymbol(obj.label, kind))
    symbols.extend(TypedSymbol(label, "ingredient") for label in scene.substances())
    return symbols


def emit_micro_problem(problem):
    return render_problem(
        f"{problem.source_macro or 'micro'}_problem",
        problem.domain_ref,
        sorted(problem.init.facts),
        problem.goal,
        objects=[s for s in problem.objects if s not in MICRO_CONSTANTS],
    )
