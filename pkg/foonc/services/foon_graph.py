"""In-memory FOON model: object and motion nodes, functional units,
subgraph merging and task tree retrieval."""

import logging
import re
from dataclasses import dataclass, field
from typing import FrozenSet, Optional, Tuple

from foonc.errors import GoalUnknown, Unsolvable

logger = logging.getLogger(__name__)

GEOMETRIC = "geometric"
PHYSICAL = "physical"
GEOMETRIC_RELATIONS = ("in", "on", "under")

_LABEL_RE = re.compile(r"^[a-z0-9]+(_[a-z0-9]+)*$")


def normalize_label(text):
    """Lowercase a label and join its words with underscores."""
    words = re.split(r"[\s\-]+", text.strip().lower())
    return "_".join(w for w in words if w)


def _check_label(label, what):
    if not isinstance(label, str) or not _LABEL_RE.match(label):
        raise ValueError(f"invalid {what} label: {label!r}")


@dataclass(frozen=True)
class StateAttribute:
    kind: str
    label: str
    relative_object: Optional[str] = None

    def __post_init__(self):
        _check_label(self.label, "state")
        if self.kind == GEOMETRIC:
            if self.relative_object is None:
                raise ValueError(f"geometric state {self.label!r} needs a relative object")
            _check_label(self.relative_object, "relative object")
        elif self.kind == PHYSICAL:
            if self.relative_object is not None:
                raise ValueError(f"physical state {self.label!r} cannot have a relative object")
        else:
            raise ValueError(f"unknown state kind {self.kind!r}")

    @classmethod
    def physical(cls, label):
        return cls(PHYSICAL, label)

    @classmethod
    def geometric(cls, label, relative_object):
        return cls(GEOMETRIC, label, relative_object)

    def __str__(self):
        if self.relative_object:
            return f"{self.label}:{self.relative_object}"
        return self.label


@dataclass(frozen=True, eq=False)
class ObjectNode:
    """An object in a given state.

    States and ingredients keep their file order for serialization but
    compare as sets.
    """

    label: str
    states: Tuple[StateAttribute, ...] = ()
    ingredients: Tuple[str, ...] = ()

    def __post_init__(self):
        _check_label(self.label, "object")
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "ingredients", tuple(self.ingredients))
        state_labels = [s.label for s in self.states]
        if len(set(state_labels)) != len(state_labels):
            raise ValueError(f"duplicate state labels on {self.label!r}")
        for ingredient in self.ingredients:
            _check_label(ingredient, "ingredient")
        if len(set(self.ingredients)) != len(self.ingredients):
            raise ValueError(f"duplicate ingredients on {self.label!r}")

    def _identity(self):
        return (self.label, frozenset(self.states), frozenset(self.ingredients))

    def __eq__(self, other):
        if not isinstance(other, ObjectNode):
            return NotImplemented
        return self._identity() == other._identity()

    def __hash__(self):
        return hash(self._identity())

    @property
    def physical_states(self):
        return tuple(s for s in self.states if s.kind == PHYSICAL)

    @property
    def geometric_states(self):
        return tuple(s for s in self.states if s.kind == GEOMETRIC)

    def availability_key(self):
        """Identity used for kitchen availability: geometric states are ignored."""
        return (self.label, frozenset(self.physical_states), frozenset(self.ingredients))

    def sort_key(self):
        return (self.label, tuple(sorted(str(s) for s in self.states)), tuple(sorted(self.ingredients)))

    def replace(self, states=None, ingredients=None):
        return ObjectNode(
            self.label,
            self.states if states is None else states,
            self.ingredients if ingredients is None else ingredients,
        )

    def __str__(self):
        text = self.label
        if self.ingredients:
            text += "{" + ",".join(self.ingredients) + "}"
        if self.states:
            text += "[" + ",".join(str(s) for s in self.states) + "]"
        return text


@dataclass(frozen=True)
class MotionNode:
    label: str

    def __post_init__(self):
        _check_label(self.label, "motion")


@dataclass(frozen=True)
class FunctionalUnit:
    inputs: Tuple[ObjectNode, ...]
    motion: MotionNode
    outputs: Tuple[ObjectNode, ...]

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        if not self.inputs:
            raise ValueError("functional unit has no inputs")
        if not self.outputs:
            raise ValueError("functional unit has no outputs")
        if len(set(self.inputs)) != len(self.inputs):
            raise ValueError("duplicate object node in inputs")
        if len(set(self.outputs)) != len(self.outputs):
            raise ValueError("duplicate object node in outputs")

    def input_named(self, label):
        return next((n for n in self.inputs if n.label == label), None)

    def __str__(self):
        ins = ", ".join(str(n) for n in self.inputs)
        outs = ", ".join(str(n) for n in self.outputs)
        return f"{self.motion.label}: {ins} -> {outs}"


@dataclass(frozen=True)
class FOONGraph:
    units: Tuple[FunctionalUnit, ...] = ()
    goal_candidates: FrozenSet[ObjectNode] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "units", tuple(self.units))
        object.__setattr__(self, "goal_candidates", frozenset(self.goal_candidates))
        if len(set(self.units)) != len(self.units):
            raise ValueError("duplicate functional units")


@dataclass(frozen=True)
class TaskTree:
    units: Tuple[FunctionalUnit, ...] = ()
    provenance: Tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "units", tuple(self.units))
        object.__setattr__(self, "provenance", tuple(self.provenance))
        if len(self.units) != len(self.provenance):
            raise ValueError("provenance must list one source index per unit")

    def __len__(self):
        return len(self.units)

    def is_consistent(self, kitchen):
        """Replay check of the topological invariant."""
        available = {n.availability_key() for n in kitchen}
        for unit in self.units:
            if any(n.availability_key() not in available for n in unit.inputs):
                return False
            available.update(n.availability_key() for n in unit.outputs)
        return True


def merge_subgraphs(subgraphs):
    """Union of units across subgraphs; exact duplicates keep their first occurrence."""
    if not subgraphs:
        raise ValueError("merge needs at least one subgraph")
    units = []
    seen = set()
    goals = set()
    for graph in subgraphs:
        for unit in graph.units:
            if unit in seen:
                continue
            seen.add(unit)
            units.append(unit)
        goals.update(graph.goal_candidates)
    logger.debug("merged %d subgraphs into %d units", len(subgraphs), len(units))
    return FOONGraph(tuple(units), frozenset(goals))


def terminal_outputs(graph):
    """Output nodes never consumed as an input, in unit order."""
    consumed = {n for unit in graph.units for n in unit.inputs}
    result = []
    for unit in graph.units:
        for node in unit.outputs:
            if node not in consumed and node not in result:
                result.append(node)
    return result


def resolve_goal(graph, label):
    """Turn a goal label into a node: marked candidates first, then terminal outputs."""
    label = normalize_label(label)
    marked = sorted((n for n in graph.goal_candidates if n.label == label), key=ObjectNode.sort_key)
    if marked:
        return marked[0]
    terminals = [n for n in terminal_outputs(graph) if n.label == label]
    if terminals:
        return terminals[-1]
    raise GoalUnknown(f"no goal node labelled {label!r}")


def retrieve_task_tree(foon, goal, kitchen):
    """Select and order the units that produce `goal` from the kitchen.

    A breadth-first pass computes, for every node key, the first layer at
    which it becomes producible. A depth-first pass then walks back from the
    goal, always taking the lowest-index producer of the earliest layer, and
    emits units in post-order.
    """
    available = {n.availability_key() for n in kitchen}
    goal_key = goal.availability_key()
    if goal_key in available:
        return TaskTree()

    mentioned = any(
        n.availability_key() == goal_key
        for unit in foon.units
        for n in (*unit.inputs, *unit.outputs)
    )
    if not mentioned:
        raise GoalUnknown(f"goal {goal} appears in neither the FOON nor the kitchen")

    level = {key: 0 for key in available}
    unit_level = {}
    layer = 0
    changed = True
    while changed:
        changed = False
        layer += 1
        produced = {}
        for index, unit in enumerate(foon.units):
            if index in unit_level:
                continue
            if all(n.availability_key() in level for n in unit.inputs):
                unit_level[index] = layer
                for node in unit.outputs:
                    produced.setdefault(node.availability_key(), layer)
        for key, value in produced.items():
            if key not in level:
                level[key] = value
                changed = True

    if goal_key not in level:
        raise Unsolvable(f"goal {goal} cannot be produced from the kitchen")

    order = []
    visited = set()

    def expand(key):
        if key in available:
            return
        producer = min(
            index
            for index, value in unit_level.items()
            if value <= level[key] and any(n.availability_key() == key for n in foon.units[index].outputs)
        )
        if producer in visited:
            return
        visited.add(producer)
        for node in foon.units[producer].inputs:
            expand(node.availability_key())
        order.append(producer)

    expand(goal_key)
    logger.info("retrieved task tree of %d units for %s", len(order), goal)
    return TaskTree(tuple(foon.units[i] for i in order), tuple(order))
