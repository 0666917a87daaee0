"""Object-centred predicate vocabulary and the translations into it.

A relation `(rel focal relative)` reads from the focal object's point of
view: `(in bottle vodka)` is "inside the bottle there is vodka",
`(on cell_9 bottle)` is "on cell_9 there is the bottle" and
`(under bottle cell_9)` is "under the bottle there is cell_9".
The reserved symbol `air` stands for nothing.
"""

import logging
import re
from dataclasses import dataclass, replace
from typing import FrozenSet, Tuple

from foonc.errors import UnknownRelation
from foonc.services.foon_graph import GEOMETRIC
from foonc.services.scene import CONTAINER, LARGE, ROLES, SMALL, TOOL, UPRIGHT, UPSIDE_DOWN

logger = logging.getLogger(__name__)

AIR = "air"
TABLE = "table"
HAND = "hand"
RESERVED = (AIR, TABLE, HAND)

RELATIONS = ("in", "on", "under")
PHYSICAL_VOCABULARY = ("whole", "sliced", "mixed", "chopped", "cooked")

_NAME_RE = re.compile(r"^[a-z][a-z0-9_\-]*$")
_SYMBOL_RE = re.compile(r"^\??[a-z0-9][a-z0-9_\-]*$")


@dataclass(frozen=True, order=True)
class Predicate:
    name: str
    args: Tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))
        if not _NAME_RE.match(self.name):
            raise ValueError(f"invalid predicate name {self.name!r}")
        for arg in self.args:
            if not isinstance(arg, str) or not _SYMBOL_RE.match(arg):
                raise ValueError(f"invalid symbol {arg!r} in {self.name}")
        if self.name in RELATIONS:
            if len(self.args) != 2:
                raise ValueError(f"relation {self.name} takes two symbols")
            if self.args[0] == self.args[1]:
                raise ValueError(f"relation ({self.name} {self.args[0]} {self.args[1]}) relates a symbol to itself")
        elif len(self.args) != 1:
            raise ValueError(f"attribute {self.name} takes one symbol")

    @classmethod
    def relation(cls, rel, focal, relative):
        return cls(rel, (focal, relative))

    @classmethod
    def attribute(cls, label, focal):
        return cls(label, (focal,))

    @property
    def is_relation(self):
        return self.name in RELATIONS

    @property
    def focal(self):
        return self.args[0]

    @property
    def relative(self):
        return self.args[1] if self.is_relation else None

    def mentions(self, symbol):
        return symbol in self.args

    def substitute(self, binding):
        return Predicate(self.name, tuple(binding.get(a, a) for a in self.args))

    def __str__(self):
        return "(" + " ".join((self.name, *self.args)) + ")"


def ordered_unique(facts):
    seen = set()
    result = []
    for fact in facts:
        if fact not in seen:
            seen.add(fact)
            result.append(fact)
    return tuple(result)


@dataclass(frozen=True)
class State:
    facts: FrozenSet[Predicate] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "facts", frozenset(self.facts))

    def __contains__(self, fact):
        return fact in self.facts

    def __iter__(self):
        return iter(sorted(self.facts))

    def __len__(self):
        return len(self.facts)

    def union(self, other):
        return State(self.facts | frozenset(other))

    def satisfies(self, facts):
        return all(f in self.facts for f in facts)

    def missing(self, facts):
        return [f for f in facts if f not in self.facts]

    def violations(self):
        return check_consistency(self.facts)

    @property
    def is_consistent(self):
        return not self.violations()


def _rel(rel, focal, relative):
    return Predicate(rel, (focal, relative))


def check_consistency(facts):
    """Local consistency rules of a predicate state; returns violation messages.

    Substances may sit in several containers at once, so the single-support
    rule only covers symbols that are not the contents of an `in` fact.
    """
    facts = frozenset(facts)
    problems = []
    by_name = {}
    for fact in facts:
        by_name.setdefault(fact.name, []).append(fact)
    ins = by_name.get("in", [])
    ons = by_name.get("on", [])
    unders = by_name.get("under", [])

    held = [f for f in ins if f.focal == HAND]
    if len(held) > 1:
        problems.append("hand holds more than one thing: " + " ".join(str(f) for f in sorted(held)))

    for rel, group in (("in", ins), ("on", ons)):
        for fact in group:
            if fact.relative == AIR and any(
                other.focal == fact.focal and other.relative != AIR for other in group
            ):
                problems.append(f"{fact} contradicts another ({rel} {fact.focal} ...) fact")

    contained = {f.relative for f in ins if f.relative != AIR}
    supports = {}
    for fact in unders:
        supports.setdefault(fact.focal, []).append(fact)
    for symbol, group in supports.items():
        if symbol not in contained and len(group) > 1:
            problems.append(f"{symbol} rests on several things: " + " ".join(str(f) for f in sorted(group)))

    for fact in ins:
        if fact.relative != AIR and fact.focal != HAND and _rel("under", fact.relative, fact.focal) not in facts:
            problems.append(f"{fact} without (under {fact.relative} {fact.focal})")
    for fact in ons:
        if fact.relative not in (AIR, HAND) and _rel("under", fact.relative, fact.focal) not in facts:
            problems.append(f"{fact} without (under {fact.relative} {fact.focal})")
    for fact in unders:
        if fact.relative in (AIR, HAND):
            continue
        if _rel("in", fact.relative, fact.focal) not in facts and _rel("on", fact.relative, fact.focal) not in facts:
            problems.append(f"{fact} without a matching in/on fact")

    for fact in by_name.get("upright", []):
        if Predicate("upside-down", fact.args) in facts:
            problems.append(f"{fact.focal} is both upright and upside-down")
    return sorted(problems)


def object_node_to_predicates(node):
    """Translate a FOON object node into an ordered set of macro-level facts.

    State-derived facts come first, then the default table placement, then
    one `(in node ingredient)`/`(under ingredient node)` pair per ingredient.
    """
    label = node.label
    facts = []
    supported = False
    for state in node.states:
        if state.kind == GEOMETRIC:
            relative = state.relative_object
            if state.label not in RELATIONS:
                raise UnknownRelation(f"unknown geometric relation {state.label!r} on {label}")
            if state.label in ("in", "on"):
                facts.append(_rel(state.label, relative, label))
                facts.append(_rel("under", label, relative))
                supported = True
            else:
                facts.append(_rel("under", relative, label))
                facts.append(_rel("on", label, relative))
        elif state.label == "empty":
            facts.append(_rel("in", label, AIR))
        else:
            if state.label not in PHYSICAL_VOCABULARY:
                logger.warning("physical state %r on %s is outside the known vocabulary", state.label, label)
            facts.append(Predicate.attribute(f"is-{state.label}", label))
    if not supported and label != TABLE:
        facts.append(_rel("under", label, TABLE))
        facts.append(_rel("on", TABLE, label))
    for ingredient in node.ingredients:
        facts.append(_rel("in", label, ingredient))
        facts.append(_rel("under", ingredient, label))
    return ordered_unique(facts)


def scene_to_state(scene):
    """Dynamic facts of a scene: geometry, contents, orientation, physical states."""
    facts = []
    for cell in scene.cells:
        occupant = scene.occupants.get(cell.id)
        if occupant is None:
            facts.append(_rel("on", cell.id, AIR))
        else:
            facts.append(_rel("on", cell.id, occupant))
            facts.append(_rel("under", occupant, cell.id))

    for obj in scene.objects:
        label = obj.label
        where = scene.location(label)
        if where[0] == "stack":
            facts.append(_rel("on", where[1], label))
            facts.append(_rel("under", label, where[1]))
        elif where[0] == "gripper":
            facts.append(_rel("in", HAND, label))
            facts.append(_rel("on", label, HAND))
            facts.append(_rel("under", label, AIR))
        if where[0] in ("cell", "stack"):
            facts.append(Predicate.attribute("placed", label))
            if scene.top_of(label) is None:
                facts.append(_rel("on", label, AIR))
        facts.append(Predicate.attribute("upright" if obj.orientation == UPRIGHT else "upside-down", label))
        if obj.kind == CONTAINER:
            if obj.contents:
                facts.append(Predicate.attribute("filled", label))
                for item in obj.contents:
                    facts.append(_rel("in", label, item))
                    facts.append(_rel("under", item, label))
            else:
                facts.append(_rel("in", label, AIR))
        for attribute in obj.attributes:
            facts.append(Predicate.attribute(f"is-{attribute}", label))

    if scene.gripper is None:
        facts.append(_rel("in", HAND, AIR))
    return State(facts)


def scene_static_facts(scene):
    """Catalog facts that no action changes: size classes and container roles."""
    facts = []
    for cell in scene.cells:
        if cell.size == LARGE:
            facts.append(Predicate.attribute("large-surface", cell.id))
    for obj in scene.objects:
        facts.append(Predicate.attribute(SMALL if obj.size == SMALL else LARGE, obj.label))
        if obj.role in ROLES:
            facts.append(Predicate.attribute(obj.role, obj.label))
        if obj.kind == TOOL:
            facts.append(Predicate.attribute("tool", obj.label))
    return frozenset(facts)


def scene_from_state(state, template):
    """Rebuild a scene from its dynamic facts, taking cells and catalog from `template`."""
    facts = state.facts if isinstance(state, State) else frozenset(state)
    cell_ids = {c.id for c in template.cells}
    labels = {o.label for o in template.objects}

    occupants = {}
    stacks = {}
    gripper = None
    for fact in facts:
        if fact.name == "on" and fact.relative not in (AIR, HAND):
            if fact.focal in cell_ids:
                occupants[fact.focal] = fact.relative
            elif fact.focal in labels:
                stacks[fact.relative] = fact.focal
        elif fact.name == "in" and fact.focal == HAND and fact.relative != AIR:
            gripper = fact.relative

    objects = []
    for obj in template.objects:
        held = {f.relative for f in facts if f.name == "in" and f.focal == obj.label and f.relative != AIR}
        contents = [item for item in obj.contents if item in held]
        contents.extend(sorted(held - set(contents)))
        orientation = UPSIDE_DOWN if Predicate.attribute("upside-down", obj.label) in facts else UPRIGHT
        attributes = [a for a in obj.attributes if Predicate.attribute(f"is-{a}", obj.label) in facts]
        attributes.extend(
            sorted(
                f.name[3:]
                for f in facts
                if f.name.startswith("is-") and f.focal == obj.label and f.name[3:] not in attributes
            )
        )
        objects.append(replace(obj, contents=tuple(contents), orientation=orientation, attributes=tuple(attributes)))

    ordered = {c.id: occupants[c.id] for c in template.cells if c.id in occupants}
    return replace(template, objects=tuple(objects), occupants=ordered, gripper=gripper, stacks=stacks)
