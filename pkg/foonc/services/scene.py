"""Table-cell world: cells, the object catalog, placements, stacks and contents."""

import json
import logging
import random
from dataclasses import dataclass, field, replace
from typing import Dict, Optional, Tuple

from foonc.services.foon_graph import ObjectNode, StateAttribute

logger = logging.getLogger(__name__)

SCENE_FORMAT_VERSION = 1

SMALL = "small"
LARGE = "large"
SIZES = (SMALL, LARGE)

CONTAINER = "container"
INGREDIENT = "ingredient"
TOOL = "tool"
KINDS = (CONTAINER, INGREDIENT, TOOL)

# container roles
VESSEL = "vessel"
POURER = "pourer"
SHAKER = "shaker"
ROLES = (VESSEL, POURER, SHAKER)

UPRIGHT = "upright"
UPSIDE_DOWN = "upside_down"
ORIENTATIONS = (UPRIGHT, UPSIDE_DOWN)

GRID_COLUMNS = 7
CELL_COUNT = 21
LARGE_CELLS = ("cell_12", "cell_13", "cell_14")
STACK_BASES = ("can", "ice_cup", "lemon_juice_cup", "worcestershire_cup")


@dataclass(frozen=True)
class Cell:
    id: str
    size: str
    col: int
    row: int

    @property
    def coord(self):
        return (self.col, self.row)


@dataclass(frozen=True)
class SceneObject:
    label: str
    size: str
    kind: str
    contents: Tuple[str, ...] = ()
    orientation: str = UPRIGHT
    role: Optional[str] = None
    attributes: Tuple[str, ...] = ()  # physical states, e.g. "mixed"

    @property
    def is_container(self):
        return self.kind == CONTAINER


@dataclass(frozen=True)
class SceneState:
    """One configuration of the kitchen. Treated as a value: never mutated."""

    cells: Tuple[Cell, ...]
    objects: Tuple[SceneObject, ...]
    occupants: Dict[str, str] = field(default_factory=dict)  # cell id -> object label
    gripper: Optional[str] = None
    stacks: Dict[str, str] = field(default_factory=dict)  # object -> object beneath

    def object(self, label):
        for obj in self.objects:
            if obj.label == label:
                return obj
        raise KeyError(label)

    def has_object(self, label):
        return any(o.label == label for o in self.objects)

    def cell(self, cell_id):
        for cell in self.cells:
            if cell.id == cell_id:
                return cell
        raise KeyError(cell_id)

    def is_cell(self, symbol):
        return any(c.id == symbol for c in self.cells)

    def cell_holding(self, label):
        for cell_id, occupant in self.occupants.items():
            if occupant == label:
                return cell_id
        return None

    def container_holding(self, label):
        for obj in self.objects:
            if obj.is_container and label in obj.contents:
                return obj.label
        return None

    def top_of(self, label):
        for top, base in self.stacks.items():
            if base == label:
                return top
        return None

    def location(self, label):
        """Where a catalog object is: ("cell", id), ("stack", base), ("gripper",) or ("inside", container)."""
        cell_id = self.cell_holding(label)
        if cell_id is not None:
            return ("cell", cell_id)
        if label in self.stacks:
            return ("stack", self.stacks[label])
        if self.gripper == label:
            return ("gripper",)
        container = self.container_holding(label)
        if container is not None:
            return ("inside", container)
        return None

    def resting_cell(self, label):
        """The cell under an object, following stacks and containers down; None if held."""
        seen = set()
        while label not in seen:
            seen.add(label)
            where = self.location(label)
            if where is None or where[0] == "gripper":
                return None
            if where[0] == "cell":
                return where[1]
            label = where[1]
        return None

    def free_cells(self):
        return [c.id for c in self.cells if c.id not in self.occupants]

    def substances(self):
        """Contents labels that are not catalog objects, in first-seen order."""
        labels = []
        for obj in self.objects:
            for item in obj.contents:
                if not self.has_object(item) and item not in labels:
                    labels.append(item)
        return labels

    def with_object(self, obj):
        objects = tuple(obj if o.label == obj.label else o for o in self.objects)
        return replace(self, objects=objects)

    def violations(self):
        """Invariant violations of this scene; empty when valid."""
        problems = []
        cell_ids = [c.id for c in self.cells]
        if len(set(cell_ids)) != len(cell_ids):
            problems.append("duplicate cell ids")
        labels = [o.label for o in self.objects]
        if len(set(labels)) != len(labels):
            problems.append("duplicate object labels")

        for cell_id, occupant in self.occupants.items():
            if cell_id not in cell_ids:
                problems.append(f"unknown cell {cell_id}")
                continue
            if not self.has_object(occupant):
                problems.append(f"unknown occupant {occupant} on {cell_id}")
                continue
            if self.object(occupant).size == LARGE and self.cell(cell_id).size != LARGE:
                problems.append(f"large object {occupant} on small cell {cell_id}")

        for obj in self.objects:
            places = sum(
                [
                    list(self.occupants.values()).count(obj.label),
                    1 if obj.label in self.stacks else 0,
                    1 if self.gripper == obj.label else 0,
                    sum(1 for o in self.objects if o.is_container and obj.label in o.contents),
                ]
            )
            if places != 1:
                problems.append(f"{obj.label} is in {places} places")
            if obj.size not in SIZES or obj.kind not in KINDS or obj.orientation not in ORIENTATIONS:
                problems.append(f"{obj.label} has an invalid catalog entry")
            if not obj.is_container and obj.contents:
                problems.append(f"non-container {obj.label} has contents")
            if obj.role is not None and (obj.role not in ROLES or not obj.is_container):
                problems.append(f"{obj.label} has invalid role {obj.role}")
            if obj.role in (POURER, SHAKER) and len(obj.contents) > 1:
                problems.append(f"dispenser {obj.label} holds more than one item")
            if obj.orientation == UPSIDE_DOWN and obj.contents:
                problems.append(f"upside-down {obj.label} is not empty")
            if len(set(obj.contents)) != len(obj.contents):
                problems.append(f"duplicate contents in {obj.label}")
            for item in obj.contents:
                if self.has_object(item) and self.object(item).is_container:
                    problems.append(f"container {item} nested inside {obj.label}")

        bases = list(self.stacks.values())
        for top, base in self.stacks.items():
            if not self.has_object(top) or not self.has_object(base):
                problems.append(f"stack {top} on {base} names unknown objects")
                continue
            if top == base:
                problems.append(f"{top} stacked on itself")
            if self.object(top).size == LARGE:
                problems.append(f"large object {top} is stacked")
            if bases.count(base) > 1:
                problems.append(f"more than one object on {base}")
            if self.cell_holding(base) is None:
                problems.append(f"stack base {base} is not on a cell")
            if self.object(base).orientation == UPSIDE_DOWN:
                problems.append(f"stack base {base} is upside down")

        if self.gripper is not None and not self.has_object(self.gripper):
            problems.append(f"gripper holds unknown {self.gripper}")
        return problems


def _grid_cells():
    cells = []
    for k in range(1, CELL_COUNT + 1):
        cell_id = f"cell_{k}"
        size = LARGE if cell_id in LARGE_CELLS else SMALL
        cells.append(Cell(cell_id, size, (k - 1) % GRID_COLUMNS, (k - 1) // GRID_COLUMNS))
    return tuple(cells)


# Bloody Mary catalog, with the canonical cell of each object
CATALOG = (
    (SceneObject("worcestershire_cup", SMALL, CONTAINER, ("worcestershire_sauce",), role=POURER), "cell_4"),
    (SceneObject("lemon_juice_cup", SMALL, CONTAINER, ("lemon_juice",), role=POURER), "cell_5"),
    (SceneObject("ice_cup", SMALL, CONTAINER, ("ice",), role=POURER), "cell_6"),
    (SceneObject("drinking_glass", SMALL, CONTAINER, (), role=VESSEL), "cell_7"),
    (SceneObject("can", SMALL, CONTAINER, ("tomato_juice",), role=POURER), "cell_8"),
    (SceneObject("bottle", SMALL, CONTAINER, ("vodka",), role=POURER), "cell_9"),
    (SceneObject("salt_shaker", SMALL, CONTAINER, ("salt",), role=SHAKER), "cell_10"),
    (SceneObject("pepper_shaker", SMALL, CONTAINER, ("black_pepper",), role=SHAKER), "cell_11"),
    (SceneObject("spoon", LARGE, TOOL), "cell_12"),
    (SceneObject("celery_stick", LARGE, INGREDIENT), "cell_13"),
    (SceneObject("knife", LARGE, TOOL), "cell_14"),
)


def standard_scene():
    """The eleven-object cocktail layout with fixed canonical placements."""
    objects = tuple(obj for obj, _ in CATALOG)
    occupants = {cell_id: obj.label for obj, cell_id in CATALOG}
    return SceneState(_grid_cells(), objects, occupants)


def random_scene(seed, upside_down_probability=0.25, stack_probability=0.3):
    """Seeded random configuration of the standard catalog.

    Large objects are shuffled over the large cells. Each small object may be
    stacked on a free stack base (the can or an upright cup); the rest are
    shuffled over the small cells. The glass may start upside down.
    """
    rng = random.Random(seed)
    cells = _grid_cells()
    objects = [obj for obj, _ in CATALOG]

    if rng.random() < upside_down_probability:
        objects = [
            replace(o, orientation=UPSIDE_DOWN) if o.role == VESSEL else o
            for o in objects
        ]

    large = [o.label for o in objects if o.size == LARGE]
    small = [o.label for o in objects if o.size == SMALL]
    rng.shuffle(large)
    rng.shuffle(small)

    occupants = {}
    for cell_id, label in zip(rng.sample(list(LARGE_CELLS), len(LARGE_CELLS)), large):
        occupants[cell_id] = label

    stacks = {}
    for label in small:
        if rng.random() >= stack_probability:
            continue
        if label in stacks.values():
            continue
        candidates = [
            b for b in STACK_BASES
            if b != label and b not in stacks and b not in stacks.values()
        ]
        if candidates:
            stacks[label] = rng.choice(candidates)

    grounded = [label for label in small if label not in stacks]
    small_cells = [c.id for c in cells if c.size == SMALL]
    for cell_id, label in zip(rng.sample(small_cells, len(grounded)), grounded):
        occupants[cell_id] = label

    scene = SceneState(cells, tuple(objects), occupants, None, stacks)
    problems = scene.violations()
    if problems:
        raise AssertionError(f"random_scene({seed}) produced an invalid scene: {problems}")
    logger.debug("random scene %d: %d stacked, glass %s", seed, len(stacks), scene.object("drinking_glass").orientation)
    return scene


def scene_kitchen(scene):
    """Available FOON object nodes for the objects not inside a container."""
    nodes = []
    for obj in scene.objects:
        where = scene.location(obj.label)
        if where is not None and where[0] == "inside":
            continue
        states = []
        if obj.is_container and not obj.contents:
            states.append(StateAttribute.physical("empty"))
        states.extend(StateAttribute.physical(a) for a in obj.attributes)
        nodes.append(ObjectNode(obj.label, tuple(states), tuple(obj.contents)))
    return tuple(nodes)


def scene_to_json(scene):
    return {
        "version": SCENE_FORMAT_VERSION,
        "cells": [
            {"id": c.id, "size": c.size, "col": c.col, "row": c.row, "occupant": scene.occupants.get(c.id)}
            for c in scene.cells
        ],
        "objects": [
            {
                "label": o.label,
                "size": o.size,
                "kind": o.kind,
                "role": o.role,
                "contents": list(o.contents),
                "orientation": o.orientation,
                "attributes": list(o.attributes),
            }
            for o in scene.objects
        ],
        "gripper": scene.gripper,
        "stacks": dict(scene.stacks),
    }


def scene_from_json(data):
    if data.get("version") != SCENE_FORMAT_VERSION:
        raise ValueError(f"unsupported scene version {data.get('version')!r}")
    cells = tuple(Cell(c["id"], c["size"], int(c["col"]), int(c["row"])) for c in data["cells"])
    occupants = {c["id"]: c["occupant"] for c in data["cells"] if c.get("occupant")}
    objects = tuple(
        SceneObject(
            o["label"],
            o["size"],
            o["kind"],
            tuple(o.get("contents", ())),
            o.get("orientation", UPRIGHT),
            o.get("role"),
            tuple(o.get("attributes", ())),
        )
        for o in data["objects"]
    )
    scene = SceneState(cells, objects, occupants, data.get("gripper"), dict(data.get("stacks", {})))
    problems = scene.violations()
    if problems:
        raise ValueError("invalid scene: " + "; ".join(problems))
    return scene


def load_scene(path):
    with open(path, encoding="utf-8") as f:
        return scene_from_json(json.load(f))


def save_scene(scene, path):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(scene_to_json(scene), f, indent=2)
        f.write("\n")
