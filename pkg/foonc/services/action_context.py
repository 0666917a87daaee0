"""Action contexts: plan-step windows bound to motion payloads.

A context is stored under its exact step triple and under a generalized key
that replaces objects by categories and positions by offsets relative to
the current step's target cell.
"""

import base64
import hashlib
import json
import logging
import re
import threading
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from foonc.config import DATA_DIR
from foonc.errors import LibraryFormatError, MissingTargetCell

logger = logging.getLogger(__name__)

LIBRARY_FORMAT_VERSION = 1
NONE = "none"
CELL_CATEGORY = "cell"
DEFAULT_CATEGORIES_PATH = DATA_DIR / "categories.json"

_CELL_RE = re.compile(r"^cell_\d+$")


@dataclass(frozen=True)
class GroundStep:
    action_name: str
    args: Tuple[str, ...]
    target_cell: Optional[Tuple[int, int]] = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))
        if self.target_cell is not None:
            object.__setattr__(self, "target_cell", tuple(self.target_cell))

    @property
    def key(self):
        return (self.action_name, self.args)

    def located(self, target_cell):
        return GroundStep(self.action_name, self.args, target_cell)

    def __str__(self):
        return "(" + " ".join((self.action_name, *self.args)) + ")"


@dataclass(frozen=True)
class MotionPayload:
    motion_id: str
    dmp_params: bytes = b""

    def __post_init__(self):
        if not self.motion_id:
            raise ValueError("motion_id must be non-empty")


@dataclass(frozen=True)
class ActionContext:
    a_prev: Optional[GroundStep]
    a_now: GroundStep
    a_next: Optional[GroundStep]
    motion: Optional[MotionPayload] = None

    @property
    def exact_key(self):
        return (
            self.a_prev.key if self.a_prev else None,
            self.a_now.key,
            self.a_next.key if self.a_next else None,
        )


@dataclass(frozen=True)
class GeneralizedContext:
    action_triple: Tuple[str, str, str]
    arg_categories: Tuple[Tuple[str, ...], ...]
    rel_prev: Tuple[int, int]
    rel_next: Tuple[int, int]


@dataclass(frozen=True)
class MissingDemonstration:
    step_index: int
    step: GroundStep
    key: Optional[GeneralizedContext] = None
    reason: str = "no matching action context"


def categorize(symbol, categories):
    if _CELL_RE.match(symbol):
        return CELL_CATEGORY
    return categories.get(symbol, symbol)


def _offset(step, origin, role):
    if step is None:
        return (0, 0)
    if step.target_cell is None:
        raise MissingTargetCell(f"{role} step {step} has no target cell")
    return (step.target_cell[0] - origin[0], step.target_cell[1] - origin[1])


def generalize(ac, categories):
    if ac.a_now.target_cell is None:
        raise MissingTargetCell(f"step {ac.a_now} has no target cell")
    origin = ac.a_now.target_cell
    steps = (ac.a_prev, ac.a_now, ac.a_next)
    return GeneralizedContext(
        action_triple=tuple(s.action_name if s else NONE for s in steps),
        arg_categories=tuple(
            tuple(categorize(a, categories) for a in s.args) if s else (NONE,)
            for s in steps
        ),
        rel_prev=_offset(ac.a_prev, origin, "previous"),
        rel_next=_offset(ac.a_next, origin, "next"),
    )


def synthetic_payload(key):
    """Deterministic stand-in motion for a generalized context."""
    digest = hashlib.sha256(repr(key).encode("utf-8")).digest()
    return MotionPayload(f"{key.action_triple[1]}_{digest[:4].hex()}", digest)


class ContextLibrary:
    """Exact and generalized context maps. Reads are lock-free; `add` is serialized."""

    def __init__(self, categories=None):
        self.categories: Dict[str, str] = dict(categories or {})
        self.exact: Dict[tuple, MotionPayload] = {}
        self.generalized: Dict[GeneralizedContext, MotionPayload] = {}
        self.contexts: List[ActionContext] = []
        self._lock = threading.Lock()

    def __len__(self):
        return len(self.contexts)

    def add(self, ac):
        if ac.motion is None:
            raise ValueError("stored contexts need a motion payload")
        key = generalize(ac, self.categories)
        with self._lock:
            if ac.exact_key in self.exact:
                return
            self.exact[ac.exact_key] = ac.motion
            self.generalized.setdefault(key, ac.motion)
            self.contexts.append(ac)


def retrieve(library, prev, now, next_step, categories=None):
    """Exact match first, then generalized match, else MissingDemonstration."""
    categories = library.categories if categories is None else categories
    query = ActionContext(prev, now, next_step)
    payload = library.exact.get(query.exact_key)
    if payload is not None:
        return payload
    try:
        key = generalize(query, categories)
    except MissingTargetCell as e:
        return MissingDemonstration(0, now, None, str(e))
    payload = library.generalized.get(key)
    if payload is not None:
        return payload
    return MissingDemonstration(0, now, key)


@dataclass
class Resolution:
    payloads: List[Optional[MotionPayload]]
    gaps: List[MissingDemonstration]

    @property
    def complete(self):
        return not self.gaps


def windows(steps):
    for i, now in enumerate(steps):
        prev = steps[i - 1] if i > 0 else None
        nxt = steps[i + 1] if i + 1 < len(steps) else None
        yield i, prev, now, nxt


def resolve_steps(library, steps):
    """Sliding-window retrieval over steps whose target cells are known."""
    payloads = []
    gaps = []
    for i, prev, now, nxt in windows(list(steps)):
        found = retrieve(library, prev, now, nxt)
        if isinstance(found, MissingDemonstration):
            gaps.append(MissingDemonstration(i, now, found.key, found.reason))
            payloads.append(None)
        else:
            payloads.append(found)
    if gaps:
        logger.info("%d of %d steps lack an action context", len(gaps), len(payloads))
    return Resolution(payloads, gaps)


def resolve_plan(library, plan, scene):
    """Locate each plan step in the scene, then resolve its context window."""
    from foonc.services.sim_exec import locate_steps

    return resolve_steps(library, locate_steps(plan, scene))


def synthesize_library(segments, categories=None):
    """A library covering every window of the given located step segments."""
    library = ContextLibrary(categories if categories is not None else load_categories())
    for steps in segments:
        for _, prev, now, nxt in windows(list(steps)):
            key = generalize(ActionContext(prev, now, nxt), library.categories)
            library.add(ActionContext(prev, now, nxt, synthetic_payload(key)))
    logger.info("synthesized %d action contexts", len(library))
    return library


def load_categories(path=DEFAULT_CATEGORIES_PATH):
    with open(path, encoding="utf-8") as f:
        data = json.load(f)
    if not isinstance(data, dict) or not all(isinstance(v, str) for v in data.values()):
        raise LibraryFormatError(f"{path}: category map must be an object of strings")
    return data


def _step_to_json(step):
    if step is None:
        return None
    return {
        "action": step.action_name,
        "args": list(step.args),
        "target_cell": list(step.target_cell) if step.target_cell is not None else None,
    }


def _step_from_json(data):
    if data is None:
        return None
    cell = data.get("target_cell")
    return GroundStep(data["action"], tuple(data["args"]), tuple(cell) if cell is not None else None)


def library_to_json(library):
    contexts = []
    for ac in library.contexts:
        key = generalize(ac, library.categories)
        contexts.append(
            {
                "prev": _step_to_json(ac.a_prev),
                "now": _step_to_json(ac.a_now),
                "next": _step_to_json(ac.a_next),
                "rel_prev": list(key.rel_prev),
                "rel_next": list(key.rel_next),
                "motion_id": ac.motion.motion_id,
                "dmp_params_b64": base64.b64encode(ac.motion.dmp_params).decode("ascii"),
            }
        )
    return {"version": LIBRARY_FORMAT_VERSION, "categories": dict(library.categories), "contexts": contexts}


def library_from_json(data):
    if not isinstance(data, dict) or data.get("version") != LIBRARY_FORMAT_VERSION:
        raise LibraryFormatError(f"unsupported library version {data.get('version') if isinstance(data, dict) else None!r}")
    library = ContextLibrary(data.get("categories", {}))
    for number, entry in enumerate(data.get("contexts", [])):
        try:
            now = _step_from_json(entry["now"])
            if now is None:
                raise LibraryFormatError(f"context {number} has no current step")
            ac = ActionContext(
                _step_from_json(entry.get("prev")),
                now,
                _step_from_json(entry.get("next")),
                MotionPayload(entry["motion_id"], base64.b64decode(entry.get("dmp_params_b64", ""))),
            )
            key = generalize(ac, library.categories)
        except (KeyError, TypeError, ValueError, MissingTargetCell) as e:
            raise LibraryFormatError(f"context {number} is malformed: {e}")
        if list(key.rel_prev) != list(entry.get("rel_prev", key.rel_prev)) or list(key.rel_next) != list(
            entry.get("rel_next", key.rel_next)
        ):
            raise LibraryFormatError(f"context {number} offsets disagree with its target cells")
        library.add(ac)
    return library


def load_library(path):
    try:
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise LibraryFormatError(f"{path}: not valid JSON: {e}")
    return library_from_json(data)


def save_library(library, path):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(library_to_json(library), f, indent=2)
        f.write("\n")
