"""Text format for FOON subgraphs and kitchen files.

One tab-separated record per line:

    O<TAB>label                 begin an object node
    S<TAB>state[<TAB>relative]  add a state to the current node
    I<TAB>a,b,c                 set the current node's ingredients
    M<TAB>motion                end the inputs, name the motion
    //                          end the functional unit
    G<TAB>label[<TAB>exact]     footer: goal candidate (S/I records may follow)

A bare G matches every terminal output with that label; with `exact` the
block names one node literally.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional

from foonc.services.foon_graph import (
    GEOMETRIC,
    GEOMETRIC_RELATIONS,
    PHYSICAL,
    FOONGraph,
    FunctionalUnit,
    MotionNode,
    ObjectNode,
    StateAttribute,
    normalize_label,
    terminal_outputs,
)

logger = logging.getLogger(__name__)

ERROR = "error"
WARNING = "warning"
EXACT = "exact"


@dataclass(frozen=True)
class ParseDiagnostic:
    line: int
    message: str
    severity: str = ERROR

    def __str__(self):
        return f"line {self.line}: {self.severity}: {self.message}"


@dataclass
class ParseResult:
    graph: Optional[FOONGraph] = None
    diagnostics: List[ParseDiagnostic] = field(default_factory=list)
    kitchen: Optional[tuple] = None

    @property
    def ok(self):
        return not any(d.severity == ERROR for d in self.diagnostics)

    @property
    def errors(self):
        return [d for d in self.diagnostics if d.severity == ERROR]

    @property
    def warnings(self):
        return [d for d in self.diagnostics if d.severity == WARNING]


class _NodeBuilder:
    def __init__(self, label, line):
        self.label = label
        self.line = line
        self.states = []
        self.ingredients = []
        self.exact = False

    def build(self):
        return ObjectNode(self.label, tuple(self.states), tuple(self.ingredients))


class _Reader:
    """Line-oriented state machine shared by subgraph and kitchen parsing."""

    def __init__(self, text):
        self.diagnostics = []
        self.lines = []
        self.text = self._decode(text)
        if self.text is not None:
            self.lines = self.text.split("\n")
            if self.lines and self.lines[-1] == "":
                self.lines.pop()

    def _decode(self, text):
        if isinstance(text, str):
            return text
        try:
            return bytes(text).decode("utf-8")
        except UnicodeDecodeError as e:
            line = bytes(text)[: e.start].count(b"\n") + 1
            self.diagnostics.append(ParseDiagnostic(line, "input is not valid UTF-8"))
            return None

    def error(self, line, message):
        self.diagnostics.append(ParseDiagnostic(line, message, ERROR))

    def warn(self, line, message):
        self.diagnostics.append(ParseDiagnostic(line, message, WARNING))

    def records(self):
        for number, raw in enumerate(self.lines, start=1):
            line = raw.rstrip("\r")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            if line == "//":
                yield number, "//", []
                continue
            tag, *fields = line.split("\t")
            yield number, tag, fields

    def add_state(self, node, number, fields):
        if len(fields) not in (1, 2) or not all(f.strip() for f in fields):
            self.error(number, "malformed state record: expected S<TAB>state[<TAB>relative]")
            return
        label = normalize_label(fields[0])
        relative = normalize_label(fields[1]) if len(fields) == 2 else None
        if relative is not None and label not in GEOMETRIC_RELATIONS:
            self.warn(number, f"relative object ignored for physical state {label!r}")
            relative = None
        if any(s.label == label for s in node.states):
            self.warn(number, f"duplicate state {label!r} on {node.label!r} ignored")
            return
        try:
            if relative is not None:
                node.states.append(StateAttribute(GEOMETRIC, label, relative))
            else:
                node.states.append(StateAttribute(PHYSICAL, label))
        except ValueError as e:
            self.error(number, str(e))

    def set_ingredients(self, node, number, fields):
        if len(fields) != 1 or not fields[0].strip():
            self.error(number, "malformed ingredient record: expected I<TAB>a,b,...")
            return
        ingredients = []
        for raw in fields[0].split(","):
            label = normalize_label(raw)
            if not label:
                self.error(number, "empty ingredient label")
                return
            if label in ingredients:
                self.warn(number, f"duplicate ingredient {label!r} ignored")
                continue
            ingredients.append(label)
        node.ingredients = ingredients

    def object_label(self, number, fields):
        if len(fields) != 1 or not normalize_label(fields[0]):
            self.error(number, "malformed object record: expected O<TAB>label")
            return None
        return normalize_label(fields[0])


def _build_node(reader, builder):
    try:
        return builder.build()
    except ValueError as e:
        reader.error(builder.line, str(e))
        return None


def parse_subgraph(text):
    """Parse a FOON subgraph file. Never raises on malformed input."""
    reader = _Reader(text)
    if reader.text is None:
        return ParseResult(None, reader.diagnostics)

    units = []
    goals = []
    goal_blocks = []
    inputs, outputs = [], []
    motion = None
    current = None
    unit_start = None
    in_footer = False

    def close_node():
        nonlocal current
        if current is None:
            return
        node = _build_node(reader, current)
        if node is not None:
            if in_footer:
                goals.append(node)
            else:
                (outputs if motion else inputs).append(node)
        current = None

    last_line = len(reader.lines)
    for number, tag, fields in reader.records():
        if tag == "O":
            if in_footer:
                reader.error(number, "object line outside a unit")
                continue
            close_node()
            label = reader.object_label(number, fields)
            if label is None:
                continue
            if unit_start is None:
                unit_start = number
            current = _NodeBuilder(label, number)
        elif tag in ("S", "I"):
            if current is None:
                reader.error(number, f"{tag} record outside an object node")
                continue
            if tag == "S":
                reader.add_state(current, number, fields)
            else:
                reader.set_ingredients(current, number, fields)
        elif tag == "M":
            if in_footer or unit_start is None:
                reader.error(number, "motion line outside a unit")
                continue
            if motion is not None:
                reader.error(number, "second motion line in one unit")
                continue
            close_node()
            if len(fields) != 1 or not normalize_label(fields[0]):
                reader.error(number, "malformed motion record: expected M<TAB>motion")
                continue
            if not inputs:
                reader.error(number, "unit has no inputs")
            motion = normalize_label(fields[0])
        elif tag == "//":
            if unit_start is None:
                reader.error(number, "unit terminator without a unit")
                continue
            close_node()
            if motion is None:
                reader.error(number, "missing motion line")
            elif not outputs:
                reader.error(number, "unit with no outputs")
            elif inputs:
                try:
                    unit = FunctionalUnit(tuple(inputs), MotionNode(motion), tuple(outputs))
                except ValueError as e:
                    reader.error(number, str(e))
                else:
                    if unit in units:
                        reader.warn(number, "duplicate functional unit removed")
                    else:
                        units.append(unit)
            inputs, outputs, motion, unit_start = [], [], None, None
        elif tag == "G":
            if unit_start is not None:
                reader.error(number, "goal record inside an unterminated unit")
                continue
            close_node()
            in_footer = True
            if len(fields) not in (1, 2) or not normalize_label(fields[0]):
                reader.error(number, "malformed goal record: expected G<TAB>label[<TAB>exact]")
                continue
            if len(fields) == 2 and fields[1].strip() != EXACT:
                reader.error(number, f"unknown goal flag {fields[1].strip()!r}")
                continue
            current = _NodeBuilder(normalize_label(fields[0]), number)
            current.exact = len(fields) == 2
            goal_blocks.append(current)
        else:
            reader.error(number, f"unknown line tag {tag!r}")

    close_node()
    if unit_start is not None:
        reader.error(last_line, "functional unit not terminated by //")

    result = ParseResult(None, reader.diagnostics)
    if not result.ok:
        return result

    graph = FOONGraph(tuple(units))
    candidates = set()
    for builder, node in zip(goal_blocks, goals):
        if builder.exact or builder.states or builder.ingredients:
            candidates.add(node)
            continue
        matches = [n for n in terminal_outputs(graph) if n.label == node.label]
        if not matches:
            reader.warn(builder.line, f"goal {node.label!r} matches no terminal output")
        candidates.update(matches)
    if not units:
        reader.warn(len(reader.lines), "file contains no functional units")
    result.graph = FOONGraph(tuple(units), frozenset(candidates))
    logger.debug("parsed %d units, %d goal candidates", len(units), len(candidates))
    return result


def parse_kitchen(text):
    """Parse a kitchen file: O/S/I blocks only, one available node per block."""
    reader = _Reader(text)
    if reader.text is None:
        return ParseResult(None, reader.diagnostics, kitchen=None)

    nodes = []
    current = None

    def close_node():
        nonlocal current
        if current is not None:
            node = _build_node(reader, current)
            if node is not None:
                if node in nodes:
                    reader.warn(current.line, f"duplicate kitchen object {node} ignored")
                else:
                    nodes.append(node)
        current = None

    for number, tag, fields in reader.records():
        if tag == "O":
            close_node()
            label = reader.object_label(number, fields)
            if label is not None:
                current = _NodeBuilder(label, number)
        elif tag in ("S", "I"):
            if current is None:
                reader.error(number, f"{tag} record outside an object node")
            elif tag == "S":
                reader.add_state(current, number, fields)
            else:
                reader.set_ingredients(current, number, fields)
        elif tag in ("M", "//", "G"):
            reader.error(number, f"{tag!r} record not allowed in a kitchen file")
        else:
            reader.error(number, f"unknown line tag {tag!r}")
    close_node()

    result = ParseResult(None, reader.diagnostics)
    if result.ok:
        result.kitchen = tuple(nodes)
    return result


def _node_lines(tag, node):
    lines = [f"{tag}\t{node.label}"]
    for state in node.states:
        if state.relative_object:
            lines.append(f"S\t{state.label}\t{state.relative_object}")
        else:
            lines.append(f"S\t{state.label}")
    if node.ingredients:
        lines.append("I\t" + ",".join(node.ingredients))
    return lines


def serialize_subgraph(graph):
    """Canonical text: units in order, then one full G block per goal candidate."""
    lines = []
    for unit in graph.units:
        for node in unit.inputs:
            lines.extend(_node_lines("O", node))
        lines.append(f"M\t{unit.motion.label}")
        for node in unit.outputs:
            lines.extend(_node_lines("O", node))
        lines.append("//")
    for node in sorted(graph.goal_candidates, key=lambda n: n.sort_key()):
        block = _node_lines("G", node)
        if not node.states and not node.ingredients:
            block[0] += f"\t{EXACT}"
        lines.extend(block)
    return "\n".join(lines) + "\n" if lines else ""


def serialize_kitchen(nodes):
    lines = []
    for node in nodes:
        lines.extend(_node_lines("O", node))
    return "\n".join(lines) + "\n" if lines else ""


def load_subgraph(path):
    """Read and parse a FOON file from disk; diagnostics are logged."""
    with open(path, "rb") as f:
        result = parse_subgraph(f.read())
    for diagnostic in result.diagnostics:
        if diagnostic.severity == ERROR:
            logger.error("%s: %s", path, diagnostic)
        else:
            logger.warning("%s: %s", path, diagnostic)
    return result


def load_kitchen(path):
    with open(path, "rb") as f:
        result = parse_kitchen(f.read())
    for diagnostic in result.diagnostics:
        logger.log(logging.ERROR if diagnostic.severity == ERROR else logging.WARNING, "%s: %s", path, diagnostic)
    return result
