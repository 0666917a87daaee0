"""Planning operators, typed symbols and PDDL documents (render and read back)."""

import re
from dataclasses import dataclass
from typing import Tuple

from jinja2 import Environment, FileSystemLoader

from foonc.config import BASE_DIR
from foonc.services.predicates import RELATIONS, Predicate, ordered_unique

TYPES = ("object", "container", "ingredient", "surface", "robot")
TYPE_PARENT = {"container": "object", "ingredient": "object", "surface": "object", "robot": "object"}

_IDENT_RE = re.compile(r"^[a-z][a-z0-9_\-]*$")

templates = Environment(
    loader=FileSystemLoader(str(BASE_DIR / "templates")),
    trim_blocks=True,
    lstrip_blocks=True,
    keep_trailing_newline=True,
    autoescape=False,
)


def render_template(name, /, **context):
    return templates.get_template(name).render(**context)


def is_subtype(kind, ancestor):
    while kind is not None:
        if kind == ancestor:
            return True
        kind = TYPE_PARENT.get(kind)
    return False


@dataclass(frozen=True)
class TypedSymbol:
    name: str
    type: str = "object"

    def __post_init__(self):
        if self.type not in TYPES:
            raise ValueError(f"unknown type {self.type!r} for {self.name}")


@dataclass(frozen=True)
class PlanningOperator:
    """A STRIPS operator. Effects and preconditions are ordered sets."""

    name: str
    parameters: Tuple[Tuple[str, str], ...] = ()
    preconditions: Tuple[Predicate, ...] = ()
    add_effects: Tuple[Predicate, ...] = ()
    delete_effects: Tuple[Predicate, ...] = ()

    def __post_init__(self):
        if not _IDENT_RE.match(self.name):
            raise ValueError(f"invalid operator name {self.name!r}")
        object.__setattr__(self, "parameters", tuple(tuple(p) for p in self.parameters))
        for field_name in ("preconditions", "add_effects", "delete_effects"):
            object.__setattr__(self, field_name, ordered_unique(getattr(self, field_name)))
        overlap = set(self.add_effects) & set(self.delete_effects)
        if overlap:
            raise ValueError(f"{self.name}: facts both added and deleted: {sorted(str(f) for f in overlap)}")
        names = [p for p, _ in self.parameters]
        if len(set(names)) != len(names):
            raise ValueError(f"{self.name}: duplicate parameter names")

    @property
    def parameter_text(self):
        return " ".join(f"{name} - {kind}" for name, kind in self.parameters)

    @property
    def is_ground(self):
        return not self.parameters


@dataclass(frozen=True)
class PddlDocument:
    kind: str
    name: str
    text: str

    def write(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(self.text)


def declare_predicates(operators, extra_facts=()):
    """Predicate declarations: the three relations, then every other name sorted."""
    arities = {}
    for op in operators:
        for fact in (*op.preconditions, *op.add_effects, *op.delete_effects):
            arities.setdefault(fact.name, len(fact.args))
    for fact in extra_facts:
        arities.setdefault(fact.name, len(fact.args))
    declarations = [f"({rel} ?x - object ?y - object)" for rel in RELATIONS]
    for name in sorted(n for n in arities if n not in RELATIONS):
        declarations.append(f"({name} ?x - object)")
    return declarations


def render_domain(name, operators, constants=(), types="object", predicates=None):
    text = render_template(
        "domain.pddl.j2",
        name=name,
        types=types,
        constants=list(constants),
        predicates=predicates if predicates is not None else declare_predicates(operators),
        operators=list(operators),
    )
    return PddlDocument("domain", name, text)


def render_problem(name, domain, init, goal, objects=()):
    text = render_template(
        "problem.pddl.j2",
        name=name,
        domain=domain,
        objects=list(objects),
        init=list(init),
        goal=list(goal),
    )
    return PddlDocument("problem", name, text)


# reading

_TOKEN_RE = re.compile(r"\(|\)|[^\s()]+")


def parse_sexpr(text):
    """Parse PDDL text into nested lists of lowercase tokens."""
    tokens = []
    for line in text.split("\n"):
        line = line.split(";", 1)[0]
        tokens.extend(t.lower() for t in _TOKEN_RE.findall(line))
    stack = [[]]
    for token in tokens:
        if token == "(":
            stack.append([])
        elif token == ")":
            if len(stack) == 1:
                raise ValueError("unbalanced ')' in PDDL text")
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(token)
    if len(stack) != 1:
        raise ValueError("unbalanced '(' in PDDL text")
    return stack[0]


def _typed_list(items):
    symbols = []
    pending = []
    i = 0
    while i < len(items):
        if items[i] == "-":
            kind = items[i + 1]
            symbols.extend((name, kind) for name in pending)
            pending = []
            i += 2
        else:
            pending.append(items[i])
            i += 1
    symbols.extend((name, "object") for name in pending)
    return symbols


def _atom(expr):
    return Predicate(expr[0], tuple(expr[1:]))


def _conjunction(expr):
    if not expr:
        return []
    if expr[0] == "and":
        return list(expr[1:])
    return [expr]


def parse_atoms(text):
    """Parse a whitespace-separated sequence of atoms such as `(on ?obj air) (in hand air)`."""
    return tuple(_atom(expr) for expr in parse_sexpr(text))


def _sections(define):
    for section in define[2:]:
        if isinstance(section, list) and section and isinstance(section[0], str):
            yield section[0], section[1:]


def read_domain(text):
    """Read a domain in the emitted subset: returns (name, constants, operators)."""
    (define,) = parse_sexpr(text)
    if define[0] != "define" or define[1][0] != "domain":
        raise ValueError("not a PDDL domain")
    name = define[1][1]
    constants = []
    operators = []
    for key, body in _sections(define):
        if key == ":constants":
            constants = [TypedSymbol(n, k) for n, k in _typed_list(body)]
        elif key == ":action":
            op_name = body[0]
            fields = dict(zip(body[1::2], body[2::2]))
            parameters = tuple(_typed_list(fields.get(":parameters", [])))
            preconditions = [_atom(e) for e in _conjunction(fields.get(":precondition", []))]
            adds, deletes = [], []
            for effect in _conjunction(fields.get(":effect", [])):
                if effect[0] == "not":
                    deletes.append(_atom(effect[1]))
                else:
                    adds.append(_atom(effect))
            operators.append(PlanningOperator(op_name, parameters, tuple(preconditions), tuple(adds), tuple(deletes)))
    return name, constants, operators


def read_problem(text):
    """Read a problem: returns (name, domain, objects, init, goal)."""
    (define,) = parse_sexpr(text)
    if define[0] != "define" or define[1][0] != "problem":
        raise ValueError("not a PDDL problem")
    name = define[1][1]
    domain = None
    objects, init, goal = [], [], []
    for key, body in _sections(define):
        if key == ":domain":
            domain = body[0]
        elif key == ":objects":
            objects = [TypedSymbol(n, k) for n, k in _typed_list(body)]
        elif key == ":init":
            init = [_atom(e) for e in body]
        elif key == ":goal":
            goal = [_atom(e) for e in _conjunction(body[0])] if body else []
    return name, domain, objects, init, goal
