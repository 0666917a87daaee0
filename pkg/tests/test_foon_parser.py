from hypothesis import given, strategies as st

from foonc.services.foon_graph import FOONGraph, FunctionalUnit, MotionNode, ObjectNode, StateAttribute
from foonc.services.foon_parser import (
    ERROR,
    WARNING,
    parse_kitchen,
    parse_subgraph,
    serialize_kitchen,
    serialize_subgraph,
)

POUR_UNIT = "O\tbottle\nI\tvodka\nO\tdrinking_glass\nS\tempty\nM\tpour\nO\tbottle\nI\tvodka\nO\tdrinking_glass\nI\tvodka\n//\n"


def test_two_unit_file_parses(vodka_ice_graph):
    assert len(vodka_ice_graph.units) == 2
    first, second = vodka_ice_graph.units
    assert first.motion == MotionNode("pour")
    assert first.inputs[0] == ObjectNode("bottle", (), ("vodka",))
    assert first.inputs[1] == ObjectNode("drinking_glass", (StateAttribute.physical("empty"),))
    assert second.outputs[1] == ObjectNode("drinking_glass", (), ("ice", "vodka"))


def test_goal_block_with_ingredients_pins_the_goal(vodka_ice_graph):
    assert vodka_ice_graph.goal_candidates == frozenset({ObjectNode("drinking_glass", (), ("vodka", "ice"))})


def test_bare_goal_marks_terminal_outputs():
    result = parse_subgraph(POUR_UNIT + "G\tdrinking_glass\n")
    assert result.ok
    assert result.graph.goal_candidates == frozenset({ObjectNode("drinking_glass", (), ("vodka",))})


def test_missing_terminator_reports_last_line():
    text = POUR_UNIT.replace("//\n", "")
    result = parse_subgraph(text)
    assert not result.ok
    assert result.errors[0].line == len(text.splitlines())
    assert "not terminated" in result.errors[0].message


def test_empty_file_is_clean_with_zero_unit_warning():
    result = parse_subgraph("")
    assert result.ok
    assert result.graph.units == ()
    assert [(d.severity, d.line) for d in result.diagnostics] == [(WARNING, 0)]


def test_non_utf8_bytes_are_a_diagnostic():
    result = parse_subgraph(b"O\tbottle\n\xff\xfe\n")
    assert not result.ok
    assert result.errors[0].line == 2


def test_duplicate_unit_is_dropped_with_warning():
    result = parse_subgraph(POUR_UNIT + POUR_UNIT)
    assert result.ok
    assert len(result.graph.units) == 1
    assert any("duplicate functional unit" in d.message for d in result.warnings)


def test_structural_errors_carry_line_numbers():
    cases = {
        "S\tempty\n": (1, "outside an object node"),
        "M\tpour\n": (1, "motion line outside a unit"),
        "O\tbottle\nM\tpour\nM\tstir\nO\tbottle\n//\n": (3, "second motion line"),
        "O\tbottle\nO\tcup\n//\n": (3, "missing motion line"),
        "O\tbottle\nM\tpour\n//\n": (3, "no outputs"),
        "X\tbottle\n": (1, "unknown line tag"),
    }
    for text, (line, fragment) in cases.items():
        result = parse_subgraph(text)
        assert not result.ok, text
        assert result.errors[0].line == line, text
        assert fragment in result.errors[0].message, text


def test_duplicate_state_and_ingredient_warn():
    text = "O\tbowl\nS\tempty\nS\tempty\nI\tsalt,salt\nM\tshake\nO\tbowl\n//\n"
    result = parse_subgraph(text)
    assert result.ok
    unit = result.graph.units[0]
    assert unit.inputs[0] == ObjectNode("bowl", (StateAttribute.physical("empty"),), ("salt",))
    assert len(result.warnings) == 2


def test_geometric_state_keeps_relative_object():
    text = "O\ttomato\nS\tin\tbowl\nM\tslice\nO\ttomato\nS\tsliced\n//\n"
    result = parse_subgraph(text)
    assert result.ok
    (state,) = result.graph.units[0].inputs[0].states
    assert state == StateAttribute.geometric("in", "bowl")


def test_kitchen_rejects_unit_records(vodka_ice_kitchen):
    assert [n.label for n in vodka_ice_kitchen] == ["bottle", "cup", "drinking_glass"]
    result = parse_kitchen("O\tbottle\nM\tpour\n")
    assert not result.ok
    assert result.errors[0].severity == ERROR


def test_kitchen_serialization_reparses(vodka_ice_kitchen):
    assert parse_kitchen(serialize_kitchen(vodka_ice_kitchen)).kitchen == vodka_ice_kitchen


LABELS = ["bottle", "cup", "drinking_glass", "bowl", "spoon"]
INGREDIENTS = ["vodka", "ice", "salt", "tomato_juice"]
STATES = [StateAttribute.physical(s) for s in ("empty", "mixed", "sliced", "whole")] + [
    StateAttribute.geometric(relation, container)
    for relation in ("in", "on", "under")
    for container in ("bowl", "table")
]

nodes = st.builds(
    ObjectNode,
    st.sampled_from(LABELS),
    st.lists(st.sampled_from(STATES), unique_by=lambda s: s.label, max_size=3).map(tuple),
    st.lists(st.sampled_from(INGREDIENTS), unique=True, max_size=3).map(tuple),
)
units = st.builds(
    FunctionalUnit,
    st.lists(nodes, unique=True, min_size=1, max_size=3).map(tuple),
    st.sampled_from(["pour", "mix", "slice"]).map(MotionNode),
    st.lists(nodes, unique=True, min_size=1, max_size=3).map(tuple),
)
graphs = st.builds(
    FOONGraph,
    st.lists(units, unique=True, max_size=6).map(tuple),
    st.frozensets(nodes, max_size=3),
)


@given(graphs)
def test_serialize_then_parse_is_identity(graph):
    result = parse_subgraph(serialize_subgraph(graph))
    assert result.ok
    assert result.graph == graph
    assert serialize_subgraph(result.graph) == serialize_subgraph(graph)


def test_plain_goal_candidate_survives_round_trip():
    unit = FunctionalUnit((ObjectNode("bowl"),), MotionNode("mix"), (ObjectNode("bowl", (StateAttribute.physical("mixed"),)),))
    graph = FOONGraph((unit,), frozenset({ObjectNode("bowl")}))
    text = serialize_subgraph(graph)
    assert text.endswith("G\tbowl\texact\n")
    assert parse_subgraph(text).graph == graph


def test_unknown_goal_flag_is_an_error():
    result = parse_subgraph(POUR_UNIT + "G\tdrinking_glass\tmaybe\n")
    assert not result.ok
    assert "unknown goal flag" in result.errors[0].message


def test_vodka_ice_serializes_to_reference_text(vodka_ice_graph, golden):
    assert serialize_subgraph(vodka_ice_graph) == golden("vodka_ice.foon")
    assert serialize_subgraph(FOONGraph()) == ""
