from dataclasses import replace

import pytest

from foonc.errors import PreconditionUnsatisfied
from foonc.services.foon_graph import retrieve_task_tree
from foonc.services.macro_compiler import compile_task_tree
from foonc.services.micro_domain import (
    CATALOG,
    HAND_FREE,
    MICRO_CONSTANTS,
    build_micro_problem,
    emit_micro_domain,
    emit_micro_problem,
    micro_goal,
    relax,
    relax_fact,
    scene_symbols,
)
from foonc.services.pddl import parse_atoms, read_domain, read_problem
from foonc.services.predicates import Predicate, scene_static_facts, scene_to_state
from foonc.services.scene import scene_kitchen


@pytest.fixture
def recipe_operators(recipe_graph, recipe_goal, scene):
    return compile_task_tree(retrieve_task_tree(recipe_graph, recipe_goal, scene_kitchen(scene)))


def current_state(scene):
    return scene_to_state(scene).union(scene_static_facts(scene))


def test_catalog_names():
    assert [op.name for op in CATALOG] == [
        "pick", "place-small", "place-large", "pour-all", "pour-some", "sprinkle", "mix", "insert", "flip",
    ]


def test_every_parameter_is_constrained():
    for op in CATALOG:
        mentioned = {a for f in op.preconditions for a in f.args}
        for name, _ in op.parameters:
            assert name in mentioned, (op.name, name)


def test_domain_reads_back_unchanged():
    name, constants, operators = read_domain(emit_micro_domain().text)
    assert name == "foon_micro"
    assert constants == list(MICRO_CONSTANTS)
    assert operators == list(CATALOG)


def test_relax_maps_table_placement():
    assert relax_fact(Predicate.relation("on", "table", "bottle")) == Predicate.attribute("placed", "bottle")
    assert relax_fact(Predicate.relation("under", "bottle", "table")) == Predicate.attribute("placed", "bottle")
    assert relax_fact(Predicate.relation("in", "bottle", "vodka")) == Predicate.relation("in", "bottle", "vodka")


def test_micro_goal_of_vodka_pour(recipe_operators):
    assert micro_goal(recipe_operators[0]) == parse_atoms(
        "(in drinking_glass vodka) (under vodka drinking_glass) (placed bottle) (in bottle vodka) "
        "(under vodka bottle) (placed drinking_glass) (in hand air)"
    )


def test_micro_goal_drops_deleted_facts(recipe_operators):
    goal = micro_goal(recipe_operators[1])
    assert Predicate.relation("in", "ice_cup", "air") in goal
    assert Predicate.relation("in", "ice_cup", "ice") not in goal
    assert goal[-1] == HAND_FREE


def test_problem_from_scene(recipe_operators, scene):
    problem = build_micro_problem(recipe_operators[0], current_state(scene), scene_symbols(scene))
    assert problem.source_macro == "pour_vodka_0"
    assert problem.goal == micro_goal(recipe_operators[0])
    text = emit_micro_problem(problem).text
    _, domain, objects, init, goal = read_problem(text)
    assert domain == "foon_micro"
    assert set(init) == problem.init.facts
    assert tuple(goal) == problem.goal
    assert {s.name for s in objects} >= {"bottle", "cell_9", "vodka"}


def test_unsatisfied_macro_preconditions(recipe_operators, scene):
    dry = scene.with_object(replace(scene.object("bottle"), contents=()))
    with pytest.raises(PreconditionUnsatisfied) as caught:
        build_micro_problem(recipe_operators[0], current_state(dry), scene_symbols(dry))
    assert Predicate.relation("in", "bottle", "vodka") in caught.value.violated


def test_relax_keeps_order():
    assert relax(parse_atoms("(under cup table) (on table cup) (in cup ice)")) == parse_atoms("(placed cup) (in cup ice)")
