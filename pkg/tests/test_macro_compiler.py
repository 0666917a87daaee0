import pytest

from foonc.errors import InconsistentInit
from foonc.services.foon_graph import ObjectNode, StateAttribute, retrieve_task_tree
from foonc.services import macro_compiler
from foonc.services.macro_compiler import (
    apply_macro,
    compile_foon,
    compile_task_tree,
    emit_macro_problem,
    macro_problem_facts,
    primary_object,
)
from foonc.services.pddl import parse_atoms, read_domain, read_problem
from foonc.services.planner import astar, ground
from foonc.services.scene import scene_kitchen, standard_scene


@pytest.fixture
def vodka_ice_tree(vodka_ice_graph, vodka_ice_kitchen, vodka_ice_goal):
    return retrieve_task_tree(vodka_ice_graph, vodka_ice_goal, vodka_ice_kitchen)


@pytest.fixture
def recipe_tree(recipe_graph, recipe_goal):
    return retrieve_task_tree(recipe_graph, recipe_goal, scene_kitchen(standard_scene()))


def test_pour_vodka_operator(vodka_ice_tree):
    vodka, ice = compile_task_tree(vodka_ice_tree)
    assert vodka.name == "pour_vodka_0"
    assert vodka.preconditions == parse_atoms(
        "(under bottle table) (on table bottle) (in bottle vodka) (under vodka bottle) "
        "(in drinking_glass air) (under drinking_glass table) (on table drinking_glass)"
    )
    assert vodka.add_effects == parse_atoms("(in drinking_glass vodka) (under vodka drinking_glass)")
    assert vodka.delete_effects == parse_atoms("(in drinking_glass air)")
    assert ice.name == "pour_ice_1"
    assert ice.delete_effects == parse_atoms("(in cup ice) (under ice cup)")


def test_macro_pddl_matches_golden(vodka_ice_tree, vodka_ice_kitchen, vodka_ice_goal, golden):
    _, domain, problem = compile_foon(vodka_ice_tree, vodka_ice_kitchen, vodka_ice_goal)
    assert domain.text == golden("vodka_ice_macro_domain.pddl")
    assert problem.text == golden("vodka_ice_macro_problem.pddl")
    again = compile_foon(vodka_ice_tree, vodka_ice_kitchen, vodka_ice_goal)
    assert again[1].text == domain.text


def test_problem_facts_are_computed_once(vodka_ice_tree, vodka_ice_kitchen, vodka_ice_goal, monkeypatch):
    calls = []
    original = macro_compiler.macro_problem_facts

    def counted(kitchen, goal):
        calls.append(goal)
        return original(kitchen, goal)

    monkeypatch.setattr(macro_compiler, "macro_problem_facts", counted)
    _, _, problem = compile_foon(vodka_ice_tree, vodka_ice_kitchen, vodka_ice_goal)
    assert len(calls) == 1
    assert emit_macro_problem(vodka_ice_tree, vodka_ice_kitchen, vodka_ice_goal).text == problem.text


def test_recipe_operator_names(recipe_tree):
    assert [op.name for op in compile_task_tree(recipe_tree)] == [
        "pour_vodka_0",
        "pour_ice_1",
        "pour_tomato_juice_2",
        "pour_lemon_juice_3",
        "pour_worcestershire_sauce_4",
        "sprinkle_salt_5",
        "sprinkle_black_pepper_6",
        "mix_drinking_glass_7",
        "insert_celery_stick_8",
    ]


def test_primary_object_falls_back_to_changed_output(recipe_tree):
    mix = recipe_tree.units[7]
    assert primary_object(mix) == "drinking_glass"


def test_operators_replay_to_the_goal(recipe_tree, recipe_goal):
    init, goal = macro_problem_facts(scene_kitchen(standard_scene()), recipe_goal)
    state = frozenset(init)
    for op in compile_task_tree(recipe_tree):
        assert set(op.preconditions) <= state, op.name
        state = apply_macro(state, op)
    assert set(goal) <= state


def test_every_operator_changes_something(recipe_tree):
    for op in compile_task_tree(recipe_tree):
        assert op.add_effects or op.delete_effects
        assert not set(op.add_effects) & set(op.preconditions)


def test_emitted_documents_solve(vodka_ice_tree, vodka_ice_kitchen, vodka_ice_goal):
    _, domain, problem = compile_foon(vodka_ice_tree, vodka_ice_kitchen, vodka_ice_goal)
    name, constants, operators = read_domain(domain.text)
    problem_name, domain_ref, objects, init, goal = read_problem(problem.text)
    assert (name, problem_name, domain_ref) == ("foon_macro", "make_drinking_glass", "foon_macro")
    task = ground(operators, constants + objects, init, goal)
    plan = astar(task)
    assert [step.name for step in plan.steps] == ["pour_vodka_0", "pour_ice_1"]


def test_inconsistent_kitchen_is_rejected(vodka_ice_goal):
    kitchen = (ObjectNode("cup", (StateAttribute.physical("empty"),), ("ice",)),)
    with pytest.raises(InconsistentInit):
        macro_problem_facts(kitchen, vodka_ice_goal)
