import math
from collections import deque

import pytest
from hypothesis import given, settings, strategies as st

from foonc.errors import NoPlan, ResourceLimit, UndeclaredSymbol
from foonc.services.heuristics import blind, h_ff, h_max, iter_bits, relaxed_plan
from foonc.services.micro_domain import micro_domain, scene_symbols
from foonc.services.pddl import TypedSymbol
from foonc.services.planner import GroundAction, GroundedTask, Plan, astar, ground, solve, validate
from foonc.services.predicates import Predicate, scene_static_facts, scene_to_state


def fact(i):
    return Predicate.attribute("p", f"f{i}")


def task_from_bits(n_facts, actions, init, goal):
    """Build a task from bitmask action triples (pre, add, delete)."""
    def as_facts(mask):
        return [fact(i) for i in range(n_facts) if mask >> i & 1]

    ground_actions = [
        (f"a{k}", (), as_facts(pre), as_facts(add), as_facts(delete & ~add))
        for k, (pre, add, delete) in enumerate(actions)
    ]
    universe = [fact(i) for i in range(n_facts)]
    return GroundedTask.build(universe, ground_actions, as_facts(init), as_facts(goal))


def bfs_cost(task):
    if task.is_goal(task.init):
        return 0
    seen = {task.init}
    queue = deque([(task.init, 0)])
    while queue:
        state, depth = queue.popleft()
        for action in task.actions:
            if action.pre & ~state:
                continue
            successor = task.progress(state, action)
            if successor in seen:
                continue
            if task.is_goal(successor):
                return depth + 1
            seen.add(successor)
            queue.append((successor, depth + 1))
    return None


def chain(length):
    actions = [(1 << i, 1 << (i + 1), 1 << i) for i in range(length)]
    return task_from_bits(length + 1, actions, 1, 1 << length)


def test_chain_is_solved_optimally():
    plan = astar(chain(4))
    assert [s.name for s in plan.steps] == ["a0", "a1", "a2", "a3"]
    assert plan.cost == 4
    assert plan.stats.expanded >= 4


def test_goal_in_init_gives_empty_plan():
    task = task_from_bits(2, [(1, 2, 0)], 1, 1)
    assert astar(task).steps == ()


def test_unreachable_goal_raises():
    task = task_from_bits(3, [(1, 2, 0)], 1, 4)
    with pytest.raises(NoPlan):
        astar(task)


def test_node_budget_raises_resource_limit():
    with pytest.raises(ResourceLimit) as caught:
        astar(chain(3), node_budget=1)
    assert caught.value.expanded == 1


def test_validate_rejects_bad_plans():
    task = chain(2)
    good = astar(task)
    assert validate(good, task)
    assert not validate(Plan(good.steps[::-1]), task)
    assert not validate(Plan(good.steps[:1]), task)
    assert not validate(Plan((GroundAction("missing", (), 0, 0, 0),)), task)


def test_heuristic_values_on_chain():
    task = chain(3)
    assert h_max(task.init, task) == 3
    assert h_ff(task.init, task) == 3
    assert blind(task.init, task) == 1
    assert h_max(task.goal, task) == 0


def test_solve_uses_embedded_search_by_default():
    assert solve(chain(2), "hff").cost == 2


masks = st.integers(min_value=0, max_value=2**8 - 1)
random_tasks = st.builds(
    lambda actions, init, goal: task_from_bits(8, actions, init, goal),
    st.lists(st.tuples(masks, masks, masks), min_size=1, max_size=10),
    masks,
    masks,
)


@settings(max_examples=200)
@given(random_tasks)
def test_hmax_search_matches_breadth_first_optimum(task):
    optimum = bfs_cost(task)
    if optimum is None:
        with pytest.raises(NoPlan):
            astar(task, "hmax")
    else:
        plan = astar(task, "hmax")
        assert plan.cost == optimum
        assert validate(plan, task)


@given(random_tasks)
def test_hff_plans_validate(task):
    if bfs_cost(task) is None:
        return
    assert validate(astar(task, "hff"), task)


@given(random_tasks)
def test_hff_dominates_hmax_and_relaxed_plan_reaches_goal(task):
    hm = h_max(task.init, task)
    hf = h_ff(task.init, task)
    if hm == math.inf:
        assert hf == math.inf
        return
    assert hf >= hm
    state = task.init
    for index in relaxed_plan(task.init, task):
        action = task.actions[index]
        assert action.pre & ~state == 0
        state |= action.add
    assert task.is_goal(state)


def test_iter_bits():
    assert list(iter_bits(0b10110)) == [1, 2, 4]


def test_grounding_never_repeats_an_object(scene):
    init = scene_to_state(scene).facts | scene_static_facts(scene)
    task = ground(micro_domain(), scene_symbols(scene), init, ())
    assert task.actions
    for action in task.actions:
        assert len(set(action.args)) == len(action.args)
    assert task.lookup("pick", ("bottle", "cell_9")) is not None
    assert task.lookup("pour-some", ("vodka", "bottle", "drinking_glass")) is not None


def test_goal_with_undeclared_symbol():
    with pytest.raises(UndeclaredSymbol):
        ground(micro_domain(), [TypedSymbol("cell_1", "surface")], (), (Predicate.attribute("placed", "ghost"),))
