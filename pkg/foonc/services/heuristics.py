"""Delete-relaxation heuristics over bitset states.

States and fact sets are Python ints, one bit per fact of the task.
Every action costs 1, so relaxed first-achievement costs are layer numbers
of the relaxed planning graph.
"""

import math


def iter_bits(value):
    while value:
        low = value & -value
        yield low.bit_length() - 1
        value ^= low


def blind(state, task):
    return 0 if task.goal & ~state == 0 else 1


def h_max(state, task):
    """Layer at which every goal fact is first reached; inf if never."""
    goal = task.goal
    if goal & ~state == 0:
        return 0
    reached = state
    remaining = task.relaxed_actions
    level = 0
    while True:
        layer = reached
        rest = []
        for action in remaining:
            _, pre, add = action
            if pre & ~reached == 0:
                layer |= add
            else:
                rest.append(action)
        level += 1
        if goal & ~layer == 0:
            return level
        if layer == reached:
            return math.inf
        reached = layer
        remaining = rest


def relaxed_plan(state, task):
    """Action indices of a relaxed plan in layer order, or None if unreachable."""
    goal = task.goal
    if goal & ~state == 0:
        return []
    achiever = {}
    layer_of = {}
    reached = state
    remaining = task.relaxed_actions
    level = 0
    while goal & ~reached:
        layer = reached
        rest = []
        for action in remaining:
            index, pre, add = action
            if pre & ~reached == 0:
                for bit in iter_bits(add & ~layer):
                    achiever[bit] = action
                layer |= add
                layer_of[index] = level
            else:
                rest.append(action)
        if layer == reached:
            return None
        reached = layer
        remaining = rest
        level += 1

    chosen = set()
    marked = set()
    agenda = list(iter_bits(goal & ~state))
    while agenda:
        bit = agenda.pop()
        if bit in marked:
            continue
        marked.add(bit)
        index, pre, _ = achiever[bit]
        if index in chosen:
            continue
        chosen.add(index)
        agenda.extend(iter_bits(pre & ~state))
    return sorted(chosen, key=lambda i: (layer_of[i], i))


def h_ff(state, task):
    """Length of a relaxed plan extracted from the relaxed planning graph."""
    plan = relaxed_plan(state, task)
    return math.inf if plan is None else len(plan)


HEURISTICS = {"hmax": h_max, "hff": h_ff, "blind": blind}
