"""Compile functional units into ground macro-level planning operators and PDDL."""

import logging

from foonc.errors import InconsistentInit, NameCollision
from foonc.services.pddl import PlanningOperator, TypedSymbol, declare_predicates, render_domain, render_problem
from foonc.services.predicates import AIR, TABLE, check_consistency, object_node_to_predicates, ordered_unique

logger = logging.getLogger(__name__)

MACRO_DOMAIN_NAME = "foon_macro"


def _node_facts(nodes):
    facts = []
    for node in nodes:
        facts.extend(object_node_to_predicates(node))
    return ordered_unique(facts)


def primary_object(unit):
    """The object a unit is named after.

    The first ingredient an output gained, else the first output that
    differs from its same-label input, else the first output.
    """
    for node in unit.outputs:
        before = unit.input_named(node.label)
        gained = [i for i in node.ingredients if before is None or i not in before.ingredients]
        if gained:
            return gained[0]
    for node in unit.outputs:
        if unit.input_named(node.label) != node:
            return node.label
    return unit.outputs[0].label


def compile_macro_po(unit, index):
    preconditions = _node_facts(unit.inputs)
    outcome = _node_facts(unit.outputs)
    pre_set = set(preconditions)
    out_set = set(outcome)
    return PlanningOperator(
        name=f"{unit.motion.label}_{primary_object(unit)}_{index}",
        parameters=(),
        preconditions=preconditions,
        add_effects=tuple(f for f in outcome if f not in pre_set),
        delete_effects=tuple(f for f in preconditions if f not in out_set),
    )


def compile_task_tree(tree):
    """One macro-PO per unit, indexed by position in the tree."""
    operators = []
    names = set()
    for index, unit in enumerate(tree.units):
        op = compile_macro_po(unit, index)
        if op.name in names:
            raise NameCollision(f"two units compile to {op.name}")
        names.add(op.name)
        operators.append(op)
    logger.debug("compiled %d macro operators", len(operators))
    return operators


def operator_symbols(operators, extra_facts=()):
    symbols = set()
    for op in operators:
        for fact in (*op.preconditions, *op.add_effects, *op.delete_effects):
            symbols.update(fact.args)
    for fact in extra_facts:
        symbols.update(fact.args)
    return symbols


def emit_macro_domain(units, objects, name=MACRO_DOMAIN_NAME, extra_facts=()):
    """Domain with every symbol declared as a constant of type object."""
    names = [op.name for op in units]
    if len(set(names)) != len(names):
        raise NameCollision("operator names must be unique")
    constants = [TypedSymbol(s) for s in sorted(set(objects) | {AIR, TABLE})]
    return render_domain(
        name,
        units,
        constants=constants,
        predicates=declare_predicates(units, extra_facts),
    )


def macro_problem_facts(kitchen, goal):
    """(init, goal) fact tuples of the macro problem; raises InconsistentInit."""
    init = _node_facts(kitchen)
    problems = check_consistency(init)
    if problems:
        raise InconsistentInit(problems)
    return init, object_node_to_predicates(goal)


def emit_macro_problem(tree, kitchen, goal, domain=MACRO_DOMAIN_NAME, name=None, facts=None):
    init, goal_facts = facts if facts is not None else macro_problem_facts(kitchen, goal)
    logger.debug("macro problem for %s over a %d-unit tree", goal, len(tree))
    return render_problem(name or f"make_{goal.label}", domain, init, goal_facts)


def compile_foon(tree, kitchen, goal):
    """Operators, domain and problem for a retrieved task tree."""
    operators = compile_task_tree(tree)
    init, goal_facts = macro_problem_facts(kitchen, goal)
    symbols = operator_symbols(operators, (*init, *goal_facts))
    domain = emit_macro_domain(operators, symbols, extra_facts=(*init, *goal_facts))
    problem = emit_macro_problem(tree, kitchen, goal, facts=(init, goal_facts))
    return operators, domain, problem


def apply_macro(facts, op):
    """STRIPS progression of a fact set through a ground operator."""
    facts = frozenset(facts)
    return (facts - set(op.delete_effects)) | set(op.add_effects)
