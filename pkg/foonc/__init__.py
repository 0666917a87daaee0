"""FOON to PDDL hierarchical planning toolkit."""

__version__ = "0.1.0"
