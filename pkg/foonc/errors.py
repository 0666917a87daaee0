"""Exception hierarchy shared by every pipeline stage.

Each error carries the CLI exit code of the stage it belongs to
(0 ok, 1 parse, 2 retrieval/compile, 3 planning, 4 execution).
"""


class FooncError(Exception):
    exit_code = 2


class ParseFailed(FooncError):
    exit_code = 1

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        first = next((d for d in self.diagnostics if d.severity == "error"), None)
        detail = f"line {first.line}: {first.message}" if first else "parse failed"
        super().__init__(detail)


class ConfigError(FooncError):
    exit_code = 2


# retrieval / compile

class GoalUnknown(FooncError):
    exit_code = 2


class Unsolvable(FooncError):
    exit_code = 2


class UnknownRelation(FooncError):
    exit_code = 2


class NameCollision(FooncError):
    exit_code = 2


class IngredientCollision(FooncError):
    exit_code = 2


class InconsistentInit(FooncError):
    exit_code = 2

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations) or "inconsistent init")


# planning

class PreconditionUnsatisfied(FooncError):
    exit_code = 3

    def __init__(self, macro_name, violated):
        self.macro_name = macro_name
        self.violated = tuple(violated)
        rendered = " ".join(str(f) for f in self.violated)
        super().__init__(f"{macro_name}: unsatisfied {rendered}")


class UndeclaredSymbol(FooncError):
    exit_code = 3


class NoPlan(FooncError):
    exit_code = 3


class ResourceLimit(FooncError):
    exit_code = 3

    def __init__(self, message, expanded=0, generated=0):
        self.expanded = expanded
        self.generated = generated
        super().__init__(message)


class ExternalPlannerFailed(FooncError):
    exit_code = 3


# execution

class MissingTargetCell(FooncError):
    exit_code = 4


class PreconditionViolated(FooncError):
    exit_code = 4

    def __init__(self, step, missing):
        self.step = step
        self.missing = tuple(missing)
        rendered = " ".join(str(f) for f in self.missing)
        super().__init__(f"{step}: missing {rendered}")


class LibraryFormatError(FooncError):
    exit_code = 4
