"""Exception hierarchy shared by the permris modules and the CLI exit-code map."""


class PermRisError(Exception):
    """Base class for all permris errors."""


class InvalidSizeError(PermRisError, ValueError):
    """Surface or permutation size is not a positive integer of the expected shape."""


class InvalidArgumentError(PermRisError, ValueError):
    """Argument violates a documented precondition."""


class HardwareModeError(PermRisError, ValueError):
    """Requested operation is not compatible with the model's hardware mode."""


class DegenerateSplitError(PermRisError, ArithmeticError):
    """Beam-split sum has a (near-)zero entry: constituent phases are antipodal."""


class BudgetExceededError(PermRisError, RuntimeError):
    """Grid oracle would exceed the evaluation budget."""

    def __init__(self, required: int, budget: int):
        self.required = int(required)
        self.budget = int(budget)
        super().__init__(
            f"grid search needs {self.required} evaluations, budget is {self.budget} "
            f"(raise PERMRIS_BUDGET to allow)"
        )
