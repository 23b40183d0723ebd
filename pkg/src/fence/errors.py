"""Shared exception hierarchy."""


class FenceError(Exception):
    """Base class for every error raised by this package."""


class EvaluatorError(FenceError):
    """A custom constraint evaluator raised instead of returning a verdict."""

    def __init__(self, production: int, label: str | None, cause: BaseException):
        self.production = production
        self.label = label
        self.cause = cause
        ref = label if label is not None else f"#{production}"
        super().__init__(f"constraint evaluator for production {ref} failed: {cause!r}")
