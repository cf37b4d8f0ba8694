"""Exception hierarchy shared by every module."""


class EdgeCacheError(Exception):
    pass


class InvalidParameter(EdgeCacheError, ValueError):
    pass


class InfeasibleAction(EdgeCacheError):
    pass


class MultiCopyState(EdgeCacheError):
    pass


class NonUnitSize(EdgeCacheError):
    pass


class InstanceTooLarge(EdgeCacheError):
    pass


class InfeasibleFlow(EdgeCacheError):
    pass


class InsufficientHistory(EdgeCacheError, ValueError):
    pass


class ScenarioParseError(EdgeCacheError):
    pass


class ValidationError(EdgeCacheError, ValueError):
    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))
