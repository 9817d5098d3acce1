"""Exception types shared across the package."""


class StratError(Exception):
    """Base class for every error raised by stratmc."""


class ParseError(StratError):
    """Syntax error in a formula or model file, with a 1-based location."""

    def __init__(self, message, line=1, column=1):
        self.line = line
        self.column = column
        self.message = message
        super().__init__(f"{message} (line {line}, column {column})")


class LogicTagError(ParseError):
    """A node kind that is not allowed under the requested logic."""


class UnknownAgent(StratError):
    pass


class InvalidPlay(StratError):
    pass


class NotReachable(StratError):
    pass


class BoundExceeded(StratError):
    pass


class StateBudgetExceeded(StratError):
    """An automaton or game construction grew past its state cap."""

    def __init__(self, construction, cap):
        self.construction = construction
        self.cap = cap
        super().__init__(f"state budget of {cap} exceeded in {construction}")


class NotClosed(StratError):
    pass


class NotHierarchicalFormula(StratError):
    pass


class NotHierarchicalInstance(StratError):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(self.diagnostics) or "instance is not hierarchical")


class NotHierarchicalCoalition(StratError):
    def __init__(self, witness):
        self.witness = witness
        super().__init__(str(witness))


class RouteMismatch(StratError):
    pass


class NoWitnessAvailable(StratError):
    pass


class UnsupportedObjectiveIndex(StratError):
    pass


class StaleReference(StratError):
    pass
