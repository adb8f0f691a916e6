"""Exception hierarchy shared by every satgame module."""


class SatGameError(Exception):
    """Base class for all satgame errors."""


class InvalidArgumentError(SatGameError, ValueError):
    """A player, action or profile index is out of range, or an input is malformed."""


class UnsupportedGameError(SatGameError):
    """The operation needs a deterministic game but got an environment-randomized one."""


class EnumerationSizeError(SatGameError):
    """Exhaustive enumeration would exceed the configured profile cap."""


class UndefinedConditionalError(SatGameError):
    """A conditional pmf was requested for an action with zero marginal probability."""


class DegenerateProbabilityError(SatGameError):
    """An importance ratio would divide by a zero play probability."""


class ConfigError(SatGameError, ValueError):
    """An experiment or learner configuration violates its invariants."""


class ParseError(SatGameError, ValueError):
    """A game, pmf, instance or config file could not be parsed."""

    def __init__(self, message, path=None, lineno=None, line=None):
        self.path = path
        self.lineno = lineno
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
        if lineno is not None:
            where = f"{where}:{lineno}" if where else f"line {lineno}"
        text = f"{where}: {message}" if where else message
        if line is not None:
            text = f"{text}\n    {line.rstrip()}"
        super().__init__(text)
