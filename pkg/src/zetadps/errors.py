"""Exception hierarchy shared by every layer of the package."""


class ZetaError(Exception):
    """Base class for all errors raised by zetadps."""


# store / environments

class ArityMismatch(ZetaError):
    pass


class UnknownColumn(ZetaError):
    pass


class NoSnapshot(ZetaError):
    pass


class UnknownId(ZetaError):
    pass


class DomainMismatch(ZetaError):
    pass


# engine

class Stuck(ZetaError):
    """The expression has no applicable reduction rule."""

    def __init__(self, expr, reason=""):
        self.expr = expr
        self.reason = reason
        super().__init__(f"stuck at {expr}" + (f": {reason}" if reason else ""))


class EffectStuck(Stuck):
    pass


class CyclicSwitch(ZetaError):
    pass


class IllTimedSwitch(ZetaError):
    pass


class IncompletePropagation(ZetaError):
    pass


# recovery

class UpstreamGap(ZetaError):
    pass


class TopologyGap(ZetaError):
    pass


class HypothesisViolation(ZetaError):
    pass


# frontend

class DSLSyntaxError(ZetaError, SyntaxError):
    """Parse failure; ``offset`` is the byte offset into the source."""

    def __init__(self, msg, offset):
        ZetaError.__init__(self, f"{msg} (at byte {offset})")
        self.msg = msg
        self.offset = offset

    def __str__(self):
        return f"{self.msg} (at byte {self.offset})"


class IndivisiblePeriod(ZetaError):
    pass


class AnnotationError(ZetaError):
    def __init__(self, cls, expected, declared):
        self.cls = cls
        self.expected = expected
        self.declared = declared
        super().__init__(
            f"class {cls}: declared timing {declared} does not match inferred {expected}"
        )


class CyclicWiring(ZetaError):
    pass


class UnknownClass(ZetaError):
    pass


class DuplicateId(ZetaError):
    pass


class ScenarioError(ZetaError):
    pass
