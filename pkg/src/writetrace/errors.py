"""Exception types raised across the package."""

from __future__ import annotations


class WritetraceError(Exception):
    """Base class for data errors surfaced by the CLI with exit status 1."""


class MissingColumn(WritetraceError):
    def __init__(self, name: str):
        super().__init__(f"missing column: {name}")
        self.name = name


class MalformedRow(WritetraceError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"malformed row at line {line}: {reason}")
        self.line = line
        self.reason = reason


class NonMonotonicRevision(WritetraceError):
    def __init__(self, line: int, detail: str = "revision numbers must strictly increase"):
        super().__init__(f"non-monotonic revision at line {line}: {detail}")
        self.line = line


class EventOutOfCalendar(UserWarning):
    """Warning record: events whose timestamps fall outside the semester calendar."""

    def __init__(self, count: int, owner: str = ""):
        super().__init__(f"{count} event(s) outside the calendar span{f' for {owner}' if owner else ''}")
        self.count = count
        self.owner = owner


class EmptyCohort(WritetraceError):
    pass


class EmptyGroup(WritetraceError):
    pass


class WindowTooLarge(WritetraceError):
    pass


class EvenWindow(WritetraceError):
    pass


class SeriesTooShort(WritetraceError):
    pass


class OutOfScaleItem(WritetraceError):
    def __init__(self, index: int, value: int, bounds: tuple[int, int]):
        super().__init__(f"item q{index} = {value} outside scale {bounds[0]}..{bounds[1]}")
        self.index = index


class DegenerateVariance(WritetraceError):
    pass


class TooFewPoints(WritetraceError):
    pass


class AllPointsIdentical(WritetraceError):
    pass


class AllZeroDifferences(WritetraceError):
    pass


class TooFewPairs(WritetraceError):
    pass


class EmptySample(WritetraceError):
    pass


class ZeroVariance(WritetraceError):
    pass


class ZeroMarginal(WritetraceError):
    pass


class UnboundSlot(WritetraceError):
    def __init__(self, name: str):
        super().__init__(f"template slot has no binding: {name}")
        self.name = name


class MismatchedIds(WritetraceError):
    pass
