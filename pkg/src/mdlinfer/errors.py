class MdlError(Exception):
    """Base class for all errors raised by mdlinfer."""


class InputError(MdlError):
    """Bad input data or configuration (CLI exit code 2)."""


class NumericError(MdlError):
    """A numerical routine failed (CLI exit code 3)."""


class SampleTooSmall(InputError):
    pass


class ZeroVariance(InputError):
    pass


class DomainError(MdlError, ValueError):
    pass


class OptimizerFailure(NumericError):
    pass


class EmptyAfterExclusion(MdlError, ValueError):
    pass


class ParseError(InputError):
    """Malformed input rows. ``problems`` holds (line, column, message) triples."""

    def __init__(self, problems):
        self.problems = list(problems)
        lines = [f"line {ln}, column {col!r}: {msg}" for ln, col, msg in self.problems]
        super().__init__("could not parse input:\n  " + "\n  ".join(lines))


class GroupTooSmall(InputError):
    pass


class DuplicateFeatureId(InputError):
    pass


class NonPositiveAfterShift(InputError):
    def __init__(self, offending):
        self.offending = list(offending)
        shown = ", ".join(f"{fid}[{grp}]={v!r}" for fid, grp, v in self.offending[:10])
        more = "" if len(self.offending) <= 10 else f" (+{len(self.offending) - 10} more)"
        super().__init__(f"values not positive after shift: {shown}{more}")


class AlreadyPreprocessed(InputError):
    pass
