"""Typed errors shared across the toolkit.

Data problems are raised as subclasses of ``ToolkitError`` so callers can
distinguish them from programming faults.
"""


class ToolkitError(Exception):
    pass


class ParseError(ToolkitError):
    """A file or response could not be decoded."""

    def __init__(self, line, reason):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class SchemaError(ParseError):
    """Decoded fine but violates a domain invariant."""


class DuplicateId(ToolkitError):
    def __init__(self, instance_id):
        super().__init__(f"duplicate instance id: {instance_id}")
        self.instance_id = instance_id


class LengthMismatch(ToolkitError):
    def __init__(self, found, expected, context=""):
        msg = f"expected {expected} values, found {found}"
        if context:
            msg = f"{context}: {msg}"
        super().__init__(msg)
        self.found = found
        self.expected = expected


class MissingJudgment(ToolkitError):
    def __init__(self, instance_id, direction):
        super().__init__(f"no {direction} judgment for instance {instance_id}")
        self.instance_id = instance_id
        self.direction = direction


class DegenerateVector(ToolkitError):
    """Rank correlation is undefined (constant or too-short vector)."""


class EmptyJudgedSet(ToolkitError):
    """A judgment prompt was requested for an empty mention family."""


class KeyMissing(ToolkitError):
    def __init__(self, key):
        super().__init__(f"answer key not found: {key}")
        self.key = key


class NotBinary(ToolkitError):
    def __init__(self, value):
        super().__init__(f"verdict value is not 0/1: {value!r}")
        self.value = value


class MalformedEntry(ToolkitError):
    def __init__(self, index, reason=""):
        msg = "extraction container is malformed" if index is None else f"extraction entry {index} is malformed"
        if reason:
            msg = f"{msg}: {reason}"
        super().__init__(msg)
        self.index = index


class AuthError(ToolkitError):
    pass


class ExhaustedRetries(ToolkitError):
    def __init__(self, attempts, last_cause):
        super().__init__(f"gave up after {attempts} attempts: {last_cause}")
        self.attempts = attempts
        self.last_cause = last_cause


class OversizePrompt(ToolkitError):
    pass


class EmbeddingUnavailable(ToolkitError):
    pass
