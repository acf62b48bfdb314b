"""Exception hierarchy.

Every error raised for bad input data derives from :class:`AccForgeError` so
the command line can turn it into a single machine-parsable line.
"""


class AccForgeError(Exception):
    """Base class for all toolkit errors."""

    def to_record(self):
        record = {"error": type(self).__name__, "message": str(self)}
        for key in ("path", "lineno", "metric", "ids", "context"):
            value = getattr(self, key, None)
            if value is not None:
                record[key] = value if not hasattr(value, "__fspath__") else str(value)
        return record


# audio

class UnsupportedFormat(AccForgeError, ValueError):
    pass


class CorruptFile(AccForgeError, ValueError):
    pass


class EmptyClip(AccForgeError, ValueError):
    pass


class SilentInput(AccForgeError, ValueError):
    pass


class SampleRateMismatch(AccForgeError, ValueError):
    pass


class OffsetOutOfRange(AccForgeError, ValueError):
    pass


# line-delimited inputs

class ParseError(AccForgeError, ValueError):
    def __init__(self, message, path=None, lineno=None):
        where = ""
        if path is not None:
            where += f"{path}"
        if lineno is not None:
            where += f":{lineno}"
        super().__init__(f"{where}: {message}" if where else message)
        self.path = str(path) if path is not None else None
        self.lineno = lineno


class MissingField(ParseError):
    pass


class DuplicateId(ParseError):
    pass


class UnknownCategory(ParseError):
    pass


class InsufficientEvents(AccForgeError, ValueError):
    pass


class EmptyCorpus(AccForgeError, ValueError):
    pass


# synthesis / derivation

class ArityMismatch(AccForgeError, ValueError):
    pass


class SynthesisError(AccForgeError):
    def __init__(self, message, context=None):
        super().__init__(message)
        self.context = context


class EmptyCommonality(AccForgeError):
    """The overlap of a Replace pair is too short to serve as a target.

    Signals that the pair should be left out of commonality training data.
    """


class MisalignedInputs(AccForgeError, ValueError):
    pass


# metrics

class CorpusTooSmall(AccForgeError, ValueError):
    pass


class MissingComponent(AccForgeError, ValueError):
    pass


class MissingPrediction(AccForgeError):
    def __init__(self, ids):
        self.ids = sorted(ids)
        super().__init__("no prediction for id(s): " + ", ".join(self.ids))


class EmptyInput(AccForgeError, ValueError):
    pass


# inference client

class EndpointUnreachable(AccForgeError):
    pass


class MalformedResponse(AccForgeError):
    pass
