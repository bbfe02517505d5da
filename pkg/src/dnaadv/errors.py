"""Exception types shared across the package."""


class DnaAdvError(Exception):
    """Base class for all package-specific errors."""


class EmptySequenceError(DnaAdvError):
    pass


class InvalidSymbolError(DnaAdvError):
    def __init__(self, position: int, symbol: str):
        super().__init__(f"invalid symbol {symbol!r} at position {position}")
        self.position = position
        self.symbol = symbol


class LengthMismatchError(DnaAdvError):
    pass


class MalformedFastaError(DnaAdvError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class MalformedRowError(DnaAdvError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class DuplicateIdError(DnaAdvError):
    def __init__(self, record_id: str):
        super().__init__(f"duplicate record id {record_id!r}")
        self.record_id = record_id


class TooFewSamplesError(DnaAdvError):
    pass


class MotifTooLongError(DnaAdvError):
    pass


class SequenceTooShortError(DnaAdvError):
    pass


class SequenceTooLongError(DnaAdvError):
    pass


class DegenerateDatasetError(DnaAdvError):
    pass


class SerializationError(DnaAdvError):
    pass


class VersionMismatchError(DnaAdvError):
    pass


class OracleFailureError(DnaAdvError):
    pass


class SpawnFailureError(OracleFailureError):
    pass


class HandshakeMismatchError(OracleFailureError):
    pass


class NoCodonsError(DnaAdvError):
    pass


class EmptyResultError(DnaAdvError):
    pass


class NoCorrectBaselineError(DnaAdvError):
    pass


class TooFewPointsError(DnaAdvError):
    pass
