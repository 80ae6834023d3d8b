"""Shared exception hierarchy for the pipeline."""


class SidgenError(Exception):
    """Base class for all pipeline errors."""


class InvalidLabelError(SidgenError):
    pass


class InvalidSpecError(SidgenError):
    pass


class InvalidExemplarsError(SidgenError):
    pass


class InsufficientClassError(SidgenError):
    def __init__(self, label, have, need):
        super().__init__(f"class {label!r} has {have} records, need {need}")
        self.label = label
        self.have = have
        self.need = need


class IngestError(SidgenError):
    pass


class EmptyDatasetError(SidgenError):
    pass


class SplitError(SidgenError):
    pass


class SchemaError(SidgenError):
    pass


class ParameterError(SidgenError):
    pass


class CompositionError(SidgenError):
    pass


class InfeasibleFoldsError(SidgenError):
    pass


class AuthError(SidgenError):
    pass


class TransportError(SidgenError):
    def __init__(self, message, last_status=None):
        super().__init__(message)
        self.last_status = last_status


class ProtocolError(SidgenError):
    pass


class NoPayloadError(SidgenError):
    def __init__(self, message, response_text=""):
        super().__init__(message)
        self.response_text = response_text


class DegenerateDataError(SidgenError):
    pass


class ExportError(SidgenError):
    pass


class LeakageError(SidgenError):
    pass
