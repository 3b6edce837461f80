"""Exception hierarchy shared by all wikindex modules."""


class WikindexError(Exception):
    """Base class for data errors (the CLI maps these to exit code 2)."""


class MalformedXml(WikindexError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class UnsupportedCompression(WikindexError):
    pass


class DuplicateTitle(WikindexError):
    pass


class DuplicatePageId(WikindexError):
    pass


class StoreIoError(WikindexError):
    pass


class StoreAlreadyExists(WikindexError):
    pass


class IndexLocked(WikindexError):
    pass


class UnknownPage(WikindexError):
    pass


class UnknownLemma(WikindexError):
    pass


class EmptyIndex(WikindexError):
    pass


class InsufficientData(WikindexError):
    pass
