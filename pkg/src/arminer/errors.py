"""Exception types shared across the pipeline."""


class PipelineError(Exception):
    """Base class for errors this package raises deliberately."""


class InputError(PipelineError):
    """A file, row, or configuration value that cannot be parsed.

    Messages name the offending location (path:line or variable name).
    """


class UnknownDocumentError(PipelineError):
    """A doc_id was requested that the entity database does not contain."""


class DuplicateDocumentError(PipelineError):
    """Two corpus documents share the same doc_id."""
