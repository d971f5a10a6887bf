"""Exception types shared across the pipeline."""


class CorpusForgeError(Exception):
    """Base class for all pipeline errors."""


class FormatError(CorpusForgeError):
    """Malformed container or header (names the offending chunk/field)."""


class UnsupportedCodecError(FormatError):
    """Valid container but an encoding we do not decode."""


class IntegrityError(CorpusForgeError):
    """Corpus data is internally inconsistent (missing files, dup ids)."""


class ExternalCommandError(CorpusForgeError):
    """An external transcriber command failed in a way that aborts the run."""


class UndefinedMetricError(CorpusForgeError):
    """Metric has no defined value for this input (e.g. empty reference)."""
