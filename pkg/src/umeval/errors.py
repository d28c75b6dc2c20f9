"""Exception hierarchy shared across the toolkit.

Grouped by the surface that raises them so the CLI can map whole families
to exit codes: format/IO errors, manifest errors, math/series errors and
evaluation errors.
"""


class LogitFormatError(Exception):
    """Base for defects in a logit exchange file."""


class MalformedHeader(LogitFormatError):
    """Bad magic, version, truncated header or invalid metadata block."""


class UnsupportedDtype(LogitFormatError):
    """Unknown dtype or element-order code in the header."""


class UnsupportedShape(LogitFormatError):
    """Declared shape violates w >= 1 or q >= 2."""


class ShapeMismatch(LogitFormatError):
    """Payload byte count disagrees with the declared w*q."""


class NonFiniteValue(LogitFormatError):
    """NaN or infinity found in a payload; message carries the location."""


class IoFailure(Exception):
    """Filesystem write failed."""


class ManifestError(Exception):
    """Base for manifest/CSV parse errors."""


class DuplicateUtteranceId(ManifestError):
    pass


class MosOutOfRange(ManifestError):
    pass


class MissingField(ManifestError):
    pass


class MalformedLine(ManifestError):
    pass


class NonFiniteInput(ValueError):
    """NaN or infinity passed to a numeric operation."""


class DegenerateSeries(ValueError):
    """Correlation requested on a constant vector; undefined, never 0."""


class EmptyReference(ValueError):
    """WER requested against an empty reference."""


class VocabSizeMismatch(ValueError):
    """Vocabulary size differs from the logit matrix vocabulary axis."""


class VocabFileError(Exception):
    """Vocabulary file cannot be parsed."""


class EvaluationError(Exception):
    """Base for harness-level evaluation failures."""


class TooFewUtterances(EvaluationError):
    pass


class AllFilesUnreadable(EvaluationError):
    pass


class MissingBaseline(EvaluationError):
    """Dropout sweep lacks the p = 0 point."""
