class AppException(Exception):
    """Base exception for application-specific errors."""

    def __init__(self, message="An application error occurred", exit_code=1):
        self.message = message
        self.exit_code = exit_code
        super().__init__(self.message)


class InvalidInputError(AppException):
    """Exception raised for missing input files or invalid command-line input."""

    def __init__(self, message="Invalid input data", exit_code=2):
        super().__init__(message, exit_code)


class ConfigError(AppException):
    """Exception raised when a configuration file or override does not validate."""

    def __init__(self, message="Invalid configuration", exit_code=2):
        super().__init__(message, exit_code)


# --- dataset -----------------------------------------------------------------


class DatasetError(AppException):
    """Base for survey ingestion and aggregation errors."""


class UnknownLabel(DatasetError):
    def __init__(self, label):
        self.label = label
        super().__init__(f"Unknown Likert label: {label!r}")


class ParseError(DatasetError):
    """A source row could not be parsed."""

    def __init__(self, row, column, reason):
        self.row = row
        self.column = column
        self.reason = reason
        super().__init__(f"Parse error at row {row}, column {column!r}: {reason}")


class IntegrityError(DatasetError):
    """Dangling foreign key or duplicate id."""

    def __init__(self, message, key=None):
        self.key = key
        super().__init__(message)


class NoResponses(DatasetError):
    def __init__(self, segment_id):
        self.segment_id = segment_id
        super().__init__(f"Segment {segment_id!r} has no valid responses")


# --- analytics ---------------------------------------------------------------


class AnalyticsError(AppException):
    """Base for subgroup analytics errors."""


class EmptySubgroup(AnalyticsError):
    def __init__(self, key):
        self.key = key
        super().__init__(f"No qualifying segments for subgroup {key}")


class UnsupportedFormat(AppException):
    """Raised for unknown report formats and unsupported audio encodings."""


# --- features ----------------------------------------------------------------


class FeatureError(AppException):
    """Base for audio loading and featurization errors."""


class AudioIoError(FeatureError):
    pass


class OutOfRange(FeatureError):
    pass


class TooShort(FeatureError):
    pass


class MissingAudio(FeatureError):
    pass


# --- model -------------------------------------------------------------------


class ModelError(AppException):
    """Base for network, loss and checkpoint errors."""


class TooFewFrames(ModelError):
    pass


class LengthMismatch(ModelError):
    def __init__(self, n_pred, n_target):
        super().__init__(
            f"Prediction and target lengths differ or are empty ({n_pred} vs {n_target})"
        )


class MissingCache(ModelError):
    pass


class CheckpointIoError(ModelError):
    pass


class VersionMismatch(ModelError):
    pass


class ShapeMismatch(ModelError):
    pass


# --- training ----------------------------------------------------------------


class TrainingError(AppException):
    """Base for cross-validation and training loop errors."""


class TooFewSongs(TrainingError):
    pass


class MissingFeatures(TrainingError):
    pass


class NonFiniteLoss(TrainingError):
    pass
