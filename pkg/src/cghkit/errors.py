"""Exception types shared across the package."""


class CghError(Exception):
    """Base class for all cghkit errors."""


# --- parameter tree ---------------------------------------------------------


class UnknownPathError(CghError):
    def __init__(self, path):
        super().__init__(f"unknown option path: {path!r}")
        self.path = path


class HiddenPathError(CghError):
    """Path exists but is owned by a non-selected possibility or a false toggle."""

    def __init__(self, path):
        super().__init__(f"option path is not currently visible: {path!r}")
        self.path = path


class OutOfRangeError(CghError):
    def __init__(self, path, minimum, maximum, value):
        super().__init__(f"{path!r}: value {value!r} outside [{minimum}, {maximum}]")
        self.path = path
        self.minimum = minimum
        self.maximum = maximum
        self.value = value


class TypeMismatchError(CghError):
    def __init__(self, path, detail=""):
        msg = f"{path!r}: wrong value type"
        super().__init__(msg + (f" ({detail})" if detail else ""))
        self.path = path


# --- serialization ----------------------------------------------------------


class MalformedJsonError(CghError):
    pass


class UnknownKeyError(CghError):
    def __init__(self, path):
        super().__init__(f"unknown key: {path!r}")
        self.path = path


class VersionMismatchError(CghError):
    def __init__(self, file_version, schema_version):
        super().__init__(
            f"file hierarchy version {file_version} is incompatible with "
            f"schema version {schema_version} (major numbers differ)"
        )
        self.file_version = file_version
        self.schema_version = schema_version


class ChecksumMismatchError(CghError):
    pass


class TruncatedPayloadError(CghError):
    pass


# --- images and fields ------------------------------------------------------


class EmptyImageError(CghError):
    pass


class NonFiniteError(CghError):
    pass


class ZeroChunkError(CghError):
    pass


class OutOfBoundsError(CghError):
    pass


class InvalidSpecError(CghError):
    pass


class ZeroFieldError(CghError):
    pass


class EmptyMaskError(CghError):
    pass


class ZeroTargetError(CghError):
    pass


class DimensionMismatchError(CghError):
    pass


# --- controller / batch -----------------------------------------------------


class ValidationFailedError(CghError):
    def __init__(self, paths, detail=""):
        super().__init__(
            "configuration invalid at: " + ", ".join(paths) + (f" ({detail})" if detail else "")
        )
        self.paths = list(paths)


class MalformedManifestError(CghError):
    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class DuplicateIdError(CghError):
    def __init__(self, job_id):
        super().__init__(f"duplicate job id: {job_id!r}")
        self.job_id = job_id
