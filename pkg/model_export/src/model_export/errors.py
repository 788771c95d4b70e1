"""Error taxonomy; exit codes mirror the consuming toolkit's convention."""


class ExportError(Exception):
    """Base class; carries the process exit code for the CLI."""

    exit_code = 1


class ExportConfigError(ExportError):
    """Bad flags or an unusable configuration."""

    exit_code = 1


class UnsupportedExportError(ExportError):
    """The checkpoint cannot be expressed in the interchange format."""

    exit_code = 2


class IntegrityError(ExportError):
    """An exported file does not match its manifest checksum."""

    exit_code = 2


class SelfTestError(ExportError):
    """Source framework and exported model disagree beyond tolerance."""

    exit_code = 3
