"""One-time conversion of NLI checkpoints into the scorer's interchange format."""

from .errors import (
    ExportConfigError,
    ExportError,
    IntegrityError,
    SelfTestError,
    UnsupportedExportError,
)
from .exporter import (
    CHECKPOINTS,
    ExportManifest,
    export,
    exported_probabilities,
    file_sha256,
    load_export_manifest,
    resolve_checkpoint,
    self_test,
)
from .pairs import DEFAULT_PAIRS, SANITY_PAIR

__all__ = [
    "CHECKPOINTS",
    "DEFAULT_PAIRS",
    "ExportConfigError",
    "ExportError",
    "ExportManifest",
    "IntegrityError",
    "SANITY_PAIR",
    "SelfTestError",
    "UnsupportedExportError",
    "export",
    "exported_probabilities",
    "file_sha256",
    "load_export_manifest",
    "resolve_checkpoint",
    "self_test",
]
