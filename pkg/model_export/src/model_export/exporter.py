"""Convert NLI sequence-classification checkpoints into the TorchScript interchange layout.

An export directory holds exactly three files the downstream scorer reads:

    manifest.json    metadata: label order, token limit, inputs, sha256 checksums
    model.pt         TorchScript module mapping token id tensors to (batch, 3) logits
    tokenizer.json   single-file tokenizers serialization

The export is verified before it is reported: one fixture pair is run through
the source framework and the exported module, and the probability gap must
stay within a tight tolerance. ``self_test`` repeats that comparison over a
50-pair fixture for the looser release gate.

Checkpoint revisions are pinned in the manifest (hub checkpoints mutate), and
exports are byte-reproducible across fresh process invocations; within one
process the TorchScript compiler mangles type names with a global counter, so
re-exporting without restarting changes the model file's bytes.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import IntegrityError, SelfTestError, UnsupportedExportError
from .pairs import DEFAULT_PAIRS, SANITY_PAIR

NLI_LABELS = ("entailment", "neutral", "contradiction")
ALLOWED_INPUTS = ("input_ids", "attention_mask", "token_type_ids")
MANIFEST_FILE = "manifest.json"
MODEL_FILE = "model.pt"
TOKENIZER_FILE = "tokenizer.json"
MAX_TOKENS_CAP = 512
MIN_TOKENS = 8
_HUGE_LENGTH = 10**6  # tokenizers report a sentinel when they carry no limit

# Public MNLI checkpoints the downstream backend ids refer to.
CHECKPOINTS = {
    "dlm": "microsoft/deberta-large-mnli",
    "rlm": "roberta-large-mnli",
}


def file_sha256(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


@dataclass(frozen=True)
class ExportManifest:
    """Everything the consuming scorer needs to load and trust an export."""

    backend_id: str
    source_checkpoint: str
    source_revision: str
    max_tokens: int
    label_order: tuple[str, str, str]
    model_file: str
    model_sha256: str
    tokenizer_file: str
    tokenizer_sha256: str
    pad_token_id: int
    inputs: tuple[str, ...]

    def to_json(self) -> str:
        payload = asdict(self)
        payload["label_order"] = list(self.label_order)
        payload["inputs"] = list(self.inputs)
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def resolve_checkpoint(name: str) -> tuple[str | None, str]:
    """Map a registered backend alias to its checkpoint; pass others through."""
    if name in CHECKPOINTS:
        return name, CHECKPOINTS[name]
    return None, name


def _derived_backend_id(checkpoint: str) -> str:
    stem = checkpoint.rstrip("/").rsplit("/", 1)[-1]
    slug = re.sub(r"[^a-z0-9]+", "-", stem.lower()).strip("-")
    if not slug:
        raise UnsupportedExportError(f"cannot derive a backend id from {checkpoint!r}; pass --backend-id")
    return slug


def _frameworks():
    try:
        import torch
        import transformers
    except ImportError as e:  # pragma: no cover - depends on environment
        raise UnsupportedExportError(
            f"exporting needs torch and transformers installed: {e}"
        ) from e
    transformers.logging.disable_progress_bar()
    return torch, transformers


def _normalized_label_order(config) -> tuple[str, str, str]:
    id2label = dict(getattr(config, "id2label", None) or {})
    if len(id2label) != 3:
        raise UnsupportedExportError(
            f"checkpoint classifies into {len(id2label)} labels; a 3-way NLI head is required"
        )
    by_index = {int(k): str(v).strip().lower() for k, v in id2label.items()}
    order = tuple(by_index.get(i, "") for i in range(3))
    if sorted(order) != sorted(NLI_LABELS):
        raise UnsupportedExportError(
            f"checkpoint label names {order} are not the NLI set {NLI_LABELS}; "
            "the class mapping must name entailment, neutral, and contradiction"
        )
    return order  # type: ignore[return-value]


def _token_limit(tokenizer, config) -> int:
    limit = getattr(tokenizer, "model_max_length", None)
    if not limit or limit > _HUGE_LENGTH:
        limit = getattr(config, "max_position_embeddings", MAX_TOKENS_CAP)
    limit = min(int(limit), MAX_TOKENS_CAP)
    if limit < MIN_TOKENS:
        raise UnsupportedExportError(f"usable token limit {limit} is implausibly small")
    return limit


def _load_source(checkpoint: str, revision: str | None):
    torch, transformers = _frameworks()
    kwargs = {"revision": revision} if revision else {}
    try:
        tokenizer = transformers.AutoTokenizer.from_pretrained(checkpoint, use_fast=True, **kwargs)
    except Exception as e:
        raise UnsupportedExportError(f"cannot load tokenizer for {checkpoint!r}: {e}") from e
    if not getattr(tokenizer, "is_fast", False) or getattr(tokenizer, "backend_tokenizer", None) is None:
        raise UnsupportedExportError(
            f"tokenizer for {checkpoint!r} has no single-file serialization; a fast tokenizer is required"
        )
    try:
        model = transformers.AutoModelForSequenceClassification.from_pretrained(checkpoint, **kwargs)
    except Exception as e:
        raise UnsupportedExportError(f"cannot load model for {checkpoint!r}: {e}") from e
    return torch, tokenizer, model.eval()


def _wrapper(torch, model, inputs: tuple[str, ...]):
    if "token_type_ids" in inputs:

        class Wrapper(torch.nn.Module):
            def __init__(self, m):
                super().__init__()
                self.m = m

            def forward(self, input_ids, attention_mask, token_type_ids):
                return self.m(input_ids=input_ids, attention_mask=attention_mask,
                              token_type_ids=token_type_ids, return_dict=False)[0]

    else:

        class Wrapper(torch.nn.Module):
            def __init__(self, m):
                super().__init__()
                self.m = m

            def forward(self, input_ids, attention_mask):
                return self.m(input_ids=input_ids, attention_mask=attention_mask,
                              return_dict=False)[0]

    return Wrapper(model).eval()


def _source_probabilities(torch, model, tokenizer, inputs, max_tokens, pairs, batch_size=8) -> np.ndarray:
    rows = []
    with torch.inference_mode():
        for start in range(0, len(pairs), batch_size):
            batch = pairs[start:start + batch_size]
            enc = tokenizer([p for p, _ in batch], [h for _, h in batch], padding=True,
                            truncation=True, max_length=max_tokens, return_tensors="pt")
            logits = model(**{k: enc[k] for k in inputs}, return_dict=False)[0]
            rows.append(torch.softmax(logits.double(), dim=1).cpu().numpy())
    return np.concatenate(rows, axis=0)


def exported_probabilities(export_dir: str | Path, pairs: Sequence[tuple[str, str]],
                           batch_size: int = 8) -> np.ndarray:
    """Class probabilities from an export, batched the way the scorer batches.

    Rows follow the model's raw output order; map classes to names through the
    manifest's label_order.
    """
    torch, _ = _frameworks()
    from tokenizers import Tokenizer

    export_dir = Path(export_dir)
    manifest = load_export_manifest(export_dir / MANIFEST_FILE)
    tokenizer = Tokenizer.from_file(str(export_dir / manifest.tokenizer_file))
    tokenizer.enable_truncation(max_length=manifest.max_tokens)
    module = torch.jit.load(str(export_dir / manifest.model_file), map_location="cpu")
    rows = []
    with torch.inference_mode():
        for start in range(0, len(pairs), batch_size):
            batch = pairs[start:start + batch_size]
            encodings = [tokenizer.encode(p, h) for p, h in batch]
            width = max(len(e.ids) for e in encodings)
            ids = np.full((len(batch), width), manifest.pad_token_id, dtype=np.int64)
            mask = np.zeros((len(batch), width), dtype=np.int64)
            types = np.zeros((len(batch), width), dtype=np.int64)
            for i, e in enumerate(encodings):
                k = len(e.ids)
                ids[i, :k] = e.ids
                mask[i, :k] = e.attention_mask
                types[i, :k] = e.type_ids
            by_name = {"input_ids": torch.from_numpy(ids), "attention_mask": torch.from_numpy(mask),
                       "token_type_ids": torch.from_numpy(types)}
            logits = module(*[by_name[name] for name in manifest.inputs])
            if isinstance(logits, (tuple, list)):
                logits = logits[0]
            rows.append(torch.softmax(logits.double(), dim=1).cpu().numpy())
    return np.concatenate(rows, axis=0)


def export(checkpoint: str, out_dir: str | Path, backend_id: str | None = None,
           revision: str | None = None, tolerance: float = 1e-4) -> ExportManifest:
    """Write the three-file interchange layout for one checkpoint and verify it.

    ``checkpoint`` is a registered backend alias, a hub identifier, or a local
    directory. The post-export check runs the sanity pair through both the
    source model and the export; a gap beyond ``tolerance`` raises
    SelfTestError and leaves the files in place for inspection.
    """
    alias, checkpoint = resolve_checkpoint(checkpoint)
    backend_id = backend_id or alias or _derived_backend_id(checkpoint)
    torch, tokenizer, model = _load_source(checkpoint, revision)

    label_order = _normalized_label_order(model.config)
    max_tokens = _token_limit(tokenizer, model.config)
    inputs = tuple(n for n in ALLOWED_INPUTS if n in tokenizer.model_input_names)
    if "input_ids" not in inputs or "attention_mask" not in inputs:
        raise UnsupportedExportError(
            f"tokenizer inputs {tokenizer.model_input_names} lack input_ids/attention_mask; "
            "the scorer cannot batch such a model"
        )
    pad_token_id = tokenizer.pad_token_id
    if pad_token_id is None:
        raise UnsupportedExportError("checkpoint has no pad token; batched scoring needs one")

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    enc = tokenizer([SANITY_PAIR[0], "People are marching."], [SANITY_PAIR[1], "A protest is happening."],
                    padding=True, truncation=True, max_length=max_tokens, return_tensors="pt")
    example = tuple(enc[name] for name in inputs)
    with torch.inference_mode():
        traced = torch.jit.trace(_wrapper(torch, model, inputs), example)
    traced.save(str(out_dir / MODEL_FILE))
    tokenizer.backend_tokenizer.save(str(out_dir / TOKENIZER_FILE))

    resolved_revision = revision or getattr(model.config, "_commit_hash", None) or "local"
    manifest = ExportManifest(
        backend_id=backend_id,
        source_checkpoint=checkpoint,
        source_revision=str(resolved_revision),
        max_tokens=max_tokens,
        label_order=label_order,
        model_file=MODEL_FILE,
        model_sha256=file_sha256(out_dir / MODEL_FILE),
        tokenizer_file=TOKENIZER_FILE,
        tokenizer_sha256=file_sha256(out_dir / TOKENIZER_FILE),
        pad_token_id=int(pad_token_id),
        inputs=inputs,
    )
    (out_dir / MANIFEST_FILE).write_text(manifest.to_json(), encoding="utf-8")

    source = _source_probabilities(torch, model, tokenizer, inputs, max_tokens, [SANITY_PAIR])
    exported = exported_probabilities(out_dir, [SANITY_PAIR])
    gap = float(np.abs(source - exported).max())
    if gap > tolerance:
        raise SelfTestError(
            f"post-export check failed: source and export disagree by {gap:.2e} "
            f"on the sanity pair (tolerance {tolerance:.0e}); files kept in {out_dir}"
        )
    return manifest


def load_export_manifest(path: str | Path, verify_checksums: bool = True) -> ExportManifest:
    """Read and validate a manifest; checksum failures raise IntegrityError."""
    path = Path(path)
    if path.is_dir():
        path = path / MANIFEST_FILE
    if not path.is_file():
        raise UnsupportedExportError(f"export manifest not found: {path}")
    try:
        raw = json.loads(path.read_text("utf-8"))
    except json.JSONDecodeError as e:
        raise UnsupportedExportError(f"{path}: malformed manifest: {e.msg}") from e
    required = ("backend_id", "source_checkpoint", "source_revision", "max_tokens", "label_order",
                "model_file", "model_sha256", "tokenizer_file", "tokenizer_sha256",
                "pad_token_id", "inputs")
    missing = [f for f in required if f not in raw]
    if missing:
        raise UnsupportedExportError(f"{path}: manifest missing field(s): {', '.join(missing)}")
    manifest = ExportManifest(
        backend_id=raw["backend_id"],
        source_checkpoint=raw["source_checkpoint"],
        source_revision=raw["source_revision"],
        max_tokens=int(raw["max_tokens"]),
        label_order=tuple(raw["label_order"]),
        model_file=raw["model_file"],
        model_sha256=raw["model_sha256"],
        tokenizer_file=raw["tokenizer_file"],
        tokenizer_sha256=raw["tokenizer_sha256"],
        pad_token_id=int(raw["pad_token_id"]),
        inputs=tuple(raw["inputs"]),
    )
    if sorted(manifest.label_order) != sorted(NLI_LABELS):
        raise UnsupportedExportError(f"{path}: label_order must be a permutation of {NLI_LABELS}")
    root = path.parent
    for file_name, expected in ((manifest.model_file, manifest.model_sha256),
                                (manifest.tokenizer_file, manifest.tokenizer_sha256)):
        target = root / file_name
        if not target.is_file():
            raise UnsupportedExportError(f"{path}: file listed in manifest is missing: {target}")
        if verify_checksums:
            actual = file_sha256(target)
            if actual != expected:
                raise IntegrityError(
                    f"{target}: checksum mismatch: manifest says {expected[:12]}, file is {actual[:12]}"
                )
    return manifest


def self_test(export_dir: str | Path, checkpoint: str | None = None, revision: str | None = None,
              pairs: Sequence[tuple[str, str]] = DEFAULT_PAIRS, tolerance: float = 1e-3,
              batch_size: int = 8) -> float:
    """Max absolute probability gap between source framework and export.

    Raises SelfTestError when the gap exceeds ``tolerance``. The source
    defaults to the checkpoint recorded in the manifest.
    """
    export_dir = Path(export_dir)
    manifest = load_export_manifest(export_dir / MANIFEST_FILE)
    source_name = checkpoint or manifest.source_checkpoint
    torch, tokenizer, model = _load_source(source_name, revision)
    source = _source_probabilities(torch, model, tokenizer, manifest.inputs,
                                   manifest.max_tokens, list(pairs), batch_size)
    exported = exported_probabilities(export_dir, list(pairs), batch_size)
    gap = float(np.abs(source - exported).max())
    if gap > tolerance:
        raise SelfTestError(
            f"source and export disagree by {gap:.2e} over {len(pairs)} pairs "
            f"(tolerance {tolerance:.0e})"
        )
    return gap
