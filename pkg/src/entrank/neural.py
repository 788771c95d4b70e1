"""Transformer-backed entailment scoring from an exported model directory.

A model directory is the interchange surface between this package and
whatever produced the model. It holds:

    manifest.json    description of the artifacts (see ModelManifest)
    <model_file>     TorchScript module: token id tensors in, class logits out
    <tokenizer_file> serialized fast tokenizer (tokenizer.json)

The manifest pins sha256 checksums for both artifact files, the output label
order, the hard sequence cap, and which input tensors the traced module
expects. torch and tokenizers are imported lazily; everything else in the
package runs without them.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import BackendError, ConfigError, DataError
from .scorer import Backend, BackendConfig, NLI_LABELS
from .segmenter import ScoringUnit, TokenBudget

MODEL_DIR_ENV = "ENTRANK_MODEL_DIR"
MANIFEST_NAME = "manifest.json"
ALLOWED_INPUTS = ("input_ids", "attention_mask", "token_type_ids")


def _require_neural():
    try:
        import torch
        from tokenizers import Tokenizer
    except ImportError as e:
        raise BackendError(
            "transformer scoring needs the 'neural' extra: pip install entrank[neural]"
        ) from e
    return torch, Tokenizer


def file_sha256(path: str | Path) -> str:
    h = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


@dataclass(frozen=True)
class ModelManifest:
    """Parsed, checksum-verified manifest.json."""

    root: Path
    backend_id: str
    max_tokens: int
    label_order: tuple[str, str, str]
    model_file: str
    model_sha256: str
    tokenizer_file: str
    tokenizer_sha256: str
    pad_token_id: int
    inputs: tuple[str, ...]
    checkpoint: str | None = None
    revision: str | None = None

    @property
    def model_path(self) -> Path:
        return self.root / self.model_file

    @property
    def tokenizer_path(self) -> Path:
        return self.root / self.tokenizer_file

    @property
    def entailment_index(self) -> int:
        return self.label_order.index("entailment")

    @property
    def contradiction_index(self) -> int:
        return self.label_order.index("contradiction")


def load_manifest(path: str | Path, verify_checksums: bool = True) -> ModelManifest:
    """Read and validate a model directory's manifest.

    ``path`` may be the directory or the manifest file itself. Checksum
    mismatches are treated as corrupt artifacts, not configuration mistakes.
    """
    path = Path(path)
    manifest_path = path / MANIFEST_NAME if path.is_dir() else path
    if not manifest_path.exists():
        raise DataError(f"model manifest not found: {manifest_path}")
    try:
        raw = json.loads(manifest_path.read_text("utf-8"))
    except json.JSONDecodeError as e:
        raise DataError(f"{manifest_path}: malformed manifest: {e.msg}") from e

    required = (
        "backend_id", "max_tokens", "label_order", "model_file",
        "model_sha256", "tokenizer_file", "tokenizer_sha256", "pad_token_id", "inputs",
    )
    missing = [k for k in required if k not in raw]
    if missing:
        raise DataError(f"{manifest_path}: manifest missing field(s): {', '.join(missing)}")
    label_order = tuple(raw["label_order"])
    if sorted(label_order) != sorted(NLI_LABELS):
        raise DataError(f"{manifest_path}: label_order must be a permutation of {NLI_LABELS}, got {label_order}")
    inputs = tuple(raw["inputs"])
    if not inputs or any(i not in ALLOWED_INPUTS for i in inputs):
        raise DataError(f"{manifest_path}: inputs must be drawn from {ALLOWED_INPUTS}, got {inputs}")
    if int(raw["max_tokens"]) < 8:
        raise DataError(f"{manifest_path}: max_tokens {raw['max_tokens']} is implausibly small")

    manifest = ModelManifest(
        root=manifest_path.parent,
        backend_id=str(raw["backend_id"]),
        max_tokens=int(raw["max_tokens"]),
        label_order=label_order,  # type: ignore[arg-type]
        model_file=str(raw["model_file"]),
        model_sha256=str(raw["model_sha256"]),
        tokenizer_file=str(raw["tokenizer_file"]),
        tokenizer_sha256=str(raw["tokenizer_sha256"]),
        pad_token_id=int(raw["pad_token_id"]),
        inputs=inputs,
        checkpoint=raw.get("checkpoint"),
        revision=raw.get("revision"),
    )
    for p, expected, what in (
        (manifest.model_path, manifest.model_sha256, "model"),
        (manifest.tokenizer_path, manifest.tokenizer_sha256, "tokenizer"),
    ):
        if not p.exists():
            raise DataError(f"{manifest_path}: {what} file listed in manifest is missing: {p}")
        if verify_checksums:
            actual = file_sha256(p)
            if actual != expected:
                raise BackendError(
                    f"{p}: {what} checksum mismatch: manifest says {expected[:12]}…, file is {actual[:12]}…"
                )
    return manifest


class TransformerTokenCounter:
    """TokenCounter over a fast tokenizer, specials excluded.

    Truncation slices the original string at the character offset where the
    allowed tokens end, so the kept prefix is verbatim source text.
    """

    def __init__(self, tokenizer):
        self._tok = tokenizer

    def count(self, text: str) -> int:
        return len(self._tok.encode(text, add_special_tokens=False).ids)

    def truncate(self, text: str, max_tokens: int) -> str:
        enc = self._tok.encode(text, add_special_tokens=False)
        if len(enc.ids) <= max_tokens:
            return text
        end = enc.offsets[max_tokens - 1][1]
        return text[:end]


def pair_overhead(tokenizer) -> int:
    """Special tokens the pair template adds around premise and hypothesis."""
    counter = TransformerTokenCounter(tokenizer)
    probe = tokenizer.encode("a", "b")
    return len(probe.ids) - counter.count("a") - counter.count("b")


def budget_for(tokenizer, hypothesis: str, model_limit: int) -> TokenBudget:
    """Premise budget left once the hypothesis and specials are accounted for."""
    counter = TransformerTokenCounter(tokenizer)
    return TokenBudget(
        hypothesis_tokens=counter.count(hypothesis),
        special_tokens=pair_overhead(tokenizer),
        model_limit=model_limit,
    )


class NeuralBackend(Backend):
    """Entailment probabilities from a TorchScript NLI classifier."""

    def __init__(self, manifest: ModelManifest, probability_mode: str = "three_class",
                 max_tokens: int | None = None):
        torch, Tokenizer = _require_neural()
        self._torch = torch
        self.manifest = manifest
        self.backend_id = manifest.backend_id
        self.probability_mode = probability_mode
        self.max_tokens = min(max_tokens or manifest.max_tokens, manifest.max_tokens)
        self.tokenizer = Tokenizer.from_file(str(manifest.tokenizer_path))
        try:
            self.module = torch.jit.load(str(manifest.model_path), map_location="cpu")
        except Exception as e:
            raise BackendError(f"{manifest.model_path}: cannot load model: {e}") from e
        self.module.eval()

    def token_counter(self) -> TransformerTokenCounter:
        return TransformerTokenCounter(self.tokenizer)

    def budget_for(self, hypothesis: str) -> TokenBudget:
        return budget_for(self.tokenizer, hypothesis, self.max_tokens)

    def _tensors(self, encodings):
        torch = self._torch
        width = max(len(e.ids) for e in encodings)
        n = len(encodings)
        ids = np.full((n, width), self.manifest.pad_token_id, dtype=np.int64)
        mask = np.zeros((n, width), dtype=np.int64)
        types = np.zeros((n, width), dtype=np.int64)
        for i, e in enumerate(encodings):
            k = len(e.ids)
            ids[i, :k] = e.ids
            mask[i, :k] = e.attention_mask
            types[i, :k] = e.type_ids
        by_name = {
            "input_ids": torch.from_numpy(ids),
            "attention_mask": torch.from_numpy(mask),
            "token_type_ids": torch.from_numpy(types),
        }
        return [by_name[name] for name in self.manifest.inputs]

    def score(self, units: Sequence[ScoringUnit], hypothesis: str) -> np.ndarray:
        torch = self._torch
        encodings = [self.tokenizer.encode(u.text, hypothesis) for u in units]
        over = [(u, len(e.ids)) for u, e in zip(units, encodings) if len(e.ids) > self.max_tokens]
        if over:
            u, n = over[0]
            raise BackendError(
                f"encoded pair for document {u.doc_id!r} unit {u.unit_index} is {n} tokens, "
                f"over the {self.max_tokens}-token cap; re-segment with this backend's token counter"
            )
        with torch.inference_mode():
            logits = self.module(*self._tensors(encodings))
        if isinstance(logits, (tuple, list)):
            logits = logits[0]
        if logits.ndim != 2 or logits.shape[1] != 3:
            raise BackendError(f"model returned logits of shape {tuple(logits.shape)}, expected (batch, 3)")
        e_idx = self.manifest.entailment_index
        if self.probability_mode == "entail_contra":
            pair = logits[:, [e_idx, self.manifest.contradiction_index]]
            probs = torch.softmax(pair.double(), dim=1)[:, 0]
        else:
            probs = torch.softmax(logits.double(), dim=1)[:, e_idx]
        return probs.cpu().numpy().astype(np.float64)


def resolve_model_dir(config: BackendConfig) -> Path:
    if config.model_path:
        return Path(config.model_path)
    base = os.environ.get(MODEL_DIR_ENV)
    if not base:
        raise ConfigError(
            f"backend {config.backend_id!r} needs a model directory: pass --model-path or set {MODEL_DIR_ENV}"
        )
    return Path(base) / config.backend_id


def load_backend(config: BackendConfig) -> NeuralBackend:
    manifest = load_manifest(resolve_model_dir(config))
    if manifest.backend_id != config.backend_id:
        raise ConfigError(
            f"model directory is for backend {manifest.backend_id!r}, not {config.backend_id!r}"
        )
    return NeuralBackend(manifest, probability_mode=config.probability_mode, max_tokens=config.max_tokens)
