"""Shared fixtures: tiny locally built checkpoints, no network involved."""

from __future__ import annotations

import re
from pathlib import Path

import pytest

torch = pytest.importorskip("torch")
transformers = pytest.importorskip("transformers")
tokenizers = pytest.importorskip("tokenizers")

from tokenizers import Tokenizer
from tokenizers.models import WordLevel
from tokenizers.pre_tokenizers import Whitespace
from tokenizers.processors import TemplateProcessing
from transformers import BertConfig, BertForSequenceClassification, PreTrainedTokenizerFast

from model_export.pairs import DEFAULT_PAIRS

NLI_ID2LABEL = {0: "NEUTRAL", 1: "ENTAILMENT", 2: "CONTRADICTION"}


def _vocabulary() -> dict[str, int]:
    vocab = {"[PAD]": 0, "[CLS]": 1, "[SEP]": 2, "[UNK]": 3}
    words = set()
    for premise, hypothesis in DEFAULT_PAIRS:
        words.update(re.findall(r"\w+|[^\w\s]", premise))
        words.update(re.findall(r"\w+|[^\w\s]", hypothesis))
    for word in sorted(words):
        vocab[word] = len(vocab)
    return vocab


def build_checkpoint(root: Path, seed: int = 11, num_labels: int = 3,
                     id2label: dict[int, str] | None = NLI_ID2LABEL,
                     token_types: bool = True) -> Path:
    """Write a small random BERT classifier checkpoint under ``root``."""
    vocab = _vocabulary()
    tok = Tokenizer(WordLevel(vocab, unk_token="[UNK]"))
    tok.pre_tokenizer = Whitespace()
    tok.post_processor = TemplateProcessing(
        single="[CLS] $A [SEP]",
        pair="[CLS] $A [SEP] $B:1 [SEP]:1",
        special_tokens=[("[CLS]", 1), ("[SEP]", 2)],
    )
    names = ["input_ids", "attention_mask"] + (["token_type_ids"] if token_types else [])
    fast = PreTrainedTokenizerFast(tokenizer_object=tok, pad_token="[PAD]", cls_token="[CLS]",
                                   sep_token="[SEP]", unk_token="[UNK]", model_input_names=names)
    torch.manual_seed(seed)
    extra = {}
    if id2label is not None:
        extra = {"id2label": id2label, "label2id": {v: k for k, v in id2label.items()}}
    config = BertConfig(vocab_size=len(vocab), hidden_size=16, num_hidden_layers=1,
                        num_attention_heads=2, intermediate_size=32, max_position_embeddings=64,
                        num_labels=num_labels, pad_token_id=0, **extra)
    root.mkdir(parents=True, exist_ok=True)
    BertForSequenceClassification(config).save_pretrained(root)
    fast.save_pretrained(root)
    return root


@pytest.fixture(scope="session")
def tiny_checkpoint(tmp_path_factory) -> Path:
    return build_checkpoint(tmp_path_factory.mktemp("checkpoints") / "Tiny_NLI")


@pytest.fixture(scope="session")
def alt_checkpoint(tmp_path_factory) -> Path:
    """Same architecture, different weights; diverges from tiny_checkpoint."""
    return build_checkpoint(tmp_path_factory.mktemp("checkpoints-alt") / "Other_NLI", seed=99)


@pytest.fixture(scope="session")
def exported(tmp_path_factory, tiny_checkpoint) -> Path:
    from model_export import export

    out = tmp_path_factory.mktemp("exports") / "tiny"
    export(str(tiny_checkpoint), out, backend_id="tiny")
    return out
