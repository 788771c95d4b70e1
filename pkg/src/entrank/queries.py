"""Class-describing queries used as entailment hypotheses.

The registry ships with the package and is keyed (dataset, task, qtype).
Ranking qtypes are scored and evaluated; the interrogative form is kept for
reference only because entailment is defined for assertions, not questions.
Extended qtypes are derivable from the definitional query via
``compose_extended``, and the stored strings are exactly those compositions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from .errors import ConfigError

RANKING_QTYPES = (
    "declarative",
    "definitional",
    "manual_social",
    "manual_contentious",
    "extended_keyword",
    "extended_opposition",
    "extended_disapproval",
)
REFERENCE_QTYPES = ("question",)
EXTENSION_NAMES = ("opposition", "disapproval")


@dataclass(frozen=True)
class Query:
    """A hypothesis string describing one target class."""

    dataset: str
    task: str
    qtype: str
    text: str

    def __post_init__(self):
        if not self.text.strip():
            raise ConfigError(f"query ({self.dataset}, {self.task}, {self.qtype}) has empty text")
        if "\n" in self.text:
            raise ConfigError(f"query ({self.dataset}, {self.task}, {self.qtype}) must be a single paragraph")


@lru_cache(maxsize=1)
def _registry() -> dict[tuple[str, str, str], Query]:
    raw = json.loads(resources.files("entrank.data").joinpath("queries.json").read_text("utf-8"))
    reg: dict[tuple[str, str, str], Query] = {}
    for dataset, tasks in raw["queries"].items():
        for task, by_qtype in tasks.items():
            for qtype, text in by_qtype.items():
                if qtype not in RANKING_QTYPES and qtype not in REFERENCE_QTYPES:
                    raise ConfigError(f"packaged query registry has unknown qtype {qtype!r}")
                reg[(dataset, task, qtype)] = Query(dataset, task, qtype, text)
    for name, text in raw["extensions"].items():
        if name not in EXTENSION_NAMES:
            raise ConfigError(f"packaged query registry has unknown extension {name!r}")
        reg[("_extension", "_extension", name)] = Query("_extension", "_extension", name, text)
    return reg


def datasets() -> tuple[str, ...]:
    seen = {q.dataset for q in _registry().values() if q.dataset != "_extension"}
    return tuple(sorted(seen))


def tasks(dataset: str) -> tuple[str, ...]:
    found = {q.task for q in _registry().values() if q.dataset == dataset}
    if not found:
        raise ConfigError(f"unknown dataset {dataset!r}; known: {', '.join(datasets())}")
    return tuple(sorted(found))


def get_query(dataset: str, task: str, qtype: str) -> Query:
    q = _registry().get((dataset, task, qtype))
    if q is None:
        have = sorted(qt for (d, t, qt) in _registry() if d == dataset and t == task)
        if not have:
            raise ConfigError(f"no queries for dataset {dataset!r}, task {task!r}")
        raise ConfigError(
            f"no {qtype!r} query for ({dataset}, {task}); available qtypes: {', '.join(have)}"
        )
    return q


def get_extension(name: str) -> Query:
    return get_query("_extension", "_extension", name)


def queries_for(dataset: str, task: str | None = None, include_reference: bool = False) -> list[Query]:
    """All ranking queries for a dataset (optionally one task), registry order."""
    order = RANKING_QTYPES + (REFERENCE_QTYPES if include_reference else ())
    out = [
        q
        for (d, t, qt), q in _registry().items()
        if d == dataset and (task is None or t == task) and qt in order
    ]
    if not out:
        raise ConfigError(f"no queries for dataset {dataset!r}" + (f", task {task!r}" if task else ""))
    out.sort(key=lambda q: (q.task, order.index(q.qtype)))
    return out


def _decapitalize(text: str) -> str:
    return text[0].lower() + text[1:] if text else text


def compose_extended(base: Query, extension: Query | str) -> Query:
    """Build an extended query from a definitional base plus an extension.

    The empty string is the identity. A non-empty string is treated as a
    keyword prefix: "<Keyword>, <base with its first letter lowered>". A Query
    extension (one of the packaged dictionary glosses) is appended as its own
    sentence, and the result's qtype records which one.
    """
    if base.qtype != "definitional":
        raise ConfigError(f"extensions compose onto definitional queries only, not {base.qtype!r}")
    if isinstance(extension, str):
        if extension == "":
            return base
        text = f"{extension}, {_decapitalize(base.text)}"
        return Query(base.dataset, base.task, "extended_keyword", text)
    if extension.qtype not in EXTENSION_NAMES:
        raise ConfigError(f"{extension.qtype!r} is not a registered extension; options: {', '.join(EXTENSION_NAMES)}")
    text = f"{base.text} {extension.text}"
    return Query(base.dataset, base.task, f"extended_{extension.qtype}", text)
