"""Verb vocabulary: the ordered list of distinct verbs that defines the
index space for every probability vector and co-occurrence matrix."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterator

from .errors import InputFormatError


@dataclass(frozen=True)
class VerbVocabulary:
    """Ordered, distinct, non-empty verb strings. Order fixes index j."""

    verbs: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.verbs) < 2:
            raise InputFormatError("vocabulary needs at least 2 verbs")
        seen: set[str] = set()
        for verb in self.verbs:
            if not verb:
                raise InputFormatError("vocabulary contains an empty verb")
            if verb in seen:
                raise InputFormatError(f"duplicate verb in vocabulary: {verb!r}")
            seen.add(verb)

    @cached_property
    def _index(self) -> dict[str, int]:
        return {verb: j for j, verb in enumerate(self.verbs)}

    @cached_property
    def content_hash(self) -> str:
        """sha256 over the newline-joined verb list; pins report/checkpoint compatibility."""
        return hashlib.sha256("\n".join(self.verbs).encode("utf-8")).hexdigest()

    def index(self, verb: str) -> int:
        try:
            return self._index[verb]
        except KeyError:
            raise KeyError(f"verb not in vocabulary: {verb!r}") from None

    def __contains__(self, verb: str) -> bool:
        return verb in self._index

    def __len__(self) -> int:
        return len(self.verbs)

    def __getitem__(self, j: int) -> str:
        return self.verbs[j]

    def __iter__(self) -> Iterator[str]:
        return iter(self.verbs)


def load_vocabulary(path: str | Path) -> VerbVocabulary:
    """Read a plain-text vocabulary, one verb per line, order significant."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    verbs = []
    for lineno, line in enumerate(lines, start=1):
        verb = line.strip()
        if not verb:
            raise InputFormatError(f"{path}: empty verb at line {lineno}")
        verbs.append(verb)
    return VerbVocabulary(tuple(verbs))


def save_vocabulary(path: str | Path, vocab: VerbVocabulary) -> None:
    Path(path).write_text("\n".join(vocab.verbs) + "\n", encoding="utf-8")
