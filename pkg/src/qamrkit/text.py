"""Stopword list and small token predicates."""

from __future__ import annotations

import hashlib
from functools import lru_cache
from importlib import resources
from typing import Iterable, Optional

from .model import normalize_token

WH_WORDS = ("who", "what", "when", "where", "why", "how", "which", "whose")


def is_punct(token: str) -> bool:
    return not any(ch.isalnum() for ch in token)


def _read_list(text: str) -> frozenset:
    words = (line.strip() for line in text.splitlines())
    return frozenset(normalize_token(w) for w in words if w and not w.startswith("#"))


@lru_cache(maxsize=None)
def _bundled() -> tuple:
    text = resources.files("qamrkit").joinpath("data/stopwords.txt").read_text("utf-8")
    return _read_list(text), text


def load_stopwords(path: Optional[str] = None) -> frozenset:
    if path is None:
        return _bundled()[0]
    with open(path, encoding="utf-8") as f:
        return _read_list(f.read())


def stopword_hash(words: Iterable[str]) -> str:
    """Order-independent SHA-256 of a stopword list."""
    blob = "\n".join(sorted(set(words))).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


def is_wh_question(question) -> bool:
    if not question:
        return False
    return normalize_token(question[0]) in WH_WORDS
