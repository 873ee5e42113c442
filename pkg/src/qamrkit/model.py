"""Domain types shared across the toolkit.

Token indices are 0-based everywhere and spans are half-open ``[start, end)``.
All types are frozen dataclasses, so they can be hashed, compared and shared
between worker processes freely.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Tuple


class ValidationError(ValueError):
    """Raised when an input record violates a structural invariant."""


def normalize_token(token: str) -> str:
    """Case-fold a token. Punctuation and digits are left untouched."""
    return token.casefold()


@dataclass(frozen=True, order=True)
class Span:
    start: int
    end: int

    def __post_init__(self):
        if not 0 <= self.start < self.end:
            raise ValidationError(f"invalid span [{self.start},{self.end})")

    def __len__(self) -> int:
        return self.end - self.start

    def __contains__(self, index) -> bool:
        return self.start <= index < self.end

    def contains(self, other: "Span") -> bool:
        return self.start <= other.start and other.end <= self.end

    def intersects(self, other: "Span") -> bool:
        return self.start < other.end and other.start < self.end

    def indices(self) -> range:
        return range(self.start, self.end)

    def text(self, tokens: Sequence[str]) -> str:
        return " ".join(tokens[self.start:self.end])

    def __str__(self) -> str:
        return f"{self.start}-{self.end}"


@dataclass(frozen=True)
class Sentence:
    id: str
    tokens: Tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        if not self.tokens:
            raise ValidationError(f"sentence {self.id!r} has no tokens")

    def __len__(self) -> int:
        return len(self.tokens)

    def check_index(self, index: int) -> None:
        if not 0 <= index < len(self.tokens):
            raise ValidationError(
                f"token index {index} out of range for sentence {self.id!r} "
                f"of length {len(self.tokens)}")


@dataclass(frozen=True)
class AnswerSet:
    """A non-empty, possibly non-contiguous set of sentence token indices."""

    indices: frozenset

    def __init__(self, indices: Iterable[int]):
        idx = frozenset(int(i) for i in indices)
        if not idx:
            raise ValidationError("answer set is empty")
        if min(idx) < 0:
            raise ValidationError("negative token index in answer set")
        object.__setattr__(self, "indices", idx)

    def __iter__(self):
        return iter(sorted(self.indices))

    def __len__(self) -> int:
        return len(self.indices)

    def __contains__(self, index) -> bool:
        return index in self.indices

    def sorted(self) -> list:
        return sorted(self.indices)

    def text(self, tokens: Sequence[str]) -> str:
        return " ".join(tokens[i] for i in self.sorted())


def contiguous_runs(answer: AnswerSet | Iterable[int]) -> list[Span]:
    """Split an index set into maximal runs of consecutive indices.

    >>> contiguous_runs(AnswerSet({0, 2, 3}))
    [Span(start=0, end=1), Span(start=2, end=4)]
    """
    indices = sorted(set(answer))
    runs = []
    start = prev = None
    for i in indices:
        if start is None:
            start = prev = i
        elif i == prev + 1:
            prev = i
        else:
            runs.append(Span(start, prev + 1))
            start = prev = i
    if start is not None:
        runs.append(Span(start, prev + 1))
    return runs


class Verdict(str, enum.Enum):
    INVALID = "invalid"
    REDUNDANT = "redundant"
    ANSWER = "answer"


@dataclass(frozen=True)
class Judgment:
    validator_id: str
    verdict: Verdict
    answer: Optional[AnswerSet] = None
    ref: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "verdict", Verdict(self.verdict))
        if self.verdict is Verdict.ANSWER and self.answer is None:
            raise ValidationError("answer verdict without answer indices")
        if self.verdict is not Verdict.ANSWER and self.answer is not None:
            raise ValidationError(f"{self.verdict.value} verdict carries an answer")


@dataclass(frozen=True)
class QAPair:
    question: Tuple[str, ...]
    answer: AnswerSet
    sentence_id: str

    def __post_init__(self):
        object.__setattr__(self, "question", tuple(self.question))
        if not self.question:
            raise ValidationError("empty question")

    @property
    def question_text(self) -> str:
        return " ".join(self.question)


@dataclass(frozen=True)
class Qamr:
    sentence_id: str
    pairs: Tuple[QAPair, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple(self.pairs))
        for p in self.pairs:
            if p.sentence_id != self.sentence_id:
                raise ValidationError(
                    f"pair for sentence {p.sentence_id!r} in QAMR of {self.sentence_id!r}")

    def __len__(self) -> int:
        return len(self.pairs)


@dataclass(frozen=True)
class RawAnnotation:
    """One written question with its writer's answer and validator judgments.

    ``group`` identifies the batch of target words the question was written
    for; it defaults to the target index when the source does not record it.
    """

    sentence_id: str
    worker_id: str
    target_index: int
    question: Tuple[str, ...]
    writer_answer: AnswerSet
    judgments: Tuple[Judgment, ...] = ()
    group: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "question", tuple(self.question))
        object.__setattr__(self, "judgments", tuple(self.judgments))
        if not self.question:
            raise ValidationError("empty question")

    @property
    def group_key(self) -> str:
        return self.group if self.group is not None else str(self.target_index)

    def to_pair(self) -> QAPair:
        return QAPair(self.question, self.writer_answer, self.sentence_id)


@dataclass(frozen=True)
class GoldArc:
    predicate_index: int
    argument: AnswerSet
    label: str = ""
    source: str = "other"


@dataclass
class GenericGraph:
    """Neutral node/edge graph used for comparison metrics.

    ``nodes`` maps node id to its content words, insertion ordered.
    """

    nodes: dict = field(default_factory=dict)
    edges: list = field(default_factory=list)
    root: Optional[str] = None

    def add_node(self, node_id: str, content: Sequence[str]) -> None:
        if node_id in self.nodes:
            raise ValidationError(f"duplicate node id {node_id!r}")
        self.nodes[node_id] = tuple(content)

    def add_edge(self, src: str, tgt: str, label: str = "") -> None:
        for end in (src, tgt):
            if end not in self.nodes:
                raise ValidationError(f"edge endpoint {end!r} is not a node")
        self.edges.append((src, tgt, label))

    def set_root(self, node_id: str) -> None:
        if self.root is not None:
            raise ValidationError("multiple roots")
        if node_id not in self.nodes:
            raise ValidationError(f"root {node_id!r} is not a node")
        self.root = node_id
