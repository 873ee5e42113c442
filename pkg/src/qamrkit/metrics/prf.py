from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class PRF:
    """Precision, recall and F1 from match counts.

    An empty side scores 1.0 when nothing was matched (nothing predicted
    means no false positives); F1 is 0 when P + R is 0.
    """

    matched: int
    predicted_total: int
    gold_total: int

    def __post_init__(self):
        if self.matched < 0 or self.matched > min(self.predicted_total, self.gold_total):
            raise ValueError(f"matched={self.matched} inconsistent with totals "
                             f"{self.predicted_total}/{self.gold_total}")

    @property
    def precision(self) -> float:
        return self.matched / self.predicted_total if self.predicted_total else 1.0

    @property
    def recall(self) -> float:
        return self.matched / self.gold_total if self.gold_total else 1.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0

    def __add__(self, other: "PRF") -> "PRF":
        return PRF(self.matched + other.matched, self.predicted_total + other.predicted_total,
                   self.gold_total + other.gold_total)

    def swapped(self) -> "PRF":
        return PRF(self.matched, self.gold_total, self.predicted_total)

    def to_dict(self) -> dict:
        return {"matched": self.matched, "predicted_total": self.predicted_total,
                "gold_total": self.gold_total, "precision": self.precision,
                "recall": self.recall, "f1": self.f1}
