"""Crowd payouts and quality-control replay over annotation event logs.

Event log lines are JSON objects of two kinds::

    {"time": 1, "kind": "generation", "worker": "g1", "batch": "b1",
     "targets": 4, "questions": ["q1", "q2", ...]}
    {"time": 2, "kind": "validation", "worker": "v1", "batch": "b1",
     "judgments": [{"question": "q1", "verdict": "answer", "answer": [3, 4]},
                   {"question": "q2", "verdict": "invalid"}, ...]}

Times must be non-decreasing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import IO, Iterable, Optional, Sequence

from .model import ValidationError, Verdict

GENERATION_BASE = 20
VALIDATION_BASE = 10
VALIDATION_EXTRA = 2
VALIDATION_FREE = 4
GENERATOR_MIN_VALID = 0.75
VALIDATOR_MIN_AGREEMENT = 0.70
WARMUP = 20


@dataclass(frozen=True)
class GenerationBatch:
    worker_id: str
    target_count: int
    qa_written: int
    qa_validated: int

    def __post_init__(self):
        if not 1 <= self.target_count:
            raise ValueError("target_count must be >= 1")
        if not 0 <= self.qa_validated <= self.qa_written:
            raise ValueError("need 0 <= qa_validated <= qa_written")


def bonus_cents(extra: int) -> int:
    """Sum of 3(k+1) cents for k = 1..extra."""
    extra = max(0, extra)
    return 3 * extra * (extra + 3) // 2


def base_met(batch: GenerationBatch, base_on_written: bool = False) -> bool:
    count = batch.qa_written if base_on_written else batch.qa_validated
    return count >= batch.target_count


def generation_pay(batch: GenerationBatch, base_on_written: bool = False,
                   bonus_on_written: bool = False) -> int:
    """Cents owed for one generation batch; 0 when the base requirement is unmet.

    By default one *validated* pair per target word earns the base, and every
    validated pair beyond the target count earns the rising bonus.
    """
    if not base_met(batch, base_on_written):
        return 0
    count = batch.qa_written if bonus_on_written else batch.qa_validated
    return GENERATION_BASE + bonus_cents(count - batch.target_count)


def validation_pay(questions_in_batch: int) -> int:
    if questions_in_batch < 1:
        raise ValueError("a validation batch holds at least one question")
    return VALIDATION_BASE + VALIDATION_EXTRA * max(0, questions_in_batch - VALIDATION_FREE)


def answers_agree(a1: Iterable[int], a2: Iterable[int]) -> bool:
    return bool(set(a1) & set(a2))


# -- events -----------------------------------------------------------------

@dataclass(frozen=True)
class Judged:
    question: str
    verdict: Verdict
    answer: Optional[frozenset] = None
    ref: Optional[str] = None


@dataclass(frozen=True)
class Event:
    time: float
    kind: str
    worker: str
    batch: str
    targets: int = 0
    questions: tuple = ()
    judgments: tuple = ()


def _event_from_json(obj: dict) -> Event:
    kind = obj.get("kind")
    if kind == "generation":
        return Event(obj["time"], kind, str(obj["worker"]), str(obj["batch"]),
                     targets=int(obj["targets"]), questions=tuple(map(str, obj["questions"])))
    if kind == "validation":
        judgments = []
        for j in obj["judgments"]:
            try:
                verdict = Verdict(j["verdict"])
            except ValueError:
                raise ValidationError(f"unknown verdict {j['verdict']!r}") from None
            answer = frozenset(j["answer"]) if verdict is Verdict.ANSWER else None
            if verdict is Verdict.ANSWER and not answer:
                raise ValidationError("answer verdict without indices")
            judgments.append(Judged(str(j["question"]), verdict, answer, j.get("ref")))
        return Event(obj["time"], kind, str(obj["worker"]), str(obj["batch"]),
                     judgments=tuple(judgments))
    raise ValidationError(f"unknown event kind {kind!r}")


def read_events(stream: IO[str]) -> list:
    events = []
    for lineno, line in enumerate(stream, 1):
        if not line.strip():
            continue
        try:
            events.append(_event_from_json(json.loads(line)))
        except (KeyError, TypeError, json.JSONDecodeError, ValidationError) as e:
            raise ValidationError(f"line {lineno}: bad event ({e})") from None
    return events


def event_to_json(e: Event) -> dict:
    out = {"time": e.time, "kind": e.kind, "worker": e.worker, "batch": e.batch}
    if e.kind == "generation":
        out.update(targets=e.targets, questions=list(e.questions))
    else:
        js = []
        for j in e.judgments:
            d = {"question": j.question, "verdict": j.verdict.value}
            if j.answer is not None:
                d["answer"] = sorted(j.answer)
            if j.ref is not None:
                d["ref"] = j.ref
            js.append(d)
        out["judgments"] = js
    return out


# -- quality control --------------------------------------------------------

@dataclass
class WorkerRecord:
    worker_id: str
    questions_written: int = 0
    judged: int = 0
    judged_valid: int = 0
    judgments_made: int = 0
    comparisons: int = 0
    agreements: int = 0
    status: str = "active"
    disqualified_at: Optional[int] = None

    @property
    def role(self) -> str:
        gen = self.questions_written > 0
        val = self.judgments_made > 0
        return "both" if gen and val else "generator" if gen else "validator" if val else "none"

    @property
    def valid_rate(self) -> float:
        return self.judged_valid / self.judged if self.judged else 1.0

    @property
    def agreement_rate(self) -> float:
        return self.agreements / self.comparisons if self.comparisons else 1.0


@dataclass(frozen=True)
class TraceEntry:
    event_index: int
    worker: str
    action: str  # "disqualified" or "excluded"


@dataclass
class QCResult:
    records: dict = field(default_factory=dict)
    trace: list = field(default_factory=list)

    def excluded(self) -> set:
        return {t.event_index for t in self.trace if t.action == "excluded"}


def judgments_agree(a: Judged, b: Judged) -> bool:
    if a.verdict is Verdict.ANSWER and b.verdict is Verdict.ANSWER:
        return answers_agree(a.answer, b.answer)
    return a.verdict == b.verdict


def replay_qc(events: Sequence[Event], warmup: int = WARMUP,
              min_valid: float = GENERATOR_MIN_VALID,
              min_agreement: float = VALIDATOR_MIN_AGREEMENT) -> QCResult:
    """Replay quality control over a time-ordered event log.

    Rates are cumulative and only checked once a worker has ``warmup`` judged
    questions (generators) or agreement comparisons (validators). A generator
    is disqualified when its valid rate drops below ``min_valid``; a validator
    when its agreement rate is at or below ``min_agreement``. Events involving
    a disqualified worker afterwards are excluded and leave every count
    unchanged.
    """
    result = QCResult()
    recs = result.records
    owner = {}
    seen = {}
    last_time = None

    def rec(w):
        if w not in recs:
            recs[w] = WorkerRecord(w)
        return recs[w]

    for idx, e in enumerate(events):
        if last_time is not None and e.time < last_time:
            raise ValidationError(f"event {idx} is out of order ({e.time} < {last_time})")
        last_time = e.time
        if e.kind == "generation":
            if rec(e.worker).status != "active":
                result.trace.append(TraceEntry(idx, e.worker, "excluded"))
                continue
            rec(e.worker).questions_written += len(e.questions)
            for q in e.questions:
                owner[q] = e.worker
            continue
        validator = rec(e.worker)
        generators = {owner[j.question] for j in e.judgments if j.question in owner}
        if validator.status != "active" or any(rec(g).status != "active" for g in generators):
            result.trace.append(TraceEntry(idx, e.worker, "excluded"))
            continue
        touched = {e.worker} | generators
        for j in e.judgments:
            validator.judgments_made += 1
            gen = owner.get(j.question)
            if gen is not None:
                g = rec(gen)
                g.judged += 1
                g.judged_valid += j.verdict is Verdict.ANSWER
            for other_worker, other in seen.get(j.question, ()):
                if other_worker == e.worker:
                    continue
                agree = judgments_agree(j, other)
                for w in (e.worker, other_worker):
                    r = rec(w)
                    r.comparisons += 1
                    r.agreements += agree
                touched.add(other_worker)
            seen.setdefault(j.question, []).append((e.worker, j))
        for w in sorted(touched):
            r = rec(w)
            if r.status != "active":
                continue
            if (r.judged >= warmup and r.valid_rate < min_valid) or \
                    (r.comparisons >= warmup and r.agreement_rate <= min_agreement):
                r.status = "disqualified"
                r.disqualified_at = idx
                result.trace.append(TraceEntry(idx, w, "disqualified"))
    return result


# -- payouts ----------------------------------------------------------------

@dataclass
class Payout:
    worker_id: str
    generation_batches: int = 0
    generation_cents: int = 0
    base_unmet: int = 0
    validation_batches: int = 0
    validation_cents: int = 0

    @property
    def total_cents(self) -> int:
        return self.generation_cents + self.validation_cents


def compute_payouts(events: Sequence[Event], base_on_written: bool = False,
                    bonus_on_written: bool = False, apply_qc: bool = True) -> dict:
    """Per-worker pay. A question counts as validated when every judgment answered it.

    With ``apply_qc`` events excluded by :func:`replay_qc` earn nothing.
    """
    excluded = replay_qc(events).excluded() if apply_qc else set()
    verdicts = {}
    for idx, e in enumerate(events):
        if e.kind == "validation" and idx not in excluded:
            for j in e.judgments:
                verdicts.setdefault(j.question, []).append(j.verdict)
    pay = {}
    for idx, e in enumerate(events):
        if idx in excluded:
            continue
        p = pay.setdefault(e.worker, Payout(e.worker))
        if e.kind == "generation":
            validated = sum(1 for q in e.questions
                            if verdicts.get(q) and all(v is Verdict.ANSWER for v in verdicts[q]))
            batch = GenerationBatch(e.worker, max(1, e.targets), len(e.questions), validated)
            cents = generation_pay(batch, base_on_written, bonus_on_written)
            p.generation_batches += 1
            p.generation_cents += cents
            p.base_unmet += not base_met(batch, base_on_written)
        elif e.judgments:
            p.validation_batches += 1
            p.validation_cents += validation_pay(len(e.judgments))
    return dict(sorted(pay.items()))


def format_payouts(pay: dict) -> str:
    header = ("worker", "gen", "gen_c", "unmet", "val", "val_c", "total_c", "total_$")
    rows = [header]
    for p in pay.values():
        rows.append((p.worker_id, str(p.generation_batches), str(p.generation_cents),
                     str(p.base_unmet), str(p.validation_batches), str(p.validation_cents),
                     str(p.total_cents), f"{p.total_cents / 100:.2f}"))
    total = sum(p.total_cents for p in pay.values())
    rows.append(("TOTAL", str(sum(p.generation_batches for p in pay.values())),
                 str(sum(p.generation_cents for p in pay.values())),
                 str(sum(p.base_unmet for p in pay.values())),
                 str(sum(p.validation_batches for p in pay.values())),
                 str(sum(p.validation_cents for p in pay.values())),
                 str(total), f"{total / 100:.2f}"))
    widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
    return "\n".join("  ".join(c.ljust(w) if i == 0 else c.rjust(w)
                               for i, (c, w) in enumerate(zip(r, widths))) for r in rows)
