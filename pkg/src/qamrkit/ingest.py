"""Readers and writers for annotation corpora, gold arcs and triple graphs.

The canonical corpus format is JSON Lines with three record kinds::

    {"type": "header", "format": "qamrkit-canonical", "version": 1, "split": "dev"}
    {"type": "sentence", "id": "s1", "tokens": ["Pierre", "Vinken", ...]}
    {"type": "qa", "sentence_id": "s1", "worker_id": "w1", "target_index": 8,
     "question": ["What", "will", "he", "join", "?"], "answer": [9, 10],
     "judgments": [{"validator_id": "v1", "verdict": "answer", "answer": [9, 10]}]}

The header is optional on input. ``qa`` records may carry an optional
``"group"`` key naming the target-word batch they were written for.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from importlib import resources
from typing import IO, Iterable, Optional, Sequence

from .model import (AnswerSet, GenericGraph, GoldArc, Judgment, RawAnnotation,
                    Sentence, ValidationError, Verdict)

log = logging.getLogger(__name__)

FORMAT_NAME = "qamrkit-canonical"
FORMAT_VERSION = 1
ARC_SOURCES = ("propbank", "nombank", "qasrl", "other")


class FormatError(ValidationError):
    def __init__(self, message: str, line: Optional[int] = None, source: str = "<stream>"):
        self.line = line
        self.source = source
        where = f"{source}:{line}: " if line is not None else f"{source}: "
        super().__init__(where + message)


@dataclass
class AnnotationCorpus:
    sentences: dict = field(default_factory=dict)
    annotations: list = field(default_factory=list)
    split_label: Optional[str] = None

    def validate(self) -> None:
        for n, ann in enumerate(self.annotations):
            sent = self.sentences.get(ann.sentence_id)
            if sent is None:
                raise ValidationError(
                    f"annotation {n} references unknown sentence {ann.sentence_id!r}")
            try:
                check_annotation(ann, sent)
            except ValidationError as e:
                raise ValidationError(f"annotation {n}: {e}") from None

    def annotations_by_sentence(self) -> dict:
        out = {sid: [] for sid in self.sentences}
        for ann in self.annotations:
            out[ann.sentence_id].append(ann)
        return out

    def __eq__(self, other):
        if not isinstance(other, AnnotationCorpus):
            return NotImplemented
        return (list(self.sentences.items()) == list(other.sentences.items())
                and self.annotations == other.annotations
                and self.split_label == other.split_label)


def check_annotation(ann: RawAnnotation, sent: Sentence) -> None:
    sent.check_index(ann.target_index)
    for i in ann.writer_answer:
        sent.check_index(i)
    for j in ann.judgments:
        if j.answer is not None:
            for i in j.answer:
                sent.check_index(i)


def add_sentence(corpus: AnnotationCorpus, sent: Sentence) -> None:
    prev = corpus.sentences.get(sent.id)
    if prev is not None and prev.tokens != sent.tokens:
        raise ValidationError(f"sentence {sent.id!r} redefined with different tokens")
    corpus.sentences[sent.id] = sent


# -- canonical JSON Lines ---------------------------------------------------

def _judgment_from_json(obj: dict) -> Judgment:
    code = obj.get("verdict")
    try:
        verdict = Verdict(code)
    except ValueError:
        raise ValidationError(f"unknown verdict code {code!r}") from None
    answer = obj.get("answer")
    return Judgment(
        validator_id=str(obj.get("validator_id", "")),
        verdict=verdict,
        answer=AnswerSet(answer) if answer is not None else None,
        ref=obj.get("ref"),
    )


def _annotation_from_json(obj: dict) -> RawAnnotation:
    try:
        return RawAnnotation(
            sentence_id=str(obj["sentence_id"]),
            worker_id=str(obj.get("worker_id", "")),
            target_index=int(obj["target_index"]),
            question=tuple(obj["question"]),
            writer_answer=AnswerSet(obj["answer"]),
            judgments=tuple(_judgment_from_json(j) for j in obj.get("judgments", [])),
            group=None if obj.get("group") is None else str(obj["group"]),
        )
    except KeyError as e:
        raise ValidationError(f"missing field {e.args[0]!r}") from None
    except (TypeError, ValueError) as e:
        if isinstance(e, ValidationError):
            raise
        raise ValidationError(str(e)) from None


def read_canonical(stream: IO[str], source: str = "<stream>") -> AnnotationCorpus:
    corpus = AnnotationCorpus()
    lines = {}
    for lineno, line in enumerate(stream, 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as e:
            raise FormatError(f"malformed JSON ({e.msg})", lineno, source) from None
        if not isinstance(obj, dict):
            raise FormatError("record is not an object", lineno, source)
        kind = obj.get("type")
        try:
            if kind == "header":
                if obj.get("format") != FORMAT_NAME:
                    raise ValidationError(f"unknown format {obj.get('format')!r}")
                corpus.split_label = obj.get("split")
            elif kind == "sentence":
                add_sentence(corpus, Sentence(str(obj["id"]), tuple(obj["tokens"])))
            elif kind == "qa":
                corpus.annotations.append(_annotation_from_json(obj))
                lines[len(corpus.annotations) - 1] = lineno
            else:
                raise ValidationError(f"unknown record type {kind!r}")
        except KeyError as e:
            raise FormatError(f"missing field {e.args[0]!r}", lineno, source) from None
        except ValidationError as e:
            raise FormatError(str(e), lineno, source) from None
    for n, ann in enumerate(corpus.annotations):
        sent = corpus.sentences.get(ann.sentence_id)
        if sent is None:
            raise FormatError(f"qa record references unknown sentence {ann.sentence_id!r}",
                              lines[n], source)
        try:
            check_annotation(ann, sent)
        except ValidationError as e:
            raise FormatError(f"qa record: {e}", lines[n], source) from None
    return corpus


def _judgment_to_json(j: Judgment) -> dict:
    out = {"validator_id": j.validator_id, "verdict": j.verdict.value}
    if j.ref is not None:
        out["ref"] = j.ref
    if j.answer is not None:
        out["answer"] = j.answer.sorted()
    return out


def annotation_to_json(ann: RawAnnotation) -> dict:
    out = {
        "type": "qa",
        "sentence_id": ann.sentence_id,
        "worker_id": ann.worker_id,
        "target_index": ann.target_index,
        "question": list(ann.question),
        "answer": ann.writer_answer.sorted(),
        "judgments": [_judgment_to_json(j) for j in ann.judgments],
    }
    if ann.group is not None:
        out["group"] = ann.group
    return out


def _dump(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def write_canonical(corpus: AnnotationCorpus, stream: IO[str]) -> None:
    header = {"type": "header", "format": FORMAT_NAME, "version": FORMAT_VERSION}
    if corpus.split_label is not None:
        header["split"] = corpus.split_label
    stream.write(_dump(header) + "\n")
    for sent in corpus.sentences.values():
        stream.write(_dump({"type": "sentence", "id": sent.id, "tokens": list(sent.tokens)}) + "\n")
    for ann in corpus.annotations:
        stream.write(_dump(annotation_to_json(ann)) + "\n")


# -- released TSV files -----------------------------------------------------

@dataclass
class ColumnMap:
    """Column roles for a tab-separated QA file (0-based column positions)."""

    sentence_id: int
    worker_id: int
    target_index: int
    question: int
    answer: int
    judgments: Sequence[int] = ()
    validators: Sequence[int] = ()
    group: Optional[int] = None
    index_sep: str = " "
    invalid_codes: Sequence[str] = ("invalid",)
    redundant_prefix: str = "redundant"
    skip_header: bool = False

    @classmethod
    def from_dict(cls, d: dict) -> "ColumnMap":
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known - {"comment"}
        if unknown:
            raise ValidationError(f"unknown column_map keys: {sorted(unknown)}")
        missing = [k for k in ("sentence_id", "worker_id", "target_index", "question", "answer")
                   if k not in d]
        if missing:
            raise ValidationError(f"column_map lacks required roles: {missing}")
        return cls(**{k: v for k, v in d.items() if k in known})

    @classmethod
    def load(cls, path: Optional[str] = None) -> "ColumnMap":
        """Load a column map; ``None`` selects the bundled map for the QAMR release."""
        if path is None:
            text = resources.files("qamrkit").joinpath("data/release_columns.json").read_text("utf-8")
        else:
            with open(path, encoding="utf-8") as f:
                text = f.read()
        return cls.from_dict(json.loads(text))


@dataclass
class Reject:
    line: int
    reason: str
    row: list


def parse_indices(cell: str, sep: str) -> list:
    parts = cell.replace(",", " ").split() if sep in (" ", ",") else cell.split(sep)
    try:
        return [int(p) for p in parts if p.strip()]
    except ValueError:
        raise ValidationError(f"unparseable index list {cell!r}") from None


def _parse_judgment_cell(cell: str, validator: str, cmap: ColumnMap) -> Judgment:
    text = cell.strip()
    low = text.lower()
    if low in {c.lower() for c in cmap.invalid_codes}:
        return Judgment(validator, Verdict.INVALID)
    if low.startswith(cmap.redundant_prefix.lower()):
        ref = text[len(cmap.redundant_prefix):].lstrip(" :-=").strip() or None
        return Judgment(validator, Verdict.REDUNDANT, ref=ref)
    idx = parse_indices(text, cmap.index_sep)
    if not idx:
        raise ValidationError(f"empty judgment cell {cell!r}")
    return Judgment(validator, Verdict.ANSWER, answer=AnswerSet(idx))


def read_sentences_tsv(stream: IO[str]) -> dict:
    """Read ``id<TAB>space-separated tokens`` lines into a sentence mapping."""
    out = {}
    for lineno, line in enumerate(stream, 1):
        line = line.rstrip("\n")
        if not line.strip():
            continue
        if "\t" not in line:
            raise FormatError("expected '<id>\\t<tokens>'", lineno)
        sid, text = line.split("\t", 1)
        out[sid] = Sentence(sid, tuple(text.split()))
    return out


def _tsv_row_to_annotation(row: list, cmap: ColumnMap) -> RawAnnotation:
    def col(i):
        if i >= len(row):
            raise ValidationError(f"missing required column {i}")
        return row[i]

    judgments = []
    for n, jc in enumerate(cmap.judgments):
        if jc >= len(row) or not row[jc].strip():
            continue
        validator = col(cmap.validators[n]) if n < len(cmap.validators) else f"v{n}"
        judgments.append(_parse_judgment_cell(row[jc], validator, cmap))
    answer = parse_indices(col(cmap.answer), cmap.index_sep)
    try:
        target = int(col(cmap.target_index))
    except ValueError:
        raise ValidationError(f"unparseable target index {row[cmap.target_index]!r}") from None
    return RawAnnotation(
        sentence_id=col(cmap.sentence_id),
        worker_id=col(cmap.worker_id),
        target_index=target,
        question=tuple(col(cmap.question).split()),
        writer_answer=AnswerSet(answer),
        judgments=tuple(judgments),
        group=col(cmap.group) if cmap.group is not None else None,
    )


def read_release_tsv(stream: IO[str], column_map: ColumnMap, sentences: dict,
                     strict: bool = False, split_label: Optional[str] = None):
    """Adapt a tab-separated QA file to an :class:`AnnotationCorpus`.

    Returns ``(corpus, rejects)``. Bad rows are collected in ``rejects``
    unless ``strict`` is set, in which case the first one raises.
    Only sentences referenced by accepted rows are kept, in first-use order.
    """
    corpus = AnnotationCorpus(split_label=split_label)
    rejects = []
    reader = csv.reader(stream, delimiter="\t", quoting=csv.QUOTE_NONE)
    for lineno, row in enumerate(reader, 1):
        if lineno == 1 and column_map.skip_header:
            continue
        if not row or not any(c.strip() for c in row):
            continue
        try:
            ann = _tsv_row_to_annotation(row, column_map)
            sent = sentences.get(ann.sentence_id)
            if sent is None:
                raise ValidationError(f"unknown sentence {ann.sentence_id!r}")
            check_annotation(ann, sent)
        except ValidationError as e:
            if strict:
                raise FormatError(str(e), lineno) from None
            rejects.append(Reject(lineno, str(e), row))
            continue
        corpus.sentences.setdefault(sent.id, sent)
        corpus.annotations.append(ann)
    if rejects:
        log.warning("%d rows rejected", len(rejects))
    return corpus, rejects


# -- gold arcs --------------------------------------------------------------

def read_gold_arcs(stream: IO[str], sentences: Optional[dict] = None, *,
                   drop_r: bool = False, drop_dis: bool = False,
                   drop_pred_in_arg: bool = False) -> dict:
    """Read ``<sent> <pred> <label|_> <source> <i,j,...>[|<i,j,...>...]`` lines.

    Several ``|``-separated index lists are only legal for the ``qasrl``
    source and are merged into their union.
    """
    arcs: dict = {}
    for lineno, line in enumerate(stream, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 5:
            raise FormatError(f"expected 5 fields, got {len(parts)}", lineno)
        sid, pred, label, source, idx = parts
        if source not in ARC_SOURCES:
            raise FormatError(f"unknown source tag {source!r}", lineno)
        label = "" if label == "_" else label
        try:
            pred = int(pred)
            lists = [parse_indices(chunk, ",") for chunk in idx.split("|")]
        except ValueError as e:
            raise FormatError(str(e), lineno) from None
        if len(lists) > 1 and source != "qasrl":
            raise FormatError("multiple answer lists are only allowed for qasrl arcs", lineno)
        merged = sorted(set().union(*lists))
        if not merged:
            raise FormatError("empty argument", lineno)
        arc = GoldArc(pred, AnswerSet(merged), label, source)
        if sentences is not None:
            sent = sentences.get(sid)
            if sent is None:
                raise FormatError(f"unknown sentence {sid!r}", lineno)
            try:
                sent.check_index(pred)
                for i in merged:
                    sent.check_index(i)
            except ValidationError as e:
                raise FormatError(str(e), lineno) from None
        if drop_r and label.startswith("R-"):
            continue
        if drop_dis and label.endswith("-DIS"):
            continue
        if drop_pred_in_arg and pred in arc.argument:
            continue
        arcs.setdefault(sid, []).append(arc)
    return arcs


def drop_auxiliaries(arcs: dict, sentences: dict, aux_words: Iterable[str]) -> dict:
    """Remove arcs whose predicate, or whole argument, is an auxiliary verb."""
    aux = {w.casefold() for w in aux_words}
    out = {}
    for sid, sent_arcs in arcs.items():
        toks = sentences[sid].tokens
        kept = []
        for arc in sent_arcs:
            if toks[arc.predicate_index].casefold() in aux:
                continue
            if all(toks[i].casefold() in aux for i in arc.argument):
                continue
            kept.append(arc)
        out[sid] = kept
    return out


def write_gold_arcs(arcs: dict, stream: IO[str]) -> None:
    for sid, sent_arcs in arcs.items():
        for arc in sent_arcs:
            idx = ",".join(str(i) for i in arc.argument)
            stream.write(f"{sid} {arc.predicate_index} {arc.label or '_'} {arc.source} {idx}\n")


# -- triple graphs ----------------------------------------------------------

def read_graph_triples(stream: IO[str]) -> GenericGraph:
    """Read ``node``/``edge``/``root`` lines. Edge labels run to end of line."""
    graph = GenericGraph()
    edges = []
    root = None
    for lineno, raw in enumerate(stream, 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        kind, _, rest = line.partition(" ")
        try:
            if kind == "node":
                parts = rest.split()
                if not parts:
                    raise ValidationError("node line without id")
                graph.add_node(parts[0], parts[1:])
            elif kind == "edge":
                parts = rest.split(None, 2)
                if len(parts) < 2:
                    raise ValidationError("edge line needs two endpoints")
                edges.append((lineno, parts[0], parts[1], parts[2] if len(parts) > 2 else ""))
            elif kind == "root":
                if root is not None:
                    raise ValidationError("multiple roots")
                root = (lineno, rest.strip())
            else:
                raise ValidationError(f"unknown line kind {kind!r}")
        except ValidationError as e:
            raise FormatError(str(e), lineno) from None
    for lineno, src, tgt, label in edges:
        try:
            graph.add_edge(src, tgt, label)
        except ValidationError as e:
            raise FormatError(f"dangling edge: {e}", lineno) from None
    if root is not None:
        try:
            graph.set_root(root[1])
        except ValidationError as e:
            raise FormatError(str(e), root[0]) from None
    return graph


def write_graph_triples(graph: GenericGraph, stream: IO[str]) -> None:
    for node_id, content in graph.nodes.items():
        stream.write(" ".join(["node", node_id, *content]) + "\n")
    for src, tgt, label in graph.edges:
        stream.write(f"edge {src} {tgt} {label}".rstrip() + "\n")
    if graph.root is not None:
        stream.write(f"root {graph.root}\n")


SENTENCE_MARK = "# sentence "


def read_graph_blocks(stream: IO[str]) -> dict:
    """Split a multi-graph triple file on ``# sentence <id>`` lines.

    A file with no such marker is one graph keyed by ``None``.
    """
    blocks, current, lines = {}, None, []
    for line in stream:
        if line.startswith(SENTENCE_MARK):
            if lines or current is not None:
                blocks[current] = lines
            current, lines = line[len(SENTENCE_MARK):].strip(), []
        else:
            lines.append(line)
    if lines or current is not None:
        blocks[current] = lines
    out = {}
    for sid, block in blocks.items():
        if sid is None and not any(l.strip() and not l.startswith("#") for l in block):
            continue
        try:
            out[sid] = read_graph_triples(block)
        except FormatError as e:
            raise FormatError(f"graph {sid!r}: {e}") from None
    return out


def write_graph_blocks(graphs: dict, stream: IO[str]) -> None:
    for sid, graph in graphs.items():
        stream.write(f"{SENTENCE_MARK}{sid}\n")
        write_graph_triples(graph, stream)
