"""``qamrkit`` command line.

Every subcommand is deterministic given its inputs and ``--seed``. JSON
reports start with a ``meta`` record carrying the toolkit version, the
configuration, the seed and SHA-256 hashes of the inputs. ``--jobs`` only
changes how work is scheduled, never the output bytes.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from contextlib import contextmanager

from . import __version__
from .analysis import external_phrases, wh_distribution, what_kind_rate
from .filtering import corpus_stats, filter_corpus, format_stats_table, to_qamrs
from .induce import EMPTY_ORDERS, induce_graph, render_tree, to_generic
from .ingest import (AnnotationCorpus, ColumnMap, read_canonical, read_gold_arcs,
                     read_graph_blocks, read_release_tsv, read_sentences_tsv,
                     write_canonical, write_graph_blocks)
from .ledger import compute_payouts, format_payouts, read_events, replay_qc
from .metrics.concepts import MATCH_MODES, NodeMatchConfig, concept_agreement
from .metrics.prf import PRF
from .metrics.qa import answer_em, answer_f1, qg_pr
from .metrics.smatch import CONTENT_MODES, unlabeled_smatch
from .metrics.srl import OVERLAP_MODES, PREDICATE_MODES, align_sentence, arc_recall, recall_curve
from .model import ValidationError
from .report import default_jobs, dumps, meta_record, pmap
from .text import load_stopwords

log = logging.getLogger("qamrkit")

# argparse destinations that never reach the config echo
_NOT_ECHOED = {"command", "func", "jobs", "out", "verbose"}


@contextmanager
def _output(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            yield f


def _load_corpus(path: str) -> AnnotationCorpus:
    if path == "-":
        return read_canonical(sys.stdin, "<stdin>")
    with open(path, encoding="utf-8") as f:
        return read_canonical(f, path)


def _maybe_filter(corpus, args):
    if getattr(args, "no_filter", False):
        return corpus
    filtered, _ = filter_corpus(corpus, getattr(args, "require_judgments", 0))
    return filtered


def _config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in _NOT_ECHOED}


def _meta(args, inputs, seed=None) -> str:
    return dumps(meta_record(args.command, _config(args), seed, inputs))


def _load_lemmas(path):
    if not path:
        return None
    table = {}
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line and not line.startswith("#"):
                surface, lemma = line.split("\t")[:2]
                table[surface.casefold()] = lemma.casefold()
    return table


def _load_arcs(args, sentences):
    with open(args.arcs, encoding="utf-8") as f:
        return read_gold_arcs(f, sentences, drop_r=args.drop_r, drop_dis=args.drop_dis,
                              drop_pred_in_arg=args.drop_pred_in_arg)


# -- subcommands ------------------------------------------------------------

def cmd_ingest(args):
    cmap = ColumnMap.load(args.column_map)
    with open(args.sentences, encoding="utf-8") as f:
        sentences = read_sentences_tsv(f)
    with open(args.tsv, encoding="utf-8", newline="") as f:
        corpus, rejects = read_release_tsv(f, cmap, sentences, strict=args.strict,
                                           split_label=args.split)
    with _output(args.out) as out:
        write_canonical(corpus, out)
    if args.rejects:
        with open(args.rejects, "w", encoding="utf-8") as f:
            for r in rejects:
                f.write(dumps({"line": r.line, "reason": r.reason, "row": r.row}) + "\n")
    print(f"{len(corpus.annotations)} annotations, {len(rejects)} rejected", file=sys.stderr)
    return 0


def cmd_filter(args):
    corpus = _load_corpus(args.input)
    filtered, stats = filter_corpus(corpus, args.require_judgments)
    if args.stats:
        with _output(args.out) as out:
            if args.json:
                out.write(_meta(args, [args.input]) + "\n")
                for rec in stats.to_records():
                    out.write(dumps(rec) + "\n")
            else:
                out.write(format_stats_table(stats) + "\n")
        if args.write:
            with _output(args.write) as out:
                write_canonical(filtered, out)
    else:
        with _output(args.write or args.out) as out:
            write_canonical(filtered, out)
    return 0


def cmd_stats(args):
    corpora = []
    for path in args.inputs:
        c = _load_corpus(path)
        if c.split_label is None:
            c.split_label = path
        corpora.append(c)
    stats = corpus_stats(corpora, args.require_judgments)
    with _output(args.out) as out:
        if args.json:
            out.write(_meta(args, args.inputs) + "\n")
            for rec in stats.to_records():
                out.write(dumps(rec) + "\n")
        else:
            out.write(format_stats_table(stats) + "\n")
    return 0


def _induce_one(job):
    sentence, qamr, order = job
    return induce_graph(sentence, qamr, empty_edge_order=order)


def _induce_all(corpus, args):
    qamrs = to_qamrs(corpus)
    jobs = [(corpus.sentences[sid], qamrs[sid], args.empty_edge_order) for sid in corpus.sentences]
    return pmap(_induce_one, jobs, args.jobs)


def cmd_induce(args):
    corpus = _maybe_filter(_load_corpus(args.input), args)
    graphs = _induce_all(corpus, args)
    with _output(args.out) as out:
        if args.format == "tree":
            for g in graphs:
                out.write(f"# sentence {g.sentence_id}\n")
                out.write(render_tree(g))
                for d in g.diagnostics:
                    out.write(f"# {d}\n")
        else:
            write_graph_blocks({g.sentence_id: to_generic(g) for g in graphs}, out)
    return 0


def _score_one(job):
    sid, pred, gold, tokens, cfg, smatch_kw = job
    concept = concept_agreement(gold, pred, cfg, tokens)
    sm = unlabeled_smatch(pred, gold, **smatch_kw)
    return sid, concept, sm


def cmd_score_graph(args):
    corpus = _maybe_filter(_load_corpus(args.input), args)
    with open(args.gold, encoding="utf-8") as f:
        gold = read_graph_blocks(f)
    if args.pred:
        with open(args.pred, encoding="utf-8") as f:
            pred = read_graph_blocks(f)
    else:
        pred = {g.sentence_id: to_generic(g) for g in _induce_all(corpus, args)}
    if set(gold) == {None} and len(pred) == 1:
        gold = {next(iter(pred)): gold[None]}
    lemmas = _load_lemmas(args.lemma_table)
    cfg = NodeMatchConfig(args.match_mode, lemmas)
    smatch_kw = dict(restarts=args.restarts, seed=args.seed, mode=args.content_mode,
                     lemma_table=lemmas, include_instances=not args.relations_only,
                     node_budget=args.node_budget)
    jobs = []
    for sid, g in gold.items():
        if sid not in pred:
            raise ValidationError(f"no predicted graph for sentence {sid!r}")
        tokens = corpus.sentences[sid].tokens if sid in corpus.sentences else None
        jobs.append((sid, pred[sid], g, tokens, cfg, smatch_kw))
    results = pmap(_score_one, jobs, args.jobs)
    concept_total, smatch_total = PRF(0, 0, 0), PRF(0, 0, 0)
    inputs = [args.input, args.gold] + ([args.pred] if args.pred else [])
    with _output(args.out) as out:
        out.write(_meta(args, inputs, args.seed) + "\n")
        for sid, concept, sm in results:
            concept_total += concept
            smatch_total += sm.prf
            out.write(dumps({"type": "sentence", "sentence_id": sid,
                             "concept": concept.to_dict(), "smatch": sm.prf.to_dict(),
                             "mapping": sm.mapping}) + "\n")
        out.write(dumps({"type": "total", "metric": "concept_agreement",
                         **concept_total.to_dict()}) + "\n")
        out.write(dumps({"type": "total", "metric": "unlabeled_smatch",
                         **smatch_total.to_dict()}) + "\n")
    return 0


def _align_kw(args):
    return dict(lemma_table=_load_lemmas(args.lemma_table), overlap=args.overlap,
                predicate_mode=args.predicate_mode)


def cmd_align(args):
    corpus = _maybe_filter(_load_corpus(args.input), args)
    arcs = _load_arcs(args, corpus.sentences)
    qamrs = to_qamrs(corpus)
    kw = _align_kw(args)
    with _output(args.out) as out:
        out.write(_meta(args, [args.input, args.arcs]) + "\n")
        for sid, qamr in qamrs.items():
            sent_arcs = arcs.get(sid, [])
            for k, al in enumerate(align_sentence(corpus.sentences[sid], qamr, sent_arcs, **kw)):
                out.write(dumps({"type": "alignment", "sentence_id": sid, "pair": k,
                                 "question": qamr.pairs[k].question_text, "arc": al.arc,
                                 "overlap": float(al.overlap)}) + "\n")
        rec = arc_recall(corpus.sentences, qamrs, arcs, **kw)
        out.write(dumps({"type": "total", "metric": "arc_recall", "covered": rec.covered,
                         "total": rec.total, "recall": rec.value}) + "\n")
    return 0


def cmd_recall_curve(args):
    corpus = _maybe_filter(_load_corpus(args.input), args)
    arcs = _load_arcs(args, corpus.sentences)
    ns = list(range(1, args.annotators + 1))
    curve = recall_curve(corpus, arcs, ns, mode=args.mode, seed=args.seed, trials=args.trials,
                         annotators=args.annotators, **_align_kw(args))
    with _output(args.out) as out:
        out.write(_meta(args, [args.input, args.arcs], args.seed) + "\n")
        for n in ns:
            out.write(dumps({"type": "recall", "n": n, "recall": curve[n]}) + "\n")
    return 0


def cmd_analyze(args):
    merged = AnnotationCorpus()
    for path in args.inputs:
        c = _maybe_filter(_load_corpus(path), args)
        merged.sentences.update(c.sentences)
        merged.annotations.extend(c.annotations)
    stopwords = load_stopwords(args.stopwords)
    hist = wh_distribution(merged)
    ext = external_phrases(merged, stopwords)
    kind = what_kind_rate(merged)
    with _output(args.out) as out:
        out.write(_meta(args, list(args.inputs) + ([args.stopwords] if args.stopwords else []))
                  + "\n")
        out.write(dumps({"type": "wh_distribution", "counts": hist.counts,
                         "fractions": hist.fractions(), "non_wh": hist.other}) + "\n")
        out.write(dumps({"type": "external_phrases", "questions": ext.questions.total,
                         "with_external": ext.questions.count, "rate": ext.questions.value,
                         "unique_phrases": len(ext.phrases), "occurrences": ext.occurrences,
                         "unique_after_wh": ext.unique_after_wh,
                         "stopword_sha256": ext.stopword_hash}) + "\n")
        out.write(dumps({"type": "what_kind_rate", "count": kind.count, "total": kind.total,
                         "rate": kind.value, "empty": kind.empty}) + "\n")
        for pc in ext.top(args.top):
            out.write(dumps({"type": "phrase", "phrase": " ".join(pc.phrase), "count": pc.count,
                             "after_wh": pc.after_wh, "category": pc.category}) + "\n")
    return 0


def _read_json_or_jsonl(path, record_keys):
    """A JSON mapping, a JSON list of records, or JSONL records (a lone record is wrapped)."""
    with open(path, encoding="utf-8") as f:
        text = f.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        return [json.loads(line) for line in text.splitlines() if line.strip()]
    if isinstance(data, dict) and set(record_keys) <= set(data):
        return [data]
    return data


def qa_ids(corpus) -> dict:
    """``"<sentence_id>#<k>"`` for the k-th question of each sentence, in corpus order."""
    counters, out = {}, {}
    for ann in corpus.annotations:
        k = counters.get(ann.sentence_id, 0)
        counters[ann.sentence_id] = k + 1
        out[f"{ann.sentence_id}#{k}"] = ann
    return out


def cmd_eval_qa(args):
    corpus = _maybe_filter(_load_corpus(args.input), args)
    preds = _read_json_or_jsonl(args.pred, ("id", "answer"))
    if isinstance(preds, list):
        preds = {p["id"]: p["answer"] for p in preds}
    em = f1 = 0.0
    n = 0
    with _output(args.out) as out:
        out.write(_meta(args, [args.input, args.pred]) + "\n")
        for qid, ann in qa_ids(corpus).items():
            tokens = corpus.sentences[ann.sentence_id].tokens
            golds = [ann.writer_answer.text(tokens)]
            golds += [j.answer.text(tokens) for j in ann.judgments if j.answer is not None]
            pred = preds.get(qid, "")
            e, f = answer_em(pred, golds), answer_f1(pred, golds)
            em += e
            f1 += f
            n += 1
            if args.per_question:
                out.write(dumps({"type": "question", "id": qid, "em": e, "f1": f}) + "\n")
        out.write(dumps({"type": "total", "questions": n, "exact_match": em / n if n else 0.0,
                         "f1": f1 / n if n else 0.0}) + "\n")
    return 0


def cmd_eval_qg(args):
    corpus = _maybe_filter(_load_corpus(args.input), args)
    preds = _read_json_or_jsonl(args.pred, ("sentence_id", "questions"))
    if isinstance(preds, dict):
        preds = [{"sentence_id": k, "questions": v} for k, v in preds.items()]
    by_sent = {}
    for rec in preds:
        qs = [q.split() if isinstance(q, str) else list(q) for q in rec["questions"]]
        by_sent.setdefault(rec["sentence_id"], []).extend(qs)
    total = PRF(0, 0, 0)
    qamrs = to_qamrs(corpus)
    with _output(args.out) as out:
        out.write(_meta(args, [args.input, args.pred]) + "\n")
        for sid, qamr in qamrs.items():
            gold = [p.question for p in qamr.pairs]
            prf = qg_pr(by_sent.get(sid, []), gold, args.threshold)
            total += prf
            out.write(dumps({"type": "sentence", "sentence_id": sid, **prf.to_dict()}) + "\n")
        out.write(dumps({"type": "total", "threshold": args.threshold, **total.to_dict()}) + "\n")
    return 0


def _events(path):
    with open(path, encoding="utf-8") as f:
        return read_events(f)


def cmd_payout(args):
    pay = compute_payouts(_events(args.events), args.base_on_written, args.bonus_on_written,
                          apply_qc=not args.no_qc)
    with _output(args.out) as out:
        if args.json:
            out.write(_meta(args, [args.events]) + "\n")
            for p in pay.values():
                out.write(dumps({"type": "worker", "worker": p.worker_id,
                                 "generation_batches": p.generation_batches,
                                 "generation_cents": p.generation_cents,
                                 "base_unmet": p.base_unmet,
                                 "validation_batches": p.validation_batches,
                                 "validation_cents": p.validation_cents,
                                 "total_cents": p.total_cents}) + "\n")
            total = sum(p.total_cents for p in pay.values())
            out.write(dumps({"type": "total", "cents": total, "dollars": round(total / 100, 2)})
                      + "\n")
        else:
            out.write(format_payouts(pay) + "\n")
    return 0


def cmd_qc_replay(args):
    result = replay_qc(_events(args.events), warmup=args.warmup)
    with _output(args.out) as out:
        out.write(_meta(args, [args.events]) + "\n")
        for t in result.trace:
            out.write(dumps({"type": "trace", "event": t.event_index, "worker": t.worker,
                             "action": t.action}) + "\n")
        for w, r in sorted(result.records.items()):
            out.write(dumps({"type": "worker", "worker": w, "role": r.role, "status": r.status,
                             "questions_written": r.questions_written, "judged": r.judged,
                             "valid_rate": r.valid_rate, "judgments_made": r.judgments_made,
                             "comparisons": r.comparisons, "agreement_rate": r.agreement_rate,
                             "disqualified_at": r.disqualified_at}) + "\n")
    return 0


# -- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", "-o", default="-", help="output path (default stdout)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--jobs", "-j", type=int, default=default_jobs(),
                        help="worker processes (default $QAMRKIT_JOBS or 1)")
    common.add_argument("--verbose", "-v", action="store_true")

    corpus_in = argparse.ArgumentParser(add_help=False)
    corpus_in.add_argument("--in", dest="input", required=True, help="canonical corpus (JSONL)")
    corpus_in.add_argument("--no-filter", action="store_true",
                           help="use every question, skipping validation and wh filtering")
    corpus_in.add_argument("--require-judgments", type=int, default=0, metavar="N")

    arcs_in = argparse.ArgumentParser(add_help=False)
    arcs_in.add_argument("--arcs", required=True, help="gold arc file")
    arcs_in.add_argument("--drop-r", action="store_true", help="drop R- reference roles")
    arcs_in.add_argument("--drop-dis", action="store_true", help="drop -DIS discourse arguments")
    arcs_in.add_argument("--drop-pred-in-arg", action="store_true",
                         help="drop arguments containing their predicate")
    arcs_in.add_argument("--overlap", choices=OVERLAP_MODES, default="jaccard")
    arcs_in.add_argument("--predicate-mode", choices=PREDICATE_MODES, default="question")
    arcs_in.add_argument("--lemma-table", help="TSV of surface<TAB>lemma")

    p = argparse.ArgumentParser(prog="qamrkit", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"qamrkit {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("ingest", parents=[common], help="released TSV to canonical JSONL")
    s.add_argument("--tsv", required=True)
    s.add_argument("--sentences", required=True, help="TSV of sentence id<TAB>tokens")
    s.add_argument("--column-map", help="JSON column map (default: bundled release map)")
    s.add_argument("--split")
    s.add_argument("--strict", action="store_true", help="abort on the first bad row")
    s.add_argument("--rejects", help="write rejected rows here as JSONL")
    s.set_defaults(func=cmd_ingest)

    s = sub.add_parser("filter", parents=[common], help="aggregate judgments and filter")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--require-judgments", type=int, default=0, metavar="N")
    s.add_argument("--stats", action="store_true", help="print statistics instead of the corpus")
    s.add_argument("--json", action="store_true", help="statistics as JSON records")
    s.add_argument("--write", help="also write the filtered corpus here")
    s.set_defaults(func=cmd_filter)

    s = sub.add_parser("stats", parents=[common], help="per-split corpus statistics")
    s.add_argument("inputs", nargs="+")
    s.add_argument("--require-judgments", type=int, default=0, metavar="N")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_stats)

    s = sub.add_parser("induce", parents=[common, corpus_in], help="induce QAMR graphs")
    s.add_argument("--format", choices=("triples", "tree"), default="triples")
    s.add_argument("--empty-edge-order", choices=EMPTY_ORDERS, default="deferred")
    s.set_defaults(func=cmd_induce)

    s = sub.add_parser("score-graph", parents=[common, corpus_in],
                       help="concept agreement and unlabeled SMATCH against gold graphs")
    s.add_argument("--gold", required=True, help="gold graphs in triple format")
    s.add_argument("--pred", help="predicted graphs (default: induce from --in)")
    s.add_argument("--match-mode", choices=MATCH_MODES, default="surface")
    s.add_argument("--content-mode", choices=CONTENT_MODES, default="surface")
    s.add_argument("--relations-only", action="store_true", help="drop instance triples")
    s.add_argument("--restarts", type=int, default=4)
    s.add_argument("--node-budget", type=int, default=200)
    s.add_argument("--lemma-table")
    s.add_argument("--empty-edge-order", choices=EMPTY_ORDERS, default="deferred")
    s.set_defaults(func=cmd_score_graph)

    s = sub.add_parser("align", parents=[common, corpus_in, arcs_in], help="align QA pairs to arcs")
    s.set_defaults(func=cmd_align)

    s = sub.add_parser("recall-curve", parents=[common, corpus_in, arcs_in],
                       help="arc recall against number of annotators")
    s.add_argument("--mode", choices=("exhaustive", "sampled"), default="exhaustive")
    s.add_argument("--trials", type=int, default=100)
    s.add_argument("--annotators", type=int, default=5)
    s.set_defaults(func=cmd_recall_curve)

    s = sub.add_parser("analyze", parents=[common], help="wh distribution and external phrases")
    s.add_argument("inputs", nargs="+")
    s.add_argument("--no-filter", action="store_true")
    s.add_argument("--require-judgments", type=int, default=0, metavar="N")
    s.add_argument("--stopwords", help="stopword file (default: bundled list)")
    s.add_argument("--top", type=int, default=50)
    s.set_defaults(func=cmd_analyze)

    s = sub.add_parser("eval-qa", parents=[common, corpus_in], help="SQuAD-style EM/F1")
    s.add_argument("--pred", required=True, help='JSON {"<sent>#<k>": answer} or JSONL')
    s.add_argument("--per-question", action="store_true")
    s.set_defaults(func=cmd_eval_qa)

    s = sub.add_parser("eval-qg", parents=[common, corpus_in], help="question generation P/R")
    s.add_argument("--pred", required=True, help='JSONL {"sentence_id", "questions"}')
    s.add_argument("--threshold", type=float, default=0.8,
                   help="multi-BLEU threshold; 1.0 means exact match")
    s.set_defaults(func=cmd_eval_qg)

    s = sub.add_parser("payout", parents=[common], help="compute worker pay from an event log")
    s.add_argument("--events", required=True)
    s.add_argument("--base-on-written", action="store_true")
    s.add_argument("--bonus-on-written", action="store_true")
    s.add_argument("--no-qc", action="store_true", help="pay excluded events too")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_payout)

    s = sub.add_parser("qc-replay", parents=[common], help="replay quality control")
    s.add_argument("--events", required=True)
    s.add_argument("--warmup", type=int, default=20)
    s.set_defaults(func=cmd_qc_replay)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValidationError, OSError, KeyError, ValueError) as e:
        print(f"qamrkit {args.command}: error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
