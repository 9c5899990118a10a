"""Per-question dataset construction, selection rules, serialization and statistics."""

from __future__ import annotations

import enum
import json
import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import AbstractSet, Iterable, List, Optional, Sequence, Tuple, Union

from .bgp import AskQueryError, Binding, execute, project, rewrite_to_star
from .graph import GraphRecord, filter_by_kge_vocab, ground_patterns, to_graph_record
from .sparql import ParseError, parse_query
from .store import LabelTable, TripleStore

logger = logging.getLogger(__name__)

PROVENANCES = ("mcwq", "lcquad2", "other")
RECORD_FIELDS = ("id", "question", "answers", "entities", "relations", "edges",
                 "entity_labels", "relation_labels", "had_filters", "truncated")


class DatasetFormatError(ValueError):
    def __init__(self, path, lineno: int, message: str):
        self.path = str(path)
        self.lineno = lineno
        super().__init__(f"{path}:{lineno}: {message}")


class DropReason(str, enum.Enum):
    ASK_QUERY = "ask_query"
    PARSE_FAILURE = "parse_failure"
    EMPTY_BINDINGS = "empty_bindings"
    EMPTY_GRAPH = "empty_graph"
    NO_LABELED_ANSWER = "no_labeled_answer"
    # only produced when the caller opts into dropping FILTER-bearing queries
    FILTERED_QUERY = "filtered_query"


@dataclass
class SourceSample:
    id: str
    question: str
    sparql: str
    provenance: str = "other"
    answers: Optional[List[str]] = None


@dataclass
class DatasetRecord:
    id: str
    question: str
    answers: List[str]
    graph: GraphRecord
    had_filters: bool = False
    truncated: bool = False

    def to_json(self) -> dict:
        g = self.graph
        return {
            "id": self.id,
            "question": self.question,
            "answers": list(self.answers),
            "entities": list(g.entities),
            "relations": list(g.relations),
            "edges": [list(e) for e in g.edges],
            "entity_labels": list(g.entity_labels),
            "relation_labels": list(g.relation_labels),
            "had_filters": self.had_filters,
            "truncated": self.truncated,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "DatasetRecord":
        missing = [k for k in RECORD_FIELDS if k not in obj]
        if missing:
            raise ValueError(f"missing fields: {', '.join(missing)}")
        graph = GraphRecord(
            entities=list(obj["entities"]),
            relations=list(obj["relations"]),
            edges=[list(e) for e in obj["edges"]],
            entity_labels=list(obj["entity_labels"]),
            relation_labels=list(obj["relation_labels"]),
        )
        graph.validate()
        for edge in graph.edges:
            if not all(isinstance(i, int) and not isinstance(i, bool) for i in edge):
                raise ValueError(f"edge {edge!r} has non-integer indices")
        if not isinstance(obj["answers"], list) or not all(isinstance(a, str) for a in obj["answers"]):
            raise ValueError("answers must be a list of strings")
        if not obj["answers"] or len(set(obj["answers"])) != len(obj["answers"]):
            raise ValueError("answers must be non-empty and duplicate-free")
        if not isinstance(obj["had_filters"], bool) or not isinstance(obj["truncated"], bool):
            raise ValueError("had_filters/truncated must be booleans")
        return cls(str(obj["id"]), str(obj["question"]), list(obj["answers"]), graph,
                   obj["had_filters"], obj["truncated"])


@dataclass
class Drop:
    id: str
    reason: DropReason
    detail: str = ""


@dataclass
class BuildOptions:
    vocab: Optional[AbstractSet[str]] = None
    bindings: str = "all"  # "all" unions every binding into the graph, "first" keeps one
    max_graph_size: Optional[int] = None
    drop_filtered: bool = False
    strict_relations: bool = False


@dataclass
class DatasetStats:
    record_count: int
    avg_triples_per_graph: float
    avg_answers_per_question: float
    avg_answer_word_span: float
    distinct_entities: int
    distinct_relations: int
    answer_coverage_fraction: float
    answers_per_question: dict = field(default_factory=dict)
    triples_per_graph: dict = field(default_factory=dict)

    def summary(self) -> dict:
        return {
            "record_count": self.record_count,
            "avg_triples_per_graph": self.avg_triples_per_graph,
            "avg_answers_per_question": self.avg_answers_per_question,
            "avg_answer_word_span": self.avg_answer_word_span,
            "distinct_entities": self.distinct_entities,
            "distinct_relations": self.distinct_relations,
            "answer_coverage_fraction": self.answer_coverage_fraction,
        }


def _dedup(items: Iterable[str]) -> List[str]:
    out = []
    seen = set()
    for item in items:
        if item not in seen:
            seen.add(item)
            out.append(item)
    return out


def derive_answers(bindings: Sequence[Binding], original_projection: Sequence[str],
                   labels: LabelTable, provided: Optional[Sequence[str]] = None) -> List[str]:
    """Answer strings for one question.

    Provided answers win when present. Otherwise every projected id is mapped to
    its label; ids without a label are dropped rather than emitted as raw ids.
    """
    if provided is not None:
        return _dedup(a for a in provided if a.strip())
    answers = []
    for row in project(bindings, original_projection):
        for node_id in row:
            label, found = labels.lookup(node_id)
            if found:
                answers.append(label)
    return _dedup(answers)


def process_sample(sample: SourceSample, store: TripleStore,
                   vocab: Optional[AbstractSet[str]] = None,
                   options: Optional[BuildOptions] = None) -> Union[DatasetRecord, Drop]:
    options = options or BuildOptions()
    if vocab is not None:
        options = replace(options, vocab=vocab)
    try:
        query = parse_query(sample.sparql)
    except ParseError as exc:
        return Drop(sample.id, DropReason.PARSE_FAILURE, str(exc))
    try:
        rewritten = rewrite_to_star(query)
    except AskQueryError as exc:
        return Drop(sample.id, DropReason.ASK_QUERY, str(exc))
    had_filters = query.stripped_filter_count > 0
    if had_filters and options.drop_filtered:
        return Drop(sample.id, DropReason.FILTERED_QUERY, f"{query.stripped_filter_count} FILTER clause(s)")
    try:
        bindings = execute(rewritten, store)
        if not bindings:
            return Drop(sample.id, DropReason.EMPTY_BINDINGS, "query has no solutions in the store")
        graph_bindings = bindings[:1] if options.bindings == "first" else bindings
        graph = ground_patterns(query.patterns, graph_bindings, options.max_graph_size)
        if options.vocab is not None:
            graph = filter_by_kge_vocab(graph, options.vocab, options.strict_relations)
        if not graph.triples:
            return Drop(sample.id, DropReason.EMPTY_GRAPH, "no triples left after grounding/filtering")
        answers = derive_answers(bindings, rewritten.original_projection, store.labels, sample.answers)
    except Exception as exc:  # noqa: BLE001 - recorded as a drop, never silently lost
        logger.exception("sample %s failed", sample.id)
        return Drop(sample.id, DropReason.PARSE_FAILURE, f"internal error: {exc}")
    if not answers:
        return Drop(sample.id, DropReason.NO_LABELED_ANSWER, "no answer with a label")
    return DatasetRecord(
        id=sample.id,
        question=sample.question,
        answers=answers,
        graph=to_graph_record(graph.triples, store.labels),
        had_filters=had_filters,
        truncated=graph.truncated,
    )


def build_dataset(samples: Sequence[SourceSample], store: TripleStore,
                  options: Optional[BuildOptions] = None,
                  jobs: int = 1) -> Tuple[List[DatasetRecord], List[Drop]]:
    """Process a batch, preserving input order in both outputs."""
    options = options or BuildOptions()
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(lambda s: process_sample(s, store, options=options), samples))
    else:
        results = [process_sample(s, store, options=options) for s in samples]
    records = [r for r in results if isinstance(r, DatasetRecord)]
    drops = [r for r in results if isinstance(r, Drop)]
    return records, drops


def drop_histogram(drops: Iterable[Drop]) -> dict:
    counts = Counter(d.reason.value for d in drops)
    return {reason.value: counts.get(reason.value, 0) for reason in DropReason}


def _norm_label(text: str) -> str:
    return " ".join(text.split()).casefold()


def answer_in_graph(record: DatasetRecord) -> bool:
    labels = {_norm_label(label) for label in record.graph.entity_labels}
    return any(_norm_label(a) in labels for a in record.answers)


def compute_stats(records: Sequence[DatasetRecord]) -> DatasetStats:
    """Corpus statistics; the word span is averaged over all answers pooled."""
    if not records:
        raise ValueError("stats undefined on empty dataset")
    n = len(records)
    all_answers = [a for r in records for a in r.answers]
    entities = set()
    relations = set()
    for r in records:
        entities.update(r.graph.entities)
        relations.update(r.graph.relations)
    span = sum(len(a.split()) for a in all_answers) / len(all_answers) if all_answers else 0.0
    return DatasetStats(
        record_count=n,
        avg_triples_per_graph=sum(len(r.graph.edges) for r in records) / n,
        avg_answers_per_question=len(all_answers) / n,
        avg_answer_word_span=span,
        distinct_entities=len(entities),
        distinct_relations=len(relations),
        answer_coverage_fraction=sum(answer_in_graph(r) for r in records) / n,
        answers_per_question=dict(sorted(Counter(len(r.answers) for r in records).items())),
        triples_per_graph=dict(sorted(Counter(len(r.graph.edges) for r in records).items())),
    )


def dumps_line(obj: dict) -> str:
    return json.dumps(obj, ensure_ascii=False, separators=(", ", ": "))


def write_dataset(records: Iterable[DatasetRecord], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for record in records:
            fh.write(dumps_line(record.to_json()) + "\n")


def iter_json_lines(path):
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetFormatError(path, lineno, f"invalid JSON: {exc.msg}") from None
            if not isinstance(obj, dict):
                raise DatasetFormatError(path, lineno, "expected a JSON object")
            yield lineno, obj


def read_dataset(path) -> List[DatasetRecord]:
    records = []
    for lineno, obj in iter_json_lines(path):
        try:
            records.append(DatasetRecord.from_json(obj))
        except (ValueError, TypeError) as exc:
            raise DatasetFormatError(path, lineno, str(exc)) from None
    return records


def read_samples(path) -> List[SourceSample]:
    samples = []
    seen = set()
    for lineno, obj in iter_json_lines(path):
        try:
            sample = SourceSample(
                id=str(obj["id"]),
                question=obj["question"],
                sparql=obj["sparql"],
                provenance=obj.get("provenance", "other"),
                answers=obj.get("answers"),
            )
        except KeyError as exc:
            raise DatasetFormatError(path, lineno, f"missing field {exc.args[0]!r}") from None
        if not isinstance(sample.question, str) or not sample.question.strip():
            raise DatasetFormatError(path, lineno, "question must be a non-empty string")
        if not isinstance(sample.sparql, str):
            raise DatasetFormatError(path, lineno, "sparql must be a string")
        if sample.provenance not in PROVENANCES:
            raise DatasetFormatError(path, lineno, f"unknown provenance {sample.provenance!r}")
        if sample.answers is not None and (
                not isinstance(sample.answers, list) or not all(isinstance(a, str) for a in sample.answers)):
            raise DatasetFormatError(path, lineno, "answers must be a list of strings")
        if sample.id in seen:
            raise DatasetFormatError(path, lineno, f"duplicate sample id {sample.id!r}")
        seen.add(sample.id)
        samples.append(sample)
    return samples


def write_samples(samples: Iterable[SourceSample], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for s in samples:
            obj = {"id": s.id, "question": s.question, "sparql": s.sparql, "provenance": s.provenance}
            if s.answers is not None:
                obj["answers"] = list(s.answers)
            fh.write(dumps_line(obj) + "\n")
