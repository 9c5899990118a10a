"""Paragraph/subgraph pairs for distant pretraining.

Each paragraph's hyperlinked entities are connected by every store edge
running between two of them, in either direction.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import AbstractSet, Iterable, List, Optional, Sequence, Tuple

from .graph import GraphRecord, GroundedGraph, to_graph_record
from .pipeline import DatasetFormatError, iter_json_lines, dumps_line
from .store import TripleStore

DROP_BELOW_THRESHOLD = "below_threshold"
DROP_EMPTY_GRAPH = "empty_graph"
DROP_NOT_ALLOWED = "not_allowed"


@dataclass
class ParagraphRecord:
    doc_id: str
    text: str
    mentions: List[str] = field(default_factory=list)

    def __post_init__(self):
        seen = set()
        self.mentions = [m for m in self.mentions if not (m in seen or seen.add(m))]


@dataclass
class PretrainPair:
    doc_id: str
    text: str
    graph: GraphRecord

    def to_json(self) -> dict:
        g = self.graph
        return {
            "doc_id": self.doc_id,
            "text": self.text,
            "entities": g.entities,
            "relations": g.relations,
            "edges": g.edges,
            "entity_labels": g.entity_labels,
            "relation_labels": g.relation_labels,
        }


def augment_links(mentions: Sequence[str], store: TripleStore) -> GroundedGraph:
    """All store triples (a, p, b) for ordered pairs of distinct mentions."""
    unique = list(dict.fromkeys(mentions))
    out = []
    for a in unique:
        for b in unique:
            if a == b:
                continue
            out.extend(sorted(store.match(a, None, b), key=lambda t: t.predicate))
    return GroundedGraph(tuple(out))


def build_pairs(paragraphs: Iterable[ParagraphRecord], store: TripleStore, min_mentions: int = 4,
                allowed_docs: Optional[AbstractSet[str]] = None) -> Tuple[List[PretrainPair], Counter]:
    if min_mentions < 1:
        raise ValueError("min_mentions must be >= 1")
    pairs = []
    drops: Counter = Counter({DROP_BELOW_THRESHOLD: 0, DROP_EMPTY_GRAPH: 0})
    if allowed_docs is not None:
        drops[DROP_NOT_ALLOWED] = 0
    for para in paragraphs:
        if allowed_docs is not None and para.doc_id not in allowed_docs:
            drops[DROP_NOT_ALLOWED] += 1
            continue
        if len(para.mentions) < min_mentions:
            drops[DROP_BELOW_THRESHOLD] += 1
            continue
        graph = augment_links(para.mentions, store)
        if not graph.triples:
            drops[DROP_EMPTY_GRAPH] += 1
            continue
        pairs.append(PretrainPair(para.doc_id, para.text, to_graph_record(graph.triples, store.labels)))
    return pairs, drops


def read_paragraphs(path) -> List[ParagraphRecord]:
    out = []
    for lineno, obj in iter_json_lines(path):
        try:
            doc_id, text, mentions = obj["doc_id"], obj["text"], obj["mentions"]
        except KeyError as exc:
            raise DatasetFormatError(path, lineno, f"missing field {exc.args[0]!r}") from None
        if not isinstance(mentions, list) or not all(isinstance(m, str) and m for m in mentions):
            raise DatasetFormatError(path, lineno, "mentions must be a list of ids")
        out.append(ParagraphRecord(str(doc_id), str(text), list(mentions)))
    return out


def write_pairs(pairs: Iterable[PretrainPair], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for pair in pairs:
            fh.write(dumps_line(pair.to_json()) + "\n")


def read_allow_list(path) -> frozenset:
    with open(path, encoding="utf-8") as fh:
        return frozenset(line.strip() for line in fh if line.strip() and not line.startswith("#"))
