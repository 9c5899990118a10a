"""Text renderings of graphs and model input templates for the text-only baselines."""

from __future__ import annotations

from typing import Iterable, List, Optional

from .graph import GraphRecord
from .store import LabelTable, Triple


def verbalize_triple(triple: Triple, labels: Optional[LabelTable] = None) -> str:
    labels = labels if labels is not None else LabelTable()
    s, p, o = (labels.label_of(x) for x in triple)
    return f"{s} has a {p} {o};"


def verbalize_graph(graph: Iterable[Triple], labels: Optional[LabelTable] = None) -> str:
    return " ".join(verbalize_triple(t, labels) for t in graph)


def verbalize_record(graph: GraphRecord) -> str:
    """Same as :func:`verbalize_graph`, using the labels stored on the record."""
    clauses = []
    for s, p, o in graph.edges:
        clauses.append(f"{graph.entity_labels[s]} has a {graph.relation_labels[p]} {graph.entity_labels[o]};")
    return " ".join(clauses)


def format_context_input(question: str, verbalized: str) -> str:
    return f"question: {question}. context: {verbalized}"


def format_question_only(question: str) -> str:
    return f"Question: {question}"


def choose_target(answers: List[str], policy: str = "first") -> str:
    if policy == "first":
        return answers[0]
    if policy == "joined":
        return ", ".join(answers)
    raise ValueError(f"unknown target policy {policy!r}")
