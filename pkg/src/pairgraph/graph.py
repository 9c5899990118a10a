"""Grounding patterns into paired subgraphs and the local-index edge-list form."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import AbstractSet, Iterable, List, Optional, Sequence, Tuple

from .bgp import Binding, ContractError
from .sparql import Iri, TriplePattern
from .store import LabelTable, Triple


@dataclass(frozen=True)
class GroundedGraph:
    triples: Tuple[Triple, ...] = ()
    truncated: bool = False

    def __len__(self):
        return len(self.triples)

    def __iter__(self):
        return iter(self.triples)


@dataclass
class GraphRecord:
    entities: List[str] = field(default_factory=list)
    relations: List[str] = field(default_factory=list)
    edges: List[List[int]] = field(default_factory=list)
    entity_labels: List[str] = field(default_factory=list)
    relation_labels: List[str] = field(default_factory=list)

    def triples(self) -> List[Triple]:
        """Expand index edges back through the local lists."""
        return [Triple(self.entities[s], self.relations[p], self.entities[o])
                for s, p, o in self.edges]

    def validate(self):
        if len(set(self.entities)) != len(self.entities):
            raise ValueError("duplicate entity in local list")
        if len(set(self.relations)) != len(self.relations):
            raise ValueError("duplicate relation in local list")
        if len(self.entity_labels) != len(self.entities):
            raise ValueError("entity_labels length differs from entities")
        if len(self.relation_labels) != len(self.relations):
            raise ValueError("relation_labels length differs from relations")
        ne, nr = len(self.entities), len(self.relations)
        for edge in self.edges:
            if len(edge) != 3:
                raise ValueError(f"edge {edge!r} is not a triple")
            s, p, o = edge
            if not (0 <= s < ne and 0 <= o < ne and 0 <= p < nr):
                raise ValueError(f"edge {edge!r} index out of range")


def _ground(term, binding) -> str:
    if isinstance(term, Iri):
        return term.id
    try:
        return binding[term.name]
    except KeyError:
        raise ContractError(f"binding has no value for ?{term.name}") from None


def ground_patterns(patterns: Sequence[TriplePattern], bindings: Iterable[Binding],
                    max_triples: Optional[int] = None) -> GroundedGraph:
    """Union of every pattern grounded under every binding, in derivation order.

    With ``max_triples`` the graph stops growing at that size and is marked truncated.
    """
    seen = set()
    out: List[Triple] = []
    for binding in bindings:
        for pattern in patterns:
            triple = Triple(*(_ground(t, binding) for t in pattern))
            if triple in seen:
                continue
            if max_triples is not None and len(out) >= max_triples:
                return GroundedGraph(tuple(out), truncated=True)
            seen.add(triple)
            out.append(triple)
    return GroundedGraph(tuple(out))


def to_graph_record(graph: Iterable[Triple], labels: Optional[LabelTable] = None) -> GraphRecord:
    labels = labels if labels is not None else LabelTable()
    entity_index = {}
    relation_index = {}
    edges = []
    for s, p, o in graph:
        for node in (s, o):
            if node not in entity_index:
                entity_index[node] = len(entity_index)
        if p not in relation_index:
            relation_index[p] = len(relation_index)
        edges.append([entity_index[s], relation_index[p], entity_index[o]])
    entities = list(entity_index)
    relations = list(relation_index)
    return GraphRecord(
        entities=entities,
        relations=relations,
        edges=edges,
        entity_labels=[labels.label_of(e) for e in entities],
        relation_labels=[labels.label_of(r) for r in relations],
    )


def filter_by_kge_vocab(graph: GroundedGraph, vocab: AbstractSet[str],
                        strict_relations: bool = False) -> GroundedGraph:
    """Keep triples whose subject and object both have an embedding.

    ``strict_relations`` additionally requires the predicate to be in ``vocab``.
    """
    kept = tuple(
        t for t in graph.triples
        if t.subject in vocab and t.object in vocab
        and (not strict_relations or t.predicate in vocab)
    )
    return GroundedGraph(kept, graph.truncated)
