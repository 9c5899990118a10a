"""Immutable in-memory triple store loaded from tab-separated dump files."""

from __future__ import annotations

import re
from collections import defaultdict
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, NamedTuple, Optional, Tuple

WIKIDATA_ID = re.compile(r"[QP]\d+")
_WHITESPACE = re.compile(r"\s")


class LoadError(ValueError):
    """A dump file line could not be parsed."""

    def __init__(self, path, lineno: int, message: str):
        self.path = str(path)
        self.lineno = lineno
        super().__init__(f"{path}:{lineno}: {message}")


class Triple(NamedTuple):
    subject: str
    predicate: str
    object: str


def is_node_id(token: str) -> bool:
    return bool(token) and not _WHITESPACE.search(token)


class LabelTable:
    """Id to label mapping. Missing ids resolve to the id itself."""

    def __init__(self, labels: Optional[Dict[str, str]] = None):
        self._labels = dict(labels or {})

    def lookup(self, node_id: str) -> Tuple[str, bool]:
        """Return ``(label, found)``; ``found`` is False when the id fell back to itself."""
        label = self._labels.get(node_id)
        if label is None:
            return node_id, False
        return label, True

    def label_of(self, node_id: str) -> str:
        return self._labels.get(node_id, node_id)

    def has_label(self, node_id: str) -> bool:
        return node_id in self._labels

    def __contains__(self, node_id: str) -> bool:
        return node_id in self._labels

    def __len__(self) -> int:
        return len(self._labels)

    def items(self):
        return self._labels.items()


class TripleStore:
    """Deduplicated triple set with subject/predicate/object indexes.

    Built once, never mutated afterwards, so concurrent readers need no locking.
    """

    def __init__(self, triples: Iterable[Triple] = (), labels: Optional[LabelTable] = None):
        self.triples: FrozenSet[Triple] = frozenset(Triple(*t) for t in triples)
        self.labels = labels if labels is not None else LabelTable()

        by_s = defaultdict(set)
        by_p = defaultdict(set)
        by_o = defaultdict(set)
        by_sp = defaultdict(set)
        by_po = defaultdict(set)
        by_so = defaultdict(set)
        for t in self.triples:
            by_s[t.subject].add(t)
            by_p[t.predicate].add(t)
            by_o[t.object].add(t)
            by_sp[t.subject, t.predicate].add(t)
            by_po[t.predicate, t.object].add(t)
            by_so[t.subject, t.object].add(t)
        freeze = lambda d: {k: frozenset(v) for k, v in d.items()}
        self._by_s = freeze(by_s)
        self._by_p = freeze(by_p)
        self._by_o = freeze(by_o)
        self._by_sp = freeze(by_sp)
        self._by_po = freeze(by_po)
        self._by_so = freeze(by_so)

    def __len__(self) -> int:
        return len(self.triples)

    def __contains__(self, triple) -> bool:
        return Triple(*triple) in self.triples

    def _bucket(self, s, p, o) -> FrozenSet[Triple]:
        if s is not None and p is not None and o is not None:
            t = Triple(s, p, o)
            return frozenset((t,)) if t in self.triples else frozenset()
        if s is not None and p is not None:
            return self._by_sp.get((s, p), frozenset())
        if p is not None and o is not None:
            return self._by_po.get((p, o), frozenset())
        if s is not None and o is not None:
            return self._by_so.get((s, o), frozenset())
        if s is not None:
            return self._by_s.get(s, frozenset())
        if p is not None:
            return self._by_p.get(p, frozenset())
        if o is not None:
            return self._by_o.get(o, frozenset())
        return self.triples

    def match(self, s: Optional[str] = None, p: Optional[str] = None,
              o: Optional[str] = None) -> FrozenSet[Triple]:
        """All stored triples agreeing with every bound (non-None) position."""
        return self._bucket(s, p, o)

    def count(self, s: Optional[str] = None, p: Optional[str] = None,
              o: Optional[str] = None) -> int:
        return len(self._bucket(s, p, o))

    def entities(self) -> FrozenSet[str]:
        return frozenset(self._by_s) | frozenset(self._by_o)

    def relations(self) -> FrozenSet[str]:
        return frozenset(self._by_p)

    def label_of(self, node_id: str) -> str:
        return self.labels.label_of(node_id)


def _content_lines(path):
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if not line.strip() or line.startswith("#"):
                continue
            yield lineno, line


def read_triples(path, strict_ids: bool = False):
    for lineno, line in _content_lines(path):
        parts = line.split("\t")
        if len(parts) != 3:
            raise LoadError(path, lineno, f"expected 3 tab-separated fields, got {len(parts)}")
        for token in parts:
            if not is_node_id(token):
                raise LoadError(path, lineno, f"invalid identifier {token!r}")
            if strict_ids and not WIKIDATA_ID.fullmatch(token):
                raise LoadError(path, lineno, f"identifier {token!r} is not a Q/P id")
        yield Triple(*parts)


def read_labels(path, strict_ids: bool = False) -> LabelTable:
    labels = {}
    for lineno, line in _content_lines(path):
        node_id, sep, label = line.partition("\t")
        if not sep:
            raise LoadError(path, lineno, "expected id<TAB>label")
        if not is_node_id(node_id):
            raise LoadError(path, lineno, f"invalid identifier {node_id!r}")
        if strict_ids and not WIKIDATA_ID.fullmatch(node_id):
            raise LoadError(path, lineno, f"identifier {node_id!r} is not a Q/P id")
        if not label.strip():
            raise LoadError(path, lineno, f"empty label for {node_id}")
        # last occurrence wins so patch files can be appended
        labels[node_id] = label
    return LabelTable(labels)


def load_store(triples_path, labels_path=None, strict_ids: bool = False) -> TripleStore:
    triples_path = Path(triples_path)
    triples = list(read_triples(triples_path, strict_ids=strict_ids))
    labels = read_labels(labels_path, strict_ids=strict_ids) if labels_path else LabelTable()
    return TripleStore(triples, labels)


def match_triples(store: TripleStore, s=None, p=None, o=None) -> FrozenSet[Triple]:
    return store.match(s, p, o)


def label_of(store: TripleStore, node_id: str) -> str:
    return store.label_of(node_id)


def read_vocab(path) -> FrozenSet[str]:
    """One id per line; blank and ``#`` lines ignored."""
    vocab = set()
    for lineno, line in _content_lines(path):
        token = line.strip()
        if not is_node_id(token):
            raise LoadError(path, lineno, f"invalid identifier {token!r}")
        vocab.add(token)
    return frozenset(vocab)
