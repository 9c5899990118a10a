"""Query rewriting and conjunctive evaluation of basic graph patterns."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

from .sparql import STAR, Ask, Iri, ParsedQuery, Select, TriplePattern, Variable, collect_variables
from .store import TripleStore


class AskQueryError(ValueError):
    """Raised when a yes/no (ASK) query reaches the SELECT-only path."""

    reason = "ask_query"


class ContractError(ValueError):
    """A caller broke an operation precondition."""


@dataclass(frozen=True)
class RewrittenQuery:
    query: ParsedQuery
    original_projection: Tuple[str, ...]

    @property
    def variables(self) -> List[str]:
        return collect_variables(self.query)


class Binding(Mapping[str, str]):
    """Immutable variable -> id assignment; iterates in sorted variable order."""

    __slots__ = ("_items", "_dict")

    def __init__(self, values: Optional[Mapping[str, str]] = None):
        items = tuple(sorted((values or {}).items()))
        self._items = items
        self._dict = dict(items)

    def __getitem__(self, name: str) -> str:
        return self._dict[name]

    def __iter__(self) -> Iterator[str]:
        return (k for k, _ in self._items)

    def __len__(self) -> int:
        return len(self._items)

    def __hash__(self):
        return hash(self._items)

    def __eq__(self, other):
        if isinstance(other, Binding):
            return self._items == other._items
        return super().__eq__(other)

    def __repr__(self):
        inner = ", ".join(f"{k}->{v}" for k, v in self._items)
        return f"Binding({inner})"

    def sort_key(self) -> Tuple[str, ...]:
        return tuple(v for _, v in self._items)


BindingSet = List[Binding]


def rewrite_to_star(query: ParsedQuery) -> RewrittenQuery:
    """Turn ``SELECT ?v`` into ``SELECT *`` while remembering the projected names.

    Intermediate variables are needed to ground the full reasoning path, but the
    answers still come from the original projection.
    """
    if isinstance(query.form, Ask):
        raise AskQueryError("ASK queries have no answer variables to rewrite")
    form = query.form
    if form.is_star:
        return RewrittenQuery(query, tuple(collect_variables(query)))
    return RewrittenQuery(replace(query, form=Select(form.distinct, STAR)), tuple(form.projection))


def _resolve(term, binding: Dict[str, str]) -> Optional[str]:
    if isinstance(term, Iri):
        return term.id
    return binding.get(term.name)


def _unify(pattern: TriplePattern, triple, binding: Dict[str, str]) -> Optional[Dict[str, str]]:
    extended = binding
    for term, value in zip(pattern, triple):
        if isinstance(term, Variable):
            bound = extended.get(term.name)
            if bound is None:
                if extended is binding:
                    extended = dict(binding)
                extended[term.name] = value
            elif bound != value:
                # repeated variable inside one pattern, e.g. ?x P ?x
                return None
    return extended


def evaluate_patterns(patterns: Sequence[TriplePattern], store: TripleStore) -> BindingSet:
    """Every total assignment satisfying all patterns, deduplicated and canonically sorted.

    Patterns are joined greedily: at each step the remaining pattern with the
    fewest index matches under the current partial binding is extended next.
    """
    results = set()

    def extend(remaining: List[TriplePattern], binding: Dict[str, str]):
        if not remaining:
            results.add(Binding(binding))
            return
        best = None
        best_count = -1
        for idx, pattern in enumerate(remaining):
            key = tuple(_resolve(t, binding) for t in pattern)
            n = store.count(*key)
            if best is None or n < best_count:
                best, best_count, best_key = idx, n, key
            if n == 0:
                return
        pattern = remaining[best]
        rest = remaining[:best] + remaining[best + 1:]
        for triple in store.match(*best_key):
            extended = _unify(pattern, triple, binding)
            if extended is not None:
                extend(rest, extended)

    extend(list(patterns), {})
    return sorted(results, key=Binding.sort_key)


def execute(query: RewrittenQuery, store: TripleStore) -> BindingSet:
    return evaluate_patterns(query.query.patterns, store)


def project(bindings: Sequence[Binding], variables: Sequence[str]) -> List[Tuple[str, ...]]:
    """Project onto ``variables`` with DISTINCT semantics, keeping binding order."""
    seen = set()
    out = []
    for binding in bindings:
        try:
            row = tuple(binding[v] for v in variables)
        except KeyError as exc:
            raise ContractError(f"unknown variable ?{exc.args[0]} in projection") from None
        if row not in seen:
            seen.add(row)
            out.append(row)
    return out
