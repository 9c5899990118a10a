"""Shared fixtures data and independent oracles for the test-suite."""

import itertools

from pairgraph.sparql import Iri, Variable
from pairgraph.store import LabelTable, Triple, TripleStore

EXAMPLE_QUERY = """SELECT DISTINCT ?x0 WHERE {
    ?x1 wdt:P155 wd:Q830295 .
    ?x1 wdt:P1040 ?x0 .
    ?x0 wdt:P27 wd:Q145 }"""

FIXTURE_TRIPLES = [
    Triple("Q1", "P155", "Q830295"),
    Triple("Q1", "P1040", "Q2"),
    Triple("Q2", "P27", "Q145"),
]

FIXTURE_LABELS = {
    "Q1": "The Best Exotic Marigold Hotel sequel",
    "Q830295": "The Best Exotic Marigold Hotel",
    "Q2": "Deborah Moggach",
    "Q145": "United Kingdom",
    "P155": "follows",
    "P1040": "film editor",
    "P27": "country of citizenship",
}


def fixture_store(labels=True):
    return TripleStore(FIXTURE_TRIPLES, LabelTable(FIXTURE_LABELS) if labels else None)


def write_fixture_files(directory, labels=True):
    triples = directory / "triples.tsv"
    triples.write_text("# fixture\n" + "".join("\t".join(t) + "\n" for t in FIXTURE_TRIPLES), encoding="utf-8")
    label_path = None
    if labels:
        label_path = directory / "labels.tsv"
        label_path.write_text("".join(f"{k}\t{v}\n" for k, v in FIXTURE_LABELS.items()), encoding="utf-8")
    return triples, label_path


def brute_force_match(triples, s=None, p=None, o=None):
    return {t for t in triples
            if (s is None or t[0] == s) and (p is None or t[1] == p) and (o is None or t[2] == o)}


def brute_force_bindings(patterns, triples):
    """Enumerate every assignment of the query variables over all ids in sight."""
    triples = set(triples)
    variables = []
    for pat in patterns:
        for term in pat:
            if isinstance(term, Variable) and term.name not in variables:
                variables.append(term.name)
    domain = sorted({x for t in triples for x in t}
                    | {term.id for pat in patterns for term in pat if isinstance(term, Iri)})
    solutions = set()
    for values in itertools.product(domain, repeat=len(variables)):
        env = dict(zip(variables, values))
        ok = all(
            tuple(env[t.name] if isinstance(t, Variable) else t.id for t in pat) in triples
            for pat in patterns
        )
        if ok:
            solutions.add(tuple(sorted(env.items())))
    return solutions
