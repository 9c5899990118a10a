from helpers import FIXTURE_TRIPLES, fixture_store
from pairgraph.graph import to_graph_record
from pairgraph.store import LabelTable, Triple
from pairgraph.verbalize import (choose_target, format_context_input, format_question_only, verbalize_graph,
                                 verbalize_record, verbalize_triple)

SAKAMOTO = LabelTable({"Q345494": "Sakamoto Ryuichi", "P106": "occupation", "Q486748": "pianist"})


def test_triple_template():
    assert verbalize_triple(Triple("Q345494", "P106", "Q486748"), SAKAMOTO) == \
        "Sakamoto Ryuichi has a occupation pianist;"
    assert verbalize_triple(Triple("Q345494", "P106", "Q999999"), SAKAMOTO) == \
        "Sakamoto Ryuichi has a occupation Q999999;"
    assert verbalize_triple(Triple("Q2", "P27", "Q145"), fixture_store().labels) == \
        "Deborah Moggach has a country of citizenship United Kingdom;"


def test_graph_join():
    labels = fixture_store().labels
    assert verbalize_graph([], labels) == ""
    assert verbalize_graph(FIXTURE_TRIPLES[:1], labels) == verbalize_triple(FIXTURE_TRIPLES[0], labels)
    text = verbalize_graph(FIXTURE_TRIPLES, labels)
    assert text == ("The Best Exotic Marigold Hotel sequel has a follows The Best Exotic Marigold Hotel; "
                    "The Best Exotic Marigold Hotel sequel has a film editor Deborah Moggach; "
                    "Deborah Moggach has a country of citizenship United Kingdom;")


def test_record_verbalization_matches_graph_verbalization():
    labels = fixture_store().labels
    assert verbalize_record(to_graph_record(FIXTURE_TRIPLES, labels)) == verbalize_graph(FIXTURE_TRIPLES, labels)


def test_clause_count_with_semicolon_labels():
    labels = LabelTable({"Qa": "a;b", "P1": "rel"})
    triples = [Triple("Qa", "P1", "Qa"), Triple("Qa", "P1", "Qb")]
    text = verbalize_graph(triples, labels)
    clauses = [verbalize_triple(t, labels) for t in triples]
    assert text == " ".join(clauses)
    assert all(c.endswith(";") for c in clauses)


def test_context_input():
    assert format_context_input("Who wrote X?", "A has a author B;") == \
        "question: Who wrote X?. context: A has a author B;"
    assert format_context_input("Q", "") == "question: Q. context: "


def test_question_only():
    assert format_question_only("Who wrote X?") == "Question: Who wrote X?"
    assert format_question_only("") == "Question: "
    assert format_question_only("  spaced") == "Question:   spaced"


def test_targets():
    assert choose_target(["a", "b"]) == "a"
    assert choose_target(["a", "b"], "joined") == "a, b"
