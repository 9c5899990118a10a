import random
import threading

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import FIXTURE_TRIPLES, brute_force_match, fixture_store, write_fixture_files
from pairgraph.store import LoadError, Triple, TripleStore, label_of, load_store, match_triples, read_vocab


@pytest.fixture
def store(tmp_path):
    triples, labels = write_fixture_files(tmp_path)
    return load_store(triples, labels)


def test_load_counts_three_triples(store):
    assert len(store) == len(set(FIXTURE_TRIPLES)) == 3


def test_empty_file(tmp_path):
    path = tmp_path / "empty.tsv"
    path.write_text("")
    assert len(load_store(path)) == 0


def test_duplicate_lines_collapse(tmp_path):
    path = tmp_path / "dup.tsv"
    path.write_text("Q1\tP1\tQ2\nQ1\tP1\tQ2\n")
    assert len(load_store(path)) == 1


def test_comments_and_blank_lines_ignored(tmp_path):
    path = tmp_path / "c.tsv"
    path.write_text("# header\n\nQ1\tP1\tQ2\r\n   \n")
    assert load_store(path).triples == {Triple("Q1", "P1", "Q2")}


@pytest.mark.parametrize("line", ["Q1\tP1", "Q1\tP1\tQ2\tQ3", "Q1 P1 Q2", "Q1\t\tQ2", "Q 1\tP1\tQ2"])
def test_malformed_line_reports_line_number(tmp_path, line):
    path = tmp_path / "bad.tsv"
    path.write_text(f"Q1\tP1\tQ2\n{line}\n")
    with pytest.raises(LoadError) as info:
        load_store(path)
    assert info.value.lineno == 2
    assert ":2:" in str(info.value)


def test_missing_file_is_io_error(tmp_path):
    with pytest.raises(OSError):
        load_store(tmp_path / "nope.tsv")


def test_strict_ids(tmp_path):
    path = tmp_path / "t.tsv"
    path.write_text("Qa\tPz\tQa\n")
    assert len(load_store(path)) == 1
    with pytest.raises(LoadError):
        load_store(path, strict_ids=True)


def test_match_examples(store):
    assert match_triples(store, None, "P155", "Q830295") == {Triple("Q1", "P155", "Q830295")}
    assert match_triples(store) == set(FIXTURE_TRIPLES)
    assert match_triples(store, "Q99") == set()


def test_labels(store):
    assert label_of(store, "Q145") == "United Kingdom"
    assert label_of(store, "P27") == "country of citizenship"
    assert label_of(store, "Q999999") == "Q999999"
    assert store.labels.lookup("Q999999") == ("Q999999", False)
    assert store.labels.lookup("Q145") == ("United Kingdom", True)


def test_labels_last_wins(tmp_path):
    triples = tmp_path / "t.tsv"
    triples.write_text("")
    labels = tmp_path / "l.tsv"
    labels.write_text("Q1\tfirst\nQ2\tother\nQ1\tsecond label\n")
    assert load_store(triples, labels).label_of("Q1") == "second label"


def test_empty_label_rejected(tmp_path):
    triples = tmp_path / "t.tsv"
    triples.write_text("")
    labels = tmp_path / "l.tsv"
    labels.write_text("Q1\t \n")
    with pytest.raises(LoadError):
        load_store(triples, labels)


def test_read_vocab(tmp_path):
    path = tmp_path / "vocab.txt"
    path.write_text("Q1\n\nQ2\nQ1\n")
    assert read_vocab(path) == {"Q1", "Q2"}


ids = st.sampled_from(["Q1", "Q2", "Q3", "Q4", "P1", "P2"])
triple_sets = st.lists(st.tuples(ids, ids, ids), max_size=60)


@settings(max_examples=150, deadline=None)
@given(triple_sets, st.one_of(st.none(), ids), st.one_of(st.none(), ids), st.one_of(st.none(), ids))
def test_match_equals_linear_scan(triples, s, p, o):
    store = TripleStore(triples)
    expected = brute_force_match({Triple(*t) for t in triples}, s, p, o)
    assert store.match(s, p, o) == expected
    assert store.count(s, p, o) == len(expected)
    assert all(t in store for t in store.match(s, p, o))


def test_match_on_500_random_triples():
    rng = random.Random(7)
    ents = [f"Q{i}" for i in range(30)]
    rels = [f"P{i}" for i in range(6)]
    triples = [(rng.choice(ents), rng.choice(rels), rng.choice(ents)) for _ in range(500)]
    store = TripleStore(triples)
    full = set(store.triples)
    for _ in range(300):
        s = rng.choice(ents + [None])
        p = rng.choice(rels + [None])
        o = rng.choice(ents + [None])
        assert store.match(s, p, o) == brute_force_match(full, s, p, o)


@settings(max_examples=60, deadline=None)
@given(triple_sets, st.randoms())
def test_load_invariant_to_order_and_duplicates(tmp_path_factory, triples, rnd):
    d = tmp_path_factory.mktemp("perm")
    a, b = d / "a.tsv", d / "b.tsv"
    lines = ["\t".join(t) for t in triples]
    a.write_text("\n".join(lines) + "\n")
    shuffled = lines + lines[: len(lines) // 2]
    rnd.shuffle(shuffled)
    b.write_text("\n".join(shuffled) + "\n")
    sa, sb = load_store(a), load_store(b)
    assert sa.triples == sb.triples
    for s in ("Q1", "Q2", None):
        for p in ("P1", None):
            assert sa.match(s, p, None) == sb.match(s, p, None)


def test_concurrent_reads():
    store = fixture_store()
    errors = []

    def worker():
        for _ in range(500):
            if store.match(None, "P27", None) != {Triple("Q2", "P27", "Q145")}:
                errors.append("mismatch")

    threads = [threading.Thread(target=worker) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert not errors
