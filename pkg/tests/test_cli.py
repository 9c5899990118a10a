import json
import subprocess
import sys

import pytest

from helpers import EXAMPLE_QUERY, write_fixture_files
from pairgraph.cli import main
from pairgraph.pipeline import SourceSample, read_dataset, write_samples


@pytest.fixture
def workspace(tmp_path):
    triples, labels = write_fixture_files(tmp_path)
    samples = tmp_path / "samples.jsonl"
    write_samples([SourceSample("s1", "Which British person edited the sequel?", EXAMPLE_QUERY, "lcquad2")], samples)
    return tmp_path, triples, labels, samples


def run_build(ws, out_name="out.jsonl", *extra):
    d, triples, labels, samples = ws
    out = d / out_name
    code = main(["build", "--triples", str(triples), "--labels", str(labels), "--samples", str(samples),
                 "--output", str(out), *extra])
    return code, out


def test_build(workspace):
    code, out = run_build(workspace)
    assert code == 0
    records = read_dataset(out)
    assert len(records) == 1 and records[0].answers == ["Deborah Moggach"]
    report = json.loads((out.parent / "out.jsonl.drops.json").read_text())
    assert report["records"] == 1 and sum(report["drops"].values()) == 0


def test_build_is_byte_identical(workspace):
    _, a = run_build(workspace, "a.jsonl")
    _, b = run_build(workspace, "b.jsonl", "--jobs", "3")
    assert a.read_bytes() == b.read_bytes()


def test_build_with_vocab_and_flags(workspace):
    d = workspace[0]
    vocab = d / "vocab.txt"
    vocab.write_text("Q1\nQ830295\n")
    code, out = run_build(workspace, "v.jsonl", "--vocab", str(vocab), "--bindings", "first",
                          "--max-graph-size", "10", "--strict-ids")
    assert code == 0
    assert len(read_dataset(out)[0].graph.edges) == 1


def test_missing_file_exit_2(workspace, capsys):
    d, triples, labels, _ = workspace
    code = main(["build", "--triples", str(triples), "--samples", str(d / "missing.jsonl"),
                 "--output", str(d / "o.jsonl")])
    assert code == 2
    assert "missing.jsonl" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["build", "--triples", "t"],
    ["build", "--triples", "t", "--samples", "s", "--output", "o", "--jobs", "0"],
    ["build", "--triples", "t", "--samples", "s", "--output", "o", "--bindings", "some"],
    ["corpus", "--triples", "t", "--paragraphs", "p", "--output", "o", "--min-mentions", "-1"],
    ["frobnicate"],
    [],
])
def test_usage_errors_exit_1(argv, capsys):
    with pytest.raises(SystemExit) as info:
        main(argv)
    assert info.value.code == 1
    assert "usage" in capsys.readouterr().err


def test_drops_equal_output_is_usage_error(workspace):
    code, _ = run_build(workspace, "same.jsonl", "--drops", str(workspace[0] / "same.jsonl"))
    assert code == 1


def test_stats_and_figures(workspace, capsys):
    _, out = run_build(workspace)
    capsys.readouterr()
    figs = workspace[0] / "figs"
    report = workspace[0] / "stats.json"
    assert main(["stats", "--dataset", str(out), "--output", str(report), "--figures", str(figs)]) == 0
    lines = dict(line.split("\t") for line in capsys.readouterr().out.strip().splitlines())
    assert lines["avg_triples_per_graph"] == "3"
    assert lines["answer_coverage_fraction"] == "1"
    assert json.loads(report.read_text())["record_count"] == 1
    pngs = sorted(p.name for p in figs.iterdir())
    assert pngs == ["answers_per_question.png", "triples_per_graph.png"]
    first = (figs / "triples_per_graph.png").read_bytes()
    assert first[:8] == b"\x89PNG\r\n\x1a\n"
    main(["stats", "--dataset", str(out), "--figures", str(figs)])
    assert (figs / "triples_per_graph.png").read_bytes() == first


def test_stats_empty_dataset(tmp_path, capsys):
    empty = tmp_path / "empty.jsonl"
    empty.write_text("")
    assert main(["stats", "--dataset", str(empty)]) == 2
    assert "stats undefined on empty dataset" in capsys.readouterr().err


def test_verbalize(workspace):
    _, out = run_build(workspace)
    dest = workspace[0] / "ctx.jsonl"
    assert main(["verbalize", "--dataset", str(out), "--output", str(dest)]) == 0
    row = json.loads(dest.read_text())
    assert row["input"].startswith("question: Which British person edited the sequel?. context: ")
    assert row["input"].endswith("Deborah Moggach has a country of citizenship United Kingdom;")
    assert row["target"] == "Deborah Moggach"
    assert main(["verbalize", "--dataset", str(out), "--output", str(dest), "--mode", "question"]) == 0
    assert json.loads(dest.read_text())["input"] == "Question: Which British person edited the sequel?"


def test_corpus(workspace):
    d, triples, labels, _ = workspace
    paras = d / "paras.jsonl"
    paras.write_text("\n".join(json.dumps(p) for p in [
        {"doc_id": "a", "text": "short", "mentions": ["Q1", "Q2"]},
        {"doc_id": "b", "text": "linked", "mentions": ["Q1", "Q2", "Q145", "Q830295"]},
    ]) + "\n")
    out = d / "pairs.jsonl"
    assert main(["corpus", "--triples", str(triples), "--labels", str(labels), "--paragraphs", str(paras),
                 "--output", str(out)]) == 0
    rows = [json.loads(l) for l in out.read_text().splitlines()]
    assert [r["doc_id"] for r in rows] == ["b"] and len(rows[0]["edges"]) == 3
    drops = json.loads((d / "pairs.jsonl.drops.json").read_text())
    assert drops["drops"] == {"below_threshold": 1, "empty_graph": 0}


def test_eval(workspace, capsys):
    _, out = run_build(workspace)
    preds = workspace[0] / "preds.jsonl"
    preds.write_text(json.dumps({"id": "s1", "text": "Deborah Moggach"}) + "\n")
    report = workspace[0] / "report.json"
    capsys.readouterr()
    assert main(["eval", "--predictions", str(preds), "--gold", str(out), "--output", str(report)]) == 0
    machine = json.loads(report.read_text())
    assert machine == {"em": 1.0, "f1": 1.0, "bleu": 1.0, "n_scored": 1}
    assert '"em": 1.0' in capsys.readouterr().out


def test_eval_unknown_id_is_data_error(workspace):
    _, out = run_build(workspace)
    preds = workspace[0] / "preds.jsonl"
    preds.write_text(json.dumps({"id": "nope", "text": "x"}) + "\n")
    assert main(["eval", "--predictions", str(preds), "--gold", str(out)]) == 2


def test_module_entry_point(workspace):
    d, triples, labels, samples = workspace
    proc = subprocess.run([sys.executable, "-m", "pairgraph", "build", "--triples", str(triples),
                           "--samples", str(samples), "--output", str(d / "m.jsonl")],
                          capture_output=True, text=True)
    # no labels file: the only answer is unlabeled, so the sample is dropped
    assert proc.returncode == 0
    assert "no_labeled_answer  1" in proc.stderr
    assert (d / "m.jsonl").read_text() == ""
