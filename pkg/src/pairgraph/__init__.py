"""Paired question/subgraph dataset construction from SPARQL basic graph patterns."""

from .bgp import Binding, RewrittenQuery, execute, project, rewrite_to_star
from .graph import GraphRecord, GroundedGraph, filter_by_kge_vocab, ground_patterns, to_graph_record
from .metrics import corpus_bleu, evaluate, exact_match, normalize, split_answers, token_f1
from .pipeline import DatasetRecord, DropReason, SourceSample, compute_stats, process_sample
from .sparql import ParsedQuery, ParseError, collect_variables, parse_query, render_query
from .store import LabelTable, Triple, TripleStore, label_of, load_store, match_triples

__version__ = "0.1.0"
