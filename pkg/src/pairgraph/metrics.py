"""Exact match, token F1 and corpus BLEU for free-form generated answers."""

from __future__ import annotations

import json
import math
import re
import string
from collections import Counter
from dataclasses import dataclass
from typing import Dict, List, Sequence

from .pipeline import read_dataset

BLEU_EPSILON = 1e-9
MAX_ORDER = 4

# ", and " / " and " / ", " / ";" expressed as separators plus a whole-word
# "and", so case changes and inserted articles cannot create or hide a split
_CONNECTIVES = re.compile(r"\s*(?:[,;]\s*(?:\band\b)?|\band\b)\s*", re.IGNORECASE)
_ARTICLES = re.compile(r"\b(a|an|the)\b")
_PUNCT = set(string.punctuation)


class EvalError(ValueError):
    pass


@dataclass
class EvalReport:
    exact_match: float
    f1: float
    bleu: float
    n_scored: int
    n_missing: int = 0

    def as_line(self) -> dict:
        return {"em": self.exact_match, "f1": self.f1, "bleu": self.bleu, "n_scored": self.n_scored}

    def __str__(self):
        return (f"EM    {100 * self.exact_match:6.2f}\n"
                f"F1    {100 * self.f1:6.2f}\n"
                f"BLEU  {100 * self.bleu:6.2f}  (BLEU-4, zero n-gram precisions floored at {BLEU_EPSILON:g})\n"
                f"scored {self.n_scored}, missing predictions {self.n_missing}")


def normalize(text: str) -> str:
    """Lowercase, strip punctuation and articles, collapse whitespace."""
    text = text.lower()
    text = "".join(ch for ch in text if ch not in _PUNCT)
    text = _ARTICLES.sub(" ", text)
    return " ".join(text.split())


def split_answers(pred: str) -> List[str]:
    return [seg.strip() for seg in _CONNECTIVES.split(pred) if seg.strip()]


def _candidates(pred: str) -> List[str]:
    """Normalised segments plus the normalised unsplit prediction.

    The unsplit form lets golds that contain a connective ("Pride and
    Prejudice") still match. Segments that normalise to nothing are ignored.
    """
    out = []
    for seg in split_answers(pred):
        norm = normalize(seg)
        if norm and norm not in out:
            out.append(norm)
    whole = normalize(pred)
    if whole not in out:
        out.append(whole)
    return out


def _f1(pred_tokens: List[str], gold_tokens: List[str]) -> float:
    if not pred_tokens and not gold_tokens:
        return 1.0
    if not pred_tokens or not gold_tokens:
        return 0.0
    common = Counter(pred_tokens) & Counter(gold_tokens)
    same = sum(common.values())
    if same == 0:
        return 0.0
    precision = same / len(pred_tokens)
    recall = same / len(gold_tokens)
    return 2 * precision * recall / (precision + recall)


def exact_match(pred: str, golds: Sequence[str]) -> int:
    norm_golds = {normalize(g) for g in golds}
    return int(any(seg in norm_golds for seg in _candidates(pred)))


def token_f1(pred: str, golds: Sequence[str]) -> float:
    gold_tokens = [normalize(g).split() for g in golds]
    best = 0.0
    for seg in _candidates(pred):
        seg_tokens = seg.split()
        for gt in gold_tokens:
            best = max(best, _f1(seg_tokens, gt))
    return best


def _ngrams(tokens: List[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def corpus_bleu(preds: Sequence[str], golds_list: Sequence[Sequence[str]],
                max_order: int = MAX_ORDER, epsilon: float = BLEU_EPSILON) -> float:
    """Corpus BLEU with multi-reference clipping and brevity penalty.

    Orders for which the whole corpus has no candidate n-grams are left out of
    the geometric mean; an order with candidates but no matches is floored at
    ``epsilon / total`` (the unigram order is never floored).
    """
    if len(preds) != len(golds_list):
        raise EvalError(f"{len(preds)} predictions for {len(golds_list)} reference sets")
    if not preds:
        raise EvalError("corpus_bleu needs at least one sample")
    matches = [0] * max_order
    totals = [0] * max_order
    hyp_len = ref_len = 0
    for pred, golds in zip(preds, golds_list):
        hyp = normalize(pred).split()
        refs = [normalize(g).split() for g in golds]
        hyp_len += len(hyp)
        if refs:
            # closest reference length, shorter wins ties
            ref_len += min((abs(len(r) - len(hyp)), len(r)) for r in refs)[1]
        for n in range(1, max_order + 1):
            counts = _ngrams(hyp, n)
            max_ref: Counter = Counter()
            for r in refs:
                max_ref |= _ngrams(r, n)
            matches[n - 1] += sum(min(c, max_ref[g]) for g, c in counts.items())
            totals[n - 1] += sum(counts.values())
    if hyp_len == 0 or matches[0] == 0:
        return 0.0
    log_sum = 0.0
    used = 0
    for n in range(max_order):
        if totals[n] == 0:
            continue
        p = matches[n] / totals[n] if matches[n] else epsilon / totals[n]
        log_sum += math.log(p)
        used += 1
    bp = 1.0 if hyp_len > ref_len else math.exp(1 - ref_len / hyp_len)
    return bp * math.exp(log_sum / used)


def read_predictions(path) -> Dict[str, str]:
    preds: Dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                pid, text = str(obj["id"]), obj["text"]
            except (json.JSONDecodeError, KeyError, TypeError):
                raise EvalError(f"{path}:{lineno}: expected an object with 'id' and 'text'") from None
            if not isinstance(text, str):
                raise EvalError(f"{path}:{lineno}: 'text' must be a string")
            if pid in preds:
                raise EvalError(f"{path}:{lineno}: duplicate prediction id {pid!r}")
            preds[pid] = text
    return preds


def score(predictions: Dict[str, str], gold: Sequence) -> EvalReport:
    """Score id->text predictions against gold records (anything with ``id`` and ``answers``)."""
    gold_ids = {r.id for r in gold}
    for pid in predictions:
        if pid not in gold_ids:
            raise EvalError(f"prediction id {pid!r} not found in gold dataset")
    if not gold:
        raise EvalError("gold dataset is empty")
    em = f1 = 0.0
    texts, refs = [], []
    missing = 0
    for record in gold:
        text = predictions.get(record.id)
        if text is None:
            missing += 1
            texts.append("")
        else:
            em += exact_match(text, record.answers)
            f1 += token_f1(text, record.answers)
            texts.append(text)
        refs.append(record.answers)
    n = len(gold)
    return EvalReport(em / n, f1 / n, corpus_bleu(texts, refs), n, missing)


def evaluate(predictions_path, gold_dataset_path) -> EvalReport:
    return score(read_predictions(predictions_path), read_dataset(gold_dataset_path))
