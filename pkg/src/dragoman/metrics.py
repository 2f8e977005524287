"""Corpus and sentence BLEU-4, chrF and chrF++ on detokenized text.

Compatibility with the standard WMT scorer is the correctness criterion here:
the mteval-13a tokenization rules, clipped n-gram precision with closest
reference length, exponential smoothing for sentence scores, and chrF's
per-order F averaging over summed corpus statistics all follow the reference
implementation's defaults. Scores are on the 0-100 scale; the stored BLEU
precisions are fractions in [0, 1].
"""

from __future__ import annotations

import math
import re
import string
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import EmptyCorpus

BLEU_ORDER = 4
CHRF_CHAR_ORDER = 6
CHRF_BETA = 2

_LOG_ZERO = -9999999999.0

_13A_PUNCT = re.compile(r"([\{-\~\[-\` -\&\(-\+\:-\@\/])")
_13A_PERIOD_BEFORE = re.compile(r"([^0-9])([\.,])")
_13A_PERIOD_AFTER = re.compile(r"([\.,])([^0-9])")
_13A_DASH = re.compile(r"([0-9])(-)")
_WS = re.compile(r"\s+")

_PUNCTS = set(string.punctuation)


@dataclass(frozen=True)
class EvalPair:
    """One hypothesis with at least one reference, all detokenized surface text."""

    hypothesis: str
    references: tuple

    def __post_init__(self):
        if not self.references:
            raise ValueError("EvalPair needs at least one reference")


@dataclass(frozen=True)
class BleuScore:
    score: float
    precisions: tuple            # four fractions, n = 1..4
    brevity_penalty: float
    hyp_len: int
    ref_len: int

    def __str__(self) -> str:
        p = "/".join(f"{x * 100:.1f}" for x in self.precisions)
        return (f"BLEU = {self.score:.2f} {p} "
                f"(BP = {self.brevity_penalty:.3f} hyp_len = {self.hyp_len} "
                f"ref_len = {self.ref_len})")


def tokenize_13a(text: str) -> list[str]:
    """mteval-13a compatible tokenization; returns the token list."""
    norm = text
    norm = norm.replace("<skipped>", "")
    norm = norm.replace("-\n", "")
    norm = norm.replace("\n", " ")
    norm = norm.replace("&quot;", '"')
    norm = norm.replace("&amp;", "&")
    norm = norm.replace("&lt;", "<")
    norm = norm.replace("&gt;", ">")

    norm = f" {norm} "
    norm = _13A_PUNCT.sub(r" \1 ", norm)
    norm = _13A_PERIOD_BEFORE.sub(r"\1 \2 ", norm)
    norm = _13A_PERIOD_AFTER.sub(r" \1 \2", norm)
    norm = _13A_DASH.sub(r"\1 \2 ", norm)
    return _WS.sub(" ", norm).strip().split()


def _token_ngrams(tokens: Sequence[str]) -> Counter:
    grams: Counter = Counter()
    for n in range(1, BLEU_ORDER + 1):
        for i in range(len(tokens) - n + 1):
            grams[tuple(tokens[i:i + n])] += 1
    return grams


def _ref_stats(hyp_tokens: Sequence[str], ref_token_lists: Sequence[Sequence[str]]):
    """Max reference n-gram counts plus the closest reference length (ties -> shorter)."""
    grams: Counter = Counter()
    closest_diff = None
    closest_len = None
    for ref_tokens in ref_token_lists:
        diff = abs(len(hyp_tokens) - len(ref_tokens))
        if closest_diff is None or diff < closest_diff or \
                (diff == closest_diff and len(ref_tokens) < closest_len):
            closest_diff = diff
            closest_len = len(ref_tokens)
        for gram, count in _token_ngrams(ref_tokens).items():
            if count > grams[gram]:
                grams[gram] = count
    return grams, closest_len


def _accumulate(pair: EvalPair, correct: list, total: list) -> tuple[int, int]:
    hyp_tokens = tokenize_13a(pair.hypothesis)
    ref_token_lists = [tokenize_13a(r) for r in pair.references]
    ref_grams, closest_len = _ref_stats(hyp_tokens, ref_token_lists)
    for gram, count in _token_ngrams(hyp_tokens).items():
        n = len(gram)
        correct[n - 1] += min(count, ref_grams.get(gram, 0))
        total[n - 1] += count
    return len(hyp_tokens), closest_len


def _compute_bleu(correct: list, total: list, hyp_len: int, ref_len: int,
                  smoothing: str, effective_order: bool) -> BleuScore:
    precisions = [0.0] * BLEU_ORDER
    smooth_scale = 1.0
    eff = BLEU_ORDER
    for n in range(1, BLEU_ORDER + 1):
        if total[n - 1] == 0:
            break
        if effective_order:
            eff = n
        if correct[n - 1] == 0:
            if smoothing == "exp":
                smooth_scale *= 2.0
                precisions[n - 1] = 1.0 / (smooth_scale * total[n - 1])
        else:
            precisions[n - 1] = correct[n - 1] / total[n - 1]

    if hyp_len < ref_len:
        bp = math.exp(1.0 - ref_len / hyp_len) if hyp_len > 0 else 0.0
    else:
        bp = 1.0

    log_sum = sum(math.log(p) if p > 0.0 else _LOG_ZERO for p in precisions[:eff])
    score = bp * math.exp(log_sum / eff) * 100.0
    return BleuScore(score=score, precisions=tuple(precisions), brevity_penalty=bp,
                     hyp_len=hyp_len, ref_len=ref_len)


def corpus_bleu(pairs: Iterable[EvalPair], smoothing: str = "none") -> BleuScore:
    """Corpus BLEU-4 over clipped n-gram counts aggregated across all pairs.

    Unsmoothed by default: a zero precision at any order annihilates the
    geometric mean, as in the reference scorer with smoothing disabled.
    """
    if smoothing not in ("none", "exp"):
        raise ValueError(f"unknown smoothing '{smoothing}'")
    correct = [0] * BLEU_ORDER
    total = [0] * BLEU_ORDER
    hyp_len = 0
    ref_len = 0
    n_pairs = 0
    for pair in pairs:
        h, r = _accumulate(pair, correct, total)
        hyp_len += h
        ref_len += r
        n_pairs += 1
    if n_pairs == 0:
        raise EmptyCorpus("no evaluation pairs")
    return _compute_bleu(correct, total, hyp_len, ref_len, smoothing, effective_order=False)


def sentence_bleu(pair: EvalPair, smoothing: str = "exp") -> float:
    """BLEU-4 on one sentence with exponential smoothing and effective n-gram order.

    Each successive zero n-gram match halves the invented precision mass
    (1 / (2^j * total)), matching the reference scorer's sentence default.
    An empty hypothesis scores 0.
    """
    correct = [0] * BLEU_ORDER
    total = [0] * BLEU_ORDER
    hyp_len, ref_len = _accumulate(pair, correct, total)
    return _compute_bleu(correct, total, hyp_len, ref_len, smoothing,
                         effective_order=True).score


def _char_ngrams(text: str, n: int) -> Counter:
    squeezed = "".join(text.split())
    return Counter(squeezed[i:i + n] for i in range(len(squeezed) - n + 1))


def _split_punctuation(text: str) -> list[str]:
    """Peel one leading or trailing ASCII punctuation mark off each word."""
    tokens = []
    for w in text.split():
        if len(w) == 1:
            tokens.append(w)
        elif w[-1] in _PUNCTS:
            tokens.extend([w[:-1], w[-1]])
        elif w[0] in _PUNCTS:
            tokens.extend([w[0], w[1:]])
        else:
            tokens.append(w)
    return tokens


def _word_ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def _segment_stats(hypothesis: str, reference: str, char_order: int,
                   word_order: int) -> list[int]:
    """[hyp_count, ref_count, match_count] per order; char orders then word orders."""
    stats = []
    for n in range(1, char_order + 1):
        hyp_grams = _char_ngrams(hypothesis, n)
        ref_grams = _char_ngrams(reference, n)
        stats += [sum(hyp_grams.values()), sum(ref_grams.values()),
                  sum((hyp_grams & ref_grams).values())]
    if word_order > 0:
        hyp_tokens = _split_punctuation(hypothesis)
        ref_tokens = _split_punctuation(reference)
        for n in range(1, word_order + 1):
            hyp_grams = _word_ngrams(hyp_tokens, n)
            ref_grams = _word_ngrams(ref_tokens, n)
            stats += [sum(hyp_grams.values()), sum(ref_grams.values()),
                      sum((hyp_grams & ref_grams).values())]
    return stats


def _f_score(stats: Sequence[int], beta: float) -> float:
    """Per-order F_beta averaged over orders with any n-grams on both sides."""
    factor = beta * beta
    total = 0.0
    effective = 0
    for i in range(len(stats) // 3):
        n_hyp, n_ref, n_match = stats[3 * i:3 * i + 3]
        if n_hyp > 0 and n_ref > 0:
            effective += 1
            prec = n_match / n_hyp
            rec = n_match / n_ref
            denom = factor * prec + rec
            if denom > 0:
                total += (1 + factor) * prec * rec / denom
    if effective == 0:
        return 0.0
    return 100.0 * total / effective


def chrf(pairs: Iterable[EvalPair], char_order: int = CHRF_CHAR_ORDER,
         word_order: int = 0, beta: float = CHRF_BETA) -> float:
    """chrF (word_order=0) or chrF++ (word_order=2) over summed corpus statistics.

    Character n-grams exclude whitespace; word n-grams separate one leading or
    trailing punctuation mark per token. With several references the best one
    per segment (by segment F) contributes to the corpus statistics.
    """
    n_orders = char_order + word_order
    corpus_stats = [0] * (3 * n_orders)
    n_pairs = 0
    for pair in pairs:
        best = None
        best_f = -1.0
        for reference in pair.references:
            stats = _segment_stats(pair.hypothesis, reference, char_order, word_order)
            f = _f_score(stats, beta)
            if f > best_f:
                best_f = f
                best = stats
        for i, v in enumerate(best):
            corpus_stats[i] += v
        n_pairs += 1
    if n_pairs == 0:
        raise EmptyCorpus("no evaluation pairs")
    return _f_score(corpus_stats, beta)
