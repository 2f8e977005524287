"""Character n-gram language model with bits-per-character scoring.

Models are trained per language (or per cross-validation fold) and score text
as total log2 probability; BPC = -log2 P(text) / len(text). Two smoothers are
available: additive (add-k) over the top-order counts, and Witten-Bell, which
interpolates each order with the next shorter context down to a uniform floor
over the observed alphabet plus an unknown symbol. Begin-of-text contexts are
padded with a reserved boundary symbol; there is no end-of-text symbol, so
the BPC denominator is exactly the visible character count.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .corpus import Corpus
from .errors import EmptyText, EmptyTrainingSet

# Reserved symbols; occurrences in input text are folded into UNK so they can
# never collide with the model's own bookkeeping.
BOUNDARY = ""
UNK = ""

_SMOOTHING_TAGS = {"add_k": 0, "witten_bell": 1}
_SMOOTHING_NAMES = {v: k for k, v in _SMOOTHING_TAGS.items()}


@dataclass(frozen=True)
class CharNGramLM:
    """Trained model. `levels[m]` maps a length-m context to follower counts."""

    order: int
    smoothing: str
    add_k: float
    vocab: frozenset
    levels: tuple
    totals: tuple

    @property
    def vocab_size_with_unk(self) -> int:
        return len(self.vocab) + 1

    @property
    def context_counts(self) -> dict:
        """Total count per top-order context."""
        return self.totals[self.order - 1]

    @property
    def ngram_counts(self) -> dict:
        """Full-order n-gram counts keyed by context+char."""
        top = self.levels[self.order - 1]
        return {ctx + ch: n for ctx, followers in top.items() for ch, n in followers.items()}


def _clean_char(ch: str) -> str:
    return UNK if ch in (BOUNDARY, UNK) else ch


def train_lm(texts: Iterable[str], order: int = 5, smoothing: str = "witten_bell",
             add_k: float = 1.0) -> CharNGramLM:
    """Count character n-grams of every length up to `order` over the texts."""
    if order < 1:
        raise ValueError("order must be >= 1")
    if smoothing not in _SMOOTHING_TAGS:
        raise ValueError(f"unknown smoothing '{smoothing}'")
    if smoothing == "add_k" and add_k <= 0:
        raise ValueError("add_k must be positive")

    levels: list[dict] = [{} for _ in range(order)]
    vocab: set[str] = set()
    trained = False
    pad = BOUNDARY * (order - 1)
    for text in texts:
        if not text:
            continue
        trained = True
        chars = [_clean_char(c) for c in text]
        vocab.update(chars)
        stream = pad + "".join(chars)
        for i in range(order - 1, len(stream)):
            ch = stream[i]
            for m in range(order):
                ctx = stream[i - m:i]
                followers = levels[m].get(ctx)
                if followers is None:
                    followers = {}
                    levels[m][ctx] = followers
                followers[ch] = followers.get(ch, 0) + 1
    if not trained:
        raise EmptyTrainingSet("no non-empty training text")

    totals = tuple({ctx: sum(f.values()) for ctx, f in level.items()} for level in levels)
    return CharNGramLM(order=order, smoothing=smoothing, add_k=add_k,
                       vocab=frozenset(vocab), levels=tuple(levels), totals=totals)


def probability(model: CharNGramLM, context: str, char: str) -> float:
    """P(char | context) under the model's smoothing; sums to 1 over vocab+UNK."""
    ch = char if char in model.vocab else UNK
    ctx = context[-(model.order - 1):] if model.order > 1 else ""
    if model.smoothing == "add_k":
        k = model.add_k
        v = model.vocab_size_with_unk
        followers = model.levels[model.order - 1].get(ctx)
        count = followers.get(ch, 0) if followers else 0
        total = model.totals[model.order - 1].get(ctx, 0)
        return (count + k) / (total + k * v)

    # Witten-Bell: interpolate each order with the shorter context, ending at
    # a uniform distribution over vocab+UNK.
    p = 1.0 / model.vocab_size_with_unk
    for m in range(model.order):
        sub_ctx = ctx[len(ctx) - m:] if m else ""
        followers = model.levels[m].get(sub_ctx)
        if not followers:
            continue
        total = model.totals[m][sub_ctx]
        distinct = len(followers)
        p = (followers.get(ch, 0) + distinct * p) / (total + distinct)
    return p


def stepwise_log_probs(model: CharNGramLM, text: str) -> Iterator[float]:
    """log2 P(char | context) for each character, in order."""
    if not text:
        raise EmptyText("cannot score empty text")
    context = BOUNDARY * (model.order - 1)
    for raw in text:
        ch = _clean_char(raw)
        yield math.log2(probability(model, context, ch))
        if model.order > 1:
            context = (context + ch)[-(model.order - 1):]


def log_prob(model: CharNGramLM, text: str) -> float:
    """Total log2 probability of the text; always <= 0."""
    total = 0.0
    for lp in stepwise_log_probs(model, text):
        total += lp
    return total


def bits_per_char(model: CharNGramLM, text: str) -> float:
    """-log2 P(text) / character count."""
    if not text:
        raise EmptyText("cannot score empty text")
    return -log_prob(model, text) / len(text)


def bpc_sum_annotate(corpus: Corpus, src_model: CharNGramLM, tgt_model: CharNGramLM,
                     workers: int = 1) -> tuple[Corpus, list]:
    """Attach bpc_src, bpc_tgt and bpc_sum scores to every scoreable record.

    Records with an empty side cannot be scored: they are excluded from the
    returned corpus and listed as (id, cause) in the second return value.
    """
    flagged = []
    scoreable = []
    for p in corpus:
        if not p.source:
            flagged.append((p.id, "empty_source"))
        elif not p.target:
            flagged.append((p.id, "empty_target"))
        else:
            scoreable.append(p)

    from .workers import map_ordered

    def _score(pair):
        src = bits_per_char(src_model, pair.source)
        tgt = bits_per_char(tgt_model, pair.target)
        return pair.id, src, tgt

    new_scores = {}
    for record_id, src, tgt in map_ordered(_score, scoreable, workers):
        new_scores[record_id] = {"bpc_src": src, "bpc_tgt": tgt, "bpc_sum": src + tgt}

    kept = corpus.subset([p.id for p in scoreable]).with_scores(new_scores)
    return kept, flagged


def save_lm(model: CharNGramLM, path: str | Path) -> None:
    """Persist as versioned binary (magic CLM1); byte-stable for a given model."""
    out = bytearray()
    out += b"CLM1"
    out += struct.pack("<BBB", 1, model.order, _SMOOTHING_TAGS[model.smoothing])
    out += struct.pack("<d", model.add_k)
    vocab = sorted(model.vocab)
    out += struct.pack("<I", len(vocab))
    for ch in vocab:
        raw = ch.encode("utf-8")
        out += struct.pack("<H", len(raw)) + raw
    out += struct.pack("<B", model.order)
    for level in model.levels:
        out += struct.pack("<I", len(level))
        for ctx in sorted(level):
            raw = ctx.encode("utf-8")
            out += struct.pack("<H", len(raw)) + raw
            followers = level[ctx]
            out += struct.pack("<I", len(followers))
            for ch in sorted(followers):
                craw = ch.encode("utf-8")
                out += struct.pack("<H", len(craw)) + craw
                out += struct.pack("<Q", followers[ch])
    with open(path, "wb") as fh:
        fh.write(bytes(out))


def load_lm(path: str | Path) -> CharNGramLM:
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != b"CLM1":
        raise ValueError(f"{path}: not a CLM1 model file")
    pos = 4
    version, order, smoothing_tag = struct.unpack_from("<BBB", data, pos)
    pos += 3
    if version != 1:
        raise ValueError(f"{path}: unsupported CLM1 version {version}")
    if smoothing_tag not in _SMOOTHING_NAMES:
        raise ValueError(f"{path}: unknown smoothing tag {smoothing_tag}")
    (add_k,) = struct.unpack_from("<d", data, pos)
    pos += 8

    def read_str() -> str:
        nonlocal pos
        (n,) = struct.unpack_from("<H", data, pos)
        pos += 2
        s = data[pos:pos + n].decode("utf-8")
        pos += n
        return s

    (n_vocab,) = struct.unpack_from("<I", data, pos)
    pos += 4
    vocab = frozenset(read_str() for _ in range(n_vocab))
    (n_levels,) = struct.unpack_from("<B", data, pos)
    pos += 1
    if n_levels != order:
        raise ValueError(f"{path}: level table count {n_levels} != order {order}")
    levels = []
    for _ in range(n_levels):
        (n_ctx,) = struct.unpack_from("<I", data, pos)
        pos += 4
        level = {}
        for _ in range(n_ctx):
            ctx = read_str()
            (n_fol,) = struct.unpack_from("<I", data, pos)
            pos += 4
            followers = {}
            for _ in range(n_fol):
                ch = read_str()
                (count,) = struct.unpack_from("<Q", data, pos)
                pos += 8
                followers[ch] = count
            level[ctx] = followers
        levels.append(level)
    totals = tuple({ctx: sum(f.values()) for ctx, f in level.items()} for level in levels)
    return CharNGramLM(order=order, smoothing=_SMOOTHING_NAMES[smoothing_tag], add_k=add_k,
                       vocab=vocab, levels=tuple(levels), totals=totals)
