"""Trainable character n-gram language classifier.

One profile per language: relative frequencies of character n-grams with
add-one smoothing over the observed n-gram vocabulary. Classification scores
a text by mean log probability of its n-grams under each profile and returns
the argmax plus a softmax-gap confidence, so a min-confidence threshold of 0
degrades to plain argmax.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .corpus import Corpus
from .errors import EmptyText, EmptyTrainingSet, MalformedLine

# Pathological crawl lines can be megabytes long; classification only ever
# looks at this many leading characters.
CLASSIFY_PREFIX = 1000

DEFAULT_ORDER = 3
DEFAULT_MIN_CONF = 0.5


@dataclass(frozen=True)
class LangProfile:
    """Immutable trained profile for one language label."""

    language: str
    ngram_order: int
    log_freqs: Mapping[str, float]
    alphabet_size: int
    unseen_log_freq: float


def _ngrams(text: str, order: int) -> list[str]:
    if len(text) < order:
        return [text]
    return [text[i:i + order] for i in range(len(text) - order + 1)]


def train_profile(texts: Iterable[str], language: str, order: int = DEFAULT_ORDER) -> LangProfile:
    """Count n-grams over the texts; add-one smoothing over observed vocabulary."""
    if order < 1:
        raise ValueError("order must be >= 1")
    counts: dict[str, int] = {}
    alphabet: set[str] = set()
    total = 0
    for text in texts:
        if not text:
            continue
        alphabet.update(text)
        for gram in _ngrams(text, order):
            counts[gram] = counts.get(gram, 0) + 1
            total += 1
    if not counts:
        raise EmptyTrainingSet("no non-empty training text")
    denom = total + len(counts)
    log_freqs = {gram: math.log((n + 1) / denom) for gram, n in counts.items()}
    return LangProfile(language=language, ngram_order=order, log_freqs=log_freqs,
                       alphabet_size=len(alphabet), unseen_log_freq=math.log(1.0 / denom))


def _mean_log_likelihood(text: str, profile: LangProfile) -> float:
    grams = _ngrams(text, profile.ngram_order)
    total = 0.0
    for gram in grams:
        total += profile.log_freqs.get(gram, profile.unseen_log_freq)
    return total / len(grams)


def classify(text: str, profiles: Sequence[LangProfile]) -> tuple[str, float, dict]:
    """Best label plus confidence.

    Returns (label, confidence, per-label mean log-likelihood). Confidence is
    the softmax-probability gap between the two best labels, in [0, 1].
    Deterministic: label ties break alphabetically.
    """
    if len(profiles) < 2:
        raise ValueError("need at least two profiles")
    text = text[:CLASSIFY_PREFIX].rstrip()
    if not text:
        raise EmptyText("cannot classify empty text")
    scores = {p.language: _mean_log_likelihood(text, p) for p in profiles}
    ranked = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))
    best_label, best = ranked[0]
    # Softmax over mean log-likelihoods; gap between the top two probabilities.
    exp_sum = sum(math.exp(s - best) for s in scores.values())
    p_best = 1.0 / exp_sum
    p_second = math.exp(ranked[1][1] - best) / exp_sum
    return best_label, p_best - p_second, scores


def lang_filter(corpus: Corpus, profiles: Sequence[LangProfile], src_label: str,
                tgt_label: str, min_conf: float = DEFAULT_MIN_CONF,
                workers: int = 1) -> tuple[Corpus, dict]:
    """Keep records whose both sides classify as the expected labels.

    Confidences are annotated as lang_src_conf / lang_tgt_conf, signed:
    positive when the expected label won, negated otherwise, so downstream
    threshold filters can reproduce this decision from scores alone.
    Rejections are counted by first failing cause (empty, source_lang,
    target_lang).
    """
    from .workers import map_ordered

    def _judge(pair):
        def side(text, label):
            if not text.strip():
                return None, "empty"
            got, conf, _ = classify(text, profiles)
            return (conf if got == label else -conf), None

        src_conf, src_err = side(pair.source, src_label)
        tgt_conf, tgt_err = side(pair.target, tgt_label)
        return pair.id, src_conf, tgt_conf, src_err or tgt_err

    rejected: dict[str, int] = {}
    kept_ids = []
    new_scores = {}
    for record_id, src_conf, tgt_conf, err in map_ordered(_judge, list(corpus), workers):
        if err == "empty":
            rejected["empty"] = rejected.get("empty", 0) + 1
            continue
        new_scores[record_id] = {"lang_src_conf": src_conf, "lang_tgt_conf": tgt_conf}
        if src_conf < min_conf:
            rejected["source_lang"] = rejected.get("source_lang", 0) + 1
        elif tgt_conf < min_conf:
            rejected["target_lang"] = rejected.get("target_lang", 0) + 1
        else:
            kept_ids.append(record_id)

    annotated = corpus.with_scores(new_scores)
    kept = annotated.subset(kept_ids)
    report = {
        "input": len(corpus),
        "kept": len(kept),
        "rejected_by_cause": rejected,
        "min_conf": min_conf,
        "labels": [src_label, tgt_label],
    }
    return kept, report


def annotate_lang(corpus: Corpus, profiles: Sequence[LangProfile], src_label: str,
                  tgt_label: str, workers: int = 1) -> tuple[Corpus, list]:
    """Attach signed language confidences without dropping records.

    Records with an empty side cannot be classified; they are excluded from
    the returned corpus and listed as (id, cause).
    """
    from .workers import map_ordered

    flagged = []
    scoreable = []
    for p in corpus:
        if not p.source.strip():
            flagged.append((p.id, "empty_source"))
        elif not p.target.strip():
            flagged.append((p.id, "empty_target"))
        else:
            scoreable.append(p)

    def _score(pair):
        src_got, src_conf, _ = classify(pair.source, profiles)
        tgt_got, tgt_conf, _ = classify(pair.target, profiles)
        return pair.id, (src_conf if src_got == src_label else -src_conf), \
            (tgt_conf if tgt_got == tgt_label else -tgt_conf)

    new_scores = {}
    for record_id, src_conf, tgt_conf in map_ordered(_score, scoreable, workers):
        new_scores[record_id] = {"lang_src_conf": src_conf, "lang_tgt_conf": tgt_conf}
    kept = corpus.subset([p.id for p in scoreable]).with_scores(new_scores)
    return kept, flagged


def _escape(gram: str) -> str:
    return gram.replace("\\", "\\\\").replace("\t", "\\t").replace("\n", "\\n").replace("\r", "\\r")


def _unescape(raw: str) -> str:
    out = []
    i = 0
    while i < len(raw):
        ch = raw[i]
        if ch == "\\" and i + 1 < len(raw):
            nxt = raw[i + 1]
            out.append({"\\": "\\", "t": "\t", "n": "\n", "r": "\r"}.get(nxt, nxt))
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def save_profile(profile: LangProfile, path: str | Path) -> None:
    """Versioned text format: header line, then one escaped ngram per line."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"LANGPROFILE v1 {profile.language} {profile.ngram_order}\n")
        fh.write(f"#alphabet {profile.alphabet_size}\n")
        fh.write(f"#unseen {profile.unseen_log_freq!r}\n")
        for gram in sorted(profile.log_freqs):
            fh.write(f"{_escape(gram)}\t{profile.log_freqs[gram]!r}\n")


def load_profile(path: str | Path) -> LangProfile:
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    header = lines[0].split(" ")
    if len(header) != 4 or header[0] != "LANGPROFILE" or header[1] != "v1":
        raise MalformedLine(str(path), 1, "bad LANGPROFILE header")
    language, order = header[2], int(header[3])
    alphabet_size = 0
    unseen = None
    log_freqs = {}
    for line_no, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        if line.startswith("#alphabet "):
            alphabet_size = int(line.split(" ")[1])
            continue
        if line.startswith("#unseen "):
            unseen = float(line.split(" ")[1])
            continue
        cols = line.split("\t")
        if len(cols) != 2:
            raise MalformedLine(str(path), line_no, "expected ngram<TAB>log_freq")
        log_freqs[_unescape(cols[0])] = float(cols[1])
    if unseen is None:
        raise MalformedLine(str(path), 1, "missing #unseen line")
    return LangProfile(language=language, ngram_order=order, log_freqs=log_freqs,
                       alphabet_size=alphabet_size, unseen_log_freq=unseen)
