"""Oracle selection over externally produced n-best translation lists.

Given decoder output (n hypotheses per source with model scores) and the
reference translations, pick per sentence the hypothesis with the best
sentence-level metric value ("oracle") and report the corpus score of that
selection next to the model-score-argmax baseline a plain beam search would
return. A width sweep truncates each list to its first w hypotheses.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, Sequence

from .errors import DuplicateId, EmptyHypotheses, MalformedLine, MissingReference
from .metrics import EvalPair, corpus_bleu, sentence_bleu


@dataclass(frozen=True)
class NBestList:
    """Candidates for one source sentence, decoder order preserved."""

    id: int
    source: str
    hypotheses: tuple            # of (text, model_score)

    def __post_init__(self):
        if not self.hypotheses:
            raise EmptyHypotheses(f"n-best list {self.id} has no hypotheses")
        for text, score in self.hypotheses:
            if not math.isfinite(score):
                raise ValueError(f"n-best list {self.id}: non-finite model score")

    def truncated(self, width: int) -> "NBestList":
        return NBestList(self.id, self.source, self.hypotheses[:max(1, width)])


@dataclass(frozen=True)
class OracleSelection:
    """Per-id picks plus corpus scores for oracle and baseline."""

    picks: Mapping[int, int]            # id -> hypothesis index chosen by the oracle
    baseline_picks: Mapping[int, int]   # id -> model-score argmax index
    oracle_score: float
    baseline_score: float
    sentence_scores: Mapping[int, float]


def read_nbest(path: str | Path) -> list[NBestList]:
    """JSON-lines, one object per source:
    {"id": .., "source": .., "hypotheses": [{"text": .., "score": ..}, ..]}
    """
    lists = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line:
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as err:
                raise MalformedLine(str(path), line_no, f"invalid JSON: {err}") from None
            try:
                record_id = int(row["id"])
                source = row["source"]
                hyps = tuple((h["text"], float(h["score"])) for h in row["hypotheses"])
            except (KeyError, TypeError) as err:
                raise MalformedLine(str(path), line_no, f"bad n-best object: {err}") from None
            if record_id in seen:
                raise DuplicateId(record_id, str(path))
            seen.add(record_id)
            lists.append(NBestList(record_id, source, hyps))
    return lists


def write_nbest(lists: Sequence[NBestList], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for nb in lists:
            row = {"id": nb.id, "source": nb.source,
                   "hypotheses": [{"text": t, "score": s} for t, s in nb.hypotheses]}
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")


def _default_metric(hypothesis: str, reference: str) -> float:
    return sentence_bleu(EvalPair(hypothesis, (reference,)))


def oracle_select(lists: Sequence[NBestList], references: Mapping[int, str],
                  metric: Callable[[str, str], float] = _default_metric) -> OracleSelection:
    """Pick the best hypothesis per list under the sentence metric.

    Ties go to the lowest index (the decoder's preference). The baseline pick
    is the model-score argmax, again lowest index on ties.
    """
    picks = {}
    baseline_picks = {}
    sentence_scores = {}
    for nb in lists:
        if nb.id not in references:
            raise MissingReference(nb.id)
        reference = references[nb.id]
        best_idx = 0
        best_value = None
        for idx, (text, _) in enumerate(nb.hypotheses):
            value = metric(text, reference)
            if best_value is None or value > best_value:
                best_value = value
                best_idx = idx
        picks[nb.id] = best_idx
        sentence_scores[nb.id] = best_value
        baseline_picks[nb.id] = max(range(len(nb.hypotheses)),
                                    key=lambda i: (nb.hypotheses[i][1], -i))

    oracle_pairs = [EvalPair(nb.hypotheses[picks[nb.id]][0], (references[nb.id],))
                    for nb in lists]
    baseline_pairs = [EvalPair(nb.hypotheses[baseline_picks[nb.id]][0], (references[nb.id],))
                      for nb in lists]
    return OracleSelection(
        picks=picks,
        baseline_picks=baseline_picks,
        oracle_score=corpus_bleu(oracle_pairs, smoothing="exp").score,
        baseline_score=corpus_bleu(baseline_pairs, smoothing="exp").score,
        sentence_scores=sentence_scores,
    )


def beam_width_sweep(lists: Sequence[NBestList], references: Mapping[int, str],
                     widths: Sequence[int],
                     metric: Callable[[str, str], float] = _default_metric) -> list[dict]:
    """Oracle and baseline corpus BLEU per beam width.

    Width w uses the first w hypotheses of each list; widths beyond a list's
    length use all it has (counted in `short_lists`).
    """
    rows = []
    for width in widths:
        if width < 1:
            raise ValueError("beam widths must be positive")
        truncated = [nb.truncated(width) for nb in lists]
        short = sum(1 for nb in lists if len(nb.hypotheses) < width)
        selection = oracle_select(truncated, references, metric)
        rows.append({"width": width, "oracle_bleu": selection.oracle_score,
                     "baseline_bleu": selection.baseline_score, "short_lists": short})
    return rows


def sweep_to_tsv(rows: Sequence[dict]) -> str:
    lines = ["width\toracle_bleu\tbaseline_bleu"]
    for row in rows:
        lines.append(f"{row['width']}\t{row['oracle_bleu']:.2f}\t{row['baseline_bleu']:.2f}")
    return "\n".join(lines) + "\n"
