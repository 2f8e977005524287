"""Phase-2 unsupervised selection: k-fold held-out perplexity thresholding.

Every record is scored by a character LM trained on all folds except its own,
so the log probabilities are held-out by construction. Selection at the q-th
percentile retains the q% least surprising records (nearest-rank cutoffs on
surprisal = -logprob, one cutoff per fold by default), which makes retained
counts exact integer arithmetic on balanced folds.
"""

from __future__ import annotations

import json
import math
import random
import statistics
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .charlm import CharNGramLM, log_prob, train_lm
from .corpus import Corpus
from .errors import CorpusTooSmall, EmptyFold
from .workers import map_ordered

SIDES = ("source", "target", "concatenated")
MODES = ("per_fold", "global", "two_sigma")

DEFAULT_K = 5


@dataclass(frozen=True)
class FoldPlan:
    """Balanced deterministic fold assignment (record id -> fold index)."""

    k: int
    assignment: Mapping[int, int]

    def fold_ids(self) -> dict:
        folds: dict[int, list[int]] = {i: [] for i in range(self.k)}
        for record_id, fold in self.assignment.items():
            folds[fold].append(record_id)
        return folds


@dataclass(frozen=True)
class LMConfig:
    order: int = 5
    smoothing: str = "witten_bell"
    add_k: float = 1.0
    side: str = "concatenated"
    normalize: bool = False     # divide total logprob by character count

    def __post_init__(self):
        if self.side not in SIDES:
            raise ValueError(f"unknown side '{self.side}'")

    def text_of(self, pair) -> str:
        if self.side == "source":
            return pair.source
        if self.side == "target":
            return pair.target
        return pair.source + "\t" + pair.target


@dataclass(frozen=True)
class CrossvalLog:
    """Instrumentation proving the held-out guarantee."""

    fold_training_ids: Mapping[int, frozenset]
    scored_fold: Mapping[int, int]

    def leaks(self) -> list[int]:
        """Ids scored by a model that saw them in training (must be empty)."""
        return [record_id for record_id, fold in self.scored_fold.items()
                if record_id in self.fold_training_ids[fold]]


@dataclass(frozen=True)
class SelectionManifest:
    label: str
    mode: str
    cutoffs: object             # mapping fold -> cutoff, or a single float
    retained_ids: tuple
    removed_ids: tuple

    @property
    def retained(self) -> int:
        return len(self.retained_ids)

    @property
    def removed(self) -> int:
        return len(self.removed_ids)

    def summary(self) -> dict:
        cutoffs = self.cutoffs
        if isinstance(cutoffs, Mapping):
            cutoffs = {str(k): v for k, v in sorted(cutoffs.items())}
        return {"threshold": self.label, "mode": self.mode, "cutoffs": cutoffs,
                "retained": self.retained, "removed": self.removed}


@dataclass(frozen=True)
class SelectionSweep:
    percentiles: tuple
    include_two_sigma: bool
    manifests: tuple

    def to_tsv(self) -> str:
        """Threshold/count table; BLEU columns stay blank for external fill-in."""
        lines = ["threshold\tretained\tbleu_dev\tbleu_devtest"]
        for m in self.manifests:
            lines.append(f"{m.label}\t{m.retained}\t\t")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return json.dumps([m.summary() for m in self.manifests],
                          ensure_ascii=False, indent=2)


def make_folds(corpus: Corpus, k: int = DEFAULT_K, seed: int = 0) -> FoldPlan:
    """Deterministic pseudorandom balanced assignment; sizes differ by at most 1."""
    if k < 2:
        raise ValueError("k must be >= 2")
    if len(corpus) < k:
        raise CorpusTooSmall(f"{len(corpus)} records < k={k}")
    ids = corpus.ids()
    positions = list(range(len(ids)))
    random.Random(seed).shuffle(positions)
    assignment = {}
    for fold_pos, original_pos in enumerate(positions):
        assignment[ids[original_pos]] = fold_pos % k
    return FoldPlan(k=k, assignment=dict(sorted(assignment.items())))


def crossval_score(corpus: Corpus, plan: FoldPlan, lm_config: LMConfig = LMConfig(),
                   workers: int = 1) -> tuple[Corpus, CrossvalLog]:
    """Train k models, each withholding one fold; score every record held-out.

    The logprob annotation is the total log2 probability of the configured
    side under the model whose withheld fold contains the record (divided by
    character count when normalize is set).
    """
    missing = [p.id for p in corpus if p.id not in plan.assignment]
    if missing:
        raise ValueError(f"fold plan does not cover ids {missing[:5]}")

    by_fold: dict[int, list] = {i: [] for i in range(plan.k)}
    for p in corpus:
        by_fold[plan.assignment[p.id]].append(p)

    models: dict[int, CharNGramLM] = {}
    training_ids: dict[int, frozenset] = {}
    for fold in range(plan.k):
        train_pairs = [p for other, pairs in sorted(by_fold.items()) if other != fold
                       for p in pairs]
        training_ids[fold] = frozenset(p.id for p in train_pairs)
        models[fold] = train_lm((lm_config.text_of(p) for p in train_pairs),
                                order=lm_config.order, smoothing=lm_config.smoothing,
                                add_k=lm_config.add_k)

    def _score(pair):
        model = models[plan.assignment[pair.id]]
        text = lm_config.text_of(pair)
        lp = log_prob(model, text)
        if lm_config.normalize:
            lp /= len(text)
        return pair.id, lp

    new_scores = {}
    for record_id, lp in map_ordered(_score, list(corpus), workers):
        new_scores[record_id] = {"logprob": lp}
    scored = corpus.with_scores(new_scores)
    log = CrossvalLog(fold_training_ids=training_ids,
                      scored_fold={p.id: plan.assignment[p.id] for p in corpus})
    return scored, log


def nearest_rank(sorted_values: Sequence[float], q: float) -> float:
    """Value at ceiling(q/100 * N) in ascending order; q in (0, 100]."""
    if not sorted_values:
        raise EmptyFold("empty score collection")
    if not 0 < q <= 100:
        raise ValueError("percentile must be in (0, 100]")
    rank = max(1, math.ceil(q / 100.0 * len(sorted_values)))
    return sorted_values[rank - 1]


def percentile_threshold(surprisals_by_fold: Mapping[int, Sequence[float]], q: float,
                         mode: str = "per_fold"):
    """Surprisal cutoffs: per-fold nearest-rank, one global value, or mean+2*sigma."""
    if mode not in MODES:
        raise ValueError(f"unknown mode '{mode}'")
    for fold, values in surprisals_by_fold.items():
        if not values:
            raise EmptyFold(f"fold {fold} has no scores")
    if mode == "per_fold":
        return {fold: nearest_rank(sorted(values), q)
                for fold, values in surprisals_by_fold.items()}
    pooled = [v for values in surprisals_by_fold.values() for v in values]
    if mode == "global":
        return nearest_rank(sorted(pooled), q)
    return statistics.fmean(pooled) + 2.0 * statistics.pstdev(pooled)


def _surprisals_by_fold(corpus: Corpus, plan: FoldPlan) -> dict:
    folds: dict[int, list[float]] = {i: [] for i in range(plan.k)}
    for p in corpus:
        folds[plan.assignment[p.id]].append(-corpus.score(p.id, "logprob"))
    return folds


def select(corpus: Corpus, plan: FoldPlan, q: float = 60.0,
           mode: str = "per_fold") -> tuple[Corpus, SelectionManifest]:
    """Retain records with surprisal <= cutoff; the manifest lists removed ids."""
    folds = _surprisals_by_fold(corpus, plan)
    cutoffs = percentile_threshold(folds, q, mode)

    retained = []
    removed = []
    for p in corpus:
        surprisal = -corpus.score(p.id, "logprob")
        cutoff = cutoffs[plan.assignment[p.id]] if mode == "per_fold" else cutoffs
        (retained if surprisal <= cutoff else removed).append(p.id)

    label = "2sigma" if mode == "two_sigma" else f"{q:g}"
    manifest = SelectionManifest(label=label, mode=mode, cutoffs=cutoffs,
                                 retained_ids=tuple(retained), removed_ids=tuple(removed))
    return corpus.subset(retained), manifest


def sweep(corpus: Corpus, plan: FoldPlan, percentiles: Sequence[float],
          mode: str = "per_fold", include_two_sigma: bool = False) -> SelectionSweep:
    """One manifest per threshold, in ascending percentile order (then 2-sigma)."""
    ordered = tuple(sorted(percentiles))
    manifests = []
    for q in ordered:
        _, manifest = select(corpus, plan, q, mode)
        manifests.append(manifest)
    if include_two_sigma:
        _, manifest = select(corpus, plan, mode="two_sigma")
        manifests.append(manifest)
    return SelectionSweep(percentiles=ordered, include_two_sigma=include_two_sigma,
                          manifests=tuple(manifests))


def write_manifest(manifest: SelectionManifest, ids_path: str | Path,
                   summary_path: str | Path | None = None) -> None:
    """Retained ids one per line, plus an optional JSON summary."""
    with open(ids_path, "w", encoding="utf-8", newline="\n") as fh:
        for record_id in manifest.retained_ids:
            fh.write(f"{record_id}\n")
    if summary_path is not None:
        with open(summary_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(json.dumps(manifest.summary(), ensure_ascii=False, indent=2) + "\n")
