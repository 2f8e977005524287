"""Phase-1 heuristic filtering under a declarative threshold spec.

A record is kept iff it passes every active criterion (intersection
semantics). All thresholds are strict inequalities. Rejections are attributed
to the first failing criterion in the fixed order lang, bpc, sim, len,
len_diff, and the kept output can optionally be reordered by ascending
similarity (most dissimilar first) as a data-loading curriculum.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional

from . import config as kvconfig
from .corpus import Corpus, SentencePair, require_scores
from .errors import ConfigError, UnknownPreset

CAUSE_ORDER = ("lang", "bpc", "sim", "len", "len_diff")

OUTPUT_ORDERS = ("input", "similarity_ascending")


@dataclass(frozen=True)
class FilterSpec:
    require_langs: Optional[tuple] = None       # (src_label, tgt_label, min_conf)
    max_bpc_sum: Optional[float] = None
    min_similarity: Optional[float] = None
    max_len_diff: Optional[int] = None
    min_len_src: Optional[int] = None
    max_len_src: Optional[int] = None
    min_len_tgt: Optional[int] = None
    max_len_tgt: Optional[int] = None
    output_order: str = "input"

    def __post_init__(self):
        criteria = (self.require_langs, self.max_bpc_sum, self.min_similarity,
                    self.max_len_diff, self.min_len_src, self.max_len_src,
                    self.min_len_tgt, self.max_len_tgt)
        if all(c is None for c in criteria):
            raise ConfigError("filter spec sets no criteria")
        for value in (self.max_bpc_sum, self.min_similarity):
            if value is not None and not math.isfinite(value):
                raise ConfigError("filter thresholds must be finite")
        if self.min_similarity is not None and not -1.0 <= self.min_similarity <= 1.0:
            raise ConfigError("min_similarity must be in [-1, 1]")
        for lo, hi in ((self.min_len_src, self.max_len_src),
                       (self.min_len_tgt, self.max_len_tgt)):
            if lo is not None and hi is not None and lo > hi:
                raise ConfigError("min_len must not exceed max_len")
        if self.output_order not in OUTPUT_ORDERS:
            raise ConfigError(f"unknown output_order '{self.output_order}'")

    def required_keys(self) -> list[str]:
        keys = []
        if self.require_langs is not None:
            keys += ["lang_src_conf", "lang_tgt_conf"]
        if self.max_bpc_sum is not None:
            keys.append("bpc_sum")
        if self.min_similarity is not None:
            keys.append("sim")
        if self.output_order == "similarity_ascending" and "sim" not in keys:
            keys.append("sim")
        return keys

    def thresholds(self) -> dict:
        out: dict = {}
        if self.require_langs is not None:
            out["require_langs"] = list(self.require_langs)
        for name in ("max_bpc_sum", "min_similarity", "max_len_diff", "min_len_src",
                     "max_len_src", "min_len_tgt", "max_len_tgt"):
            value = getattr(self, name)
            if value is not None:
                out[name] = value
        out["output_order"] = self.output_order
        return out


@dataclass(frozen=True)
class FilterReport:
    input_count: int
    kept_count: int
    rejected_by_cause: Mapping[str, int]
    thresholds: Mapping[str, object] = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps({
            "input": self.input_count,
            "kept": self.kept_count,
            "rejected_by_cause": dict(self.rejected_by_cause),
            "thresholds": dict(self.thresholds),
        }, ensure_ascii=False, indent=2)

    def to_text(self) -> str:
        lines = [f"input records:  {self.input_count}",
                 f"kept records:   {self.kept_count}"]
        for cause in CAUSE_ORDER:
            if cause in self.rejected_by_cause:
                lines.append(f"rejected {cause:<9} {self.rejected_by_cause[cause]}")
        return "\n".join(lines)


def length_stats(pair: SentencePair) -> tuple[int, int, int]:
    """Character counts of both sides and their absolute difference."""
    len_src = len(pair.source)
    len_tgt = len(pair.target)
    return len_src, len_tgt, abs(len_src - len_tgt)


def annotate_lengths(corpus: Corpus) -> Corpus:
    """Persist len_src/len_tgt/len_diff to the score annotations."""
    new_scores = {}
    for p in corpus:
        len_src, len_tgt, len_diff = length_stats(p)
        new_scores[p.id] = {"len_src": float(len_src), "len_tgt": float(len_tgt),
                            "len_diff": float(len_diff)}
    return corpus.with_scores(new_scores)


def _failing_cause(pair: SentencePair, scores: Mapping[str, float],
                   spec: FilterSpec) -> Optional[str]:
    if spec.require_langs is not None:
        _, _, min_conf = spec.require_langs
        if scores["lang_src_conf"] < min_conf or scores["lang_tgt_conf"] < min_conf:
            return "lang"
    if spec.max_bpc_sum is not None and not scores["bpc_sum"] < spec.max_bpc_sum:
        return "bpc"
    if spec.min_similarity is not None and not scores["sim"] > spec.min_similarity:
        return "sim"
    len_src, len_tgt, len_diff = length_stats(pair)
    if spec.min_len_src is not None and not len_src > spec.min_len_src:
        return "len"
    if spec.max_len_src is not None and not len_src < spec.max_len_src:
        return "len"
    if spec.min_len_tgt is not None and not len_tgt > spec.min_len_tgt:
        return "len"
    if spec.max_len_tgt is not None and not len_tgt < spec.max_len_tgt:
        return "len"
    if spec.max_len_diff is not None and not len_diff < spec.max_len_diff:
        return "len_diff"
    return None


def apply_filters(corpus: Corpus, spec: FilterSpec) -> tuple[Corpus, FilterReport]:
    """Filter the corpus; aborts with MissingScore before any partial output.

    Length criteria are evaluated from the record text itself, so they never
    desync from annotations; lang/bpc/sim criteria read the score entries the
    spec references.
    """
    require_scores(corpus, spec.required_keys())

    rejected: dict[str, int] = {}
    kept_ids = []
    for pair in corpus:
        cause = _failing_cause(pair, corpus.scores_of(pair.id), spec)
        if cause is None:
            kept_ids.append(pair.id)
        else:
            rejected[cause] = rejected.get(cause, 0) + 1

    kept = corpus.subset(kept_ids)
    if spec.output_order == "similarity_ascending":
        ordered = sorted(kept_ids, key=lambda i: (corpus.score(i, "sim"), i))
        kept = kept.reordered(ordered)

    report = FilterReport(input_count=len(corpus), kept_count=len(kept),
                          rejected_by_cause=rejected, thresholds=spec.thresholds())
    return kept, report


# Threshold presets for the Paracrawl subcorpora. BPC values are calibrated to
# the external neural scorers these subsets were cut with; when scoring with
# the built-in character LMs, sweep and recalibrate instead of trusting them.
_PRESETS = {
    "paracrawl_1m": FilterSpec(require_langs=("en", "uk", 0.5), max_bpc_sum=3.33,
                               min_similarity=0.91, max_len_diff=50,
                               output_order="input"),
    "paracrawl_3m": FilterSpec(require_langs=("en", "uk", 0.5), max_bpc_sum=3.25,
                               min_similarity=0.85, max_len_diff=50,
                               output_order="similarity_ascending"),
    "paracrawl_8m": FilterSpec(require_langs=("en", "uk", 0.5), max_bpc_sum=5.0,
                               min_similarity=0.5, max_len_diff=50,
                               output_order="similarity_ascending"),
}


def preset(name: str) -> FilterSpec:
    try:
        return _PRESETS[name]
    except KeyError:
        raise UnknownPreset(name) from None


def preset_names() -> list[str]:
    return sorted(_PRESETS)


_INT_FIELDS = ("max_len_diff", "min_len_src", "max_len_src", "min_len_tgt", "max_len_tgt")
_FLOAT_FIELDS = ("max_bpc_sum", "min_similarity")


def save_spec(spec: FilterSpec, path: str | Path) -> None:
    values: dict[str, str] = {}
    if spec.require_langs is not None:
        src, tgt, min_conf = spec.require_langs
        values["src_lang"] = src
        values["tgt_lang"] = tgt
        values["min_lang_conf"] = repr(min_conf)
    for name in _FLOAT_FIELDS + _INT_FIELDS:
        value = getattr(spec, name)
        if value is not None:
            values[name] = repr(value)
    values["output_order"] = spec.output_order
    kvconfig.write_kv(path, values)


def load_spec(path: str | Path) -> FilterSpec:
    values = kvconfig.read_kv(path)
    kwargs: dict = {}
    if "src_lang" in values or "tgt_lang" in values:
        if not ("src_lang" in values and "tgt_lang" in values):
            raise ConfigError(f"{path}: src_lang and tgt_lang must be set together")
        min_conf = float(values.pop("min_lang_conf", "0.5"))
        kwargs["require_langs"] = (values.pop("src_lang"), values.pop("tgt_lang"), min_conf)
    for name in _FLOAT_FIELDS:
        if name in values:
            kwargs[name] = float(values.pop(name))
    for name in _INT_FIELDS:
        if name in values:
            kwargs[name] = int(values.pop(name))
    kwargs["output_order"] = values.pop("output_order", "input")
    if values:
        raise ConfigError(f"{path}: unknown keys {sorted(values)}")
    return FilterSpec(**kwargs)
