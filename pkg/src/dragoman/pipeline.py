"""End-to-end pipeline commands behind the CLI: validate a run config, wire
the annotation stages together, and write every artifact deterministically
(no timestamps, ordered keys), so reruns are byte-identical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from . import charlm, config as kvconfig, filters, kfold, langid
from .corpus import (
    WELL_KNOWN_KEYS,
    Corpus,
    read_corpus,
    read_scores,
    write_corpus,
    write_scores,
)
from .errors import ConfigError
from .filters import FilterReport, FilterSpec

_REPORT_CAUSE_ORDER = ("empty", "lang", "bpc", "sim", "len", "len_diff")


@dataclass(frozen=True)
class FilterRunConfig:
    corpus: Path
    output_dir: Path
    format: str = "tsv"
    tgt_corpus: Optional[Path] = None
    preset: Optional[str] = None
    filter_spec: Optional[Path] = None
    profiles: tuple = ()
    src_lm: Optional[Path] = None
    tgt_lm: Optional[Path] = None
    sidecars: tuple = ()

    @staticmethod
    def from_file(path: str | Path) -> "FilterRunConfig":
        values = kvconfig.read_kv(path)
        base = Path(path).parent

        def _path(key):
            return (base / values.pop(key)).resolve() if key in values else None

        def _paths(key):
            raw = values.pop(key, "")
            return tuple((base / p.strip()).resolve() for p in raw.split(",") if p.strip())

        cfg = FilterRunConfig(
            corpus=_path("corpus"),
            output_dir=_path("output_dir"),
            format=values.pop("format", "tsv"),
            tgt_corpus=_path("tgt_corpus"),
            preset=values.pop("preset", None),
            filter_spec=_path("filter_spec"),
            profiles=_paths("profiles"),
            src_lm=_path("src_lm"),
            tgt_lm=_path("tgt_lm"),
            sidecars=_paths("sidecars"),
        )
        if values:
            raise ConfigError(f"{path}: unknown keys {sorted(values)}")
        return cfg

    def validate(self) -> None:
        if self.corpus is None or self.output_dir is None:
            raise ConfigError("filter config needs 'corpus' and 'output_dir'")
        if (self.preset is None) == (self.filter_spec is None):
            raise ConfigError("set exactly one of 'preset' and 'filter_spec'")
        for p in (self.corpus, self.tgt_corpus, self.filter_spec, self.src_lm,
                  self.tgt_lm, *self.profiles, *self.sidecars):
            if p is not None and not Path(p).exists():
                raise ConfigError(f"missing input file: {p}")

    def spec(self) -> FilterSpec:
        if self.preset is not None:
            return filters.preset(self.preset)
        return filters.load_spec(self.filter_spec)


def _writeable_keys(corpus: Corpus) -> list[str]:
    """Well-known keys present on every record, in canonical order."""
    keys = []
    for key in WELL_KNOWN_KEYS:
        if all(key in corpus.scores_of(p.id) for p in corpus):
            keys.append(key)
    return keys


def _ordered_causes(rejected: dict) -> dict:
    out = {}
    for cause in _REPORT_CAUSE_ORDER:
        if rejected.get(cause):
            out[cause] = rejected[cause]
    return out


def cmd_filter(cfg: FilterRunConfig, workers: int = 1, strict: bool = True) -> FilterReport:
    """Annotate (lang, bpc, lengths), merge sidecars, filter, write artifacts."""
    cfg.validate()
    spec = cfg.spec()
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    corpus, _ = read_corpus(cfg.corpus, format=cfg.format, strict=strict,
                            tgt_path=cfg.tgt_corpus)
    input_count = len(corpus)
    pre_rejected: dict[str, int] = {}

    for sidecar in cfg.sidecars:
        corpus, _ = read_scores(corpus, sidecar)

    def _have(keys):
        return all(key in corpus.scores_of(p.id) for p in corpus for key in keys)

    # Scores already merged from sidecars win; models are only consulted (and
    # only then required) for scores the sidecars did not provide.
    if spec.require_langs is not None and not _have(("lang_src_conf", "lang_tgt_conf")):
        if not cfg.profiles:
            raise ConfigError("filter spec requires languages but no profiles given "
                              "and no sidecar provides lang confidences")
        profiles = [langid.load_profile(p) for p in cfg.profiles]
        src_label, tgt_label, _ = spec.require_langs
        known = {p.language for p in profiles}
        for label in (src_label, tgt_label):
            if label not in known:
                raise ConfigError(f"no profile for label '{label}'")
        corpus, flagged = langid.annotate_lang(corpus, profiles, src_label, tgt_label,
                                               workers=workers)
        pre_rejected["empty"] = pre_rejected.get("empty", 0) + len(flagged)

    if spec.max_bpc_sum is not None and not _have(("bpc_sum",)):
        if cfg.src_lm is None or cfg.tgt_lm is None:
            raise ConfigError("filter spec thresholds BPC but src_lm/tgt_lm not given "
                              "and no sidecar provides bpc_sum")
        src_model = charlm.load_lm(cfg.src_lm)
        tgt_model = charlm.load_lm(cfg.tgt_lm)
        corpus, flagged = charlm.bpc_sum_annotate(corpus, src_model, tgt_model,
                                                  workers=workers)
        pre_rejected["empty"] = pre_rejected.get("empty", 0) + len(flagged)

    corpus = filters.annotate_lengths(corpus)
    kept, report = filters.apply_filters(corpus, spec)

    rejected = dict(report.rejected_by_cause)
    for cause, count in pre_rejected.items():
        rejected[cause] = rejected.get(cause, 0) + count
    report = FilterReport(input_count=input_count, kept_count=report.kept_count,
                          rejected_by_cause=_ordered_causes(rejected),
                          thresholds=report.thresholds)

    write_corpus(kept, out_dir / "kept.tsv")
    write_scores(kept, _writeable_keys(kept), out_dir / "kept_scores.jsonl")
    (out_dir / "filter_report.json").write_text(report.to_json() + "\n", encoding="utf-8")
    (out_dir / "filter_report.txt").write_text(report.to_text() + "\n", encoding="utf-8")
    return report


@dataclass(frozen=True)
class SelectRunConfig:
    corpus: Path
    output_dir: Path
    format: str = "tsv"
    tgt_corpus: Optional[Path] = None
    k: int = kfold.DEFAULT_K
    seed: int = 0
    lm_order: int = 5
    lm_smoothing: str = "witten_bell"
    lm_add_k: float = 1.0
    side: str = "concatenated"
    normalize: bool = False
    percentiles: tuple = (20.0, 40.0, 50.0, 60.0, 70.0, 80.0)
    mode: str = "per_fold"
    two_sigma: bool = False
    logprob_sidecar: Optional[Path] = None

    @staticmethod
    def from_file(path: str | Path) -> "SelectRunConfig":
        values = kvconfig.read_kv(path)
        base = Path(path).parent

        def _path(key):
            return (base / values.pop(key)).resolve() if key in values else None

        kwargs: dict = {"corpus": _path("corpus"), "output_dir": _path("output_dir"),
                        "tgt_corpus": _path("tgt_corpus"),
                        "logprob_sidecar": _path("logprob_sidecar")}
        if "format" in values:
            kwargs["format"] = values.pop("format")
        for key, conv in (("k", int), ("seed", int), ("lm_order", int),
                          ("lm_add_k", float)):
            if key in values:
                kwargs[key] = conv(values.pop(key))
        for key in ("lm_smoothing", "side", "mode"):
            if key in values:
                kwargs[key] = values.pop(key)
        for key in ("normalize", "two_sigma"):
            if key in values:
                kwargs[key] = kvconfig.parse_bool(values.pop(key))
        if "percentiles" in values:
            kwargs["percentiles"] = tuple(float(x) for x in
                                          values.pop("percentiles").split(",") if x.strip())
        if values:
            raise ConfigError(f"{path}: unknown keys {sorted(values)}")
        return SelectRunConfig(**kwargs)

    def validate(self) -> None:
        if self.corpus is None or self.output_dir is None:
            raise ConfigError("select config needs 'corpus' and 'output_dir'")
        for p in (self.corpus, self.tgt_corpus, self.logprob_sidecar):
            if p is not None and not Path(p).exists():
                raise ConfigError(f"missing input file: {p}")
        if self.mode not in kfold.MODES:
            raise ConfigError(f"unknown mode '{self.mode}'")
        if not self.percentiles and not self.two_sigma:
            raise ConfigError("no thresholds to sweep")

    def lm_config(self) -> kfold.LMConfig:
        return kfold.LMConfig(order=self.lm_order, smoothing=self.lm_smoothing,
                              add_k=self.lm_add_k, side=self.side,
                              normalize=self.normalize)


def cmd_select(cfg: SelectRunConfig, workers: int = 1,
               strict: bool = True) -> kfold.SelectionSweep:
    """Fold, train, score held-out, sweep thresholds, write manifests."""
    cfg.validate()
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    corpus, _ = read_corpus(cfg.corpus, format=cfg.format, strict=strict,
                            tgt_path=cfg.tgt_corpus)
    plan = kfold.make_folds(corpus, k=cfg.k, seed=cfg.seed)

    if cfg.logprob_sidecar is not None:
        corpus, _ = read_scores(corpus, cfg.logprob_sidecar)
    else:
        corpus, _ = kfold.crossval_score(corpus, plan, cfg.lm_config(), workers=workers)
        write_scores(corpus, ["logprob"], out_dir / "logprob.jsonl")

    result = kfold.sweep(corpus, plan, cfg.percentiles, mode=cfg.mode,
                         include_two_sigma=cfg.two_sigma)
    for manifest in result.manifests:
        kfold.write_manifest(manifest, out_dir / f"retained_{manifest.label}.txt")
    (out_dir / "sweep.tsv").write_text(result.to_tsv(), encoding="utf-8")
    (out_dir / "sweep_summary.json").write_text(result.to_json() + "\n", encoding="utf-8")
    return result


def cmd_eval(hyp_path: str | Path, ref_paths: Sequence[str | Path],
             metrics_list: Sequence[str] = ("bleu", "chrf", "chrf++")) -> dict:
    """Score line-aligned hypothesis/reference files."""
    from .errors import LineCountMismatch
    from .metrics import EvalPair, chrf, corpus_bleu

    hyp_lines = Path(hyp_path).read_text(encoding="utf-8").splitlines()
    ref_line_lists = [Path(p).read_text(encoding="utf-8").splitlines() for p in ref_paths]
    for p, lines in zip(ref_paths, ref_line_lists):
        if len(lines) != len(hyp_lines):
            raise LineCountMismatch(
                f"{p} has {len(lines)} lines, hypothesis has {len(hyp_lines)}")

    pairs = [EvalPair(h, tuple(refs[i] for refs in ref_line_lists))
             for i, h in enumerate(hyp_lines)]
    out: dict = {}
    for name in metrics_list:
        if name == "bleu":
            bleu = corpus_bleu(pairs, smoothing="exp")
            out["bleu"] = {"score": round(bleu.score, 2),
                           "precisions": [round(p * 100, 1) for p in bleu.precisions],
                           "brevity_penalty": round(bleu.brevity_penalty, 3),
                           "hyp_len": bleu.hyp_len, "ref_len": bleu.ref_len}
        elif name == "chrf":
            out["chrf"] = {"score": round(chrf(pairs), 2)}
        elif name == "chrf++":
            out["chrf++"] = {"score": round(chrf(pairs, word_order=2), 2)}
        else:
            raise ConfigError(f"unknown metric '{name}'")
    return out
