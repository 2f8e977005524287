"""Parallel-corpus data model and file IO.

A corpus is an ordered, immutable sequence of (id, source, target) records
with optional per-record score annotations. Two on-disk corpus formats are
supported (single TSV and the two-file aligned-pair layout) plus a JSON-lines
score sidecar keyed by record id, so scores produced by independent scorers
can be merged without touching the corpus file.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import (
    AlignmentMismatch,
    DuplicateId,
    MalformedLine,
    MissingScore,
    NonFiniteScore,
)

# Score keys the pipeline stages agree on.
WELL_KNOWN_KEYS = (
    "lang_src_conf",
    "lang_tgt_conf",
    "bpc_src",
    "bpc_tgt",
    "bpc_sum",
    "sim",
    "len_src",
    "len_tgt",
    "len_diff",
    "logprob",
)


@dataclass(frozen=True)
class SentencePair:
    """One aligned sentence pair. Ids are stable across all pipeline stages."""

    id: int
    source: str
    target: str


@dataclass(frozen=True)
class ScoreSet:
    """Named finite real-valued scores for one record."""

    record_id: int
    entries: Mapping[str, float]


@dataclass(frozen=True)
class ReadReport:
    """What a reader or sidecar merge did besides the happy path."""

    total_lines: int = 0
    skipped: int = 0
    unknown_ids: int = 0
    missing_ids: int = 0
    reasons: tuple[str, ...] = ()


@dataclass(frozen=True)
class Corpus:
    """Immutable ordered corpus with optional score annotations by id."""

    pairs: tuple[SentencePair, ...]
    scores: Mapping[int, Mapping[str, float]] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self) -> Iterator[SentencePair]:
        return iter(self.pairs)

    def ids(self) -> list[int]:
        return [p.id for p in self.pairs]

    def by_id(self, record_id: int) -> SentencePair:
        for p in self.pairs:
            if p.id == record_id:
                return p
        raise KeyError(record_id)

    def scores_of(self, record_id: int) -> Mapping[str, float]:
        return self.scores.get(record_id, {})

    def score(self, record_id: int, key: str) -> float:
        entries = self.scores.get(record_id)
        if entries is None or key not in entries:
            raise MissingScore(record_id, key)
        return entries[key]

    def with_scores(self, new_scores: Mapping[int, Mapping[str, float]]) -> "Corpus":
        """Return a copy with `new_scores` merged over the existing annotations."""
        merged: dict[int, dict[str, float]] = {k: dict(v) for k, v in self.scores.items()}
        for record_id, entries in new_scores.items():
            for key, value in entries.items():
                if not math.isfinite(value):
                    raise NonFiniteScore(record_id, key)
            merged.setdefault(record_id, {}).update(entries)
        return Corpus(self.pairs, merged)

    def subset(self, keep_ids: Iterable[int]) -> "Corpus":
        """Records whose id is in `keep_ids`, input order preserved."""
        wanted = set(keep_ids)
        kept = tuple(p for p in self.pairs if p.id in wanted)
        return Corpus(kept, {p.id: self.scores[p.id] for p in kept if p.id in self.scores})

    def reordered(self, ordered_ids: Sequence[int]) -> "Corpus":
        by_id = {p.id: p for p in self.pairs}
        kept = tuple(by_id[i] for i in ordered_ids)
        return Corpus(kept, {i: self.scores[i] for i in ordered_ids if i in self.scores})


def corpus_from_pairs(pairs: Iterable[tuple[int, str, str]]) -> Corpus:
    return Corpus(tuple(SentencePair(i, s, t) for i, s, t in pairs))


def _check_pair(record_id: int, source: str, target: str, path: str, line_no: int) -> None:
    if not source.strip() or not target.strip():
        raise MalformedLine(path, line_no, "empty source or target after trimming")


def read_corpus(path: str | Path, format: str = "tsv", strict: bool = True,
                tgt_path: str | Path | None = None) -> tuple[Corpus, ReadReport]:
    """Read a corpus file.

    `tsv` expects one `id<TAB>source<TAB>target` record per line. `moses-pair`
    expects two aligned files (source at `path`, target at `tgt_path`) and
    assigns ids 0..N-1 by line number. In strict mode any malformed line
    aborts; in lenient mode it is skipped and counted in the report. Text is
    kept raw: no Unicode normalization, no case folding, no trimming beyond
    the line terminator.
    """
    if format == "tsv":
        return _read_tsv(Path(path), strict)
    if format == "moses-pair":
        if tgt_path is None:
            raise ValueError("moses-pair format needs tgt_path")
        return _read_moses_pair(Path(path), Path(tgt_path), strict)
    raise ValueError(f"unknown corpus format '{format}'")


def _read_lines(path: Path) -> list:
    """Lines as str, or an undecodable line's raw bytes (callers reject those)."""
    raw = Path(path).read_bytes()
    if not raw:
        return []
    chunks = raw.split(b"\n")
    if chunks and chunks[-1] == b"":
        chunks.pop()
    lines: list = []
    for chunk in chunks:
        try:
            lines.append(chunk.rstrip(b"\r").decode("utf-8"))
        except UnicodeDecodeError:
            lines.append(chunk)
    return lines


def _read_tsv(path: Path, strict: bool) -> tuple[Corpus, ReadReport]:
    pairs: list[SentencePair] = []
    seen: set[int] = set()
    skipped = 0
    reasons: list[str] = []
    lines = _read_lines(path)
    for line_no, line in enumerate(lines, start=1):
        try:
            if isinstance(line, bytes):
                raise MalformedLine(str(path), line_no, "invalid UTF-8")
            cols = line.split("\t")
            if len(cols) != 3:
                raise MalformedLine(str(path), line_no, f"expected 3 columns, got {len(cols)}")
            try:
                record_id = int(cols[0])
            except ValueError:
                raise MalformedLine(str(path), line_no, f"invalid id {cols[0]!r}") from None
            if record_id < 0:
                raise MalformedLine(str(path), line_no, f"negative id {record_id}")
            if record_id in seen:
                raise DuplicateId(record_id, str(path))
            _check_pair(record_id, cols[1], cols[2], str(path), line_no)
        except (MalformedLine, DuplicateId) as err:
            if strict:
                raise
            skipped += 1
            reasons.append(str(err))
            continue
        seen.add(record_id)
        pairs.append(SentencePair(record_id, cols[1], cols[2]))
    return Corpus(tuple(pairs)), ReadReport(total_lines=len(lines), skipped=skipped,
                                            reasons=tuple(reasons))


def _read_moses_pair(src_path: Path, tgt_path: Path, strict: bool) -> tuple[Corpus, ReadReport]:
    src_lines = _read_lines(src_path)
    tgt_lines = _read_lines(tgt_path)
    if len(src_lines) != len(tgt_lines):
        raise AlignmentMismatch(
            f"{src_path} has {len(src_lines)} lines, {tgt_path} has {len(tgt_lines)}")
    pairs: list[SentencePair] = []
    skipped = 0
    reasons: list[str] = []
    for line_no, (src, tgt) in enumerate(zip(src_lines, tgt_lines), start=1):
        record_id = line_no - 1
        try:
            if isinstance(src, bytes) or isinstance(tgt, bytes):
                raise MalformedLine(str(src_path), line_no, "invalid UTF-8")
            _check_pair(record_id, src, tgt, str(src_path), line_no)
        except MalformedLine as err:
            if strict:
                raise
            skipped += 1
            reasons.append(str(err))
            continue
        pairs.append(SentencePair(record_id, src, tgt))
    return Corpus(tuple(pairs)), ReadReport(total_lines=len(src_lines), skipped=skipped,
                                            reasons=tuple(reasons))


def write_corpus(corpus: Corpus, path: str | Path, format: str = "tsv",
                 tgt_path: str | Path | None = None) -> int:
    """Write a corpus back out; returns the number of records written."""
    if format == "tsv":
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for p in corpus:
                fh.write(f"{p.id}\t{p.source}\t{p.target}\n")
        return len(corpus)
    if format == "moses-pair":
        if tgt_path is None:
            raise ValueError("moses-pair format needs tgt_path")
        with open(path, "w", encoding="utf-8", newline="\n") as src_fh, \
                open(tgt_path, "w", encoding="utf-8", newline="\n") as tgt_fh:
            for p in corpus:
                src_fh.write(p.source + "\n")
                tgt_fh.write(p.target + "\n")
        return len(corpus)
    raise ValueError(f"unknown corpus format '{format}'")


def write_scores(corpus: Corpus, keys: Sequence[str], path: str | Path) -> int:
    """Write one JSON-lines sidecar row per record for the listed score keys.

    Every listed key must be present on every record. Rows are ordered by id,
    so parallel producers always persist the same bytes. Values are serialized
    with round-trip-exact decimal representation (json uses repr for floats),
    so read_scores(write_scores(...)) reproduces them bit-exactly.
    """
    rows = []
    for p in sorted(corpus, key=lambda pair: pair.id):
        entries = {}
        for key in keys:
            value = corpus.score(p.id, key)  # raises MissingScore
            if not math.isfinite(value):
                raise NonFiniteScore(p.id, key)
            entries[key] = value
        rows.append({"id": p.id, "scores": entries})
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")
    return len(rows)


def read_scores(corpus: Corpus, path: str | Path) -> tuple[Corpus, ReadReport]:
    """Attach sidecar scores to a corpus by record id.

    Sidecar ids may be a subset or superset of the corpus ids: unknown ids are
    counted and ignored, corpus records without a sidecar row are counted as
    missing. Duplicate sidecar ids and non-finite values reject the file.
    """
    sidecar: dict[int, dict[str, float]] = {}
    lines = _read_lines(Path(path))
    for line_no, line in enumerate(lines, start=1):
        if isinstance(line, bytes):
            raise MalformedLine(str(path), line_no, "invalid UTF-8")
        try:
            row = json.loads(line)
        except json.JSONDecodeError as err:
            raise MalformedLine(str(path), line_no, f"invalid JSON: {err}") from None
        if not isinstance(row, dict) or "id" not in row or "scores" not in row:
            raise MalformedLine(str(path), line_no, "expected object with 'id' and 'scores'")
        record_id = row["id"]
        if not isinstance(record_id, int):
            raise MalformedLine(str(path), line_no, f"non-integer id {record_id!r}")
        if record_id in sidecar:
            raise DuplicateId(record_id, str(path))
        entries = {}
        for key, value in row["scores"].items():
            value = float(value)
            if not math.isfinite(value):
                raise NonFiniteScore(record_id, key)
            entries[key] = value
        sidecar[record_id] = entries

    known = set(corpus.ids())
    unknown = sum(1 for record_id in sidecar if record_id not in known)
    missing = sum(1 for record_id in known if record_id not in sidecar)
    attached = corpus.with_scores({i: e for i, e in sidecar.items() if i in known})
    return attached, ReadReport(total_lines=len(lines), unknown_ids=unknown,
                                missing_ids=missing)


def require_scores(corpus: Corpus, keys: Sequence[str]) -> None:
    """Raise MissingScore unless every record carries every listed key."""
    for p in corpus:
        for key in keys:
            corpus.score(p.id, key)
