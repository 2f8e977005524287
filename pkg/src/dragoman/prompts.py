"""Training/evaluation prompt construction with loss-mask spans.

Training strings wrap the source in literal [INST] .. [/INST] delimiters (not
special vocabulary) followed by a single space and the target. The mask spans
are character offsets covering the instruction region, so trainers can convert
them after tokenization with whatever tokenizer they use. Few-shot prompts
concatenate formatted demonstrations with newlines and end with an open
instruction block for the model to complete.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import EmptyQuery, EmptySource, PoolTooSmall

INST_OPEN = "[INST] "
INST_CLOSE = " [/INST] "

SIM_NGRAM_ORDER = 3


@dataclass(frozen=True)
class Demonstration:
    source: str
    target: str

    def __post_init__(self):
        if not self.source or not self.target:
            raise ValueError("demonstrations need non-empty source and target")


@dataclass(frozen=True)
class MaskedExample:
    text: str
    mask_spans: tuple           # (start, end) character offsets, sorted, disjoint

    def unmasked(self) -> str:
        """The loss-bearing remainder: text minus all masked spans."""
        out = []
        pos = 0
        for start, end in self.mask_spans:
            out.append(self.text[pos:start])
            pos = end
        out.append(self.text[pos:])
        return "".join(out)


def format_pair(source: str, target: str = "") -> MaskedExample:
    """`[INST] {source} [/INST] {target}`; the mask covers everything up to and
    including the separator space, leaving exactly the target unmasked."""
    if not source:
        raise EmptySource("prompt source must be non-empty")
    prefix = f"{INST_OPEN}{source}{INST_CLOSE}"
    return MaskedExample(text=prefix + target, mask_spans=((0, len(prefix)),))


def build_fewshot(demos: Sequence[Demonstration], query_source: str) -> str:
    """Demonstrations separated by newlines, then an open instruction block.

    The output ends with `[/INST] ` (trailing space) awaiting the completion;
    zero demos degrade to the bare query block.
    """
    if not query_source:
        raise EmptyQuery("query source must be non-empty")
    blocks = [format_pair(d.source, d.target).text for d in demos]
    blocks.append(format_pair(query_source).text)
    return "\n".join(blocks)


def contextual_prompt(history: Sequence[tuple], window: int, query_source: str) -> str:
    """Use the most recent `window` (source, hypothesis) pairs as demonstrations.

    Document order is preserved; an empty history (or window 0) degrades to
    the 0-shot prompt.
    """
    if window < 0:
        raise ValueError("window must be >= 0")
    recent = list(history)[-window:] if window else []
    demos = [Demonstration(source, hypothesis) for source, hypothesis in recent]
    return build_fewshot(demos, query_source)


def _char_ngram_counts(text: str) -> dict:
    if len(text) < SIM_NGRAM_ORDER:
        return {text: 1}
    counts: dict[str, int] = {}
    for i in range(len(text) - SIM_NGRAM_ORDER + 1):
        gram = text[i:i + SIM_NGRAM_ORDER]
        counts[gram] = counts.get(gram, 0) + 1
    return counts


def char_ngram_cosine(a: str, b: str) -> float:
    """Cosine similarity between character 3-gram count vectors."""
    ca = _char_ngram_counts(a)
    cb = _char_ngram_counts(b)
    dot = sum(n * cb.get(gram, 0) for gram, n in ca.items())
    if dot == 0:
        return 0.0
    norm_a = math.sqrt(sum(n * n for n in ca.values()))
    norm_b = math.sqrt(sum(n * n for n in cb.values()))
    return dot / (norm_a * norm_b)


def select_demos(pool: Sequence[Demonstration], query_source: str, n: int,
                 similarity=char_ngram_cosine) -> list[Demonstration]:
    """Top-n demonstrations by source similarity to the query.

    Ties break by pool index; the result is ordered most-similar-last so the
    closest demonstration sits adjacent to the query in the prompt.
    """
    if n > len(pool):
        raise PoolTooSmall(f"asked for {n} demonstrations, pool has {len(pool)}")
    scored = sorted(range(len(pool)),
                    key=lambda i: (-similarity(pool[i].source, query_source), i))
    chosen = scored[:n]
    return [pool[i] for i in reversed(chosen)]
