import json
import random

import pytest

from dragoman.errors import EmptyCorpus
from dragoman.metrics import (
    BleuScore,
    EvalPair,
    chrf,
    corpus_bleu,
    sentence_bleu,
    tokenize_13a,
)

from conftest import DATA_DIR


@pytest.fixture(scope="module")
def golden():
    with open(DATA_DIR / "golden_metrics.json", encoding="utf-8") as fh:
        return json.load(fh)


@pytest.fixture(scope="module")
def fixture_eval_pairs():
    hyps = (DATA_DIR / "eval_hyp.txt").read_text(encoding="utf-8").splitlines()
    refs = (DATA_DIR / "eval_ref.txt").read_text(encoding="utf-8").splitlines()
    assert len(hyps) == len(refs) == 50
    return [EvalPair(h, (r,)) for h, r in zip(hyps, refs)]


def test_tokenize_13a_golden_cases(golden):
    for case in golden["tokenizer_13a"]:
        assert tokenize_13a(case["text"]) == case["tokens"]


def test_tokenize_13a_basics():
    assert tokenize_13a("Hello, world!") == ["Hello", ",", "world", "!"]
    assert tokenize_13a("3.5") == ["3.5"]
    assert tokenize_13a("") == []


def test_corpus_bleu_matches_golden(fixture_eval_pairs, golden):
    result = corpus_bleu(fixture_eval_pairs, smoothing="exp")
    g = golden["corpus_bleu"]
    assert result.score == pytest.approx(g["score"], abs=0.01)
    assert result.brevity_penalty == pytest.approx(g["brevity_penalty"], abs=1e-9)
    assert result.hyp_len == g["hyp_len"]
    assert result.ref_len == g["ref_len"]
    for mine, ref in zip(result.precisions, g["precisions"]):
        assert mine == pytest.approx(ref, abs=1e-9)
    unsmoothed = corpus_bleu(fixture_eval_pairs, smoothing="none")
    assert unsmoothed.score == pytest.approx(golden["corpus_bleu_unsmoothed"], abs=0.01)


def test_sentence_bleu_matches_golden(fixture_eval_pairs, golden):
    for pair, expected in zip(fixture_eval_pairs, golden["sentence_bleu"]):
        assert sentence_bleu(pair) == pytest.approx(expected, abs=0.01)


def test_chrf_matches_golden(fixture_eval_pairs, golden):
    assert chrf(fixture_eval_pairs) == pytest.approx(golden["chrf"], abs=0.01)
    assert chrf(fixture_eval_pairs, word_order=2) == pytest.approx(golden["chrfpp"], abs=0.01)


def test_identity_scores_100(fixture_eval_pairs):
    identical = [EvalPair(p.hypothesis, (p.hypothesis,)) for p in fixture_eval_pairs]
    assert round(corpus_bleu(identical).score, 2) == 100.0
    assert round(chrf(identical), 2) == 100.0
    assert round(chrf(identical, word_order=2), 2) == 100.0
    for pair in identical:
        assert round(sentence_bleu(pair), 2) == 100.0


def test_corpus_bleu_zero_without_4gram_match():
    pairs = [EvalPair("a b c d", ("a b x d",))]  # unigrams/bigrams match, no 4-gram
    assert corpus_bleu(pairs, smoothing="none").score == 0.0
    assert corpus_bleu(pairs, smoothing="exp").score > 0.0


def test_clipping_the_the():
    # p1 is clipped at 1/5: "the" appears once in the reference.
    result = corpus_bleu([EvalPair("the the the the the", ("the cat sat",))],
                         smoothing="none")
    assert result.precisions[0] == pytest.approx(1 / 5)
    assert result.score == 0.0
    assert result.brevity_penalty == 1.0  # 5 hyp tokens >= 3 ref tokens


def test_brevity_penalty_boundary():
    short = corpus_bleu([EvalPair("a b", ("a b c d",))], smoothing="exp")
    assert short.brevity_penalty < 1.0
    equal = corpus_bleu([EvalPair("a b c d", ("a b c d",))])
    assert equal.brevity_penalty == 1.0


def test_multi_reference_clip_and_ref_len():
    # Closest reference length ties break toward the shorter reference.
    pair = EvalPair("a b c", ("a b", "a b c d"))
    result = corpus_bleu([pair], smoothing="exp")
    assert result.ref_len == 2
    both = EvalPair("x y", ("x q", "p y"))
    r2 = corpus_bleu([both], smoothing="exp")
    assert r2.precisions[0] == pytest.approx(1.0)  # x from ref1, y from ref2


def test_sentence_bleu_disjoint():
    # Unsmoothed, a zero unigram precision annihilates the score. The exp
    # default invents 1/(2*total) mass instead, exactly like the reference
    # scorer: p1 = 0.5, bp = exp(1 - 2/1), score = 18.394.
    pair = EvalPair("кіт", ("пес спить",))
    assert sentence_bleu(pair, smoothing="none") == 0.0
    import math
    assert sentence_bleu(pair) == pytest.approx(100 * 0.5 * math.exp(-1.0), abs=1e-9)


def test_sentence_bleu_empty_hypothesis_zero():
    assert sentence_bleu(EvalPair("", ("пес спить",))) == 0.0


def test_permutation_invariance(fixture_eval_pairs):
    rng = random.Random(21)
    shuffled = fixture_eval_pairs[:]
    rng.shuffle(shuffled)
    assert corpus_bleu(shuffled, smoothing="exp").score == \
        corpus_bleu(fixture_eval_pairs, smoothing="exp").score
    assert chrf(shuffled) == chrf(fixture_eval_pairs)


def test_single_pair_corpus_equals_sentence_unsmoothed():
    pair = EvalPair("кіт сидить на старому килимку вдома",
                    ("кіт сидить на старому килимку вдень",))
    corpus_score = corpus_bleu([pair], smoothing="none").score
    assert corpus_score == pytest.approx(sentence_bleu(pair, smoothing="none"), abs=1e-9)
    assert corpus_score > 0


def test_bleu_score_invariant_structure(fixture_eval_pairs):
    import math
    result = corpus_bleu(fixture_eval_pairs, smoothing="exp")
    assert isinstance(result, BleuScore)
    assert all(p > 0 for p in result.precisions)
    recomputed = result.brevity_penalty * math.exp(
        sum(math.log(p) for p in result.precisions) / 4) * 100.0
    assert result.score == pytest.approx(recomputed, abs=1e-9)
    assert 0.0 <= result.score <= 100.0


def test_chrf_disjoint_zero():
    assert chrf([EvalPair("abc", ("xyz",))]) == 0.0


def test_chrf_hand_computed_tiny_case():
    # hyp "ab", ref "ac", char orders 1-2, beta 2.
    # order1: hyp{a,b} ref{a,c} match 1 -> P=R=1/2, F=1/2
    # order2: hyp{ab} ref{ac} match 0 -> F=0; average = 25.
    assert chrf([EvalPair("ab", ("ac",))], char_order=2) == pytest.approx(25.0, abs=1e-9)


def test_chrf_excludes_whitespace():
    assert chrf([EvalPair("a b", ("ab",))], char_order=2) == 100.0


def test_chrfpp_word_order_adds_signal():
    # Same character multiset, different word segmentation: chrF identical,
    # chrF++ lower for the reordered hypothesis.
    ref = "кіт спить вдома"
    good = chrf([EvalPair("кіт спить вдома", (ref,))], word_order=2)
    reordered = chrf([EvalPair("вдома кіт спить", (ref,))], word_order=2)
    assert good == 100.0
    assert reordered < good


def test_empty_corpus_raises():
    with pytest.raises(EmptyCorpus):
        corpus_bleu([])
    with pytest.raises(EmptyCorpus):
        chrf([])


def test_eval_pair_requires_reference():
    with pytest.raises(ValueError):
        EvalPair("a", ())
