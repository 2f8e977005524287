"""Shared corpus builders and synthetic text generators."""

import random
from pathlib import Path

import pytest

from dragoman.corpus import Corpus, SentencePair, corpus_from_pairs

DATA_DIR = Path(__file__).parent / "data"

# Character pools for synthetic monolingual text. The Ukrainian pool carries
# і/ї/є/ґ, the Russian-like pool ы/ъ/э/ё, so order-3 profiles separate them.
LATIN_ALPHA = "etaoinshrdlucmfwypvbgk"
CYRILLIC_UK_ALPHA = "оанівиертсклудмпзяьбгйчжшхцюєїґф"
CYRILLIC_RU_ALPHA = "оаниеытрсвлкмдпуязыъбгйчжшхэёцф"

EN_TRAIN = [
    "The train arrives at the station every morning at eight.",
    "She wrote a long letter to her grandmother last Sunday.",
    "Heavy rain kept falling over the old town all day long.",
    "The students will take their mathematics exam tomorrow.",
    "He walks slowly across the ancient stone bridge.",
    "Coffee with milk and sugar is my favourite morning drink.",
    "The museum is open every day except for Monday.",
    "We are going to the seaside together this summer.",
    "The doctor advised more rest and plenty of water.",
    "This street leads directly to the central city park.",
    "The library closes at nine o'clock in the evening.",
    "Children play in the courtyard after school ends.",
    "An important conference will take place next week.",
    "He forgot his umbrella at home again this morning.",
    "Tasty soup is cooked with beets, cabbage and carrots.",
    "The bus was twenty minutes late because of traffic.",
    "The mountain peaks stay covered with snow even in summer.",
    "Yesterday we watched an interesting film about space.",
    "Her voice sounded calm and confident on the phone.",
    "The river flows quietly through the whole city.",
    "The government announced a new support program for small business.",
    "This sentence was translated automatically by a machine.",
    "Two lion cubs were born in the city zoo last month.",
    "Passengers are waiting on platform number three.",
    "The phone battery died right before an important call.",
    "Freedom is the key word of this remarkable book.",
    "The bread is fresh from the oven and still warm.",
    "The team works on the project day and night.",
    "Winter came early this year with frost and wind.",
    "Thank you very much for all of your kind help.",
]


def uk_train_texts() -> list:
    return (DATA_DIR / "eval_ref.txt").read_text(encoding="utf-8").splitlines()


def synth_word(rng: random.Random, alphabet: str) -> str:
    return "".join(rng.choice(alphabet) for _ in range(rng.randint(2, 7)))


def synth_sentence(rng: random.Random, alphabet: str, n_words: int = 5) -> str:
    return " ".join(synth_word(rng, alphabet) for _ in range(n_words))


def synth_corpus(n: int, seed: int = 0, src_alpha: str = LATIN_ALPHA,
                 tgt_alpha: str = CYRILLIC_UK_ALPHA, n_words: int = 4) -> Corpus:
    rng = random.Random(seed)
    return corpus_from_pairs(
        (i, synth_sentence(rng, src_alpha, n_words), synth_sentence(rng, tgt_alpha, n_words))
        for i in range(n))


def tiny_corpus() -> Corpus:
    return corpus_from_pairs([(0, "cat", "кіт"), (1, "dog", "пес"), (2, "house", "дім")])


@pytest.fixture
def fixture_pairs() -> list:
    hyps = (DATA_DIR / "eval_hyp.txt").read_text(encoding="utf-8").splitlines()
    refs = (DATA_DIR / "eval_ref.txt").read_text(encoding="utf-8").splitlines()
    return list(zip(hyps, refs))


def build_filter_workspace(root: Path, n_clean: int = 900, n_bad: int = 99,
                           seed: int = 0, profile_sentences: int = 4000,
                           min_conf: float = 0.5) -> dict:
    """Materialize a complete phase-1 run directory.

    Synthetic en-like/uk-like corpus with three kinds of injected noise
    (shuffled targets, wrong-script targets, length-exploded targets), trained
    language profiles and character LMs, a sim sidecar whose values mark the
    misaligned pairs, a filter spec with the BPC bound calibrated on a held-out
    clean sample, and the run config wiring it all together.
    """
    from dragoman import charlm, langid
    from dragoman.config import write_kv

    root.mkdir(parents=True, exist_ok=True)
    rng = random.Random(seed)

    def en_sentence():
        return synth_sentence(rng, LATIN_ALPHA, rng.randint(3, 6))

    def uk_sentence():
        return synth_sentence(rng, CYRILLIC_UK_ALPHA, rng.randint(3, 6))

    en_texts = [en_sentence() for _ in range(profile_sentences)]
    uk_texts = [uk_sentence() for _ in range(profile_sentences)]
    en_profile = langid.train_profile(en_texts, "en")
    uk_profile = langid.train_profile(uk_texts, "uk")
    langid.save_profile(en_profile, root / "en.profile")
    langid.save_profile(uk_profile, root / "uk.profile")

    src_lm = charlm.train_lm(en_texts[:500], order=3, smoothing="witten_bell")
    tgt_lm = charlm.train_lm(uk_texts[:500], order=3, smoothing="witten_bell")
    charlm.save_lm(src_lm, root / "en.clm")
    charlm.save_lm(tgt_lm, root / "uk.clm")

    # BPC bound calibrated on a held-out clean sample, with a one-bit margin.
    calib = [charlm.bits_per_char(src_lm, en_sentence())
             + charlm.bits_per_char(tgt_lm, uk_sentence()) for _ in range(300)]
    max_bpc_sum = max(calib) + 1.0

    clean = [(en_sentence(), uk_sentence()) for _ in range(n_clean)]
    records = [("clean", src, tgt) for src, tgt in clean]
    kinds = ("shuffled", "wrong_script", "exploded")
    for j in range(n_bad):
        kind = kinds[j % 3]
        src = en_sentence()
        if kind == "shuffled":
            tgt = clean[rng.randrange(n_clean)][1]
        elif kind == "wrong_script":
            tgt = en_sentence()
        else:
            tgt = uk_sentence() * 12
        records.append((kind, src, tgt))
    rng.shuffle(records)

    corpus_lines = []
    sidecar_lines = []
    bad_ids = {}
    clean_ids = []
    for i, (kind, src, tgt) in enumerate(records):
        corpus_lines.append(f"{i}\t{src}\t{tgt}")
        if kind in ("shuffled", "wrong_script"):
            sim = rng.uniform(0.3, 0.7)
        else:
            sim = rng.uniform(0.92, 0.99)
        sidecar_lines.append('{"id": %d, "scores": {"sim": %r}}' % (i, sim))
        if kind == "clean":
            clean_ids.append(i)
        else:
            bad_ids[i] = kind
    (root / "corpus.tsv").write_text("\n".join(corpus_lines) + "\n", encoding="utf-8")
    (root / "sim.jsonl").write_text("\n".join(sidecar_lines) + "\n", encoding="utf-8")

    write_kv(root / "spec.cfg", {
        "src_lang": "en", "tgt_lang": "uk", "min_lang_conf": repr(min_conf),
        "max_bpc_sum": repr(max_bpc_sum), "min_similarity": "0.91",
        "max_len_diff": "50", "output_order": "input",
    })
    write_kv(root / "filter.cfg", {
        "corpus": "corpus.tsv", "filter_spec": "spec.cfg",
        "profiles": "en.profile,uk.profile", "src_lm": "en.clm", "tgt_lm": "uk.clm",
        "sidecars": "sim.jsonl", "output_dir": "out",
    })
    return {"root": root, "config": root / "filter.cfg", "out_dir": root / "out",
            "bad_ids": bad_ids, "clean_ids": clean_ids, "max_bpc_sum": max_bpc_sum}
