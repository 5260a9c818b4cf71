"""Tokenization, sentence splitting, substring search, and domain types."""

import random

import pytest

from factweave.core import (
    Corpus,
    Fact,
    PipelineConfig,
    TransferTask,
    derive_seed,
    find_occurrences,
    sentence_split,
    tokenize,
)

WORDS = ["alpha", "beta", "Gamma", "U.S.", "don't", "x", "42", "pain"]
PUNCT_BITS = ["", ".", ",", "!", "(", ")", "..."]


def random_text(rng: random.Random, max_words: int = 12) -> str:
    parts = []
    for _ in range(rng.randrange(max_words + 1)):
        parts.append(
            rng.choice(PUNCT_BITS) + rng.choice(WORDS) + rng.choice(PUNCT_BITS)
        )
    return (" " * rng.randrange(3)).join(parts)


class TestTokenize:
    def test_empty_input(self):
        assert tokenize("").tokens == ()

    def test_detaches_final_period(self):
        seq = tokenize("Melatonin is used.")
        assert seq.surfaces() == ["Melatonin", "is", "used", "."]
        assert seq.normalized() == ["melatonin", "is", "used", ""]

    def test_internal_periods_kept_whole(self):
        seq = tokenize("U.S. News")
        assert seq.surfaces() == ["U.S.", "News"]
        assert seq.normalized() == ["u.s", "news"]

    def test_leading_and_trailing_punctuation(self):
        assert tokenize("(hello)").surfaces() == ["(", "hello", ")"]

    def test_pure_punctuation_chunk(self):
        seq = tokenize("wait ...")
        assert seq.surfaces() == ["wait", ".", ".", "."]
        assert seq.normalized() == ["wait", "", "", ""]

    def test_contraction_kept_whole(self):
        assert tokenize("don't stop").surfaces() == ["don't", "stop"]

    def test_round_trip_property(self):
        rng = random.Random(20240901)
        for _ in range(300):
            text = random_text(rng)
            seq = tokenize(text)
            prev_end = -1
            for tok in seq:
                assert text[tok.char_start : tok.char_end] == tok.surface
                assert tok.char_start >= 0 and tok.char_end > tok.char_start
                assert tok.char_start >= prev_end
                prev_end = tok.char_end
            # everything outside token spans is whitespace
            covered = set()
            for tok in seq:
                covered.update(range(tok.char_start, tok.char_end))
            for i, ch in enumerate(text):
                if i not in covered:
                    assert ch.isspace()

    def test_empty_normalized_only_for_punctuation(self):
        rng = random.Random(7)
        for _ in range(200):
            for tok in tokenize(random_text(rng)):
                if not tok.normalized:
                    assert all(not c.isalnum() for c in tok.surface)


class TestSentenceSplit:
    def test_initial_abbreviation_guard(self):
        assert sentence_split("A. B.") == ["A. B."]

    def test_two_sentences(self):
        assert sentence_split("It works. It helps.") == ["It works.", "It helps."]

    def test_no_terminator(self):
        assert sentence_split("one sentence") == ["one sentence"]

    def test_lowercase_continuation_does_not_split(self):
        assert sentence_split("see etc. and more") == ["see etc. and more"]

    def test_exclamation_and_question(self):
        assert sentence_split("Stop! Why? Go.") == ["Stop!", "Why?", "Go."]

    def test_multi_letter_abbreviation_is_not_guarded(self):
        assert sentence_split("DR. Who arrived.") == ["DR.", "Who arrived."]

    def test_decimal_number_does_not_split(self):
        assert sentence_split("pi is 3.14 roughly") == ["pi is 3.14 roughly"]

    def test_empty_and_whitespace(self):
        assert sentence_split("") == []
        assert sentence_split("   ") == []

    def test_coverage_property(self):
        rng = random.Random(99)
        for _ in range(300):
            text = random_text(rng)
            pieces = sentence_split(text)
            expected = [c for c in text if not c.isspace()]
            got = [c for piece in pieces for c in piece if not c.isspace()]
            assert got == expected


class TestFindOccurrences:
    def test_non_overlapping_leftmost(self):
        assert find_occurrences("aaa", "aa") == [(0, 2)]

    def test_case_insensitive(self):
        text = "Joseph Stalin belongs to the Communist Party."
        assert find_occurrences(text, "joseph stalin") == [(0, 13)]

    def test_no_match(self):
        assert find_occurrences("abc", "z") == []

    def test_empty_needle_rejected(self):
        with pytest.raises(ValueError):
            find_occurrences("abc", "")

    def test_sorted_disjoint_property(self):
        rng = random.Random(5)
        alphabet = "abc"
        for _ in range(500):
            haystack = "".join(rng.choice(alphabet) for _ in range(rng.randrange(30)))
            needle = "".join(rng.choice(alphabet) for _ in range(rng.randrange(1, 4)))
            spans = find_occurrences(haystack, needle)
            for (s1, e1), (s2, e2) in zip(spans, spans[1:]):
                assert e1 <= s2
            for s, e in spans:
                assert haystack[s:e].lower() == needle.lower()


class TestDomainTypes:
    def test_task_requires_topic_in_text(self):
        with pytest.raises(ValueError):
            TransferTask("t", "no mention here", "melatonin", "ibuprofen", "c")

    def test_task_topic_match_is_case_insensitive(self):
        task = TransferTask("t", "Melatonin is used.", "melatonin", "ibuprofen", "c")
        assert task.source_topic == "melatonin"

    def test_task_rejects_empty_fields(self):
        with pytest.raises(ValueError):
            TransferTask("t", "", "a", "b", "c")
        with pytest.raises(ValueError):
            TransferTask("t", "a text", "", "b", "c")
        with pytest.raises(ValueError):
            TransferTask("t", "a text", "a", "", "c")

    def test_corpus_vocabulary_recomputation(self):
        corpus = Corpus.from_texts(["The party is big.", "A small party"])
        expected = set()
        for fact in corpus.facts:
            expected.update(t.normalized for t in tokenize(fact.text) if t.normalized)
        assert corpus.vocabulary == expected

    def test_corpus_indices_dense(self):
        with pytest.raises(ValueError):
            Corpus((Fact(0, "a"), Fact(2, "b")))

    def test_fact_validation(self):
        with pytest.raises(ValueError):
            Fact(-1, "x")
        with pytest.raises(ValueError):
            Fact(0, "   ")

    def test_config_validation(self):
        with pytest.raises(ValueError):
            PipelineConfig(n_pairs=0)
        with pytest.raises(ValueError):
            PipelineConfig(top_p=0.0)
        with pytest.raises(ValueError):
            PipelineConfig(top_p=1.5)
        with pytest.raises(ValueError):
            PipelineConfig(k_retrieve=0)
        with pytest.raises(ValueError):
            PipelineConfig(span_multiplier=0)
        assert PipelineConfig().n_pairs == 10
        assert PipelineConfig().top_p == 0.75
        assert PipelineConfig().k_retrieve == 5
        assert PipelineConfig().span_multiplier == 2
        assert PipelineConfig().max_generation_rounds == 5


class TestDeriveSeed:
    def test_stable_and_distinct(self):
        a = derive_seed(42, "task-1")
        assert a == derive_seed(42, "task-1")
        assert a != derive_seed(42, "task-2")
        assert a != derive_seed(43, "task-1")
        assert 0 <= a < 2**63
