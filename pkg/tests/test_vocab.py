import json
from importlib import resources

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from verco.kitchen.types import SURFACE_TEXTS
from verco.model.vocab import (
    SPECIALS,
    TokenSequence,
    Vocabulary,
    VocabularyError,
    build_default_vocabulary,
)


@pytest.fixture(scope="module")
def vocab():
    return build_default_vocabulary()


def squash(text: str) -> str:
    return "".join(text.split())


class TestTokenizer:
    def test_round_trip_whitespace_only(self, vocab):
        text = "Put the tomato on the  middle table."
        seq = vocab.tokenize(text)
        assert squash(vocab.detokenize(seq.ids)) == squash(text)

    def test_specials_round_trip(self, vocab):
        seq = vocab.tokenize("hello", add_bos=True, add_eos=True)
        assert seq.ids[0] == vocab.bos_id and seq.ids[-1] == vocab.eos_id

    def test_unknown_words_map_to_unk(self, vocab):
        seq = vocab.tokenize("zyzzyva")
        assert seq.ids == (vocab.unk_id,)

    def test_action_phrases_fully_covered(self, vocab):
        for phrase in SURFACE_TEXTS.values():
            seq = vocab.tokenize(phrase)
            assert vocab.unk_id not in seq.ids, phrase

    def test_teacher_directives_fully_covered(self, vocab):
        raw = json.loads(
            resources.files("verco.teacher").joinpath("rules.json").read_text()
        )
        for text in list(raw["directives"].values()) + [raw["default_message"]]:
            seq = vocab.tokenize(text)
            assert vocab.unk_id not in seq.ids, text

    def test_duplicate_tokens_rejected(self):
        with pytest.raises(VocabularyError):
            Vocabulary(SPECIALS + ("a", "a"))

    def test_missing_specials_rejected(self):
        with pytest.raises(VocabularyError):
            Vocabulary(("a", "b"))

    @given(st.text(alphabet="abcdefgh .,", min_size=0, max_size=40))
    @settings(max_examples=50, deadline=None)
    def test_round_trip_property(self, text):
        vocab = build_default_vocabulary(extra_words=set("abcdefgh"))
        seq = vocab.tokenize(text)
        assert squash(vocab.detokenize(seq.ids)) == squash(text)

    def test_sequence_concat(self, vocab):
        left = vocab.tokenize("move", add_bos=True)
        right = vocab.tokenize("up")
        combined = left + right
        assert combined.ids == left.ids + right.ids


class TestPersistence:
    def test_save_load_round_trip(self, vocab, tmp_path):
        path = tmp_path / "vocab.txt"
        vocab.save(path)
        loaded = Vocabulary.load(path)
        assert loaded.tokens == vocab.tokens

    def test_token_sequence_len(self, vocab):
        assert len(TokenSequence((1, 2, 3))) == 3
