import pytest
from hypothesis import given, settings, strategies as st

from aspectscore.corpus import Review
from aspectscore.errors import ConfigError
from aspectscore.textprep import (LemmaRules, TextPipeline, lemmatize, load_lemma_rules, load_stoplist, preprocess,
                                  remove_stopwords, split_sentences, tokenize)

RULES = load_lemma_rules()
STOP = load_stoplist()


@pytest.mark.parametrize("text, expected", [
    ("Great host. Clean room!", ["Great host.", "Clean room!"]),
    ("no punctuation at all", ["no punctuation at all"]),
    ("Wow!! Really? Yes.", ["Wow!!", "Really?", "Yes."]),
    ("Version 2.5 works. Next", ["Version 2.5 works.", "Next"]),
    ("", []),
    ("   ", []),
])
def test_split_sentences(text, expected):
    assert split_sentences(text) == expected


@pytest.mark.parametrize("text, expected", [
    ("The host, was GREAT!", ["the", "host", "was", "great"]),
    ("wi-fi", ["wi", "fi"]),
    ("", []),
    ("room 101 ok", ["room", "101", "ok"]),
    ("snake_case", ["snake", "case"]),
    ("Café über", ["café", "über"]),
])
def test_tokenize(text, expected):
    assert tokenize(text) == expected


def test_remove_stopwords():
    assert remove_stopwords(["the", "host", "was", "great"], {"the", "was"}) == ["host", "great"]
    assert remove_stopwords(["the", "was"], {"the", "was"}) == []
    assert remove_stopwords(["the", "host"], set()) == ["the", "host"]


@pytest.mark.parametrize("token, lemma", [
    ("rooms", "room"),     # s -> ''
    ("was", "was"),        # stem 'wa' is shorter than 3
    ("host", "host"),
    ("dresses", "dress"),
    ("beaches", "beach"),
    ("cities", "city"),
    ("stayed", "stay"),
    ("shopped", "shop"),
    ("tidying", "tidy"),
    ("bus", "bus"),
    ("access", "access"),
    ("children", "child"),
    ("needed", "need"),
])
def test_lemmatize_default_rules(token, lemma):
    assert lemmatize([token], RULES) == [lemma]


def test_first_matching_rule_wins():
    rules = LemmaRules.build([("ies", "y", 1), ("s", "", 1)])
    assert lemmatize(["parties", "cats"], rules) == ["party", "cat"]


def test_exceptions_consulted_first():
    rules = LemmaRules.build([("s", "", 1)], {"mice": "mouse", "news": "news"})
    assert lemmatize(["mice", "news", "dogs"], rules) == ["mouse", "news", "dog"]


def test_growing_rule_rejected():
    with pytest.raises(ConfigError):
        LemmaRules.build([("y", "ies", 1)])


words = st.text(alphabet="abcdeilnsgyuxz", min_size=1, max_size=14)


@settings(max_examples=400)
@given(st.lists(words, max_size=6))
def test_lemmatize_idempotent(tokens):
    once = lemmatize(tokens, RULES)
    assert lemmatize(once, RULES) == once
    assert len(once) == len(tokens)


@given(st.lists(words, max_size=10), st.sets(words, max_size=5))
def test_remove_stopwords_is_order_preserving_subsequence(tokens, stop):
    out = remove_stopwords(tokens, stop)
    it = iter(tokens)
    assert all(t in it for t in out)
    assert remove_stopwords(tokens, set()) == tokens
    assert len(out) <= len(tokens)


def test_preprocess_composition():
    pipe = TextPipeline.default()
    pr = preprocess(Review("L", "r", "The host was great. !!!"), pipe)
    non_empty = [s.tokens for s in pr.sentences if s.tokens]
    assert non_empty == [("host", "great")]
    assert pr.sentence_count == 2


def test_preprocess_empty_text():
    assert preprocess(Review("L", "r", ""), TextPipeline.default()).sentences == ()


def test_preprocess_repeated_sentences():
    pr = preprocess(Review("L", "r", "Clean rooms. Clean rooms."), TextPipeline.default())
    assert [s.tokens for s in pr.sentences] == [("clean", "room"), ("clean", "room")]


def test_preprocess_byte_spans():
    text = "Très propre. Great host!"
    pr = preprocess(Review("L", "r", text), TextPipeline.default())
    raw = text.encode("utf-8")
    assert [raw[o:o + n].decode() for o, n in (s.raw_span for s in pr.sentences)] == ["Très propre.", "Great host!"]


def test_phrase_merge_keeps_wifi_whole():
    pr = preprocess(Review("L", "r", "The Wi-Fi was fast"), TextPipeline.default())
    assert pr.sentences[0].tokens == ("wifi", "fast")


def test_order_flag():
    rules = LemmaRules.build([("s", "", 2)])
    stop = frozenset({"thi"})
    assert TextPipeline(stop, rules).normalize("this") == ["thi"]
    assert TextPipeline(stop, rules, lemmatize_first=True).normalize("this") == []


@settings(max_examples=50)
@given(st.text(max_size=80))
def test_preprocess_deterministic_and_tokens_wellformed(text):
    a = preprocess(Review("L", "r", text), TextPipeline.default())
    b = preprocess(Review("L", "r", text), TextPipeline.default())
    assert a == b
    for s in a.sentences:
        assert all(t and t == t.lower() and not any(c.isspace() for c in t) for t in s.tokens)


def test_default_resources_shape():
    assert 120 <= len(STOP) <= 200
    assert all(w == w.lower() for w in STOP)
