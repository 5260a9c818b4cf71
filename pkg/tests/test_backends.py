"""Rule backend behavior, guidance construction, and the HTTP wire client."""

import json
import math
import random
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest

from factweave.backends import (
    EMBED_DIM,
    EmbedRequest,
    HttpBackend,
    MockBackend,
    NeighborLexicon,
    ProtocolError,
    QaRequest,
    QgRequest,
    TransportError,
    build_guidance,
)

STALIN_FACT = "the party of joseph stalin is communist party ."
MANDELA_FACT = "the party of nelson mandela is anc ."


@pytest.fixture(scope="module")
def backend():
    return MockBackend()


class TestMockQg:
    def test_template_inversion(self, backend):
        resp = backend.generate_pairs(
            QgRequest(STALIN_FACT, "joseph stalin", 10, 0.75), seed=0
        )
        assert ("what is the party of joseph stalin ?", "communist party") in resp.pairs

    def test_num_samples_zero_rejected(self):
        with pytest.raises(ValueError):
            QgRequest(STALIN_FACT, "joseph stalin", 0, 0.75)

    def test_top_p_bounds(self):
        with pytest.raises(ValueError):
            QgRequest(STALIN_FACT, "joseph stalin", 1, 0.0)
        with pytest.raises(ValueError):
            QgRequest(STALIN_FACT, "joseph stalin", 1, 1.2)

    def test_no_template_match(self, backend):
        resp = backend.generate_pairs(
            QgRequest("nothing useful here", "joseph stalin", 5, 0.75), seed=0
        )
        assert resp.pairs == ()

    def test_multiple_sentences_in_one_context(self, backend):
        context = "the a of t is u . the b of t is v ."
        resp = backend.generate_pairs(QgRequest(context, "t", 10, 0.75), seed=0)
        assert resp.pairs == (
            ("what is the a of t ?", "u"),
            ("what is the b of t ?", "v"),
        )

    def test_num_samples_caps_output(self, backend):
        context = "the a of t is u . the b of t is v ."
        resp = backend.generate_pairs(QgRequest(context, "t", 1, 0.75), seed=0)
        assert len(resp.pairs) == 1

    def test_deterministic_across_seeds(self, backend):
        req = QgRequest(STALIN_FACT, "joseph stalin", 10, 0.75)
        assert backend.generate_pairs(req, 1) == backend.generate_pairs(req, 999)


class TestMockQa:
    def test_extracts_matching_value(self, backend):
        resp = backend.answer_span(
            QaRequest(
                "what is the party of nelson mandela ?",
                "communist party",
                (MANDELA_FACT,),
                4,
            )
        )
        assert not resp.no_answer
        assert resp.answer == "anc"
        assert MANDELA_FACT[resp.char_start : resp.char_end] == "anc"

    def test_specificity_tie_broken_by_context_index(self, backend):
        # both candidates are 1 vs 3 tokens against a 2-token guidance:
        # |1-2| == |3-2|, so the earlier context wins
        long_fact = "the party of nelson mandela is african national congress ."
        req = QaRequest(
            "what is the party of nelson mandela ?",
            "communist party",
            (MANDELA_FACT, long_fact),
            6,
        )
        assert backend.answer_span(req).answer == "anc"
        flipped = QaRequest(
            "what is the party of nelson mandela ?",
            "communist party",
            (long_fact, MANDELA_FACT),
            6,
        )
        assert backend.answer_span(flipped).answer == "african national congress"

    def test_specificity_bonus_prefers_matching_length(self, backend):
        short_fact = "the home of nelson mandela is soweto ."
        long_fact = "the home of nelson mandela is a quiet suburb near johannesburg ."
        req = QaRequest(
            "what is the home of nelson mandela ?",
            "soviet union",  # 2 tokens
            (long_fact, short_fact),
            12,
        )
        # 1-token answer has distance 1; the 7-token answer has distance 5
        assert backend.answer_span(req).answer == "soweto"

    def test_topic_match_outranks_topicless(self, backend):
        other = "the party of someone else is apc ."
        req = QaRequest(
            "what is the party of nelson mandela ?",
            "communist party",
            (other, MANDELA_FACT),
            4,
        )
        resp = backend.answer_span(req)
        assert resp.answer == "anc"
        assert resp.context_index == 1

    def test_generic_question_matches_any_topic(self, backend):
        resp = backend.answer_span(
            QaRequest("what is the party of ?", "communist party", (MANDELA_FACT,), 4)
        )
        assert resp.answer == "anc"

    def test_span_length_cap_truncates(self, backend):
        long_fact = "the party of nelson mandela is african national congress ."
        resp = backend.answer_span(
            QaRequest(
                "what is the party of nelson mandela ?", "anc", (long_fact,), 2
            )
        )
        assert resp.answer == "african national"
        assert long_fact[resp.char_start : resp.char_end] == resp.answer

    def test_no_answer_when_no_attribute_matches(self, backend):
        resp = backend.answer_span(
            QaRequest(
                "what is the founder of nelson mandela ?",
                "x",
                (MANDELA_FACT,),
                3,
            )
        )
        assert resp.no_answer
        assert resp.score == float("-inf")

    def test_unparseable_question_gives_no_answer(self, backend):
        resp = backend.answer_span(QaRequest("when was it?", "x", (MANDELA_FACT,), 3))
        assert resp.no_answer

    def test_empty_contexts_rejected(self):
        with pytest.raises(ValueError):
            QaRequest("what is the a of b ?", "x", (), 3)

    def test_max_span_tokens_validated(self):
        with pytest.raises(ValueError):
            QaRequest("what is the a of b ?", "x", ("ctx",), 0)


class TestMockEmbed:
    def test_identical_texts_identical_vectors(self, backend):
        resp = backend.embed(EmbedRequest(("same text", "same text")))
        assert resp.vectors[0] == resp.vectors[1]
        assert len(resp.vectors[0]) == EMBED_DIM

    def test_hashed_counts(self, backend):
        resp = backend.embed(EmbedRequest(("a a b", "a b")))
        dot = lambda u, v: sum(x * y for x, y in zip(u, v))
        assert dot(resp.vectors[0], resp.vectors[0]) == 5.0
        assert dot(resp.vectors[1], resp.vectors[1]) == 2.0

    def test_empty_list_rejected(self):
        with pytest.raises(ValueError):
            EmbedRequest(())

    def test_subset_self_similarity(self, backend):
        rng = random.Random(13)
        words = ["w%d" % i for i in range(8)]
        for _ in range(50):
            full = [rng.choice(words) for _ in range(rng.randrange(2, 10))]
            subset = full[: rng.randrange(1, len(full))]
            resp = backend.embed(EmbedRequest((" ".join(full), " ".join(subset))))
            dot = lambda u, v: sum(x * y for x, y in zip(u, v))
            full_v, sub_v = resp.vectors
            assert dot(full_v, full_v) >= dot(full_v, sub_v)

    def test_punctuation_ignored(self, backend):
        resp = backend.embed(EmbedRequest(("a b .", "a b")))
        assert resp.vectors[0] == resp.vectors[1]


class TestBuildGuidance:
    def test_seed_pins_neighbor_choice(self):
        lex = NeighborLexicon({"rural": ("suburban", "urban", "provincial")})
        # Random(1).randrange(3) == 0, pinning the first neighbor
        assert random.Random(1).randrange(3) == 0
        assert build_guidance("rural", lex, rng_seed=1) == "suburban"

    def test_singleton_lexicon_is_pure_substitution(self):
        lex = NeighborLexicon({"rural": ("suburban",), "area": ("region",)})
        for seed in range(10):
            assert build_guidance("rural area", lex, seed) == "suburban region"

    def test_unknown_word_unchanged(self):
        lex = NeighborLexicon({"rural": ("suburban",)})
        assert build_guidance("palo alto", lex, 0) == "palo alto"

    def test_empty_answer(self):
        assert build_guidance("", NeighborLexicon({}), 0) == ""

    def test_deterministic_given_seed(self):
        lex = NeighborLexicon({"a": ("x", "y", "z"), "b": ("p", "q")})
        first = build_guidance("a b a", lex, 77)
        assert first == build_guidance("a b a", lex, 77)
        assert len(first.split()) == 3


class TestNeighborLexicon:
    def test_rejects_duplicates(self):
        with pytest.raises(ValueError):
            NeighborLexicon({"a": ("x", "x")})

    def test_rejects_self_only(self):
        with pytest.raises(ValueError):
            NeighborLexicon({"a": ("a",)})

    def test_self_first_with_others_allowed(self):
        NeighborLexicon({"a": ("a", "b")})

    def test_rejects_more_than_twenty(self):
        with pytest.raises(ValueError):
            NeighborLexicon({"a": tuple(f"n{i}" for i in range(21))})

    def test_file_round_trip(self, tmp_path):
        lex = NeighborLexicon({"rural": ("suburban", "urban"), "big": ("large",)})
        path = tmp_path / "lexicon.tsv"
        lex.save(path)
        assert NeighborLexicon.load(path) == lex

    def test_load_dedups_and_truncates(self, tmp_path):
        path = tmp_path / "lexicon.tsv"
        neighbors = "\t".join(["x"] + [f"n{i}" for i in range(25)])
        path.write_text(f"word\t{neighbors}\n", encoding="utf-8")
        loaded = NeighborLexicon.load(path)
        assert len(loaded.neighbors["word"]) == 20
        assert loaded.neighbors["word"][0] == "x"

    def test_load_rejects_headword_only_line(self, tmp_path):
        path = tmp_path / "lexicon.tsv"
        path.write_text("word\n", encoding="utf-8")
        with pytest.raises(ValueError):
            NeighborLexicon.load(path)


class _StubHandler(BaseHTTPRequestHandler):
    """Canned JSON endpoint used to exercise the wire client."""

    responses: dict[str, object] = {}
    requests_seen: list[tuple[str, dict]] = []
    status = 200

    def do_POST(self):
        length = int(self.headers["Content-Length"])
        body = json.loads(self.rfile.read(length))
        _StubHandler.requests_seen.append((self.path, body))
        payload = json.dumps(self.responses.get(self.path, {})).encode()
        self.send_response(self.status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def log_message(self, *args):
        pass


@pytest.fixture()
def stub_server():
    server = HTTPServer(("127.0.0.1", 0), _StubHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    _StubHandler.responses = {}
    _StubHandler.requests_seen = []
    _StubHandler.status = 200
    yield f"http://127.0.0.1:{server.server_port}"
    server.shutdown()
    server.server_close()


class TestHttpBackend:
    def test_qg_wire_format(self, stub_server):
        _StubHandler.responses["/v1/qg"] = {
            "pairs": [{"question": "what is the a of t ?", "entity": "v"}]
        }
        client = HttpBackend(stub_server)
        resp = client.generate_pairs(QgRequest("ctx", "t", 3, 0.75), seed=11)
        assert resp.pairs == (("what is the a of t ?", "v"),)
        path, body = _StubHandler.requests_seen[-1]
        assert path == "/v1/qg"
        assert body == {
            "context": "ctx",
            "topic": "t",
            "num_samples": 3,
            "top_p": 0.75,
            "seed": 11,
        }

    def test_qg_rejects_excess_pairs(self, stub_server):
        _StubHandler.responses["/v1/qg"] = {
            "pairs": [{"question": "q", "entity": "e"}] * 3
        }
        client = HttpBackend(stub_server)
        with pytest.raises(ProtocolError):
            client.generate_pairs(QgRequest("ctx", "t", 2, 0.75), seed=0)

    def test_qa_wire_format_and_span_check(self, stub_server):
        _StubHandler.responses["/v1/qa"] = {
            "answer": "anc",
            "score": -1.25,
            "context_index": 0,
            "char_start": 31,
            "char_end": 34,
        }
        client = HttpBackend(stub_server)
        resp = client.answer_span(QaRequest("q ?", "guide", (MANDELA_FACT,), 4))
        assert resp.answer == "anc"
        assert math.isclose(resp.score, -1.25)
        _, body = _StubHandler.requests_seen[-1]
        assert body == {
            "question": "q ?",
            "guidance": "guide",
            "contexts": [MANDELA_FACT],
            "max_span_tokens": 4,
        }

    def test_qa_no_answer(self, stub_server):
        _StubHandler.responses["/v1/qa"] = {"no_answer": True}
        client = HttpBackend(stub_server)
        assert client.answer_span(QaRequest("q ?", "g", ("ctx",), 4)).no_answer

    def test_qa_rejects_mismatched_span(self, stub_server):
        _StubHandler.responses["/v1/qa"] = {
            "answer": "wrong",
            "score": 0.0,
            "context_index": 0,
            "char_start": 0,
            "char_end": 5,
        }
        client = HttpBackend(stub_server)
        with pytest.raises(ProtocolError):
            client.answer_span(QaRequest("q ?", "g", (MANDELA_FACT,), 4))

    def test_qa_rejects_overlong_answer(self, stub_server):
        _StubHandler.responses["/v1/qa"] = {
            "answer": "the party of",
            "score": 0.0,
            "context_index": 0,
            "char_start": 0,
            "char_end": 12,
        }
        client = HttpBackend(stub_server)
        with pytest.raises(ProtocolError):
            client.answer_span(QaRequest("q ?", "g", (MANDELA_FACT,), 2))

    def test_embed_wire_format(self, stub_server):
        _StubHandler.responses["/v1/embed"] = {"vectors": [[1.0, 2.0], [3.0, 4.0]]}
        client = HttpBackend(stub_server)
        resp = client.embed(EmbedRequest(("x", "y")))
        assert resp.vectors == ((1.0, 2.0), (3.0, 4.0))
        _, body = _StubHandler.requests_seen[-1]
        assert body == {"texts": ["x", "y"]}

    def test_embed_length_mismatch(self, stub_server):
        _StubHandler.responses["/v1/embed"] = {"vectors": [[1.0]]}
        client = HttpBackend(stub_server)
        with pytest.raises(ProtocolError):
            client.embed(EmbedRequest(("x", "y")))

    def test_embed_rejects_non_finite(self, stub_server):
        _StubHandler.responses["/v1/embed"] = {"vectors": [[float("nan")]]}
        client = HttpBackend(stub_server)
        with pytest.raises(ProtocolError):
            client.embed(EmbedRequest(("x",)))

    def test_server_error_is_transport_error(self, stub_server):
        _StubHandler.status = 500
        client = HttpBackend(stub_server)
        with pytest.raises(TransportError):
            client.embed(EmbedRequest(("x",)))

    def test_unreachable_server_is_transport_error(self):
        client = HttpBackend("http://127.0.0.1:9", timeout_ms=300)
        with pytest.raises(TransportError):
            client.embed(EmbedRequest(("x",)))
