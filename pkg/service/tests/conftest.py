"""Shared fixtures: template training data, trained checkpoints, live server."""

import random
import socket
import threading
import time

import pytest
import uvicorn

from modelservice import (
    EmbedConfig,
    Embedder,
    SquadRecord,
    TrainSettings,
    create_app,
    prepare_qg_dataset,
    prepare_saqa_dataset,
    train_qg,
    train_saqa,
)
from modelservice.models import save_embedder, save_qg, save_saqa

_CONSONANTS = "bcdfgklmnprstvz"
_VOWELS = "aeiou"


class TemplateWorld:
    """Deterministic generator of template QA records over a small vocabulary."""

    def __init__(self, seed: int, vocab_size: int = 60):
        self.rng = random.Random(seed)
        self.vocab = self._make_vocab(vocab_size)

    def _make_vocab(self, size: int) -> list[str]:
        out: list[str] = []
        seen: set[str] = set()
        while len(out) < size:
            word = "".join(
                self.rng.choice(_CONSONANTS) + self.rng.choice(_VOWELS)
                for _ in range(3)
            )
            if word not in seen:
                seen.add(word)
                out.append(word)
        return out

    def record(self) -> SquadRecord:
        t1, t2, attr, value = self.rng.sample(self.vocab, 4)
        topic = f"{t1} {t2}"
        context = f"the {attr} of {topic} is {value} ."
        question = f"what is the {attr} of {topic} ?"
        return SquadRecord(context, topic, question, value, context.find(value))

    def records(self, n: int) -> list[SquadRecord]:
        return [self.record() for _ in range(n)]


@pytest.fixture(scope="session")
def world() -> TemplateWorld:
    return TemplateWorld(seed=20240811)


@pytest.fixture(scope="session")
def qg_result(world):
    examples = prepare_qg_dataset(world.records(600))
    return train_qg(
        examples, TrainSettings(epochs=20, learning_rate=3e-3, seed=1)
    )


@pytest.fixture(scope="session")
def saqa_result(world):
    examples = prepare_saqa_dataset(world.records(600), None, seed=2)
    return train_saqa(
        examples, TrainSettings(epochs=20, learning_rate=3e-3, seed=1)
    )


@pytest.fixture(scope="session")
def checkpoint_dir(tmp_path_factory, qg_result, saqa_result):
    root = tmp_path_factory.mktemp("checkpoints")
    save_qg(root / "qg", qg_result.model, qg_result.vocab)
    save_saqa(root / "saqa", saqa_result.model, saqa_result.vocab)
    save_embedder(root / "embed", Embedder(EmbedConfig(seed=5)))
    return root


def _free_port() -> int:
    sock = socket.socket()
    sock.bind(("127.0.0.1", 0))
    port = sock.getsockname()[1]
    sock.close()
    return port


@pytest.fixture(scope="session")
def live_server(checkpoint_dir):
    """A real uvicorn server on a local port, serving the trained models."""
    app = create_app(checkpoint_dir)
    port = _free_port()
    config = uvicorn.Config(app, host="127.0.0.1", port=port, log_level="error")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.time() + 20
    while not server.started and time.time() < deadline:
        time.sleep(0.05)
    if not server.started:
        raise RuntimeError("server did not start")
    yield f"http://127.0.0.1:{port}"
    server.should_exit = True
    thread.join(timeout=5)
