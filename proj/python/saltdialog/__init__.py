"""Salt-intake dialogue generation, tracking, correction and evaluation."""

import json

from ._core import (
    KnowledgeBase,
    SaltDialogError,
    corpus_bleu,
    parse_description,
)
from . import _core

__all__ = [
    "KnowledgeBase",
    "SaltDialogError",
    "Service",
    "corpus_bleu",
    "correct",
    "evaluate",
    "generate",
    "parse_belief",
    "parse_description",
    "readability",
    "serialize_belief",
]


def generate(kb, n, seed=0, **options):
    """Return (corpus, stats) as plain dicts."""
    corpus, stats = _core.generate(kb, n, seed, **options)
    return json.loads(corpus), json.loads(stats)


def correct(belief, kb):
    return json.loads(_core.correct(json.dumps(belief), kb))


def evaluate(corpus, kb, predictor="reference", **options):
    return json.loads(_core.evaluate(json.dumps(corpus), kb, predictor, **options))


def serialize_belief(belief):
    return _core.serialize_belief(json.dumps(belief))


def parse_belief(text):
    return json.loads(_core.parse_belief(text))


def readability(text):
    return json.loads(_core.readability(text))


class Service:
    """In-process dialogue service over a knowledge base."""

    def __init__(self, kb, max_questions=4, max_turns=12):
        self._impl = _core.Service(kb, max_questions, max_turns)

    def create_session(self):
        return self._impl.create_session()

    def message(self, session_id, text):
        return json.loads(self._impl.message(session_id, text))

    def state(self, session_id):
        return json.loads(self._impl.state(session_id))
