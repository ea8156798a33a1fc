import os
from pathlib import Path

import pytest

import saltdialog as sd

DATA = Path(os.environ.get("SALTDIALOG_DATA", Path(__file__).resolve().parents[2] / "data"))


@pytest.fixture(scope="module")
def kb():
    return sd.KnowledgeBase.ingest(DATA / "pork_sample.csv", DATA / "ontology.json")


def test_ingest_and_lookup(kb, tmp_path):
    assert len(kb) == 5
    assert kb.lookup({"food": "pork"}) == [1, 2, 3, 4, 5]
    assert kb.salt_for(2, 100, "grams") == 55.0
    path = tmp_path / "kb.json"
    kb.save(path)
    assert sd.KnowledgeBase.load(path).to_json() == kb.to_json()
    with pytest.raises(sd.SaltDialogError):
        kb.lookup({"cook": "raw"})


def test_parse_description():
    assert sd.parse_description("Pork, raw") == ["pork", "raw"]
    with pytest.raises(sd.SaltDialogError):
        sd.parse_description(" , ")


def test_generate_is_deterministic(kb):
    a, stats = sd.generate(kb, 50, seed=3)
    b, _ = sd.generate(kb, 50, seed=3)
    assert a == b
    assert stats["dialogues"] == 50
    assert len(a["dialogues"]) == 50


def test_correct_overrides_salt(kb):
    belief = {
        "slots": {"food": "pork", "type": "fresh_loin_center_loin_chops_bone-in_separable_lean_and_fat_cooked"},
        "salt_value": 12,
    }
    out = sd.correct(belief, kb)
    assert out["status"] == "retrieved"
    assert out["belief"]["salt_value"] == 55.0
    assert out["record_id"] == 2


def test_belief_text_roundtrip():
    belief = {"slots": {"food": "pork", "cook": "raw"}, "salt_value": 48.0}
    assert sd.parse_belief(sd.serialize_belief(belief)) == belief


def test_evaluate_lifts_corrupted_predictions(kb):
    corpus, _ = sd.generate(kb, 200, seed=7)
    report = sd.evaluate(corpus, kb, "corrupting", seed=7)
    assert report["pre_correction"]["success"] <= 5
    assert report["post_correction"]["success"] >= 60
    with pytest.raises(ValueError):
        sd.evaluate(corpus, kb, "oracle")


def test_metrics():
    assert sd.corpus_bleu(["it is broiled ."], ["it is broiled ."]) == 1.0
    r = sd.readability("It is salt.")
    assert r["words"] == 3


def test_service_conversation(kb):
    service = sd.Service(kb)
    sid = service.create_session()
    script = [
        "How much salt in pork?",
        "100 grams",
        "It is fresh loin center loin chops bone-in separable lean and fat cooked.",
        "It is broiled.",
    ]
    reply = None
    for text in script:
        reply = service.message(sid, text)
        if reply["status"] == "completed":
            break
    assert reply["status"] == "completed"
    assert "55 mg" in reply["reply"]
    assert service.state(sid)["status"] == "completed"
    with pytest.raises(sd.SaltDialogError):
        service.message("missing", "hi")
