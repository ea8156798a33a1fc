import json
import os
import re
import signal
import subprocess
import time
import urllib.error
import urllib.request
from pathlib import Path

import pytest

BIN = os.environ.get("SALTDIALOG_BIN", "saltdialog")
DATA = Path(os.environ.get("SALTDIALOG_DATA", Path(__file__).resolve().parents[2] / "data"))
PORK = DATA / "pork_sample.csv"
ONTOLOGY = DATA / "ontology.json"

SCRIPT = [
    "How much salt in pork?",
    "100 grams",
    "It is fresh loin center loin chops bone-in separable lean and fat cooked.",
    "It is broiled.",
]


def run(*args, env=None, check=None):
    full_env = dict(os.environ)
    full_env.pop("SALT_DIALOG_CONFIG", None)
    if env:
        full_env.update(env)
    proc = subprocess.run([BIN, *map(str, args)], capture_output=True, text=True, env=full_env, timeout=120)
    if check is not None:
        assert proc.returncode == check, proc.stderr
    return proc


@pytest.fixture(scope="module")
def kb(tmp_path_factory):
    out = tmp_path_factory.mktemp("kb") / "kb.json"
    run("ingest", "--kb", PORK, "--ontology", ONTOLOGY, "--out", out, check=0)
    return out


@pytest.fixture(scope="module")
def corpus(tmp_path_factory, kb):
    out = tmp_path_factory.mktemp("corpus") / "corpus.json"
    run("generate", "--kb", kb, "-n", 300, "--seed", 7, "--out", out, check=0)
    return out


# ---- ingest / ontology ---------------------------------------------------------------


def test_ingest_writes_kb_and_report(tmp_path):
    out = tmp_path / "kb.json"
    proc = run("ingest", "--kb", PORK, "--ontology", ONTOLOGY, "--out", out, check=0)
    report = json.loads(proc.stdout)
    assert report["accepted"] == 5
    assert report["rejected"] == []
    records = json.loads(out.read_text())["records"]
    assert [r["salt_mg"] for r in records] == [48, 55, 58, 63, 76]


def test_ingest_rejects_bad_rows(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text(
        "raw_description,salt_mg,serving_weight,serving_metric\n"
        '"Beef, raw",-1,100,grams\n'
        '"Pork, raw",12,100,grams\n'
    )
    proc = run("ingest", "--kb", bad, "--ontology", ONTOLOGY, "--out", tmp_path / "kb.json", check=1)
    report = json.loads(proc.stdout)
    assert report["accepted"] == 1
    assert report["rejected"][0]["row"] == 1


def test_ingest_empty_file(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    proc = run("ingest", "--kb", empty, "--ontology", ONTOLOGY, "--out", tmp_path / "kb.json", check=0)
    assert json.loads(proc.stdout)["accepted"] == 0


def test_ingest_missing_file_is_usage_error(tmp_path):
    run("ingest", "--kb", tmp_path / "nope.csv", "--ontology", ONTOLOGY, "--out", tmp_path / "kb.json", check=2)


def test_ontology_expand(tmp_path):
    out = tmp_path / "onto.json"
    run("ontology", "expand", "--ontology", ONTOLOGY, "--neighbors", DATA / "neighbors_sample.csv",
        "--out", out, check=0)
    entries = json.loads(out.read_text())["entries"]
    assert entries["steamed"] == "cook"
    assert "kettle" not in entries
    assert "simmered" not in entries


# ---- generate ---------------------------------------------------------------------------


def test_generate_is_reproducible(tmp_path, kb):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    stats = json.loads(run("generate", "--kb", kb, "-n", 100, "--seed", 7, "--out", a, check=0).stdout)
    run("generate", "--kb", kb, "-n", 100, "--seed", 7, "--out", b, check=0)
    assert a.read_bytes() == b.read_bytes()
    assert stats["dialogues"] == 100
    assert 5 <= stats["avg_turns"] <= 7


def test_generate_sample_kb_has_seven_slots(tmp_path):
    out = tmp_path / "c.json"
    proc = run("generate", "--kb", DATA / "sample_foods.csv", "--ontology", ONTOLOGY, "-n", 1000, "--seed", 7,
               "--out", out, check=0)
    assert json.loads(proc.stdout)["slot_count"] == 7


def test_generate_zero_dialogues_is_usage_error(tmp_path, kb):
    run("generate", "--kb", kb, "-n", 0, "--out", tmp_path / "c.json", check=2)


def test_config_file_from_environment(tmp_path, kb):
    cfg = tmp_path / "cfg.toml"
    cfg.write_text("[generate]\nseed = 11\n")
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run("generate", "--kb", kb, "-n", 20, "--out", a, env={"SALT_DIALOG_CONFIG": str(cfg)}, check=0)
    run("generate", "--kb", kb, "-n", 20, "--seed", 11, "--out", b, check=0)
    assert a.read_bytes() == b.read_bytes()


# ---- evaluate -----------------------------------------------------------------------------


def evaluate(kb, corpus, *extra):
    proc = run("evaluate", "--kb", kb, "--corpus", corpus, "--json", *extra, check=0)
    return json.loads(proc.stdout)


def test_evaluate_reference_is_exact_on_slots(kb, corpus):
    report = evaluate(kb, corpus)
    assert report["pre_correction"]["slot_accuracy"] == 100.0
    assert "post_correction" not in report


def test_evaluate_corrupting_with_correction(kb, corpus):
    raw = evaluate(kb, corpus, "--predictor", "corrupting", "--corrupt-seed", 7)
    assert raw["pre_correction"]["success"] < 5
    fixed = evaluate(kb, corpus, "--predictor", "corrupting", "--corrupt-seed", 7, "--ns-correct")
    assert fixed["post_correction"]["success"] >= 60
    assert fixed["post_correction"]["joint_accuracy"] > fixed["pre_correction"]["joint_accuracy"]


def test_evaluate_table_output(kb, corpus):
    proc = run("evaluate", "--kb", kb, "--corpus", corpus, "--ns-correct", check=0)
    assert "Joint Accuracy" in proc.stdout
    assert "post-correction" in proc.stdout


def test_evaluate_bad_corpus_is_data_error(tmp_path, kb):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    run("evaluate", "--kb", kb, "--corpus", bad, check=1)


def test_evaluate_remote_without_endpoint_fails(kb, corpus):
    proc = run("evaluate", "--kb", kb, "--corpus", corpus, "--predictor", "remote")
    assert proc.returncode != 0


# ---- usage ----------------------------------------------------------------------------------


def test_help_and_unknown_flag():
    assert run("--help").returncode == 0
    assert run("generate", "--help").returncode == 0
    assert run("generate", "--bogus").returncode == 2
    assert run().returncode == 2


# ---- serve -----------------------------------------------------------------------------------


def post(url, body):
    req = urllib.request.Request(url, data=json.dumps(body).encode(), headers={"Content-Type": "application/json"})
    with urllib.request.urlopen(req, timeout=10) as res:
        return json.loads(res.read())


@pytest.fixture
def server(kb):
    proc = subprocess.Popen([BIN, "serve", "--kb", str(kb), "--port", "0"], stderr=subprocess.PIPE, text=True)
    base = None
    deadline = time.time() + 20
    while time.time() < deadline:
        line = proc.stderr.readline()
        m = re.search(r"listening on (http://\S+)", line)
        if m:
            base = m.group(1)
            break
    assert base, "server did not report its address"
    yield proc, base
    if proc.poll() is None:
        proc.kill()
        proc.wait()


def test_serve_scripted_conversation(server):
    proc, base = server
    with urllib.request.urlopen(base + "/health", timeout=10) as res:
        assert json.loads(res.read())["status"] == "ok"
    sid = post(base + "/session", {})["id"]
    replies = []
    for text in SCRIPT:
        replies.append(post(f"{base}/session/{sid}/message", {"text": text}))
        if replies[-1]["status"] == "completed":
            break
    assert len(replies) <= 4
    assert replies[-1]["status"] == "completed"
    assert "55 mg" in replies[-1]["reply"]
    with pytest.raises(urllib.error.HTTPError) as err:
        post(f"{base}/session/{sid}/message", {"text": "again"})
    assert err.value.code == 409


def test_serve_stops_on_sigterm(server):
    proc, _ = server
    proc.send_signal(signal.SIGTERM)
    assert proc.wait(timeout=10) == 0


def test_serve_bad_port(kb):
    assert run("serve", "--kb", kb, "--port", 70000).returncode == 1
