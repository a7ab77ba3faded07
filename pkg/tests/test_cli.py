import json

import pytest

from c2f_retrieval.cli import main
from c2f_retrieval.config import EngineConfig, save_config

SYNTH_ARGS = ["--groups", "4", "--group-size", "4", "--distractors", "8", "--seed", "7"]


@pytest.fixture
def engine_config(tmp_path):
    config = EngineConfig(codebook_size=20, d_b=16, h_t=6, sigma=3.25, ma=1, candidates=24)
    return str(save_config(config, tmp_path / "engine.json"))


def _run(capsys, *argv):
    capsys.readouterr()
    code = main(["--log-level", "ERROR", *argv])
    return code, capsys.readouterr().out


def _build_corpus(capsys, root, engine_config, synth_args=SYNTH_ARGS):
    raw, corpus = root / "raw", root / "corpus"
    assert _run(capsys, "synth", str(raw), *synth_args)[0] == 0
    code, _ = _run(
        capsys,
        "extract",
        "--images", str(raw / "images"),
        "--descriptors", str(raw / "descriptors.c2fd"),
        "--groundtruth", str(raw / "groundtruth.txt"),
        "--out", str(corpus),
        "--config", engine_config,
    )
    assert code == 0
    assert _run(capsys, "build", "--corpus", str(corpus))[0] == 0
    return corpus


def test_end_to_end_runs_are_byte_identical(tmp_path, capsys, engine_config):
    outputs = []
    for name in ("first", "second"):
        corpus = _build_corpus(capsys, tmp_path / name, engine_config)
        _, query = _run(capsys, "query", "--corpus", str(corpus), "--id", "0", "--format", "jsonl")
        _, evaluation = _run(capsys, "eval", "--corpus", str(corpus))
        _, report = _run(capsys, "sweep", "--corpus", str(corpus), "--k-values", "1", "4", "24")
        outputs.append((query, evaluation, report))
        outputs.append(tuple((corpus / f).read_bytes() for f in ("codebook.c2fc", "he.c2fe", "index.c2fi")))

    assert outputs[0] == outputs[2]
    assert outputs[1] == outputs[3]
    record = json.loads(outputs[0][0])
    assert record["query_id"] == 0
    assert len(record["entries"]) == 24


def test_eval_reports_perfect_map(tmp_path, capsys, engine_config):
    corpus = _build_corpus(capsys, tmp_path, engine_config)

    code, report = _run(capsys, "eval", "--corpus", str(corpus), "--format", "jsonl")

    assert code == 0
    assert json.loads(report)["mAP"] == pytest.approx(1.0)


def test_query_text_output_lists_every_candidate(tmp_path, capsys, engine_config):
    corpus = _build_corpus(capsys, tmp_path, engine_config)

    code, text = _run(capsys, "query", "--corpus", str(corpus), "--id", "3", "--k", "5")

    assert code == 0
    assert text.startswith("query=3 candidates=5 ")
    assert len(text.strip().splitlines()) == 1 + 1 + 5


def test_query_by_image_file(tmp_path, capsys, engine_config):
    corpus = _build_corpus(capsys, tmp_path, engine_config)
    image = tmp_path / "raw" / "images" / "00002.ppm"

    code, record = _run(
        capsys, "query", "--corpus", str(corpus), "--image", str(image),
        "--mode", "holistic", "--k", "3", "--format", "jsonl",
    )

    assert code == 0
    assert json.loads(record)["entries"][0]["image_id"] == 2


def test_image_query_without_descriptors_fails(tmp_path, capsys, engine_config):
    corpus = _build_corpus(capsys, tmp_path, engine_config)
    image = tmp_path / "raw" / "images" / "00002.ppm"

    assert _run(capsys, "query", "--corpus", str(corpus), "--image", str(image))[0] == 1


def test_unknown_query_id_exits_nonzero(tmp_path, capsys, engine_config):
    corpus = _build_corpus(capsys, tmp_path, engine_config)

    code, out = _run(capsys, "query", "--corpus", str(corpus), "--id", "999")

    assert code == 1
    assert out == ""


def test_tampered_store_is_refused(tmp_path, capsys, engine_config):
    corpus = _build_corpus(capsys, tmp_path, engine_config)
    index = corpus / "index.c2fi"
    index.write_bytes(index.read_bytes()[:-4] + b"\x00\x00\x80\x3f")

    assert _run(capsys, "query", "--corpus", str(corpus), "--id", "0")[0] == 1


def test_run_config_with_other_build_settings_is_refused(tmp_path, capsys, engine_config):
    corpus = _build_corpus(capsys, tmp_path, engine_config)
    other = EngineConfig(codebook_size=20, d_b=16, h_t=6, sigma=3.25, ma=1, candidates=24, alpha=0.8)
    other_path = str(save_config(other, tmp_path / "other.json"))
    image = tmp_path / "raw" / "images" / "00002.ppm"

    code, out = _run(
        capsys, "query", "--corpus", str(corpus), "--config", other_path,
        "--image", str(image), "--mode", "holistic",
    )

    assert code == 1
    assert out == ""


def test_run_config_may_change_query_time_settings(tmp_path, capsys, engine_config):
    corpus = _build_corpus(capsys, tmp_path, engine_config)
    run = EngineConfig(
        codebook_size=20, d_b=16, h_t=6, sigma=3.25, ma=2, candidates=6, weights_enabled=False
    )
    run_path = str(save_config(run, tmp_path / "run.json"))

    code, record = _run(
        capsys, "query", "--corpus", str(corpus), "--config", run_path, "--id", "0", "--format", "jsonl"
    )

    assert code == 0
    assert len(json.loads(record)["entries"]) == 6


def test_corrupt_image_fails_extraction(tmp_path, capsys, engine_config):
    raw = tmp_path / "raw"
    assert _run(capsys, "synth", str(raw), *SYNTH_ARGS)[0] == 0
    (raw / "images" / "00003.ppm").write_bytes(b"P6\n4 4\n255\n\x00\x01")

    code, _ = _run(capsys, "extract", "--images", str(raw / "images"), "--out", str(tmp_path / "c"))

    assert code == 1


def test_ns_score_needs_groups_of_four(tmp_path, capsys, engine_config):
    args = ["--groups", "4", "--group-size", "3", "--distractors", "8", "--seed", "7", "--protocol", "ukbench-like"]
    corpus = _build_corpus(capsys, tmp_path, engine_config, synth_args=args)

    code, _ = _run(capsys, "eval", "--corpus", str(corpus), "--protocol", "ukbench-like")

    assert code == 1


def test_inspect_reports_stores_and_memory(tmp_path, capsys, engine_config):
    corpus = _build_corpus(capsys, tmp_path, engine_config)

    code, text = _run(capsys, "inspect", "--corpus", str(corpus))

    assert code == 0
    assert "codebook: k=20 D=32" in text
    assert "he: d_b=16" in text
    assert "memory.postings_bytes:" in text
    fingerprint = text.splitlines()[0].split(": ")[1]
    assert f"built_under: {fingerprint}" in text


def test_distractor_sweep_command(capsys, engine_config):
    code, report = _run(
        capsys, "sweep", "--distractor-multipliers", "0", "1",
        "--palette-confusers", "1", "--config", engine_config, "--format", "jsonl",
    )

    rows = [json.loads(line) for line in report.splitlines()]
    assert code == 0
    assert [r["distractors"] for r in rows] == [0, 16]
