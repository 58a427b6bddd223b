import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from capypipe.manifest import (
    FilterVerdict,
    Language,
    ManifestError,
    MediaKind,
    MediaRef,
    PipelineConfig,
    SampleRecord,
    Scenario,
    read_manifest,
    validate,
    write_manifest,
)

from conftest import audio_ref, make_record


def test_read_empty_file(tmp_path):
    p = tmp_path / "m.jsonl"
    p.write_text("")
    assert read_manifest(p) == []


def test_read_preserves_order(tmp_path):
    p = tmp_path / "m.jsonl"
    rows = [
        {"id": i, "scenario": "QA", "language": "ENG", "text": "t"} for i in ("a", "b", "c")
    ]
    p.write_text("\n".join(json.dumps(r) for r in rows) + "\n")
    assert [r.id for r in read_manifest(p)] == ["a", "b", "c"]


def test_duplicate_id_error_names_both_lines(tmp_path):
    p = tmp_path / "m.jsonl"
    rows = [
        json.dumps({"id": rid, "scenario": "QA", "language": "ENG", "text": "t"})
        for rid in ["a", "x", "b", "c", "x"]
    ]
    p.write_text("\n".join(rows) + "\n")
    with pytest.raises(ManifestError, match=r"lines 2 and 5"):
        read_manifest(p)


def test_malformed_line_error_names_line(tmp_path):
    p = tmp_path / "m.jsonl"
    p.write_text('{"id":"a","scenario":"QA","language":"ENG","text":"t"}\n{broken\n')
    with pytest.raises(ManifestError, match=r":2:"):
        read_manifest(p)


def test_write_empty_manifest(tmp_path):
    p = tmp_path / "m.jsonl"
    write_manifest([], p)
    assert p.read_bytes() == b""


def test_write_rejects_invalid_verdict(tmp_path):
    rec = make_record(verdict=FilterVerdict(kept=False))
    with pytest.raises(ManifestError, match="stage"):
        write_manifest([rec], tmp_path / "m.jsonl")


def test_unknown_fields_round_trip(tmp_path):
    p = tmp_path / "m.jsonl"
    row = {"id": "a", "scenario": "QA", "language": "ENG", "text": "t",
           "annotator": "team-3", "weights": [1, 2]}
    p.write_text(json.dumps(row) + "\n")
    recs = read_manifest(p)
    assert recs[0].extra == {"annotator": "team-3", "weights": [1, 2]}
    out = tmp_path / "out.jsonl"
    write_manifest(recs, out)
    assert json.loads(out.read_text())["annotator"] == "team-3"


_scenarios = st.sampled_from(list(Scenario))
_languages = st.sampled_from(list(Language))
_text = st.text(alphabet=st.characters(blacklist_categories=("Cs",)), max_size=40)


@st.composite
def records(draw, ids):
    scenario = draw(_scenarios)
    language = draw(_languages)
    if scenario is Scenario.S2TT:
        language = draw(st.sampled_from([Language.ZH_ENG, Language.ENG_ZH]))
    media = []
    if scenario is Scenario.ASR:
        media = [audio_ref(duration=draw(st.floats(0, 100)), path=draw(ids) + ".wav")]
    return SampleRecord(
        id=draw(ids),
        scenario=scenario,
        language=language,
        text=draw(_text),
        media=tuple(media),
        hypothesis=draw(st.none() | _text),
        source=draw(st.sampled_from(["", "setA", "setB"])),
    )


@settings(max_examples=50, deadline=None)
@given(st.data())
def test_round_trip_property(tmp_path_factory, data):
    ids = st.uuids().map(str)
    recs = data.draw(st.lists(records(ids), max_size=20, unique_by=lambda r: r.id))
    path = tmp_path_factory.mktemp("rt") / "m.jsonl"
    write_manifest(list(recs), path)
    assert read_manifest(path) == list(recs)


def test_round_trip_byte_stable(tmp_path):
    recs = [make_record(id=f"r{i}", text=f"text {i}") for i in range(100)]
    p1, p2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    write_manifest(recs, p1)
    write_manifest(read_manifest(p1), p2)
    assert p1.read_bytes() == p2.read_bytes()


class TestValidate:
    def test_valid_asr(self):
        assert validate(make_record()) == []

    def test_asr_two_audio_refs(self):
        rec = make_record(media=(audio_ref(path="a.wav"), audio_ref(path="b.wav")))
        assert validate(rec) == ["ASR requires exactly one audio ref"]

    def test_s2tt_single_language(self):
        rec = make_record(scenario=Scenario.S2TT, language=Language.ZH, media=())
        assert any("ZH_ENG or ENG_ZH" in v for v in validate(rec))

    def test_empty_id(self):
        assert "id must be non-empty" in validate(make_record(id=""))

    def test_bad_image_dims(self):
        ref = MediaRef(kind=MediaKind.IMAGE, path="i.ppm", width=0, height=10)
        rec = make_record(scenario=Scenario.CAPTION, media=(ref,))
        assert any("width" in v for v in validate(rec))

    def test_bad_audio_fields(self):
        ref = MediaRef(kind=MediaKind.AUDIO, path="a.wav", duration=-1.0, sample_rate=0)
        rec = make_record(scenario=Scenario.QA, media=(ref,))
        issues = validate(rec)
        assert any("duration" in v for v in issues)
        assert any("sample_rate" in v for v in issues)

    def test_dropped_verdict_needs_stage(self):
        rec = make_record(verdict=FilterVerdict(kept=False, stage="x"))
        assert any("metric_name" in v for v in validate(rec))


class TestConfig:
    def test_defaults(self):
        cfg = PipelineConfig()
        assert cfg.wer_threshold == 0.3
        assert cfg.cell_size == 448
        assert cfg.video_frame_cap == 128

    def test_invalid_threshold(self):
        with pytest.raises(ValueError, match="wer_threshold"):
            PipelineConfig(wer_threshold=0.0)

    def test_invalid_max_slices(self):
        with pytest.raises(ValueError, match="max_slices"):
            PipelineConfig(max_slices=10)

    def test_from_file_and_overrides(self, tmp_path):
        p = tmp_path / "cfg.json"
        p.write_text(json.dumps({"wer_threshold": 0.2, "max_slices": 4}))
        cfg = PipelineConfig.from_file(p, max_slices=9)
        assert cfg.wer_threshold == 0.2
        assert cfg.max_slices == 9

    def test_from_file_unknown_key(self, tmp_path):
        p = tmp_path / "cfg.json"
        p.write_text(json.dumps({"no_such_option": 1}))
        with pytest.raises(ManifestError, match="no_such_option"):
            PipelineConfig.from_file(p)
