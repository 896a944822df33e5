import json

import pytest

from semee.errors import DuplicateId, LengthMismatch, ParseError, SchemaError
from semee.ingest import (
    convert_textee,
    dataset_stats,
    dump_instances,
    dump_judgments,
    dump_reason_tags,
    load_instances,
    load_judgments,
    load_reason_tags,
)
from semee.model import Direction, Instance, JudgmentRecord, Mention, ReasonTag, Task

from conftest import random_dataset


def write(path, lines):
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return str(path)


def table5_line():
    tokens = "most notably in affirming conformity in all its work to Biblical doctrine .".split()
    return json.dumps({
        "id": "t5", "task": "ED", "tokens": tokens,
        "gold": [{"text": "work", "start": 8, "end": 9, "label": "Business.Employment-Tenure"}],
        "predicted": [
            {"text": "notably", "start": 1, "end": 2, "label": "Business.Employment-Tenure"},
            {"text": "notably", "start": 1, "end": 2, "label": "Education.Education"},
        ],
        "anchor": None,
        "ontology": [["Contact.Meet", ""]],
    })


def test_load_single_instance(tmp_path):
    path = write(tmp_path / "i.jsonl", [table5_line()])
    [inst] = load_instances(path)
    assert inst.gold[0].text == "work"
    assert len(inst.predicted) == 2
    assert {m.text for m in inst.predicted} == {"notably"}


def test_load_empty_file(tmp_path):
    path = tmp_path / "empty.jsonl"
    path.write_text("", encoding="utf-8")
    assert load_instances(str(path)) == []


def test_malformed_json_names_line(tmp_path):
    path = write(tmp_path / "bad.jsonl", [table5_line(), "{nope"])
    with pytest.raises(ParseError) as err:
        load_instances(path)
    assert err.value.line == 2


def test_end_before_start_is_parse_error_on_line_1(tmp_path):
    obj = json.loads(table5_line())
    obj["gold"][0]["start"], obj["gold"][0]["end"] = 9, 8
    path = write(tmp_path / "bad.jsonl", [json.dumps(obj)])
    with pytest.raises(ParseError) as err:
        load_instances(path)
    assert err.value.line == 1
    assert isinstance(err.value, SchemaError)


def test_duplicate_ids_rejected(tmp_path):
    path = write(tmp_path / "dup.jsonl", [table5_line(), table5_line()])
    with pytest.raises(DuplicateId):
        load_instances(path)


def test_load_is_total_over_arbitrary_bytes(tmp_path):
    path = tmp_path / "junk.jsonl"
    path.write_bytes(b"\xff\xfe\x00garbage\nmore")
    with pytest.raises(ParseError):
        load_instances(str(path))


def test_round_trip_is_byte_identical(tmp_path, rng):
    instances = random_dataset(rng, 20)
    p1 = tmp_path / "a.jsonl"
    p2 = tmp_path / "b.jsonl"
    dump_instances(instances, p1)
    again = load_instances(str(p1))
    dump_instances(again, p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_judgment_round_trip_and_checks(tmp_path):
    path = write(tmp_path / "i.jsonl", [table5_line()])
    [inst] = load_instances(path)
    records = [
        JudgmentRecord("t5", Direction.PRECISION, (1, 0), "why", "agent:m", 0),
        JudgmentRecord("t5", Direction.RECALL, (1,), "", "human:a", 0),
    ]
    jpath = tmp_path / "j.jsonl"
    dump_judgments(records, jpath)
    loaded = load_judgments(str(jpath), [inst])
    assert loaded == records
    assert {r.direction for r in loaded} == {Direction.PRECISION, Direction.RECALL}


def test_judgment_length_mismatch(tmp_path):
    path = write(tmp_path / "i.jsonl", [table5_line()])
    [inst] = load_instances(path)
    jpath = write(tmp_path / "j.jsonl", [json.dumps({
        "instance_id": "t5", "direction": "precision", "verdicts": [1, 0, 1],
        "rationale": "", "judge": "human:a", "trial": 0,
    })])
    with pytest.raises(LengthMismatch):
        load_judgments(jpath, [inst])


def test_judgment_unknown_instance(tmp_path):
    jpath = write(tmp_path / "j.jsonl", [json.dumps({
        "instance_id": "ghost", "direction": "recall", "verdicts": [1],
        "rationale": "", "judge": "human:a", "trial": 0,
    })])
    with pytest.raises(SchemaError):
        load_judgments(jpath, [])


def test_reason_tag_round_trip(tmp_path):
    tags = [ReasonTag("coreference", "t5", Direction.PRECISION, 0, "a1")]
    path = tmp_path / "tags.jsonl"
    dump_reason_tags(tags, path)
    assert load_reason_tags(str(path)) == tags


def test_dataset_stats_eae_counts():
    tokens = "she hit him".split()
    inst = Instance(
        id="e1", task=Task.EAE, tokens=tokens,
        gold=[Mention("she", 0, 1, "Agent"), Mention("him", 2, 3, "Victim")],
        predicted=[],
        anchor=Mention("hit", 1, 2, "Conflict.Attack"),
        ontology=[("Conflict.Attack", ""), ("Agent", ""), ("Victim", "")],
    )
    stats = dataset_stats([inst])
    assert stats["EAE"] == {
        "instances": 1, "event_types": 1, "events": 1, "role_types": 2, "arguments": 2,
    }


def test_dataset_stats_empty_and_shared_types():
    assert dataset_stats([])["ED"]["instances"] == 0
    tokens = "a b".split()
    mk = lambda ident: Instance(
        id=ident, task=Task.ED, tokens=tokens,
        gold=[Mention("a", 0, 1, "SameType")], predicted=[], ontology=[("SameType", "")])
    stats = dataset_stats([mk("x"), mk("y")])
    assert stats["ED"]["event_types"] == 1
    assert stats["ED"]["events"] == 2


def test_convert_textee_ed(tmp_path):
    gold = {"doc_id": "d1", "wnd_id": 0, "tokens": ["bombs", "fell"],
            "triggers": [[0, 1, "Conflict.Attack"]]}
    pred = {"doc_id": "d1", "wnd_id": 0, "tokens": ["bombs", "fell"],
            "triggers": [[1, 2, "Conflict.Attack"]]}
    gpath = write(tmp_path / "g.jsonl", [json.dumps(gold)])
    ppath = write(tmp_path / "p.jsonl", [json.dumps(pred)])
    [inst] = convert_textee(gpath, Task.ED, ppath)
    assert inst.id == "d1-0"
    assert inst.gold[0].text == "bombs"
    assert inst.predicted[0].text == "fell"


def test_convert_textee_eae(tmp_path):
    gold = {"doc_id": "d", "wnd_id": 1, "tokens": ["she", "hit", "him"],
            "trigger": [1, 2, "Conflict.Attack"],
            "arguments": [[0, 1, "Agent"], [2, 3, "Victim"]]}
    gpath = write(tmp_path / "g.jsonl", [json.dumps(gold)])
    [inst] = convert_textee(gpath, Task.EAE)
    assert inst.anchor.text == "hit"
    assert {m.label for m in inst.gold} == {"Agent", "Victim"}
    assert inst.predicted == ()
