import pytest

from semee.model import (
    Direction,
    Instance,
    JudgmentRecord,
    Mention,
    ReasonTag,
    Task,
    validate_instance,
    validate_judgment,
)


def ed_instance(**overrides):
    base = dict(
        id="x1",
        task=Task.ED,
        tokens=("the", "attack", "killed", "two"),
        gold=[Mention("attack", 1, 2, "Conflict.Attack")],
        predicted=[Mention("killed", 2, 3, "Life.Die")],
        ontology=[("Conflict.Attack", ""), ("Life.Die", "")],
    )
    base.update(overrides)
    return Instance(**base)


def test_well_formed_instance_has_no_violations():
    assert validate_instance(ed_instance()) == []


def test_reversed_offsets_violate():
    inst = ed_instance(gold=[Mention("attack", 2, 1, "Conflict.Attack")])
    assert any("start<end violated" in v for v in validate_instance(inst))


def test_eae_requires_anchor():
    inst = ed_instance(task=Task.EAE, gold=[Mention("two", 3, 4, "Victim")], predicted=[])
    assert "anchor required for EAE" in validate_instance(inst)


def test_anchor_on_ed_flagged():
    inst = ed_instance(anchor=Mention("attack", 1, 2, "Conflict.Attack"))
    assert any("anchor present but task is ED" in v for v in validate_instance(inst))


def test_text_must_match_tokens():
    inst = ed_instance(gold=[Mention("assault", 1, 2, "Conflict.Attack")])
    assert any("does not match tokens" in v for v in validate_instance(inst))


def test_duplicate_ontology_labels_flagged():
    inst = ed_instance(ontology=[("A", ""), ("A", "gloss")])
    assert "ontology labels not unique" in validate_instance(inst)


def test_empty_mention_lists_are_legal():
    assert validate_instance(ed_instance(gold=[], predicted=[])) == []


def test_duplicate_gold_mentions_are_preserved():
    m = Mention("attack", 1, 2, "Conflict.Attack")
    inst = ed_instance(gold=[m, m])
    assert len(inst.gold) == 2
    assert validate_instance(inst) == []


def test_mentions_are_sorted_canonically():
    inst = ed_instance(predicted=[
        Mention("killed", 2, 3, "Life.Die"),
        Mention("attack", 1, 2, "Conflict.Attack"),
        Mention("attack", 1, 2, "Aaa.First"),
    ])
    keys = [(m.start, m.end, m.label) for m in inst.predicted]
    assert keys == sorted(keys)


def test_unlocated_mention_is_legal():
    inst = ed_instance(predicted=[Mention("bombing", None, None, "Conflict.Attack")])
    assert validate_instance(inst) == []
    assert not inst.predicted[0].located


def test_judgment_length_law():
    inst = ed_instance()
    ok = JudgmentRecord("x1", Direction.PRECISION, (1,), "", "human:a")
    bad = JudgmentRecord("x1", Direction.PRECISION, (1, 0), "", "human:a")
    assert validate_judgment(ok, inst) == []
    assert any("does not match" in v for v in validate_judgment(bad, inst))


def test_judgment_verdicts_binary():
    inst = ed_instance()
    rec = JudgmentRecord("x1", Direction.RECALL, (2,), "", "human:a")
    assert any("not in {0,1}" in v for v in validate_judgment(rec, inst))


def test_reason_tag_side_check():
    tag = ReasonTag("coreference", "x1", Direction.PRECISION, 0)
    assert tag.category == "coreference"
    with pytest.raises(ValueError):
        ReasonTag("nonsense", "x1", Direction.PRECISION, 0)
