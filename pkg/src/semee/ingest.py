"""Load and emit instance, judgment, and reason-tag files.

Instance files are UTF-8 JSONL, one object per line:

    {"id": ..., "task": "ED"|"EAE", "tokens": [...],
     "gold": [{"text","start","end","label"}...], "predicted": [...],
     "anchor": {...}|null, "ontology": [["label","gloss"], ...]}

Judgment files mirror :class:`~semee.model.JudgmentRecord`:

    {"instance_id", "direction", "verdicts": [0,1,...], "rationale",
     "judge", "trial"}

The emitters write canonical form (sorted keys, no trailing spaces) so that
emit(load(x)) is byte-identical for canonical files.
"""

from __future__ import annotations

import json

from .errors import DuplicateId, LengthMismatch, ParseError, SchemaError
from .model import (
    Direction,
    Instance,
    JudgmentRecord,
    Mention,
    ReasonTag,
    Task,
    validate_instance,
    validate_judgment,
)


def _read_lines(path):
    with open(path, "rb") as f:
        raw = f.read()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as e:
        raise ParseError(raw[:e.start].count(b"\n") + 1, f"invalid UTF-8: {e.reason}")
    for ln, line in enumerate(text.splitlines(), start=1):
        if line.strip():
            yield ln, line


def _json_line(ln, line):
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as e:
        raise ParseError(ln, f"malformed JSON: {e.msg}")
    if not isinstance(obj, dict):
        raise ParseError(ln, "record is not a JSON object")
    return obj


def _mention_from(obj, ln) -> Mention:
    if not isinstance(obj, dict):
        raise SchemaError(ln, "mention is not an object")
    try:
        return Mention(
            text=str(obj["text"]),
            start=obj.get("start"),
            end=obj.get("end"),
            label=str(obj["label"]),
            ambiguous=bool(obj.get("ambiguous", False)),
        )
    except KeyError as e:
        raise SchemaError(ln, f"mention missing key {e}")


def _instance_from(obj, ln) -> Instance:
    try:
        inst = Instance(
            id=str(obj["id"]),
            task=Task(obj["task"]),
            tokens=tuple(str(t) for t in obj["tokens"]),
            gold=tuple(_mention_from(m, ln) for m in obj.get("gold", [])),
            predicted=tuple(_mention_from(m, ln) for m in obj.get("predicted", [])),
            anchor=_mention_from(obj["anchor"], ln) if obj.get("anchor") else None,
            ontology=tuple((str(l), str(g)) for l, g in obj.get("ontology", [])),
        )
    except SchemaError:
        raise
    except (KeyError, TypeError, ValueError) as e:
        raise SchemaError(ln, f"bad instance record: {e}")
    violations = validate_instance(inst)
    if violations:
        raise SchemaError(ln, "; ".join(violations))
    return inst


def load_instances(path) -> list[Instance]:
    """Read an instance JSONL file; order preserved, ids must be unique."""
    out = []
    seen = set()
    for ln, line in _read_lines(path):
        inst = _instance_from(_json_line(ln, line), ln)
        if inst.id in seen:
            raise DuplicateId(inst.id)
        seen.add(inst.id)
        out.append(inst)
    return out


def _mention_obj(m: Mention) -> dict:
    obj = {"end": m.end, "label": m.label, "start": m.start, "text": m.text}
    if m.ambiguous:
        obj["ambiguous"] = True
    return obj


def instance_obj(inst: Instance) -> dict:
    return {
        "anchor": _mention_obj(inst.anchor) if inst.anchor else None,
        "gold": [_mention_obj(m) for m in inst.gold],
        "id": inst.id,
        "ontology": [[l, g] for l, g in inst.ontology],
        "predicted": [_mention_obj(m) for m in inst.predicted],
        "task": inst.task.value,
        "tokens": list(inst.tokens),
    }


def _dump_jsonl(objs, path):
    with open(path, "w", encoding="utf-8") as f:
        for obj in objs:
            f.write(json.dumps(obj, sort_keys=True, ensure_ascii=False))
            f.write("\n")


def dump_instances(instances, path):
    _dump_jsonl((instance_obj(i) for i in instances), path)


def judgment_obj(rec: JudgmentRecord) -> dict:
    obj = {
        "direction": rec.direction.value,
        "instance_id": rec.instance_id,
        "judge": rec.judge,
        "rationale": rec.rationale,
        "trial": rec.trial,
        "verdicts": list(rec.verdicts),
    }
    if rec.unjudged:
        obj["unjudged"] = True
    return obj


def dump_judgments(records, path):
    _dump_jsonl((judgment_obj(r) for r in records), path)


def load_judgments(path, instances) -> list[JudgmentRecord]:
    """Read a judgment JSONL file and validate every record against the
    mention counts of the given instances."""
    by_id = {inst.id: inst for inst in instances}
    out = []
    for ln, line in _read_lines(path):
        obj = _json_line(ln, line)
        try:
            rec = JudgmentRecord(
                instance_id=str(obj["instance_id"]),
                direction=Direction(obj["direction"]),
                verdicts=tuple(obj["verdicts"]),
                rationale=str(obj.get("rationale", "")),
                judge=str(obj.get("judge", "")),
                trial=int(obj.get("trial", 0)),
                unjudged=bool(obj.get("unjudged", False)),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise SchemaError(ln, f"bad judgment record: {e}")
        inst = by_id.get(rec.instance_id)
        if inst is None:
            raise SchemaError(ln, f"unknown instance id: {rec.instance_id}")
        problems = validate_judgment(rec, inst)
        if problems:
            expected = len(inst.judged_mentions(rec.direction))
            if len(rec.verdicts) != expected:
                raise LengthMismatch(len(rec.verdicts), expected, rec.instance_id)
            raise SchemaError(ln, "; ".join(problems))
        out.append(rec)
    return out


def load_reason_tags(path) -> list[ReasonTag]:
    out = []
    for ln, line in _read_lines(path):
        obj = _json_line(ln, line)
        try:
            out.append(ReasonTag(
                category=str(obj["category"]),
                instance_id=str(obj["instance_id"]),
                direction=Direction(obj["direction"]),
                mention_index=int(obj["mention_index"]),
                annotator=str(obj.get("annotator", "")),
            ))
        except (KeyError, TypeError, ValueError) as e:
            raise SchemaError(ln, f"bad reason tag: {e}")
    return out


def dump_reason_tags(tags, path):
    _dump_jsonl((
        {
            "annotator": t.annotator,
            "category": t.category,
            "direction": t.direction.value,
            "instance_id": t.instance_id,
            "mention_index": t.mention_index,
        }
        for t in tags
    ), path)


def dataset_stats(instances) -> dict:
    """Per-task counts: instances, distinct event types, event mentions,
    distinct role types, and argument mentions."""
    out = {}
    for task in Task:
        subset = [i for i in instances if i.task == task]
        if task == Task.ED:
            event_types = {m.label for i in subset for m in i.gold}
            events = sum(len(i.gold) for i in subset)
            role_types, args = set(), 0
        else:
            event_types = {i.anchor.label for i in subset if i.anchor}
            events = sum(1 for i in subset if i.anchor)
            role_types = {m.label for i in subset for m in i.gold}
            args = sum(len(i.gold) for i in subset)
        out[task.value] = {
            "instances": len(subset),
            "event_types": len(event_types),
            "events": events,
            "role_types": len(role_types),
            "arguments": args,
        }
    return out


def _tokens_text(tokens, start, end):
    return " ".join(tokens[start:end])


def convert_textee(path, task: Task, predictions_path=None) -> list[Instance]:
    """Best-effort, lossy importer for TextEE-style output files.

    Gold records need ``doc_id``/``wnd_id``, ``tokens`` and either
    ``triggers`` ``[[start, end, type], ...]`` (trigger detection) or
    ``trigger`` + ``arguments`` (argument extraction); predictions come from
    a parallel file matched by (doc_id, wnd_id).  Ontology glosses are not
    present in those files, so prompts fall back to mechanical glosses.
    """
    def read(p):
        out = {}
        for ln, line in _read_lines(p):
            obj = _json_line(ln, line)
            try:
                key = (obj["doc_id"], obj["wnd_id"])
            except KeyError as e:
                raise SchemaError(ln, f"record missing {e}")
            out[key] = (obj, ln)
        return out

    golds = read(path)
    preds = read(predictions_path) if predictions_path else {}

    def mentions_from(obj, ln, field, tokens):
        got = obj.get(field) or []
        out = []
        for entry in got:
            try:
                s, e, label = entry[0], entry[1], str(entry[2])
            except (IndexError, TypeError) as e_:
                raise SchemaError(ln, f"bad {field} entry: {e_}")
            out.append(Mention(_tokens_text(tokens, s, e), s, e, label))
        return out

    instances = []
    for key, (obj, ln) in golds.items():
        if "tokens" not in obj:
            raise SchemaError(ln, "record has no tokens; cannot convert")
        tokens = [str(t) for t in obj["tokens"]]
        pred_obj = preds.get(key, ({}, ln))[0]
        inst_id = f"{key[0]}-{key[1]}"
        if task == Task.ED:
            inst = Instance(
                id=inst_id,
                task=task,
                tokens=tuple(tokens),
                gold=tuple(mentions_from(obj, ln, "triggers", tokens)),
                predicted=tuple(mentions_from(pred_obj, ln, "triggers", tokens)),
                ontology=tuple(sorted({
                    (m[2], "") for m in (obj.get("triggers") or [])
                })),
            )
        else:
            trig = obj.get("trigger")
            if not trig:
                raise SchemaError(ln, "argument record has no trigger")
            anchor = Mention(_tokens_text(tokens, trig[0], trig[1]), trig[0], trig[1], str(trig[2]))
            roles = sorted({str(a[2]) for a in (obj.get("arguments") or [])})
            inst = Instance(
                id=inst_id,
                task=task,
                tokens=tuple(tokens),
                gold=tuple(mentions_from(obj, ln, "arguments", tokens)),
                predicted=tuple(mentions_from(pred_obj, ln, "arguments", tokens)),
                anchor=anchor,
                ontology=tuple([(anchor.label, "")] + [(r, "") for r in roles]),
            )
        violations = validate_instance(inst)
        if violations:
            raise SchemaError(ln, "; ".join(violations))
        instances.append(inst)
    return instances
