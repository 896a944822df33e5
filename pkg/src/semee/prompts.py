"""Render the four reassessment prompts and the two inference prompts.

The static template text is frozen here; golden-file tests pin the rendered
output byte for byte, so any edit to these strings is a deliberate protocol
change.  Criteria are spliced in as a single numbered sentence; few-shot
examples are extra data blocks (with a worked answer) placed before the
target instance.
"""

from __future__ import annotations

import hashlib
import re
from enum import Enum

from .criteria import CriteriaSet
from .errors import EmptyJudgedSet
from .model import Direction, Instance, Mention, Task
from .spanmark import mark_anchor, mark_spans


class PromptKind(str, Enum):
    ED_PRECISION = "ed_precision"
    ED_RECALL = "ed_recall"
    EAE_PRECISION = "eae_precision"
    EAE_RECALL = "eae_recall"
    ED_INFER = "ed_infer"
    EAE_INFER = "eae_infer"

    @property
    def task(self) -> Task:
        return Task.ED if self.value.startswith("ed_") else Task.EAE

    @property
    def direction(self) -> Direction | None:
        if self.value.endswith("_precision"):
            return Direction.PRECISION
        if self.value.endswith("_recall"):
            return Direction.RECALL
        return None

    @property
    def is_inference(self) -> bool:
        return self.direction is None


def reassessment_kind(task: Task, direction: Direction) -> PromptKind:
    return PromptKind(f"{task.value.lower()}_{direction.value}")


def inference_kind(task: Task) -> PromptKind:
    return PromptKind(f"{task.value.lower()}_infer")


INSTRUCTION = {
    PromptKind.ED_PRECISION: (
        "You are a reassessor designed to reassess predicted event triggers from an event "
        "detection model. Task Description: Refer to a piece of context and golden triggers, "
        "reassess predicted event triggers. A trigger is the key word in the sentence that "
        "most explicitly conveys the occurrence of the event. A predicted trigger can be "
        "reassessed as correct one if it conveys the occurrence of a particular interest "
        "kind of event, even if it does not exactly match any of golden triggers; otherwise, "
        "it is reassessed as incorrect one."
    ),
    PromptKind.ED_RECALL: (
        "You are a reassessor designed to reassess the recall result of an event detection "
        "model. Task Description: According to a piece of context, predicted triggers and "
        "golden triggers, reassess whether each golden trigger is recalled. A trigger is the "
        "key word in the sentence that most explicitly conveys the occurrence of the event. "
        "A golden trigger can be reassessed as recalled one if it can correspond to one or "
        "more predicted triggers that convey the occurrence of an event with the same "
        "interest type, even if it does not exactly match any of predicted triggers; "
        "otherwise, it is reassessed as not recalled one."
    ),
    PromptKind.EAE_PRECISION: (
        "You are a reassessor designed to reassess predicted event arguments from an event "
        "argument extraction model. Task Description: Refer to a piece of context and golden "
        "arguments, reassess predicted event arguments. Arguments have the semantic role "
        "corresponding to the given event trigger by the word span between [t] and [/t]. "
        "A predicted argument can be reassessed as correct one if it have a particular "
        "interest type of role corresponding to the given event trigger, even if it does "
        "not exactly match any of golden arguments; otherwise, it is reassessed as "
        "incorrect one."
    ),
    PromptKind.EAE_RECALL: (
        "You are a reassessor designed to reassess the recall result of an event argument "
        "extraction model. Task Description: According to a piece of context, predicted "
        "arguments and golden arguments, reassess whether each golden argument is recalled. "
        "Arguments have the semantic role corresponding to the given event trigger by the "
        "word span between [t] and [/t]. A golden argument can be reassessed as recalled "
        "one if it can correspond to one or more predicted arguments that have the same "
        "interest type of role corresponding to the given event trigger, even if it does "
        "not exactly match any of predicted arguments; otherwise, it is reassessed as not "
        "recalled one."
    ),
    PromptKind.ED_INFER: (
        "You are an event extractor designed to check for the presence of a specific event "
        "in a piece of context and to locate the corresponding event trigger. Task "
        "Description: Identify all triggers related to the event of interest in the context. "
        "A trigger is the key word in the context that most explicitly conveys the "
        "occurrence of the event."
    ),
    PromptKind.EAE_INFER: (
        "You are an argument extractor designed to check for the presence of arguments "
        "regarding specific roles for an event in a piece of context. Task Description: "
        "Identify all event arguments related to roles of interest in the context. These "
        "arguments should have the semantic role corresponding to the given event trigger "
        "by the word span between [t] and [/t]."
    ),
}

REQUIREMENTS = {
    PromptKind.ED_PRECISION: (
        "When answering, provide your thought process at first, including analyzing the "
        "context, explaining how golden triggers indicate events with a specific type, and "
        "reassessing predicted triggers one by one based on your thought. After that, "
        "answer final reassessment results.",
        "Please answer in the following python dict format: {'Thought Process': {'Context "
        "Analysis': str, 'Gold Triggers': [your explanation for gold trigger 0, your "
        "explanation for gold trigger 1, ...], 'Predicted Triggers': [your reassessment "
        "thought for predicted trigger 0, your reassessment thought for predicted trigger "
        "1, ...]}, 'Final Reassessment Results': [1, 0, ...]}.",
    ),
    PromptKind.ED_RECALL: (
        "When answering, provide your thought process at first, including analyzing the "
        "context, explaining how golden triggers indicate events with a specific type, "
        "finding correspondence with predicted triggers for each golden trigger or "
        "explaining why any correspondence cannot be found, and reassessing golden "
        "triggers one by one based on your thought. After that, answer final reassessment "
        "results.",
        "Please answer in the following python dict format: {'Thought Process': {'Context "
        "Analysis': str, 'Gold Triggers': [your finding or explanation for gold trigger 0, "
        "your finding or explanation for gold trigger 1, ...]}, 'Final Reassessment "
        "Results': [1 , 0 , ...]}.",
    ),
    PromptKind.EAE_PRECISION: (
        "When answering, provide your thought process at first, including analyzing the "
        "context, explaining roles of golden arguments in the event of interest, and "
        "reassessing predicted arguments one by one based on your thought. After that, "
        "answer final reassessment results.",
        "Please answer in the following python dict format: {'Thought Process': {'Context "
        "Analysis': str, 'Gold Arguments': [your explanation for gold argument 0, your "
        "explanation for gold argument 1, ...], 'Predicted Arguments': [your reassessment "
        "thought for predicted argument 0, your reassessment thought for predicted "
        "argument 1, ...]}, 'Final Reassessment Results': [1, 0, ...]}.",
    ),
    PromptKind.EAE_RECALL: (
        "When reassessing, provide your thought process at first, including analyzing the "
        "context, explaining roles of golden arguments in the event of interest, finding "
        "correspondence with predicted arguments for each golden argument or explaining "
        "why any correspondence cannot be found, and reassessing golden arguments one by "
        "one based on your thought. After that, answer final reassessment results.",
        "Please answer in the following python dict format: {'Thought Process': {'Context "
        "Analysis': str, 'Gold Arguments': [your finding or explanation for gold argument "
        "0, your finding or explanation for gold argument 1, ...]}, 'Final Reassessment "
        "Results': [1, 0, ...]}.",
    ),
    PromptKind.ED_INFER: (
        "When extracting, analyzing the context at first. After that, answer extraction "
        "results. You need to extract the span of a extracted trigger as well as its "
        "corresponding event type. Note that there may be zero to plural triggers in the "
        "context. Please answer in the following python dict format: {'Context Analysis': "
        "str, 'Extraction Results': [{'Trigger Span': a span in the context, 'Event Type': "
        "a specific event of interest}, ...]}.",
    ),
    PromptKind.EAE_INFER: (
        "When extracting, analyzing the context at first. After that, answer extraction "
        "results. Note that there may be zero to plural arguments for each role. Please "
        "answer in the following python dict format: {'Context Analysis': str, 'Extraction "
        "Results': {'role1': [str(the argument span), ...(The length of this list depends "
        "on the number of arguments that you extract for this kind of role)], 'role2': "
        "[str, ...], ...}}.",
    ),
}

CRITERIA_PREAMBLE = "There are several rules to follow when reassessing: "
MARKER_LEGEND = (
    "The position of each following trigger is labeled in the context between a pair of "
    "[t] and [/t]."
)
ANSWER_KEY_REASSESS = "Final Reassessment Results"
ANSWER_KEY_INFER = "Extraction Results"


def mechanical_gloss(label: str) -> str:
    words = " ".join(w for w in re.split(r"[._:\-]+", label) if w).lower()
    return f"The event is related to {words}."


def _gloss_for(label: str, ontology) -> str:
    for l, g in ontology:
        if l == label and g:
            return g
    return mechanical_gloss(label)


def _criteria_sentence(kind: PromptKind, criteria: CriteriaSet) -> str:
    items = criteria.rendered(kind.task, kind.direction)
    if not items:
        raise ValueError(f"no criteria apply to {kind.value}")
    numbered = "; ".join(f"({i}) {text}" for i, text in enumerate(items, start=1))
    return f"{CRITERIA_PREAMBLE}{numbered}."


def _mention_line(task: Task, family: str, index: int, m: Mention) -> str:
    if task == Task.ED:
        return f"Trigger {family}.{index}: {m.text} # event type: {m.label}"
    return f"{family} argument {index}: {m.text} # role type: {m.label}"


def _mention_lines(inst: Instance, direction: Direction) -> list[str]:
    gold = [_mention_line(inst.task, "Gold", i, m) for i, m in enumerate(inst.gold)]
    pred = [_mention_line(inst.task, "Pred", j, m) for j, m in enumerate(inst.predicted)]
    # the reference family is listed first, the judged family last
    return gold + pred if direction == Direction.PRECISION else pred + gold


def _event_roles(inst: Instance) -> list[str]:
    label = inst.anchor.label if inst.anchor else ""
    return [l for l, _ in inst.ontology if l != label]


def _data_block(kind: PromptKind, inst: Instance) -> str:
    lines: list[str] = []
    if kind.task == Task.ED:
        header = "Types of events that may occur include:" if kind.is_inference \
            else "Events of interest include:"
        lines.append(header)
        for label, gloss in inst.ontology:
            lines.append(f"    {label}. {gloss or mechanical_gloss(label)}")
        lines.append("Context:")
        if kind.is_inference:
            lines.append("    " + " ".join(inst.tokens))
        else:
            lines.append("    " + mark_spans(inst.tokens, inst.gold, inst.predicted).text)
            lines.append(MARKER_LEGEND)
            lines.extend(_mention_lines(inst, kind.direction))
    else:
        label = inst.anchor.label
        lines.append(f"The event of interest is {label}. {_gloss_for(label, inst.ontology)}")
        roles = _event_roles(inst)
        if kind.is_inference:
            lines.append("Roles of interest include: " + ", ".join(roles) + ".")
        else:
            lines.append("Argument roles of interest: " + repr(roles))
        lines.append("Context:")
        lines.append("    " + mark_anchor(inst.tokens, inst.anchor))
        if not kind.is_inference:
            lines.extend(_mention_lines(inst, kind.direction))
    return "\n".join(lines)


def _worked_answer(kind: PromptKind, shot: Instance) -> str:
    analysis = "The context contains the extractions listed below."
    if kind.task == Task.ED:
        results = [{"Trigger Span": m.text, "Event Type": m.label} for m in shot.gold]
    else:
        results = {role: [] for role in _event_roles(shot)}
        for m in shot.gold:
            results.setdefault(m.label, []).append(m.text)
    return repr({"Context Analysis": analysis, "Extraction Results": results})


def render_prompt(kind: PromptKind, inst: Instance, criteria: CriteriaSet | None = None,
                  shots: tuple[Instance, ...] = ()) -> str:
    """Assemble the full prompt for one instance.

    Raises :class:`EmptyJudgedSet` when a reassessment prompt is requested
    for an empty mention family; callers must short-circuit those instead of
    asking the judge about nothing.
    """
    if kind.task != inst.task:
        raise ValueError(f"prompt kind {kind.value} does not fit a {inst.task.value} instance")
    sections = [INSTRUCTION[kind]]
    if not kind.is_inference:
        if shots:
            raise ValueError("shots are only supported for inference prompts")
        judged = inst.judged_mentions(kind.direction)
        if not judged:
            raise EmptyJudgedSet(f"{inst.id}: no {kind.direction.value}-side mentions to judge")
        if criteria is None:
            raise ValueError("reassessment prompts require a criteria set")
        sections.append(_criteria_sentence(kind, criteria))
    sections.append("\n".join(REQUIREMENTS[kind]))
    for shot in shots:
        if shot.task != kind.task:
            raise ValueError(f"shot {shot.id} task does not match prompt kind {kind.value}")
        sections.append(_data_block(kind, shot) + "\nAnswer: " + _worked_answer(kind, shot))
    sections.append(_data_block(kind, inst))
    return "\n\n".join(sections)


def templates_fingerprint() -> str:
    """Hash of all static prompt text, embedded in reports for provenance."""
    h = hashlib.sha256()
    for kind in PromptKind:
        h.update(INSTRUCTION[kind].encode("utf-8"))
        for line in REQUIREMENTS[kind]:
            h.update(line.encode("utf-8"))
    h.update(CRITERIA_PREAMBLE.encode("utf-8"))
    h.update(MARKER_LEGEND.encode("utf-8"))
    return h.hexdigest()
