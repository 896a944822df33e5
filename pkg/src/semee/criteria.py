"""The editable judging rules spliced into every reassessment prompt.

Each criterion is a template with one ``{}`` slot that receives its setting
word ("correct", "incorrect", "recalled", "not recalled").  Templates may use
the slash forms ``trigger/argument`` and ``triggers/arguments``, which are
specialized per task at render time; for argument prompts the bare word
"type" additionally becomes "role type".  The rules are deliberately stored
in a plain keyed-text file so they can be tailored to a dataset's annotation
conventions without touching code.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass
from enum import Enum

from .model import Direction, Task


class Setting(str, Enum):
    CORRECT = "correct"
    INCORRECT = "incorrect"
    RECALLED = "recalled"
    NOT_RECALLED = "not_recalled"

    @property
    def text(self) -> str:
        return "not recalled" if self == Setting.NOT_RECALLED else self.value

    @property
    def direction(self) -> Direction:
        if self in (Setting.CORRECT, Setting.INCORRECT):
            return Direction.PRECISION
        return Direction.RECALL


ALL_TASKS = (Task.ED, Task.EAE)

# "type" -> "role type" for argument prompts, but never when already
# qualified as "role type" or "event type"
_TYPE_WORD_RE = re.compile(r"(?<!role )(?<!event )\btype\b")


def specialize(template: str, task: Task) -> str:
    if task == Task.ED:
        return template.replace("triggers/arguments", "triggers").replace("trigger/argument", "trigger")
    out = template.replace("triggers/arguments", "arguments").replace("trigger/argument", "argument")
    return _TYPE_WORD_RE.sub("role type", out)


@dataclass(frozen=True)
class Criterion:
    template: str
    setting: Setting
    applies_to: frozenset[tuple[Task, Direction]]

    def __post_init__(self):
        object.__setattr__(self, "setting", Setting(self.setting))
        object.__setattr__(self, "applies_to", frozenset(self.applies_to))
        if self.template.count("{}") != 1:
            raise ValueError(f"criterion template must contain exactly one {{}} slot: {self.template!r}")
        for _, direction in self.applies_to:
            if direction != self.setting.direction:
                raise ValueError(
                    f"setting {self.setting.value!r} is not legal for {direction.value} prompts"
                )

    def render(self, task: Task) -> str:
        return specialize(self.template, task).replace("{}", self.setting.text, 1)


@dataclass(frozen=True)
class CriteriaSet:
    criteria: tuple[Criterion, ...]

    def __post_init__(self):
        object.__setattr__(self, "criteria", tuple(self.criteria))

    def __len__(self):
        return len(self.criteria)

    def __getitem__(self, i):
        return self.criteria[i]

    def select(self, task: Task, direction: Direction) -> list[Criterion]:
        return [c for c in self.criteria if (task, direction) in c.applies_to]

    def rendered(self, task: Task, direction: Direction) -> list[str]:
        return [c.render(task) for c in self.select(task, direction)]


_P = ((Task.ED, Direction.PRECISION), (Task.EAE, Direction.PRECISION))
_R = ((Task.ED, Direction.RECALL), (Task.EAE, Direction.RECALL))

_DEFAULTS = (
    ("If there is a more accurate predefined type for a predicted trigger/argument, "
     "then only the more accurate type can be reassessed as {} one",
     Setting.CORRECT, _P),
    ("If a predict trigger/argument is more reasonable than golden annotations, "
     "it should be reassessed as {} one",
     Setting.CORRECT, _P),
    ("When there is co-reference, pronouns can be reassessed as {} one",
     Setting.CORRECT, _P),
    ("If the core word is correct but some modifiers are missing, "
     "the predicted trigger/argument should be reassessed as {} one",
     Setting.CORRECT, _P),
    ("A predicted trigger is reassessed as {} one when it triggers an event that does not really occur",
     Setting.INCORRECT, ((Task.ED, Direction.PRECISION),)),
    ("A golden trigger/argument is reassessed as {} one if there is no correspondence in "
     "predicted triggers/arguments, even if there is a predicted trigger/argument with "
     "more accurate or reasonable type",
     Setting.NOT_RECALLED, _R),
    ("When there is co-reference, pronouns can be reassessed as {} one",
     Setting.RECALLED, _R),
    ("If the core word is recalled but some modifiers are missing, "
     "the golden trigger/argument should be reassessed as {} one",
     Setting.RECALLED, _R),
)


def default_criteria() -> CriteriaSet:
    """The eight stock rules: five precision-side (four for arguments, which
    have no trigger-specific occurrence rule) and three recall-side."""
    return CriteriaSet(tuple(Criterion(t, s, frozenset(a)) for t, s, a in _DEFAULTS))


def _format_applies(applies: frozenset[tuple[Task, Direction]]) -> str:
    pairs = sorted((t.value, d.value) for t, d in applies)
    return ", ".join(f"{t}:{d}" for t, d in pairs)


def format_criteria(cs: CriteriaSet) -> str:
    blocks = []
    for c in cs.criteria:
        blocks.append(
            "[criterion]\n"
            f"template = {c.template}\n"
            f"setting = {c.setting.value}\n"
            f"applies_to = {_format_applies(c.applies_to)}\n"
        )
    return "\n".join(blocks)


def parse_criteria(text: str) -> CriteriaSet:
    """Parse the keyed-text criteria format written by :func:`format_criteria`."""
    criteria = []
    block = None
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line == "[criterion]":
            if block is not None:
                criteria.append(_block_to_criterion(block))
            block = {}
            continue
        if block is None:
            raise ValueError(f"criteria line {ln}: content before first [criterion] header")
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"criteria line {ln}: expected 'key = value'")
        block[key.strip()] = value.strip()
    if block is not None:
        criteria.append(_block_to_criterion(block))
    if not criteria:
        raise ValueError("criteria file contains no [criterion] blocks")
    return CriteriaSet(tuple(criteria))


def _block_to_criterion(block: dict) -> Criterion:
    missing = {"template", "setting", "applies_to"} - set(block)
    if missing:
        raise ValueError(f"criterion block missing keys: {sorted(missing)}")
    applies = []
    for pair in block["applies_to"].split(","):
        task, sep, direction = pair.strip().partition(":")
        if not sep:
            raise ValueError(f"bad applies_to entry: {pair.strip()!r}")
        applies.append((Task(task.strip()), Direction(direction.strip())))
    return Criterion(block["template"], Setting(block["setting"]), frozenset(applies))


def load_criteria(path) -> CriteriaSet:
    with open(path, encoding="utf-8") as f:
        return parse_criteria(f.read())


def criteria_fingerprint(cs: CriteriaSet) -> str:
    return hashlib.sha256(format_criteria(cs).encode("utf-8")).hexdigest()
