"""Domain types shared by every module.

An :class:`Instance` is one context with gold and predicted mentions for a
task (trigger detection or argument extraction); a :class:`JudgmentRecord` is
one binary verdict vector over one mention family of one instance.  All types
are immutable after construction so they can be shared freely between worker
threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction


class Task(str, Enum):
    ED = "ED"
    EAE = "EAE"


class Direction(str, Enum):
    PRECISION = "precision"
    RECALL = "recall"


def _mention_sort_key(m: "Mention"):
    # unlocated mentions sort after located ones, then by text so the order
    # is still deterministic
    return (m.start is None, m.start or 0, m.end or 0, m.label, m.text)


@dataclass(frozen=True)
class Mention:
    """A typed token span; ``end`` is exclusive.

    ``start``/``end`` may both be None for spans recovered from model text
    that could not be located in the context.  ``ambiguous`` marks spans that
    occurred more than once when aligning model output back to tokens.
    """

    text: str
    start: int | None
    end: int | None
    label: str
    ambiguous: bool = False

    @property
    def located(self) -> bool:
        return self.start is not None and self.end is not None

    def span_key(self):
        return (self.start, self.end, self.label)


@dataclass(frozen=True)
class Instance:
    """One evaluation unit: a tokenized context plus gold/predicted mentions.

    Mention lists are normalized to (start, end, label) order at construction
    so prompt numbering and verdict-vector positions are reproducible across
    runs.  For argument extraction the event trigger under evaluation is given
    as ``anchor``; ``ontology`` lists the (label, gloss) pairs of interest --
    event types for trigger detection, the event type plus role types for
    argument extraction.
    """

    id: str
    task: Task
    tokens: tuple[str, ...]
    gold: tuple[Mention, ...]
    predicted: tuple[Mention, ...]
    anchor: Mention | None = None
    ontology: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "task", Task(self.task))
        object.__setattr__(self, "tokens", tuple(self.tokens))
        object.__setattr__(self, "gold", tuple(sorted(self.gold, key=_mention_sort_key)))
        object.__setattr__(self, "predicted", tuple(sorted(self.predicted, key=_mention_sort_key)))
        object.__setattr__(self, "ontology", tuple((str(l), str(g)) for l, g in self.ontology))

    def judged_mentions(self, direction: Direction) -> tuple[Mention, ...]:
        return self.predicted if direction == Direction.PRECISION else self.gold

    def reference_mentions(self, direction: Direction) -> tuple[Mention, ...]:
        return self.gold if direction == Direction.PRECISION else self.predicted


def agent_judge(model_id: str) -> str:
    return f"agent:{model_id}"


def human_judge(annotator_id: str) -> str:
    return f"human:{annotator_id}"


@dataclass(frozen=True)
class JudgmentRecord:
    """One verdict vector for one (instance, direction).

    ``verdicts[i]`` refers to the i-th judged mention in the instance's
    canonical order (predicted for precision, gold for recall).  ``judge`` is
    ``agent:<model>`` or ``human:<annotator>``.  ``unjudged`` marks records
    that were defaulted to all zeros because the agent response could not be
    parsed even after the repair retry.
    """

    instance_id: str
    direction: Direction
    verdicts: tuple[int, ...]
    rationale: str
    judge: str
    trial: int = 0
    unjudged: bool = False

    def __post_init__(self):
        object.__setattr__(self, "direction", Direction(self.direction))
        object.__setattr__(self, "verdicts", tuple(int(v) for v in self.verdicts))


@dataclass(frozen=True)
class CountTally:
    """Micro counts: correct/total predictions and recalled/total gold."""

    correct_pred: int
    total_pred: int
    recalled_gold: int
    total_gold: int

    def __add__(self, other: "CountTally") -> "CountTally":
        return CountTally(
            self.correct_pred + other.correct_pred,
            self.total_pred + other.total_pred,
            self.recalled_gold + other.recalled_gold,
            self.total_gold + other.total_gold,
        )


ZERO_TALLY = CountTally(0, 0, 0, 0)


@dataclass(frozen=True)
class Scores:
    """Exact precision/recall/F1 as rationals in [0, 1]."""

    precision: Fraction
    recall: Fraction
    f1: Fraction

    @classmethod
    def from_tally(cls, tally: CountTally) -> "Scores":
        p = Fraction(tally.correct_pred, tally.total_pred) if tally.total_pred else Fraction(0)
        r = Fraction(tally.recalled_gold, tally.total_gold) if tally.total_gold else Fraction(0)
        f1 = 2 * p * r / (p + r) if p + r else Fraction(0)
        return cls(p, r, f1)

    def as_floats(self) -> dict[str, float]:
        return {"precision": float(self.precision), "recall": float(self.recall), "f1": float(self.f1)}


# Reason categories for the fine-grained analysis.  The correctness side tags
# items the token-level check rejected but the judge accepted; the failure
# side tags items the judge also rejected.
CORRECTNESS_REASONS = ("with_core_word", "coreference", "unannotated_correct", "other")
FAILURE_REASONS = ("without_core_word", "wrong_type", "unannotated_incorrect", "other_failure")


def reason_side(category: str) -> str:
    if category in CORRECTNESS_REASONS:
        return "correctness"
    if category in FAILURE_REASONS:
        return "failure"
    raise ValueError(f"unknown reason category: {category}")


@dataclass(frozen=True)
class ReasonTag:
    """A human-assigned explanation attached to one judged mention."""

    category: str
    instance_id: str
    direction: Direction
    mention_index: int
    annotator: str = ""

    def __post_init__(self):
        reason_side(self.category)
        object.__setattr__(self, "direction", Direction(self.direction))


def _validate_mention(m: Mention, family: str, index: int, tokens: tuple[str, ...]) -> list[str]:
    out = []
    where = f"{family} mention {index}"
    if not m.label:
        out.append(f"{where}: empty label")
    if (m.start is None) != (m.end is None):
        out.append(f"{where}: start and end must both be set or both be absent")
        return out
    if m.start is None:
        if not m.text:
            out.append(f"{where}: unlocated mention has empty text")
        return out
    if m.start < 0:
        out.append(f"{where}: start must be >= 0")
    if m.start >= m.end:
        out.append(f"{where}: start<end violated")
    elif m.end > len(tokens):
        out.append(f"{where}: offsets outside context")
    elif m.text != " ".join(tokens[m.start:m.end]):
        out.append(f"{where}: text does not match tokens[{m.start}:{m.end}]")
    return out


def validate_instance(inst: Instance) -> list[str]:
    """Return a list of invariant violations; empty means well-formed."""
    out = []
    if not inst.id:
        out.append("id: empty")
    for i, m in enumerate(inst.gold):
        out.extend(_validate_mention(m, "gold", i, inst.tokens))
    for i, m in enumerate(inst.predicted):
        out.extend(_validate_mention(m, "predicted", i, inst.tokens))
    if inst.task == Task.EAE:
        if inst.anchor is None:
            out.append("anchor required for EAE")
        else:
            out.extend(_validate_mention(inst.anchor, "anchor", 0, inst.tokens))
    elif inst.anchor is not None:
        out.append("anchor present but task is ED")
    labels = [l for l, _ in inst.ontology]
    if len(labels) != len(set(labels)):
        out.append("ontology labels not unique")
    return out


def validate_judgment(record: JudgmentRecord, inst: Instance) -> list[str]:
    """Check a verdict vector against the instance it judges."""
    out = []
    expected = len(inst.judged_mentions(record.direction))
    if len(record.verdicts) != expected:
        out.append(
            f"verdict count {len(record.verdicts)} does not match "
            f"{record.direction.value} mention count {expected}"
        )
    for v in record.verdicts:
        if v not in (0, 1):
            out.append(f"verdict value not in {{0,1}}: {v}")
    if record.trial < 0:
        out.append("trial must be >= 0")
    return out
