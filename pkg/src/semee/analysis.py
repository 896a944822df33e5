"""Reconcile token-level and judge verdicts per mention, and aggregate the
human reason tags into per-side distributions."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from enum import Enum

from .errors import LengthMismatch, MissingJudgment
from .metrics import em_match_flags
from .model import Direction, Instance, ReasonTag, reason_side


class Outcome(str, Enum):
    BOTH_CORRECT = "both_correct"
    EM_WRONG_SEM_CORRECT = "em_wrong_sem_correct"
    BOTH_WRONG = "both_wrong"
    EM_CORRECT_SEM_WRONG = "em_correct_sem_wrong"


@dataclass(frozen=True)
class OutcomeCell:
    instance_id: str
    direction: Direction
    mention_index: int
    outcome: Outcome


def _classify(em_ok: bool, verdict: int) -> Outcome:
    if em_ok and verdict:
        return Outcome.BOTH_CORRECT
    if em_ok:
        return Outcome.EM_CORRECT_SEM_WRONG
    if verdict:
        return Outcome.EM_WRONG_SEM_CORRECT
    return Outcome.BOTH_WRONG


def outcome_matrix(instances, judgments) -> list[OutcomeCell]:
    """Label every judged mention with one of the four outcomes.

    The partition is exhaustive and exclusive: the number of cells equals
    the number of judged mentions (predictions on the precision side, gold
    mentions on the recall side).
    """
    by_key = {}
    for rec in judgments:
        by_key[(rec.instance_id, rec.direction)] = rec
    cells = []
    for inst in instances:
        pred_ok, gold_ok = em_match_flags(inst)
        for direction, flags in ((Direction.PRECISION, pred_ok), (Direction.RECALL, gold_ok)):
            if not flags:
                continue
            rec = by_key.get((inst.id, direction))
            if rec is None:
                raise MissingJudgment(inst.id, direction.value)
            if len(rec.verdicts) != len(flags):
                raise LengthMismatch(len(rec.verdicts), len(flags), inst.id)
            for idx, (em_ok, verdict) in enumerate(zip(flags, rec.verdicts)):
                cells.append(OutcomeCell(inst.id, direction, idx, _classify(em_ok, verdict)))
    return cells


def outcome_counts(cells) -> dict[str, int]:
    counts = Counter(c.outcome.value for c in cells)
    return {o.value: counts.get(o.value, 0) for o in Outcome}


def reason_distribution(tags) -> dict[str, dict[str, float]]:
    """Percentage of tags per category, separately for the correctness side
    (token-level miss, judge accepted) and the failure side (judge rejected).
    Each side sums to 100 up to float rounding."""
    tags = list(tags)
    if not tags:
        raise ValueError("reason_distribution needs at least one tag")
    out: dict[str, dict[str, float]] = {}
    for side in ("correctness", "failure"):
        side_tags = [t for t in tags if reason_side(t.category) == side]
        if not side_tags:
            continue
        counts = Counter(t.category for t in side_tags)
        out[side] = {cat: 100.0 * n / len(side_tags) for cat, n in sorted(counts.items())}
    return out


def majority_tags(tags) -> list[ReasonTag]:
    """Collapse per-annotator tags to one majority tag per judged mention.

    The most frequent category wins; ties go to the alphabetically first
    category, which keeps the result deterministic across runs.
    """
    grouped: dict[tuple, Counter] = {}
    for t in tags:
        grouped.setdefault((t.instance_id, t.direction, t.mention_index), Counter())[t.category] += 1
    out = []
    for (instance_id, direction, idx), counts in sorted(grouped.items()):
        best = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[0][0]
        out.append(ReasonTag(best, instance_id, direction, idx, annotator="majority"))
    return out


_TAGGING_PROMPT = """You are labeling why an extraction evaluation came out the way it did.

Context:
    {context}

The {family} mention "{text}" (type: {label}) was judged {verdict_word} at the semantic level, \
and the token-level exact match {em_word}.

Choose the single best-fitting reason from this list and answer in the python dict format \
{{'Reason Category': str}}:
{options}"""


def tag_reasons_with_agent(instances, judgments, cfg, *, ledger=None, cache=None,
                           transport=None) -> list[ReasonTag]:
    """EXPERIMENTAL: ask the judge model to pick a reason category for every
    disagreement cell instead of collecting tags from human annotators.

    Correctness-side categories are offered for token-miss/judge-correct
    mentions, failure-side categories for judge-rejected ones; items whose
    answers cannot be parsed are skipped.  Treat the output as a first draft
    for human review, not as ground truth.
    """
    import re as _re

    from .agent import run_batch
    from .model import CORRECTNESS_REASONS, FAILURE_REASONS

    by_id = {inst.id: inst for inst in instances}
    cells = [c for c in outcome_matrix(instances, judgments)
             if c.outcome in (Outcome.EM_WRONG_SEM_CORRECT, Outcome.BOTH_WRONG)]
    prompts = []
    for cell in cells:
        inst = by_id[cell.instance_id]
        mention = inst.judged_mentions(cell.direction)[cell.mention_index]
        correct = cell.outcome == Outcome.EM_WRONG_SEM_CORRECT
        options = CORRECTNESS_REASONS if correct else FAILURE_REASONS
        prompts.append(_TAGGING_PROMPT.format(
            context=" ".join(inst.tokens),
            family="predicted" if cell.direction == Direction.PRECISION else "gold",
            text=mention.text,
            label=mention.label,
            verdict_word="correct" if correct else "incorrect",
            em_word="failed",
            options="\n".join(f"- {o}" for o in options),
        ))
    results = run_batch(prompts, cfg, ledger=ledger, cache=cache, transport=transport)
    tags = []
    category_re = _re.compile(r"['\"]Reason Category['\"]\s*:\s*['\"]([a-z_]+)['\"]")
    for cell, item in zip(cells, results):
        if not item.ok:
            continue
        match = category_re.search(item.completion.text)
        if not match:
            continue
        category = match.group(1)
        allowed = CORRECTNESS_REASONS if cell.outcome == Outcome.EM_WRONG_SEM_CORRECT \
            else FAILURE_REASONS
        if category in allowed:
            tags.append(ReasonTag(category, cell.instance_id, cell.direction,
                                  cell.mention_index, annotator="agent"))
    return tags
