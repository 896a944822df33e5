"""Scoring: judge-based semantic F1, three token-level baselines, and the
agreement statistics used to compare judges.

All dataset scores are micro-aggregated: counts are pooled over the whole
instance set before precision/recall are formed, and scores are kept as exact
fractions so tests can assert rational equality.  Matching between predicted
and gold mentions is one-to-one within an instance; no gold mention is
consumed twice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import stats as sps

from .errors import DegenerateVector, LengthMismatch, MissingJudgment
from .model import (
    CountTally,
    Direction,
    Instance,
    JudgmentRecord,
    Scores,
    ZERO_TALLY,
)


# ---------------------------------------------------------------------------
# semantic scores from judgments

def semantic_tally(judgments, instances) -> CountTally:
    by_key = {}
    for rec in judgments:
        key = (rec.instance_id, rec.direction)
        if key in by_key:
            raise ValueError(f"multiple judgments for {key}; filter by judge/trial first")
        by_key[key] = rec
    tally = ZERO_TALLY
    for inst in instances:
        correct = 0
        if inst.predicted:
            rec = by_key.get((inst.id, Direction.PRECISION))
            if rec is None:
                raise MissingJudgment(inst.id, Direction.PRECISION.value)
            if len(rec.verdicts) != len(inst.predicted):
                raise LengthMismatch(len(rec.verdicts), len(inst.predicted), inst.id)
            correct = sum(rec.verdicts)
        recalled = 0
        if inst.gold:
            rec = by_key.get((inst.id, Direction.RECALL))
            if rec is None:
                raise MissingJudgment(inst.id, Direction.RECALL.value)
            if len(rec.verdicts) != len(inst.gold):
                raise LengthMismatch(len(rec.verdicts), len(inst.gold), inst.id)
            recalled = sum(rec.verdicts)
        tally = tally + CountTally(correct, len(inst.predicted), recalled, len(inst.gold))
    return tally


def semantic_scores(judgments, instances) -> Scores:
    """Micro precision/recall/F1 from one judge's verdict vectors."""
    return Scores.from_tally(semantic_tally(judgments, instances))


# ---------------------------------------------------------------------------
# token-level baselines

def em_match_flags(inst: Instance) -> tuple[list[bool], list[bool]]:
    """Greedy one-to-one matching on identical (start, end, label).

    Predictions are tried in canonical order and each consumes the first
    unconsumed gold mention with an identical key.  For an equality predicate
    this greedy scheme attains the maximum one-to-one matching.
    """
    gold_used = [False] * len(inst.gold)
    pred_ok = [False] * len(inst.predicted)
    for pi, p in enumerate(inst.predicted):
        if not p.located:
            continue
        for gi, g in enumerate(inst.gold):
            if not gold_used[gi] and g.located and g.span_key() == p.span_key():
                gold_used[gi] = True
                pred_ok[pi] = True
                break
    return pred_ok, gold_used


def _flags_tally(instances, flag_fn) -> CountTally:
    tally = ZERO_TALLY
    for inst in instances:
        pred_ok, gold_ok = flag_fn(inst)
        tally = tally + CountTally(sum(pred_ok), len(pred_ok), sum(gold_ok), len(gold_ok))
    return tally


def exact_match_scores(instances) -> Scores:
    return Scores.from_tally(_flags_tally(instances, em_match_flags))


# small function-word list used to strip trailing non-content tokens before
# taking the head of a span; pluggable via the head_fn argument below
FUNCTION_WORDS = frozenset(
    "a an the of in on at by for with to from into onto over under about "
    "through during against between am is are was were be been".split()
)


def default_head(span_text: str) -> str:
    tokens = span_text.split()
    while len(tokens) > 1 and tokens[-1].lower() in FUNCTION_WORDS:
        tokens.pop()
    return tokens[-1].lower() if tokens else ""


def head_match_flags(inst: Instance, head_fn=default_head) -> tuple[list[bool], list[bool]]:
    gold_heads = [(m.label, head_fn(m.text)) for m in inst.gold]
    gold_used = [False] * len(inst.gold)
    pred_ok = [False] * len(inst.predicted)
    for pi, p in enumerate(inst.predicted):
        key = (p.label, head_fn(p.text))
        for gi, gkey in enumerate(gold_heads):
            if not gold_used[gi] and gkey == key:
                gold_used[gi] = True
                pred_ok[pi] = True
                break
    return pred_ok, gold_used


def head_noun_scores(instances, head_fn=default_head) -> Scores:
    return Scores.from_tally(_flags_tally(instances, lambda i: head_match_flags(i, head_fn)))


def cosine(u, v) -> float:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0 or nv == 0:
        return 0.0
    return float(np.dot(u, v) / (nu * nv))


def _max_bipartite(n_pred: int, n_gold: int, eligible) -> tuple[list[bool], list[bool]]:
    """Maximum one-to-one matching over eligible (pred, gold) pairs.

    Kuhn's augmenting-path algorithm; the pair predicate is not transitive
    for similarity thresholds, so a greedy pass can undershoot and an exact
    matching is required.
    """
    adj = [[gi for gi in range(n_gold) if eligible(pi, gi)] for pi in range(n_pred)]
    gold_owner = [-1] * n_gold

    def try_assign(pi, seen):
        for gi in adj[pi]:
            if seen[gi]:
                continue
            seen[gi] = True
            if gold_owner[gi] == -1 or try_assign(gold_owner[gi], seen):
                gold_owner[gi] = pi
                return True
        return False

    for pi in range(n_pred):
        try_assign(pi, [False] * n_gold)
    pred_ok = [False] * n_pred
    gold_ok = [False] * n_gold
    for gi, pi in enumerate(gold_owner):
        if pi != -1:
            pred_ok[pi] = True
            gold_ok[gi] = True
    return pred_ok, gold_ok


def similarity_match_flags(inst: Instance, vectors: dict[str, list[float]], t: float):
    def eligible(pi, gi):
        p, g = inst.predicted[pi], inst.gold[gi]
        if p.label != g.label:
            return False
        return cosine(vectors[p.text], vectors[g.text]) >= t

    return _max_bipartite(len(inst.predicted), len(inst.gold), eligible)


def similarity_scores(instances, embed, t: float = 0.5) -> Scores:
    """Embedding-similarity baseline: label must match and span-text cosine
    must reach the threshold.  ``embed`` maps a list of texts to vectors and
    may raise :class:`~semee.errors.EmbeddingUnavailable`."""
    if not 0 <= t <= 1:
        raise ValueError(f"threshold must be in [0, 1]: {t}")
    texts = sorted({m.text for inst in instances for m in (*inst.gold, *inst.predicted)})
    vectors = dict(zip(texts, embed(texts))) if texts else {}
    return Scores.from_tally(
        _flags_tally(instances, lambda i: similarity_match_flags(i, vectors, t))
    )


# ---------------------------------------------------------------------------
# agreement statistics

def percent_agreement(a, b) -> Fraction:
    """Fraction of positions where the two verdict vectors agree."""
    a = list(a)
    b = list(b)
    if len(a) != len(b):
        raise LengthMismatch(len(b), len(a))
    if not a:
        raise LengthMismatch(0, 1, "percent agreement needs at least one item")
    return Fraction(sum(1 for x, y in zip(a, b) if x == y), len(a))


def _midranks(values) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    order = np.argsort(values, kind="mergesort")
    ranks = np.empty(len(values), dtype=float)
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman(a, b) -> tuple[float, float]:
    """Tie-corrected rank correlation: Pearson over mid-ranks, with a
    two-sided t-approximation p-value on n-2 degrees of freedom.

    Binary verdict vectors are heavily tied, so mid-ranks (average rank over
    each tie group) are required for a meaningful coefficient.
    """
    a = list(a)
    b = list(b)
    if len(a) != len(b):
        raise LengthMismatch(len(b), len(a))
    if len(a) < 3:
        raise DegenerateVector(f"need at least 3 items, got {len(a)}")
    if len(set(a)) < 2 or len(set(b)) < 2:
        raise DegenerateVector("constant vector: rank correlation undefined")
    ra = _midranks(a)
    rb = _midranks(b)
    ra = ra - ra.mean()
    rb = rb - rb.mean()
    rho = float(np.dot(ra, rb) / math.sqrt(np.dot(ra, ra) * np.dot(rb, rb)))
    rho = max(-1.0, min(1.0, rho))
    n = len(a)
    if abs(rho) == 1.0:
        return rho, 0.0
    tstat = rho * math.sqrt((n - 2) / (1.0 - rho * rho))
    p = 2.0 * float(sps.t.sf(abs(tstat), n - 2))
    return rho, p


@dataclass(frozen=True)
class TrialStats:
    mean: float
    std: float
    n: int


def trial_stats(values) -> TrialStats:
    """Mean and population standard deviation over repeated trials."""
    values = [float(v) for v in values]
    if not values:
        raise ValueError("trial_stats needs at least one value")
    mean = sum(values) / len(values)
    var = sum((v - mean) ** 2 for v in values) / len(values)
    return TrialStats(mean, math.sqrt(var), len(values))


def majority_reference(vectors, exclude: int) -> list[int]:
    """Per-item majority vote over all vectors except ``exclude``.

    Ties (possible with an even number of remaining judges) are broken
    toward 0, matching the conservative default used for unjudged items.
    """
    others = [v for i, v in enumerate(vectors) if i != exclude]
    if not others:
        raise ValueError("majority reference needs at least two judges")
    out = []
    for position in zip(*others):
        out.append(1 if sum(position) * 2 > len(position) else 0)
    return out
