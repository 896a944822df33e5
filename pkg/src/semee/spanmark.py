"""Bracket markers around mentions inside a tokenized context.

Gold mention i is wrapped in ``[t.Gold.i] ... [/t.Gold.i]`` and predicted
mention j in ``[t.Pred.j] ... [/t.Pred.j]``; the anchor trigger of an
argument-extraction instance is wrapped in bare ``[t] ... [/t]``.  Markers are
standalone whitespace-separated tokens, so stripping them restores the
original context exactly.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .model import Mention

MARKER_RE = re.compile(r"\[/?t(?:\.(?:Gold|Pred)\.\d+)?\]")


@dataclass(frozen=True)
class MarkedContext:
    text: str
    legend: tuple[tuple[str, Mention], ...]
    warnings: tuple[str, ...] = ()


def _check_offsets(m: Mention, n_tokens: int, what: str):
    if not m.located or not (0 <= m.start < m.end <= n_tokens):
        raise ValueError(f"{what} has invalid offsets for a {n_tokens}-token context: {m}")


def mark_spans(tokens, gold, predicted) -> MarkedContext:
    """Wrap every located mention in its indexed marker pair.

    Overlapping spans nest: the span that starts earlier (or, at equal
    starts, ends later) is the outer one; for identical spans Gold wraps Pred
    and, within a family, the higher index wraps the lower.  Partial overlaps
    cannot nest properly; markers are still emitted in start-then-end order
    and the condition is reported as a warning.
    """
    tokens = list(tokens)
    warnings = []
    spans = []
    for family, mentions in (("Gold", gold), ("Pred", predicted)):
        for i, m in enumerate(mentions):
            if not m.located:
                warnings.append(f"{family}.{i} is unlocated and was not marked in the context")
                continue
            _check_offsets(m, len(tokens), f"{family}.{i}")
            spans.append((family, i, m))

    # global opening order: position, longer span first, Gold before Pred,
    # higher index first (matches the reference marker layout)
    opening = sorted(
        spans,
        key=lambda s: (s[2].start, -s[2].end, 0 if s[0] == "Gold" else 1, -s[1]),
    )
    seq = {(fam, i): k for k, (fam, i, _) in enumerate(opening)}

    for a in range(len(opening)):
        fa, ia, ma = opening[a]
        for fb, ib, mb in opening[a + 1:]:
            if ma.start < mb.start < ma.end < mb.end:
                warnings.append(
                    f"partial overlap between {fa}.{ia} and {fb}.{ib}; markers cannot nest properly"
                )

    openers = {}
    closers = {}
    for fam, i, m in spans:
        openers.setdefault(m.start, []).append((fam, i))
        closers.setdefault(m.end, []).append((fam, i))
    for pos in openers:
        openers[pos].sort(key=lambda fi: seq[fi])
    for pos in closers:
        # inner spans (opened last) close first
        closers[pos].sort(key=lambda fi: -seq[fi])

    parts = []
    for pos in range(len(tokens) + 1):
        for fam, i in closers.get(pos, ()):
            parts.append(f"[/t.{fam}.{i}]")
        for fam, i in openers.get(pos, ()):
            parts.append(f"[t.{fam}.{i}]")
        if pos < len(tokens):
            parts.append(tokens[pos])

    legend = tuple((f"t.{fam}.{i}", m) for fam, i, m in spans)
    return MarkedContext(" ".join(parts), legend, tuple(warnings))


def mark_anchor(tokens, anchor: Mention) -> str:
    """Wrap only the anchor trigger in bare ``[t] ... [/t]``."""
    tokens = list(tokens)
    _check_offsets(anchor, len(tokens), "anchor")
    parts = tokens[:anchor.start] + ["[t]"] + tokens[anchor.start:anchor.end] + ["[/t]"] + tokens[anchor.end:]
    return " ".join(parts)


def strip_markers(text: str) -> list[str]:
    """Remove marker tokens, recovering the original token sequence."""
    return [tok for tok in text.split(" ") if tok and not MARKER_RE.fullmatch(tok)]
