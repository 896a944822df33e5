"""Pull verdict vectors and extraction results out of raw model text.

Model answers are requested as python-dict literals but arrive with every
kind of drift: code fences, mixed quotes, leading prose, trailing
commentary.  The parsers here scan for the answer key instead of evaluating
the whole response, never crash on arbitrary input, and raise typed errors
that the pipeline treats as repairable.
"""

from __future__ import annotations

import ast
import json
import re

from .errors import KeyMissing, LengthMismatch, MalformedEntry, NotBinary
from .model import Instance, Mention, Task

REASSESS_KEY = "Final Reassessment Results"
EXTRACT_KEY = "Extraction Results"
THOUGHT_KEY = "Thought Process"

_RESULT_RE = re.compile(r"['\"]Final Reassessment Results['\"]\s*:\s*\[(.*?)\]", re.DOTALL)
_THOUGHT_RE = re.compile(r"['\"]Thought Process['\"]\s*:")
_EXTRACT_RE = re.compile(r"['\"]Extraction Results['\"]\s*:\s*")

_TRUE_WORDS = {"1", "true", "yes", "correct", "recalled"}
_FALSE_WORDS = {"0", "false", "no", "incorrect", "not recalled"}


def _coerce_verdict(raw: str) -> int:
    token = raw.strip().strip("'\"").strip()
    low = token.lower()
    if low in _TRUE_WORDS:
        return 1
    if low in _FALSE_WORDS:
        return 0
    try:
        value = float(token)
    except ValueError:
        raise NotBinary(raw.strip())
    if value == 1:
        return 1
    if value == 0:
        return 0
    raise NotBinary(raw.strip())


def parse_judgment(text: str, expected_len: int) -> tuple[list[int], str]:
    """Extract the verdict vector and the judge's reasoning text.

    The last occurrence of the answer key wins, which skips restatements of
    the required format earlier in the response.
    """
    matches = list(_RESULT_RE.finditer(text))
    if not matches:
        raise KeyMissing(REASSESS_KEY)
    last = matches[-1]
    body = last.group(1).strip()
    verdicts = [] if not body else [_coerce_verdict(item) for item in body.split(",")]
    if len(verdicts) != expected_len:
        raise LengthMismatch(len(verdicts), expected_len)
    thought = _THOUGHT_RE.search(text)
    if thought:
        rationale = text[thought.end():last.start()].strip().rstrip(",").strip()
    else:
        rationale = text.strip()
    return verdicts, rationale


def _balanced_slice(text: str, start: int) -> str | None:
    """Return the balanced [...] or {...} literal starting at ``start``."""
    opens = {"[": "]", "{": "}"}
    if start >= len(text) or text[start] not in opens:
        return None
    stack = [opens[text[start]]]
    in_string = None
    i = start + 1
    while i < len(text) and stack:
        ch = text[i]
        if in_string:
            if ch == "\\":
                i += 2
                continue
            if ch == in_string:
                in_string = None
        elif ch in ("'", '"'):
            in_string = ch
        elif ch in opens:
            stack.append(opens[ch])
        elif ch in ("]", "}"):
            if ch != stack[-1]:
                return None
            stack.pop()
        i += 1
    if stack:
        return None
    return text[start:i]


def _literal(snippet: str):
    for loader in (ast.literal_eval, json.loads):
        try:
            return loader(snippet)
        except Exception:
            continue
    return None


def parse_extraction(text: str, task: Task):
    """Parse model extractions: (span, type) pairs for triggers, or a
    role -> spans mapping for arguments."""
    matches = list(_EXTRACT_RE.finditer(text))
    if not matches:
        raise KeyMissing(EXTRACT_KEY)
    snippet = None
    for match in reversed(matches):
        pos = match.end()
        while pos < len(text) and text[pos] in " \t\r\n":
            pos += 1
        snippet = _balanced_slice(text, pos)
        if snippet is not None:
            break
    if snippet is None:
        raise MalformedEntry(None, "no balanced literal after the key")
    value = _literal(snippet)
    if value is None:
        raise MalformedEntry(None, "literal could not be evaluated")

    if task == Task.ED:
        if not isinstance(value, list):
            raise MalformedEntry(None, f"expected a list, got {type(value).__name__}")
        out = []
        for i, entry in enumerate(value):
            if not isinstance(entry, dict):
                raise MalformedEntry(i, "entry is not a dict")
            span = entry.get("Trigger Span")
            label = entry.get("Event Type")
            if not isinstance(span, str) or not isinstance(label, str):
                raise MalformedEntry(i, "missing Trigger Span / Event Type")
            out.append((span, label))
        return out

    if not isinstance(value, dict):
        raise MalformedEntry(None, f"expected a dict, got {type(value).__name__}")
    out = {}
    for role, spans in value.items():
        if isinstance(spans, str):
            spans = [spans]
        if not isinstance(spans, list):
            raise MalformedEntry(None, f"role {role!r} does not map to a list")
        out[str(role)] = [s if isinstance(s, str) else str(s) for s in spans]
    return out


def _find_subsequence(tokens, span_tokens) -> list[int]:
    hits = []
    n, k = len(tokens), len(span_tokens)
    for i in range(n - k + 1):
        if list(tokens[i:i + k]) == span_tokens:
            hits.append(i)
    return hits


def align_extraction(parsed, inst: Instance) -> list[Mention]:
    """Locate extracted span strings in the instance tokens.

    The first occurrence is chosen deterministically; spans occurring more
    than once are flagged ambiguous, and spans absent from the context become
    unlocated mentions (scored by text only where the metric allows it).
    """
    if inst.task == Task.ED:
        pairs = list(parsed)
    else:
        pairs = [(span, role) for role, spans in parsed.items() for span in spans]
    mentions = []
    for span, label in pairs:
        span_tokens = span.split()
        hits = _find_subsequence(inst.tokens, span_tokens) if span_tokens else []
        if hits:
            start = hits[0]
            mentions.append(Mention(
                text=" ".join(inst.tokens[start:start + len(span_tokens)]),
                start=start,
                end=start + len(span_tokens),
                label=label,
                ambiguous=len(hits) > 1,
            ))
        else:
            mentions.append(Mention(text=span, start=None, end=None, label=label))
    return mentions
