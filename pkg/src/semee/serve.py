"""Annotation service: hands out unjudged items and collects human verdicts.

Humans judge the same content the model judge sees: the same instruction,
the same numbered criteria, and the same marked-up context.  Judgments are
appended to a JSONL file with an fsync per record, so a crash never loses an
accepted submission and previously judged items are not re-served after a
restart.  Multiple annotators can work concurrently; each has their own
queue over the same item list.
"""

from __future__ import annotations

import json
import logging
import os
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlparse

from .criteria import CriteriaSet
from .ingest import judgment_obj
from .metrics import em_match_flags
from .model import (
    CORRECTNESS_REASONS,
    Direction,
    FAILURE_REASONS,
    JudgmentRecord,
    Task,
    human_judge,
    reason_side,
)
from .prompts import INSTRUCTION, _criteria_sentence, reassessment_kind
from .spanmark import mark_anchor, mark_spans

logger = logging.getLogger(__name__)

FALLBACK_PAGE = """<!doctype html>
<html><head><meta charset="utf-8"><title>annotation service</title></head>
<body><h1>Annotation service is running</h1>
<p>No UI bundle was found. Point --ui-dir at a built frontend, or use the
JSON API directly: GET /api/next?annotator=ID, POST /api/judgment,
GET /api/progress.</p></body></html>
"""

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".map": "application/json",
    ".json": "application/json",
    ".png": "image/png",
    ".svg": "image/svg+xml",
}


class AnnotationState:
    def __init__(self, instances, out_path, criteria: CriteriaSet, tags_path=None):
        self.instances = {inst.id: inst for inst in instances}
        self.out_path = str(out_path)
        self.tags_path = str(tags_path) if tags_path else self.out_path + ".tags.jsonl"
        self.criteria = criteria
        self.lock = threading.Lock()
        self.items = []
        for inst in instances:
            for direction in (Direction.PRECISION, Direction.RECALL):
                if inst.judged_mentions(direction):
                    self.items.append((inst, direction))
        self.done: set[tuple[str, str, str]] = set()
        self._load_existing()

    def _load_existing(self):
        if not os.path.exists(self.out_path):
            return
        with open(self.out_path, encoding="utf-8") as f:
            for line in f:
                if not line.strip():
                    continue
                obj = json.loads(line)
                judge = obj.get("judge", "")
                annotator = judge.split(":", 1)[1] if ":" in judge else judge
                self.done.add((obj["instance_id"], obj["direction"], annotator))
        logger.info("resumed with %d existing judgments", len(self.done))

    def _item_payload(self, inst, direction: Direction, position: int) -> dict:
        kind = reassessment_kind(inst.task, direction)
        if inst.task == Task.ED:
            context = mark_spans(inst.tokens, inst.gold, inst.predicted).text
        else:
            context = mark_anchor(inst.tokens, inst.anchor)
        judged_family = "Pred" if direction == Direction.PRECISION else "Gold"
        ref_family = "Gold" if direction == Direction.PRECISION else "Pred"

        def mention_list(mentions, family):
            return [
                {"index": i, "family": family, "text": m.text, "label": m.label}
                for i, m in enumerate(mentions)
            ]

        positive, negative = (
            ("correct", "incorrect") if direction == Direction.PRECISION
            else ("recalled", "not recalled")
        )
        pred_ok, gold_ok = em_match_flags(inst)
        em_flags = pred_ok if direction == Direction.PRECISION else gold_ok
        return {
            "instance_id": inst.id,
            "task": inst.task.value,
            "direction": direction.value,
            "instruction": INSTRUCTION[kind],
            "criteria": _criteria_sentence(kind, self.criteria),
            "context": context,
            "judged_mentions": mention_list(inst.judged_mentions(direction), judged_family),
            "reference_mentions": mention_list(inst.reference_mentions(direction), ref_family),
            # token-level match per judged mention; the UI limits reason-tag
            # menus with this, mirroring the server-side tag validation
            "em_match": list(em_flags),
            "positive_label": positive,
            "negative_label": negative,
            "position": position,
            "total": len(self.items),
        }

    def next_for(self, annotator: str) -> dict:
        with self.lock:
            for k, (inst, direction) in enumerate(self.items):
                if (inst.id, direction.value, annotator) not in self.done:
                    return self._item_payload(inst, direction, k)
            return {"done": True, "total": len(self.items)}

    def progress(self) -> dict:
        with self.lock:
            per = {}
            for _, _, annotator in self.done:
                per[annotator] = per.get(annotator, 0) + 1
            return {
                "total": len(self.items),
                "judged": len(self.done),
                "annotators": dict(sorted(per.items())),
            }

    def _validate_tags(self, tags, inst, direction, verdicts):
        pred_ok, gold_ok = em_match_flags(inst)
        em_flags = pred_ok if direction == Direction.PRECISION else gold_ok
        for tag in tags:
            if not isinstance(tag, dict):
                return "reason tag must be an object"
            category = tag.get("category")
            idx = tag.get("mention_index")
            if category not in CORRECTNESS_REASONS and category not in FAILURE_REASONS:
                return f"unknown reason category: {category}"
            if not isinstance(idx, int) or not (0 <= idx < len(verdicts)):
                return f"reason tag mention_index out of range: {idx}"
            side = reason_side(category)
            if side == "correctness" and not (verdicts[idx] == 1 and not em_flags[idx]):
                return "correctness reasons only apply to token-miss/judge-correct mentions"
            if side == "failure" and verdicts[idx] != 0:
                return "failure reasons only apply to judge-rejected mentions"
        return None

    def submit(self, payload: dict) -> tuple[int, dict]:
        for field in ("instance_id", "direction", "annotator", "verdicts"):
            if field not in payload:
                return 400, {"error": f"missing field: {field}"}
        inst = self.instances.get(payload["instance_id"])
        if inst is None:
            return 400, {"error": f"unknown instance id: {payload['instance_id']}"}
        try:
            direction = Direction(payload["direction"])
        except ValueError:
            return 400, {"error": f"bad direction: {payload['direction']}"}
        annotator = str(payload["annotator"]).strip()
        if not annotator:
            return 400, {"error": "annotator must be non-empty"}
        verdicts = payload["verdicts"]
        expected = len(inst.judged_mentions(direction))
        if expected == 0:
            return 400, {"error": "this instance has nothing to judge in that direction"}
        if not isinstance(verdicts, list) or len(verdicts) != expected:
            found = len(verdicts) if isinstance(verdicts, list) else "non-list"
            return 400, {"error": f"expected {expected} verdicts, got {found}"}
        if any(v not in (0, 1) for v in verdicts):
            return 400, {"error": "verdicts must be 0 or 1"}
        tags = payload.get("reason_tags") or []
        problem = self._validate_tags(tags, inst, direction, verdicts)
        if problem:
            return 400, {"error": problem}

        record = JudgmentRecord(
            instance_id=inst.id,
            direction=direction,
            verdicts=tuple(verdicts),
            rationale=str(payload.get("rationale", "")),
            judge=human_judge(annotator),
            trial=0,
        )
        with self.lock:
            key = (inst.id, direction.value, annotator)
            if key in self.done:
                return 409, {"error": "this item was already judged by this annotator"}
            self._append(self.out_path, judgment_obj(record))
            for tag in tags:
                self._append(self.tags_path, {
                    "annotator": annotator,
                    "category": tag["category"],
                    "direction": direction.value,
                    "instance_id": inst.id,
                    "mention_index": tag["mention_index"],
                })
            self.done.add(key)
        return 200, {"ok": True, "judged": len(self.done)}

    @staticmethod
    def _append(path, obj):
        with open(path, "a", encoding="utf-8") as f:
            f.write(json.dumps(obj, sort_keys=True, ensure_ascii=False))
            f.write("\n")
            f.flush()
            os.fsync(f.fileno())


class _Handler(BaseHTTPRequestHandler):
    state: AnnotationState = None
    ui_dir: str | None = None

    def log_message(self, fmt, *args):
        logger.debug("http: " + fmt, *args)

    def _send_json(self, status: int, body: dict):
        data = json.dumps(body).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def do_GET(self):
        url = urlparse(self.path)
        if url.path == "/api/next":
            query = parse_qs(url.query)
            annotator = (query.get("annotator") or [""])[0].strip()
            if not annotator:
                return self._send_json(400, {"error": "annotator query parameter required"})
            return self._send_json(200, self.state.next_for(annotator))
        if url.path == "/api/progress":
            return self._send_json(200, self.state.progress())
        if url.path.startswith("/api/"):
            return self._send_json(404, {"error": "unknown endpoint"})
        return self._send_static(url.path)

    def do_POST(self):
        url = urlparse(self.path)
        if url.path != "/api/judgment":
            return self._send_json(404, {"error": "unknown endpoint"})
        try:
            length = int(self.headers.get("Content-Length", 0))
            payload = json.loads(self.rfile.read(length).decode("utf-8"))
            if not isinstance(payload, dict):
                raise ValueError("body is not an object")
        except (ValueError, json.JSONDecodeError) as e:
            return self._send_json(400, {"error": f"bad JSON body: {e}"})
        status, body = self.state.submit(payload)
        return self._send_json(status, body)

    def _send_static(self, path: str):
        if self.ui_dir is None:
            data = FALLBACK_PAGE.encode("utf-8")
            self.send_response(200)
            self.send_header("Content-Type", "text/html; charset=utf-8")
            self.send_header("Content-Length", str(len(data)))
            self.end_headers()
            self.wfile.write(data)
            return
        rel = path.lstrip("/") or "index.html"
        full = os.path.realpath(os.path.join(self.ui_dir, rel))
        root = os.path.realpath(self.ui_dir)
        if not full.startswith(root + os.sep) and full != root:
            return self._send_json(404, {"error": "not found"})
        if os.path.isdir(full):
            full = os.path.join(full, "index.html")
        if not os.path.isfile(full):
            return self._send_json(404, {"error": "not found"})
        ext = os.path.splitext(full)[1].lower()
        with open(full, "rb") as f:
            data = f.read()
        self.send_response(200)
        self.send_header("Content-Type", _CONTENT_TYPES.get(ext, "application/octet-stream"))
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)


def make_server(instances, out_path, criteria: CriteriaSet, *, host="127.0.0.1", port=0,
                tags_path=None, ui_dir=None) -> ThreadingHTTPServer:
    """Build the HTTP server without starting it; port 0 picks a free port."""
    state = AnnotationState(instances, out_path, criteria, tags_path=tags_path)
    handler = type("BoundHandler", (_Handler,), {
        "state": state,
        "ui_dir": str(ui_dir) if ui_dir else None,
    })
    return ThreadingHTTPServer((host, port), handler)
