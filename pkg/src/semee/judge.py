"""The reassessment loop: render prompts, query the judge, parse verdicts.

One pass judges every nonempty mention family of every instance in both
directions.  On a parse failure the item is re-asked once with a fixed
format-reminder suffix; a second failure marks the item unjudged, which is
scored conservatively (all zeros) and counted separately in reports.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .agent import AgentConfig, CostLedger, ResponseCache, run_batch
from .criteria import CriteriaSet
from .errors import ToolkitError
from .model import Direction, Instance, JudgmentRecord, agent_judge
from .parsing import parse_judgment
from .prompts import reassessment_kind, render_prompt

logger = logging.getLogger(__name__)

REPAIR_SUFFIX = "\nAnswer only in the required python dict format."


@dataclass
class JudgeRun:
    """Verdicts for one trial, plus the items that could not be judged."""

    trial: int
    records: list[JudgmentRecord] = field(default_factory=list)
    unjudged: list[tuple[str, str]] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


def _jobs_for(instances, criteria: CriteriaSet):
    jobs = []
    for inst in instances:
        for direction in (Direction.PRECISION, Direction.RECALL):
            if not inst.judged_mentions(direction):
                continue
            kind = reassessment_kind(inst.task, direction)
            jobs.append((inst, direction, render_prompt(kind, inst, criteria)))
    return jobs


def judge_once(instances, criteria: CriteriaSet, cfg: AgentConfig, *, trial: int = 0,
               ledger: CostLedger | None = None, cache: ResponseCache | None = None,
               transport=None) -> JudgeRun:
    run = JudgeRun(trial=trial)
    jobs = _jobs_for(instances, criteria)
    if not jobs:
        return run
    judge = agent_judge(cfg.model)

    results = run_batch([p for _, _, p in jobs], cfg, ledger=ledger, cache=cache,
                        trial=trial, transport=transport)

    # one repair round for transport failures and unparseable answers
    repair_idx = []
    parsed: dict[int, tuple[list[int], str]] = {}
    for i, ((inst, direction, _), item) in enumerate(zip(jobs, results)):
        if not item.ok:
            repair_idx.append(i)
            continue
        try:
            parsed[i] = parse_judgment(item.completion.text, len(inst.judged_mentions(direction)))
        except ToolkitError as e:
            logger.info("parse failed for %s/%s: %s", inst.id, direction.value, e)
            repair_idx.append(i)

    if repair_idx:
        repair_results = run_batch(
            [jobs[i][2] + REPAIR_SUFFIX for i in repair_idx], cfg,
            ledger=ledger, cache=cache, trial=trial, transport=transport)
        for i, item in zip(repair_idx, repair_results):
            inst, direction, _ = jobs[i]
            if item.ok:
                try:
                    parsed[i] = parse_judgment(
                        item.completion.text, len(inst.judged_mentions(direction)))
                    continue
                except ToolkitError as e:
                    last = str(e)
            else:
                last = str(item.error)
            run.unjudged.append((inst.id, direction.value))
            run.warnings.append(f"unjudged {inst.id}/{direction.value}: {last}")

    unjudged = set(run.unjudged)
    for i, (inst, direction, _) in enumerate(jobs):
        n = len(inst.judged_mentions(direction))
        if i in parsed:
            verdicts, rationale = parsed[i]
            run.records.append(JudgmentRecord(
                inst.id, direction, tuple(verdicts), rationale, judge, trial))
        else:
            assert (inst.id, direction.value) in unjudged
            run.records.append(JudgmentRecord(
                inst.id, direction, (0,) * n, "", judge, trial, unjudged=True))
    return run


def judge_trials(instances, criteria: CriteriaSet, cfg: AgentConfig, *, trials: int = 1,
                 ledger: CostLedger | None = None, cache: ResponseCache | None = None,
                 transport=None) -> list[JudgeRun]:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    return [
        judge_once(instances, criteria, cfg, trial=t, ledger=ledger, cache=cache,
                   transport=transport)
        for t in range(trials)
    ]
