"""Run the extraction task itself with a model, producing predictions that
feed straight back into the evaluation pipeline.

Each instance gets an inference prompt (optionally with few-shot example
blocks sampled once per run from a user-supplied shot file); the answer is
parsed, aligned back onto the tokens, and written into the ``predicted``
field of a copy of the instance.  Items whose answers stay unparseable after
the repair retry keep an empty prediction list and are reported as failures.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field

from .agent import AgentConfig, CostLedger, ResponseCache, run_batch
from .errors import ToolkitError
from .judge import REPAIR_SUFFIX
from .model import Instance
from .parsing import align_extraction, parse_extraction
from .prompts import inference_kind, render_prompt

logger = logging.getLogger(__name__)


@dataclass
class InferRun:
    instances: list[Instance] = field(default_factory=list)
    failures: list[tuple[str, str]] = field(default_factory=list)
    unlocated: int = 0
    ambiguous: int = 0


def sample_shots(shot_pool, count: int, seed: int) -> tuple[Instance, ...]:
    pool = list(shot_pool)
    if count > len(pool):
        raise ValueError(f"asked for {count} shots but the shot file has {len(pool)}")
    if count == 0:
        return ()
    return tuple(random.Random(seed).sample(pool, count))


def infer_instances(instances, cfg: AgentConfig, *, shots: tuple[Instance, ...] = (),
                    ledger: CostLedger | None = None, cache: ResponseCache | None = None,
                    transport=None) -> InferRun:
    run = InferRun()
    instances = list(instances)
    if not instances:
        return run
    prompts = []
    for inst in instances:
        task_shots = tuple(s for s in shots if s.task == inst.task)
        prompts.append(render_prompt(inference_kind(inst.task), inst, shots=task_shots))

    results = run_batch(prompts, cfg, ledger=ledger, cache=cache, transport=transport)

    repair_idx = []
    parsed = {}
    for i, (inst, item) in enumerate(zip(instances, results)):
        if not item.ok:
            repair_idx.append(i)
            continue
        try:
            parsed[i] = parse_extraction(item.completion.text, inst.task)
        except ToolkitError as e:
            logger.info("extraction parse failed for %s: %s", inst.id, e)
            repair_idx.append(i)

    if repair_idx:
        repair_results = run_batch([prompts[i] + REPAIR_SUFFIX for i in repair_idx], cfg,
                                   ledger=ledger, cache=cache, transport=transport)
        for i, item in zip(repair_idx, repair_results):
            inst = instances[i]
            if item.ok:
                try:
                    parsed[i] = parse_extraction(item.completion.text, inst.task)
                    continue
                except ToolkitError as e:
                    last = str(e)
            else:
                last = str(item.error)
            run.failures.append((inst.id, last))

    for i, inst in enumerate(instances):
        if i in parsed:
            mentions = align_extraction(parsed[i], inst)
            run.unlocated += sum(1 for m in mentions if not m.located)
            run.ambiguous += sum(1 for m in mentions if m.ambiguous)
        else:
            mentions = []
        run.instances.append(Instance(
            id=inst.id,
            task=inst.task,
            tokens=inst.tokens,
            gold=inst.gold,
            predicted=tuple(mentions),
            anchor=inst.anchor,
            ontology=inst.ontology,
        ))
    return run
