"""Command-line front end: evaluate, infer, meta, serve, stats, analyze."""

from __future__ import annotations

import json
import os

import click

from . import analysis, ingest, metrics, report
from .agent import AgentConfig, CostLedger, ResponseCache
from .criteria import criteria_fingerprint, default_criteria, load_criteria
from .embeddings import EmbeddingClient, EmbeddingConfig
from .errors import EmbeddingUnavailable, ToolkitError
from .infer import infer_instances, sample_shots
from .judge import judge_trials
from .model import Direction, Task
from .prompts import templates_fingerprint
from .serve import make_server

METHODS = ("semantic", "exact", "headnoun", "similarity")


def _fail(msg: str):
    raise click.ClickException(msg)


def _load_instances(path):
    try:
        return ingest.load_instances(path)
    except ToolkitError as e:
        _fail(f"{path}: {e}")


def _load_criteria(path):
    if path is None:
        return default_criteria()
    try:
        return load_criteria(path)
    except (OSError, ValueError) as e:
        _fail(f"{path}: {e}")


def agent_options(fn):
    opts = [
        click.option("--endpoint", help="Chat-completion URL."),
        click.option("--model", help="Model id sent to the endpoint."),
        click.option("--api-key-env", default="OPENAI_API_KEY", show_default=True,
                     help="Env var holding the API key; empty sends no auth header."),
        click.option("--temperature", type=float, default=0.0, show_default=True),
        click.option("--max-tokens", type=int, default=4096, show_default=True),
        click.option("--timeout", type=float, default=120.0, show_default=True),
        click.option("--retries", type=int, default=3, show_default=True),
        click.option("--parallelism", type=int, default=10, show_default=True,
                     help="Max requests in flight."),
        click.option("--price-input", type=float, default=0.0, show_default=True,
                     help="USD per input token, for the cost ledger."),
        click.option("--price-output", type=float, default=0.0, show_default=True),
        click.option("--cache-dir", type=click.Path(), default=None,
                     help="Response cache directory (defaults inside --out)."),
        click.option("--no-cache", is_flag=True, help="Disable the response cache."),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


def _agent_config(kw) -> AgentConfig:
    if not kw["endpoint"] or not kw["model"]:
        _fail("--endpoint and --model are required for this run")
    return AgentConfig(
        endpoint=kw["endpoint"],
        model=kw["model"],
        api_key_env=kw["api_key_env"],
        temperature=kw["temperature"],
        max_tokens=kw["max_tokens"],
        timeout=kw["timeout"],
        max_retries=kw["retries"],
        parallelism=kw["parallelism"],
        price_input=kw["price_input"],
        price_output=kw["price_output"],
    )


def _cache_for(kw, default_dir):
    if kw["no_cache"]:
        return None
    return ResponseCache(kw["cache_dir"] or default_dir)


@click.group()
def main():
    """Semantic-level evaluation toolkit for event extraction."""


@main.command()
@click.option("--instances", required=True, type=click.Path(exists=True))
@click.option("--criteria", "criteria_path", type=click.Path(exists=True),
              help="Criteria file; defaults to the stock rules.")
@click.option("--methods", default="semantic,exact", show_default=True,
              help=f"Comma list from: {', '.join(METHODS)}.")
@click.option("--trials", type=int, default=1, show_default=True,
              help="Judge passes; mean/std are reported over trials.")
@click.option("--out", required=True, type=click.Path(), help="Report directory.")
@click.option("--dataset-name", default=None, help="Label used in the report.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--similarity-threshold", type=float, default=0.5, show_default=True)
@click.option("--embed-endpoint", default=None, help="Embedding URL (similarity method).")
@click.option("--embed-model", default=None)
@click.option("--embed-api-key-env", default="OPENAI_API_KEY", show_default=True)
@click.option("--no-figures", is_flag=True, help="Skip figure rendering.")
@agent_options
def evaluate(**kw):
    """Score a dataset with the requested methods and write a report."""
    methods = [m.strip() for m in kw["methods"].split(",") if m.strip()]
    for m in methods:
        if m not in METHODS:
            _fail(f"unknown method: {m}")
    if not methods:
        _fail("no methods requested")
    instances = _load_instances(kw["instances"])
    criteria = _load_criteria(kw["criteria_path"])
    outdir = kw["out"]
    os.makedirs(outdir, exist_ok=True)

    rep = {
        "schema_version": report.SCHEMA_VERSION,
        "dataset": kw["dataset_name"] or os.path.basename(kw["instances"]),
        "instances": len(instances),
        "config": {
            "methods": methods,
            "trials": kw["trials"],
            "seed": kw["seed"],
            "criteria_sha256": criteria_fingerprint(criteria),
            "prompt_templates_sha256": templates_fingerprint(),
            "similarity_threshold": kw["similarity_threshold"],
            "model": kw["model"],
            "endpoint": kw["endpoint"],
            "temperature": kw["temperature"],
            "max_tokens": kw["max_tokens"],
            "parallelism": kw["parallelism"],
            "cache": not kw["no_cache"],
        },
        "methods": {},
        "warnings": [],
    }

    if "exact" in methods:
        scores = metrics.exact_match_scores(instances)
        rep["methods"]["exact"] = {"scores": report.scores_obj(scores)}
    if "headnoun" in methods:
        scores = metrics.head_noun_scores(instances)
        rep["methods"]["headnoun"] = {"scores": report.scores_obj(scores)}
    if "similarity" in methods:
        rep["methods"]["similarity"] = _similarity_entry(instances, kw, outdir)

    judgments_trial0 = None
    if "semantic" in methods:
        cfg = _agent_config(kw)
        ledger = CostLedger(cfg.price_input, cfg.price_output)
        cache = _cache_for(kw, os.path.join(outdir, "agent-cache"))
        runs = judge_trials(instances, criteria, cfg, trials=kw["trials"],
                            ledger=ledger, cache=cache)
        entry = {"trials": [], "judgment_files": []}
        per_metric = {"precision": [], "recall": [], "f1": []}
        unjudged_total = 0
        for run in runs:
            path = os.path.join(outdir, f"judgments-trial{run.trial}.jsonl")
            ingest.dump_judgments(run.records, path)
            entry["judgment_files"].append(os.path.basename(path))
            scores = metrics.semantic_scores(run.records, instances)
            for k, v in scores.as_floats().items():
                per_metric[k].append(v)
            entry["trials"].append({
                "trial": run.trial,
                "scores": report.scores_obj(scores),
                "unjudged": len(run.unjudged),
            })
            unjudged_total += len(run.unjudged)
            rep["warnings"].extend(run.warnings)
        stats = {k: metrics.trial_stats(v) for k, v in per_metric.items()}
        entry["mean"] = {k: s.mean for k, s in stats.items()}
        entry["std"] = {k: s.std for k, s in stats.items()}
        entry["n"] = kw["trials"]
        rep["methods"]["semantic"] = entry
        rep["unjudged_total"] = unjudged_total
        rep["cost"] = ledger.snapshot()
        judgments_trial0 = runs[0].records

    if judgments_trial0 is not None and "exact" in methods:
        cells = analysis.outcome_matrix(instances, judgments_trial0)
        rep["outcomes"] = analysis.outcome_counts(cells)

    written = report.write_report_files(rep, outdir, figures=not kw["no_figures"])
    for path in written:
        click.echo(f"wrote {path}")
    _echo_summary(rep)


def _similarity_entry(instances, kw, outdir):
    if not kw["embed_endpoint"] or not kw["embed_model"]:
        return {"status": "absent", "reason": "no embedding endpoint configured"}
    client = EmbeddingClient(
        EmbeddingConfig(kw["embed_endpoint"], kw["embed_model"], kw["embed_api_key_env"]),
        cache_dir=os.path.join(outdir, "embed-cache"),
    )
    try:
        scores = metrics.similarity_scores(instances, client, kw["similarity_threshold"])
    except EmbeddingUnavailable as e:
        return {"status": "absent", "reason": str(e)}
    return {"scores": report.scores_obj(scores), "threshold": kw["similarity_threshold"]}


def _echo_summary(rep):
    for method, entry in sorted(rep["methods"].items()):
        if entry.get("status") == "absent":
            click.echo(f"{method}: absent ({entry['reason']})")
            continue
        scores = entry["mean"] if method == "semantic" else entry["scores"]
        click.echo(
            f"{method}: p={100 * scores['precision']:.2f} "
            f"r={100 * scores['recall']:.2f} f1={100 * scores['f1']:.2f}"
        )


@main.command()
@click.option("--instances", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path(), help="Predictions JSONL path.")
@click.option("--shots", type=int, default=0, show_default=True)
@click.option("--shot-file", type=click.Path(exists=True),
              help="Instance JSONL whose gold mentions become worked examples.")
@click.option("--seed", type=int, default=0, show_default=True)
@agent_options
def infer(**kw):
    """Extract events with a model and write an evaluable predictions file."""
    instances = _load_instances(kw["instances"])
    shots = ()
    if kw["shots"]:
        if not kw["shot_file"]:
            _fail("--shots needs --shot-file")
        shots = sample_shots(_load_instances(kw["shot_file"]), kw["shots"], kw["seed"])
    cfg = _agent_config(kw)
    ledger = CostLedger(cfg.price_input, cfg.price_output)
    cache = _cache_for(kw, kw["out"] + ".cache")
    run = infer_instances(instances, cfg, shots=shots, ledger=ledger, cache=cache)
    ingest.dump_instances(run.instances, kw["out"])
    summary = {
        "instances": len(run.instances),
        "parse_failures": run.failures,
        "unlocated_spans": run.unlocated,
        "ambiguous_spans": run.ambiguous,
        "shots": kw["shots"],
        "seed": kw["seed"],
        "cost": ledger.snapshot(),
    }
    with open(kw["out"] + ".run.json", "w", encoding="utf-8") as f:
        json.dump(summary, f, sort_keys=True, indent=2)
        f.write("\n")
    click.echo(f"wrote {kw['out']} ({len(run.instances)} instances, "
               f"{len(run.failures)} parse failures, {run.unlocated} unlocated spans)")


@main.command()
@click.option("--instances", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path(), help="Report directory.")
@click.argument("judgment_files", nargs=-1, required=True, type=click.Path(exists=True))
def meta(instances, out, judgment_files):
    """Agreement between judges: pairwise and against a majority reference."""
    insts = _load_instances(instances)
    by_id = {i.id: i for i in insts}
    sources = _judgment_sources(insts, judgment_files)
    if len(sources) < 2:
        _fail("need judgments from at least two distinct judges")
    rep = _meta_report(by_id, sources)
    os.makedirs(out, exist_ok=True)
    path = os.path.join(out, "meta.json")
    report.write_json(rep, path)
    click.echo(f"wrote {path}")
    _write_meta_markdown(rep, os.path.join(out, "meta.md"))
    click.echo(f"wrote {os.path.join(out, 'meta.md')}")


def _judgment_sources(instances, judgment_files):
    """Group records by judge; each judge may carry several trials."""
    sources: dict[str, dict[int, dict]] = {}
    for path in judgment_files:
        try:
            records = ingest.load_judgments(path, instances)
        except ToolkitError as e:
            _fail(f"{path}: {e}")
        for rec in records:
            judge = rec.judge or os.path.basename(path)
            trial = sources.setdefault(judge, {}).setdefault(rec.trial, {})
            key = (rec.instance_id, rec.direction)
            if key in trial:
                _fail(f"{path}: duplicate judgment for {key} by {judge} trial {rec.trial}")
            trial[key] = rec
    return sources


def _common_items(by_id, sources):
    common = None
    for trials in sources.values():
        for records in trials.values():
            keys = set(records)
            common = keys if common is None else common & keys
    common = common or set()
    return sorted(common, key=lambda k: (k[0], k[1].value))


def _pooled_vector(records, items):
    out = []
    for key in items:
        out.extend(records[key].verdicts)
    return out


def _stat_pair(vec_a, vec_b):
    agreement = float(metrics.percent_agreement(vec_a, vec_b))
    try:
        rho, p = metrics.spearman(vec_a, vec_b)
        spearman_entry = {"rho": rho, "p_value": p}
    except ToolkitError as e:
        spearman_entry = {"status": "absent", "reason": str(e)}
    return {"percent_agreement": agreement, "spearman": spearman_entry}


def _meta_report(by_id, sources):
    items = _common_items(by_id, sources)
    if not items:
        _fail("judges share no common judged items")
    groups = {"pooled": items}
    for task in Task:
        for direction in Direction:
            sub = [k for k in items if by_id[k[0]].task == task and k[1] == direction]
            if sub:
                groups[f"{task.value}:{direction.value}"] = sub

    judges = sorted(sources)
    humans = [j for j in judges if j.startswith("human:")]
    rep = {
        "judges": judges,
        "items": len(items),
        "groups": {},
        "note": ("percent agreement and rank correlation are over pooled judged mentions; "
                 "per-task groups and the pooled group are both reported"),
    }
    for gname, keys in groups.items():
        gentry = {"pairwise": {}, "vs_reference": {}, "mentions": sum(
            len(sources[judges[0]][min(sources[judges[0]])][k].verdicts) for k in keys)}
        for i, ja in enumerate(judges):
            for jb in judges[i + 1:]:
                stats = []
                for ta, rec_a in sorted(sources[ja].items()):
                    for tb, rec_b in sorted(sources[jb].items()):
                        stats.append(_stat_pair(_pooled_vector(rec_a, keys),
                                                _pooled_vector(rec_b, keys)))
                gentry["pairwise"][f"{ja} vs {jb}"] = _fold_trial_stats(stats)
        human_refs = []
        for judge in judges:
            ref_judges = [h for h in humans if h != judge]
            if not ref_judges:
                continue
            ref_vectors = [_pooled_vector(sources[h][min(sources[h])], keys) for h in ref_judges]
            reference = (ref_vectors[0] if len(ref_vectors) == 1
                         else _majority(ref_vectors))
            stats = [
                _stat_pair(_pooled_vector(rec, keys), reference)
                for _, rec in sorted(sources[judge].items())
            ]
            folded = _fold_trial_stats(stats)
            gentry["vs_reference"][judge] = folded
            if judge in humans:
                human_refs.append(folded)
        if human_refs:
            gentry["human_average"] = {
                "percent_agreement": sum(h["percent_agreement"]["mean"] for h in human_refs)
                / len(human_refs),
                "spearman": _mean_or_absent([h["spearman"] for h in human_refs]),
            }
        rep["groups"][gname] = gentry
    return rep


def _majority(vectors):
    out = []
    for position in zip(*vectors):
        out.append(1 if sum(position) * 2 > len(position) else 0)
    return out


def _fold_trial_stats(stats):
    pa = metrics.trial_stats([s["percent_agreement"] for s in stats])
    entry = {"percent_agreement": {"mean": pa.mean, "std": pa.std, "n": pa.n}}
    rhos = [s["spearman"]["rho"] for s in stats if "rho" in s["spearman"]]
    if rhos:
        rho = metrics.trial_stats(rhos)
        ps = [s["spearman"]["p_value"] for s in stats if "rho" in s["spearman"]]
        entry["spearman"] = {"mean": rho.mean, "std": rho.std, "n": rho.n,
                             "max_p_value": max(ps)}
    else:
        entry["spearman"] = {"status": "absent",
                             "reason": stats[0]["spearman"].get("reason", "undefined")}
    return entry


def _mean_or_absent(entries):
    values = [e["mean"] for e in entries if "mean" in e]
    if not values:
        return {"status": "absent", "reason": "undefined for every annotator"}
    return {"mean": sum(values) / len(values), "n": len(values)}


def _write_meta_markdown(rep, path):
    lines = ["# Judge agreement", "",
             f"Judges: {', '.join(rep['judges'])} over {rep['items']} shared items.", ""]
    for gname, gentry in rep["groups"].items():
        lines.append(f"## {gname} ({gentry['mentions']} judged mentions)")
        lines.append("")
        lines.append("| Pair | Percent agreement | Spearman (x100) |")
        lines.append("| --- | --- | --- |")
        rows = list(gentry["pairwise"].items())
        rows += [(f"{j} vs reference", e) for j, e in gentry["vs_reference"].items()]
        for name, entry in rows:
            pa = entry["percent_agreement"]
            sp = entry["spearman"]
            sp_text = (f"{100 * sp['mean']:.2f} ±{100 * sp['std']:.2f}"
                       if "mean" in sp else "absent")
            lines.append(f"| {name} | {100 * pa['mean']:.2f} ±{100 * pa['std']:.2f} | {sp_text} |")
        if "human_average" in gentry:
            ha = gentry["human_average"]
            sp = ha["spearman"]
            sp_text = f"{100 * sp['mean']:.2f}" if "mean" in sp else "absent"
            lines.append(f"| human average | {100 * ha['percent_agreement']:.2f} | {sp_text} |")
        lines.append("")
    with open(path, "w", encoding="utf-8") as f:
        f.write("\n".join(lines))


@main.command()
@click.option("--instances", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path(), help="Judgment JSONL to append to.")
@click.option("--bind", default="127.0.0.1:8765", show_default=True)
@click.option("--criteria", "criteria_path", type=click.Path(exists=True))
@click.option("--tags", "tags_path", type=click.Path(), help="Reason-tag JSONL path.")
@click.option("--ui-dir", type=click.Path(exists=True), help="Built frontend directory.")
def serve(instances, out, bind, criteria_path, tags_path, ui_dir):
    """Run the human annotation service."""
    insts = _load_instances(instances)
    criteria = _load_criteria(criteria_path)
    if ui_dir is None and os.path.isfile(os.path.join("frontend", "dist", "index.html")):
        ui_dir = os.path.join("frontend", "dist")
    host, _, port = bind.partition(":")
    try:
        server = make_server(insts, out, criteria, host=host or "127.0.0.1",
                             port=int(port or 0), tags_path=tags_path, ui_dir=ui_dir)
    except OSError as e:
        _fail(f"cannot bind {bind}: {e}")
    click.echo(f"annotation service on http://{server.server_address[0]}:{server.server_address[1]}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        click.echo("stopping")
        server.shutdown()


@main.command()
@click.option("--instances", required=True, type=click.Path(exists=True))
@click.option("--json", "as_json", is_flag=True, help="Print JSON instead of a table.")
def stats(instances, as_json):
    """Dataset statistics: instances, types, and mention counts per task."""
    insts = _load_instances(instances)
    table = ingest.dataset_stats(insts)
    if as_json:
        click.echo(json.dumps(table, indent=2, sort_keys=True))
        return
    click.echo(f"{'task':<6}{'#Inst':>8}{'#ET':>6}{'#Evt':>8}{'#RT':>6}{'#Arg':>8}")
    for task, row in table.items():
        click.echo(f"{task:<6}{row['instances']:>8}{row['event_types']:>6}"
                   f"{row['events']:>8}{row['role_types']:>6}{row['arguments']:>8}")


@main.command()
@click.option("--instances", required=True, type=click.Path(exists=True))
@click.option("--judgments", required=True, type=click.Path(exists=True))
@click.option("--tags", "tags_path", type=click.Path(exists=True),
              help="Reason-tag JSONL from the annotation service.")
@click.option("--trial", type=int, default=0, show_default=True)
@click.option("--out", required=True, type=click.Path())
@click.option("--no-figures", is_flag=True)
def analyze(instances, judgments, tags_path, trial, out, no_figures):
    """Outcome matrix of token-level vs judge verdicts, plus reason shares."""
    insts = _load_instances(instances)
    records = [r for r in ingest.load_judgments(judgments, insts) if r.trial == trial]
    judges = sorted({r.judge for r in records})
    if len(judges) > 1:
        _fail(f"multiple judges in file ({', '.join(judges)}); split them first")
    try:
        cells = analysis.outcome_matrix(insts, records)
    except ToolkitError as e:
        _fail(str(e))
    rep = {
        "judge": judges[0] if judges else "",
        "trial": trial,
        "judged_mentions": len(cells),
        "outcomes": analysis.outcome_counts(cells),
    }
    if tags_path:
        tags = ingest.load_reason_tags(tags_path)
        rep["reason_tags"] = len(tags)
        rep["reason_distribution"] = analysis.reason_distribution(tags)
        majority = analysis.majority_tags(tags)
        rep["majority_reason_distribution"] = analysis.reason_distribution(majority)
    os.makedirs(out, exist_ok=True)
    path = os.path.join(out, "analysis.json")
    report.write_json(rep, path)
    click.echo(f"wrote {path}")
    if not no_figures:
        figdir = os.path.join(out, "figures")
        os.makedirs(figdir, exist_ok=True)
        report.outcomes_figure(rep["outcomes"], os.path.join(figdir, "outcomes.png"))
        for side, dist in rep.get("reason_distribution", {}).items():
            report.reasons_figure(dist, side, os.path.join(figdir, f"reasons_{side}.png"))
        click.echo(f"wrote figures under {figdir}")


if __name__ == "__main__":
    main()
