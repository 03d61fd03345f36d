"""Batch command-line interface.

Exit codes: 0 success, 2 usage error, 3 data error (unreadable or invalid
input), 4 computation error (non-convergence, infeasible calibration).
"""

import dataclasses
import functools
import json
import sys

import click

from . import cohort as cohort_mod
from . import fairness as fairness_mod
from . import reports, riskmodels, subgroups, synth
from . import schema as schema_mod
from .errors import ComputationError, DataError

DATA_EXIT = 3
COMPUTE_EXIT = 4


def _engine_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except DataError as exc:
            click.echo(f"data error: {exc}", err=True)
            sys.exit(DATA_EXIT)
        except ComputationError as exc:
            click.echo(f"computation error: {exc}", err=True)
            sys.exit(COMPUTE_EXIT)
        except OSError as exc:
            click.echo(f"data error: {exc}", err=True)
            sys.exit(DATA_EXIT)
    return wrapper


def _write_json(payload, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load_schema(path):
    return schema_mod.load_schema(path) if path else schema_mod.builtin_schema()


def _split_csv(value):
    return tuple(part.strip() for part in value.split(",") if part.strip())


def _parse_protected(values):
    splits = []
    for raw in values:
        try:
            attribute, levels = raw.split("=", 1)
            privileged, unprivileged = levels.split(",", 1)
        except ValueError:
            raise click.UsageError(
                f"--protected expects attr=privileged,unprivileged, got {raw!r}") from None
        splits.append(fairness_mod.ProtectedSplit(
            attribute.strip(), privileged.strip(), unprivileged.strip()))
    return splits


def _parse_bins(raw):
    # var=edge:edge:edge, repeatable
    bins = {}
    for item in raw:
        try:
            name, edges = item.split("=", 1)
            bins[name.strip()] = tuple(float(e) for e in edges.split(":"))
        except ValueError:
            raise click.UsageError(
                f"--bins expects var=e0:e1:..., got {item!r}") from None
    return bins


@click.group()
@click.version_option(package_name="rmx")
def main():
    """Survival risk model evaluation and fairness analytics."""


@main.command("synth")
@click.option("--spec", "spec_path", type=click.Path(), help="SynthSpec JSON; omit for the built-in default.")
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.option("--seed", type=int, default=None, help="Override the spec's seed.")
@_engine_errors
def synth_cmd(spec_path, out_path, seed):
    """Generate a synthetic cohort CSV."""
    if spec_path:
        spec = synth.load_spec(spec_path)
        if seed is not None:
            spec = dataclasses.replace(spec, seed=seed)
    else:
        spec = synth.default_synth_spec(**({"seed": seed} if seed is not None else {}))
    snapshot = synth.generate_synthetic(spec)
    cohort_mod.save_csv(snapshot, out_path)
    for description, count in snapshot.ledger:
        click.echo(f"{count:>10}  {description}")
    events = int(snapshot.event_flag.sum())
    click.echo(f"{events:>10}  events within horizon "
               f"({events / snapshot.n:.4%}, target {spec.target_incidence:.4%})")


@main.command("report")
@click.option("--cohort", "cohort_path", type=click.Path(), required=True)
@click.option("--schema", "schema_path", type=click.Path(), default=None,
              help="Schema JSON; defaults to the built-in schema.")
@click.option("--filter", "filter_path", type=click.Path(), default=None,
              help="Selection filter JSON (list of rules).")
@click.option("--group-by", required=True, help="Comma-separated subgroup variables.")
@click.option("--bins", "bins_raw", multiple=True,
              help="Bins for a continuous subgroup variable, var=e0:e1:...")
@click.option("--models", "models_raw", default="ehr-af,charge-af,c2hest",
              show_default=True, help="Comma-separated model names.")
@click.option("--model-file", "model_files", multiple=True, type=click.Path(),
              help="Extra model definition JSON, repeatable.")
@click.option("--threshold-risk", type=float, default=0.05, show_default=True)
@click.option("--protected", "protected_raw", multiple=True,
              help="attr=privileged,unprivileged; repeatable.")
@click.option("--audit/--no-audit", default=False, show_default=True,
              help="Run the individual-fairness audit.")
@click.option("--audit-lambda", type=float, default=1.0, show_default=True)
@click.option("--audit-fraction", type=float, default=None,
              help="Audit only this fraction of each subgroup.")
@click.option("--audit-seed", type=int, default=0, show_default=True)
@click.option("--hist-bins", type=int, default=40, show_default=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@_engine_errors
def report_cmd(cohort_path, schema_path, filter_path, group_by, bins_raw,
               models_raw, model_files, threshold_risk, protected_raw,
               audit, audit_lambda, audit_fraction, audit_seed,
               hist_bins, out_path):
    """Run the full subgroup summary and write a JSON report."""
    if not 0.0 < threshold_risk < 1.0:
        raise click.UsageError("--threshold-risk must lie strictly inside (0, 1)")
    schema = _load_schema(schema_path)
    rules = ()
    if filter_path:
        with open(filter_path, encoding="utf-8") as fh:
            rules = cohort_mod.filter_from_json(json.load(fh))
    snapshot = cohort_mod.load_csv(cohort_path, schema, rules)

    registry = {m.name: m for m in riskmodels.builtin_models()}
    for path in model_files:
        model = riskmodels.load_model(path)
        registry[model.name] = model
    model_names = _split_csv(models_raw)
    unknown = [name for name in model_names if name not in registry]
    if unknown:
        raise click.UsageError(f"unknown models: {', '.join(unknown)}")
    models = [registry[name] for name in model_names]

    spec = subgroups.SubgroupSpec(_split_csv(group_by), _parse_bins(bins_raw))
    partition = subgroups.build_partition(snapshot, spec)
    splits = _parse_protected(protected_raw)
    audit_doc = None
    if audit:
        audit_doc = reports.audit_options({
            "lambda": audit_lambda,
            "sample_fraction": audit_fraction,
            "seed": audit_seed,
        })

    summary = reports.build_summary(snapshot, partition, models,
                                    threshold_risk, splits, audit_doc)
    horizon = max(m.horizon_days for m in models)
    payload = {
        "request": {
            "cohort": str(cohort_path),
            "group_by": list(spec.variables),
            "bins": {k: list(v) for k, v in spec.bins.items()},
            "models": list(model_names),
            "threshold_risk": threshold_risk,
            "protected": [
                {"attribute": s.attribute, "privileged": s.privileged_level,
                 "unprivileged": s.unprivileged_level}
                for s in splits
            ],
            "audit": audit_doc,
            "hist_bins": hist_bins,
        },
        "summary": summary,
        "distribution": {
            m.name: reports.build_distribution(snapshot, m, threshold_risk, hist_bins)
            for m in models
        },
        "survival": reports.build_survival(snapshot, partition, horizon),
    }
    _write_json(payload, out_path)
    click.echo(f"wrote {out_path}: {len(partition.subgroups)} subgroups x "
               f"{len(models)} models, {snapshot.n} patients")


@main.command("explain")
@click.option("--cohort", "cohort_path", type=click.Path(), required=True)
@click.option("--schema", "schema_path", type=click.Path(), default=None)
@click.option("--group-by", required=True)
@click.option("--bins", "bins_raw", multiple=True)
@click.option("--subgroup", "subgroup_label", required=True,
              help="Subgroup label, e.g. 'income=lt_18k'.")
@click.option("--model", "model_name", required=True)
@click.option("--fraction", type=float, default=0.1, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@_engine_errors
def explain_cmd(cohort_path, schema_path, group_by, bins_raw, subgroup_label,
                model_name, fraction, seed, out_path):
    """Write the SHAP and parallel-trends payload for one subgroup."""
    if not 0.0 < fraction <= 1.0:
        raise click.UsageError("--fraction must lie in (0, 1]")
    schema = _load_schema(schema_path)
    snapshot = cohort_mod.load_csv(cohort_path, schema)
    registry = {m.name: m for m in riskmodels.builtin_models()}
    if model_name not in registry:
        raise click.UsageError(f"unknown model: {model_name}")
    spec = subgroups.SubgroupSpec(_split_csv(group_by), _parse_bins(bins_raw))
    partition = subgroups.build_partition(snapshot, spec)
    group = partition.find(subgroup_label)
    payload = reports.build_explanation(snapshot, partition, group,
                                        registry[model_name], fraction, seed)
    _write_json(payload, out_path)
    click.echo(f"wrote {out_path}: {len(payload['records'])} records, "
               f"{len(payload['features'])} features")


@main.command("models")
@click.option("--out", "out_path", type=click.Path(), default=None,
              help="Write the registry as JSON instead of a table.")
def models_cmd(out_path):
    """List the built-in risk models."""
    models = riskmodels.builtin_models()
    if out_path:
        _write_json([riskmodels.model_to_json(m) for m in models], out_path)
        click.echo(f"wrote {out_path}")
        return
    for model in models:
        click.echo(f"{model.name}: {len(model.terms)} terms, c={model.c}, "
                   f"bias={model.bias}, horizon={model.horizon_days}d")


@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--max-concurrent-jobs", type=int, default=None,
              help="Cap on concurrent requests.")
@click.option("--default-threshold-risk", type=float, default=0.05, show_default=True)
@click.option("--frontend", "frontend_dir", type=click.Path(), default=None,
              help="Directory with a built web UI to serve at /.")
def serve_cmd(host, port, max_concurrent_jobs, default_threshold_risk, frontend_dir):
    """Run the HTTP API."""
    import uvicorn

    from .service import create_app

    app = create_app(default_threshold_risk, frontend_dir)
    uvicorn.run(app, host=host, port=port, limit_concurrency=max_concurrent_jobs)


if __name__ == "__main__":
    main()
