"""Command-line workflow: simulate -> split -> train -> evidence -> odd -> benchmark.

All outputs are files; progress and warnings go to standard error. Exit codes:
0 success, 1 usage error, 2 data/parse error, 3 acceptance failure (low
training accuracy or an unacceptable safety case).
"""

from __future__ import annotations

import dataclasses
import json
import logging
import sys
from pathlib import Path

import click
import numpy as np

from . import bench as bench_mod
from . import evidence as evidence_mod
from . import odd as odd_mod
from . import simulate as sim_mod
from .dataio import load_records, split as split_records, write_records
from .engine import FuzzyMonitorClassifier
from .errors import EncodingError, FuzzymonError
from .monitors import DecisionTreeMonitor, FuzzyMonitorAdapter, GaussianNBMonitor, RandomMonitor
from .schema import encode, load_schema, save_schema

logger = logging.getLogger("fuzzymon")


class AcceptanceFailure(Exception):
    """Raised when a run completes but fails its acceptance threshold."""


def _fmt_of(path: str, fmt: str | None) -> str:
    if fmt:
        return fmt
    return "csv" if str(path).endswith(".csv") else "jsonl"


def _write_json(doc: dict, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _drop_unencodable(records, schema):
    """Split off records whose values fall outside the schema."""
    kept = []
    dropped = 0
    for record in records:
        try:
            encode(record, schema)
        except EncodingError:
            dropped += 1
        else:
            kept.append(record)
    return kept, dropped


@click.group()
def cli() -> None:
    """Fuzzy monitor toolkit."""


@cli.command("simulate")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option("--schema-out", type=click.Path(dir_okay=False))
@click.option("--seed", type=int, default=None, help="Override the scenario seed.")
@click.option("--episodes", type=int, default=None, help="Override the episode count.")
@click.option("--fmt", type=click.Choice(["jsonl", "csv"]), default=None)
def cmd_simulate(config_path, out, schema_out, seed, episodes, fmt):
    """Generate synthetic records (default scenario unless --config is given)."""
    if config_path:
        config = sim_mod.load_sim_config(config_path)
    else:
        config = sim_mod.default_scenario()
    if seed is not None:
        config = dataclasses.replace(config, seed=seed)
    if episodes is not None:
        config = dataclasses.replace(config, episodes=episodes)
    records = sim_mod.generate(config)
    n = write_records(records, out, _fmt_of(out, fmt), schema=config.schema)
    logger.info("wrote %d records over %d episodes to %s", n, config.episodes, out)
    if schema_out:
        save_schema(config.schema, schema_out)
        logger.info("wrote schema to %s", schema_out)


@cli.command("split")
@click.option("--data", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--schema", "schema_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--train-fraction", type=float, default=0.7, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out-train", required=True, type=click.Path(dir_okay=False))
@click.option("--out-val", required=True, type=click.Path(dir_okay=False))
@click.option("--fmt", type=click.Choice(["jsonl", "csv"]), default=None)
def cmd_split(data, schema_path, train_fraction, seed, out_train, out_val, fmt):
    """Episode-preserving deterministic split into train/validation files."""
    schema = load_schema(schema_path) if schema_path else None
    records, _ = load_records(data, _fmt_of(data, fmt), schema=schema)
    train, val = split_records(records, train_fraction, seed)
    write_records(train, out_train, _fmt_of(out_train, fmt), schema=schema)
    write_records(val, out_val, _fmt_of(out_val, fmt), schema=schema)
    logger.info("split %d records into %d train / %d validation", len(records), len(train), len(val))


@cli.command("train")
@click.option("--schema", "schema_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--data", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--model", "resume_path", type=click.Path(exists=True, dir_okay=False),
              help="Existing model state to resume from.")
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option("--window", type=int, default=500, show_default=True)
@click.option("--target-accuracy", type=float, default=0.9, show_default=True)
@click.option("--rls-init", type=float, default=1000.0, show_default=True)
@click.option("--merge-threshold", type=float, default=0.8, show_default=True)
@click.option("--utility-threshold", type=float, default=0.01, show_default=True)
@click.option("--min-support", type=int, default=20, show_default=True)
@click.option("--seed", type=int, default=None)
@click.option("--allow-low-accuracy", is_flag=True, default=False)
@click.option("--fmt", type=click.Choice(["jsonl", "csv"]), default=None)
@click.pass_context
def cmd_train(ctx, schema_path, data, resume_path, out, window, target_accuracy, rls_init,
              merge_threshold, utility_threshold, min_support, seed, allow_low_accuracy, fmt):
    """Stream records through test-then-train learning and save the model state."""
    if resume_path:
        model = FuzzyMonitorClassifier.load_state(resume_path)
        logger.info("resuming from %s (%d samples seen)", resume_path, model.n_seen_)
        overridden = [
            name
            for name in ("window", "target_accuracy", "rls_init", "merge_threshold",
                         "utility_threshold", "min_support")
            if ctx.get_parameter_source(name) == click.core.ParameterSource.COMMANDLINE
        ]
        if overridden:
            logger.warning(
                "ignoring hyperparameter override(s) %s: a resumed model keeps its stored values",
                ", ".join(overridden),
            )
        if schema_path and model.schema is None:
            model.schema = load_schema(schema_path)
        schema = model.schema
    else:
        if not schema_path:
            raise click.UsageError("--schema is required when training from scratch")
        schema = load_schema(schema_path)
        model = FuzzyMonitorClassifier(
            schema=schema,
            rls_init_scale=rls_init,
            merge_threshold=merge_threshold,
            utility_threshold=utility_threshold,
            min_support_for_prune=min_support,
            window=window,
            target_accuracy=target_accuracy,
            random_state=seed,
        )
    if schema is None:
        raise click.UsageError("no schema available (pass --schema or a model that embeds one)")
    records, _ = load_records(data, _fmt_of(data, fmt), schema=schema)
    if not records:
        raise FuzzymonError(f"no records in {data}")
    dropped = 0
    for i, record in enumerate(records, start=1):
        try:
            vector = encode(record, schema)
        except EncodingError:
            dropped += 1
            continue
        model.learn_one(vector, record.mp)
        if i % 1000 == 0:
            acc = model.rolling_accuracy()
            logger.info(
                "samples=%d clouds=%d cumulative=%s windowed=%s",
                i,
                model.n_clouds_,
                "n/a" if acc.cumulative is None else f"{acc.cumulative:.4f}",
                "n/a" if acc.windowed is None else f"{acc.windowed:.4f}",
            )
    if dropped:
        logger.warning("dropped %d record(s) with values outside the schema", dropped)
    model.save_state(out)
    acc = model.rolling_accuracy()
    logger.info(
        "trained on %d samples, %d dataclouds, cumulative=%s windowed=%s -> %s",
        model.n_seen_,
        model.n_clouds_,
        "n/a" if acc.cumulative is None else f"{acc.cumulative:.4f}",
        "n/a" if acc.windowed is None else f"{acc.windowed:.4f}",
        out,
    )
    if acc.windowed is None or acc.windowed < model.target_accuracy:
        message = (
            f"windowed accuracy {acc.windowed} below target {model.target_accuracy}"
        )
        if allow_low_accuracy:
            logger.warning("%s (allowed)", message)
        else:
            raise AcceptanceFailure(message)


@cli.command("evidence")
@click.option("--model", "model_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option("--q", type=float, default=99.0, show_default=True,
              help="Confidence percentage for sampling-error bounds.")
@click.option("--gamma-c", type=float, default=1e-3, show_default=True,
              help="Acceptable system-level hazard rate.")
@click.option("--max-mp-rate", type=float, default=0.05, show_default=True)
@click.option("--crash-rate", type=float, default=1.0, show_default=True)
@click.option("--speed", type=float, default=40.0, show_default=True, help="Speed in km/h.")
@click.option("--fps", type=float, default=10.0, show_default=True)
@click.option("--spacing", type=float, default=500.0, show_default=True,
              help="Mean distance between scenario encounters, meters.")
@click.option("--format", "fmt", type=click.Choice(["json", "text"]), default="json",
              show_default=True)
def cmd_evidence(model_path, out, q, gamma_c, max_mp_rate, crash_rate, speed, fps, spacing, fmt):
    """Compute per-cloud evidence and the bottom-up safety case."""
    model = FuzzyMonitorClassifier.load_state(model_path)
    rows = evidence_mod.collect_evidence(model, confidence=q, max_mp_rate=max_mp_rate)
    params = evidence_mod.SafetyCaseParams(
        acceptable_hazard_rate=gamma_c,
        crash_given_hazard=crash_rate,
        speed_kmh=speed,
        frame_rate_fps=fps,
        scenario_spacing_m=spacing,
        confidence=q,
    )
    case = evidence_mod.assemble_safety_case(rows, params)
    for note in case.notes:
        logger.warning("%s", note)
    if fmt == "json":
        doc = evidence_mod.safety_case_to_json_dict(case)
        doc["all_clouds"] = [r.to_json_dict() for r in rows]
        _write_json(doc, out)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(evidence_mod.safety_case_to_text(case, per_cloud=rows))
    logger.info(
        "hazard rate %.6g vs acceptable %.6g (residual %.6g): %s -> %s",
        case.hazard_rate,
        case.acceptable_hazard_rate,
        case.residual,
        "acceptable" if case.acceptable else "NOT acceptable",
        out,
    )
    if not case.acceptable:
        raise AcceptanceFailure(
            f"safety case not acceptable: hazard rate {case.hazard_rate:.6g} exceeds "
            f"{case.acceptable_hazard_rate:.6g}"
        )


@cli.group("odd")
def cmd_odd() -> None:
    """Derive or apply an ODD specification."""


@cmd_odd.command("derive")
@click.option("--model", "model_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option("--q", type=float, default=99.0, show_default=True)
@click.option("--max-mp-rate", type=float, default=0.05, show_default=True)
@click.option("--exclude-threshold", type=float, default=0.5, show_default=True)
@click.option("--group-label", type=str, default="visibility", show_default=True)
def cmd_odd_derive(model_path, out, q, max_mp_rate, exclude_threshold, group_label):
    """Derive a specification from the model's shortlisted dataclouds."""
    model = FuzzyMonitorClassifier.load_state(model_path)
    if model.schema is None:
        raise FuzzymonError("the model state carries no schema; retrain with --schema")
    shortlist = evidence_mod.shortlist_clouds(model, confidence=q, max_mp_rate=max_mp_rate)
    spec = odd_mod.derive_odd(
        model, shortlist, model.schema,
        group_label=group_label, exclude_threshold=exclude_threshold,
    )
    if not spec.includes:
        logger.warning("no reliable clouds: the derived specification includes nothing")
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(odd_mod.emit(spec))
    logger.info(
        "derived ODD with %d include line(s) and %d exclude block(s) -> %s",
        len(spec.includes), len(spec.excludes), out,
    )


@cmd_odd.command("check")
@click.option("--odd", "spec_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--schema", "schema_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--data", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option("--fmt", type=click.Choice(["jsonl", "csv"]), default=None)
def cmd_odd_check(spec_path, schema_path, data, out, fmt):
    """Filter a dataset down to the records inside the specification."""
    schema = load_schema(schema_path)
    spec = odd_mod.parse(Path(spec_path).read_text(encoding="utf-8"))
    records, _ = load_records(data, _fmt_of(data, fmt), schema=schema)
    kept, retention = odd_mod.filter_records(spec, records, schema)
    write_records(kept, out, _fmt_of(out, fmt), schema=schema)
    logger.info(
        "retained %d of %d records (retention %.4f) -> %s",
        len(kept), len(records), retention, out,
    )


@cli.command("benchmark")
@click.option("--model", "model_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--schema", "schema_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--train", "train_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--data", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--odd", "spec_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--random-p", type=float, default=0.5, show_default=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option("--format", "fmt", type=click.Choice(["json", "text"]), default="json",
              show_default=True)
@click.option("--data-fmt", type=click.Choice(["jsonl", "csv"]), default=None)
def cmd_benchmark(model_path, schema_path, train_path, data, spec_path, seed, random_p, out,
                  fmt, data_fmt):
    """Benchmark the fuzzy monitor against the baselines on a validation set."""
    model = FuzzyMonitorClassifier.load_state(model_path)
    schema = load_schema(schema_path) if schema_path else model.schema
    if schema is None:
        raise FuzzymonError("no schema available (pass --schema or a model that embeds one)")
    train_records, _ = load_records(train_path, _fmt_of(train_path, data_fmt), schema=schema)
    eval_records_raw, _ = load_records(data, _fmt_of(data, data_fmt), schema=schema)
    train_records, dropped_train = _drop_unencodable(train_records, schema)
    eval_records_raw, dropped_eval = _drop_unencodable(eval_records_raw, schema)
    if dropped_train or dropped_eval:
        logger.warning(
            "dropped %d train / %d evaluation record(s) with values outside the schema",
            dropped_train, dropped_eval,
        )
    if not train_records or not eval_records_raw:
        raise FuzzymonError("no usable records after schema filtering")
    X_train = np.stack([encode(r, schema).values for r in train_records])
    y_train = np.array([r.mp for r in train_records])
    monitors = {
        "random": RandomMonitor(p=random_p, random_state=seed).fit(X_train, y_train),
        "gaussian-nb": GaussianNBMonitor().fit(X_train, y_train),
        "decision-tree": DecisionTreeMonitor().fit(X_train, y_train),
        "fuzzy": FuzzyMonitorAdapter(model),  # already trained on the training split
    }
    spec = None
    if spec_path:
        spec = odd_mod.parse(Path(spec_path).read_text(encoding="utf-8"))
    records = bench_mod.make_eval_records(eval_records_raw, schema, odd_spec=spec)
    report = bench_mod.benchmark(
        monitors,
        records,
        use_odd_filter=spec is not None,
        config={"seed": seed, "random_p": random_p, "odd_filtered": spec is not None},
    )
    if fmt == "json":
        _write_json(report.to_json_dict(), out)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(report.to_text())
    logger.info(
        "benchmarked %d monitor(s) on %d record(s) (retention %.4f) -> %s",
        len(monitors), report.n_evaluated, report.retention, out,
    )


_DATA_ERRORS = (FuzzymonError, OSError, json.JSONDecodeError, ValueError, KeyError)


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(message)s")
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return 1
    except click.UsageError as exc:
        click.echo(f"usage error: {exc.format_message()}", err=True)
        return 1
    except AcceptanceFailure as exc:
        click.echo(f"acceptance failure: {exc}", err=True)
        return 3
    except _DATA_ERRORS as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
