"""Record file reading/writing (JSON-lines and CSV) and episode-preserving splits."""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .errors import RecordParseError
from .schema import FeatureSchema, RawRecord

META_FIELDS = ("mp", "hmp", "episode", "frame", "exemplar")

_TRUE = {"true", "1", "yes"}
_FALSE = {"false", "0", "no"}


def _parse_binary(value: Any, name: str) -> int:
    if isinstance(value, bool):
        return int(value)
    if isinstance(value, (int, np.integer)) and value in (0, 1):
        return int(value)
    if isinstance(value, str) and value.strip() in ("0", "1"):
        return int(value.strip())
    raise ValueError(f"{name} must be 0 or 1, got {value!r}")


def _parse_int(value: Any, name: str) -> int:
    try:
        if isinstance(value, str):
            return int(value.strip())
        if isinstance(value, bool):
            raise ValueError
        return int(value)
    except (TypeError, ValueError):
        raise ValueError(f"{name} must be an integer, got {value!r}") from None


def _coerce_feature(value: str, kind: str, name: str) -> Any:
    """Coerce a CSV cell to the schema-declared kind."""
    if kind == "boolean":
        lowered = value.strip().lower()
        if lowered in _TRUE:
            return True
        if lowered in _FALSE:
            return False
        raise ValueError(f"feature {name!r} expects a boolean, got {value!r}")
    if kind == "numeric":
        try:
            return float(value)
        except ValueError:
            raise ValueError(f"feature {name!r} expects a number, got {value!r}") from None
    return value


def _record_from_mapping(obj: dict[str, Any], schema: FeatureSchema | None) -> RawRecord:
    missing = [k for k in ("mp", "episode", "frame") if k not in obj]
    if missing:
        raise ValueError(f"missing required field(s): {', '.join(missing)}")
    features = {k: v for k, v in obj.items() if k not in META_FIELDS}
    if schema is not None:
        for f in schema.features:
            if f.name in features and isinstance(features[f.name], str) and f.kind != "categorical":
                features[f.name] = _coerce_feature(features[f.name], f.kind, f.name)
    exemplar = obj.get("exemplar")
    return RawRecord(
        features=features,
        mp=_parse_binary(obj["mp"], "mp"),
        hmp=_parse_binary(obj.get("hmp", 0), "hmp"),
        episode=_parse_int(obj["episode"], "episode"),
        frame=_parse_int(obj["frame"], "frame"),
        exemplar=str(exemplar) if exemplar not in (None, "") else None,
    )


def load_records(
    path: str | Path,
    fmt: str = "jsonl",
    schema: FeatureSchema | None = None,
    fail_fast: bool = True,
) -> tuple[list[RawRecord], list[RecordParseError]]:
    """Read records in file order.

    With fail_fast the first malformed line raises; otherwise malformed lines
    are collected (with their line numbers) and reading continues.
    """
    if fmt == "jsonl":
        return _load_jsonl(Path(path), schema, fail_fast)
    if fmt == "csv":
        return _load_csv(Path(path), schema, fail_fast)
    raise ValueError(f"unknown record format {fmt!r} (expected 'jsonl' or 'csv')")


def _load_jsonl(path, schema, fail_fast):
    records: list[RawRecord] = []
    issues: list[RecordParseError] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                if not isinstance(obj, dict):
                    raise ValueError("each line must be a JSON object")
                records.append(_record_from_mapping(obj, schema))
            except (json.JSONDecodeError, ValueError) as exc:
                err = RecordParseError(lineno, str(exc))
                if fail_fast:
                    raise err from None
                issues.append(err)
    return records, issues


def _load_csv(path, schema, fail_fast):
    if schema is None:
        raise ValueError("CSV records require a schema to type the columns")
    kinds = {f.name: f.kind for f in schema.features}
    records: list[RawRecord] = []
    issues: list[RecordParseError] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            lineno = reader.line_num
            try:
                if None in row or any(v is None for v in row.values()):
                    raise ValueError("wrong number of columns")
                obj: dict[str, Any] = {}
                for key, value in row.items():
                    if key in kinds:
                        obj[key] = _coerce_feature(value, kinds[key], key)
                    else:
                        obj[key] = value
                records.append(_record_from_mapping(obj, schema))
            except ValueError as exc:
                err = RecordParseError(lineno, str(exc))
                if fail_fast:
                    raise err from None
                issues.append(err)
    return records, issues


def write_records(
    records: Iterable[RawRecord],
    path: str | Path,
    fmt: str = "jsonl",
    schema: FeatureSchema | None = None,
) -> int:
    """Write records; returns the number written."""
    records = list(records)
    if fmt == "jsonl":
        with open(path, "w", encoding="utf-8") as fh:
            for rec in records:
                obj = dict(rec.features)
                obj["mp"] = rec.mp
                obj["hmp"] = rec.hmp
                obj["episode"] = rec.episode
                obj["frame"] = rec.frame
                if rec.exemplar is not None:
                    obj["exemplar"] = rec.exemplar
                fh.write(json.dumps(obj, sort_keys=True))
                fh.write("\n")
        return len(records)
    if fmt == "csv":
        if schema is None:
            raise ValueError("CSV output requires a schema to fix the column order")
        names = [f.name for f in schema.features]
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(names + ["mp", "hmp", "episode", "frame", "exemplar"])
            for rec in records:
                row = []
                for f in schema.features:
                    value = rec.features.get(f.name, "")
                    if f.kind == "boolean":
                        value = "true" if value else "false"
                    row.append(value)
                row += [rec.mp, rec.hmp, rec.episode, rec.frame, rec.exemplar or ""]
                writer.writerow(row)
        return len(records)
    raise ValueError(f"unknown record format {fmt!r} (expected 'jsonl' or 'csv')")


def split(
    records: Sequence[RawRecord],
    train_fraction: float,
    seed: int,
) -> tuple[list[RawRecord], list[RawRecord]]:
    """Deterministic episode-preserving split.

    Episodes are shuffled by the seed and greedily assigned to the training
    side until it holds floor(n * train_fraction) records; all frames of an
    episode land on the same side so consecutive-miss hazard runs stay intact.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    if len(records) == 0:
        raise ValueError("cannot split an empty record set")
    episodes: dict[int, list[RawRecord]] = {}
    order: list[int] = []
    for rec in records:
        if rec.episode not in episodes:
            episodes[rec.episode] = []
            order.append(rec.episode)
        episodes[rec.episode].append(rec)
    rng = np.random.default_rng(seed)
    shuffled = [order[i] for i in rng.permutation(len(order))]
    target = int(len(records) * train_fraction)
    train: list[RawRecord] = []
    val: list[RawRecord] = []
    for ep in shuffled:
        part = train if len(train) < target else val
        part.extend(episodes[ep])
    return train, val
