"""Feature schema and deterministic encoding of operating-condition records.

Heterogeneous operating conditions (categorical literals, booleans, physical
quantities) are mapped to a fixed-length vector in [0, 1]: one-hot blocks for
categoricals, 0/1 for booleans, min-max scaling against declared ranges for
numerics. Encoding is deterministic so that identical records always produce
identical vectors.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .errors import EncodingError, SchemaError

KINDS = ("categorical", "boolean", "numeric")

_MISSING = object()


@dataclass(frozen=True)
class FeatureDef:
    """One operating-condition feature: a name, a kind, and its domain."""

    name: str
    kind: str
    values: tuple[str, ...] | None = None  # categorical only
    bounds: tuple[float, float] | None = None  # numeric only: (lo, hi) in raw units

    @property
    def width(self) -> int:
        """Number of encoded components this feature occupies."""
        if self.kind == "categorical":
            return len(self.values or ())
        return 1


@dataclass(frozen=True)
class FeatureSchema:
    """Ordered feature definitions fixing the encoded vector layout.

    Construction does not validate; run validate_schema (done automatically
    when loading from JSON) before encoding against a schema.
    """

    features: tuple[FeatureDef, ...]

    @property
    def encoded_dim(self) -> int:
        return sum(f.width for f in self.features)

    @property
    def categorical(self) -> tuple[FeatureDef, ...]:
        return tuple(f for f in self.features if f.kind == "categorical")

    @property
    def boolean(self) -> tuple[FeatureDef, ...]:
        return tuple(f for f in self.features if f.kind == "boolean")

    @property
    def numeric(self) -> tuple[FeatureDef, ...]:
        return tuple(f for f in self.features if f.kind == "numeric")

    def feature(self, name: str) -> FeatureDef:
        for f in self.features:
            if f.name == name:
                return f
        raise KeyError(name)

    def offset(self, name: str) -> int:
        """Index of the first encoded component of feature ``name``."""
        pos = 0
        for f in self.features:
            if f.name == name:
                return pos
            pos += f.width
        raise KeyError(name)

    def to_json_dict(self) -> dict:
        out = []
        for f in self.features:
            entry: dict[str, Any] = {"name": f.name, "kind": f.kind}
            if f.kind == "categorical":
                entry["values"] = list(f.values or ())
            elif f.kind == "numeric":
                entry["range"] = list(f.bounds or ())
            out.append(entry)
        return {"features": out}

    @classmethod
    def from_json_dict(cls, doc: Mapping) -> "FeatureSchema":
        try:
            raw = doc["features"]
        except (KeyError, TypeError):
            raise SchemaError("schema document must contain a 'features' list")
        if not isinstance(raw, list):
            raise SchemaError("'features' must be a list")
        defs = []
        for i, entry in enumerate(raw):
            if not isinstance(entry, Mapping) or "name" not in entry or "kind" not in entry:
                raise SchemaError(f"feature #{i}: each feature needs 'name' and 'kind'")
            kind = entry["kind"]
            values = tuple(entry["values"]) if "values" in entry else None
            bounds = tuple(float(x) for x in entry["range"]) if "range" in entry else None
            if bounds is not None and len(bounds) != 2:
                raise SchemaError(f"feature #{i}: 'range' must be [lo, hi]")
            defs.append(FeatureDef(str(entry["name"]), str(kind), values, bounds))
        schema = cls(tuple(defs))
        violations = validate_schema(schema)
        if violations:
            raise SchemaError("; ".join(violations))
        return schema


def load_schema(path: str | Path) -> FeatureSchema:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"invalid schema JSON: {exc}") from exc
    return FeatureSchema.from_json_dict(doc)


def save_schema(schema: FeatureSchema, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(schema.to_json_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def validate_schema(schema: FeatureSchema | tuple[FeatureDef, ...]) -> list[str]:
    """Return all schema violations; an empty list means the schema is valid."""
    features = schema.features if isinstance(schema, FeatureSchema) else tuple(schema)
    violations: list[str] = []
    seen: set[str] = set()
    for f in features:
        if f.name in seen:
            violations.append(f"duplicate name: {f.name!r}")
        seen.add(f.name)
        if not f.name or not f.name.strip():
            violations.append("empty feature name")
        if f.kind not in KINDS:
            violations.append(f"{f.name!r}: unknown kind {f.kind!r}")
            continue
        if f.kind == "categorical":
            if not f.values:
                violations.append(f"{f.name!r}: categorical value list must be non-empty")
            elif len(set(f.values)) != len(f.values):
                violations.append(f"{f.name!r}: categorical values must be duplicate-free")
            if f.bounds is not None:
                violations.append(f"{f.name!r}: categorical feature cannot declare a range")
        elif f.kind == "boolean":
            if f.values is not None or f.bounds is not None:
                violations.append(f"{f.name!r}: boolean feature takes no values/range")
        else:  # numeric
            if f.bounds is None:
                violations.append(f"{f.name!r}: numeric feature requires a range")
            else:
                lo, hi = f.bounds
                if not (np.isfinite(lo) and np.isfinite(hi)):
                    violations.append(f"{f.name!r}: range must be finite")
                elif not lo < hi:
                    violations.append(f"{f.name!r}: lo < hi required, got [{lo}, {hi}]")
            if f.values is not None:
                violations.append(f"{f.name!r}: numeric feature cannot declare values")
    return violations


@dataclass(frozen=True)
class RawRecord:
    """One labeled operating-condition instance as read from a record file."""

    features: Mapping[str, Any]
    mp: int  # misperception flag
    hmp: int = 0  # hazardous-misperception flag
    episode: int = 0
    frame: int = 0
    exemplar: str | None = None  # e.g. an image path, for human review

    def __post_init__(self):
        if self.mp not in (0, 1):
            raise ValueError(f"mp must be 0 or 1, got {self.mp!r}")
        if self.hmp not in (0, 1):
            raise ValueError(f"hmp must be 0 or 1, got {self.hmp!r}")
        if self.hmp > self.mp:
            raise ValueError("hmp=1 requires mp=1 (a hazardous misperception is a misperception)")
        if self.frame < 0:
            raise ValueError(f"frame must be >= 0, got {self.frame}")


@dataclass(frozen=True)
class ObservationVector:
    """Encoded operating-condition vector, components in [0, 1]."""

    values: np.ndarray
    record: RawRecord | None = field(default=None, compare=False)

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return len(self.values)


def encode(record: RawRecord, schema: FeatureSchema) -> ObservationVector:
    """Encode a schema-conformant record into a [0, 1] vector.

    Raises EncodingError for missing features, values of the wrong kind, or
    categorical values outside the declared list (callers may drop such
    records, mirroring the removal of undefined annotations upstream).
    """
    out = np.zeros(schema.encoded_dim, dtype=np.float64)
    pos = 0
    for f in schema.features:
        raw = record.features.get(f.name, _MISSING)
        if raw is _MISSING:
            raise EncodingError(f"record is missing feature {f.name!r}")
        if f.kind == "categorical":
            if raw not in f.values:
                raise EncodingError(
                    f"unknown categorical value {raw!r} for feature {f.name!r} "
                    f"(expected one of {list(f.values)})"
                )
            out[pos + f.values.index(raw)] = 1.0
            pos += len(f.values)
        elif f.kind == "boolean":
            if not isinstance(raw, (bool, np.bool_)):
                raise EncodingError(f"feature {f.name!r} expects a boolean, got {raw!r}")
            out[pos] = 1.0 if raw else 0.0
            pos += 1
        else:  # numeric
            if isinstance(raw, bool) or not isinstance(raw, (int, float, np.integer, np.floating)):
                raise EncodingError(f"feature {f.name!r} expects a number, got {raw!r}")
            lo, hi = f.bounds  # type: ignore[misc]
            scaled = (float(raw) - lo) / (hi - lo)
            out[pos] = min(1.0, max(0.0, scaled))
            pos += 1
    return ObservationVector(out, record)


def decode_categories(vector: np.ndarray, schema: FeatureSchema) -> dict[str, str]:
    """Dominant category per categorical feature (argmax of the one-hot block).

    Works for prototypes too, whose blocks are means of one-hots; ties break
    toward the earliest declared value.
    """
    out = {}
    for f in schema.categorical:
        start = schema.offset(f.name)
        block = np.asarray(vector)[start : start + len(f.values or ())]
        out[f.name] = f.values[int(np.argmax(block))]  # type: ignore[index]
    return out


def decode_numerics(vector: np.ndarray, schema: FeatureSchema) -> dict[str, float]:
    """Numeric components mapped back to raw units via the declared ranges."""
    out = {}
    vec = np.asarray(vector)
    for f in schema.numeric:
        lo, hi = f.bounds  # type: ignore[misc]
        out[f.name] = lo + float(vec[schema.offset(f.name)]) * (hi - lo)
    return out
