"""Human-readable ODD specifications: derivation, text format, and evaluation.

The textual format lists allowed categorical values ("Include ... is [...]")
and conditional-exclude blocks that prohibit operation when the categorical
trigger matches and the named numeric attributes fall inside a fuzzy ball
around a prototype. Exclusion uses membership >= threshold rather than exact
equality: prototypes stand for whole dataclouds, and an exact match would
exclude a measure-zero set.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .engine import FuzzyMonitorClassifier
from .errors import OddParseError, OddSchemaError
from .evidence import Shortlist
from .schema import FeatureSchema, RawRecord, decode_categories, decode_numerics

DEFAULT_EXCLUDE_THRESHOLD = 0.5
# Fallback squared scale (encoded units) for blocks parsed from hand-written
# text that carries no variance annotation.
DEFAULT_EXCLUDE_VARIANCE = 0.01
_VARIANCE_FLOOR = 1e-6


@dataclass(frozen=True)
class ConditionalExclude:
    """One conditional-exclude block.

    ``values`` are prototype numerics in raw units (rounded to 3 decimals by
    derivation); ``variance`` is the source cloud's variance restricted to the
    named attributes, in encoded units.
    """

    attributes: tuple[str, ...]
    group: str
    trigger: tuple[str, ...]
    values: tuple[float, ...]
    source_cloud: int | None = None
    threshold: float = DEFAULT_EXCLUDE_THRESHOLD
    variance: float = DEFAULT_EXCLUDE_VARIANCE


@dataclass(frozen=True)
class OddSpecification:
    includes: Mapping[str, tuple[str, ...]] = field(default_factory=dict)
    excludes: tuple[ConditionalExclude, ...] = ()

    @property
    def empty(self) -> bool:
        return not self.includes and not self.excludes


@dataclass(frozen=True)
class OddDecision:
    within: bool
    reason: str | None = None

    def __bool__(self) -> bool:
        return self.within


def derive_odd(
    model: FuzzyMonitorClassifier,
    shortlist: Shortlist,
    schema: FeatureSchema,
    group_label: str = "visibility",
    exclude_threshold: float = DEFAULT_EXCLUDE_THRESHOLD,
) -> OddSpecification:
    """Build a specification from shortlisted dataclouds.

    Includes collect, per categorical feature, the dominant category of every
    included cloud's prototype. Every excluded cloud becomes one
    conditional-exclude block: its prototype's categories are the trigger and
    its numeric components (decoded to raw units, rounded to 3 decimals) are
    the prohibited neighborhood center. Blocks are omitted when the schema has
    no numeric features to name.
    """
    clouds = {c.id: c for c in model.clouds()}
    unknown = [i for i in (*shortlist.included, *shortlist.excluded) if i not in clouds]
    if unknown:
        raise ValueError(f"shortlist references unknown cloud ids: {unknown}")
    allowed: dict[str, set[str]] = {f.name: set() for f in schema.categorical}
    for cid in shortlist.included:
        for name, value in decode_categories(clouds[cid].prototype, schema).items():
            allowed[name].add(value)
    includes = {name: tuple(sorted(vals)) for name, vals in allowed.items() if vals}

    numeric_names = tuple(f.name for f in schema.numeric)
    excludes: list[ConditionalExclude] = []
    if numeric_names:
        for cid in sorted(shortlist.excluded):
            cloud = clouds[cid]
            cats = decode_categories(cloud.prototype, schema)
            trigger = tuple(cats[f.name] for f in schema.categorical)
            raw_values = decode_numerics(cloud.prototype, schema)
            values = tuple(round(raw_values[n], 3) for n in numeric_names)
            restricted = 0.0
            for name in numeric_names:
                pos = schema.offset(name)
                restricted += float(cloud.dim_mean_square[pos] - cloud.prototype[pos] ** 2)
            excludes.append(
                ConditionalExclude(
                    attributes=numeric_names,
                    group=group_label,
                    trigger=trigger,
                    values=values,
                    source_cloud=cid,
                    threshold=exclude_threshold,
                    variance=max(restricted, _VARIANCE_FLOOR),
                )
            )
    return OddSpecification(includes, tuple(excludes))


def _format_number(value: float) -> str:
    """Up to 3 decimals, trailing zeros trimmed."""
    text = f"{value:.3f}".rstrip("0").rstrip(".")
    return text if text not in ("", "-") else "0"


def emit(spec: OddSpecification) -> str:
    """Deterministic textual rendering; parse(emit(s)) == s."""
    lines: list[str] = []
    for feature, values in spec.includes.items():
        lines.append(f"Include {feature} is [{', '.join(values)}]")
    if spec.excludes:
        if lines:
            lines.append("")
        lines.append("# Conditional ODD Statements")
        for block in spec.excludes:
            meta = f"[threshold={block.threshold!r}, variance={block.variance!r}]"
            if block.source_cloud is not None:
                lines.append(f"# Exclude Datacloud {block.source_cloud} {meta}")
            else:
                lines.append(f"# Exclude {meta}")
            lines.append("Conditional Exclude")
            lines.append(f"    [{', '.join(block.attributes)}] of {block.group}")
            numbers = ", ".join(_format_number(v) for v in block.values)
            lines.append(f"        for [{', '.join(block.trigger)}] is [{numbers}]")
    return "\n".join(lines) + "\n" if lines else ""


_EXCLUDE_META_RE = re.compile(
    r"^#+\s*Exclude(?:\s+Datacloud\s+(?P<id>\d+))?"
    r"(?:\s*\[threshold=(?P<thr>[^,\]]+),\s*variance=(?P<var>[^\]]+)\])?\s*$"
)
_INCLUDE_RE = re.compile(r"^Include\s+(?P<name>\S+)\s+is\s+\[(?P<values>[^\]]*)\]\s*$")
_ATTRS_RE = re.compile(r"^\[(?P<attrs>[^\]]*)\]\s+of\s+(?P<group>\S+)\s*$")
_FOR_RE = re.compile(r"^for\s+\[(?P<trigger>[^\]]*)\]\s+is\s+\[(?P<values>[^\]]*)\]\s*$")


def _split_list(text: str, lineno: int, col: int, what: str) -> list[str]:
    items = [item.strip() for item in text.split(",")]
    if any(not item for item in items):
        raise OddParseError(lineno, col, f"empty {what} entry in bracket list")
    return items


def parse(text: str) -> OddSpecification:
    """Parse the textual format; reports line/column of the first violation.

    Comment lines of the form ``# Exclude Datacloud N [threshold=..,
    variance=..]`` annotate the next conditional-exclude block (both parts are
    optional; hand-written text without them gets the defaults). Other
    comments are ignored.
    """
    includes: dict[str, set[str]] = {}
    excludes: list[ConditionalExclude] = []
    pending: dict | None = None
    lines = text.splitlines()
    i = 0
    while i < len(lines):
        raw = lines[i]
        stripped = raw.strip()
        col = len(raw) - len(raw.lstrip()) + 1
        lineno = i + 1
        if not stripped:
            i += 1
            continue
        if stripped.startswith("#"):
            match = _EXCLUDE_META_RE.match(stripped)
            if match and (match.group("id") or match.group("thr")):
                pending = {
                    "source_cloud": int(match.group("id")) if match.group("id") else None,
                }
                if match.group("thr"):
                    try:
                        pending["threshold"] = float(match.group("thr"))
                        pending["variance"] = float(match.group("var"))
                    except ValueError:
                        raise OddParseError(lineno, col, "malformed threshold/variance annotation")
            i += 1
            continue
        if stripped.startswith("Include"):
            match = _INCLUDE_RE.match(stripped)
            if not match:
                raise OddParseError(lineno, col, "malformed Include statement")
            name = match.group("name")
            values = _split_list(match.group("values"), lineno, col, "value")
            includes.setdefault(name, set()).update(values)
            i += 1
            continue
        if stripped == "Conditional Exclude":
            block_lines = []
            j = i + 1
            while j < len(lines) and len(block_lines) < 2:
                candidate = lines[j].strip()
                if candidate and not candidate.startswith("#"):
                    block_lines.append((j + 1, lines[j]))
                elif not candidate:
                    pass
                else:
                    raise OddParseError(j + 1, 1, "comment not allowed inside an exclude block")
                j += 1
            if len(block_lines) < 2:
                raise OddParseError(lineno, col, "incomplete Conditional Exclude block")
            (ln2, raw2), (ln3, raw3) = block_lines
            col2 = len(raw2) - len(raw2.lstrip()) + 1
            col3 = len(raw3) - len(raw3.lstrip()) + 1
            m2 = _ATTRS_RE.match(raw2.strip())
            if not m2:
                raise OddParseError(ln2, col2, "expected '[attributes] of <group>'")
            m3 = _FOR_RE.match(raw3.strip())
            if not m3:
                raise OddParseError(ln3, col3, "expected 'for [trigger] is [numbers]'")
            attributes = _split_list(m2.group("attrs"), ln2, col2, "attribute")
            trigger = _split_list(m3.group("trigger"), ln3, col3, "trigger")
            numbers = []
            for token in _split_list(m3.group("values"), ln3, col3, "number"):
                try:
                    numbers.append(float(token))
                except ValueError:
                    raise OddParseError(ln3, col3, f"not a number: {token!r}") from None
            if len(numbers) != len(attributes):
                raise OddParseError(
                    ln3, col3, f"{len(attributes)} attribute(s) but {len(numbers)} value(s)"
                )
            meta = pending or {}
            excludes.append(
                ConditionalExclude(
                    attributes=tuple(attributes),
                    group=m2.group("group"),
                    trigger=tuple(trigger),
                    values=tuple(numbers),
                    source_cloud=meta.get("source_cloud"),
                    threshold=meta.get("threshold", DEFAULT_EXCLUDE_THRESHOLD),
                    variance=meta.get("variance", DEFAULT_EXCLUDE_VARIANCE),
                )
            )
            pending = None
            i = j
            continue
        word = stripped.split()[0]
        if word == "Conditional":
            raise OddParseError(lineno, col, "expected 'Conditional Exclude'")
        raise OddParseError(lineno, col, f"unknown keyword {word!r}")
    return OddSpecification(
        {name: tuple(sorted(vals)) for name, vals in includes.items()}, tuple(excludes)
    )


def validate_spec(spec: OddSpecification, schema: FeatureSchema) -> None:
    """Raise OddSchemaError when the spec references unknown attributes."""
    categorical = {f.name: set(f.values or ()) for f in schema.categorical}
    numeric = {f.name for f in schema.numeric}
    for name, values in spec.includes.items():
        if name not in categorical:
            raise OddSchemaError(f"Include references unknown categorical feature {name!r}")
        bad = [v for v in values if v not in categorical[name]]
        if bad:
            raise OddSchemaError(f"Include for {name!r} lists unknown value(s): {bad}")
    n_categorical = len(categorical)
    for idx, block in enumerate(spec.excludes):
        unknown = [a for a in block.attributes if a not in numeric]
        if unknown:
            raise OddSchemaError(f"exclude block #{idx} names unknown numeric attribute(s): {unknown}")
        if len(block.trigger) != n_categorical:
            raise OddSchemaError(
                f"exclude block #{idx} trigger has {len(block.trigger)} value(s), "
                f"schema has {n_categorical} categorical feature(s)"
            )
        if block.variance <= 0:
            raise OddSchemaError(f"exclude block #{idx} has non-positive variance")


def within_odd(spec: OddSpecification, record: RawRecord, schema: FeatureSchema) -> OddDecision:
    """Decide whether a record's conditions lie inside the specification.

    Categorical features mentioned in the includes constrain the record;
    features absent from the includes are unconstrained. A matching exclude
    trigger prohibits the record when the named numeric attributes' membership
    to the block's prototype reaches the block threshold.
    """
    validate_spec(spec, schema)
    for name, values in spec.includes.items():
        value = record.features.get(name)
        if value not in values:
            return OddDecision(False, f"include-violation: {name}={value!r}")
    if not spec.excludes:
        return OddDecision(True)
    trigger = tuple(str(record.features.get(f.name)) for f in schema.categorical)
    for idx, block in enumerate(spec.excludes):
        if block.trigger != trigger:
            continue
        d2 = 0.0
        for attr, proto_raw in zip(block.attributes, block.values):
            feature = schema.feature(attr)
            lo, hi = feature.bounds  # type: ignore[misc]
            rec_raw = record.features.get(attr)
            if rec_raw is None or isinstance(rec_raw, bool) or not isinstance(rec_raw, (int, float)):
                raise OddSchemaError(f"record lacks a numeric value for attribute {attr!r}")
            rec_enc = min(1.0, max(0.0, (float(rec_raw) - lo) / (hi - lo)))
            proto_enc = min(1.0, max(0.0, (float(proto_raw) - lo) / (hi - lo)))
            d2 += (rec_enc - proto_enc) ** 2
        mu = 1.0 / (1.0 + d2 / block.variance)
        if mu >= block.threshold:
            label = f"datacloud {block.source_cloud}" if block.source_cloud is not None else f"#{idx}"
            return OddDecision(False, f"exclude-block {label} (membership {mu:.3f})")
    return OddDecision(True)


def filter_records(
    spec: OddSpecification, records: Sequence[RawRecord], schema: FeatureSchema
) -> tuple[list[RawRecord], float]:
    """Keep records inside the ODD; returns (kept, retention fraction)."""
    validate_spec(spec, schema)
    kept = [r for r in records if within_odd(spec, r, schema).within]
    retention = len(kept) / len(records) if records else 0.0
    return kept, retention
