"""Synthetic driving-condition generator with planted clusters and known rates.

Stands in for a naturalistic dataset plus a real detector at desk scale:
frames are drawn from weighted condition clusters with configured
misperception probabilities, and a miss becomes hazardous when it falls
inside the region of interest. Includes the consecutive-miss crash detector
for the stopped-obstacle scenario (track loss after a run of misses, crash
after a few more).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .schema import FeatureDef, FeatureSchema, RawRecord


@dataclass(frozen=True)
class ClusterSpec:
    """One planted operating-condition cluster.

    ``categories`` holds one value per categorical schema feature (in schema
    order), ``booleans`` one flag per boolean feature (empty means all False),
    ``numeric_centers``/``numeric_spreads`` one entry per numeric feature in
    raw units. Numeric noise is uniform in [center - spread, center + spread],
    clamped to the schema range.
    """

    categories: tuple[str, ...]
    numeric_centers: tuple[float, ...]
    numeric_spreads: tuple[float, ...]
    mp_probability: float
    weight: float
    booleans: tuple[bool, ...] = ()


@dataclass(frozen=True)
class SimConfig:
    schema: FeatureSchema
    clusters: tuple[ClusterSpec, ...]
    roi_probability: float  # chance a miss falls inside the region of interest
    episode_frames: tuple[int, int]  # inclusive (min, max) frames per episode
    episodes: int
    seed: int
    track_loss_misses: int = 9  # consecutive misses until the tracker loses the object
    crash_misses: int = 5  # additional consecutive misses until the crash


@dataclass(frozen=True)
class Episode:
    """Consecutive frames of one episode, in frame order."""

    index: int
    frames: tuple[RawRecord, ...]

    @property
    def hazard_flags(self) -> tuple[int, ...]:
        return tuple(r.hmp for r in self.frames)


def validate_config(config: SimConfig) -> list[str]:
    """Return all configuration violations; empty when valid."""
    schema = config.schema
    violations: list[str] = []
    n_cat = len(schema.categorical)
    n_bool = len(schema.boolean)
    n_num = len(schema.numeric)
    if not config.clusters:
        violations.append("at least one cluster is required")
    for i, cluster in enumerate(config.clusters):
        tag = f"cluster #{i}"
        if cluster.weight <= 0:
            violations.append(f"{tag}: weight must be positive")
        if not 0.0 <= cluster.mp_probability <= 1.0:
            violations.append(f"{tag}: mp_probability must be in [0, 1]")
        if len(cluster.categories) != n_cat:
            violations.append(f"{tag}: expected {n_cat} categorical value(s)")
        else:
            for f, value in zip(schema.categorical, cluster.categories):
                if value not in (f.values or ()):
                    violations.append(f"{tag}: {value!r} is not a value of {f.name!r}")
        if cluster.booleans and len(cluster.booleans) != n_bool:
            violations.append(f"{tag}: expected {n_bool} boolean value(s) (or none)")
        if len(cluster.numeric_centers) != n_num or len(cluster.numeric_spreads) != n_num:
            violations.append(f"{tag}: expected {n_num} numeric center(s) and spread(s)")
        else:
            for f, center, spread in zip(
                schema.numeric, cluster.numeric_centers, cluster.numeric_spreads
            ):
                lo, hi = f.bounds  # type: ignore[misc]
                if not lo <= center <= hi:
                    violations.append(f"{tag}: center {center} outside range of {f.name!r}")
                if spread < 0:
                    violations.append(f"{tag}: spread must be >= 0 for {f.name!r}")
    if not 0.0 <= config.roi_probability <= 1.0:
        violations.append("roi_probability must be in [0, 1]")
    lo, hi = config.episode_frames
    if not 1 <= lo <= hi:
        violations.append("episode_frames must satisfy 1 <= min <= max")
    if config.episodes < 1:
        violations.append("episodes must be >= 1")
    if config.track_loss_misses < 1 or config.crash_misses < 1:
        violations.append("track_loss_misses and crash_misses must be >= 1")
    return violations


def generate(config: SimConfig) -> list[RawRecord]:
    """Generate records grouped by episode, deterministic under the seed."""
    violations = validate_config(config)
    if violations:
        raise ValueError("; ".join(violations))
    schema = config.schema
    rng = np.random.default_rng(config.seed)
    weights = np.array([c.weight for c in config.clusters], dtype=np.float64)
    probs = weights / weights.sum()
    lo_frames, hi_frames = config.episode_frames
    records: list[RawRecord] = []
    for ep in range(config.episodes):
        length = int(rng.integers(lo_frames, hi_frames + 1))
        for fr in range(length):
            ci = int(rng.choice(len(config.clusters), p=probs))
            cluster = config.clusters[ci]
            features: dict[str, object] = {}
            for f, value in zip(schema.categorical, cluster.categories):
                features[f.name] = value
            for bi, f in enumerate(schema.boolean):
                features[f.name] = bool(cluster.booleans[bi]) if cluster.booleans else False
            for f, center, spread in zip(
                schema.numeric, cluster.numeric_centers, cluster.numeric_spreads
            ):
                blo, bhi = f.bounds  # type: ignore[misc]
                value = center + rng.uniform(-spread, spread)
                features[f.name] = float(min(bhi, max(blo, value)))
            mp = int(rng.random() < cluster.mp_probability)
            in_roi = int(rng.random() < config.roi_probability) if mp else 0
            records.append(
                RawRecord(
                    features=features,
                    mp=mp,
                    hmp=mp & in_roi,
                    episode=ep,
                    frame=fr,
                    exemplar=f"synthetic://cluster{ci}/ep{ep}/frame{fr}",
                )
            )
    return records


def group_episodes(records: Sequence[RawRecord]) -> list[Episode]:
    """Group records into episodes, preserving frame order."""
    grouped: dict[int, list[RawRecord]] = {}
    order: list[int] = []
    for rec in records:
        if rec.episode not in grouped:
            grouped[rec.episode] = []
            order.append(rec.episode)
        grouped[rec.episode].append(rec)
    return [Episode(ep, tuple(sorted(grouped[ep], key=lambda r: r.frame))) for ep in order]


def detect_crashes(
    episode: Episode | Sequence[int],
    track_loss_misses: int = 9,
    crash_misses: int = 5,
) -> list[int]:
    """Frame indices where a crash occurs (non-overlapping events).

    A crash fires when a run of consecutive hazardous misses reaches
    track_loss_misses + crash_misses; the run counter restarts after each
    crash, so a run of twice the threshold yields two events.
    """
    if track_loss_misses < 1 or crash_misses < 1:
        raise ValueError("track_loss_misses and crash_misses must be >= 1")
    flags = episode.hazard_flags if isinstance(episode, Episode) else episode
    threshold = track_loss_misses + crash_misses
    crashes: list[int] = []
    run = 0
    for idx, flag in enumerate(flags):
        if flag:
            run += 1
            if run == threshold:
                crashes.append(idx)
                run = 0
        else:
            run = 0
    return crashes


# -- configuration documents ------------------------------------------------


def config_to_json_dict(config: SimConfig) -> dict:
    return {
        "schema": config.schema.to_json_dict(),
        "clusters": [
            {
                "categories": list(c.categories),
                "booleans": list(c.booleans),
                "numeric_centers": list(c.numeric_centers),
                "numeric_spreads": list(c.numeric_spreads),
                "mp_probability": c.mp_probability,
                "weight": c.weight,
            }
            for c in config.clusters
        ],
        "roi_probability": config.roi_probability,
        "episode_frames": list(config.episode_frames),
        "episodes": config.episodes,
        "seed": config.seed,
        "track_loss_misses": config.track_loss_misses,
        "crash_misses": config.crash_misses,
    }


def config_from_json_dict(doc: Mapping) -> SimConfig:
    schema = FeatureSchema.from_json_dict(doc["schema"])
    clusters = tuple(
        ClusterSpec(
            categories=tuple(c["categories"]),
            numeric_centers=tuple(float(x) for x in c["numeric_centers"]),
            numeric_spreads=tuple(float(x) for x in c["numeric_spreads"]),
            mp_probability=float(c["mp_probability"]),
            weight=float(c["weight"]),
            booleans=tuple(bool(b) for b in c.get("booleans", ())),
        )
        for c in doc["clusters"]
    )
    frames = doc["episode_frames"]
    config = SimConfig(
        schema=schema,
        clusters=clusters,
        roi_probability=float(doc["roi_probability"]),
        episode_frames=(int(frames[0]), int(frames[1])),
        episodes=int(doc["episodes"]),
        seed=int(doc["seed"]),
        track_loss_misses=int(doc.get("track_loss_misses", 9)),
        crash_misses=int(doc.get("crash_misses", 5)),
    )
    violations = validate_config(config)
    if violations:
        raise ValueError("; ".join(violations))
    return config


def load_sim_config(path: str | Path) -> SimConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return config_from_json_dict(json.load(fh))


def save_sim_config(config: SimConfig, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(config_to_json_dict(config), fh, indent=2, sort_keys=True)
        fh.write("\n")


def default_schema() -> FeatureSchema:
    """Driving-style schema: weather/scene/time categoricals, image-quality numerics."""
    return FeatureSchema(
        (
            FeatureDef("weather", "categorical", values=("clear", "overcast", "snowy", "rainy")),
            FeatureDef("scene", "categorical", values=("city-street", "highway")),
            FeatureDef("timeofday", "categorical", values=("daytime", "night")),
            FeatureDef("blurry", "boolean"),
            FeatureDef("low_contrast", "boolean"),
            FeatureDef("brightness", "numeric", bounds=(0.0, 255.0)),
            FeatureDef("clearness_score", "numeric", bounds=(0.0, 1.0)),
            FeatureDef("contrast_score", "numeric", bounds=(0.0, 10.0)),
        )
    )


def default_scenario(seed: int = 7, episodes: int = 715) -> SimConfig:
    """Five planted clusters: three reliable, two with high miss rates.

    One unreliable cluster has a weather value no reliable cluster shares
    (rejected by the derived includes); the other reuses only included
    categories, so rejecting its frames exercises the conditional-exclude
    neighborhoods.
    """
    return SimConfig(
        schema=default_schema(),
        clusters=(
            ClusterSpec(  # reliable: bright day in the city
                categories=("clear", "city-street", "daytime"),
                numeric_centers=(180.0, 0.8, 6.0),
                numeric_spreads=(20.0, 0.08, 0.8),
                mp_probability=0.01,
                weight=1.2,
            ),
            ClusterSpec(  # reliable: overcast highway at night
                categories=("overcast", "highway", "night"),
                numeric_centers=(60.0, 0.45, 3.2),
                numeric_spreads=(15.0, 0.07, 0.6),
                mp_probability=0.015,
                weight=1.0,
            ),
            ClusterSpec(  # reliable: snowy daytime city
                categories=("snowy", "city-street", "daytime"),
                numeric_centers=(200.0, 0.7, 5.0),
                numeric_spreads=(18.0, 0.07, 0.7),
                mp_probability=0.02,
                weight=0.8,
            ),
            ClusterSpec(  # unreliable: rain, blur (weather value never included)
                categories=("rainy", "city-street", "daytime"),
                numeric_centers=(90.0, 0.3, 2.5),
                numeric_spreads=(18.0, 0.07, 0.6),
                mp_probability=0.8,
                weight=1.35,
                booleans=(True, False),
            ),
            ClusterSpec(  # unreliable: dark clear night (all categories included elsewhere)
                categories=("clear", "city-street", "night"),
                numeric_centers=(18.2, 0.12, 2.2),
                numeric_spreads=(8.0, 0.05, 0.5),
                mp_probability=0.75,
                weight=0.65,
            ),
        ),
        roi_probability=0.3,
        episode_frames=(30, 50),
        episodes=episodes,
        seed=seed,
    )
