"""Shared fixtures: a driving-style schema and record helpers."""

from __future__ import annotations

import numpy as np
import pytest

from fuzzymon import FeatureDef, FeatureSchema, RawRecord


@pytest.fixture
def driving_schema() -> FeatureSchema:
    """Eight-feature schema: 3 categoricals, 2 booleans, 3 numerics."""
    return FeatureSchema(
        (
            FeatureDef("weather", "categorical", values=("clear", "snowy", "overcast", "partly cloudy")),
            FeatureDef("scene", "categorical", values=("city-street", "highway")),
            FeatureDef("timeofday", "categorical", values=("daytime", "dawn/dusk", "night")),
            FeatureDef("blurry", "boolean"),
            FeatureDef("low_contrast", "boolean"),
            FeatureDef("brightness", "numeric", bounds=(0.0, 255.0)),
            FeatureDef("clearness_score", "numeric", bounds=(0.0, 1.0)),
            FeatureDef("contrast_score", "numeric", bounds=(0.0, 10.0)),
        )
    )


def make_record(schema: FeatureSchema, mp=0, hmp=0, episode=0, frame=0, **overrides) -> RawRecord:
    """A schema-conformant record with defaults, overridable per feature."""
    features = {}
    for f in schema.features:
        if f.kind == "categorical":
            features[f.name] = f.values[0]
        elif f.kind == "boolean":
            features[f.name] = False
        else:
            lo, hi = f.bounds
            features[f.name] = (lo + hi) / 2.0
    features.update(overrides)
    return RawRecord(features=features, mp=mp, hmp=hmp, episode=episode, frame=frame)


def random_record(schema: FeatureSchema, rng: np.random.Generator, episode=0, frame=0) -> RawRecord:
    features = {}
    for f in schema.features:
        if f.kind == "categorical":
            features[f.name] = f.values[int(rng.integers(len(f.values)))]
        elif f.kind == "boolean":
            features[f.name] = bool(rng.integers(2))
        else:
            lo, hi = f.bounds
            features[f.name] = float(lo + rng.random() * (hi - lo))
    mp = int(rng.integers(2))
    hmp = int(rng.integers(2)) & mp
    return RawRecord(features=features, mp=mp, hmp=hmp, episode=episode, frame=frame)
