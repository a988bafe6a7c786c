"""Synthetic generator determinism/rates and the consecutive-miss crash detector."""

from __future__ import annotations

import itertools

import numpy as np
import pytest

from fuzzymon import (
    ClusterSpec,
    SimConfig,
    default_scenario,
    default_schema,
    detect_crashes,
    generate,
    group_episodes,
)
from fuzzymon.simulate import (
    config_from_json_dict,
    config_to_json_dict,
    validate_config,
)


def _cluster_of(record) -> int:
    # generator writes "synthetic://cluster<i>/ep<e>/frame<f>"
    return int(record.exemplar.split("cluster")[1].split("/")[0])


def _one_cluster_config(mp_probability, roi_probability, seed=0, episodes=40):
    schema = default_schema()
    return SimConfig(
        schema=schema,
        clusters=(
            ClusterSpec(
                categories=("clear", "city-street", "daytime"),
                numeric_centers=(128.0, 0.5, 5.0),
                numeric_spreads=(10.0, 0.05, 0.5),
                mp_probability=mp_probability,
                weight=1.0,
            ),
        ),
        roi_probability=roi_probability,
        episode_frames=(20, 30),
        episodes=episodes,
        seed=seed,
    )


class TestGenerate:
    def test_zero_probability_cluster_never_misses(self):
        records = generate(_one_cluster_config(0.0, 0.5))
        assert all(r.mp == 0 and r.hmp == 0 for r in records)

    def test_certain_miss_in_roi_always_hazardous(self):
        records = generate(_one_cluster_config(1.0, 1.0))
        assert all(r.mp == 1 and r.hmp == 1 for r in records)

    def test_deterministic_under_seed(self):
        config = default_scenario(seed=123, episodes=30)
        assert generate(config) == generate(config)

    def test_different_seeds_differ(self):
        a = generate(default_scenario(seed=1, episodes=30))
        b = generate(default_scenario(seed=2, episodes=30))
        assert a != b

    def test_per_cluster_rates_converge(self):
        config = default_scenario(seed=99, episodes=250)  # ~10k frames
        records = generate(config)
        by_cluster = {}
        for r in records:
            by_cluster.setdefault(_cluster_of(r), []).append(r)
        for ci, cluster in enumerate(config.clusters):
            rows = by_cluster[ci]
            n = len(rows)
            rate = sum(r.mp for r in rows) / n
            p = cluster.mp_probability
            sigma = np.sqrt(max(p * (1 - p), 1e-12) / n)
            assert abs(rate - p) <= max(3 * sigma, 0.03)

    def test_hazard_only_with_miss(self):
        records = generate(default_scenario(seed=5, episodes=50))
        assert all(r.hmp <= r.mp for r in records)

    def test_numerics_respect_schema_ranges(self):
        config = default_scenario(seed=6, episodes=20)
        records = generate(config)
        for f in config.schema.numeric:
            lo, hi = f.bounds
            values = [r.features[f.name] for r in records]
            assert min(values) >= lo and max(values) <= hi

    def test_episode_frame_structure(self):
        config = default_scenario(seed=7, episodes=25)
        episodes = group_episodes(generate(config))
        assert len(episodes) == 25
        lo, hi = config.episode_frames
        for ep in episodes:
            assert lo <= len(ep.frames) <= hi
            assert [r.frame for r in ep.frames] == list(range(len(ep.frames)))


class TestValidation:
    def test_default_scenario_valid(self):
        assert validate_config(default_scenario()) == []

    def test_bad_center_reported(self):
        config = _one_cluster_config(0.5, 0.5)
        bad = SimConfig(
            schema=config.schema,
            clusters=(
                ClusterSpec(
                    categories=("clear", "city-street", "daytime"),
                    numeric_centers=(999.0, 0.5, 5.0),  # brightness range is [0, 255]
                    numeric_spreads=(1.0, 0.01, 0.1),
                    mp_probability=0.5,
                    weight=1.0,
                ),
            ),
            roi_probability=0.5,
            episode_frames=(1, 5),
            episodes=3,
            seed=0,
        )
        assert any("outside range" in v for v in validate_config(bad))
        with pytest.raises(ValueError, match="outside range"):
            generate(bad)

    def test_bad_category_reported(self):
        config = _one_cluster_config(0.5, 0.5)
        bad_cluster = ClusterSpec(
            categories=("foggy", "city-street", "daytime"),
            numeric_centers=(10.0, 0.5, 5.0),
            numeric_spreads=(1.0, 0.01, 0.1),
            mp_probability=0.5,
            weight=1.0,
        )
        bad = SimConfig(
            schema=config.schema,
            clusters=(bad_cluster,),
            roi_probability=0.5,
            episode_frames=(1, 5),
            episodes=3,
            seed=0,
        )
        assert any("'foggy'" in v for v in validate_config(bad))

    def test_config_json_round_trip(self):
        config = default_scenario(seed=11)
        doc = config_to_json_dict(config)
        assert config_from_json_dict(doc) == config


def crash_oracle(flags, threshold):
    """Enumerate maximal runs; each full multiple of the threshold is a crash."""
    crashes = []
    start = None
    for i, flag in enumerate(itertools.chain(flags, [0])):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            run = i - start
            for c in range(run // threshold):
                crashes.append(start + (c + 1) * threshold - 1)
            start = None
    return crashes


class TestDetectCrashes:
    @pytest.mark.parametrize("run,expected", [(13, 0), (14, 1), (28, 2)])
    def test_run_lengths(self, run, expected):
        flags = [1] * run
        crashes = detect_crashes(flags, track_loss_misses=9, crash_misses=5)
        assert len(crashes) == expected
        if expected >= 1:
            assert crashes[0] == 13  # 14th frame of the run
        if expected == 2:
            assert crashes[1] == 27

    def test_interrupted_run_resets(self):
        flags = [1] * 13 + [0] + [1] * 13
        assert detect_crashes(flags, 9, 5) == []

    def test_crash_positions_within_episode(self):
        flags = [0, 0] + [1] * 14 + [0] + [1] * 14
        assert detect_crashes(flags, 9, 5) == [15, 30]

    def test_invalid_constants(self):
        with pytest.raises(ValueError):
            detect_crashes([1, 0], 0, 5)

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_brute_force_oracle(self, seed):
        rng = np.random.default_rng(seed)
        for _ in range(200):
            n = int(rng.integers(1, 200))
            density = rng.random()
            flags = (rng.random(n) < density).astype(int).tolist()
            k_track = int(rng.integers(1, 12))
            k_crash = int(rng.integers(1, 8))
            assert detect_crashes(flags, k_track, k_crash) == crash_oracle(
                flags, k_track + k_crash
            )

    def test_accepts_episode_objects(self):
        config = _one_cluster_config(1.0, 1.0, episodes=2)
        episodes = group_episodes(generate(config))
        for ep in episodes:
            assert detect_crashes(ep, 9, 5) == crash_oracle(list(ep.hazard_flags), 14)
