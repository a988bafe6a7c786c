"""Evidence rates, sampling-error bounds, shortlisting, and the safety case."""

from __future__ import annotations

import numpy as np
import pytest
import scipy.special
from hypothesis import given, settings
from hypothesis import strategies as st

from fuzzymon import (
    SafetyCaseParams,
    assemble_safety_case,
    collect_evidence,
    exposure,
    hmp_rate,
    misperception_rate,
    normal_quantile,
    sampling_error,
    scenario_occurrence_rate,
    shortlist_clouds,
)
from fuzzymon.evidence import safety_case_from_bound, safety_case_to_json_dict, safety_case_to_text

from test_engine import cloud_at, model_with_clouds


def evidence_cloud(support, mp_count, hmp_count, cloud_id=0, prototype=(0.0, 0.0)):
    base = cloud_at(list(prototype), variance=0.1, cloud_id=cloud_id)
    return base.__class__(
        **{
            **base.__dict__,
            "support": support,
            "mp_count": mp_count,
            "hmp_count": hmp_count,
        }
    )


class TestNormalQuantile:
    def test_against_scipy_oracle(self):
        ps = np.concatenate(
            [
                np.linspace(1e-9, 0.02, 200),
                np.linspace(0.02, 0.98, 2000),
                np.linspace(0.98, 1 - 1e-9, 200),
            ]
        )
        for p in ps:
            assert abs(normal_quantile(float(p)) - scipy.special.ndtri(p)) < 1e-8

    def test_known_values(self):
        assert normal_quantile(0.995) == pytest.approx(2.5758293035489004, abs=1e-8)
        assert normal_quantile(0.975) == pytest.approx(1.959963984540054, abs=1e-8)

    def test_domain(self):
        for bad in (0.0, 1.0, -0.1, 1.1):
            with pytest.raises(ValueError):
                normal_quantile(bad)


class TestSamplingError:
    def test_vanishes_at_certainty(self):
        assert sampling_error(0.0, 100, 99.0) == 0.0
        assert sampling_error(1.0, 100, 99.0) == 0.0

    def test_half_rate_99_confidence(self):
        # z(0.995) * sqrt(0.25 / 100) from normal-quantile tables
        assert sampling_error(0.5, 100, 99.0) == pytest.approx(0.12879, abs=1e-4)

    def test_low_rate_95_confidence(self):
        assert sampling_error(0.1, 1000, 95.0) == pytest.approx(0.018594, abs=1e-5)

    def test_domain_violations(self):
        with pytest.raises(ValueError):
            sampling_error(-0.1, 10, 99.0)
        with pytest.raises(ValueError):
            sampling_error(0.5, 0, 99.0)
        with pytest.raises(ValueError):
            sampling_error(0.5, 10, 100.0)

    @given(
        rate=st.floats(0.01, 0.99),
        n_small=st.integers(1, 500),
        extra=st.integers(1, 500),
        confidence=st.floats(50.0, 99.9),
    )
    @settings(max_examples=100, deadline=None)
    def test_symmetric_and_decreasing_in_n(self, rate, n_small, extra, confidence):
        assert sampling_error(rate, n_small, confidence) == pytest.approx(
            sampling_error(1.0 - rate, n_small, confidence), abs=1e-12
        )
        assert sampling_error(rate, n_small + extra, confidence) < sampling_error(
            rate, n_small, confidence
        )


class TestRates:
    def test_misperception_rate(self):
        assert misperception_rate(evidence_cloud(100, 0, 0)) == 0.0
        assert misperception_rate(evidence_cloud(100, 100, 0)) == 1.0
        assert misperception_rate(evidence_cloud(100, 13, 0)) == pytest.approx(0.13)

    def test_hmp_rate(self):
        assert hmp_rate(evidence_cloud(200, 10, 0)) == 0.0
        assert hmp_rate(evidence_cloud(200, 200, 200)) == 1.0
        assert hmp_rate(evidence_cloud(200, 10, 5)) == pytest.approx(0.025)

    def test_exposure(self):
        assert exposure(evidence_cloud(250, 0, 0), 1000) == 0.25
        assert exposure(evidence_cloud(1000, 0, 0), 1000) == 1.0
        with pytest.raises(ValueError):
            exposure(evidence_cloud(10, 0, 0), 0)
        with pytest.raises(ValueError):
            exposure(evidence_cloud(10, 0, 0), 5)


class TestShortlist:
    def _model(self, consequent_bias, mp_rates, support=1000):
        k = len(consequent_bias)
        protos = [[float(i * 10), 0.0] for i in range(k)]
        consequents = [[b, 0.0, 0.0] for b in consequent_bias]
        model = model_with_clouds(protos, [0.1] * k, consequents)
        model.support_ = np.full(k, support, dtype=np.int64)
        model.mp_counts_ = np.array([int(r * support) for r in mp_rates], dtype=np.int64)
        model.n_seen_ = support * k
        return model

    def test_high_rule_output_excluded(self):
        model = self._model([0.8, 0.1], [0.0, 0.0])
        short = shortlist_clouds(model)
        assert short.excluded == (0,) and short.included == (1,)

    def test_low_output_low_rate_included(self):
        model = self._model([0.1], [0.0])
        assert shortlist_clouds(model).included == (0,)

    def test_exact_half_output_excluded(self):
        model = self._model([0.5, 0.0], [0.0, 0.0])
        assert 0 in shortlist_clouds(model).excluded

    def test_rate_plus_error_bound(self):
        # rate 0.04 with small support: 0.04 + delta > 0.05 -> excluded
        model = self._model([0.1, 0.1], [0.04, 0.04], support=100)
        short = shortlist_clouds(model, confidence=99.0, max_mp_rate=0.05)
        assert short.included == ()
        # same rate, huge support: bound shrinks below the cap
        model = self._model([0.1, 0.1], [0.04, 0.04], support=100_000)
        short = shortlist_clouds(model, confidence=99.0, max_mp_rate=0.05)
        assert short.included == (0, 1)

    def test_untrained_model_rejected(self):
        from fuzzymon import FuzzyMonitorClassifier

        with pytest.raises(ValueError):
            shortlist_clouds(FuzzyMonitorClassifier())


class TestSafetyCase:
    def test_reference_arithmetic(self):
        """Reference bound 0.23185 at 40 km/h, 10 fps, 500 m spacing."""
        params = SafetyCaseParams(acceptable_hazard_rate=1e-3)
        case = safety_case_from_bound(0.23185, params)
        assert case.scenario_rate == pytest.approx(2.222e-3, abs=1e-6)
        assert case.hazard_rate == pytest.approx(5.152e-4, abs=1e-6)
        assert case.residual == pytest.approx(1e-3 - case.hazard_rate, abs=1e-15)
        assert case.acceptable

    def test_scenario_rate_formula(self):
        assert scenario_occurrence_rate(40.0, 10.0, 500.0) == pytest.approx(1.0 / 450.0, rel=1e-12)
        assert scenario_occurrence_rate(72.0, 20.0, 100.0) == pytest.approx(0.01, rel=1e-12)

    def test_hand_summed_bound(self):
        from fuzzymon import CloudEvidence

        rows = [
            CloudEvidence(0, 500, 0.0, 0.1, 0.5, 0.0, True, np.zeros(2)),
            CloudEvidence(1, 250, 0.0, 0.2, 0.25, 0.0, True, np.zeros(2)),
            CloudEvidence(2, 250, 0.9, 0.5, 0.25, 0.0, False, np.zeros(2)),
        ]
        params = SafetyCaseParams(acceptable_hazard_rate=1e-2)
        case = assemble_safety_case(rows, params)
        assert case.hmp_rate_bound == pytest.approx(0.1 * 0.5 + 0.2 * 0.25, abs=1e-15)
        assert case.excluded == (2,)
        assert case.hazard_rate == pytest.approx(
            case.crash_given_hazard * case.hmp_rate_bound * case.scenario_rate, abs=1e-12
        )

    def test_empty_shortlist_is_vacuous(self):
        from fuzzymon import CloudEvidence

        rows = [CloudEvidence(0, 10, 0.9, 0.9, 1.0, 0.01, False, np.zeros(2))]
        case = assemble_safety_case(rows, SafetyCaseParams(acceptable_hazard_rate=0.0))
        assert case.hmp_rate_bound == 0.0
        assert case.hazard_rate == 0.0
        assert case.acceptable
        assert case.notes

    def test_excluding_never_increases_bound(self):
        from fuzzymon import CloudEvidence

        rng = np.random.default_rng(0)
        rows = [
            CloudEvidence(i, 100, 0.1, float(rng.random()), float(rng.random()) / 10, 0.0, True, np.zeros(2))
            for i in range(6)
        ]
        params = SafetyCaseParams(acceptable_hazard_rate=1.0)
        full = assemble_safety_case(rows, params).hmp_rate_bound
        for drop in range(6):
            subset = [
                r if r.cloud_id != drop else CloudEvidence(
                    r.cloud_id, r.support, r.mp_rate, r.hmp_occurrence, r.exposure,
                    r.delta_q, False, r.prototype,
                )
                for r in rows
            ]
            assert assemble_safety_case(subset, params).hmp_rate_bound <= full + 1e-15

    @given(
        crash=st.floats(0.0, 1.0),
        bound=st.floats(0.0, 1.0),
        speed=st.floats(1.0, 130.0),
        bump=st.floats(0.0, 0.5),
    )
    @settings(max_examples=100, deadline=None)
    def test_hazard_rate_monotone(self, crash, bound, speed, bump):
        params = SafetyCaseParams(
            acceptable_hazard_rate=1.0, crash_given_hazard=crash, speed_kmh=speed
        )
        base = safety_case_from_bound(bound, params).hazard_rate
        more_crash = SafetyCaseParams(
            acceptable_hazard_rate=1.0, crash_given_hazard=min(1.0, crash + bump), speed_kmh=speed
        )
        assert safety_case_from_bound(bound, more_crash).hazard_rate >= base
        assert safety_case_from_bound(min(1.0, bound + bump), params).hazard_rate >= base

    def test_params_validation(self):
        with pytest.raises(ValueError):
            SafetyCaseParams(acceptable_hazard_rate=-0.1)
        with pytest.raises(ValueError):
            SafetyCaseParams(acceptable_hazard_rate=0.5, speed_kmh=0.0)


class TestEvidenceCollection:
    def test_exposures_sum_to_retained_fraction(self):
        rng = np.random.default_rng(21)
        from fuzzymon import FuzzyMonitorClassifier

        model = FuzzyMonitorClassifier(min_support_for_prune=5, utility_threshold=0.05)
        for _ in range(1500):
            center = rng.choice([0.0, 1.0, 3.0])
            model.learn_one(rng.normal(center, 0.05, 2), int(center == 3.0))
        rows = collect_evidence(model)
        total_exposure = sum(r.exposure for r in rows)
        expected = (model.n_seen_ - model.dropped_by_prune_) / model.n_seen_
        assert total_exposure == pytest.approx(expected, abs=1e-9)

    def test_report_renderings(self):
        from fuzzymon import CloudEvidence

        rows = [
            CloudEvidence(0, 500, 0.01, 0.002, 0.5, 0.001, True, np.zeros(2)),
            CloudEvidence(1, 500, 0.8, 0.3, 0.5, 0.02, False, np.zeros(2)),
        ]
        case = assemble_safety_case(rows, SafetyCaseParams(acceptable_hazard_rate=1e-3))
        doc = safety_case_to_json_dict(case)
        assert {b["bound"] for b in doc["bounds"]} >= {"hmp_rate_bound", "hazard_rate", "residual"}
        text = safety_case_to_text(case, per_cloud=rows)
        assert "hazard rate" in text and "verdict" in text
