"""Per-datacloud reliability evidence and bottom-up safety-case assembly.

Each datacloud contributes crisp counts (support, misperception count,
hazardous-misperception count) from which occurrence rates and their
normal-approximation sampling errors are computed. Reliable clouds are
shortlisted, and the shortlist feeds a bottom-up hazard bound: the weighted
hazardous-misperception rate over the retained operating conditions, combined
with scenario kinematics and a crash-given-hazard factor, against a
user-supplied acceptable hazard rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .engine import Datacloud, FuzzyMonitorClassifier

# Coefficients of the rational approximation to the standard normal quantile
# (central region / tails), accurate to ~1e-9 before refinement.
_A = (
    -3.969683028665376e01,
    2.209460984245205e02,
    -2.759285104469687e02,
    1.383577518672690e02,
    -3.066479806614716e01,
    2.506628277459239e00,
)
_B = (
    -5.447609879822406e01,
    1.615858368580409e02,
    -1.556989798598866e02,
    6.680131188771972e01,
    -1.328068155288572e01,
)
_C = (
    -7.784894002430293e-03,
    -3.223964580411365e-01,
    -2.400758277161838e00,
    -2.549732539343734e00,
    4.374664141464968e00,
    2.938163982698783e00,
)
_D = (
    7.784695709041462e-03,
    3.224671290700398e-01,
    2.445134137142996e00,
    3.754408661907416e00,
)
_P_LOW = 0.02425


def normal_quantile(p: float) -> float:
    """Inverse standard normal CDF by rational approximation plus one Halley step.

    Absolute error is well below 1e-8 over (0, 1).
    """
    if not 0.0 < p < 1.0:
        raise ValueError(f"quantile argument must be in (0, 1), got {p}")
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        x = (((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]) / (
            (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
        )
    elif p <= 1.0 - _P_LOW:
        q = p - 0.5
        r = q * q
        x = (
            (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5])
            * q
            / (((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0)
        )
    else:
        q = math.sqrt(-2.0 * math.log(1.0 - p))
        x = -(((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]) / (
            (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
        )
    # one Halley refinement against the exact CDF (erfc)
    err = 0.5 * math.erfc(-x / math.sqrt(2.0)) - p
    u = err * math.sqrt(2.0 * math.pi) * math.exp(x * x / 2.0)
    return x - u / (1.0 + x * u / 2.0)


def sampling_error(rate: float, n: int, confidence: float) -> float:
    """One-sided normal-approximation error bound for an observed rate.

    ``confidence`` is a percentage in (0, 100); the bound uses the standard
    normal quantile at (100 + confidence) / 200.
    """
    if not 0.0 <= rate <= 1.0:
        raise ValueError(f"rate must be in [0, 1], got {rate}")
    if n < 1:
        raise ValueError(f"sample count must be >= 1, got {n}")
    if not 0.0 < confidence < 100.0:
        raise ValueError(f"confidence must be in (0, 100), got {confidence}")
    z = normal_quantile((100.0 + confidence) / 200.0)
    return z * math.sqrt(rate * (1.0 - rate) / n)


def misperception_rate(cloud: Datacloud) -> float:
    """Fraction of the cloud's assigned instances flagged as misperceptions."""
    if cloud.support < 1:
        raise ValueError("misperception rate is undefined for an empty cloud")
    return cloud.mp_count / cloud.support


def hmp_rate(cloud: Datacloud) -> float:
    """Fraction of the cloud's assigned instances flagged as hazardous."""
    if cloud.support < 1:
        raise ValueError("hazardous-misperception rate is undefined for an empty cloud")
    return cloud.hmp_count / cloud.support


def exposure(cloud: Datacloud, total_instances: int) -> float:
    """Occurrence probability of the cloud's conditions: support / total."""
    if total_instances <= 0:
        raise ValueError("total instance count must be positive")
    if cloud.support > total_instances:
        raise ValueError("cloud support exceeds the total instance count")
    return cloud.support / total_instances


@dataclass(frozen=True)
class Shortlist:
    included: tuple[int, ...]
    excluded: tuple[int, ...]


def shortlist_clouds(
    model: FuzzyMonitorClassifier,
    confidence: float = 99.0,
    max_mp_rate: float = 0.05,
) -> Shortlist:
    """Split cloud ids into reliable (included) and unreliable (excluded).

    A cloud is included iff its rule output at its own prototype is below 0.5
    (the rule maps the conditions to reliable behavior; an exact 0.5 is
    conservatively excluded) and its misperception rate plus the sampling
    error at the given confidence stays within max_mp_rate.
    """
    clouds = model.clouds()
    if not clouds:
        raise ValueError("cannot shortlist an untrained model (no dataclouds)")
    included, excluded = [], []
    for cloud in clouds:
        rate = misperception_rate(cloud)
        delta = sampling_error(rate, cloud.support, confidence)
        reliable = cloud.rule_output() < 0.5 and rate + delta <= max_mp_rate
        (included if reliable else excluded).append(cloud.id)
    return Shortlist(tuple(included), tuple(excluded))


@dataclass(frozen=True)
class CloudEvidence:
    """Reliability statistics for one datacloud."""

    cloud_id: int
    support: int
    mp_rate: float
    hmp_occurrence: float  # hazardous-misperception rate within the cloud
    exposure: float  # occurrence probability of the cloud's conditions
    delta_q: float  # sampling error of mp_rate at the report's confidence
    reliable: bool
    prototype: np.ndarray

    def to_json_dict(self) -> dict:
        return {
            "cloud_id": self.cloud_id,
            "support": self.support,
            "mp_rate": self.mp_rate,
            "hmp_occurrence": self.hmp_occurrence,
            "exposure": self.exposure,
            "sampling_error": self.delta_q,
            "reliable": self.reliable,
            "prototype": self.prototype.tolist(),
        }


def collect_evidence(
    model: FuzzyMonitorClassifier,
    confidence: float = 99.0,
    max_mp_rate: float = 0.05,
    total_instances: int | None = None,
) -> list[CloudEvidence]:
    """Evidence rows for every cloud, flagged by the shortlist criteria.

    ``total_instances`` defaults to the number of training samples currently
    held by the model's clouds plus any pruned ones (its full stream).
    """
    clouds = model.clouds()
    if not clouds:
        raise ValueError("cannot collect evidence from an untrained model")
    total = model.n_seen_ if total_instances is None else total_instances
    short = shortlist_clouds(model, confidence, max_mp_rate)
    included = set(short.included)
    rows = []
    for cloud in clouds:
        rate = misperception_rate(cloud)
        rows.append(
            CloudEvidence(
                cloud_id=cloud.id,
                support=cloud.support,
                mp_rate=rate,
                hmp_occurrence=hmp_rate(cloud),
                exposure=exposure(cloud, total),
                delta_q=sampling_error(rate, cloud.support, confidence),
                reliable=cloud.id in included,
                prototype=cloud.prototype,
            )
        )
    return rows


@dataclass(frozen=True)
class SafetyCaseParams:
    """Inputs of the bottom-up safety case."""

    acceptable_hazard_rate: float  # user-supplied top-level bound
    crash_given_hazard: float = 1.0  # conservative default: every hazard crashes
    speed_kmh: float = 40.0
    frame_rate_fps: float = 10.0
    scenario_spacing_m: float = 500.0  # mean distance between scenario encounters
    confidence: float = 99.0

    def __post_init__(self):
        if not 0.0 <= self.acceptable_hazard_rate <= 1.0:
            raise ValueError("acceptable hazard rate must be in [0, 1]")
        if not 0.0 <= self.crash_given_hazard <= 1.0:
            raise ValueError("crash-given-hazard rate must be in [0, 1]")
        if min(self.speed_kmh, self.frame_rate_fps, self.scenario_spacing_m) <= 0:
            raise ValueError("speed, frame rate, and spacing must be positive")


def scenario_occurrence_rate(speed_kmh: float, frame_rate_fps: float, spacing_m: float) -> float:
    """Per-frame probability of encountering the scenario.

    Distance covered per frame (speed in m/s over the frame rate) divided by
    the mean spacing between scenario encounters.
    """
    return (speed_kmh / 3.6 / frame_rate_fps) / spacing_m


@dataclass(frozen=True)
class SafetyCase:
    """Assembled bottom-up hazard bound against the acceptable rate."""

    evidence: tuple[CloudEvidence, ...]  # included clouds only
    excluded: tuple[int, ...]
    hmp_rate_bound: float  # weighted hazardous-misperception rate over included clouds
    scenario_rate: float
    crash_given_hazard: float
    hazard_rate: float  # crash_given_hazard * hmp_rate_bound * scenario_rate
    acceptable_hazard_rate: float
    residual: float  # acceptable - achieved
    acceptable: bool
    notes: tuple[str, ...] = ()


def assemble_safety_case(
    evidence: Iterable[CloudEvidence], params: SafetyCaseParams
) -> SafetyCase:
    """Combine per-cloud evidence into the system-level hazard bound.

    Only clouds flagged reliable contribute; excluding a cloud can only lower
    the bound. An empty shortlist yields a vacuous zero bound with a warning
    note.
    """
    rows = list(evidence)
    included = tuple(r for r in rows if r.reliable)
    excluded = tuple(r.cloud_id for r in rows if not r.reliable)
    notes: list[str] = []
    if not included:
        notes.append("no reliable clouds: the bound is vacuous (no conditions retained)")
    bound = float(sum(r.hmp_occurrence * r.exposure for r in included))
    scenario = scenario_occurrence_rate(
        params.speed_kmh, params.frame_rate_fps, params.scenario_spacing_m
    )
    hazard = params.crash_given_hazard * bound * scenario
    residual = params.acceptable_hazard_rate - hazard
    return SafetyCase(
        evidence=included,
        excluded=excluded,
        hmp_rate_bound=bound,
        scenario_rate=scenario,
        crash_given_hazard=params.crash_given_hazard,
        hazard_rate=hazard,
        acceptable_hazard_rate=params.acceptable_hazard_rate,
        residual=residual,
        acceptable=residual >= 0.0,
        notes=tuple(notes),
    )


def safety_case_from_bound(hmp_rate_bound: float, params: SafetyCaseParams) -> SafetyCase:
    """Assemble a safety case directly from a precomputed rate bound."""
    scenario = scenario_occurrence_rate(
        params.speed_kmh, params.frame_rate_fps, params.scenario_spacing_m
    )
    hazard = params.crash_given_hazard * hmp_rate_bound * scenario
    residual = params.acceptable_hazard_rate - hazard
    return SafetyCase(
        evidence=(),
        excluded=(),
        hmp_rate_bound=hmp_rate_bound,
        scenario_rate=scenario,
        crash_given_hazard=params.crash_given_hazard,
        hazard_rate=hazard,
        acceptable_hazard_rate=params.acceptable_hazard_rate,
        residual=residual,
        acceptable=residual >= 0.0,
        notes=("assembled from a precomputed misperception bound",),
    )


def safety_case_to_json_dict(case: SafetyCase) -> dict:
    return {
        "bounds": [
            {
                "bound": "hmp_rate_bound",
                "description": "weighted hazardous-misperception rate over included clouds",
                "value": case.hmp_rate_bound,
            },
            {
                "bound": "scenario_rate",
                "description": "per-frame scenario encounter probability from kinematics",
                "value": case.scenario_rate,
            },
            {
                "bound": "crash_given_hazard",
                "description": "probability that a hazardous misperception leads to a crash",
                "value": case.crash_given_hazard,
            },
            {
                "bound": "hazard_rate",
                "description": "crash_given_hazard * hmp_rate_bound * scenario_rate",
                "value": case.hazard_rate,
            },
            {
                "bound": "acceptable_hazard_rate",
                "description": "user-supplied top-level bound",
                "value": case.acceptable_hazard_rate,
            },
            {
                "bound": "residual",
                "description": "acceptable_hazard_rate - hazard_rate",
                "value": case.residual,
            },
        ],
        "acceptable": case.acceptable,
        "excluded_clouds": list(case.excluded),
        "clouds": [row.to_json_dict() for row in case.evidence],
        "notes": list(case.notes),
    }


def safety_case_to_text(case: SafetyCase, per_cloud: Sequence[CloudEvidence] | None = None) -> str:
    lines = [
        f"{'safety bound':<26} {'value':>12}",
        f"{'hmp rate bound':<26} {case.hmp_rate_bound:>12.6g}",
        f"{'scenario rate':<26} {case.scenario_rate:>12.6g}",
        f"{'crash given hazard':<26} {case.crash_given_hazard:>12.6g}",
        f"{'hazard rate':<26} {case.hazard_rate:>12.6g}",
        f"{'acceptable hazard rate':<26} {case.acceptable_hazard_rate:>12.6g}",
        f"{'residual':<26} {case.residual:>12.6g}",
        f"verdict: {'acceptable' if case.acceptable else 'NOT acceptable'}",
    ]
    if case.excluded:
        lines.append("excluded clouds: " + ", ".join(str(c) for c in case.excluded))
    for note in case.notes:
        lines.append(f"note: {note}")
    rows = per_cloud if per_cloud is not None else case.evidence
    if rows:
        lines.append("")
        lines.append(
            f"{'cloud':>5} {'support':>8} {'mp_rate':>9} {'+/-':>9} {'hmp_rate':>9} "
            f"{'exposure':>9} {'reliable':>8}"
        )
        for r in rows:
            lines.append(
                f"{r.cloud_id:>5} {r.support:>8} {r.mp_rate:>9.4f} {r.delta_q:>9.4f} "
                f"{r.hmp_occurrence:>9.4f} {r.exposure:>9.4f} {str(r.reliable):>8}"
            )
    return "\n".join(lines) + "\n"
