"""Benchmarking runtime monitors: reward functions and SG/RH/AC metrics.

Metrics are computed through the safety/mission return functions against two
reference systems: the unmonitored component (monitor constantly 0) and the
ideal monitor (predictions equal to the ground-truth error status). Counts
stay exact rational numbers until reporting.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Mapping, Sequence

import numpy as np

from .odd import OddSpecification, within_odd
from .schema import FeatureSchema, RawRecord, encode

STATUSES = ("mp", "hmp")


def safety_return(tau: int, m: int) -> int:
    """0 when an actual error goes undetected, else 1."""
    if tau not in (0, 1) or m not in (0, 1):
        raise ValueError("safety_return expects binary inputs")
    return 0 if tau == 1 and m == 0 else 1


def mission_return(tau: int, m: int) -> int:
    """0 when the monitor intervenes without an actual error, else 1."""
    if tau not in (0, 1) or m not in (0, 1):
        raise ValueError("mission_return expects binary inputs")
    return 0 if tau == 0 and m == 1 else 1


@dataclass(frozen=True)
class EvalRecord:
    """One benchmark instance: encoded conditions plus ground-truth statuses."""

    vector: np.ndarray
    tau_mp: int
    tau_hmp: int
    within_odd: bool | None = None

    def __post_init__(self):
        if self.tau_hmp > self.tau_mp:
            raise ValueError("a hazardous misperception is a misperception (tau_hmp <= tau_mp)")

    def status(self, name: str) -> int:
        if name == "mp":
            return self.tau_mp
        if name == "hmp":
            return self.tau_hmp
        raise ValueError(f"unknown status {name!r} (expected 'mp' or 'hmp')")


def make_eval_records(
    records: Sequence[RawRecord],
    schema: FeatureSchema,
    odd_spec: OddSpecification | None = None,
) -> list[EvalRecord]:
    """Encode raw records for evaluation, tagging ODD membership when a spec is given."""
    out = []
    for rec in records:
        flag = within_odd(odd_spec, rec, schema).within if odd_spec is not None else None
        out.append(EvalRecord(encode(rec, schema).values, rec.mp, rec.hmp, flag))
    return out


@dataclass(frozen=True)
class MonitorMetrics:
    """SG/RH/AC plus the confusion counts they reduce to."""

    safety_gain: Fraction
    residual_hazard: Fraction
    availability_cost: Fraction
    tp: int
    fn: int
    fp: int
    tn: int
    n: int
    base_rate: Fraction  # mean ground-truth error status

    def to_json_dict(self) -> dict:
        return {
            "safety_gain": float(self.safety_gain),
            "residual_hazard": float(self.residual_hazard),
            "availability_cost": float(self.availability_cost),
            "tp": self.tp,
            "fn": self.fn,
            "fp": self.fp,
            "tn": self.tn,
            "n": self.n,
            "base_rate": float(self.base_rate),
        }


def metrics_from_predictions(tau: Sequence[int], m: Sequence[int]) -> MonitorMetrics:
    """Reduce ground truth and monitor outputs to SG/RH/AC via the returns."""
    if len(tau) != len(m):
        raise ValueError("status and prediction sequences must have equal length")
    n = len(tau)
    if n == 0:
        raise ValueError("cannot evaluate on an empty dataset")
    sg_sum = rh_sum = ac_sum = 0
    tp = fn = fp = tn = 0
    for t, mi in zip(tau, m):
        t = int(t)
        mi = int(mi)
        sg_sum += safety_return(t, mi) - safety_return(t, 0)  # vs unmonitored
        rh_sum += safety_return(t, t) - safety_return(t, mi)  # vs ideal monitor
        ac_sum += mission_return(t, 0) - mission_return(t, mi)
        if t == 1 and mi == 1:
            tp += 1
        elif t == 1:
            fn += 1
        elif mi == 1:
            fp += 1
        else:
            tn += 1
    return MonitorMetrics(
        safety_gain=Fraction(sg_sum, n),
        residual_hazard=Fraction(rh_sum, n),
        availability_cost=Fraction(ac_sum, n),
        tp=tp,
        fn=fn,
        fp=fp,
        tn=tn,
        n=n,
        base_rate=Fraction(tp + fn, n),
    )


def evaluate(monitor, records: Sequence[EvalRecord], status: str = "mp") -> MonitorMetrics:
    """Run the monitor over the records and score it for one error status."""
    if len(records) == 0:
        raise ValueError("cannot evaluate on an empty dataset")
    X = np.stack([r.vector for r in records])
    predictions = monitor.predict(X)
    tau = [r.status(status) for r in records]
    return metrics_from_predictions(tau, predictions)


@dataclass(frozen=True)
class BenchmarkReport:
    """Per-monitor, per-status metrics with the run configuration snapshot."""

    n_input: int
    n_evaluated: int
    retention: float
    results: dict[str, dict[str, MonitorMetrics]]  # status -> monitor name -> metrics
    config: dict[str, Any]

    def to_json_dict(self) -> dict:
        return {
            "n_input": self.n_input,
            "n_evaluated": self.n_evaluated,
            "retention": self.retention,
            "results": {
                status: {name: metrics.to_json_dict() for name, metrics in by_monitor.items()}
                for status, by_monitor in self.results.items()
            },
            "config": self.config,
        }

    def to_text(self) -> str:
        lines = [
            f"records: {self.n_evaluated} of {self.n_input} evaluated "
            f"(retention {self.retention:.4f})"
        ]
        for status, by_monitor in self.results.items():
            lines.append("")
            lines.append(f"status: {status}")
            lines.append(f"{'monitor':<16} {'SG':>9} {'RH':>9} {'AC':>9}")
            for name, metrics in by_monitor.items():
                lines.append(
                    f"{name:<16} {float(metrics.safety_gain):>9.5f} "
                    f"{float(metrics.residual_hazard):>9.5f} "
                    f"{float(metrics.availability_cost):>9.5f}"
                )
        return "\n".join(lines) + "\n"


def benchmark(
    monitors: Mapping[str, Any],
    records: Sequence[EvalRecord],
    statuses: Sequence[str] = STATUSES,
    use_odd_filter: bool = False,
    config: Mapping[str, Any] | None = None,
) -> BenchmarkReport:
    """Evaluate every monitor for every status, optionally ODD-filtered first.

    Monitors must already be fitted (on the training split). Each monitor's
    predictions are computed once and reused across statuses so confusion
    counts stay consistent.
    """
    n_input = len(records)
    kept = [r for r in records if r.within_odd] if use_odd_filter else list(records)
    if use_odd_filter and any(r.within_odd is None for r in records):
        raise ValueError("records lack ODD membership flags; build them with an ODD spec")
    if not kept:
        raise ValueError("no records left to evaluate (empty input or everything filtered)")
    X = np.stack([r.vector for r in kept])
    predictions = {name: monitor.predict(X) for name, monitor in monitors.items()}
    results: dict[str, dict[str, MonitorMetrics]] = {}
    for status in statuses:
        tau = [r.status(status) for r in kept]
        results[status] = {
            name: metrics_from_predictions(tau, preds) for name, preds in predictions.items()
        }
    snapshot = dict(config or {})
    for name, monitor in monitors.items():
        if hasattr(monitor, "get_params"):
            params = {
                k: v for k, v in monitor.get_params(deep=False).items() if _is_json_scalar(v)
            }
            snapshot.setdefault("monitors", {})[name] = params
        if getattr(monitor, "degenerate_", False):
            snapshot.setdefault("warnings", []).append(
                f"{name}: fitted on a single class (degenerate prior)"
            )
    return BenchmarkReport(
        n_input=n_input,
        n_evaluated=len(kept),
        retention=len(kept) / n_input if n_input else 0.0,
        results=results,
        config=snapshot,
    )


def _is_json_scalar(value: Any) -> bool:
    return value is None or isinstance(value, (bool, int, float, str))
