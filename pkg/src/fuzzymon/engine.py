"""Evolving fuzzy classifier: online datacloud discovery with RLS consequents.

The classifier maintains a set of dataclouds, each a prototype-centered fuzzy
set paired with an affine consequent. Training is strictly online: every
sample is first scored against the current rule base (test), then used to
update global statistics, cloud structure, and consequents (train). Cloud
creation follows a density-extremum rule that needs no tuned radius: a sample
whose global density exceeds every prototype's, or falls below every
prototype's, starts a new cloud.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.exceptions import NotFittedError
from sklearn.utils.validation import check_array, check_X_y

from .errors import SchemaMismatchError, StateFormatError
from .schema import FeatureSchema, ObservationVector, RawRecord, encode

STATE_FORMAT = "fuzzy-monitor-state"
STATE_VERSION = 1

ORIGIN_DISCOVERED = "discovered"
ORIGIN_SEEDED = "user-seeded"


@dataclass(frozen=True)
class Datacloud:
    """Read-only snapshot of one fuzzy rule (antecedent + consequent)."""

    id: int
    prototype: np.ndarray
    dim_mean_square: np.ndarray  # per-dimension mean of squared components
    support: int
    mp_count: int
    hmp_count: int
    consequent: np.ndarray
    covariance: np.ndarray
    created_at: int  # global sample index at creation (1-based)
    accumulated_firing: float
    origin: str
    variance: float  # mean_square - ||prototype||^2, clamped to the variance floor

    @property
    def mean_square(self) -> float:
        return float(self.dim_mean_square.sum())

    def rule_output(self, o: np.ndarray | None = None) -> float:
        """Affine consequent evaluated at ``o`` (default: at the prototype)."""
        vec = self.prototype if o is None else np.asarray(o, dtype=np.float64)
        return float(self.consequent[0] + vec @ self.consequent[1:])


@dataclass(frozen=True)
class GlobalStats:
    """Running mean / mean-square of all training samples."""

    n_seen: int
    mean: np.ndarray
    mean_square: float
    variance_floor: float = 1e-6

    @property
    def variance(self) -> float:
        return max(self.mean_square - float(self.mean @ self.mean), self.variance_floor)


@dataclass(frozen=True)
class CloudAction:
    """One structural event from a training step."""

    kind: str  # "created" | "updated" | "merged" | "pruned"
    cloud_id: int
    absorbed_id: int | None = None  # merged only: the id that disappeared


@dataclass(frozen=True)
class RollingAccuracy:
    cumulative: float | None
    windowed: float | None
    window_full: bool


@dataclass(frozen=True)
class UpdateOutcome:
    """Result of one test-then-train step."""

    predicted: int | None  # None when the model was empty (no test possible)
    correct: bool | None
    actions: tuple[CloudAction, ...]
    accuracy: RollingAccuracy
    human_review_due: bool


@dataclass(frozen=True)
class Prediction:
    score: float
    label: int
    firings: dict[int, float]  # cloud id -> normalized firing strength


def membership(cloud: Datacloud, o: np.ndarray | ObservationVector) -> float:
    """Unimodal density of ``o`` under the cloud: 1 / (1 + d^2 / variance)."""
    vec = o.values if isinstance(o, ObservationVector) else np.asarray(o, dtype=np.float64)
    d2 = float(np.sum((vec - cloud.prototype) ** 2))
    return 1.0 / (1.0 + d2 / cloud.variance)


def global_density(stats: GlobalStats, o: np.ndarray | ObservationVector) -> float:
    """Same unimodal form evaluated against the global mean/variance."""
    if stats.n_seen < 1:
        raise ValueError("global density is undefined before any sample was seen")
    vec = o.values if isinstance(o, ObservationVector) else np.asarray(o, dtype=np.float64)
    d2 = float(np.sum((vec - stats.mean) ** 2))
    return 1.0 / (1.0 + d2 / stats.variance)


def rls_update(
    consequents: np.ndarray,
    covariances: np.ndarray,
    xbar: np.ndarray,
    weights: np.ndarray,
    target: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Weighted recursive least squares over a stack of rules.

    consequents: (K, m), covariances: (K, m, m), xbar: (m,), weights: (K,).
    The denominator is >= 1 for PSD covariances, so the update never divides
    by anything small. Zero weight leaves a rule exactly unchanged.
    """
    cx = covariances @ xbar  # (K, m)
    quad = cx @ xbar  # (K,)
    denom = 1.0 + weights * quad
    cov_new = covariances - (weights / denom)[:, None, None] * (cx[:, :, None] * cx[:, None, :])
    err = target - consequents @ xbar  # (K,)
    cons_new = consequents + (weights * err)[:, None] * (cov_new @ xbar)
    return cons_new, cov_new


def update_consequent(
    consequent: np.ndarray,
    covariance: np.ndarray,
    xbar: np.ndarray,
    weight: float,
    target: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Single-rule weighted RLS step; see rls_update."""
    a, c = rls_update(
        np.asarray(consequent, dtype=np.float64)[None, :],
        np.asarray(covariance, dtype=np.float64)[None, :, :],
        np.asarray(xbar, dtype=np.float64),
        np.asarray([weight], dtype=np.float64),
        float(target),
    )
    return a[0], c[0]


class FuzzyMonitorClassifier(BaseEstimator, ClassifierMixin):
    """Online fuzzy rule-based misperception classifier.

    Parameters
    ----------
    schema : FeatureSchema, optional
        Feature schema of the encoded space. Required only for
        seed_prototype and for persisting the schema with the model.
    rls_init_scale : float
        Diagonal scale of the initial RLS covariance (diffuse prior).
    merge_threshold : float
        Two clouds merge when each prototype's membership in the other
        exceeds this value.
    utility_threshold, min_support_for_prune : float, int
        A cloud is pruned when its accumulated normalized firing per sample
        of age drops below utility_threshold, once its support reaches
        min_support_for_prune.
    window : int
        Sliding-window length for the test-then-train accuracy.
    target_accuracy : float
        Windowed accuracy at which a human review of the training state is due.
    variance_floor : float
        Hard lower bound for all variances; singleton clouds additionally use
        max(variance_floor, global variance / 100).
    random_state : int, optional
        Recorded for reproducibility of surrounding pipelines; the learner
        itself is deterministic.
    """

    def __init__(
        self,
        schema: FeatureSchema | None = None,
        rls_init_scale: float = 1000.0,
        merge_threshold: float = 0.8,
        utility_threshold: float = 0.01,
        min_support_for_prune: int = 20,
        window: int = 500,
        target_accuracy: float = 0.9,
        variance_floor: float = 1e-6,
        random_state: int | None = None,
    ):
        self.schema = schema
        self.rls_init_scale = rls_init_scale
        self.merge_threshold = merge_threshold
        self.utility_threshold = utility_threshold
        self.min_support_for_prune = min_support_for_prune
        self.window = window
        self.target_accuracy = target_accuracy
        self.variance_floor = variance_floor
        self.random_state = random_state

    # -- state management -------------------------------------------------

    def _ensure_state(self, dim: int | None = None) -> None:
        if hasattr(self, "n_seen_"):
            return
        self.n_features_in_: int | None = dim
        self.classes_ = np.array([0, 1])
        self.ids_: list[int] = []
        self.origins_: list[str] = []
        self.protos_ = np.zeros((0, dim or 0))
        self.sqmeans_ = np.zeros((0, dim or 0))
        self.support_ = np.zeros(0, dtype=np.int64)
        self.mp_counts_ = np.zeros(0, dtype=np.int64)
        self.hmp_counts_ = np.zeros(0, dtype=np.int64)
        self.consequents_ = np.zeros((0, (dim or 0) + 1))
        self.covariances_ = np.zeros((0, (dim or 0) + 1, (dim or 0) + 1))
        self.firing_ = np.zeros(0)
        self.created_at_ = np.zeros(0, dtype=np.int64)
        self.next_id_ = 0
        self.n_seen_ = 0
        self.g_mean_ = np.zeros(dim or 0)
        self.g_sq_ = 0.0
        self.dropped_by_prune_ = 0
        self.tests_ = 0
        self.hits_ = 0
        self.window_buf_: deque[int] = deque(maxlen=self.window)

    def _as_vector(self, o, allow_new_dim: bool = False) -> np.ndarray:
        vec = o.values if isinstance(o, ObservationVector) else np.asarray(o, dtype=np.float64)
        vec = np.asarray(vec, dtype=np.float64)
        if vec.ndim != 1:
            raise SchemaMismatchError(f"expected a 1-D vector, got shape {vec.shape}")
        self._ensure_state(len(vec) if allow_new_dim else None)
        if self.n_features_in_ is None:
            if not allow_new_dim:
                raise NotFittedError("the monitor is untrained; no dataclouds exist yet")
            self._resize_dim(len(vec))
        if len(vec) != self.n_features_in_:
            raise SchemaMismatchError(
                f"observation has {len(vec)} components, model expects {self.n_features_in_}"
            )
        return vec

    def _resize_dim(self, dim: int) -> None:
        self.n_features_in_ = dim
        self.protos_ = self.protos_.reshape(0, dim)
        self.sqmeans_ = self.sqmeans_.reshape(0, dim)
        self.consequents_ = self.consequents_.reshape(0, dim + 1)
        self.covariances_ = self.covariances_.reshape(0, dim + 1, dim + 1)
        self.g_mean_ = np.zeros(dim)

    @property
    def n_clouds_(self) -> int:
        return len(self.ids_) if hasattr(self, "ids_") else 0

    def _eps_var(self) -> float:
        gvar = max(self.g_sq_ - float(self.g_mean_ @ self.g_mean_), self.variance_floor)
        return max(self.variance_floor, gvar / 100.0)

    def _variances(self) -> np.ndarray:
        raw = self.sqmeans_.sum(axis=1) - (self.protos_**2).sum(axis=1)
        return np.maximum(raw, self._eps_var())

    def global_stats(self) -> GlobalStats:
        self._ensure_state()
        return GlobalStats(self.n_seen_, self.g_mean_.copy(), self.g_sq_, self.variance_floor)

    def clouds(self) -> list[Datacloud]:
        """Snapshot of all dataclouds in id order."""
        if self.n_clouds_ == 0:
            return []
        variances = self._variances()
        return [
            Datacloud(
                id=self.ids_[k],
                prototype=self.protos_[k].copy(),
                dim_mean_square=self.sqmeans_[k].copy(),
                support=int(self.support_[k]),
                mp_count=int(self.mp_counts_[k]),
                hmp_count=int(self.hmp_counts_[k]),
                consequent=self.consequents_[k].copy(),
                covariance=self.covariances_[k].copy(),
                created_at=int(self.created_at_[k]),
                accumulated_firing=float(self.firing_[k]),
                origin=self.origins_[k],
                variance=float(variances[k]),
            )
            for k in range(self.n_clouds_)
        ]

    # -- inference ---------------------------------------------------------

    def _memberships(self, vec: np.ndarray) -> np.ndarray:
        d2 = ((self.protos_ - vec) ** 2).sum(axis=1)
        return 1.0 / (1.0 + d2 / self._variances())

    def _score_vector(self, vec: np.ndarray) -> tuple[float, int, np.ndarray]:
        if self.n_clouds_ == 0:
            raise NotFittedError("the monitor is untrained; no dataclouds exist yet")
        mu = self._memberships(vec)
        lam = mu / mu.sum()
        xbar = np.concatenate(([1.0], vec))
        outputs = self.consequents_ @ xbar
        score = float(np.clip(lam @ outputs, 0.0, 1.0))
        label = 1 if score >= 0.5 else 0  # ties classified unreliable
        return score, label, lam

    def predict_one(self, o) -> Prediction:
        """Score a single observation; firings are keyed by cloud id."""
        vec = self._as_vector(o)
        score, label, lam = self._score_vector(vec)
        return Prediction(score, label, dict(zip(self.ids_, lam.tolist())))

    def predict(self, X) -> np.ndarray:
        X = check_array(X, dtype=np.float64)
        return np.array([self._score_vector(self._as_vector(row))[1] for row in X])

    def predict_score(self, X) -> np.ndarray:
        X = check_array(X, dtype=np.float64)
        return np.array([self._score_vector(self._as_vector(row))[0] for row in X])

    def rolling_accuracy(self) -> RollingAccuracy:
        self._ensure_state()
        cumulative = self.hits_ / self.tests_ if self.tests_ else None
        windowed = sum(self.window_buf_) / len(self.window_buf_) if self.window_buf_ else None
        return RollingAccuracy(cumulative, windowed, len(self.window_buf_) == self.window)

    # -- training ----------------------------------------------------------

    def learn_one(self, o, mp: int, hmp: int | None = None) -> UpdateOutcome:
        """One test-then-train step.

        ``hmp`` defaults to the hazardous flag of the observation's source
        record when available, else 0. The prediction recorded in the outcome
        is made before any state is touched by this sample.
        """
        if hmp is None:
            rec = o.record if isinstance(o, ObservationVector) else None
            hmp = rec.hmp if rec is not None else 0
        mp = int(mp)
        hmp = int(hmp)
        if mp not in (0, 1) or hmp not in (0, 1):
            raise ValueError("mp and hmp must be 0 or 1")
        if hmp > mp:
            raise ValueError("hmp=1 requires mp=1")
        vec = self._as_vector(o, allow_new_dim=True)

        # 1) test: score against the state as-is (skipped while empty)
        predicted: int | None = None
        correct: bool | None = None
        if self.n_clouds_ > 0:
            _, predicted, _ = self._score_vector(vec)
            correct = predicted == mp
            self.tests_ += 1
            self.hits_ += int(correct)
            self.window_buf_.append(int(correct))

        # 2) global statistics
        n = self.n_seen_
        self.g_mean_ = (self.g_mean_ * n + vec) / (n + 1)
        self.g_sq_ = (self.g_sq_ * n + float(vec @ vec)) / (n + 1)
        self.n_seen_ = n + 1

        # 3) structure: create at density extremum, else update the winner
        actions: list[CloudAction] = []
        if self.n_clouds_ == 0:
            actions.append(self._create(vec, mp, hmp, ORIGIN_DISCOVERED))
        else:
            stats = GlobalStats(self.n_seen_, self.g_mean_, self.g_sq_, self.variance_floor)
            d2_o = float(np.sum((vec - self.g_mean_) ** 2))
            gd_o = 1.0 / (1.0 + d2_o / stats.variance)
            d2_p = ((self.protos_ - self.g_mean_) ** 2).sum(axis=1)
            gd_p = 1.0 / (1.0 + d2_p / stats.variance)
            # The density extremum alone cannot separate regions that sit at
            # similar distances from the global mean (and is exactly tied in
            # the one-cloud/two-sample case), so a sample farther from every
            # prototype than the global variance scale also starts a cloud.
            d2_nearest = float(((self.protos_ - vec) ** 2).sum(axis=1).min())
            if gd_o > gd_p.max() or gd_o < gd_p.min() or d2_nearest > stats.variance:
                actions.append(self._create(vec, mp, hmp, ORIGIN_DISCOVERED))
            else:
                k = int(np.argmax(self._memberships(vec)))  # ties -> lowest id
                s = int(self.support_[k])
                self.protos_[k] = (self.protos_[k] * s + vec) / (s + 1)
                self.sqmeans_[k] = (self.sqmeans_[k] * s + vec**2) / (s + 1)
                self.support_[k] = s + 1
                self.mp_counts_[k] += mp
                self.hmp_counts_[k] += hmp
                actions.append(CloudAction("updated", self.ids_[k]))

        # 4) consequents: all rules, weighted by normalized firing
        mu = self._memberships(vec)
        lam = mu / mu.sum()
        xbar = np.concatenate(([1.0], vec))
        self.consequents_, self.covariances_ = rls_update(
            self.consequents_, self.covariances_, xbar, lam, float(mp)
        )
        self.firing_ += lam

        # 5) refine: at most one merge and one prune per step
        actions.extend(self._refine())

        acc = self.rolling_accuracy()
        review = acc.window_full and acc.windowed is not None and acc.windowed >= self.target_accuracy
        return UpdateOutcome(predicted, correct, tuple(actions), acc, review)

    def _create(self, vec: np.ndarray, mp: int, hmp: int, origin: str) -> CloudAction:
        dim = len(vec)
        self.protos_ = np.vstack([self.protos_, vec])
        self.sqmeans_ = np.vstack([self.sqmeans_, vec**2])
        self.support_ = np.append(self.support_, 1)
        self.mp_counts_ = np.append(self.mp_counts_, mp)
        self.hmp_counts_ = np.append(self.hmp_counts_, hmp)
        consequent = np.zeros(dim + 1)
        consequent[0] = float(mp)  # first label anchors the rule's polarity
        self.consequents_ = np.vstack([self.consequents_, consequent])
        cov = np.eye(dim + 1) * self.rls_init_scale
        self.covariances_ = np.concatenate([self.covariances_, cov[None]], axis=0)
        self.firing_ = np.append(self.firing_, 0.0)
        self.created_at_ = np.append(self.created_at_, self.n_seen_)
        cloud_id = self.next_id_
        self.ids_.append(cloud_id)
        self.origins_.append(origin)
        self.next_id_ += 1
        return CloudAction("created", cloud_id)

    def _refine(self) -> list[CloudAction]:
        actions: list[CloudAction] = []
        if self.n_clouds_ >= 2:
            var = self._variances()
            diff = self.protos_[:, None, :] - self.protos_[None, :, :]
            d2 = np.einsum("ijk,ijk->ij", diff, diff)
            mu = 1.0 / (1.0 + d2 / var[:, None])  # mu[i, j]: membership of p_j in cloud i
            mutual = (mu > self.merge_threshold) & (mu.T > self.merge_threshold)
            pairs = np.argwhere(np.triu(mutual, k=1))
            if len(pairs):
                actions.append(self._merge(int(pairs[0][0]), int(pairs[0][1])))
        if self.n_clouds_ > 0:
            age = self.n_seen_ - self.created_at_
            eligible = (self.support_ >= self.min_support_for_prune) & (age > 0)
            if eligible.any():
                util = np.full(self.n_clouds_, np.inf)
                util[eligible] = self.firing_[eligible] / age[eligible]
                k = int(np.argmin(util))
                if util[k] < self.utility_threshold:
                    actions.append(self._prune(k))
        return actions

    def _merge(self, i: int, j: int) -> CloudAction:
        si, sj = int(self.support_[i]), int(self.support_[j])
        donor = i if si >= sj else j  # consequent/covariance from the higher-support cloud
        total = si + sj
        self.protos_[i] = (self.protos_[i] * si + self.protos_[j] * sj) / total
        self.sqmeans_[i] = (self.sqmeans_[i] * si + self.sqmeans_[j] * sj) / total
        self.support_[i] = total
        self.mp_counts_[i] += self.mp_counts_[j]
        self.hmp_counts_[i] += self.hmp_counts_[j]
        self.consequents_[i] = self.consequents_[donor]
        self.covariances_[i] = self.covariances_[donor]
        self.firing_[i] += self.firing_[j]
        self.created_at_[i] = min(self.created_at_[i], self.created_at_[j])
        self.origins_[i] = self.origins_[donor]
        kept, absorbed = self.ids_[i], self.ids_[j]
        self._delete_row(j)
        return CloudAction("merged", kept, absorbed)

    def _prune(self, k: int) -> CloudAction:
        self.dropped_by_prune_ += int(self.support_[k])
        cloud_id = self.ids_[k]
        self._delete_row(k)
        return CloudAction("pruned", cloud_id)

    def _delete_row(self, k: int) -> None:
        self.protos_ = np.delete(self.protos_, k, axis=0)
        self.sqmeans_ = np.delete(self.sqmeans_, k, axis=0)
        self.support_ = np.delete(self.support_, k)
        self.mp_counts_ = np.delete(self.mp_counts_, k)
        self.hmp_counts_ = np.delete(self.hmp_counts_, k)
        self.consequents_ = np.delete(self.consequents_, k, axis=0)
        self.covariances_ = np.delete(self.covariances_, k, axis=0)
        self.firing_ = np.delete(self.firing_, k)
        self.created_at_ = np.delete(self.created_at_, k)
        del self.ids_[k]
        del self.origins_[k]

    def seed_prototype(self, record: RawRecord, mp: int, hmp: int | None = None) -> int:
        """Create a user-provided cloud from a raw record; returns its id.

        The seeded record counts as a training instance (it enters the global
        statistics), but no test step is performed and no refinement runs
        until the next learn_one.
        """
        if self.schema is None:
            raise ValueError("seed_prototype requires the classifier to hold a schema")
        if hmp is None:
            hmp = record.hmp
        vec = self._as_vector(encode(record, self.schema), allow_new_dim=True)
        n = self.n_seen_
        self.g_mean_ = (self.g_mean_ * n + vec) / (n + 1)
        self.g_sq_ = (self.g_sq_ * n + float(vec @ vec)) / (n + 1)
        self.n_seen_ = n + 1
        return self._create(vec, int(mp), int(hmp), ORIGIN_SEEDED).cloud_id

    def partial_fit(self, X, y, hmp: Sequence[int] | None = None, classes=None) -> "FuzzyMonitorClassifier":
        X, y = check_X_y(X, y)
        if hmp is None:
            hmp = np.zeros(len(y), dtype=int)
        for row, label, hz in zip(X, y, hmp):
            self.learn_one(row, int(label), int(hz))
        return self

    def fit(self, X, y, hmp: Sequence[int] | None = None) -> "FuzzyMonitorClassifier":
        """Train from scratch (any previous online state is discarded)."""
        for attr in list(vars(self)):
            if attr.endswith("_") and not attr.endswith("__"):
                delattr(self, attr)
        return self.partial_fit(X, y, hmp=hmp)

    # -- persistence ---------------------------------------------------------

    def to_state(self) -> dict[str, Any]:
        """Versioned JSON-serializable document capturing the full state."""
        self._ensure_state()
        params = {k: v for k, v in self.get_params().items() if k != "schema"}
        return {
            "format": STATE_FORMAT,
            "version": STATE_VERSION,
            "hyperparams": params,
            "schema": self.schema.to_json_dict() if self.schema is not None else None,
            "n_features": self.n_features_in_,
            "n_seen": self.n_seen_,
            "global_mean": self.g_mean_.tolist(),
            "global_mean_square": self.g_sq_,
            "dropped_by_prune": self.dropped_by_prune_,
            "next_id": self.next_id_,
            "clouds": [
                {
                    "id": self.ids_[k],
                    "origin": self.origins_[k],
                    "prototype": self.protos_[k].tolist(),
                    "dim_mean_square": self.sqmeans_[k].tolist(),
                    "support": int(self.support_[k]),
                    "mp_count": int(self.mp_counts_[k]),
                    "hmp_count": int(self.hmp_counts_[k]),
                    "consequent": self.consequents_[k].tolist(),
                    "covariance": self.covariances_[k].tolist(),
                    "accumulated_firing": float(self.firing_[k]),
                    "created_at": int(self.created_at_[k]),
                }
                for k in range(self.n_clouds_)
            ],
            "prequential": {
                "tests": self.tests_,
                "hits": self.hits_,
                "window": list(self.window_buf_),
            },
        }

    def save_state(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_state(), fh, sort_keys=True, separators=(",", ":"))
            fh.write("\n")

    @classmethod
    def from_state(cls, doc: dict[str, Any]) -> "FuzzyMonitorClassifier":
        if not isinstance(doc, dict) or doc.get("format") != STATE_FORMAT:
            raise StateFormatError("not a fuzzy monitor state document")
        if doc.get("version") != STATE_VERSION:
            raise StateFormatError(
                f"unsupported state version {doc.get('version')!r} (expected {STATE_VERSION})"
            )
        try:
            schema = doc["schema"]
            model = cls(
                schema=FeatureSchema.from_json_dict(schema) if schema else None,
                **doc["hyperparams"],
            )
            dim = doc["n_features"]
            model._ensure_state(dim)
            if dim is not None:
                model._resize_dim(int(dim))
            model.n_seen_ = int(doc["n_seen"])
            model.g_mean_ = np.asarray(doc["global_mean"], dtype=np.float64)
            model.g_sq_ = float(doc["global_mean_square"])
            model.dropped_by_prune_ = int(doc["dropped_by_prune"])
            model.next_id_ = int(doc["next_id"])
            clouds = doc["clouds"]
            m = (int(dim) + 1) if dim is not None else 1
            model.ids_ = [int(c["id"]) for c in clouds]
            model.origins_ = [str(c["origin"]) for c in clouds]
            model.protos_ = np.array([c["prototype"] for c in clouds], dtype=np.float64).reshape(
                len(clouds), dim or 0
            )
            model.sqmeans_ = np.array(
                [c["dim_mean_square"] for c in clouds], dtype=np.float64
            ).reshape(len(clouds), dim or 0)
            model.support_ = np.array([c["support"] for c in clouds], dtype=np.int64)
            model.mp_counts_ = np.array([c["mp_count"] for c in clouds], dtype=np.int64)
            model.hmp_counts_ = np.array([c["hmp_count"] for c in clouds], dtype=np.int64)
            model.consequents_ = np.array(
                [c["consequent"] for c in clouds], dtype=np.float64
            ).reshape(len(clouds), m if dim is not None else 0)
            model.covariances_ = np.array(
                [c["covariance"] for c in clouds], dtype=np.float64
            ).reshape(len(clouds), m if dim is not None else 0, m if dim is not None else 0)
            model.firing_ = np.array([c["accumulated_firing"] for c in clouds], dtype=np.float64)
            model.created_at_ = np.array([c["created_at"] for c in clouds], dtype=np.int64)
            preq = doc["prequential"]
            model.tests_ = int(preq["tests"])
            model.hits_ = int(preq["hits"])
            model.window_buf_ = deque((int(x) for x in preq["window"]), maxlen=model.window)
        except (KeyError, TypeError, ValueError) as exc:
            raise StateFormatError(f"corrupted state document: {exc}") from exc
        return model

    @classmethod
    def load_state(cls, path: str | Path) -> "FuzzyMonitorClassifier":
        with open(path, "r", encoding="utf-8") as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise StateFormatError(f"corrupted state document: {exc}") from exc
        return cls.from_state(doc)
