"""Modeling attack: logistic regression and a one-hidden-layer perceptron
trained by mini-batch gradient descent on featurized challenges."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .dataset import CrpDataset
from .errors import UsageError
from .features import FeatureMap, featurize


class ModelKind(str, enum.Enum):
    LOGISTIC = "lr"
    MLP = "mlp"


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.05
    epochs: int = 50
    batch_size: int = 256
    hidden: int = 64
    init_scale: float = 0.1

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def _logistic_loss(z, y):
    # log(1 + e^z) - y*z, computed without overflow
    return np.mean(np.logaddexp(0.0, z) - y * z)


def init_params(kind: ModelKind, n_features: int, cfg: TrainConfig, rng: np.random.Generator) -> dict:
    if kind is ModelKind.LOGISTIC:
        return {"w": np.zeros(n_features), "b": np.zeros(1)}
    h = cfg.hidden
    return {
        "W1": rng.normal(0.0, cfg.init_scale, size=(n_features, h)),
        "b1": np.zeros(h),
        "w2": rng.normal(0.0, cfg.init_scale, size=h),
        "b2": np.zeros(1),
    }


def logits(kind: ModelKind, params: dict, X: np.ndarray) -> np.ndarray:
    if kind is ModelKind.LOGISTIC:
        return X @ params["w"] + params["b"][0]
    return np.tanh(X @ params["W1"] + params["b1"]) @ params["w2"] + params["b2"][0]


def loss_and_grad(kind: ModelKind, params: dict, X: np.ndarray, y: np.ndarray):
    """Mean logistic loss over the batch and its analytic gradient."""
    kind = ModelKind(kind)
    m = X.shape[0]
    if kind is ModelKind.LOGISTIC:
        z = X @ params["w"] + params["b"][0]
        g = (sigmoid(z) - y) / m
        return _logistic_loss(z, y), {"w": X.T @ g, "b": np.array([g.sum()])}
    hidden = np.tanh(X @ params["W1"] + params["b1"])
    z = hidden @ params["w2"] + params["b2"][0]
    g = (sigmoid(z) - y) / m
    dh = np.outer(g, params["w2"]) * (1.0 - hidden ** 2)
    grads = {
        "W1": X.T @ dh,
        "b1": dh.sum(axis=0),
        "w2": hidden.T @ g,
        "b2": np.array([g.sum()]),
    }
    return _logistic_loss(z, y), grads


@dataclass
class AttackModel:
    feature_map: FeatureMap
    kind: ModelKind
    params: dict
    train_meta: dict = field(default_factory=dict)

    def predict(self, challenges: np.ndarray) -> np.ndarray:
        X = featurize(np.atleast_2d(challenges), self.feature_map)
        return (logits(self.kind, self.params, X) > 0).astype(np.uint8)

    def to_dict(self) -> dict:
        return {
            "feature_map": self.feature_map.value,
            "kind": self.kind.value,
            "params": {k: v.tolist() for k, v in sorted(self.params.items())},
            "train_meta": self.train_meta,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AttackModel":
        return cls(FeatureMap(d["feature_map"]), ModelKind(d["kind"]),
                   {k: np.array(v, dtype=np.float64) for k, v in d["params"].items()}, d.get("train_meta", {}))


def _single_bit_labels(ds: CrpDataset) -> np.ndarray:
    if ds.response_width != 1:
        raise UsageError(f"the attack targets single-bit responses, dataset has {ds.response_width}")
    return ds.responses[:, 0].astype(np.float64)


def train(ds: CrpDataset, fmap=FeatureMap.PARITY, kind=ModelKind.LOGISTIC,
          cfg: TrainConfig = TrainConfig(), seed: int = 0) -> AttackModel:
    """Fit on the training split only; deterministic for a given seed."""
    fmap, kind = FeatureMap(fmap), ModelKind(kind)
    train_ds = ds.train() if ds.is_split else None
    if train_ds is None or len(train_ds) == 0:
        raise UsageError("training split is empty")
    y = _single_bit_labels(train_ds)
    X = featurize(train_ds.challenges, fmap)
    rng = np.random.default_rng(seed)
    params = init_params(kind, X.shape[1], cfg, rng)
    m = X.shape[0]
    for _ in range(cfg.epochs):
        order = rng.permutation(m)
        for start in range(0, m, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            _, grads = loss_and_grad(kind, params, X[idx], y[idx])
            for key in params:
                params[key] -= cfg.learning_rate * grads[key]
    final_loss, _ = loss_and_grad(kind, params, X, y)
    meta = dict(cfg.to_dict(), seed=seed, train_rows=int(m), final_train_loss=float(final_loss))
    if kind is ModelKind.LOGISTIC:
        meta.pop("hidden")
    return AttackModel(fmap, kind, params, meta)


@dataclass(frozen=True)
class AttackReport:
    train_rows: int
    test_rows: int
    correct: int
    confusion: dict  # keys "tp", "tn", "fp", "fn"

    @property
    def test_accuracy_pct(self) -> float:
        return 100.0 * self.correct / self.test_rows

    def to_dict(self) -> dict:
        return {
            "train_rows": self.train_rows,
            "test_rows": self.test_rows,
            "correct": self.correct,
            "test_accuracy_pct": round(self.test_accuracy_pct, 6),
            "confusion": dict(self.confusion),
        }


def score(model: AttackModel, ds: CrpDataset, train_rows: int = 0) -> AttackReport:
    """Score every row of ``ds``; repeated challenges are scored row by row."""
    if len(ds) == 0:
        raise UsageError("nothing to evaluate")
    y = _single_bit_labels(ds).astype(np.uint8)
    pred = model.predict(ds.challenges)
    confusion = {
        "tp": int(np.sum((pred == 1) & (y == 1))),
        "tn": int(np.sum((pred == 0) & (y == 0))),
        "fp": int(np.sum((pred == 1) & (y == 0))),
        "fn": int(np.sum((pred == 0) & (y == 1))),
    }
    return AttackReport(train_rows, len(ds), int(np.sum(pred == y)), confusion)


def evaluate(model: AttackModel, ds: CrpDataset) -> AttackReport:
    """Accuracy over the test split."""
    test = ds.test()
    if len(test) == 0:
        raise UsageError("test split is empty")
    return score(model, test, train_rows=len(ds.train_idx))
