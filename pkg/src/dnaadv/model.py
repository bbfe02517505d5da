"""The built-in trainable victim: overlapping k-mer features feeding a
multinomial logistic regression, trained with seeded minibatch gradient
descent from an all-zeros start."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import kernels
from .dataio import LabeledDataset
from .errors import (
    DegenerateDatasetError,
    SequenceTooShortError,
    SerializationError,
    VersionMismatchError,
)
from .seqcore import DnaSequence, encode_sequence

MODEL_FORMAT_VERSION = 1


@dataclass(frozen=True)
class KmerFeaturizer:
    """Overlapping k-mer counter, L1-normalized so features sum to 1."""

    k: int

    def __post_init__(self):
        if not 1 <= self.k <= 8:
            raise ValueError(f"k must lie in [1,8], got {self.k}")

    @property
    def n_features(self) -> int:
        return 4 ** self.k

    def featurize_encoded(self, codes: np.ndarray) -> np.ndarray:
        """Feature matrix for a batch of equal-length encoded sequences."""
        codes = np.atleast_2d(codes)
        if codes.shape[1] < self.k:
            raise SequenceTooShortError(
                f"need length >= {self.k}, got {codes.shape[1]}")
        counts = kernels.kmer_counts(np.ascontiguousarray(codes, dtype=np.uint8), self.k)
        windows = codes.shape[1] - self.k + 1
        return counts.astype(np.float64) / windows

    def featurize(self, seq: DnaSequence | str) -> np.ndarray:
        return self.featurize_encoded(encode_sequence(seq)[None, :])[0]

    def featurize_all(self, seqs) -> np.ndarray:
        """Feature matrix for sequences of possibly different lengths."""
        rows = [None] * len(seqs)
        by_len: dict[int, list[int]] = {}
        encoded = [encode_sequence(s) for s in seqs]
        for i, codes in enumerate(encoded):
            by_len.setdefault(len(codes), []).append(i)
        for length, idxs in by_len.items():
            batch = np.stack([encoded[i] for i in idxs])
            feats = self.featurize_encoded(batch)
            for row, i in enumerate(idxs):
                rows[i] = feats[row]
        return np.stack(rows)


@dataclass(frozen=True)
class TrainConfig:
    # L1-normalized k-mer features are small (~4**-k per entry), so the
    # informative directions need a step size well above the textbook 0.1.
    learning_rate: float = 2.0
    epochs: int = 300
    batch_size: int = 64
    l2: float = 1e-5
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate < 0:
            raise ValueError("learning rate must be >= 0")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch size must be >= 1")
        if self.l2 < 0:
            raise ValueError("l2 must be >= 0")


class LinearKmerModel:
    """Multinomial logistic regression over k-mer features."""

    def __init__(self, weights: np.ndarray, bias: np.ndarray,
                 featurizer: KmerFeaturizer, class_names):
        weights = np.asarray(weights, dtype=np.float64)
        bias = np.asarray(bias, dtype=np.float64)
        if weights.shape != (len(class_names), featurizer.n_features):
            raise ValueError("weight matrix shape mismatch")
        if bias.shape != (len(class_names),):
            raise ValueError("bias shape mismatch")
        if not (np.isfinite(weights).all() and np.isfinite(bias).all()):
            raise ValueError("parameters must be finite")
        self.weights = weights
        self.bias = bias
        self.featurizer = featurizer
        self.class_names = tuple(class_names)
        self.final_train_loss: float | None = None

    @classmethod
    def zeros(cls, k: int, class_names) -> "LinearKmerModel":
        f = KmerFeaturizer(k)
        n = len(class_names)
        return cls(np.zeros((n, f.n_features)), np.zeros(n), f, class_names)

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def predict_proba_features(self, feats: np.ndarray) -> np.ndarray:
        logits = feats @ self.weights.T + self.bias
        logits -= logits.max(axis=1, keepdims=True)
        np.exp(logits, out=logits)
        logits /= logits.sum(axis=1, keepdims=True)
        return logits

    def predict_proba_encoded(self, codes: np.ndarray) -> np.ndarray:
        return self.predict_proba_features(self.featurizer.featurize_encoded(codes))

    def predict_proba(self, seqs) -> np.ndarray:
        return self.predict_proba_features(self.featurizer.featurize_all(seqs))


def loss_and_gradient(model: LinearKmerModel, feats: np.ndarray,
                      labels: np.ndarray, l2: float = 0.0):
    """Mean softmax cross-entropy plus 0.5*l2*||W||^2, with its gradient.

    Returns (loss, grad_weights, grad_bias).  The bias is not regularized.
    """
    feats = np.atleast_2d(feats)
    labels = np.asarray(labels, dtype=np.int64)
    if feats.shape[0] == 0:
        raise ValueError("batch must be nonempty")
    n = feats.shape[0]
    probs = model.predict_proba_features(feats)
    eps_clip = np.clip(probs[np.arange(n), labels], 1e-300, None)
    data_loss = -np.log(eps_clip).mean()
    loss = data_loss + 0.5 * l2 * float((model.weights ** 2).sum())
    delta = probs
    delta[np.arange(n), labels] -= 1.0
    grad_w = delta.T @ feats / n + l2 * model.weights
    grad_b = delta.sum(axis=0) / n
    return loss, grad_w, grad_b


def _fit_epochs(model: LinearKmerModel, feats: np.ndarray, labels: np.ndarray,
                cfg: TrainConfig, rng: np.random.Generator, epochs: int) -> float:
    """Run seeded minibatch gradient descent in place; returns last epoch loss."""
    n = feats.shape[0]
    last_loss = float("nan")
    for _ in range(epochs):
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            batch = order[start:start + cfg.batch_size]
            _, gw, gb = loss_and_gradient(model, feats[batch], labels[batch], cfg.l2)
            model.weights -= cfg.learning_rate * gw
            model.bias -= cfg.learning_rate * gb
        last_loss, _, _ = loss_and_gradient(model, feats, labels, cfg.l2)
    return last_loss


def train(ds: LabeledDataset, cfg: TrainConfig, k: int = 3,
          init: LinearKmerModel | None = None) -> LinearKmerModel:
    """Train the k-mer logistic model on a labeled dataset.

    Deterministic for a fixed (dataset order, config): weights start at zero
    (unless warm-started via init) and shuffling is seeded.
    """
    if len(ds) == 0:
        raise DegenerateDatasetError("empty dataset")
    labels = ds.labels()
    if len(set(labels.tolist())) < 2:
        raise DegenerateDatasetError("training needs at least 2 classes present")
    if init is not None:
        model = LinearKmerModel(init.weights.copy(), init.bias.copy(),
                                init.featurizer, init.class_names)
    else:
        model = LinearKmerModel.zeros(k, ds.classes)
    feats = model.featurizer.featurize_all(ds.sequences())
    rng = np.random.default_rng(cfg.seed)
    model.final_train_loss = _fit_epochs(model, feats, labels, cfg, rng, cfg.epochs)
    return model


def evaluate_accuracy(model: LinearKmerModel, ds: LabeledDataset) -> float:
    probs = model.predict_proba(ds.sequences())
    return float((probs.argmax(axis=1) == ds.labels()).mean())


def save_model(model: LinearKmerModel, path) -> None:
    doc = {
        "format_version": MODEL_FORMAT_VERSION,
        "k": model.featurizer.k,
        "class_names": list(model.class_names),
        "bias": model.bias.tolist(),
        "weights": model.weights.ravel().tolist(),  # row-major
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_model(path) -> LinearKmerModel:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise SerializationError(f"unreadable model file: {exc}") from exc
    if not isinstance(doc, dict) or "format_version" not in doc:
        raise SerializationError("not a model file")
    if doc["format_version"] != MODEL_FORMAT_VERSION:
        raise VersionMismatchError(
            f"model format {doc['format_version']} not supported")
    try:
        k = int(doc["k"])
        class_names = [str(c) for c in doc["class_names"]]
        featurizer = KmerFeaturizer(k)
        weights = np.array(doc["weights"], dtype=np.float64).reshape(
            len(class_names), featurizer.n_features)
        bias = np.array(doc["bias"], dtype=np.float64)
    except (KeyError, TypeError, ValueError) as exc:
        raise SerializationError(f"malformed model file: {exc}") from exc
    return LinearKmerModel(weights, bias, featurizer, class_names)
