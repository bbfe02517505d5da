"""Adversarial training: harden the k-mer victim by mixing adversarial
examples (carrying their source's true label) into each training epoch."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .attack import ATTACK_KINDS, AttackConfig
from .campaign import _attack_one
from .dataio import LabeledDataset
from .model import LinearKmerModel, TrainConfig, _fit_epochs, loss_and_gradient
from .oracle import InProcessOracle


@dataclass(frozen=True)
class AdvTrainConfig:
    """Base optimizer settings plus the attack used to generate examples.

    mix_ratio is the number of adversarial examples per clean example each
    epoch; regenerate controls whether the adversarial set is rebuilt
    against the evolving model every epoch or only once.
    """

    base: TrainConfig
    attack: AttackConfig
    attack_kind: str = "nucleotide"
    mix_ratio: float = 1.0
    regenerate: bool = True
    frame: int = 0

    def __post_init__(self):
        if not 0.0 < self.mix_ratio <= 4.0:
            raise ValueError("mix_ratio must lie in (0,4]")
        if self.attack_kind not in ATTACK_KINDS:
            raise ValueError(f"unknown attack kind {self.attack_kind!r}")


@dataclass(frozen=True)
class EpochLog:
    epoch: int
    clean_loss: float
    adv_loss: float
    clean_acc: float


@dataclass(frozen=True)
class AdvTrainResult:
    model: LinearKmerModel
    log: tuple[EpochLog, ...]


def _epoch_sample(n: int, m: int, seed: int, epoch: int) -> np.ndarray:
    """Seeded choice of which training records to attack this epoch."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 101, epoch]))
    return rng.choice(n, size=m, replace=m > n)


def _attack_seed(seed: int, epoch: int, j: int) -> int:
    ss = np.random.SeedSequence([seed, 202, epoch, j])
    return int(ss.generate_state(1, np.uint64)[0])


def adversarial_train(ds: LabeledDataset, cfg: AdvTrainConfig, k: int = 3,
                      threads: int | None = None) -> AdvTrainResult:
    """Train with an adversarial mixture.

    Before each epoch (every epoch when regenerate is on, otherwise only
    the first), floor(mix_ratio*n) seeded-sampled training records are
    attacked against the current model snapshot; the resulting sequences
    keep their source labels and join the clean data for that epoch.
    Deterministic for a fixed (dataset order, config).
    """
    n = len(ds)
    if n == 0:
        raise ValueError("dataset must be nonempty")
    m = math.floor(cfg.mix_ratio * n)
    if m < 1:
        raise ValueError("mix_ratio too small: no adversarial examples")

    model = LinearKmerModel.zeros(k, ds.classes)
    clean_feats = model.featurizer.featurize_all(ds.sequences())
    clean_labels = ds.labels()
    shuffle_rng = np.random.default_rng(cfg.base.seed)

    adv_feats = None
    adv_labels = None
    logs = []
    for epoch in range(cfg.base.epochs):
        if epoch == 0 or cfg.regenerate:
            sample_idx = _epoch_sample(n, m, cfg.base.seed, epoch)
            adv_seqs, adv_labels = _generate_adversarial(
                ds, sample_idx, model, cfg, epoch, threads)
            adv_feats = model.featurizer.featurize_all(adv_seqs)
        feats = np.vstack([clean_feats, adv_feats])
        labels = np.concatenate([clean_labels, adv_labels])
        _fit_epochs(model, feats, labels, cfg.base, shuffle_rng, 1)
        clean_loss, _, _ = loss_and_gradient(model, clean_feats, clean_labels,
                                             cfg.base.l2)
        adv_loss, _, _ = loss_and_gradient(model, adv_feats, adv_labels,
                                           cfg.base.l2)
        clean_acc = float(
            (model.predict_proba_features(clean_feats).argmax(axis=1)
             == clean_labels).mean())
        logs.append(EpochLog(epoch=epoch + 1, clean_loss=float(clean_loss),
                             adv_loss=float(adv_loss), clean_acc=clean_acc))
    model.final_train_loss = logs[-1].clean_loss
    return AdvTrainResult(model=model, log=tuple(logs))


def _generate_adversarial(ds: LabeledDataset, sample_idx: np.ndarray,
                          model: LinearKmerModel, cfg: AdvTrainConfig,
                          epoch: int, threads: int | None):
    """Attack the sampled records against the current model snapshot."""
    oracle = InProcessOracle(model)

    def run(j: int):
        _, seq, label = ds.records[int(sample_idx[j])]
        attack_cfg = AttackConfig(
            epsilon=cfg.attack.epsilon,
            iterations=cfg.attack.iterations,
            max_queries=cfg.attack.max_queries,
            candidate_sample=cfg.attack.candidate_sample,
            seed=_attack_seed(cfg.base.seed, epoch, j),
            bt_mode=cfg.attack.bt_mode,
        )
        outcome = _attack_one(cfg.attack_kind, oracle, seq, label,
                              attack_cfg, cfg.frame)
        return outcome.adversarial, label

    indices = range(len(sample_idx))
    if threads is not None and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, indices))
    else:
        results = [run(j) for j in indices]
    seqs = [seq for seq, _ in results]
    labels = np.array([label for _, label in results], dtype=np.int64)
    return seqs, labels


def write_training_log(log, path) -> None:
    """CSV training log: epoch, clean_loss, adv_loss, clean_acc."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("epoch,clean_loss,adv_loss,clean_acc\n")
        for row in log:
            fh.write(f"{row.epoch},{row.clean_loss:.6f},"
                     f"{row.adv_loss:.6f},{row.clean_acc:.6f}\n")
