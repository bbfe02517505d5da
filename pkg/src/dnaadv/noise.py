"""Sequencing-error simulation: i.i.d. per-base substitution, insertion,
and deletion events, for robustness checks against non-adversarial noise."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataio import LabeledDataset
from .errors import EmptyResultError
from .oracle import Oracle
from .seqcore import DnaSequence, decode_codes, encode_sequence


@dataclass(frozen=True)
class ErrorModel:
    """Per-base event probabilities; at most one event per input base."""

    sub_rate: float = 0.0
    ins_rate: float = 0.0
    del_rate: float = 0.0
    seed: int = 0

    def __post_init__(self):
        for rate in (self.sub_rate, self.ins_rate, self.del_rate):
            if not 0.0 <= rate <= 0.5:
                raise ValueError("each rate must lie in [0, 0.5]")
        if self.sub_rate + self.ins_rate + self.del_rate > 1.0:
            raise ValueError("rates must sum to at most 1")

    @classmethod
    def from_dict(cls, doc: dict) -> "ErrorModel":
        return cls(
            sub_rate=float(doc.get("sub_rate", 0.0)),
            ins_rate=float(doc.get("ins_rate", 0.0)),
            del_rate=float(doc.get("del_rate", 0.0)),
            seed=int(doc.get("seed", 0)),
        )

    def to_dict(self) -> dict:
        return {"sub_rate": self.sub_rate, "ins_rate": self.ins_rate,
                "del_rate": self.del_rate, "seed": self.seed}


def corrupt(seq: DnaSequence, em: ErrorModel,
            seed: int | None = None) -> DnaSequence:
    """Apply one left-to-right pass of seeded sequencing errors.

    Per base, one event is drawn: substitution (uniform over the three
    other bases), deletion, insertion (uniform base placed before the
    current one, which is then kept), or no-op.  Output length is
    len - deletions + insertions.
    """
    rng = np.random.default_rng(em.seed if seed is None else seed)
    codes = encode_sequence(seq)
    n = len(codes)
    u = rng.random(n)
    sub = u < em.sub_rate
    ins = (~sub) & (u < em.sub_rate + em.ins_rate)
    dele = (~sub) & (~ins) & (u < em.sub_rate + em.ins_rate + em.del_rate)

    out_codes = codes.copy()
    n_sub = int(sub.sum())
    if n_sub:
        # uniform over the 3 other bases: old + 1 + r (mod 4), r in {0,1,2}
        shift = rng.integers(1, 4, size=n_sub).astype(np.uint8)
        out_codes[sub] = (codes[sub] + shift) % 4
    n_ins = int(ins.sum())
    ins_bases = rng.integers(0, 4, size=n_ins).astype(np.uint8) if n_ins else None

    emit_len = np.ones(n, dtype=np.int64)
    emit_len[dele] = 0
    emit_len[ins] = 2
    total = int(emit_len.sum())
    if total == 0:
        raise EmptyResultError("all bases deleted")
    out = np.empty(total, dtype=np.uint8)
    starts = np.cumsum(emit_len) - emit_len
    if n_ins:
        out[starts[ins]] = ins_bases
    keep = ~dele
    out[starts[keep] + ins[keep]] = out_codes[keep]
    return DnaSequence._from_validated(decode_codes(out))


def evaluate_under_noise(oracle: Oracle, test_set: LabeledDataset,
                         em: ErrorModel) -> tuple[float, float]:
    """Corrupt each test sequence once (seeded per record) and report
    (clean accuracy, noisy accuracy)."""
    if len(test_set) == 0:
        raise ValueError("test set must be nonempty")
    labels = test_set.labels()
    clean_probs = oracle.predict_proba(test_set.sequences())
    clean_acc = float((clean_probs.argmax(axis=1) == labels).mean())
    noisy = []
    for i, (_, seq, _) in enumerate(test_set.records):
        read_seed = int(np.random.SeedSequence([em.seed, i]).generate_state(
            1, np.uint64)[0])
        noisy.append(corrupt(seq, em, seed=read_seed))
    noisy_probs = oracle.predict_proba(noisy)
    noisy_acc = float((noisy_probs.argmax(axis=1) == labels).mean())
    return clean_acc, noisy_acc
