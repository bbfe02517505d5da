"""Dataset ingestion (FASTA + label TSV), deterministic splits, and the
synthetic motif-planted benchmark generator."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    DuplicateIdError,
    MalformedFastaError,
    MalformedRowError,
    MotifTooLongError,
    TooFewSamplesError,
)
from .seqcore import ALPHABET, DnaSequence, parse_sequence


@dataclass(frozen=True)
class LabeledDataset:
    """Records of (id, sequence, class index) plus the ordered class names."""

    records: tuple[tuple[str, DnaSequence, int], ...]
    classes: tuple[str, ...]

    def __post_init__(self):
        if len(self.classes) < 2:
            raise ValueError("dataset needs at least 2 classes")
        seen = set()
        for rec_id, _seq, label in self.records:
            if rec_id in seen:
                raise DuplicateIdError(rec_id)
            seen.add(rec_id)
            if not 0 <= label < len(self.classes):
                raise ValueError(f"label {label} out of range for {rec_id}")

    def __len__(self) -> int:
        return len(self.records)

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    def sequences(self) -> list[DnaSequence]:
        return [seq for _, seq, _ in self.records]

    def labels(self) -> np.ndarray:
        return np.array([label for _, _, label in self.records], dtype=np.int64)


@dataclass(frozen=True)
class SplitSpec:
    """Train/test/validation fractions plus the shuffle seed."""

    train_frac: float = 0.75
    test_frac: float = 0.20
    val_frac: float = 0.05
    seed: int = 0

    def __post_init__(self):
        for f in (self.train_frac, self.test_frac, self.val_frac):
            if not 0.0 < f < 1.0:
                raise ValueError("split fractions must lie in (0,1)")
        if abs(self.train_frac + self.test_frac + self.val_frac - 1.0) > 1e-9:
            raise ValueError("split fractions must sum to 1")


@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters of the synthetic motif-planted benchmark.

    motifs_per_class holds, for each class, a list of (motif, plant
    probability) pairs.  Backgrounds are i.i.d. with P(G)=P(C)=gc_fraction/2.
    """

    n_classes: int
    seq_len: int
    motifs_per_class: tuple[tuple[tuple[str, float], ...], ...]
    samples_per_class: int
    gc_fraction: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.n_classes < 2:
            raise ValueError("need at least 2 classes")
        if len(self.motifs_per_class) != self.n_classes:
            raise ValueError("motifs_per_class must have one entry per class")
        if self.samples_per_class < 1:
            raise ValueError("samples_per_class must be >= 1")
        if not 0.0 <= self.gc_fraction <= 1.0:
            raise ValueError("gc_fraction must lie in [0,1]")
        for class_motifs in self.motifs_per_class:
            for motif, prob in class_motifs:
                if not motif or any(ch not in ALPHABET for ch in motif):
                    raise ValueError(f"motif {motif!r} not over ACGT")
                if len(motif) >= self.seq_len:
                    raise MotifTooLongError(
                        f"motif {motif!r} does not fit in length {self.seq_len}")
                if not 0.0 <= prob <= 1.0:
                    raise ValueError("plant probability must lie in [0,1]")

    @classmethod
    def from_dict(cls, doc: dict) -> "SyntheticSpec":
        motifs = tuple(
            tuple((str(m), float(p)) for m, p in class_motifs)
            for class_motifs in doc["motifs_per_class"]
        )
        return cls(
            n_classes=int(doc["n_classes"]),
            seq_len=int(doc["seq_len"]),
            motifs_per_class=motifs,
            samples_per_class=int(doc["samples_per_class"]),
            gc_fraction=float(doc.get("gc_fraction", 0.5)),
            seed=int(doc.get("seed", 0)),
        )

    def to_dict(self) -> dict:
        return {
            "n_classes": self.n_classes,
            "seq_len": self.seq_len,
            "motifs_per_class": [
                [[m, p] for m, p in class_motifs]
                for class_motifs in self.motifs_per_class
            ],
            "samples_per_class": self.samples_per_class,
            "gc_fraction": self.gc_fraction,
            "seed": self.seed,
        }


def load_fasta(path, ambiguity: str = "reject",
               seed: int | None = None) -> dict[str, DnaSequence]:
    """Read a FASTA file into an id -> sequence map.

    The id is the header text up to the first whitespace; multi-line bodies
    are concatenated.  Sequences go through parse_sequence with the given
    ambiguity policy.
    """
    sequences: dict[str, DnaSequence] = {}
    current_id = None
    current_parts: list[str] = []
    header_line = 0

    def flush():
        if current_id is None:
            return
        body = "".join(current_parts)
        if not body:
            raise MalformedFastaError(header_line, f"record {current_id!r} has no sequence")
        sequences[current_id] = parse_sequence(body, ambiguity, seed)

    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith(">"):
                flush()
                rec_id = line[1:].split(None, 1)[0] if line[1:].strip() else ""
                if not rec_id:
                    raise MalformedFastaError(line_no, "empty header")
                if rec_id in sequences:
                    raise DuplicateIdError(rec_id)
                current_id = rec_id
                current_parts = []
                header_line = line_no
            else:
                if current_id is None:
                    raise MalformedFastaError(line_no, "sequence data before any header")
                current_parts.append(line)
    flush()
    if not sequences:
        raise MalformedFastaError(0, "no records found")
    return sequences


def load_labels(path) -> tuple[dict[str, str], list[str]]:
    """Read a two-column (id<TAB>label) file.

    Returns the id -> label name map and the sorted distinct class names.
    """
    labels: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2 or not parts[0] or not parts[1]:
                raise MalformedRowError(line_no, f"expected 'id<TAB>label', got {line!r}")
            rec_id, label = parts
            if rec_id in labels:
                raise DuplicateIdError(rec_id)
            labels[rec_id] = label
    if not labels:
        raise MalformedRowError(0, "no rows found")
    return labels, sorted(set(labels.values()))


def load_dataset(fasta_path, labels_path, ambiguity: str = "reject",
                 seed: int | None = None) -> LabeledDataset:
    """Join a FASTA file with its label table into a LabeledDataset."""
    seqs = load_fasta(fasta_path, ambiguity, seed)
    labels, classes = load_labels(labels_path)
    missing = sorted(set(seqs) - set(labels))
    if missing:
        raise MalformedRowError(0, f"no label for ids: {missing[:5]}")
    class_index = {name: i for i, name in enumerate(classes)}
    records = tuple(
        (rec_id, seq, class_index[labels[rec_id]])
        for rec_id, seq in seqs.items()
        if rec_id in labels
    )
    return LabeledDataset(records=records, classes=tuple(classes))


def write_fasta(path, records) -> None:
    """Write (id, sequence) pairs as FASTA, one record per id."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec_id, seq in records:
            fh.write(f">{rec_id}\n{seq}\n")


def write_labels(path, records, classes) -> None:
    """Write id<TAB>class-name rows matching the dataset record order."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec_id, _seq, label in records:
            fh.write(f"{rec_id}\t{classes[label]}\n")


def split(ds: LabeledDataset, spec: SplitSpec) -> tuple[LabeledDataset, LabeledDataset, LabeledDataset]:
    """Stratified deterministic split into (train, test, val).

    Per class: train gets floor(train_frac*n), test gets floor(test_frac*n),
    val gets the remainder.  Shuffling is seeded, so identical inputs give
    identical splits.
    """
    rng = np.random.default_rng(spec.seed)
    by_class: dict[int, list[int]] = {}
    for i, (_, _, label) in enumerate(ds.records):
        by_class.setdefault(label, []).append(i)

    train_idx: list[int] = []
    test_idx: list[int] = []
    val_idx: list[int] = []
    for label in range(ds.n_classes):
        members = by_class.get(label, [])
        n = len(members)
        n_train = math.floor(spec.train_frac * n)
        n_test = math.floor(spec.test_frac * n)
        n_val = n - n_train - n_test
        if min(n_train, n_test, n_val) < 1:
            raise TooFewSamplesError(
                f"class {ds.classes[label]!r} has {n} records; every split needs >= 1")
        order = rng.permutation(n)
        shuffled = [members[j] for j in order]
        train_idx.extend(shuffled[:n_train])
        test_idx.extend(shuffled[n_train:n_train + n_test])
        val_idx.extend(shuffled[n_train + n_test:])

    def subset(indices):
        return LabeledDataset(
            records=tuple(ds.records[i] for i in indices),
            classes=ds.classes,
        )

    return subset(train_idx), subset(test_idx), subset(val_idx)


def generate_synthetic(spec: SyntheticSpec) -> LabeledDataset:
    """Generate the motif-planted benchmark dataset.

    Background bases are i.i.d. with P(G)=P(C)=gc/2 and P(A)=P(T)=(1-gc)/2.
    For each sample of class k, each class-k motif is planted with its
    probability at a uniformly drawn start; collisions with already-planted
    motifs are resolved by scanning rightward (wrapping once) to the first
    non-overlapping slot, skipping the motif if none exists.
    """
    rng = np.random.default_rng(spec.seed)
    gc = spec.gc_fraction
    probs = np.array([(1 - gc) / 2, gc / 2, gc / 2, (1 - gc) / 2])
    decode = np.frombuffer(b"ACGT", dtype=np.uint8)

    records = []
    for label in range(spec.n_classes):
        motifs = spec.motifs_per_class[label]
        for sample_i in range(spec.samples_per_class):
            codes = rng.choice(4, size=spec.seq_len, p=probs).astype(np.uint8)
            chars = bytearray(decode[codes].tobytes())
            occupied: list[tuple[int, int]] = []
            for motif, plant_prob in motifs:
                if rng.random() >= plant_prob:
                    continue
                m = len(motif)
                max_start = spec.seq_len - m
                start = int(rng.integers(0, max_start + 1))
                placed = None
                for offset in range(max_start + 1):
                    pos = (start + offset) % (max_start + 1)
                    if all(pos + m <= a or pos >= b for a, b in occupied):
                        placed = pos
                        break
                if placed is None:
                    continue
                occupied.append((placed, placed + m))
                chars[placed:placed + m] = motif.encode()
            records.append((
                f"class{label}_{sample_i:04d}",
                DnaSequence._from_validated(chars.decode()),
                label,
            ))

    classes = tuple(f"class_{k}" for k in range(spec.n_classes))
    return LabeledDataset(records=tuple(records), classes=classes)
