"""DNA sequence type, the standard genetic code, and basic sequence math.

Sequences are strictly over the four-letter alphabet A/C/G/T.  The numeric
encoding used throughout the package is A=0, C=1, G=2, T=3 (alphabetical),
so k-mer indices sort lexicographically.
"""

from __future__ import annotations

import numpy as np

from .errors import (
    EmptySequenceError,
    InvalidSymbolError,
    LengthMismatchError,
)

ALPHABET = "ACGT"

# IUPAC ambiguity codes and their expansions (used by the RANDOMIZE policy).
IUPAC_EXPANSIONS = {
    "R": "AG", "Y": "CT", "S": "CG", "W": "AT", "K": "GT", "M": "AC",
    "B": "CGT", "D": "AGT", "H": "ACT", "V": "ACG", "N": "ACGT",
}

STOP = "*"

# Standard genetic code (the universal nuclear table).  Stop codons map to
# '*' and are treated as ordinary symbols by translate(); they never
# truncate the output.
GENETIC_CODE = {
    "TTT": "F", "TTC": "F", "TTA": "L", "TTG": "L",
    "TCT": "S", "TCC": "S", "TCA": "S", "TCG": "S",
    "TAT": "Y", "TAC": "Y", "TAA": "*", "TAG": "*",
    "TGT": "C", "TGC": "C", "TGA": "*", "TGG": "W",
    "CTT": "L", "CTC": "L", "CTA": "L", "CTG": "L",
    "CCT": "P", "CCC": "P", "CCA": "P", "CCG": "P",
    "CAT": "H", "CAC": "H", "CAA": "Q", "CAG": "Q",
    "CGT": "R", "CGC": "R", "CGA": "R", "CGG": "R",
    "ATT": "I", "ATC": "I", "ATA": "I", "ATG": "M",
    "ACT": "T", "ACC": "T", "ACA": "T", "ACG": "T",
    "AAT": "N", "AAC": "N", "AAA": "K", "AAG": "K",
    "AGT": "S", "AGC": "S", "AGA": "R", "AGG": "R",
    "GTT": "V", "GTC": "V", "GTA": "V", "GTG": "V",
    "GCT": "A", "GCC": "A", "GCA": "A", "GCG": "A",
    "GAT": "D", "GAC": "D", "GAA": "E", "GAG": "E",
    "GGT": "G", "GGC": "G", "GGA": "G", "GGG": "G",
}

AMINO_ACIDS = frozenset(GENETIC_CODE.values())  # 20 amino acids + '*'

ALL_CODONS = tuple(sorted(GENETIC_CODE))  # 64 codons, alphabetical

# amino acid -> sorted tuple of codons encoding it
SYNONYM_TABLE: dict[str, tuple[str, ...]] = {}
for _codon in ALL_CODONS:
    SYNONYM_TABLE.setdefault(GENETIC_CODE[_codon], tuple())
SYNONYM_TABLE = {
    aa: tuple(c for c in ALL_CODONS if GENETIC_CODE[c] == aa)
    for aa in SYNONYM_TABLE
}

_ENCODE = np.full(256, 255, dtype=np.uint8)
for _i, _b in enumerate(ALPHABET.encode()):
    _ENCODE[_b] = _i
_DECODE = ALPHABET.encode()


class DnaSequence:
    """Immutable, validated DNA sequence over {A, C, G, T}.

    Construction uppercases the input and rejects anything outside the
    four-base alphabet.  Supports len(), indexing/slicing (returns str),
    equality against both DnaSequence and str, and hashing.
    """

    __slots__ = ("_s",)

    def __init__(self, text: str):
        s = str(text).upper()
        if not s:
            raise EmptySequenceError("sequence must contain at least one base")
        for i, ch in enumerate(s):
            if ch not in ALPHABET:
                raise InvalidSymbolError(i, ch)
        object.__setattr__(self, "_s", s)

    @classmethod
    def _from_validated(cls, s: str) -> "DnaSequence":
        """Wrap an already-validated uppercase string without re-checking."""
        obj = object.__new__(cls)
        object.__setattr__(obj, "_s", s)
        return obj

    @property
    def bases(self) -> str:
        return self._s

    def encoded(self) -> np.ndarray:
        """Return the sequence as a uint8 code array (A=0,C=1,G=2,T=3)."""
        return _ENCODE[np.frombuffer(self._s.encode(), dtype=np.uint8)]

    def __str__(self) -> str:
        return self._s

    def __len__(self) -> int:
        return len(self._s)

    def __getitem__(self, idx):
        return self._s[idx]

    def __iter__(self):
        return iter(self._s)

    def __eq__(self, other) -> bool:
        if isinstance(other, DnaSequence):
            return self._s == other._s
        if isinstance(other, str):
            return self._s == other
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self._s)

    def __repr__(self) -> str:
        if len(self._s) <= 24:
            return f"DnaSequence({self._s!r})"
        return f"DnaSequence({self._s[:21]!r}... len={len(self._s)})"

    def __setattr__(self, name, value):
        raise AttributeError("DnaSequence is immutable")


def encode_sequence(seq: "DnaSequence | str") -> np.ndarray:
    """uint8 code array for a sequence or plain string (assumed valid)."""
    if isinstance(seq, DnaSequence):
        return seq.encoded()
    return _ENCODE[np.frombuffer(seq.encode(), dtype=np.uint8)]


_DECODE_ARR = np.frombuffer(_DECODE, dtype=np.uint8)


def decode_codes(codes: np.ndarray) -> str:
    """Inverse of encode_sequence for a 1-D uint8 code array."""
    return _DECODE_ARR[codes].tobytes().decode()


def parse_sequence(text: str, ambiguity: str = "reject",
                   seed: int | None = None) -> DnaSequence:
    """Parse raw text into a DnaSequence.

    Args:
        text: input characters; surrounding whitespace is stripped and the
            result is uppercased.
        ambiguity: "reject" errors on any symbol outside A/C/G/T;
            "randomize" replaces IUPAC ambiguity codes by a seeded uniform
            draw from their expansion set.
        seed: RNG seed, required when ambiguity="randomize".

    Raises:
        EmptySequenceError: nothing left after stripping.
        InvalidSymbolError: disallowed symbol (position, symbol).
    """
    if ambiguity not in ("reject", "randomize"):
        raise ValueError(f"unknown ambiguity policy {ambiguity!r}")
    s = str(text).strip().upper()
    if not s:
        raise EmptySequenceError("sequence must contain at least one base")
    if ambiguity == "reject":
        return DnaSequence(s)
    if seed is None:
        raise ValueError("ambiguity='randomize' requires a seed")
    rng = np.random.default_rng(seed)
    out = []
    for i, ch in enumerate(s):
        if ch in ALPHABET:
            out.append(ch)
        elif ch in IUPAC_EXPANSIONS:
            choices = IUPAC_EXPANSIONS[ch]
            out.append(choices[int(rng.integers(len(choices)))])
        else:
            raise InvalidSymbolError(i, ch)
    return DnaSequence._from_validated("".join(out))


def gc_content(seq: DnaSequence) -> float:
    """GC percentage: 100 * (#G + #C) / length."""
    s = str(seq)
    return 100.0 * (s.count("G") + s.count("C")) / len(s)


def codons_of(seq: DnaSequence, frame: int = 0) -> tuple[list[str], str]:
    """Split a sequence into non-overlapping codons at the given frame.

    Returns (codons, tail).  The first `frame` bases form the prefix and are
    not returned (recoverable as str(seq)[:frame]); the tail holds the 0-2
    leftover bases.  prefix + codons + tail always reassembles the input.
    """
    if frame not in (0, 1, 2):
        raise ValueError(f"frame must be 0, 1, or 2, got {frame}")
    s = str(seq)
    n = (len(s) - frame) // 3
    codons = [s[frame + 3 * i: frame + 3 * i + 3] for i in range(max(n, 0))]
    tail = s[frame + 3 * max(n, 0):]
    return codons, tail


def translate(seq: DnaSequence, frame: int = 0) -> str:
    """Translate codon-by-codon; stop codons emit '*' and do not terminate.

    Tail bases (fewer than a full codon) produce no symbol.
    """
    codons, _ = codons_of(seq, frame)
    return "".join(GENETIC_CODE[c] for c in codons)


def synonymous_codons(codon: str) -> frozenset[str]:
    """All codons encoding the same amino acid, always including the input."""
    c = codon.upper()
    if c not in GENETIC_CODE:
        raise ValueError(f"not a codon: {codon!r}")
    return frozenset(SYNONYM_TABLE[GENETIC_CODE[c]])


def hamming(a: DnaSequence, b: DnaSequence) -> int:
    """Number of positions at which two equal-length sequences differ."""
    if len(a) != len(b):
        raise LengthMismatchError(f"lengths differ: {len(a)} vs {len(b)}")
    return sum(x != y for x, y in zip(str(a), str(b)))
