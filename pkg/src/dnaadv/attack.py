"""Black-box adversarial attacks on DNA classifiers.

Three granularities, all greedy best-improvement searches that only ever
query the oracle:

* nucleotide: single-base substitutions, budget = floor(epsilon * length)
  distinct positions;
* codon: whole-codon substitutions on a fixed reading frame, budget =
  floor(epsilon * n_codons) distinct codon slots;
* backtranslation: synonymous-codon substitutions only, unbudgeted, with
  the guarantee that the translated protein never changes.

A brute-force single-edit enumerator doubles as the verification oracle
for the greedy step semantics.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NoCodonsError, SequenceTooLongError
from .oracle import Oracle
from .seqcore import (
    ALL_CODONS,
    ALPHABET,
    DnaSequence,
    GENETIC_CODE,
    decode_codes,
    encode_sequence,
)

NUCLEOTIDE = "nucleotide"
CODON = "codon"
BACKTRANSLATION = "backtranslation"
ATTACK_KINDS = (NUCLEOTIDE, CODON, BACKTRANSLATION)

# replacement bases for each current base, ascending (A<C<G<T)
_ALT_BASES = np.array(
    [[b for b in range(4) if b != c] for c in range(4)], dtype=np.uint8)

# codon index (alphabetical) -> its 3 base codes
_CODON_TRIPLETS = np.array(
    [[ALPHABET.index(ch) for ch in codon] for codon in ALL_CODONS],
    dtype=np.uint8)

# codon index -> the 63 alternative codon indices, ascending
_ALT_CODONS = np.array(
    [[j for j in range(64) if j != i] for i in range(64)], dtype=np.int64)

# codon index -> synonymous alternatives (same amino acid, self excluded)
_SYN_ALTS = tuple(
    tuple(j for j in range(64)
          if j != i and GENETIC_CODE[ALL_CODONS[j]] == GENETIC_CODE[ALL_CODONS[i]])
    for i in range(64)
)

# codon index -> full synonym family including self, ascending
_SYN_FAMILY = tuple(
    tuple(j for j in range(64)
          if GENETIC_CODE[ALL_CODONS[j]] == GENETIC_CODE[ALL_CODONS[i]])
    for i in range(64)
)


@dataclass(frozen=True)
class AttackConfig:
    """Search knobs shared by all attack kinds.

    epsilon is the fraction of units (bases or codons) the attack may touch;
    iterations bounds the number of search rounds; max_queries caps oracle
    calls per sample; candidate_sample limits how many units one round
    examines (0 = all of them); bt_mode switches backtranslation between
    guided greedy and uniform resampling.
    """

    epsilon: float = 0.1
    iterations: int = 10
    max_queries: int = 10_000
    candidate_sample: int = 0
    seed: int = 0
    bt_mode: str = "greedy"

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("epsilon must lie in [0,1]")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.max_queries < 1:
            raise ValueError("max_queries must be >= 1")
        if self.candidate_sample < 0:
            raise ValueError("candidate_sample must be >= 0")
        if self.bt_mode not in ("greedy", "resample"):
            raise ValueError(f"unknown bt_mode {self.bt_mode!r}")


@dataclass(frozen=True)
class AttackOutcome:
    """Result of attacking one sequence.

    edits replays original -> adversarial when applied in order; success
    means the sample was classified correctly before the attack and
    incorrectly after it.
    """

    original: DnaSequence
    adversarial: DnaSequence
    true_label: int
    original_prediction: int
    final_prediction: int
    success: bool
    queries: int
    edits: tuple[tuple[int, str, str], ...]
    final_true_prob: float
    kind: str
    edited_units: tuple[int, ...] = field(default=())
    step_probs: tuple[float, ...] = field(default=())

    def __post_init__(self):
        if len(self.original) != len(self.adversarial):
            raise ValueError("attacks must preserve sequence length")
        expected = (self.original_prediction == self.true_label
                    and self.final_prediction != self.true_label)
        if self.success != expected:
            raise ValueError("success flag inconsistent with predictions")

    def replay(self) -> DnaSequence:
        """Re-apply the edit log to the original sequence."""
        chars = list(str(self.original))
        for pos, old, new in self.edits:
            if chars[pos] != old:
                raise ValueError(f"edit log mismatch at position {pos}")
            chars[pos] = new
        return DnaSequence("".join(chars))


class _SearchState:
    """Mutable working state shared by the attack loops."""

    def __init__(self, oracle: Oracle, seq: DnaSequence, true_label: int,
                 cfg: AttackConfig):
        self.oracle = oracle
        self.cfg = cfg
        self.true_label = true_label
        self.codes = encode_sequence(seq).copy()
        self.queries = 0
        probs = self._query(self.codes[None, :])
        self.orig_pred = int(np.argmax(probs[0]))
        self.cur_pred = self.orig_pred
        self.cur_prob = float(probs[0, true_label])
        self.edits: list[tuple[int, str, str]] = []
        self.step_probs: list[float] = []
        self.edited_units: set[int] = set()

    def _query(self, rows: np.ndarray) -> np.ndarray:
        probs = self.oracle.predict_proba_encoded(rows)
        self.queries += rows.shape[0]
        return probs

    @property
    def remaining(self) -> int:
        return self.cfg.max_queries - self.queries

    @property
    def misclassified(self) -> bool:
        return self.cur_pred != self.true_label

    def query_candidates(self, rows: np.ndarray):
        """Query up to the remaining budget; returns (probs, truncated)."""
        truncated = rows.shape[0] > self.remaining
        if truncated:
            rows = rows[:self.remaining]
        if rows.shape[0] == 0:
            return None, truncated
        return self._query(rows), truncated

    def record(self, unit: int, pos_changes, p_after: float, pred_after: int):
        for pos, old_code, new_code in pos_changes:
            self.edits.append((int(pos), ALPHABET[old_code], ALPHABET[new_code]))
            self.codes[pos] = new_code
        self.edited_units.add(int(unit))
        self.step_probs.append(float(p_after))
        self.cur_prob = float(p_after)
        self.cur_pred = int(pred_after)

    def outcome(self, seq: DnaSequence, kind: str) -> AttackOutcome:
        return AttackOutcome(
            original=seq,
            adversarial=DnaSequence._from_validated(decode_codes(self.codes)),
            true_label=self.true_label,
            original_prediction=self.orig_pred,
            final_prediction=self.cur_pred,
            success=(self.orig_pred == self.true_label
                     and self.cur_pred != self.true_label),
            queries=self.queries,
            edits=tuple(self.edits),
            final_true_prob=self.cur_prob,
            kind=kind,
            edited_units=tuple(sorted(self.edited_units)),
            step_probs=tuple(self.step_probs),
        )


def _select_units(state: _SearchState, rng: np.random.Generator,
                  n_units: int, budget: int) -> tuple[list[int], bool]:
    """Units examinable this round and whether that is the complete set."""
    if len(state.edited_units) >= budget:
        allowed = sorted(state.edited_units)
    else:
        allowed = list(range(n_units))
    sample = state.cfg.candidate_sample
    if 0 < sample < len(allowed):
        picked = rng.choice(len(allowed), size=sample, replace=False)
        return sorted(allowed[i] for i in picked), False
    return allowed, True


def _nucleotide_candidates(codes: np.ndarray, positions: list[int]):
    pos = np.asarray(positions, dtype=np.int64)
    alts = _ALT_BASES[codes[pos]]                     # (p, 3) ascending
    n_cand = 3 * len(pos)
    rows = np.repeat(codes[None, :], n_cand, axis=0)
    cand_pos = np.repeat(pos, 3)
    cand_new = alts.ravel()
    rows[np.arange(n_cand), cand_pos] = cand_new
    return rows, cand_pos, cand_new


def _codon_index_at(codes: np.ndarray, offset: int) -> int:
    return int(codes[offset]) * 16 + int(codes[offset + 1]) * 4 + int(codes[offset + 2])


def _codon_candidates(codes: np.ndarray, slots: list[int], frame: int):
    slot_arr = np.asarray(slots, dtype=np.int64)
    cur = np.array([_codon_index_at(codes, frame + 3 * s) for s in slots])
    alt_idx = _ALT_CODONS[cur].ravel()                # 63 per slot, ascending
    n_cand = 63 * len(slots)
    rows = np.repeat(codes[None, :], n_cand, axis=0)
    offs = frame + 3 * np.repeat(slot_arr, 63)
    trips = _CODON_TRIPLETS[alt_idx]
    r = np.arange(n_cand)
    rows[r, offs] = trips[:, 0]
    rows[r, offs + 1] = trips[:, 1]
    rows[r, offs + 2] = trips[:, 2]
    return rows, np.repeat(slot_arr, 63), alt_idx


def _codon_changes(codes: np.ndarray, offset: int, new_idx: int):
    """(position, old_code, new_code) for the bases a codon swap rewrites."""
    trip = _CODON_TRIPLETS[new_idx]
    return [(offset + t, int(codes[offset + t]), int(trip[t]))
            for t in range(3) if codes[offset + t] != trip[t]]


def _greedy_unit_attack(oracle: Oracle, seq: DnaSequence, true_label: int,
                        cfg: AttackConfig, kind: str, frame: int) -> AttackOutcome:
    length = len(seq)
    if kind == CODON:
        n_units = (length - frame) // 3
        if n_units < 1:
            raise NoCodonsError(f"no full codon in frame {frame} of length {length}")
    else:
        n_units = length
    budget = int(np.floor(cfg.epsilon * n_units))
    rng = np.random.default_rng(cfg.seed)
    state = _SearchState(oracle, seq, true_label, cfg)

    if state.orig_pred == true_label and budget > 0:
        for _ in range(cfg.iterations):
            if state.misclassified or state.remaining <= 0:
                break
            units, complete = _select_units(state, rng, n_units, budget)
            if kind == NUCLEOTIDE:
                rows, cand_unit, cand_new = _nucleotide_candidates(state.codes, units)
            else:
                rows, cand_unit, cand_new = _codon_candidates(state.codes, units, frame)
            probs, truncated = state.query_candidates(rows)
            if probs is None:
                break
            p_true = probs[:, true_label]
            best = int(np.argmin(p_true))              # first min: lowest unit,
            if p_true[best] < state.cur_prob:          # then smallest replacement
                unit = int(cand_unit[best])
                if kind == NUCLEOTIDE:
                    changes = [(unit, int(state.codes[unit]), int(cand_new[best]))]
                else:
                    changes = _codon_changes(state.codes, frame + 3 * unit,
                                             int(cand_new[best]))
                state.record(unit, changes, p_true[best],
                             int(np.argmax(probs[best])))
            elif complete and not truncated:
                break                                  # true local optimum
    return state.outcome(seq, kind)


def nucleotide_attack(oracle: Oracle, seq: DnaSequence, true_label: int,
                      cfg: AttackConfig) -> AttackOutcome:
    """Greedy single-base substitution attack."""
    return _greedy_unit_attack(oracle, seq, true_label, cfg, NUCLEOTIDE, 0)


def codon_attack(oracle: Oracle, seq: DnaSequence, true_label: int,
                 cfg: AttackConfig, frame: int = 0) -> AttackOutcome:
    """Greedy whole-codon substitution attack; prefix/tail bases never move."""
    return _greedy_unit_attack(oracle, seq, true_label, cfg, CODON, frame)


def backtranslation_attack(oracle: Oracle, seq: DnaSequence, true_label: int,
                           cfg: AttackConfig, frame: int = 0) -> AttackOutcome:
    """Synonymous-codon substitution attack.

    Preserves the translated protein by construction; there is no epsilon
    budget.  Each iteration visits the codons once in seeded random order
    (greedy mode) or proposes one uniform whole-sequence synonym resample
    (resample mode).
    """
    length = len(seq)
    n_units = (length - frame) // 3
    if n_units < 1:
        raise NoCodonsError(f"no full codon in frame {frame} of length {length}")
    rng = np.random.default_rng(cfg.seed)
    state = _SearchState(oracle, seq, true_label, cfg)

    if state.orig_pred == true_label:
        if cfg.bt_mode == "greedy":
            _bt_greedy(state, rng, n_units, frame)
        else:
            _bt_resample(state, rng, n_units, frame)
    return state.outcome(seq, BACKTRANSLATION)


def _bt_greedy(state: _SearchState, rng: np.random.Generator,
               n_units: int, frame: int) -> None:
    for _ in range(state.cfg.iterations):
        if state.misclassified or state.remaining <= 0:
            break
        order = rng.permutation(n_units)
        accepted = False
        saw_truncation = False
        for slot in order:
            if state.misclassified or state.remaining <= 0:
                saw_truncation = True
                break
            offset = frame + 3 * int(slot)
            cur_idx = _codon_index_at(state.codes, offset)
            alts = _SYN_ALTS[cur_idx]
            if not alts:
                continue
            rows = np.repeat(state.codes[None, :], len(alts), axis=0)
            for i, alt in enumerate(alts):
                rows[i, offset:offset + 3] = _CODON_TRIPLETS[alt]
            probs, truncated = state.query_candidates(rows)
            saw_truncation = saw_truncation or truncated
            if probs is None:
                break
            p_true = probs[:, state.true_label]
            best = int(np.argmin(p_true))
            if p_true[best] < state.cur_prob:
                state.record(int(slot),
                             _codon_changes(state.codes, offset, alts[best]),
                             p_true[best], int(np.argmax(probs[best])))
                accepted = True
        if not accepted and not saw_truncation:
            break                  # a full pass found nothing; none ever will


def _bt_resample(state: _SearchState, rng: np.random.Generator,
                 n_units: int, frame: int) -> None:
    for _ in range(state.cfg.iterations):
        if state.misclassified or state.remaining <= 0:
            break
        candidate = state.codes.copy()
        for slot in range(n_units):
            offset = frame + 3 * slot
            family = _SYN_FAMILY[_codon_index_at(state.codes, offset)]
            pick = family[int(rng.integers(len(family)))]
            candidate[offset:offset + 3] = _CODON_TRIPLETS[pick]
        probs, _ = state.query_candidates(candidate[None, :])
        if probs is None:
            break
        p_true = float(probs[0, state.true_label])
        if p_true < state.cur_prob:
            changes = [(i, int(state.codes[i]), int(candidate[i]))
                       for i in range(len(candidate))
                       if state.codes[i] != candidate[i]]
            slots_touched = {(pos - frame) // 3 for pos, _, _ in changes}
            for slot in slots_touched:
                state.edited_units.add(int(slot))
            for pos, old, new in changes:
                state.edits.append((pos, ALPHABET[old], ALPHABET[new]))
                state.codes[pos] = new
            state.step_probs.append(p_true)
            state.cur_prob = p_true
            state.cur_pred = int(np.argmax(probs[0]))


def brute_force_best_single_edit(oracle: Oracle, seq: DnaSequence,
                                 true_label: int, unit: str = NUCLEOTIDE,
                                 frame: int = 0) -> tuple[DnaSequence, float]:
    """Exhaustively score every single-unit substitution of a toy sequence.

    Returns the variant with the lowest true-class probability; ties break
    on lowest position, then alphabetically smallest replacement.  Guarded
    to sequences of at most 64 bases to bound the query cost.
    """
    if len(seq) > 64:
        raise SequenceTooLongError("brute force is limited to 64 bases")
    codes = encode_sequence(seq)
    if unit == NUCLEOTIDE:
        rows, _, _ = _nucleotide_candidates(codes, list(range(len(codes))))
    elif unit == CODON:
        n_units = (len(codes) - frame) // 3
        if n_units < 1:
            raise NoCodonsError(f"no full codon in frame {frame}")
        rows, _, _ = _codon_candidates(codes, list(range(n_units)), frame)
    else:
        raise ValueError(f"unit must be {NUCLEOTIDE!r} or {CODON!r}")
    probs = oracle.predict_proba_encoded(rows)
    p_true = probs[:, true_label]
    best = int(np.argmin(p_true))
    variant = DnaSequence._from_validated(decode_codes(rows[best]))
    return variant, float(p_true[best])
