"""Grid campaigns: attack a whole test set across an epsilon or iteration
sweep and collect the per-grid-point robustness metrics.

Each (grid point, sample) pair derives its own RNG seed from the campaign
seed, so results are independent of thread count and scheduling order.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .attack import (
    ATTACK_KINDS,
    BACKTRANSLATION,
    CODON,
    NUCLEOTIDE,
    AttackConfig,
    AttackOutcome,
    backtranslation_attack,
    codon_attack,
    nucleotide_attack,
)
from .dataio import LabeledDataset
from .errors import DnaAdvError, OracleFailureError
from .metrics import (
    CampaignReport,
    ReportRow,
    SampleRecord,
    accuracy,
    clean_accuracy,
    gc_correlation,
    success_rate,
)
from .oracle import Oracle

EPSILON_AXIS = "epsilon"
ITERATIONS_AXIS = "iterations"


@dataclass(frozen=True)
class CampaignGrid:
    """One swept axis, the fixed value of the other, and the attack kind."""

    axis: str
    values: tuple[float, ...]
    fixed_value: float | None
    kind: str

    def __post_init__(self):
        if self.axis not in (EPSILON_AXIS, ITERATIONS_AXIS):
            raise ValueError(f"axis must be epsilon or iterations, got {self.axis!r}")
        if self.kind not in ATTACK_KINDS:
            raise ValueError(f"unknown attack kind {self.kind!r}")
        if len(self.values) == 0:
            raise ValueError("grid needs at least one value")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise ValueError("grid values must be strictly increasing")
        if self.kind == BACKTRANSLATION and self.axis == EPSILON_AXIS:
            raise ValueError("backtranslation sweeps iterations only")


def derive_seed(campaign_seed: int, sample_index: int) -> int:
    """Deterministic per-sample seed.

    Shared across grid values on purpose: a sample's search stream is then
    a prefix of its stream at any larger iteration count, which makes the
    per-sample true-class probability monotone along an iteration sweep.
    """
    ss = np.random.SeedSequence([int(campaign_seed), int(sample_index)])
    return int(ss.generate_state(1, np.uint64)[0])


def _config_for(grid: CampaignGrid, base: AttackConfig, value: float) -> AttackConfig:
    if grid.axis == EPSILON_AXIS:
        return replace(base, epsilon=float(value))
    cfg = replace(base, iterations=int(value))
    if grid.kind != BACKTRANSLATION and grid.fixed_value is not None:
        cfg = replace(cfg, epsilon=float(grid.fixed_value))
    return cfg


def _attack_one(kind: str, oracle: Oracle, seq, label: int,
                cfg: AttackConfig, frame: int) -> AttackOutcome:
    if kind == NUCLEOTIDE:
        return nucleotide_attack(oracle, seq, label, cfg)
    if kind == CODON:
        return codon_attack(oracle, seq, label, cfg, frame)
    return backtranslation_attack(oracle, seq, label, cfg, frame)


def default_threads() -> int:
    env = os.environ.get("DNAADV_THREADS", "")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def run_campaign(oracle: Oracle, test_set: LabeledDataset, grid: CampaignGrid,
                 cfg: AttackConfig, threads: int | None = None,
                 frame: int = 0, victim: str = "in-process",
                 record_sequences: bool = True) -> CampaignReport:
    """Attack every test sample at every grid value.

    Oracle failures abort the sweep: the completed grid values are kept and
    the report is flagged incomplete.
    """
    if len(test_set) == 0:
        raise ValueError("test set must be nonempty")
    n_threads = threads if threads is not None else default_threads()

    rows: list[ReportRow] = []
    samples: list[tuple[SampleRecord, ...]] = []
    error: str | None = None

    for value in grid.values:
        point_cfg = _config_for(grid, cfg, value)
        try:
            outcomes = _attack_all(oracle, test_set, grid.kind, point_cfg,
                                   cfg.seed, n_threads, frame)
        except OracleFailureError as exc:
            error = str(exc)
            break
        originals = [o.original for o in outcomes]
        adversarials = [o.adversarial for o in outcomes]
        try:
            sr = success_rate(outcomes)
        except DnaAdvError:
            sr = None
        rows.append(ReportRow(
            grid_value=float(value),
            clean_acc=clean_accuracy(outcomes),
            attacked_acc=accuracy(outcomes),
            success_rate=sr,
            mean_queries=float(np.mean([o.queries for o in outcomes])),
            gc_pearson=gc_correlation(originals, adversarials),
        ))
        samples.append(tuple(
            SampleRecord(
                id=test_set.records[i][0],
                true_label=o.true_label,
                original_prediction=o.original_prediction,
                final_prediction=o.final_prediction,
                success=o.success,
                queries=o.queries,
                n_edits=len(o.edits),
                final_true_prob=o.final_true_prob,
                adversarial=str(o.adversarial) if record_sequences else "",
            )
            for i, o in enumerate(outcomes)
        ))

    return CampaignReport(
        attack_kind=grid.kind,
        grid_axis=grid.axis,
        fixed_value=grid.fixed_value,
        seed=cfg.seed,
        victim=victim,
        rows=tuple(rows),
        samples=tuple(samples),
        incomplete=error is not None,
        error=error,
    )


def _attack_all(oracle: Oracle, test_set: LabeledDataset, kind: str,
                cfg: AttackConfig, campaign_seed: int,
                threads: int, frame: int) -> list[AttackOutcome]:
    def run(i: int) -> AttackOutcome:
        _, seq, label = test_set.records[i]
        sample_cfg = replace(cfg, seed=derive_seed(campaign_seed, i))
        return _attack_one(kind, oracle, seq, label, sample_cfg, frame)

    indices = range(len(test_set))
    if threads <= 1:
        return [run(i) for i in indices]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(run, indices))
