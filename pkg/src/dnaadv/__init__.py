"""dnaadv: adversarial perturbation toolkit for DNA sequence classifiers.

Generates adversarial DNA sequences at nucleotide, codon, and
backtranslation granularity against any black-box classifier oracle,
sweeps robustness grids, hardens models by adversarial training, and
validates perturbed sequences with GC-content statistics and a
sequencing-error simulator.
"""

__version__ = "0.1.0"

from .attack import (
    AttackConfig,
    AttackOutcome,
    backtranslation_attack,
    brute_force_best_single_edit,
    codon_attack,
    nucleotide_attack,
)
from .campaign import CampaignGrid, run_campaign
from .dataio import (
    LabeledDataset,
    SplitSpec,
    SyntheticSpec,
    generate_synthetic,
    load_dataset,
    load_fasta,
    load_labels,
    split,
)
from .defense import AdvTrainConfig, AdvTrainResult, adversarial_train
from .metrics import (
    CampaignReport,
    accuracy,
    emit_report,
    gc_correlation,
    pearson,
    success_rate,
)
from .model import (
    KmerFeaturizer,
    LinearKmerModel,
    TrainConfig,
    load_model,
    loss_and_gradient,
    save_model,
    train,
)
from .noise import ErrorModel, corrupt, evaluate_under_noise
from .oracle import ExternalOracle, InProcessOracle, Oracle, spawn_external_oracle
from .seqcore import (
    DnaSequence,
    GENETIC_CODE,
    codons_of,
    gc_content,
    hamming,
    parse_sequence,
    synonymous_codons,
    translate,
)
