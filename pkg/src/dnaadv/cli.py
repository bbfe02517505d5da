"""Command-line entry point.

Subcommands: gen-data, train, attack, advtrain, noise, rerun.  Machine
readable JSON summaries go to stdout; diagnostics go to stderr.  Every run
writes a manifest beside its outputs; `dnaadv rerun` replays a manifest.

Exit codes: 0 success, 1 runtime error, 2 usage error, 3 completed with an
incomplete (aborted) report.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .attack import ATTACK_KINDS, AttackConfig
from .campaign import CampaignGrid, EPSILON_AXIS, ITERATIONS_AXIS, default_threads, run_campaign
from .dataio import SplitSpec, SyntheticSpec, generate_synthetic, load_dataset, split, write_fasta, write_labels
from .defense import AdvTrainConfig, adversarial_train, write_training_log
from .errors import DnaAdvError
from .manifest import build_manifest, file_digest, load_manifest, manifest_path_for, write_manifest
from .metrics import emit_report
from .model import TrainConfig, evaluate_accuracy, load_model, save_model, train
from .noise import ErrorModel, evaluate_under_noise
from .oracle import InProcessOracle, spawn_external_oracle

log = logging.getLogger("dnaadv")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_INCOMPLETE = 3

DEFAULT_SYNTHETIC_SPEC = {
    "n_classes": 2,
    "seq_len": 300,
    "motifs_per_class": [
        [["TGGTGGTGGTGG", 1.0], ["GTGGTTGGTGG", 0.9]],
        [["ATGATGATGATG", 1.0], ["GATGAATGATG", 0.9]],
    ],
    "samples_per_class": 100,
    "gc_fraction": 0.5,
    "seed": 13,
}


def _read_json(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _emit_summary(summary: dict) -> None:
    print(json.dumps(summary, sort_keys=True))


def _dataset_paths(data_dir, name: str):
    d = Path(data_dir)
    return d / f"{name}.fasta", d / f"{name}.tsv"


def _load_split(data_dir, name: str):
    fasta, tsv = _dataset_paths(data_dir, name)
    return load_dataset(fasta, tsv)


def _resolve_threads(value) -> int:
    return int(value) if value is not None else default_threads()


# ---------------------------------------------------------------- gen-data

def run_gen_data(config: dict) -> int:
    spec = SyntheticSpec.from_dict(config["spec"])
    split_spec = SplitSpec(**config["split"])
    out_dir = Path(config["out"])
    out_dir.mkdir(parents=True, exist_ok=True)

    ds = generate_synthetic(spec)
    parts = dict(zip(("train", "test", "val"), split(ds, split_spec)))
    for name, part in parts.items():
        fasta, tsv = _dataset_paths(out_dir, name)
        write_fasta(fasta, [(rec_id, seq) for rec_id, seq, _ in part.records])
        write_labels(tsv, part.records, part.classes)

    manifest = build_manifest("gen-data", config, config.pop("_inputs", {}),
                              spec.seed)
    write_manifest(manifest, out_dir / "manifest.json")
    _emit_summary({
        "out": str(out_dir),
        "classes": list(ds.classes),
        "sizes": {name: len(part) for name, part in parts.items()},
    })
    return EXIT_OK


def cmd_gen_data(args) -> int:
    if args.spec:
        spec_doc = _read_json(args.spec)
        inputs = {str(args.spec): file_digest(args.spec)}
    else:
        spec_doc = dict(DEFAULT_SYNTHETIC_SPEC)
        inputs = {}
    config = {
        "spec": SyntheticSpec.from_dict(spec_doc).to_dict(),
        "split": {
            "train_frac": args.train_frac,
            "test_frac": args.test_frac,
            "val_frac": args.val_frac,
            "seed": args.split_seed if args.split_seed is not None
                    else int(spec_doc.get("seed", 0)),
        },
        "out": str(args.out),
        "_inputs": inputs,
    }
    return run_gen_data(config)


# ------------------------------------------------------------------- train

def _train_config_from(args, file_cfg: dict) -> dict:
    defaults = TrainConfig()
    def pick(flag, key, cast):
        if flag is not None:
            return cast(flag)
        if key in file_cfg:
            return cast(file_cfg[key])
        return getattr(defaults, key)
    return {
        "learning_rate": pick(args.lr, "learning_rate", float),
        "epochs": pick(args.epochs, "epochs", int),
        "batch_size": pick(args.batch_size, "batch_size", int),
        "l2": pick(args.l2, "l2", float),
        "seed": pick(args.seed, "seed", int),
    }


def run_train(config: dict) -> int:
    train_ds = _load_split(config["data"], "train")
    val_ds = _load_split(config["data"], "val")
    test_ds = _load_split(config["data"], "test")
    cfg = TrainConfig(**config["train"])
    model = train(train_ds, cfg, k=config["k"])
    out = Path(config["out"])
    out.parent.mkdir(parents=True, exist_ok=True)
    save_model(model, out)
    manifest = build_manifest("train", config, config.pop("_inputs", {}),
                              cfg.seed)
    write_manifest(manifest, manifest_path_for(out))
    _emit_summary({
        "out": str(out),
        "k": config["k"],
        "train_loss": model.final_train_loss,
        "val_accuracy": evaluate_accuracy(model, val_ds),
        "test_accuracy": evaluate_accuracy(model, test_ds),
    })
    return EXIT_OK


def cmd_train(args) -> int:
    file_cfg = _read_json(args.config) if args.config else {}
    inputs = {}
    for name in ("train", "test", "val"):
        for p in _dataset_paths(args.data, name):
            inputs[str(p)] = file_digest(p)
    if args.config:
        inputs[str(args.config)] = file_digest(args.config)
    config = {
        "data": str(args.data),
        "k": args.k if args.k is not None else int(file_cfg.get("k", 3)),
        "train": _train_config_from(args, file_cfg),
        "out": str(args.out),
        "_inputs": inputs,
    }
    return run_train(config)


# ------------------------------------------------------------------ attack

def _open_oracle(config: dict, n_classes: int):
    if config.get("model"):
        return InProcessOracle(load_model(config["model"])), \
            f"model:{file_digest(config['model'])}"
    return spawn_external_oracle(config["oracle_cmd"], n_classes), \
        f"cmd:{config['oracle_cmd']}"


def run_attack(config: dict) -> int:
    test_ds = _load_split(config["data"], config["split"])
    grid = CampaignGrid(
        axis=config["grid_axis"],
        values=tuple(config["grid"]),
        fixed_value=config["epsilon"] if config["grid_axis"] == ITERATIONS_AXIS
                    else config["iterations"],
        kind=config["kind"],
    )
    cfg = AttackConfig(
        epsilon=config["epsilon"],
        iterations=int(config["iterations"]),
        max_queries=int(config["max_queries"]),
        candidate_sample=int(config["candidate_sample"]),
        seed=int(config["seed"]),
    )
    oracle, victim = _open_oracle(config, test_ds.n_classes)
    try:
        report = run_campaign(
            oracle, test_ds, grid, cfg,
            threads=_resolve_threads(config.get("threads")),
            frame=int(config["frame"]),
            victim=victim,
        )
    finally:
        oracle.close()
    out = Path(config["out"])
    out.parent.mkdir(parents=True, exist_ok=True)
    emit_report(report, out, fmt="csv")
    emit_report(report, out.with_suffix(".json"), fmt="json")
    manifest = build_manifest("attack", config, config.pop("_inputs", {}),
                              cfg.seed)
    write_manifest(manifest, manifest_path_for(out))
    _emit_summary({
        "out": str(out),
        "incomplete": report.incomplete,
        "error": report.error,
        "rows": [
            {"grid_value": r.grid_value, "attacked_acc": r.attacked_acc,
             "success_rate": r.success_rate}
            for r in report.rows
        ],
    })
    if report.incomplete:
        log.error("campaign aborted: %s", report.error)
        return EXIT_INCOMPLETE
    return EXIT_OK


def cmd_attack(args, parser) -> int:
    if args.kind == "backtranslation" and args.grid_axis == EPSILON_AXIS:
        parser.error("backtranslation attacks sweep iterations, not epsilon")
    if not args.model and not args.oracle_cmd:
        parser.error("one of --model or --oracle-cmd is required")
    try:
        if args.grid_axis == EPSILON_AXIS:
            grid_values = [float(v) for v in args.grid.split(",") if v]
        else:
            grid_values = [int(v) for v in args.grid.split(",") if v]
    except ValueError:
        parser.error(f"cannot parse --grid {args.grid!r}")
    inputs = {}
    if args.model:
        inputs[str(args.model)] = file_digest(args.model)
    for p in _dataset_paths(args.data, args.split):
        inputs[str(p)] = file_digest(p)
    config = {
        "model": str(args.model) if args.model else None,
        "oracle_cmd": args.oracle_cmd,
        "data": str(args.data),
        "split": args.split,
        "kind": args.kind,
        "grid_axis": args.grid_axis,
        "grid": grid_values,
        "epsilon": args.epsilon,
        "iterations": args.iterations,
        "max_queries": args.max_queries,
        "candidate_sample": args.candidate_sample,
        "seed": args.seed,
        "threads": args.threads,
        "frame": args.frame,
        "out": str(args.out),
        "_inputs": inputs,
    }
    return run_attack(config)


# ---------------------------------------------------------------- advtrain

def run_advtrain(config: dict) -> int:
    train_ds = _load_split(config["data"], "train")
    val_ds = _load_split(config["data"], "val")
    cfg = AdvTrainConfig(
        base=TrainConfig(**config["train"]),
        attack=AttackConfig(**config["attack"]),
        attack_kind=config["attack_kind"],
        mix_ratio=float(config["mix_ratio"]),
        regenerate=bool(config["regenerate"]),
        frame=int(config["frame"]),
    )
    result = adversarial_train(train_ds, cfg, k=int(config["k"]),
                               threads=_resolve_threads(config.get("threads")))
    out = Path(config["out"])
    out.parent.mkdir(parents=True, exist_ok=True)
    save_model(result.model, out)
    log_path = out.parent / f"{out.stem}_trainlog.csv"
    write_training_log(result.log, log_path)
    manifest = build_manifest("advtrain", config, config.pop("_inputs", {}),
                              cfg.base.seed)
    write_manifest(manifest, manifest_path_for(out))
    _emit_summary({
        "out": str(out),
        "training_log": str(log_path),
        "epochs": len(result.log),
        "final_clean_acc": result.log[-1].clean_acc,
        "val_accuracy": evaluate_accuracy(result.model, val_ds),
    })
    return EXIT_OK


def cmd_advtrain(args) -> int:
    attack_doc = _read_json(args.attack_config) if args.attack_config else {}
    inputs = {}
    for name in ("train", "test", "val"):
        for p in _dataset_paths(args.data, name):
            inputs[str(p)] = file_digest(p)
    if args.attack_config:
        inputs[str(args.attack_config)] = file_digest(args.attack_config)
    attack_defaults = AttackConfig(epsilon=0.2, iterations=10, max_queries=2000)
    attack_cfg = {
        "epsilon": float(attack_doc.get("epsilon", attack_defaults.epsilon)),
        "iterations": int(attack_doc.get("iterations", attack_defaults.iterations)),
        "max_queries": int(attack_doc.get("max_queries", attack_defaults.max_queries)),
        "candidate_sample": int(attack_doc.get("candidate_sample", 0)),
        "seed": int(attack_doc.get("seed", 0)),
        "bt_mode": str(attack_doc.get("bt_mode", "greedy")),
    }
    config = {
        "data": str(args.data),
        "k": args.k if args.k is not None else 3,
        "train": _train_config_from(args, attack_doc.get("train", {})),
        "attack": attack_cfg,
        "attack_kind": attack_doc.get("attack_kind", args.attack_kind),
        "mix_ratio": float(attack_doc.get("mix_ratio", args.mix_ratio)),
        "regenerate": bool(attack_doc.get("regenerate", not args.no_regenerate)),
        "frame": int(attack_doc.get("frame", 0)),
        "threads": args.threads,
        "out": str(args.out),
        "_inputs": inputs,
    }
    return run_advtrain(config)


# ------------------------------------------------------------------- noise

def run_noise(config: dict) -> int:
    test_ds = _load_split(config["data"], config["split"])
    em = ErrorModel(**config["error_model"])
    oracle = InProcessOracle(load_model(config["model"]))
    clean_acc, noisy_acc = evaluate_under_noise(oracle, test_ds, em)
    out = Path(config["out"])
    out.parent.mkdir(parents=True, exist_ok=True)
    report = {
        "clean_accuracy": clean_acc,
        "noisy_accuracy": noisy_acc,
        "n_samples": len(test_ds),
        "error_model": em.to_dict(),
    }
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(report, fh, sort_keys=True, indent=2)
        fh.write("\n")
    manifest = build_manifest("noise", config, config.pop("_inputs", {}),
                              em.seed)
    write_manifest(manifest, manifest_path_for(out))
    _emit_summary(report)
    return EXIT_OK


def cmd_noise(args) -> int:
    em_doc = _read_json(args.error_model) if args.error_model else {}
    inputs = {str(args.model): file_digest(args.model)}
    for p in _dataset_paths(args.data, args.split):
        inputs[str(p)] = file_digest(p)
    if args.error_model:
        inputs[str(args.error_model)] = file_digest(args.error_model)
    config = {
        "model": str(args.model),
        "data": str(args.data),
        "split": args.split,
        "error_model": ErrorModel.from_dict(em_doc).to_dict(),
        "out": str(args.out),
        "_inputs": inputs,
    }
    return run_noise(config)


# ------------------------------------------------------------------- rerun

_RUNNERS = {
    "gen-data": run_gen_data,
    "train": run_train,
    "attack": run_attack,
    "advtrain": run_advtrain,
    "noise": run_noise,
}


def cmd_rerun(args) -> int:
    doc = load_manifest(args.manifest)
    config = dict(doc["config"])
    config["_inputs"] = {str(args.manifest): file_digest(args.manifest)}
    if args.out:
        config["out"] = str(args.out)
    runner = _RUNNERS.get(doc["subcommand"])
    if runner is None:
        raise DnaAdvError(f"manifest has unknown subcommand {doc['subcommand']!r}")
    return runner(config)


# -------------------------------------------------------------------- main

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dnaadv",
        description="adversarial robustness toolkit for DNA classifiers")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("gen-data", help="generate a synthetic benchmark")
    p.add_argument("--spec", help="synthetic spec JSON (defaults built in)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--train-frac", type=float, default=0.75)
    p.add_argument("--test-frac", type=float, default=0.20)
    p.add_argument("--val-frac", type=float, default=0.05)
    p.add_argument("--split-seed", type=int, default=None)

    p = sub.add_parser("train", help="train the k-mer victim")
    p.add_argument("--data", required=True)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--config", help="training config JSON")
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--l2", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True, help="model output path")

    p = sub.add_parser("attack", help="run an attack campaign")
    p.add_argument("--model", help="saved model file (in-process oracle)")
    p.add_argument("--oracle-cmd", help="external oracle command line")
    p.add_argument("--data", required=True)
    p.add_argument("--split", default="test")
    p.add_argument("--kind", required=True, choices=ATTACK_KINDS)
    p.add_argument("--grid-axis", required=True,
                   choices=(EPSILON_AXIS, ITERATIONS_AXIS))
    p.add_argument("--grid", required=True, help="comma-separated grid values")
    p.add_argument("--epsilon", type=float, default=0.1,
                   help="fixed epsilon for iteration sweeps")
    p.add_argument("--iterations", type=int, default=10,
                   help="fixed iterations for epsilon sweeps")
    p.add_argument("--max-queries", type=int, default=10_000)
    p.add_argument("--candidate-sample", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--frame", type=int, default=0)
    p.add_argument("--out", required=True, help="report CSV path")

    p = sub.add_parser("advtrain", help="adversarially train the victim")
    p.add_argument("--data", required=True)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--attack-config", help="attack + mixture config JSON")
    p.add_argument("--attack-kind", default="nucleotide", choices=ATTACK_KINDS)
    p.add_argument("--mix-ratio", type=float, default=1.0)
    p.add_argument("--no-regenerate", action="store_true")
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--l2", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out", required=True, help="model output path")

    p = sub.add_parser("noise", help="evaluate under sequencing noise")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--split", default="test")
    p.add_argument("--error-model", help="error model JSON")
    p.add_argument("--out", required=True, help="report JSON path")

    p = sub.add_parser("rerun", help="replay a run from its manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", default=None, help="override the output path")

    return parser


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.subcommand == "gen-data":
            return cmd_gen_data(args)
        if args.subcommand == "train":
            return cmd_train(args)
        if args.subcommand == "attack":
            return cmd_attack(args, parser)
        if args.subcommand == "advtrain":
            return cmd_advtrain(args)
        if args.subcommand == "noise":
            return cmd_noise(args)
        if args.subcommand == "rerun":
            return cmd_rerun(args)
        parser.error(f"unknown subcommand {args.subcommand!r}")
    except DnaAdvError as exc:
        log.error("%s", exc)
        return EXIT_ERROR
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        log.error("%s", exc)
        return EXIT_ERROR
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
