"""Run manifests: every CLI run records its resolved configuration and
input digests beside its outputs, and any run can be replayed from its
manifest alone."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

from . import __version__

MANIFEST_NAME = "manifest.json"


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return "sha256:" + h.hexdigest()


def build_manifest(subcommand: str, config: dict, inputs: dict[str, str],
                   seed: int | None) -> dict:
    return {
        "tool": "dnaadv",
        "version": __version__,
        "subcommand": subcommand,
        "seed": seed,
        "config": config,
        "inputs": inputs,
    }


def write_manifest(manifest: dict, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=2)
        fh.write("\n")


def load_manifest(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict) or doc.get("tool") != "dnaadv":
        raise ValueError(f"{path} is not a dnaadv manifest")
    return doc


def manifest_path_for(out_path) -> Path:
    """Manifest location beside an output file or inside an output dir."""
    out_path = Path(out_path)
    if out_path.suffix:
        return out_path.parent / f"{out_path.stem}.manifest.json"
    return out_path / MANIFEST_NAME
