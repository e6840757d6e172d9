"""Output provenance manifests.

Every file the CLI writes embeds a manifest recording the tool version, a
hash of the resolved configuration, the lexicon file hashes, and the seed,
so outputs are replayable and attributable. No timestamps: reruns with
identical inputs are byte-identical.
"""

from __future__ import annotations

import hashlib
import json

from . import __version__


def config_hash(resolved: dict) -> str:
    blob = json.dumps(resolved, sort_keys=True, ensure_ascii=False, default=str)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


def build_manifest(command: str, resolved_config: dict, lexicon_hashes: dict,
                   seed: int | None = None) -> dict:
    return {
        "tool": "scicert",
        "version": __version__,
        "command": command,
        "seed": seed,
        "config_hash": config_hash(resolved_config),
        "lexicons": dict(sorted(lexicon_hashes.items())),
    }
