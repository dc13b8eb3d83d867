"""Module handles every file operation of the commands.
Every helper around output directories, input digests, manifests and JSON
documents should be in this module.
"""

import hashlib
import json
import os
from datetime import datetime, timezone
from typing import Iterable, List, Optional

from cli.cli_config import ARTIFACT_VERSION
from models.configs import InputDigest, RunManifest
from util.log_config import setup_logging

logger = setup_logging("cli_file_handling")

MANIFEST_NAME = "manifest.json"
DIGEST_CHUNK = 1024 * 1024


# Directory Management
def setup_directories(out_dir: str, *subdirs: str) -> str:
    """Create the output directory (and subdirectories) and return it."""
    os.makedirs(out_dir, exist_ok=True)
    for subdir in subdirs:
        os.makedirs(os.path.join(out_dir, subdir), exist_ok=True)
    logger.debug("Output directory ready: %s", out_dir)
    return out_dir


def file_sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(DIGEST_CHUNK), b""):
            digest.update(chunk)
    return digest.hexdigest()


def digest_inputs(paths: Iterable[Optional[str]]) -> List[InputDigest]:
    return [InputDigest(path=path, sha256=file_sha256(path)) for path in paths if path]


def write_json(document: dict, path: str) -> str:
    """Sorted keys, two-space indent, trailing newline."""
    with open(path, "w", encoding="utf-8", newline="") as handle:
        json.dump(document, handle, sort_keys=True, indent=2, default=str)
        handle.write("\n")
    return path


def _relative(path: str, out_dir: str) -> str:
    return os.path.relpath(path, out_dir).replace(os.sep, "/")


def build_manifest(command: str, out_dir: str, inputs: Iterable[Optional[str]], config: dict,
                   outputs: Iterable[str]) -> RunManifest:
    """Manifest with a digest over everything except ``created_at``."""
    manifest = RunManifest(
        command=command,
        version=ARTIFACT_VERSION,
        inputs=digest_inputs(inputs),
        config=config,
        outputs=sorted(_relative(path, out_dir) for path in outputs),
    )
    body = manifest.model_dump(mode="json", exclude={"created_at", "digest"})
    manifest.digest = hashlib.sha256(json.dumps(body, sort_keys=True, default=str).encode("utf-8")).hexdigest()
    manifest.created_at = datetime.now(timezone.utc)
    return manifest


def write_manifest(command: str, out_dir: str, inputs: Iterable[Optional[str]], config: dict,
                   outputs: Iterable[str]) -> str:
    """Writes ``manifest.json`` listing every output file of the run.

    Args:
        command (str): command name
        out_dir (str): run output directory; output paths are stored relative to it
        inputs (Iterable[Optional[str]]): input files, None entries are skipped
        config (dict): echo of the effective configuration
        outputs (Iterable[str]): output file paths

    Returns:
        str: manifest path
    """
    manifest = build_manifest(command, out_dir, inputs, config, outputs)
    path = os.path.join(out_dir, MANIFEST_NAME)
    write_json(manifest.model_dump(mode="json"), path)
    logger.info("Manifest for %s written: %s (%d outputs)", command, path, len(manifest.outputs))
    return path


def load_manifest(path: str) -> RunManifest:
    with open(path, "r", encoding="utf-8") as handle:
        return RunManifest.model_validate_json(handle.read())
