#!/usr/bin/env python3
"""Run manifests: config snapshot, seed, tool version and hashes of emitted files."""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, Optional, Union

from utils import file_sha256, write_json
from workflow.errors import ManifestError

logger = logging.getLogger('gaitlab.manifest')

MANIFEST_NAME = "manifest.json"


@dataclass
class RunManifest:
    stage: str
    config: dict
    master_seed: int
    tool_version: str
    outputs: Dict[str, str] = field(default_factory=dict)
    hashes: Dict[str, str] = field(default_factory=dict)

    def record_outputs(self, root: Union[str, Path], paths: Iterable[Union[str, Path]]):
        """Hash every file under ``root``; keys are POSIX paths relative to it"""
        root = Path(root)
        for path in sorted(Path(p) for p in paths):
            relative = path.resolve().relative_to(root.resolve()).as_posix()
            self.hashes[relative] = file_sha256(path)

    def to_dict(self) -> dict:
        return {
            'stage': self.stage,
            'config': self.config,
            'master_seed': self.master_seed,
            'tool_version': self.tool_version,
            'outputs': dict(sorted(self.outputs.items())),
            'hashes': dict(sorted(self.hashes.items())),
        }

    def write(self, root: Union[str, Path]) -> Path:
        path = Path(root) / MANIFEST_NAME
        write_json(path, self.to_dict(), indent=2)
        logger.info(f"Wrote manifest with {len(self.hashes)} file hashes to {path}")
        return path

    @classmethod
    def load(cls, root: Union[str, Path]) -> Optional['RunManifest']:
        """The manifest in ``root``, or None when there is none"""
        path = Path(root) / MANIFEST_NAME
        if not path.exists():
            return None
        try:
            with open(path, encoding='utf-8') as f:
                data = json.load(f)
            return cls(
                stage=data['stage'], config=data['config'], master_seed=int(data['master_seed']),
                tool_version=data['tool_version'], outputs=dict(data.get('outputs', {})),
                hashes=dict(data['hashes']),
            )
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
            raise ManifestError(f"{path}: unreadable manifest: {e}")

    def verify(self, root: Union[str, Path]):
        """Raise ManifestError if any listed file is missing or changed"""
        root = Path(root)
        for relative, expected in sorted(self.hashes.items()):
            path = root / relative
            if not path.exists():
                raise ManifestError(f"{path} is listed in the manifest but missing")
            if file_sha256(path) != expected:
                raise ManifestError(f"{path} does not match its manifest hash")
        logger.info(f"Verified {len(self.hashes)} files against {root / MANIFEST_NAME}")


def verify_if_present(root: Union[str, Path]) -> Optional[RunManifest]:
    manifest = RunManifest.load(root)
    if manifest is None:
        logger.debug(f"No manifest in {root}; skipping verification")
        return None
    manifest.verify(root)
    return manifest
