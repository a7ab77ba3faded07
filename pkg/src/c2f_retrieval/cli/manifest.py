"""Corpus manifest: which store files belong together, and their fingerprint."""

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, Optional, Union

from c2f_retrieval.config import EngineConfig, config_from_dict
from c2f_retrieval.storage import sha256_file
from c2f_retrieval.validation import StoreValidationError

MANIFEST_NAME = "manifest.json"
MANIFEST_VERSION = 1

# Settings baked into the stores; query-time settings may change freely.
BUILD_FIELDS = ("hsv_dims", "alpha", "codebook_size", "kmeans_iters", "d_b", "h_t", "sigma", "seed")

INPUT_STORES = ("histograms", "descriptors", "groundtruth")
BUILT_STORES = ("codebook", "he", "index")

STORE_FILES = {
    "histograms": "histograms.c2fh",
    "descriptors": "descriptors.c2fd",
    "groundtruth": "groundtruth.txt",
    "codebook": "codebook.c2fc",
    "he": "he.c2fe",
    "index": "index.c2fi",
}


@dataclass
class CorpusManifest:
    """
    Store files of one corpus, relative to the corpus directory.

    ``files`` maps a store name to ``{"path": ..., "sha256": ...}``. The
    fingerprint hashes the build settings of ``config`` together with
    the input store hashes; every built store records the fingerprint it
    was produced under.
    """

    root: Path
    config: EngineConfig
    files: Dict[str, Dict[str, str]] = field(default_factory=dict)
    built_under: Optional[str] = None
    version: int = MANIFEST_VERSION

    @property
    def fingerprint(self) -> str:
        settings = {name: self.config.to_dict()[name] for name in BUILD_FIELDS}
        inputs = {name: self.files[name]["sha256"] for name in INPUT_STORES if name in self.files}
        payload = json.dumps({"config": settings, "inputs": inputs}, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()

    def path(self, name: str) -> Path:
        if name not in self.files:
            raise StoreValidationError(f"manifest in {self.root} lists no {name} store")
        return self.root / self.files[name]["path"]

    def has(self, name: str) -> bool:
        return name in self.files

    def record(self, name: str, path: Union[str, Path]) -> None:
        path = Path(path)
        self.files[name] = {
            "path": path.relative_to(self.root).as_posix(),
            "sha256": sha256_file(path),
        }

    def verify(self, names: Iterable[str]) -> None:
        """Check that the named stores exist, are unchanged and share one fingerprint."""
        mismatched = []
        for name in names:
            path = self.path(name)
            if not path.is_file():
                raise FileNotFoundError(f"store file not found: {path}")
            if sha256_file(path) != self.files[name]["sha256"]:
                mismatched.append(name)
        if mismatched:
            raise StoreValidationError(
                f"store files changed since they were recorded: {sorted(mismatched)}"
            )
        built = [name for name in names if name in BUILT_STORES]
        if built and self.built_under != self.fingerprint:
            raise StoreValidationError(
                f"corpus fingerprint mismatch: stores {built} were built under "
                f"{self.built_under}, corpus is now {self.fingerprint}"
            )

    def check_run_config(self, config: EngineConfig) -> None:
        """Refuse a run config whose build settings differ from the corpus config."""
        ours, built = config.to_dict(), self.config.to_dict()
        differing = [name for name in BUILD_FIELDS if ours[name] != built[name]]
        if differing:
            raise StoreValidationError(
                f"run config differs from the settings the corpus was built under in {differing}; "
                f"rebuild the corpus or leave these keys out of the run config"
            )

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "fingerprint": self.fingerprint,
            "built_under": self.built_under,
            "config": self.config.to_dict(),
            "files": {name: dict(self.files[name]) for name in sorted(self.files)},
        }

    def write(self) -> Path:
        path = self.root / MANIFEST_NAME
        path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return path

    @classmethod
    def read(cls, root: Union[str, Path]) -> "CorpusManifest":
        root = Path(root)
        path = root / MANIFEST_NAME
        if not path.is_file():
            raise FileNotFoundError(f"corpus manifest not found: {path}")
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise StoreValidationError(f"{path}: invalid JSON ({exc})") from exc
        if data.get("version") != MANIFEST_VERSION:
            raise StoreValidationError(f"{path}: unsupported manifest version {data.get('version')}")
        if not isinstance(data.get("config"), dict):
            raise StoreValidationError(f"{path}: missing config section")
        manifest = cls(
            root=root,
            config=config_from_dict(data["config"]),
            files={name: dict(entry) for name, entry in data.get("files", {}).items()},
            built_under=data.get("built_under"),
        )
        if data.get("fingerprint") != manifest.fingerprint:
            raise StoreValidationError(f"{path}: recorded fingerprint does not match its contents")
        return manifest
