"""Run directory manifest: write, load, and validate."""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

logger = logging.getLogger(__name__)

MANIFEST_FILENAME = "manifest.json"


@dataclass
class FileEntry:
    """A single file reference within a manifest.

    Parameters
    ----------
    path : str
        Path relative to the run directory.
    format : str
        File format identifier (``"raw"``, ``"pgm"``, ``"csv"``, ``"json"``).
    """

    path: str
    format: str


@dataclass
class RunManifest:
    """Everything needed to re-derive the artifacts of a run.

    Parameters
    ----------
    config : dict
        The validated run configuration.
    version : str
        Package version that produced the run.
    created_at : str
        ISO-8601 creation timestamp; the only field that differs between reruns.
    seeds : list[int]
        Screen seed of every realization, in realization order.
    kernel_width_um : float
        Calibrated smoothing kernel reused by every screen.
    sigma0_measured_um : float
        Correlation length measured on the realization-0 screen.
    files : dict[str, FileEntry]
        Mapping of logical names to file entries.
    """

    config: dict[str, Any]
    version: str
    created_at: str = ""
    seeds: list[int] = field(default_factory=list)
    kernel_width_um: float = 0.0
    sigma0_measured_um: float = 0.0
    files: dict[str, FileEntry] = field(default_factory=dict)

    def add_file(self, name: str, path: Path | str, fmt: str) -> None:
        """Record a file; *path* is stored as given, relative to the run directory."""
        self.files[name] = FileEntry(path=Path(path).as_posix(), format=fmt)


def write_manifest(run_dir: str | Path, manifest: RunManifest) -> Path:
    """Write ``manifest.json`` with sorted keys so reruns differ only in ``created_at``."""
    path = Path(run_dir) / MANIFEST_FILENAME
    path.write_text(json.dumps(asdict(manifest), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    logger.debug("Wrote manifest %s with %d files", path, len(manifest.files))
    return path


def load_manifest(run_dir: str | Path) -> RunManifest:
    """Load and validate a manifest from a run directory.

    Parameters
    ----------
    run_dir : str | Path
        Directory containing ``manifest.json``.

    Returns
    -------
    RunManifest

    Raises
    ------
    FileNotFoundError
        If ``manifest.json`` does not exist.
    ValueError
        If required fields are missing.
    """
    manifest_path = Path(run_dir) / MANIFEST_FILENAME
    if not manifest_path.exists():
        msg = f"Manifest not found: {manifest_path}"
        raise FileNotFoundError(msg)

    with open(manifest_path, encoding="utf-8") as fh:
        data: dict[str, Any] = json.load(fh)

    for required in ("config", "version"):
        if required not in data:
            msg = f"Manifest missing required field: {required!r}"
            raise ValueError(msg)

    files = {
        name: FileEntry(path=entry["path"], format=entry["format"]) for name, entry in data.get("files", {}).items()
    }
    logger.debug("Loaded manifest from %s: %d files", manifest_path, len(files))
    return RunManifest(
        config=data["config"],
        version=data["version"],
        created_at=data.get("created_at", ""),
        seeds=list(data.get("seeds", [])),
        kernel_width_um=float(data.get("kernel_width_um", 0.0)),
        sigma0_measured_um=float(data.get("sigma0_measured_um", 0.0)),
        files=files,
    )
