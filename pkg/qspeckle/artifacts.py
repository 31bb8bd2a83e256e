"""On-disk formats: raw arrays with JSON sidecars, 16-bit PGM heatmaps, CSV curves."""

from __future__ import annotations

import csv
import json
import logging
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any

import numpy as np

from qspeckle.errors import DimensionError, ParameterError
from qspeckle.frames import FrameStack, NoiseParams
from qspeckle.models import Grid1D
from qspeckle.scatterer import ScatterScreen
from qspeckle.statistics import CoincidenceMap, MapMode, WidthCurve

logger = logging.getLogger(__name__)

SIDECAR_SUFFIX = ".json"
WIDTH_CURVE_COLUMNS = ("z_cm", "w_plus_um", "w_minus_um", "l_plus_mm", "l_minus_mm")
PGM_MAX = 65535
FRAME_DTYPES = {"uint16": "<u2", "float32": "<f4"}


def _sidecar_path(path: Path) -> Path:
    return path.with_name(path.name + SIDECAR_SUFFIX)


def write_json_payload(path: Path, payload: dict[str, Any]) -> None:
    """Write a JSON document with sorted keys and a trailing newline."""
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _read_sidecar(path: Path) -> dict[str, Any]:
    sidecar = _sidecar_path(path)
    if not sidecar.exists():
        msg = f"Sidecar not found: {sidecar}"
        raise FileNotFoundError(msg)
    return json.loads(sidecar.read_text(encoding="utf-8"))


def save_map(path: str | Path, cmap: CoincidenceMap) -> Path:
    """Write a map as raw little-endian float64 plus ``<name>.json`` sidecar."""
    path = Path(path)
    path.write_bytes(np.ascontiguousarray(cmap.values, dtype="<f8").tobytes())
    write_json_payload(
        _sidecar_path(path),
        {
            "dtype": "float64",
            "byte_order": "little",
            "shape": list(cmap.values.shape),
            "pitch_um": cmap.pitch_um,
            "z_cm": cmap.z_cm,
            "n_realizations": cmap.n_realizations,
            "mode": cmap.mode.value,
            "units": {"axes": "um", "values": "coincidence probability (unnormalized)"},
        },
    )
    return path


def load_map(path: str | Path) -> CoincidenceMap:
    """Read a map written by :func:`save_map`."""
    path = Path(path)
    meta = _read_sidecar(path)
    shape = tuple(meta["shape"])
    values = np.frombuffer(path.read_bytes(), dtype="<f8")
    if values.size != int(np.prod(shape)):
        msg = f"{path} holds {values.size} values, sidecar expects shape {shape}"
        raise DimensionError(msg)
    return CoincidenceMap(
        values=values.reshape(shape).astype(np.float64),
        pitch_um=float(meta["pitch_um"]),
        z_cm=float(meta["z_cm"]),
        n_realizations=int(meta["n_realizations"]),
        mode=MapMode(meta["mode"]),
    )


def write_pgm(path: str | Path, image: np.ndarray) -> Path:
    """Write a 16-bit binary PGM (P5, big-endian) with linear min-max scaling.

    Pixel ``p = round(65535 * (v - min) / (max - min))``; a constant image maps to 0.
    """
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 2:
        msg = f"PGM images must be 2D, got shape {image.shape}"
        raise DimensionError(msg)
    lo, hi = float(image.min()), float(image.max())
    span = hi - lo
    scaled = np.zeros(image.shape) if span == 0 else (image - lo) / span
    pixels = np.round(scaled * PGM_MAX).astype(">u2")
    rows, cols = image.shape
    path = Path(path)
    path.write_bytes(f"P5\n{cols} {rows}\n{PGM_MAX}\n".encode("ascii") + pixels.tobytes())
    return path


def read_pgm(path: str | Path) -> np.ndarray:
    """Read a 16-bit PGM written by :func:`write_pgm`."""
    data = Path(path).read_bytes()
    header = data.split(b"\n", 3)
    if len(header) < 4 or header[0] != b"P5":
        msg = f"{path} is not a binary PGM"
        raise ParameterError(msg)
    cols, rows = (int(v) for v in header[1].split())
    return np.frombuffer(header[3], dtype=">u2").reshape(rows, cols)


def write_csv(path: str | Path, columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    """Write rows under a header line; floats use ``repr`` so values round-trip exactly."""
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return path


def read_csv(path: str | Path) -> tuple[list[str], np.ndarray]:
    """Read a numeric CSV written by :func:`write_csv`."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        columns = next(reader)
        rows = [[float(v) for v in row] for row in reader]
    return columns, np.array(rows, dtype=np.float64).reshape(len(rows), len(columns))


def write_width_curve(path: str | Path, curve: WidthCurve) -> Path:
    """Write ``z_cm, w_plus_um, w_minus_um, l_plus_mm, l_minus_mm``."""
    return write_csv(path, WIDTH_CURVE_COLUMNS, curve.rows())


def save_screen(path: str | Path, screen: ScatterScreen) -> Path:
    """Write a screen phase as raw float64 with its calibration in the sidecar."""
    path = Path(path)
    path.write_bytes(np.ascontiguousarray(screen.phase, dtype="<f8").tobytes())
    write_json_payload(
        _sidecar_path(path),
        {
            "dtype": "float64",
            "byte_order": "little",
            "count": screen.grid.count,
            "pitch_um": screen.grid.pitch_um,
            "seed": screen.seed,
            "sigma0_um": screen.sigma0_um,
            "kernel_width_um": screen.kernel_width_um,
            "phase_gain": screen.phase_gain,
            "stretched": screen.stretched,
            "units": {"phase": "rad"},
        },
    )
    return path


def load_screen(path: str | Path) -> ScatterScreen:
    """Read a screen written by :func:`save_screen`."""
    path = Path(path)
    meta = _read_sidecar(path)
    return ScatterScreen(
        grid=Grid1D(int(meta["count"]), float(meta["pitch_um"])),
        phase=np.frombuffer(path.read_bytes(), dtype="<f8").astype(np.float64),
        sigma0_um=float(meta["sigma0_um"]),
        seed=int(meta["seed"]),
        kernel_width_um=float(meta["kernel_width_um"]),
        phase_gain=float(meta["phase_gain"]),
        stretched=bool(meta["stretched"]),
    )


def save_frames(path: str | Path, stack: FrameStack, dtype: str = "uint16") -> Path:
    """Write a frame stack as raw little-endian ``uint16`` or ``float32`` plus sidecar.

    Raises
    ------
    ParameterError
        If *dtype* is unsupported or counts do not fit in ``uint16``.
    """
    if dtype not in FRAME_DTYPES:
        msg = f"Unknown frame dtype {dtype!r}. Available: {sorted(FRAME_DTYPES)}"
        raise ParameterError(msg)
    if dtype == "uint16" and np.max(stack.intensities) > np.iinfo(np.uint16).max:
        raise ParameterError("Frame counts exceed the uint16 range; use float32")
    path = Path(path)
    path.write_bytes(np.ascontiguousarray(stack.intensities, dtype=FRAME_DTYPES[dtype]).tobytes())
    write_json_payload(
        _sidecar_path(path),
        {
            "dtype": dtype,
            "byte_order": "little",
            "n_frames": stack.n_frames,
            "pixels": stack.pixels,
            "binning": stack.binning,
            "seed": stack.seed,
            "pitch_um": stack.pitch_um,
            "pairs_per_frame": stack.pairs_per_frame,
            "dark_rate": stack.noise.dark_rate,
            "background_rate": stack.noise.background_rate,
            "z_cm": stack.z_cm,
        },
    )
    return path


def load_frames(path: str | Path) -> FrameStack:
    """Read a frame stack; only ``n_frames``, ``pixels`` and ``dtype`` are required in the sidecar."""
    path = Path(path)
    meta = _read_sidecar(path)
    dtype = meta.get("dtype", "uint16")
    if dtype not in FRAME_DTYPES:
        msg = f"Unknown frame dtype {dtype!r}. Available: {sorted(FRAME_DTYPES)}"
        raise ParameterError(msg)
    shape = (int(meta["n_frames"]), int(meta["pixels"]))
    values = np.frombuffer(path.read_bytes(), dtype=FRAME_DTYPES[dtype])
    if values.size != shape[0] * shape[1]:
        msg = f"{path} holds {values.size} values, sidecar expects {shape}"
        raise DimensionError(msg)
    intensities = values.reshape(shape)
    intensities = intensities.astype(np.int64) if dtype == "uint16" else intensities.astype(np.float64)
    return FrameStack(
        intensities=intensities,
        pitch_um=float(meta.get("pitch_um", 1.0)),
        pairs_per_frame=float(meta.get("pairs_per_frame", 0.0)),
        noise=NoiseParams(float(meta.get("dark_rate", 0.0)), float(meta.get("background_rate", 0.0))),
        seed=meta.get("seed"),
        binning=int(meta.get("binning", 1)),
        z_cm=float(meta.get("z_cm", 0.0)),
    )
