"""Deterministic text output: 12-significant-digit floats, atomic writes."""
from __future__ import annotations

import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

SIG_DIGITS = 12


def fmt(x) -> str:
    x = float(x)
    if x == 0.0:
        return "0"
    return f"{x:.{SIG_DIGITS}g}"


def round_sig(x: float) -> float:
    x = float(x)
    if x == 0.0:
        return 0.0
    if not math.isfinite(x):
        return x
    return float(f"{x:.{SIG_DIGITS}g}")


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return round_sig(obj)
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    return obj


def dumps_document(doc: dict) -> str:
    """JSON with insertion key order preserved and rounded floats."""
    return json.dumps(_plain(doc), indent=2) + "\n"


def write_atomic(path: Path | str, data: str | bytes) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, mode) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def graymap(values: np.ndarray) -> bytes:
    """Binary 8-bit PGM, linear scaling with the maximum mapped to white.

    Row 0 of ``values`` becomes the bottom image row.
    """
    values = np.asarray(values, dtype=float)
    top = values.max() if values.size else 0.0
    scaled = np.zeros_like(values) if top <= 0 else values / top
    pixels = np.clip(np.rint(scaled * 255), 0, 255).astype(np.uint8)[::-1]
    h, w = pixels.shape
    return f"P5\n{w} {h}\n255\n".encode("ascii") + pixels.tobytes()
