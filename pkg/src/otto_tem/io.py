"""Output formatting shared by every stage: 9-significant-digit numerics and
canonical JSON so identical runs produce byte-identical artifacts."""

from __future__ import annotations

import json
import os
from pathlib import Path

SIG_DIGITS = 9


def format_float(v: float) -> str:
    """Render a float with 9 significant digits (stable across runs)."""
    return f"{float(v):.{SIG_DIGITS}g}"


def canonical(obj):
    """Recursively format floats inside JSON-bound structures."""
    if isinstance(obj, float):
        return float(format_float(obj))
    if isinstance(obj, dict):
        return {k: canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [canonical(v) for v in obj]
    return obj


def dump_json(obj, path: str | Path) -> None:
    Path(path).write_text(json.dumps(canonical(obj), indent=2, sort_keys=True)
                          + "\n")


def load_json(path: str | Path):
    return json.loads(Path(path).read_text())


def worker_count() -> int:
    """Worker cap for trajectory/feature fan-out (OTTO_TEM_THREADS)."""
    env = os.environ.get("OTTO_TEM_THREADS")
    if env:
        return max(1, int(env))
    return max(1, os.cpu_count() or 1)
