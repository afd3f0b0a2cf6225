"""
Result Bundle Writer

Version: 1.0

Description:
    Writes the output directory of one run: CSV tables, JSON reports and a
    manifest.json listing them together with the config hash, library versions,
    timings and an echo of the config.

    Every file is first written next to its destination and moved into place with
    os.replace, so a directory never holds half-written files. Floats in CSV use
    the '.17g' format, which round-trips every double.

Usage:
    bundle = ResultBundle(out_dir, config.raw, "spectrum")
    bundle.write_csv("spectrum.csv", ["depth", "eigenvalue"], rows)
    bundle.finalize(exit_code=0)
"""

from __future__ import annotations

import csv
import io
import json
import logging
import os
import platform
import time
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np
import scipy

from scripts.experiment_config import config_hash

logger = logging.getLogger(__name__)

VERSION = "1.0.0"


def format_cell(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    if isinstance(value, (complex, np.complexfloating)):
        return format(float(np.real(value)), ".17g")
    return str(value)


def _atomic_write(path: Path, text: str):
    tmp = path.with_name(f".{path.name}.{os.getpid()}.tmp")
    with open(tmp, "w", encoding="utf-8", newline="") as f:
        f.write(text)
    os.replace(tmp, path)


class ResultBundle:
    """
    Output directory of a single task run.

    Args:
        out_dir (str | Path): Created if missing.
        raw (dict): The config document, echoed and hashed into the manifest.
        task (str): Task name.
    """

    def __init__(self, out_dir, raw: Optional[Dict[str, Any]], task: str):
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.raw = raw
        self.task = task
        self.files: List[str] = []
        self.timings: Dict[str, float] = {}
        self._started = time.perf_counter()

    def path(self, name: str) -> Path:
        return self.out_dir / name

    def _register(self, name: str):
        if name not in self.files:
            self.files.append(name)

    def write_csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(header)
        count = 0
        for row in rows:
            writer.writerow([format_cell(v) for v in row])
            count += 1
        path = self.path(name)
        _atomic_write(path, buffer.getvalue())
        self._register(name)
        logger.info("✅ %s saved at: %s (%d rows)", name, path, count)
        return path

    def write_json(self, name: str, data: Any) -> Path:
        path = self.path(name)
        _atomic_write(path, json.dumps(data, indent=2, default=_json_default) + "\n")
        self._register(name)
        logger.info("✅ %s saved at: %s", name, path)
        return path

    def time(self, label: str, seconds: float):
        self.timings[label] = round(seconds, 6)

    def finalize(self, exit_code: int, summary: Optional[Dict[str, Any]] = None) -> Path:
        self.timings["total"] = round(time.perf_counter() - self._started, 6)
        manifest = {
            "task": self.task,
            "exit_code": exit_code,
            "config_hash": config_hash(self.raw) if self.raw is not None else None,
            "versions": {
                "ultralap": VERSION,
                "python": platform.python_version(),
                "numpy": np.__version__,
                "scipy": scipy.__version__,
            },
            "timings": self.timings,
            "files": list(self.files),
            "summary": summary or {},
            "config": self.raw,
        }
        return self.write_json("manifest.json", manifest)


def _json_default(value):
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"{type(value).__name__} is not JSON serializable")
