"""Deterministic CSV/JSON writers with a provenance header.

Every file starts with the command line, the seed and the package version
and contains no timestamps, so identical invocations produce identical
bytes.  CSV provenance lines are ``#`` comments; JSON files carry a
``"provenance"`` object.
"""

from __future__ import annotations

import csv
import json
import os
import shlex
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__

OUT_DIR_ENV = "PHOTONSUB_OUT_DIR"


@dataclass(frozen=True)
class Provenance:
    argv: tuple
    seed: int | None = None
    version: str = __version__

    @property
    def command(self) -> str:
        return shlex.join(self.argv)

    def lines(self) -> list:
        return [f"command: {self.command}", f"seed: {self.seed}", f"version: photonsub {self.version}"]

    def to_dict(self) -> dict:
        return {"command": self.command, "seed": self.seed, "version": self.version}


def default_out_dir() -> Path:
    return Path(os.environ.get(OUT_DIR_ENV, "photonsub_out"))


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return v


def write_rows_csv(path, columns, rows, prov: Provenance) -> Path:
    """Write ``rows`` (dicts keyed by ``columns``) with the provenance header."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        for line in prov.lines():
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(row.get(c, "")) for c in columns])
    return path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, float) and not np.isfinite(obj):
        return None
    return obj


def write_json(path, payload: dict, prov: Provenance) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = {"provenance": prov.to_dict(), **_jsonable(payload)}
    path.write_text(json.dumps(doc, indent=2, sort_keys=False) + "\n")
    return path


def write_rows(path_stem, columns, rows, prov: Provenance, fmt: str = "csv") -> Path:
    """CSV or JSON (``{"columns": ..., "rows": [...]}``) depending on ``fmt``."""
    path_stem = Path(path_stem)
    if fmt == "csv":
        return write_rows_csv(path_stem.with_suffix(".csv"), columns, rows, prov)
    if fmt == "json":
        payload = {"columns": list(columns), "rows": [{c: r.get(c) for c in columns} for r in rows]}
        return write_json(path_stem.with_suffix(".json"), payload, prov)
    raise ValueError(f"unknown format {fmt!r}")


def wigner_rows(axis, values) -> list:
    """Flatten ``W[ix, ip]`` into ``x,p,w`` rows."""
    axis = np.asarray(axis, dtype=float)
    return [
        {"x": float(x), "p": float(p), "w": float(values[i, j])}
        for i, x in enumerate(axis)
        for j, p in enumerate(axis)
    ]


def write_wigner(path_stem, axis, values, prov: Provenance, fmt: str = "csv") -> Path:
    return write_rows(path_stem, ("x", "p", "w"), wigner_rows(axis, values), prov, fmt)


def read_rows_csv(path) -> list:
    """Read a CSV written by :func:`write_rows_csv` back as float dicts."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(line for line in fh if not line.startswith("#"))
        out = []
        for row in reader:
            conv = {}
            for k, v in row.items():
                try:
                    conv[k] = float(v)
                except ValueError:
                    conv[k] = v
            out.append(conv)
    return out
