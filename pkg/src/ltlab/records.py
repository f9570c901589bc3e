"""Output files: atomic CSV / JSON writers and the run manifest."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import subprocess
import tempfile
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path

import jsonschema

from . import __version__

SCHEMA_NAME = "run_manifest.schema.json"


def fmt(value) -> str:
    """CSV cell text; floats keep 17 significant digits so they round-trip."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float) or hasattr(value, "dtype"):
        v = float(value)
        if math.isnan(v):
            return "nan"
        return "%.17g" % v
    return str(value)


def atomic_write_text(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_csv(path, header, rows) -> Path:
    """RFC-4180 CSV (CRLF line ends, one header row)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for row in rows:
        if isinstance(row, dict):
            row = [row.get(h) for h in header]
        w.writerow([fmt(v) for v in row])
    return atomic_write_text(path, buf.getvalue())


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "dtype"):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def write_json(path, obj) -> Path:
    text = json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"
    return atomic_write_text(path, text)


def code_version() -> str:
    """``git describe`` of the source tree when available, else the package version."""
    here = Path(__file__).resolve().parent
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            cwd=here, capture_output=True, text=True, timeout=5,
        )
        if out.returncode == 0 and out.stdout.strip():
            return f"{__version__}+{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


def load_schema() -> dict:
    return json.loads(resources.files("ltlab").joinpath("schema", SCHEMA_NAME).read_text())


@dataclass
class RunManifest:
    command: str
    parameters: dict
    seed: int
    outputs: list = field(default_factory=list)
    timestamp: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())
    code_version: str = field(default_factory=code_version)
    wall_time_s: float = 0.0
    exit_code: int = 0

    def to_dict(self) -> dict:
        return _jsonable(asdict(self))

    def validate(self):
        jsonschema.validate(self.to_dict(), load_schema())

    def write(self, path) -> Path:
        self.validate()
        return write_json(path, self.to_dict())

    @classmethod
    def read(cls, path) -> "RunManifest":
        data = json.loads(Path(path).read_text())
        jsonschema.validate(data, load_schema())
        return cls(**data)
