"""
Artifact writing for CLI runs.

Every file is written to a temporary sibling and renamed into place. CSV
floats use repr, so an identical run produces identical bytes; timestamps
only ever appear in manifest.json.
"""

import csv
import hashlib
import io
import json
import os
import tempfile
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence

import numpy as np

from . import __version__
from .logging_config import get_logger

logger = get_logger(__name__)

MANIFEST_NAME = 'manifest.json'


def _plain(value: Any) -> Any:
    """numpy scalars and arrays as plain Python values for JSON"""
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, complex):
        return {'re': value.real, 'im': value.imag}
    raise TypeError(f"cannot serialise {type(value).__name__}")


def atomic_write(path: Path, payload: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, temp_name = tempfile.mkstemp(dir=str(path.parent), prefix=f".{path.name}.", suffix='.tmp')
    try:
        with os.fdopen(fd, 'wb') as handle:
            handle.write(payload)
        os.replace(temp_name, path)
    except BaseException:
        if os.path.exists(temp_name):
            os.unlink(temp_name)
        raise


def csv_bytes(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> bytes:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buffer.getvalue().encode('utf-8')


def json_bytes(data: Any) -> bytes:
    return (json.dumps(data, indent=2, sort_keys=True, default=_plain) + '\n').encode('utf-8')


def sha256_hex(payload: bytes) -> str:
    return hashlib.sha256(payload).hexdigest()


@dataclass
class ArtifactWriter:
    """Writes the files of one run into its output directory and tracks them for the manifest"""

    output_dir: Path
    written: List[Dict[str, str]] = field(default_factory=list)

    def __post_init__(self):
        self.output_dir = Path(self.output_dir)

    def _store(self, name: str, payload: bytes) -> Path:
        path = self.output_dir / name
        atomic_write(path, payload)
        self.written.append({'file': name, 'sha256': sha256_hex(payload)})
        logger.debug("Artifact written", extra={'extra_fields': {'file': str(path), 'bytes': len(payload)}})
        return path

    def write_csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
        return self._store(name, csv_bytes(header, rows))

    def write_json(self, name: str, data: Any) -> Path:
        return self._store(name, json_bytes(data))

    def write_text(self, name: str, text: str) -> Path:
        return self._store(name, text.encode('utf-8'))

    def write_manifest(self, config_hash: str, task: str, seed: int, wall_time: float,
                       status: str = 'ok') -> Path:
        manifest = {
            'config_sha256': config_hash,
            'tool_version': __version__,
            'task': task,
            'seed': seed,
            'status': status,
            'wall_time_s': round(wall_time, 6),
            'created_at': datetime.now(timezone.utc).isoformat(),
            'artifacts': sorted(self.written, key=lambda a: a['file']),
        }
        path = self.output_dir / MANIFEST_NAME
        atomic_write(path, json_bytes(manifest))
        return path


def config_hash(normalized: Dict[str, Any]) -> str:
    """sha256 of the canonical JSON of a normalized config"""
    return sha256_hex(json.dumps(normalized, sort_keys=True, separators=(',', ':')).encode('utf-8'))


def read_csv(path) -> List[Dict[str, str]]:
    with open(path, 'r', encoding='utf-8', newline='') as handle:
        return list(csv.DictReader(handle))
