"""
Artifact files of a run and the manifest that lists them with content hashes.

Each output path has a single writer. The manifest carries no timestamps, so
identical scenarios produce identical manifests; log.json is written beside it
and left out of the hash list.
"""

import csv
import hashlib
import io
import json
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from jostlab.solvers.jost import JostSolution
from jostlab.solvers.kernel_apply import SeparableKernel
from jostlab.solvers.resolvent import DeltaReport

MANIFEST_NAME = "manifest.json"
LOG_NAME = "log.json"


def _jsonable(value: Any) -> Any:
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    if isinstance(value, np.generic):
        return _jsonable(value.item())
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def _cell(value: Any) -> Any:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return value


class ArtifactWriter:
    """Writes CSV and JSON files under one output directory."""

    def __init__(self, out_dir: str | Path):
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.files: dict[str, str] = {}

    def _write(self, name: str, content: str) -> Path:
        if name in self.files or name in (MANIFEST_NAME, LOG_NAME):
            raise ValueError(f"artifact {name!r} is already owned by another writer")
        path = self.out_dir / name
        path.parent.mkdir(parents=True, exist_ok=True)
        data = content.encode("utf-8")
        path.write_bytes(data)
        self.files[name] = hashlib.sha256(data).hexdigest()
        return path

    def write_json(self, name: str, payload: Any) -> Path:
        text = json.dumps(_jsonable(payload), indent=2, sort_keys=True)
        return self._write(name, text + "\n")

    def write_csv(
        self, name: str, header: Sequence[str], rows: Iterable[Sequence[Any]]
    ) -> Path:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
        return self._write(name, buffer.getvalue())

    def manifest(self, command: str, seed: int, extra: dict[str, Any] | None = None):
        entries = [
            {"path": name, "sha256": digest}
            for name, digest in sorted(self.files.items())
        ]
        return {"command": command, "seed": seed, "files": entries, **(extra or {})}

    def write_manifest(
        self, command: str, seed: int, extra: dict[str, Any] | None = None
    ) -> Path:
        path = self.out_dir / MANIFEST_NAME
        payload = _jsonable(self.manifest(command, seed, extra))
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        return path

    def write_log(self, exported: str) -> Path:
        path = self.out_dir / LOG_NAME
        path.write_text(exported + "\n")
        return path


def kernel_rows(kernel: SeparableKernel, stride: int = 1) -> list[list[float]]:
    """(x, y, re, im, abs) for every pair of kept nodes."""
    idx = np.arange(0, kernel.grid.size, stride)
    x = kernel.grid.nodes
    values = kernel.evaluate(idx[:, None], idx[None, :])
    rows = []
    for a, i in enumerate(idx):
        for b, j in enumerate(idx):
            v = complex(values[a, b])
            rows.append([float(x[i]), float(x[j]), v.real, v.imag, abs(v)])
    return rows


KERNEL_HEADER = ("x", "y", "re", "im", "abs")


def jost_header(N: int) -> list[str]:
    header = ["x"]
    for k in range(N):
        header += [f"re_u{k}", f"im_u{k}"]
    return header


def jost_rows(sol: JostSolution, stride: int = 1) -> list[list[float]]:
    """x with re/im of u^{(k)} for k = 0..N−1."""
    rows = []
    for i in range(0, sol.grid.size, stride):
        row = [float(sol.grid.nodes[i])]
        for k in range(sol.N):
            v = complex(sol.samples[k, i])
            row += [v.real, v.imag]
        rows.append(row)
    return rows


DELTA_HEADER = ("re_zeta", "im_zeta", "re_delta", "im_delta", "abs_delta")


def delta_rows(sweep: Sequence[tuple[complex, DeltaReport]]) -> list[list[float]]:
    return [
        [zeta.real, zeta.imag, report.value.real, report.value.imag, abs(report.value)]
        for zeta, report in sweep
    ]
