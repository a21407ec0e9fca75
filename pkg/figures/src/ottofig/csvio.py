"""Reading ottosim sweep CSVs and their metadata sidecars.

This package is strictly presentational: all numbers come from the CSV, the
sidecar, or the ottosim CLI.
"""

from __future__ import annotations

import csv
import json
import subprocess
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

CSV_COLUMNS = (
    "xi", "theta", "t1", "tau", "Q_h", "Q_c", "W23", "W41",
    "w41_paper_literal", "W_out", "eta", "power", "F12", "F23", "F41",
    "Wfri_exp", "Wfri_comp", "closure_defect", "engine_flag", "status",
)


class SchemaError(ValueError):
    pass


@dataclass
class SweepTable:
    """One sweep CSV plus its sidecar, with columns as numpy arrays."""

    path: Path
    columns: dict[str, np.ndarray]
    status: list[str]
    meta: dict

    @property
    def spec_hash(self) -> str:
        return self.meta["spec_hash"]

    @property
    def axes(self) -> list[dict]:
        return self.meta["spec"]["axes"]

    @property
    def base(self) -> dict:
        return self.meta["spec"]["base"]

    def axis_values(self, name: str) -> np.ndarray:
        for axis in self.axes:
            if axis["name"] == name:
                if axis["spacing"] == "log":
                    return np.geomspace(axis["min"], axis["max"], axis["count"])
                return np.linspace(axis["min"], axis["max"], axis["count"])
        raise SchemaError(f"{self.path}: no {name!r} axis in the sweep metadata")

    def grid(self, column: str) -> np.ndarray:
        """Column reshaped to the sweep grid (axis order as in the sidecar)."""
        shape = tuple(axis["count"] for axis in self.axes)
        values = self.column(column)
        if values.size != int(np.prod(shape)):
            raise SchemaError(
                f"{self.path}: {values.size} rows do not fill the {shape} grid"
            )
        return values.reshape(shape)

    def column(self, name: str) -> np.ndarray:
        if name not in self.columns:
            raise SchemaError(f"{self.path}: missing required column {name!r}")
        return self.columns[name]


def metadata_path_for(csv_path: str | Path) -> Path:
    p = Path(csv_path)
    return p.with_name(p.stem + ".meta.json")


def load_table(csv_path: str | Path, required: tuple[str, ...] = ()) -> SweepTable:
    csv_path = Path(csv_path)
    meta_path = metadata_path_for(csv_path)
    if not meta_path.exists():
        raise SchemaError(f"missing metadata sidecar {meta_path}")
    meta = json.loads(meta_path.read_text())

    with open(csv_path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{csv_path}: empty file, not even a header") from None
        rows = list(reader)

    unknown = [c for c in header if c not in CSV_COLUMNS]
    if unknown:
        raise SchemaError(f"{csv_path}: unknown columns {unknown!r}")
    missing = [c for c in required if c not in header]
    if missing:
        raise SchemaError(f"{csv_path}: missing required columns {missing!r}")

    columns: dict[str, np.ndarray] = {}
    status: list[str] = []
    for j, name in enumerate(header):
        cells = [row[j] for row in rows]
        if name == "status":
            status = cells
        elif name == "engine_flag":
            columns[name] = np.array([c == "true" for c in cells])
        else:
            columns[name] = np.array([float(c) for c in cells])
    return SweepTable(path=csv_path, columns=columns, status=status, meta=meta)


def fetch_coefficients(
    xi: list[float] | None = None,
    theta: list[float] | None = None,
    Gamma: float | None = None,
    ottosim: str | None = None,
) -> dict:
    """Dipole-dipole coefficient curves, via the ottosim CLI (this package
    computes no physics itself)."""
    cmd = [sys.executable, "-m", "ottosim.cli"] if ottosim is None else [ottosim]
    cmd = cmd + ["coeffs"]
    for x in xi or []:
        cmd += ["--xi", repr(float(x))]
    for t in theta or []:
        cmd += ["--theta", repr(float(t))]
    if Gamma is not None:
        cmd += ["--Gamma", repr(float(Gamma))]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode != 0:
        raise RuntimeError(f"ottosim coeffs failed: {proc.stderr.strip()}")
    return json.loads(proc.stdout)
