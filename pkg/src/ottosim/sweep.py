"""Declarative parameter sweeps: JSON specs, deterministic (optionally
parallel) grid execution, and CSV/JSON export with a metadata sidecar.

Grid points are independent tasks; rows are always emitted in lexicographic
axis-index order regardless of worker count, and nothing in the pipeline
consults wall-clock time or randomness, so repeated runs produce
byte-identical files.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import multiprocessing
from dataclasses import dataclass, fields as dataclass_fields, replace
from itertools import product
from pathlib import Path

import numpy as np

from .cycle import StrokeMode, run_cycle
from .model import EngineParams

TOOL_VERSION = "0.1.0"

AXIS_NAMES = ("xi", "theta", "t1", "tau")
RESULT_COLUMNS = (
    "Q_h", "Q_c", "W23", "W41", "w41_paper_literal", "W_out", "eta", "power",
    "F12", "F23", "F41", "Wfri_exp", "Wfri_comp", "closure_defect",
    "engine_flag",
)
CSV_COLUMNS = ("xi", "theta", "t1", "tau") + RESULT_COLUMNS + ("status",)
MAX_GRID_POINTS = 10**6

_PARAM_FIELDS = tuple(f.name for f in dataclass_fields(EngineParams))


@dataclass(frozen=True)
class SweepAxis:
    """One swept coordinate: xi, theta, t1 or tau over an inclusive range."""

    name: str
    min: float
    max: float
    count: int
    spacing: str = "linear"

    def __post_init__(self) -> None:
        if self.name not in AXIS_NAMES:
            raise ValueError(f"axis name must be one of {AXIS_NAMES}, got {self.name!r}")
        if self.count < 2:
            raise ValueError(f"axis {self.name!r} needs count >= 2")
        if self.spacing not in ("linear", "log"):
            raise ValueError(f"axis {self.name!r}: spacing must be 'linear' or 'log'")
        if not self.max > self.min:
            raise ValueError(f"axis {self.name!r}: max must exceed min")
        if self.spacing == "log" and self.min <= 0:
            raise ValueError(f"axis {self.name!r}: log spacing needs min > 0")
        # Physical ranges.  A linear xi axis may touch 0: the singular point
        # becomes an isolated error row rather than a rejected spec.
        if self.name == "xi" and self.min < 0:
            raise ValueError("xi axis must not go negative")
        if self.name == "theta" and not (0.0 <= self.min and self.max <= math.pi + 1e-12):
            raise ValueError("theta axis must stay within [0, pi]")
        if self.name in ("t1", "tau") and self.min < 0:
            raise ValueError(f"{self.name} axis must be non-negative")

    def values(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.min, self.max, self.count)
        return np.linspace(self.min, self.max, self.count)


@dataclass(frozen=True)
class SweepSpec:
    """Grid description: base parameters, operating mode, up to two axes,
    fixed stroke durations for whatever is not swept, and the step size."""

    base: EngineParams
    mode: StrokeMode
    axes: tuple[SweepAxis, ...]
    t1: float | None = None
    tau: float | None = None
    dt: float = 1e-3
    outputs: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        if not self.axes:
            raise ValueError("a sweep needs at least one axis")
        if len(self.axes) > 2:
            raise ValueError("at most two axes are supported")
        names = [a.name for a in self.axes]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate axis {names!r}")
        total = math.prod(a.count for a in self.axes)
        if total > MAX_GRID_POINTS:
            raise ValueError(f"grid has {total} points, above the {MAX_GRID_POINTS} guard")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if "t1" in names and self.mode.heating != "finite":
            raise ValueError("a t1 axis requires finite heating")
        if "tau" in names and self.mode.unitary != "finite":
            raise ValueError("a tau axis requires finite unitary driving")
        if self.mode.heating == "finite" and "t1" not in names and self.t1 is None:
            raise ValueError("finite heating needs t1 as an axis or a fixed value")
        if self.mode.unitary == "finite" and "tau" not in names and self.tau is None:
            raise ValueError("finite unitary driving needs tau as an axis or a fixed value")
        if "t1" in names and self.t1 is not None:
            raise ValueError("t1 given both as an axis and a fixed value")
        if "tau" in names and self.tau is not None:
            raise ValueError("tau given both as an axis and a fixed value")
        if self.outputs is not None:
            unknown = [c for c in self.outputs if c not in RESULT_COLUMNS]
            if unknown:
                raise ValueError(f"unknown output columns {unknown!r}")


@dataclass(frozen=True)
class SweepRow:
    """One grid point, flattened: coordinates, every cycle quantity, status."""

    xi: float
    theta: float
    t1: float
    tau: float
    Q_h: float
    Q_c: float
    W23: float
    W41: float
    w41_paper_literal: float
    W_out: float
    eta: float
    power: float
    F12: float
    F23: float
    F41: float
    Wfri_exp: float
    Wfri_comp: float
    closure_defect: float
    engine_flag: bool
    status: str


def spec_from_dict(doc: dict) -> SweepSpec:
    """Validate a parsed JSON document against the sweep schema (strict:
    unknown keys anywhere are errors)."""
    if not isinstance(doc, dict):
        raise ValueError("sweep spec must be a JSON object")
    allowed = {"base", "mode", "axes", "t1", "tau", "dt", "outputs"}
    unknown = sorted(set(doc) - allowed)
    if unknown:
        raise ValueError(f"unknown spec keys {unknown!r}")

    base_doc = doc.get("base", {})
    if not isinstance(base_doc, dict):
        raise ValueError("'base' must be an object of engine parameters")
    bad = sorted(set(base_doc) - set(_PARAM_FIELDS))
    if bad:
        raise ValueError(f"unknown base parameters {bad!r}")
    base = EngineParams(**base_doc)

    mode_doc = doc.get("mode", {})
    if not isinstance(mode_doc, dict):
        raise ValueError("'mode' must be an object")
    bad = sorted(set(mode_doc) - {"heating", "unitary"})
    if bad:
        raise ValueError(f"unknown mode keys {bad!r}")
    mode = StrokeMode(**mode_doc)

    axes_doc = doc.get("axes")
    if not isinstance(axes_doc, list) or not axes_doc:
        raise ValueError("'axes' must be a non-empty array")
    axes = []
    for i, axis_doc in enumerate(axes_doc):
        if not isinstance(axis_doc, dict):
            raise ValueError(f"axis {i} must be an object")
        bad = sorted(set(axis_doc) - {"name", "min", "max", "count", "spacing"})
        if bad:
            raise ValueError(f"axis {i}: unknown keys {bad!r}")
        axes.append(SweepAxis(**axis_doc))

    outputs = doc.get("outputs")
    if outputs is not None:
        if not isinstance(outputs, list):
            raise ValueError("'outputs' must be an array of column names")
        outputs = tuple(outputs)

    return SweepSpec(
        base=base,
        mode=mode,
        axes=tuple(axes),
        t1=doc.get("t1"),
        tau=doc.get("tau"),
        dt=doc.get("dt", 1e-3),
        outputs=outputs,
    )


def load_spec(path: str | Path) -> SweepSpec:
    """Read and validate a JSON sweep spec."""
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(
            f"{path}: parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    return spec_from_dict(doc)


def spec_to_dict(spec: SweepSpec) -> dict:
    """Canonical dictionary form (all parameters explicit) used for the
    metadata sidecar and the spec hash."""
    return {
        "base": {name: getattr(spec.base, name) for name in _PARAM_FIELDS},
        "mode": {"heating": spec.mode.heating, "unitary": spec.mode.unitary},
        "axes": [
            {"name": a.name, "min": a.min, "max": a.max, "count": a.count, "spacing": a.spacing}
            for a in spec.axes
        ],
        "t1": spec.t1,
        "tau": spec.tau,
        "dt": spec.dt,
        "outputs": list(spec.outputs) if spec.outputs is not None else None,
    }


def spec_hash(spec: SweepSpec) -> str:
    blob = json.dumps(spec_to_dict(spec), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def _grid_points(spec: SweepSpec) -> list[dict[str, float]]:
    """Axis-value overrides per point, in lexicographic axis-index order."""
    value_lists = [axis.values() for axis in spec.axes]
    points = []
    for combo in product(*(range(axis.count) for axis in spec.axes)):
        points.append(
            {spec.axes[k].name: float(value_lists[k][i]) for k, i in enumerate(combo)}
        )
    return points


def _coordinate_columns(spec: SweepSpec, p: EngineParams, t1, tau) -> dict[str, float]:
    """What the xi/theta/t1/tau columns report: the requested coordinates,
    with nan for a detected (full-thermalization) t1 and the limit values 0 /
    inf for sudden / adiabatic strokes."""
    if spec.mode.heating == "finite":
        t1_col = float(t1)
    else:
        t1_col = math.nan
    if spec.mode.unitary == "finite":
        tau_col = float(tau)
    elif spec.mode.unitary == "sudden":
        tau_col = 0.0
    else:
        tau_col = math.inf
    return {"xi": p.xi, "theta": p.theta, "t1": t1_col, "tau": tau_col}


def _evaluate_point(task: tuple[SweepSpec, int, dict[str, float]]) -> tuple[int, SweepRow]:
    spec, index, overrides = task
    param_overrides = {k: v for k, v in overrides.items() if k in ("xi", "theta")}
    t1 = overrides.get("t1", spec.t1)
    tau = overrides.get("tau", spec.tau)
    try:
        p = replace(spec.base, **param_overrides)
        coords = _coordinate_columns(spec, p, t1, tau)
        res = run_cycle(p, spec.mode, t1=t1, tau=tau, dt=spec.dt)
        row = SweepRow(
            **coords,
            Q_h=res.Q_h, Q_c=res.Q_c, W23=res.W23, W41=res.W41,
            w41_paper_literal=res.w41_paper_literal, W_out=res.W_out,
            eta=res.eta, power=res.power,
            F12=res.F12, F23=res.F23, F41=res.F41,
            Wfri_exp=res.Wfri_exp, Wfri_comp=res.Wfri_comp,
            closure_defect=res.closure_defect, engine_flag=res.engine_flag,
            status="ok",
        )
    except Exception as exc:  # per-point fault isolation, never abort the grid
        coords = {
            "xi": float(overrides.get("xi", spec.base.xi)),
            "theta": float(overrides.get("theta", spec.base.theta)),
            "t1": float(t1) if t1 is not None else math.nan,
            "tau": float(tau) if tau is not None else math.nan,
        }
        nanfill = {c: math.nan for c in RESULT_COLUMNS if c != "engine_flag"}
        row = SweepRow(
            **coords, **nanfill, engine_flag=False,
            status=f"error: {type(exc).__name__}: {exc}",
        )
    return index, row


def run_sweep(spec: SweepSpec, workers: int = 1) -> list[SweepRow]:
    """Evaluate the whole grid; identical output for any worker count."""
    if workers < 1:
        raise ValueError("workers must be >= 1")
    tasks = [(spec, i, point) for i, point in enumerate(_grid_points(spec))]
    if workers == 1:
        indexed = [_evaluate_point(t) for t in tasks]
    else:
        chunk = max(1, len(tasks) // (4 * workers))
        with multiprocessing.Pool(workers) as pool:
            indexed = pool.map(_evaluate_point, tasks, chunksize=chunk)
    indexed.sort(key=lambda pair: pair[0])
    return [row for _, row in indexed]


def _columns(spec_outputs: tuple[str, ...] | None) -> list[str]:
    if spec_outputs is None:
        return list(CSV_COLUMNS)
    chosen = set(spec_outputs)
    return ["xi", "theta", "t1", "tau"] + [c for c in RESULT_COLUMNS if c in chosen] + ["status"]


def _format_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return value
    return repr(float(value))


def write_csv(rows: list[SweepRow], path: str | Path, outputs: tuple[str, ...] | None = None) -> None:
    """Write rows with the documented column order; floats use the shortest
    round-trip decimal form."""
    cols = _columns(outputs)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(cols)
        for row in rows:
            writer.writerow([_format_cell(getattr(row, c)) for c in cols])


def write_json(rows: list[SweepRow], path: str | Path, outputs: tuple[str, ...] | None = None) -> None:
    """Same table as an array of objects."""
    cols = _columns(outputs)
    payload = [{c: getattr(row, c) for c in cols} for row in rows]
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")


def write_metadata(spec: SweepSpec, path: str | Path, dt_used: float | None = None) -> None:
    """Sidecar recording the full spec, the step size, the tool version and
    the spec hash that figure tooling stamps onto plots."""
    payload = {
        "spec": spec_to_dict(spec),
        "spec_hash": spec_hash(spec),
        "dt": dt_used if dt_used is not None else spec.dt,
        "tool_version": TOOL_VERSION,
        "columns": _columns(spec.outputs),
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")


def metadata_path_for(csv_path: str | Path) -> Path:
    p = Path(csv_path)
    return p.with_name(p.stem + ".meta.json")
