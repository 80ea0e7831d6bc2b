"""Portable field files (JSON header + CSV body) and atomic output writes."""
from __future__ import annotations

import csv
import io as _io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .gauge import BerryGauge
from .kgrid import Field, build_grid
from .wavefunction import TwoComponentWavefunction, VectorWavefunction

FORMAT_VERSION = 1


def atomic_write_text(path, text):
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


def write_json(path, obj):
    atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n")


def _jsonable(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(f"not JSON serializable: {type(o)}")


def write_csv(path, columns, rows):
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([repr(float(x)) if not isinstance(x, str) else x for x in r])
    atomic_write_text(path, buf.getvalue())


def _component_names(ncomp):
    return [f"{part}{c}" for c in range(ncomp) for part in ("re", "im")]


def save_field(stem, field: Field, extra=None):
    """Write ``stem.json`` (grid header) and ``stem.csv`` (i, j, k, re/im per component).

    Only usable (unmasked) points are written.
    """
    stem = Path(stem)
    vals = field.values.reshape(field.grid.shape + (-1,))
    ncomp = vals.shape[-1]
    header = {"format": FORMAT_VERSION, "grid": field.grid.header(), "ncomp": ncomp,
              "component_shape": list(field.values.shape[3:]),
              "kind": type(field).__name__}
    if isinstance(field, (VectorWavefunction, TwoComponentWavefunction)):
        header["time"] = field.time
    if isinstance(field, TwoComponentWavefunction):
        header["state_gauge"] = list(field.gauge.I)
    header.update(extra or {})
    idx = np.argwhere(field.mask)
    v = vals[field.mask]
    rows = np.column_stack([idx, np.stack([v.real, v.imag], -1).reshape(len(idx), -1)])
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["i", "j", "k"] + _component_names(ncomp))
    for r in rows:
        w.writerow([int(r[0]), int(r[1]), int(r[2])] + [repr(float(x)) for x in r[3:]])
    atomic_write_text(stem.with_suffix(".csv"), buf.getvalue())
    write_json(stem.with_suffix(".json"), header)


def load_field(stem):
    stem = Path(stem)
    header = json.loads(stem.with_suffix(".json").read_text())
    g = header["grid"]
    grid = build_grid(g["center"], g["half_width"], g["n"], g["gauge"], g["eps_cone"], g["eps_k"],
                      max_masked_fraction=1.0)
    ncomp = header["ncomp"]
    vals = np.zeros(grid.shape + (ncomp,), dtype=complex)
    mask = np.zeros(grid.shape, dtype=bool)
    with stem.with_suffix(".csv").open(newline="") as fh:
        r = csv.reader(fh)
        next(r)
        for row in r:
            i, j, k = (int(x) for x in row[:3])
            nums = np.array([float(x) for x in row[3:]])
            vals[i, j, k] = nums[0::2] + 1j * nums[1::2]
            mask[i, j, k] = True
    vals = vals.reshape(grid.shape + tuple(header["component_shape"]))
    kind = header.get("kind")
    if kind == "VectorWavefunction":
        return VectorWavefunction(grid, vals, mask, time=header["time"])
    if kind == "TwoComponentWavefunction":
        return TwoComponentWavefunction(grid, vals, mask, time=header["time"],
                                        gauge=BerryGauge(tuple(header["state_gauge"])))
    return Field(grid, vals, mask)
