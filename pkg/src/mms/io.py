"""JSON readers and writers for spaces, measures, curves and point functions.

Files are validated completely before anything is computed.  Parse
problems raise :class:`ParseError`; files that parse but belong to a
different space raise :class:`SpaceMismatch`.  Writes go through a
temporary file and an atomic rename so an error never leaves a partial
output behind.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from pathlib import Path
from typing import Optional

import numpy as np

from . import measures as ms
from .curves import Curve
from .functionals import PointFunction
from .measures import Measure, MeasureError
from .space import MetricSpace, SpaceError, new_from_matrix, new_grid


class ParseError(ValueError):
    pass


class SpaceMismatch(ValueError):
    pass


def _load_json(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc
    if not isinstance(data, dict):
        raise ParseError(f"{path}: expected a JSON object")
    return data


def _array(data: dict, key: str, path, ndim: int) -> np.ndarray:
    if key not in data:
        raise ParseError(f"{path}: missing field {key!r}")
    try:
        arr = np.asarray(data[key], dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{path}: field {key!r} is not numeric") from exc
    if arr.ndim != ndim:
        raise ParseError(f"{path}: field {key!r} must be {ndim}-dimensional")
    if not np.all(np.isfinite(arr)):
        raise ParseError(f"{path}: field {key!r} has non-finite entries")
    return arr


def parse_grid(text: str, origin: Optional[str] = None, weight_fn=None) -> MetricSpace:
    """Grid from ``"dim,extent_1,...,extent_dim,spacing"`` (e.g. ``"2,64,64,0.1"``).

    ``origin`` is an optional comma-separated position of the first node.
    """
    try:
        parts = [p.strip() for p in text.split(",")]
        dim = int(parts[0])
        if dim < 1 or len(parts) != dim + 2:
            raise ValueError
        extents = [int(p) for p in parts[1:-1]]
        spacing = float(parts[-1])
    except (ValueError, IndexError) as exc:
        raise ParseError(f"grid spec {text!r} is not 'dim,extents...,delta'") from exc
    org = None
    if origin is not None:
        try:
            org = [float(v) for v in origin.split(",")]
        except ValueError as exc:
            raise ParseError(f"bad origin {origin!r}") from exc
        if len(org) != dim:
            raise ParseError(f"origin {origin!r} does not have {dim} coordinates")
    try:
        return new_grid(dim, extents, spacing, weight_fn, origin=org)
    except SpaceError as exc:
        raise ParseError(f"grid spec {text!r}: {exc}") from exc


def load_space(path) -> MetricSpace:
    data = _load_json(path)
    dist = _array(data, "dist", path, 2)
    weight = _array(data, "weight", path, 1)
    coords = _array(data, "coords", path, 2) if data.get("coords") is not None else None
    try:
        return new_from_matrix(dist, weight, coords)
    except SpaceError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def load_space_raw(path) -> tuple[np.ndarray, np.ndarray]:
    """Distance matrix and weights of a space file, without checking the metric axioms."""
    data = _load_json(path)
    dist = _array(data, "dist", path, 2)
    weight = _array(data, "weight", path, 1)
    if dist.shape != (len(weight), len(weight)):
        raise ParseError(f"{path}: dist must be {len(weight)}x{len(weight)}")
    return dist, weight


def space_dict(space: MetricSpace) -> dict:
    out = {"dist": space.dist.tolist(), "weight": space.weight.tolist()}
    if space.coords is not None:
        out["coords"] = space.coords.tolist()
    return out


def load_measure(path, space: MetricSpace) -> Measure:
    """Read ``{"density": [...], "space": <fingerprint or path>}``.

    The optional ``space`` key is checked against ``space``; a density of
    the wrong length also counts as a mismatch.
    """
    data = _load_json(path)
    phi = _array(data, "density", path, 1)
    ref = data.get("space")
    if ref is not None:
        if not isinstance(ref, str):
            raise ParseError(f"{path}: field 'space' must be a string")
        if ref != space.fingerprint():
            target = Path(path).parent / ref
            if not target.is_file() or load_space(target).fingerprint() != space.fingerprint():
                raise SpaceMismatch(f"{path}: measure belongs to space {ref!r}")
    if len(phi) != space.n:
        raise SpaceMismatch(f"{path}: density has {len(phi)} entries, space has {space.n} points")
    try:
        return ms.from_density(space, phi)
    except MeasureError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def measure_dict(nu: Measure) -> dict:
    return {"density": nu.density.tolist(), "space": nu.space.fingerprint()}


def load_point_function(path, space: MetricSpace) -> PointFunction:
    data = _load_json(path)
    vals = _array(data, "values", path, 1)
    if len(vals) != space.n:
        raise SpaceMismatch(f"{path}: {len(vals)} values for {space.n} points")
    return PointFunction(vals)


def curve_dict(curve: Curve) -> dict:
    return {
        "times": curve.times.tolist(),
        "densities": curve.densities().tolist(),
        "lip_cert": curve.lip_cert,
        "label": curve.label,
    }


def load_curve_data(path, space: MetricSpace) -> tuple[list, np.ndarray, Optional[float]]:
    """States, times and the stated certificate (if any) of a curve file."""
    data = _load_json(path)
    times = _array(data, "times", path, 1)
    dens = _array(data, "densities", path, 2)
    if len(times) != len(dens) or len(times) == 0:
        raise ParseError(f"{path}: need one time per state")
    if dens.shape[1] != space.n:
        raise SpaceMismatch(f"{path}: states have {dens.shape[1]} entries, space has {space.n} points")
    try:
        states = [ms.from_density(space, row) for row in dens]
    except MeasureError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    lip = data.get("lip_cert")
    return states, times, None if lip is None else float(lip)


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return None if math.isnan(x) else x
    return obj


def dumps(obj) -> str:
    """Deterministic JSON text (sorted keys, NaN written as null)."""
    return json.dumps(_clean(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_atomic(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
