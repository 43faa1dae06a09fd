"""JSON files for sampled functions, maps and sections.

Function files look like ``{"grid": {...}, "codim": n, "values": [[...], ...]}``;
map files carry ``"manifold"`` and ``"points"`` instead, and section files add
``"vectors"``. Rows follow the grid's row-major node order.
"""
from __future__ import annotations

import json

import numpy as np

from .errors import ValidationError
from .holder import CornerGrid, SampledFunction
from .manifolds import get_manifold
from .mapping import SampledMap, SampledSection


def _rows(data, key, count, width):
    rows = data.get(key)
    if not isinstance(rows, list):
        raise ValidationError(f"{key!r} must be a list of rows")
    if len(rows) != count:
        raise ValidationError(f"{key!r} has {len(rows)} rows, grid has {count} nodes")
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != width:
            raise ValidationError(f"{key!r} row must have {width} entries", node=i)
        if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in row):
            raise ValidationError(f"{key!r} row holds a non-number", node=i)
    arr = np.asarray(rows, dtype=float).reshape(count, width)
    bad = np.flatnonzero(~np.all(np.isfinite(arr), axis=1))
    if bad.size:
        raise ValidationError(f"{key!r} row is not finite", node=int(bad[0]))
    return arr


def _grid(data):
    g = data.get("grid")
    if not isinstance(g, dict) or set(g) != {"lo", "hi", "shape"}:
        raise ValidationError("'grid' must be an object with lo, hi and shape")
    try:
        return CornerGrid.from_dict(g)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"bad grid: {exc}") from None


def function_from_dict(data) -> SampledFunction:
    grid = _grid(data)
    codim = data.get("codim")
    if not isinstance(codim, int) or isinstance(codim, bool) or codim < 1:
        raise ValidationError("'codim' must be a positive integer")
    return SampledFunction(grid, _rows(data, "values", grid.size, codim))


def function_to_dict(f: SampledFunction):
    return {"grid": f.grid.to_dict(), "codim": f.codim, "values": f.values.tolist()}


def map_from_dict(data) -> SampledMap:
    grid = _grid(data)
    if not isinstance(data.get("manifold"), str):
        raise ValidationError("'manifold' must be a manifold id string")
    target = get_manifold(data["manifold"])
    return SampledMap(grid, target, _rows(data, "points", grid.size, target.embed_dim))


def map_to_dict(gamma: SampledMap):
    return {"grid": gamma.grid.to_dict(), "manifold": gamma.target.name,
            "points": gamma.points.tolist()}


def section_from_dict(data) -> SampledSection:
    base = map_from_dict(data)
    return SampledSection(base, _rows(data, "vectors", base.grid.size, base.target.embed_dim))


def section_to_dict(sigma: SampledSection):
    out = map_to_dict(sigma.base)
    out["vectors"] = sigma.vectors.tolist()
    return out


def load(path):
    """Read a function, map or section file, chosen by the keys present."""
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ValidationError(f"{path}: top level must be an object")
    if "vectors" in data:
        return section_from_dict(data)
    if "points" in data:
        return map_from_dict(data)
    return function_from_dict(data)


def save(obj, path):
    if isinstance(obj, SampledSection):
        data = section_to_dict(obj)
    elif isinstance(obj, SampledMap):
        data = map_to_dict(obj)
    else:
        data = function_to_dict(obj)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh)
