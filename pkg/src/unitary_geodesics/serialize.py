"""JSON wire formats shared by the CLI.

Matrices: ``{"n": int, "re": [[...]], "im": [[...]]}``, row-major.  For
Hermitian inputs ``im`` may be omitted entirely, given as an upper triangle
(row ``i`` holding columns ``i..n-1``), or carry ``null`` below the diagonal.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import ValidationError


def matrix_to_json(a) -> dict:
    a = np.asarray(a, dtype=complex)
    return {"n": int(a.shape[0]), "re": a.real.tolist(), "im": a.imag.tolist()}


def _rows(data, n: int, name: str, hermitian: bool) -> np.ndarray:
    if not isinstance(data, list) or len(data) != n:
        raise ValidationError(f"{name} must be a list of {n} rows")
    out = np.full((n, n), np.nan)
    for i, row in enumerate(data):
        if not isinstance(row, list):
            raise ValidationError(f"{name}[{i}] is not a list")
        if len(row) == n:
            cols = range(n)
        elif hermitian and len(row) == n - i:
            cols = range(i, n)
        else:
            raise ValidationError(f"{name}[{i}] has {len(row)} entries, expected {n}")
        for j, value in zip(cols, row):
            if value is None:
                continue
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise ValidationError(f"{name}[{i}][{j}] is not a number")
            out[i, j] = float(value)
    return out


def matrix_from_json(obj, hermitian: bool = False) -> np.ndarray:
    if not isinstance(obj, dict) or "re" not in obj:
        raise ValidationError('matrix must be an object with at least "re"')
    n = obj.get("n", len(obj["re"]) if isinstance(obj["re"], list) else None)
    if not isinstance(n, int) or n < 1:
        raise ValidationError('matrix "n" must be a positive integer')
    re = _rows(obj["re"], n, "re", hermitian)
    im = _rows(obj["im"], n, "im", hermitian) if obj.get("im") is not None else np.zeros((n, n))
    if hermitian:
        lower = np.tril_indices(n, -1)
        for part, sign in ((re, 1.0), (im, -1.0)):
            missing = np.isnan(part[lower])
            rows, cols = lower[0][missing], lower[1][missing]
            part[rows, cols] = sign * part[cols, rows]
        np.fill_diagonal(im, np.where(np.isnan(np.diag(im)), 0.0, np.diag(im)))
    if np.isnan(re).any() or np.isnan(im).any():
        raise ValidationError("matrix has missing entries")
    return re + 1j * im


def path_to_json(path) -> dict:
    return {
        "x": matrix_to_json(path.x),
        "y": matrix_to_json(path.y),
        "t_min": path.t_min,
        "t_max": path.t_max,
    }


def path_from_json(obj, tol=None):
    from .config import DEFAULT_TOL
    from .flow import GeodesicPath

    if not isinstance(obj, dict) or "x" not in obj or "y" not in obj:
        raise ValidationError('path JSON needs "x" and "y"')
    x = matrix_from_json(obj["x"], hermitian=True)
    y = matrix_from_json(obj["y"], hermitian=True)
    return GeodesicPath(
        x, y, float(obj.get("t_min", 0.0)), float(obj.get("t_max", 1.0)), tol or DEFAULT_TOL
    )


def dumps(obj) -> str:
    """Deterministic JSON text."""
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False)
