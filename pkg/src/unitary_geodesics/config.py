"""Numerical tolerances, gathered in one immutable record."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

from .errors import ValidationError


@dataclass(frozen=True)
class Tolerances:
    # ||A - A*|| <= hermiticity_tol * ||A|| (relative)
    hermiticity_tol: float = 1e-12
    unitarity_tol: float = 1e-10
    # minimal chord distance between eigenvalues / distance to the branch cut
    gap_tol: float = 1e-8
    eig_residual_tol: float = 1e-9
    projector_tol: float = 1e-10
    # normalized second-difference units
    conv_tol: float = 1e-7
    dual_tol: float = 1e-6
    injectivity_margin: float = 1e-6
    ball_margin: float = 1e-3
    majorization_tol: float = 1e-9

    def replace(self, **changes) -> Tolerances:
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> Tolerances:
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValidationError(f"unknown tolerance names: {', '.join(unknown)}")
        values = {}
        for key, value in data.items():
            if not isinstance(value, (int, float)) or isinstance(value, bool) or value <= 0:
                raise ValidationError(f"tolerance {key!r} must be a positive number")
            values[key] = float(value)
        return cls(**values)

    @classmethod
    def from_json(cls, path: str | Path) -> Tolerances:
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read tolerance file {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ValidationError("tolerance file must hold a flat JSON object")
        return cls.from_dict(data)


DEFAULT_TOL = Tolerances()
