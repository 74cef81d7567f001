"""Probability measures on the faces of an arrangement."""
from __future__ import annotations

import json
import math
from fractions import Fraction
from typing import Mapping

import numpy as np

from .arrangement import Arrangement, format_signs
from .errors import ValidationError
from .rational import as_fraction

WEIGHT_TOL = 1e-12


class FaceMeasure:
    """Weights ``face id -> probability`` on one arrangement.

    Weights stay exact when every weight is an int or Fraction; any float
    switches the whole measure to floats.
    """

    def __init__(self, arrangement: Arrangement, weights: Mapping[int, object]):
        self.arrangement = arrangement
        merged: dict[int, object] = {}
        exact = all(isinstance(w, (int, Fraction)) or isinstance(w, str) for w in weights.values())
        for f, w in weights.items():
            f = int(f)
            if not 0 <= f < len(arrangement):
                raise ValidationError(f"face id {f} out of range")
            w = as_fraction(w) if exact else float(w)
            if w < 0:
                raise ValidationError(f"negative weight on face {arrangement.sign_string(f)}")
            merged[f] = merged.get(f, 0) + w
        self.exact = exact
        self.weights = {f: w for f, w in sorted(merged.items()) if w != 0}
        self.support = tuple(self.weights)
        self._separating = None

    @property
    def zero(self):
        return Fraction(0) if self.exact else 0.0

    def weight(self, face: int):
        return self.weights.get(face, self.zero)

    def total(self):
        if self.exact:
            return sum(self.weights.values(), Fraction(0))
        return math.fsum(self.weights.values())

    def validate(self) -> None:
        total = self.total()
        if self.exact:
            if total != 1:
                raise ValidationError(f"weights sum to {total}, not 1")
        elif abs(total - 1.0) > WEIGHT_TOL:
            raise ValidationError(f"weights sum to {total!r}, not 1")
        if not self.support:
            raise ValidationError("empty support")

    @property
    def separating(self) -> bool:
        if self._separating is None:
            from .arrangement import is_separating

            self._separating = is_separating(self.arrangement, self)[0]
        return self._separating

    def probabilities(self) -> np.ndarray:
        """Float probabilities aligned with :attr:`support`."""
        p = np.array([float(self.weights[f]) for f in self.support])
        return p / p.sum()

    def to_json(self) -> list[dict]:
        arr = self.arrangement
        return [
            {"signs": arr.sign_string(f), "weight": str(w) if self.exact else w}
            for f, w in self.weights.items()
        ]

    @classmethod
    def from_json(cls, arrangement: Arrangement, data) -> "FaceMeasure":
        """Build from ``[{"signs": "+0-", "weight": "1/4"}, ...]``."""
        if isinstance(data, str):
            data = json.loads(data)
        weights: dict[int, object] = {}
        for item in data:
            f = arrangement.face_id(item["signs"])
            weights[f] = item["weight"]
        exact = all(not isinstance(w, float) for w in weights.values())
        if exact:
            weights = {f: as_fraction(w) for f, w in weights.items()}
        return cls(arrangement, weights)

    @classmethod
    def uniform(cls, arrangement: Arrangement, faces=None) -> "FaceMeasure":
        faces = list(range(len(arrangement))) if faces is None else list(faces)
        w = Fraction(1, len(faces))
        return cls(arrangement, {f: w for f in faces})

    @classmethod
    def point_mass(cls, arrangement: Arrangement, face: int) -> "FaceMeasure":
        return cls(arrangement, {face: Fraction(1)})

    def __repr__(self) -> str:
        items = ", ".join(f"{format_signs(self.arrangement.faces[f].sign)}:{w}" for f, w in list(self.weights.items())[:6])
        more = ", ..." if len(self.weights) > 6 else ""
        return f"FaceMeasure({items}{more})"
