"""Layout JSON files.

Schema::

    {
      "aps":     [[x, y], ...],        candidate AP positions
      "areas":   [[x, y], ...],        target-area centroids
      "gate":    [x, y],               gate point
      "outside": [[x, y], ...],        optional polygon of the outside domain
      "k": 1, "m": 1,                  APs / areas to place
      "eta": 2.0
    }
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import ValidationError
from .geometry import Polygon
from .placement import PlacementProblem
from .propagation import Point, as_point


@dataclass(frozen=True)
class Layout:
    aps: tuple
    areas: tuple
    gate: Point
    k: int
    m: int
    eta: float = 2.0
    outside: Polygon | None = None

    def problem(self) -> PlacementProblem:
        return PlacementProblem(self.aps, self.areas, self.k, self.m, self.gate, self.eta)

    def to_dict(self) -> dict:
        d = {
            "aps": [list(a) for a in self.aps],
            "areas": [list(a) for a in self.areas],
            "gate": list(self.gate),
            "k": self.k,
            "m": self.m,
            "eta": self.eta,
        }
        if self.outside is not None:
            d["outside"] = self.outside.outer.tolist()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Layout":
        if not isinstance(d, dict):
            raise ValidationError("layout must be a JSON object")
        missing = [key for key in ("aps", "areas", "gate") if key not in d]
        if missing:
            raise ValidationError(f"layout is missing {', '.join(missing)}")
        try:
            aps = tuple(as_point(a) for a in d["aps"])
            areas = tuple(as_point(a) for a in d["areas"])
            layout = cls(
                aps=aps,
                areas=areas,
                gate=as_point(d["gate"]),
                k=int(d.get("k", len(aps))),
                m=int(d.get("m", len(areas))),
                eta=float(d.get("eta", 2.0)),
                outside=Polygon(d["outside"]) if d.get("outside") else None,
            )
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"malformed layout: {exc}") from None
        layout.problem()  # geometric checks
        return layout

    @classmethod
    def load(cls, path) -> "Layout":
        with open(path) as fh:
            try:
                return cls.from_dict(json.load(fh))
            except json.JSONDecodeError as exc:
                raise ValidationError(f"{path}: not valid JSON ({exc})") from None

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")
