"""Analytic boundary curves and multi-component obstacles."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

__all__ = [
    "GeometryError",
    "Curve",
    "Domain",
    "BoundarySample",
    "circle",
    "ellipse",
    "grid_domain",
    "sample",
]


class GeometryError(ValueError):
    """Invalid curve parameters or intersecting components."""


class BoundarySample(NamedTuple):
    position: np.ndarray
    tangent: np.ndarray
    second: np.ndarray
    normal: np.ndarray
    speed: np.ndarray


@dataclass(frozen=True)
class Curve:
    """Closed analytic curve ``gamma(t) = center + R(phase + t)``, counterclockwise.

    ``kind`` is ``"circle"`` (one radius) or ``"ellipse"`` (semi-axes along
    x and y). ``phase`` shifts the parameter origin without moving the curve.
    """

    kind: str
    center: tuple[float, float]
    radii: tuple[float, ...]
    phase: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))
        object.__setattr__(self, "radii", tuple(float(r) for r in self.radii))
        object.__setattr__(self, "phase", float(self.phase))
        expected = {"circle": 1, "ellipse": 2}.get(self.kind)
        if expected is None:
            raise GeometryError(f"unknown curve kind {self.kind!r}")
        if len(self.radii) != expected:
            raise GeometryError(f"{self.kind} needs {expected} radii, got {len(self.radii)}")
        if not all(math.isfinite(r) and r > 0 for r in self.radii):
            raise GeometryError(f"radii must be positive, got {self.radii}")
        if not all(math.isfinite(c) for c in self.center + (self.phase,)):
            raise GeometryError("non-finite center or phase")

    @property
    def axes(self) -> tuple[float, float]:
        return (self.radii[0], self.radii[0]) if self.kind == "circle" else self.radii

    @property
    def bounding_radius(self) -> float:
        return max(self.radii)

    def shape_key(self) -> tuple:
        """Everything except the center: curves with equal keys are translates."""
        return (self.kind, self.radii, self.phase)

    def local(self, t) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Position relative to the center, first and second derivatives."""
        a, b = self.axes
        s = np.asarray(t, dtype=float) + self.phase
        c, n = np.cos(s), np.sin(s)
        pos = np.stack([a * c, b * n], axis=-1)
        d1 = np.stack([-a * n, b * c], axis=-1)
        d2 = -pos
        return pos, d1, d2

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "center": list(self.center)}
        if self.kind == "circle":
            out["radius"] = self.radii[0]
        else:
            out["radii"] = list(self.radii)
        if self.phase:
            out["phase"] = self.phase
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "Curve":
        kind = d.get("kind", "circle")
        radii = (d["radius"],) if "radius" in d else tuple(d["radii"])
        return cls(kind, tuple(d["center"]), radii, d.get("phase", 0.0))


def circle(center, radius: float, phase: float = 0.0) -> Curve:
    return Curve("circle", tuple(center), (radius,), phase)


def ellipse(center, a: float, b: float, phase: float = 0.0) -> Curve:
    return Curve("ellipse", tuple(center), (a, b), phase)


def sample(curve: Curve, t) -> BoundarySample:
    """Exact position, derivatives, outward normal and speed at parameter ``t``.

    The normal is ``(gamma2', -gamma1') / |gamma'|``, outward for the
    counterclockwise orientation used by every curve here.
    """
    pos, d1, d2 = curve.local(t)
    pos = pos + np.asarray(curve.center)
    speed = np.hypot(d1[..., 0], d1[..., 1])
    normal = np.stack([d1[..., 1], -d1[..., 0]], axis=-1) / speed[..., None]
    return BoundarySample(pos, d1, d2, normal, speed)


def _disjoint_pair(c1: Curve, c2: Curve) -> bool:
    dist = math.dist(c1.center, c2.center)
    # exact for circles; ellipses fall back to their circumscribed circles
    return dist > c1.bounding_radius + c2.bounding_radius + 1e-12


@dataclass(frozen=True)
class Domain:
    """Union of pairwise disjoint closed curves' interiors."""

    curves: tuple[Curve, ...] = field(default_factory=tuple)

    def __post_init__(self):
        curves = tuple(self.curves)
        object.__setattr__(self, "curves", curves)
        if not curves:
            raise GeometryError("a domain needs at least one curve")
        for i in range(len(curves)):
            for j in range(i + 1, len(curves)):
                if not _disjoint_pair(curves[i], curves[j]):
                    raise GeometryError(
                        f"curves {i} and {j} touch or overlap "
                        f"(centers {curves[i].center}, {curves[j].center})"
                    )

    def __len__(self) -> int:
        return len(self.curves)

    def __iter__(self):
        return iter(self.curves)

    def to_dict(self) -> dict:
        return {"curves": [c.to_dict() for c in self.curves]}

    @classmethod
    def from_dict(cls, d: dict) -> "Domain":
        return cls(tuple(Curve.from_dict(c) for c in d["curves"]))


def grid_domain(
    columns: int,
    rows: int = 2,
    radius_top: float = 0.35,
    radius_bottom: float | None = None,
    pitch_x: float = 1.0,
    pitch_y: float = 1.0,
) -> Domain:
    """Disks on a Cartesian grid, ``columns`` wide and ``rows`` high.

    Row ``i`` (from the top) has centers ``((j - 1) * pitch_x, y_i)`` for
    ``j = 1..columns``, with the rows centered on ``y = 0``: two rows sit at
    ``y = +-pitch_y / 2``, a single row at ``y = 1/2 * pitch_y``. The top row
    uses ``radius_top``; every other row uses ``radius_bottom``.
    """
    if columns < 1 or rows < 1:
        raise GeometryError("columns and rows must be positive")
    if radius_bottom is None:
        radius_bottom = radius_top
    if rows == 1:
        ys = [0.5 * pitch_y]
    else:
        ys = [(0.5 * (rows - 1) - i) * pitch_y for i in range(rows)]
    curves = []
    for i, y in enumerate(ys):
        r = radius_top if i == 0 else radius_bottom
        for j in range(columns):
            curves.append(circle((j * pitch_x, y), r))
    return Domain(tuple(curves))
