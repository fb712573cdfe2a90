"""Phasors, measurement frames and the tolerance predicates that binarize them."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Optional

TWO_PI = 2.0 * math.pi


def wrap_angle(theta: float) -> float:
    """Map an angle in radians onto (-pi, pi]."""
    r = math.remainder(theta, TWO_PI)
    if r <= -math.pi:
        r += TWO_PI
    return r


def angle_difference(a: float, b: float) -> float:
    """Absolute wrapped difference between two angles, in [0, pi]."""
    return abs(wrap_angle(a - b))


@dataclass(frozen=True)
class Phasor:
    """Magnitude in per-unit, angle in radians (normalized on construction)."""

    magnitude: float
    angle: float = 0.0

    def __post_init__(self):
        if not self.magnitude >= 0.0:
            raise ValueError(f"phasor magnitude must be non-negative, got {self.magnitude}")
        object.__setattr__(self, "magnitude", float(self.magnitude))
        object.__setattr__(self, "angle", wrap_angle(float(self.angle)))

    @classmethod
    def from_degrees(cls, magnitude: float, angle_deg: float) -> "Phasor":
        return cls(magnitude, math.radians(angle_deg))

    @classmethod
    def from_complex(cls, z: complex) -> "Phasor":
        return cls(abs(z), math.atan2(z.imag, z.real))

    @property
    def angle_deg(self) -> float:
        return math.degrees(self.angle)

    def to_complex(self) -> complex:
        return complex(self.magnitude * math.cos(self.angle), self.magnitude * math.sin(self.angle))

    def scaled(self, s: float) -> "Phasor":
        return Phasor(self.magnitude * s, self.angle)

    def rotated(self, theta: float) -> "Phasor":
        return Phasor(self.magnitude, self.angle + theta)


class ChannelKind(str, Enum):
    BUS_VOLTAGE = "bus_voltage"
    BRANCH_CURRENT = "branch_current"


@dataclass(frozen=True)
class MeasurementChannel:
    channel_id: str
    kind: ChannelKind
    target: str

    def __post_init__(self):
        object.__setattr__(self, "kind", ChannelKind(self.kind))


@dataclass(frozen=True)
class PmuFrame:
    """One reporting instant of a substation PMU: channel id -> phasor."""

    timestamp: int
    substation_id: str
    values: Mapping[str, Phasor] = field(default_factory=dict)
    frequency: Optional[float] = None


@dataclass(frozen=True)
class Thresholds:
    v_equal_mag_tol: float = 1e-3
    v_equal_ang_tol: float = 0.01
    v_energized_min: float = 0.5
    i_present_min: float = 0.01

    def __post_init__(self):
        for name in ("v_equal_mag_tol", "v_equal_ang_tol", "v_energized_min", "i_present_min"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")
        if not self.v_energized_min > self.v_equal_mag_tol:
            raise ValueError("v_energized_min must exceed v_equal_mag_tol")


DEFAULT_THRESHOLDS = Thresholds()


def phasor_equal(a: Phasor, b: Phasor, th: Thresholds = DEFAULT_THRESHOLDS) -> bool:
    # the 1.0 pu floor keeps the relative test meaningful on dead buses
    scale = max(a.magnitude, b.magnitude, 1.0)
    if abs(a.magnitude - b.magnitude) > th.v_equal_mag_tol * scale:
        return False
    return angle_difference(a.angle, b.angle) <= th.v_equal_ang_tol


def is_energized(v: Phasor, th: Thresholds = DEFAULT_THRESHOLDS) -> bool:
    return v.magnitude >= th.v_energized_min


def current_present(i: Phasor, th: Thresholds = DEFAULT_THRESHOLDS) -> bool:
    # A closed breaker on a no-load line reads as absent here; the threshold
    # cannot tell it apart from an open breaker.
    return i.magnitude >= th.i_present_min
