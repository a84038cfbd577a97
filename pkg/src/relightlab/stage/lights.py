"""Directional light rig on a Fibonacci sphere.

Each light stands in for an equal-area patch of the sphere, so every
light carries the same solid angle 4*pi/N. Directions point from the
head toward the light (the direction light travels is the negation).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def fibonacci_directions(count: int) -> np.ndarray:
    """Near-uniform unit directions on the full sphere, (N, 3) float64.

    Golden-angle spiral with the linear coordinate along +Y so the rig is
    symmetric about the world up axis.
    """
    i = np.arange(count, dtype=np.float64)
    golden = np.pi * (3.0 - np.sqrt(5.0))
    y = 1.0 - (2.0 * i + 1.0) / count
    r = np.sqrt(np.maximum(0.0, 1.0 - y * y))
    theta = golden * i
    return np.stack([r * np.cos(theta), y, r * np.sin(theta)], axis=-1)


@dataclass(frozen=True)
class LightRig:
    directions: np.ndarray  # (N, 3) unit vectors, head -> light
    solid_angles: np.ndarray  # (N,) steradians, sums to 4*pi

    @property
    def count(self) -> int:
        return len(self.directions)

    @staticmethod
    def fibonacci(count: int) -> "LightRig":
        dirs = fibonacci_directions(count)
        omega = np.full(count, 4.0 * np.pi / count)
        return LightRig(directions=dirs, solid_angles=omega)

    def to_dict(self) -> dict:
        return {
            "directions": self.directions.tolist(),
            "solid_angles": self.solid_angles.tolist(),
        }

    @staticmethod
    def from_dict(d: dict) -> "LightRig":
        return LightRig(
            directions=np.asarray(d["directions"], dtype=np.float64),
            solid_angles=np.asarray(d["solid_angles"], dtype=np.float64),
        )
