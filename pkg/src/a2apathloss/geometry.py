"""Fresnel-zone geometry for an elevated point-to-point radio link."""

from __future__ import annotations

import math
from dataclasses import dataclass

SPEED_OF_LIGHT = 299_792_458.0  # m/s


@dataclass(frozen=True)
class LinkGeometry:
    """Terminal heights and horizontal separation, all in metres.

    ``h_t`` and ``h_r`` are the transmitter and receiver heights above
    ground; ``d`` is the horizontal ground distance between them.
    """

    h_t: float
    h_r: float
    d: float

    def __post_init__(self) -> None:
        if self.h_t < 0 or self.h_r < 0:
            raise ValueError("terminal heights must be non-negative")
        if self.d <= 0:
            raise ValueError("horizontal separation d must be positive")

    @property
    def d_los(self) -> float:
        """Direct-ray (3D) distance between the terminals."""
        return math.hypot(self.d, self.h_t - self.h_r)


@dataclass(frozen=True)
class Carrier:
    """Carrier frequency in Hz.  Wavelength is always derived, never stored."""

    frequency: float

    def __post_init__(self) -> None:
        if self.frequency <= 0:
            raise ValueError("carrier frequency must be positive")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.frequency


def fresnel_radius(n: int, d1: float, d2: float, wavelength: float) -> float:
    """Radius of the nth Fresnel zone at distances d1, d2 from the terminals.

    sqrt(n * lambda * d1 * d2 / (d1 + d2)); symmetric in (d1, d2) and
    increasing as sqrt(n).
    """
    if n < 1:
        raise ValueError("Fresnel zone index must be >= 1")
    if d1 <= 0 or d2 <= 0 or wavelength <= 0:
        raise ValueError("d1, d2 and wavelength must be positive")
    return math.sqrt(n * wavelength * d1 * d2 / (d1 + d2))


def fresnel_max_radius(n: int, d_los: float, wavelength: float) -> float:
    """Minor semi-axis of the nth Fresnel ellipsoid: sqrt(n lambda d_los) / 2.

    Equals ``fresnel_radius`` evaluated at the path midpoint d1 = d2 = d_los/2.
    """
    if n < 1:
        raise ValueError("Fresnel zone index must be >= 1")
    if d_los <= 0 or wavelength <= 0:
        raise ValueError("d_los and wavelength must be positive")
    return math.sqrt(n * wavelength * d_los) / 2.0


def fresnel_footprint_area(geom: LinkGeometry, wavelength: float) -> float:
    """Ground-projection area of the first Fresnel zone.

    Approximated as the half-ellipse product (pi * d / 2) * r1_max, with the
    horizontal span d as the major extent and the minor semi-axis from the
    3D path length.
    """
    return (math.pi * geom.d / 2.0) * fresnel_max_radius(1, geom.d_los, wavelength)


def critical_height(geom: LinkGeometry, s: float) -> float:
    """Height of the direct ray at normalized position s, measured from the Rx.

    s = 0 is at the receiver, s = 1 at the transmitter; a building at s just
    touches the ray when its height equals s*h_t + (1-s)*h_r.
    """
    if not 0.0 <= s <= 1.0:
        raise ValueError("normalized position s must lie in [0, 1]")
    return s * geom.h_t + (1.0 - s) * geom.h_r
