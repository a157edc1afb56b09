"""Friis, probabilistic two-ray, knife-edge diffraction, and the blended total."""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .environment import Environment, expected_building_count, expected_max_height
from .geometry import Carrier, LinkGeometry
from .los import LosQuery, ground_reflection_probability, plos

#: Validity floor of the single-edge diffraction approximation.
KED_VALID_MIN = -0.78
#: Losses above this are clamped (two-ray interference nulls are unbounded).
DEFAULT_CEILING_DB = 300.0


@dataclass(frozen=True)
class PathLossBreakdown:
    """Per-query record of the blended path loss and its ingredients."""

    p_los: float
    pl_los_db: float
    pl_nlos_db: float
    total_db: float
    n_buildings: int
    e_obstacle_height: float


def friis_db(d_los: float, wavelength: float, gain: float = 1.0) -> float:
    """Free-space loss 20 log10(4 pi d / lambda) - 10 log10(G), in dB."""
    if d_los <= 0:
        raise ValueError("d_los must be positive")
    if wavelength <= 0:
        raise ValueError("wavelength must be positive")
    if gain <= 0:
        raise ValueError("antenna gain must be positive")
    return 20.0 * math.log10(4.0 * math.pi * d_los / wavelength) - 10.0 * math.log10(gain)


def phase_difference(geom: LinkGeometry, wavelength: float) -> float:
    """Phase lag of the ground-reflected ray relative to the direct ray (rad)."""
    return (2.0 * math.pi / wavelength) * (
        math.hypot(geom.h_t + geom.h_r, geom.d) - math.hypot(geom.h_t - geom.h_r, geom.d)
    )


def two_ray_los_db(
    geom: LinkGeometry,
    env: Environment,
    carrier: Carrier,
    gain: float = 1.0,
    *,
    refl_coeff: float = 1.0,
    ceiling_db: float = DEFAULT_CEILING_DB,
) -> float:
    """LOS path loss with a probability-weighted ground reflection, in dB.

    The reflected ray enters as an amplitude-weighted phasor:

        -10 log10( G (lambda / 4 pi d_los)^2 |1 - P_GR * Gamma * e^{j dphi}|^2 )

    with P_GR from ``ground_reflection_probability`` and Gamma = 1 by
    default.  Interference nulls make the loss unbounded; anything above
    ``ceiling_db`` is clamped there with a warning.
    """
    lam = carrier.wavelength
    dphi = phase_difference(geom, lam)
    p_gr = ground_reflection_probability(geom, env, carrier)
    factor = abs(1.0 - p_gr * refl_coeff * cmath.exp(1j * dphi)) ** 2
    base = friis_db(geom.d_los, lam, gain)
    if factor == 0.0:
        warnings.warn(
            f"two-ray interference null at d={geom.d} m; loss clamped to {ceiling_db} dB",
            RuntimeWarning,
            stacklevel=2,
        )
        return ceiling_db
    loss = base - 10.0 * math.log10(factor)
    if loss > ceiling_db:
        warnings.warn(
            f"two-ray loss {loss:.1f} dB near interference null; clamped to {ceiling_db} dB",
            RuntimeWarning,
            stacklevel=2,
        )
        return ceiling_db
    return loss


def diffraction_parameter(h: float, d: float, wavelength: float) -> float:
    """Lower-bound Fresnel-Kirchhoff parameter v = h sqrt(8 / (lambda d)).

    The bound replaces d1 d2 by its maximum (d/2)^2, so the result only
    needs the obstacle's height h above the ray and the span d.
    """
    if d <= 0:
        raise ValueError("d must be positive")
    if wavelength <= 0:
        raise ValueError("wavelength must be positive")
    return h * math.sqrt(8.0 / (wavelength * d))


def ked_loss_db(v):
    """Single knife-edge diffraction loss in dB, valid for v >= -0.78.

    6.9 + 20 log10( sqrt((v-0.1)^2 + 1) + v - 0.1 ); below the validity
    floor the edge is clear of the ray and the loss is taken as 0 dB.
    Accepts scalars or arrays.
    """
    v_arr = np.asarray(v, dtype=float)
    below = v_arr < KED_VALID_MIN
    t = np.where(below, 1.0, np.sqrt((v_arr - 0.1) ** 2 + 1.0) + v_arr - 0.1)
    loss = np.where(below, 0.0, 6.9 + 20.0 * np.log10(t))
    return float(loss) if np.ndim(v) == 0 else loss


def building_count(geom: LinkGeometry, env: Environment, carrier: Carrier) -> int:
    """Discrete building count for the order statistics: max(1, round(E(b)))."""
    return max(1, round(expected_building_count(geom, carrier.wavelength, env)))


def expected_obstacle_height(geom: LinkGeometry, env: Environment, n_buildings: int) -> float:
    """Mean height of the tallest building above the direct ray, in metres.

    The ray height averages to (h_t + h_r)/2 over a uniform obstacle
    position, so this is the truncated max-height expectation minus that
    mean; it is negative whenever buildings typically stay below the ray.
    """
    if n_buildings < 1:
        raise ValueError("n_buildings must be >= 1")
    if env.sigma_h == 0:
        tallest = 0.0
    else:
        tallest = expected_max_height(n_buildings, env.sigma_h, min(geom.h_t, geom.h_r))
    return tallest - 0.5 * (geom.h_t + geom.h_r)


def nlos_loss_db(
    geom: LinkGeometry, env: Environment, carrier: Carrier, gain: float = 1.0
) -> float:
    """NLOS path loss: free-space loss plus the knife-edge diffraction loss."""
    n = building_count(geom, env, carrier)
    e_h = expected_obstacle_height(geom, env, n)
    v = diffraction_parameter(e_h, geom.d, carrier.wavelength)
    return friis_db(geom.d_los, carrier.wavelength, gain) + ked_loss_db(v)


def total_loss(
    geom: LinkGeometry,
    env: Environment,
    carrier: Carrier,
    gain: float = 1.0,
    *,
    blend: str = "db",
    refl_coeff: float = 1.0,
    ceiling_db: float = DEFAULT_CEILING_DB,
) -> PathLossBreakdown:
    """Blend the LOS and NLOS losses by the link-state probability.

    blend="db" mixes the dB values (the default); blend="linear" mixes the
    linear-power losses and converts back, for sensitivity analysis.
    """
    p = plos(LosQuery(geom=geom, env=env, carrier=carrier))
    pl_los = two_ray_los_db(
        geom, env, carrier, gain, refl_coeff=refl_coeff, ceiling_db=ceiling_db
    )
    n = building_count(geom, env, carrier)
    e_h = expected_obstacle_height(geom, env, n)
    v = diffraction_parameter(e_h, geom.d, carrier.wavelength)
    pl_nlos = friis_db(geom.d_los, carrier.wavelength, gain) + ked_loss_db(v)

    if blend == "db":
        total = p * pl_los + (1.0 - p) * pl_nlos
    elif blend == "linear":
        total = -10.0 * math.log10(
            p * 10.0 ** (-pl_los / 10.0) + (1.0 - p) * 10.0 ** (-pl_nlos / 10.0)
        )
    else:
        raise ValueError(f"unknown blend {blend!r}; expected 'db' or 'linear'")

    return PathLossBreakdown(
        p_los=p,
        pl_los_db=pl_los,
        pl_nlos_db=pl_nlos,
        total_db=total,
        n_buildings=n,
        e_obstacle_height=e_h,
    )
