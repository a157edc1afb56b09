"""Closed-form line-of-sight probability over the built-up area."""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.special import erf

from .environment import Environment, expected_building_count
from .geometry import Carrier, LinkGeometry

# Below this height difference the equal-height branch is used; the two
# branches agree analytically in the limit, the threshold only avoids 0/0.
EQUAL_HEIGHT_EPS = 1e-9  # m


@dataclass(frozen=True)
class LosQuery:
    """Bundle of link geometry, environment and carrier for a LOS evaluation."""

    geom: LinkGeometry
    env: Environment
    carrier: Carrier


def plos_single_building(h_t: float, h_r: float, sigma_h: float) -> float:
    """Probability that one building leaves the direct ray unobstructed.

    The building sits at a uniform position along the path with a
    Rayleigh(sigma_h) height; it clears the ray when its height stays below
    the ray height at its position.  For equal terminal heights H this is
    1 - exp(-H^2 / 2 sigma_h^2); otherwise

        1 - sqrt(pi/2) * sigma_h
              * (erf(h_t / sqrt(2) sigma_h) - erf(h_r / sqrt(2) sigma_h))
              / (h_t - h_r)

    Symmetric in (h_t, h_r); equals 1 for sigma_h = 0 (no buildings to hit).
    """
    if h_t < 0 or h_r < 0:
        raise ValueError("terminal heights must be non-negative")
    if sigma_h < 0:
        raise ValueError("sigma_h must be non-negative")
    if sigma_h == 0:
        return 1.0
    if abs(h_t - h_r) < EQUAL_HEIGHT_EPS:
        h_mid = 0.5 * (h_t + h_r)
        return 1.0 - math.exp(-(h_mid * h_mid) / (2.0 * sigma_h**2))
    scale = math.sqrt(2.0) * sigma_h
    h_d = (erf(h_t / scale) - erf(h_r / scale)) / (h_t - h_r)
    return 1.0 - math.sqrt(math.pi / 2.0) * sigma_h * h_d


def plos(query: LosQuery) -> float:
    """LOS probability of the link: single-building term raised to E(b).

    E(b) is the expected building count in the first-Fresnel footprint and
    is used as a real-valued exponent (no rounding).  E(b) = 0 gives 1
    regardless of the single-building term (0**0 == 1: nothing to block).
    """
    p_single = plos_single_building(query.geom.h_t, query.geom.h_r, query.env.sigma_h)
    e_b = expected_building_count(query.geom, query.carrier.wavelength, query.env)
    return p_single**e_b


def ground_reflection_probability(geom: LinkGeometry, env: Environment, carrier: Carrier) -> float:
    """Probability that the ground-reflected ray is clear on both sub-paths.

    The reflection point splits the span at d_t = d h_t/(h_t+h_r) from the
    transmitter side; each sub-path is scored as an independent link with one
    terminal at ground level, with the building count recomputed from the
    sub-path's own footprint.  A zero-length sub-path has no footprint and
    contributes factor 1.
    """
    if geom.h_t + geom.h_r <= 0:
        raise ValueError("reflection point undefined for h_t = h_r = 0")
    d_t = geom.d * geom.h_t / (geom.h_t + geom.h_r)
    d_r = geom.d * geom.h_r / (geom.h_t + geom.h_r)
    prob = 1.0
    for d_sub, h_sub in ((d_t, geom.h_t), (d_r, geom.h_r)):
        if d_sub > 0.0:
            sub = LinkGeometry(h_t=h_sub, h_r=0.0, d=d_sub)
            prob *= plos(LosQuery(geom=sub, env=env, carrier=carrier))
    return prob
