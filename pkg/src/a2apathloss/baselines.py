"""Reference models for comparison: 3GPP UMi LOS probability and simple losses."""

from __future__ import annotations

import math
from enum import Enum

from .environment import Environment
from .geometry import Carrier, LinkGeometry
from .pathloss import friis_db, two_ray_los_db

#: 3GPP urban-micro aerial-UE height validity limit.
UMI_MAX_UE_HEIGHT = 300.0
UMI_MIN_UE_HEIGHT = 1.5


class BaselineKind(Enum):
    UMI_LOS_3GPP = "3gpp-umi-los"
    FREE_SPACE = "free-space"
    LOS_ONLY = "los-only"


class UnsupportedModelError(ValueError):
    """Requested a baseline quantity the model set does not define."""


def plos_3gpp_umi(d: float, h_r: float) -> float:
    """3GPP urban-micro LOS probability for an aerial UE at height h_r.

    1 for d <= d_0, else d_0/d + exp(-d/p_1)(1 - d_0/d), with
    d_0 = max(18, 294.05 log10(h_r) - 432.94) and
    p_1 = 233.98 log10(h_r) - 0.95.
    """
    if d <= 0:
        raise ValueError("distance must be positive")
    if not UMI_MIN_UE_HEIGHT <= h_r <= UMI_MAX_UE_HEIGHT:
        raise ValueError(
            f"UE height {h_r} m outside the UMi validity range "
            f"[{UMI_MIN_UE_HEIGHT}, {UMI_MAX_UE_HEIGHT}] m (300 m aerial limit)"
        )
    d_0 = max(18.0, 294.05 * math.log10(h_r) - 432.94)
    if d <= d_0:
        return 1.0
    p_1 = 233.98 * math.log10(h_r) - 0.95
    return d_0 / d + math.exp(-d / p_1) * (1.0 - d_0 / d)


def baseline_loss_db(
    kind: BaselineKind,
    geom: LinkGeometry,
    env: Environment,
    carrier: Carrier,
    gain: float = 1.0,
) -> float:
    """Path loss of a reference model, in dB.

    free-space is the Friis loss at the 3D distance; los-only is the
    probabilistic two-ray loss with the LOS state forced (blend weight 1).
    The 3GPP comparison defines only a LOS probability, so requesting its
    path loss raises ``UnsupportedModelError``.
    """
    if kind is BaselineKind.FREE_SPACE:
        return friis_db(geom.d_los, carrier.wavelength, gain)
    if kind is BaselineKind.LOS_ONLY:
        return two_ray_los_db(geom, env, carrier, gain)
    if kind is BaselineKind.UMI_LOS_3GPP:
        raise UnsupportedModelError(
            "the 3GPP UMi baseline defines a LOS probability only, not a path loss"
        )
    raise ValueError(f"unknown baseline kind: {kind!r}")
