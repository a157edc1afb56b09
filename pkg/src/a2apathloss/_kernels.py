"""Hot per-trial blockage kernels: numba-jitted with a pure-numpy fallback.

The numpy path is selected when the environment variable
``A2APATHLOSS_NO_NUMBA`` is set (to any non-empty value) or when numba is
not importable.  Both paths consume the same pre-drawn random arrays and
apply identical comparisons, so switching backends does not change results.
Trials are laid out CSR-style: trial i owns the flat slice
``[offsets[i], offsets[i+1])`` of the position/height arrays, with
``offsets = cumsum(counts)``.
"""

from __future__ import annotations

import os

import numpy as np

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised via the env-flag fallback
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not os.environ.get("A2APATHLOSS_NO_NUMBA")


def backend() -> str:
    """Active kernel backend, 'numba' or 'numpy'."""
    return "numba" if USE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# pure-numpy implementations


def count_clear_trials_numpy(counts, s, h, h_t, h_r) -> int:
    """Number of trials whose buildings all stay below the direct ray."""
    n = counts.size
    if s.size == 0:
        return int(n)
    ids = np.repeat(np.arange(n), counts)
    blocked = h >= h_r + s * (h_t - h_r)
    per_trial = np.bincount(ids[blocked], minlength=n)
    return int(np.count_nonzero(per_trial == 0))


def trial_blockage_numpy(counts, s, h, h_t, h_r, s_refl):
    """Per-trial direct-ray max excess height and reflected-ray blockage.

    Returns (direct_excess, refl_blocked): direct_excess[i] is the largest
    h - ray_height over trial i's buildings (-inf when the trial has none;
    the direct ray is blocked iff it is >= 0).  refl_blocked[i] is True when
    any building reaches the reflected ray on either of its sub-segments;
    s_refl is the reflection point in the same Rx-anchored normalized
    coordinate as the building positions.
    """
    n = counts.size
    direct_excess = np.full(n, -np.inf)
    refl_blocked = np.zeros(n, dtype=bool)
    if s.size == 0:
        return direct_excess, refl_blocked
    ids = np.repeat(np.arange(n), counts)
    excess = h - (h_r + s * (h_t - h_r))
    np.maximum.at(direct_excess, ids, excess)

    refl_height = _reflected_ray_height_numpy(s, h_t, h_r, s_refl)
    hit = np.bincount(ids[h >= refl_height], minlength=n)
    refl_blocked = hit > 0
    return direct_excess, refl_blocked


def _reflected_ray_height_numpy(s, h_t, h_r, s_refl):
    # Descends from the Rx (height h_r at s=0) to the ground at s_refl, then
    # climbs to the Tx (height h_t at s=1).  Degenerate endpoints (terminal
    # on the ground) collapse one segment to a point.
    left = np.zeros_like(s)
    if s_refl > 0.0:
        left = h_r * (s_refl - s) / s_refl
    right = np.zeros_like(s)
    if s_refl < 1.0:
        right = h_t * (s - s_refl) / (1.0 - s_refl)
    return np.where(s <= s_refl, left, right)


# ---------------------------------------------------------------------------
# numba implementations (compiled lazily on first use)

if HAVE_NUMBA:

    @numba.njit(cache=True)
    def count_clear_trials_numba(counts, s, h, h_t, h_r):  # pragma: no cover
        n = counts.size
        clear = 0
        k = 0
        for i in range(n):
            ok = True
            for _ in range(counts[i]):
                if h[k] >= h_r + s[k] * (h_t - h_r):
                    ok = False
                k += 1
            if ok:
                clear += 1
        return clear

    @numba.njit(cache=True)
    def trial_blockage_numba(counts, s, h, h_t, h_r, s_refl):  # pragma: no cover
        n = counts.size
        direct_excess = np.full(n, -np.inf)
        refl_blocked = np.zeros(n, dtype=np.bool_)
        k = 0
        for i in range(n):
            for _ in range(counts[i]):
                ex = h[k] - (h_r + s[k] * (h_t - h_r))
                if ex > direct_excess[i]:
                    direct_excess[i] = ex
                if s[k] <= s_refl:
                    ray = h_r * (s_refl - s[k]) / s_refl if s_refl > 0.0 else 0.0
                else:
                    ray = h_t * (s[k] - s_refl) / (1.0 - s_refl) if s_refl < 1.0 else 0.0
                if h[k] >= ray:
                    refl_blocked[i] = True
                k += 1
        return direct_excess, refl_blocked


# ---------------------------------------------------------------------------
# dispatchers


def count_clear_trials(counts, s, h, h_t, h_r) -> int:
    if USE_NUMBA:
        return int(count_clear_trials_numba(counts, s, h, h_t, h_r))
    return count_clear_trials_numpy(counts, s, h, h_t, h_r)


def trial_blockage(counts, s, h, h_t, h_r, s_refl):
    if USE_NUMBA:
        return trial_blockage_numba(counts, s, h, h_t, h_r, s_refl)
    return trial_blockage_numpy(counts, s, h, h_t, h_r, s_refl)
