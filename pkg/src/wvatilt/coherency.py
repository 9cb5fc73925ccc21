"""Enumeration of phase-matching incidence angles.

Coherency points are the angles where the two rays exit the plate in phase
(cos phi = 1, i.e. phi an integer multiple of 2 pi); anti-coherency points
are where they exit pi out of phase.  Because the retardation is strictly
monotone in theta for distinct indices, the points can be found exhaustively
by scanning the accumulated phase for cycle crossings and bisecting each
bracket.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import PointNotFoundError
from .optics import (
    CrystalSpec,
    classical_tilt_sensitivity,
    interaction_params,
    phase_shift,
    phase_slope,
)

_HALF_PI = math.pi / 2
_TWO_PI = 2.0 * math.pi

#: Bisection terminates when the bracket narrows below this width (rad).
#: Kept an order below the documented 1e-12 angle resolution so that rerun
#: and rescan perturbations stay inside the contract.
THETA_RESOLUTION = 1e-13

#: Smallest scan step (rad); the adaptive step never shrinks below this.
MIN_SCAN_STEP = 1e-5


class PointKind(enum.Enum):
    COHERENCY = "coherency"
    ANTI = "anti"


@dataclass(frozen=True)
class CoherencyPoint:
    """One phase-matching angle with its local optics quantities.

    ``index`` is the 1-based ordinal of the point counting every crossing
    above theta = 0 of the same kind, independently of the search range.
    ``phase_cycles`` is phi/(2 pi) at the point: an integer for COHERENCY
    points, half-odd for ANTI points (up to the bisection residual).
    """

    index: int
    kind: PointKind
    theta: float
    phase_cycles: float
    gamma_o: float
    gamma: float
    classical_slope: float
    phase_slope: float


def _cycles(crystal: CrystalSpec, k_o: float, theta: float) -> float:
    return phase_shift(crystal, k_o, theta) / _TWO_PI


def _level_offset(kind: PointKind) -> float:
    # COHERENCY: cycles crosses integers; ANTI: integers + 1/2.
    return 0.0 if kind is PointKind.COHERENCY else 0.5


def _scan_crossings(
    crystal: CrystalSpec,
    k_o: float,
    theta_max: float,
    kind: PointKind,
    max_step: float,
):
    """Yield (theta_lo, theta_hi, level) brackets for every crossing in (0, theta_max]."""
    offset = _level_offset(kind)
    theta_a = 0.0
    q_a = _cycles(crystal, k_o, theta_a) - offset
    while theta_a < theta_max:
        slope = abs(phase_slope(crystal, k_o, theta_a))
        # keep |d(phi)| <= pi/4 per step: quarter-cycle in q
        step = 0.25 * math.pi / slope if slope > 0 else max_step
        step = min(max(step, MIN_SCAN_STEP), max_step)
        theta_b = min(theta_a + step, theta_max)
        q_b = _cycles(crystal, k_o, theta_b) - offset
        # Safety: never let a step swallow more than half a cycle.
        while abs(q_b - q_a) >= 0.45 and theta_b - theta_a > MIN_SCAN_STEP:
            theta_b = theta_a + 0.5 * (theta_b - theta_a)
            q_b = _cycles(crystal, k_o, theta_b) - offset
        lo_q, hi_q = min(q_a, q_b), max(q_a, q_b)
        first = math.floor(lo_q) + 1
        level = first
        while level <= hi_q:
            # exclude a crossing exactly at theta_a (already reported)
            if q_a != level:
                yield theta_a, theta_b, level
            level += 1
        theta_a, q_a = theta_b, q_b


def _bisect(
    crystal: CrystalSpec,
    k_o: float,
    lo: float,
    hi: float,
    level: float,
    offset: float,
) -> float:
    f_lo = _cycles(crystal, k_o, lo) - offset - level
    while hi - lo > THETA_RESOLUTION:
        mid = 0.5 * (lo + hi)
        f_mid = _cycles(crystal, k_o, mid) - offset - level
        if f_mid == 0.0:
            return mid
        if (f_lo < 0.0) == (f_mid < 0.0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _point_at(
    crystal: CrystalSpec,
    k_o: float,
    theta: float,
    index: int,
    kind: PointKind,
) -> CoherencyPoint:
    ip = interaction_params(crystal, k_o, theta)
    return CoherencyPoint(
        index=index,
        kind=kind,
        theta=theta,
        phase_cycles=ip.phi / _TWO_PI,
        gamma_o=ip.gamma_common,
        gamma=ip.gamma,
        classical_slope=classical_tilt_sensitivity(crystal, theta),
        phase_slope=phase_slope(crystal, k_o, theta),
    )


def locate_points(
    crystal: CrystalSpec,
    k_o: float,
    theta_range: tuple[float, float],
    kind: PointKind = PointKind.COHERENCY,
    max_step: float = 0.02,
) -> list[CoherencyPoint]:
    """All phase-matching points of the given kind with theta in (lo, hi].

    The scan always starts at theta = 0 so that indices are global ordinals;
    points at or below ``lo`` are counted but not returned.  ``max_step``
    caps the adaptive scan step (halving it must not change any result).
    """
    lo, hi = theta_range
    if not (0.0 <= lo < hi < _HALF_PI):
        raise ValueError("theta_range must satisfy 0 <= lo < hi < pi/2")
    offset = _level_offset(kind)
    points: list[CoherencyPoint] = []
    index = 0
    for b_lo, b_hi, level in _scan_crossings(crystal, k_o, hi, kind, max_step):
        index += 1
        theta = _bisect(crystal, k_o, b_lo, b_hi, level, offset)
        if theta > lo:
            points.append(_point_at(crystal, k_o, theta, index, kind))
    return points


def nth_point(
    crystal: CrystalSpec,
    k_o: float,
    n: int,
    kind: PointKind = PointKind.COHERENCY,
    max_step: float = 0.02,
) -> CoherencyPoint:
    """The n-th (1-based, ascending theta) phase-matching point below pi/2."""
    if n < 1:
        raise ValueError("n >= 1")
    offset = _level_offset(kind)
    scan_hi = _HALF_PI * (1.0 - 1e-9)
    index = 0
    for b_lo, b_hi, level in _scan_crossings(crystal, k_o, scan_hi, kind, max_step):
        index += 1
        if index == n:
            theta = _bisect(crystal, k_o, b_lo, b_hi, level, offset)
            return _point_at(crystal, k_o, theta, index, kind)
    raise PointNotFoundError(
        f"only {index} {kind.value} points exist below pi/2; requested n={n}"
    )
