"""Post-selected Gaussian pointer: wavefunction, moments, and regimes.

The polarization qubit is prepared in an equal superposition, entangled with
the transverse beam coordinate by the plate (translations ``gamma_common +/-
gamma``, relative phase ``phi``, optional relative momentum boost ``k``), and
projected onto a post-selection polarizer.  Everything observable about the
surviving pointer follows from three numbers per configuration: the
post-selection probability, the position expectation value, and the sampled
amplitude profile.

Closed forms here use the dimensionless attenuation exponent
``E = ((k sigma)^2 + (gamma/sigma)^2) / 2``.  The initial pointer amplitude
is the unit-norm Gaussian ``(2 pi sigma^2)^(-1/4) exp(-z^2 / 4 sigma^2)``,
and the boost phase is referenced to the common translated beam center, so
the closed forms and the sampled wavefunction agree identically.  A global
phase of the post-selected state is dropped throughout.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from .errors import DegeneratePostSelection, GridTooCoarseError, SingularSelectionError
from .optics import BeamSpec, InteractionParams

if TYPE_CHECKING:  # pragma: no cover - annotation only
    from .oracle import GridRequest

_QUARTER_PI = math.pi / 4

#: Default probability floor guarding the removable 0/0 at the exact dark port.
P_FLOOR_DEFAULT = 1e-12

#: Auto grids extend this many pointer widths past the displaced beam centers.
GRID_WIDTHS = 12.0

#: Minimum auto sample count (power of two).
MIN_SAMPLES = 16384

#: Grid spacing must stay below pi / (_NYQUIST_MARGIN * k) under boost k.
_NYQUIST_MARGIN = 10.0


class Regime(enum.Enum):
    """Post-selector convention.

    COHERENCY: analyzer near crossed with the preparation (beta = epsilon -
    pi/4); amplification happens where the rays exit in phase.
    ANTI_COHERENCY: analyzer near aligned (beta = epsilon + pi/4);
    amplification happens where the rays exit pi out of phase.
    """

    COHERENCY = "coherency"
    ANTI_COHERENCY = "anti_coherency"


class RegimeLabel(enum.Enum):
    WVA = "wva"
    INVERSE_WVA = "inverse_wva"
    INTERMEDIATE = "intermediate"
    STRONG = "strong"


@dataclass(frozen=True)
class SelectionSpec:
    """Post-selection deviation epsilon (rad) and polarizer convention."""

    epsilon: float
    regime: Regime = Regime.COHERENCY

    def __post_init__(self) -> None:
        if not -_QUARTER_PI < self.epsilon <= _QUARTER_PI:
            raise ValueError("epsilon in (-pi/4, pi/4]")

    @property
    def beta(self) -> float:
        """Analyzer angle to the horizontal implied by epsilon and regime."""
        if self.regime is Regime.COHERENCY:
            return self.epsilon - _QUARTER_PI
        return self.epsilon + _QUARTER_PI


@dataclass(frozen=True)
class BoostSpec:
    """Relative momentum boost strength as the dimensionless product k*sigma."""

    k_sigma: float = 0.0

    def __post_init__(self) -> None:
        if not (self.k_sigma >= 0.0 and math.isfinite(self.k_sigma)):
            raise ValueError("k_sigma >= 0 and finite")

    def wavenumber(self, beam: BeamSpec) -> float:
        """Boost wavevector k = k_sigma / sigma, rad/m."""
        return self.k_sigma / beam.sigma


@dataclass(frozen=True)
class RegimeThresholds:
    """Numeric meaning of the 'much smaller than' regime conditions.

    ``ratio`` is the separation factor required between scales, ``weak_cap``
    the hard cap on the larger of the compared quantities, and
    ``strong_gamma`` the gamma/sigma level past which the interaction itself
    is strong.
    """

    ratio: float = 10.0
    weak_cap: float = 0.1
    strong_gamma: float = 0.3


@dataclass(frozen=True, eq=False)
class PointerWavefunction:
    """Complex pointer amplitude sampled on a uniform grid.

    ``amplitudes[i]`` is the (non-normalized) post-selected amplitude at
    ``z_grid[i]``; its squared norm integrates to the post-selection
    probability.  Units of the amplitude are m^(-1/2).
    """

    grid_center: float
    grid_halfwidth: float
    sample_count: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if self.sample_count < 2:
            raise ValueError("sample_count >= 2")
        if not self.grid_halfwidth > 0:
            raise ValueError("grid_halfwidth > 0")
        if len(self.amplitudes) != self.sample_count:
            raise ValueError("amplitudes length must equal sample_count")

    @property
    def spacing(self) -> float:
        return 2.0 * self.grid_halfwidth / (self.sample_count - 1)

    @property
    def z_grid(self) -> np.ndarray:
        return np.linspace(
            self.grid_center - self.grid_halfwidth,
            self.grid_center + self.grid_halfwidth,
            self.sample_count,
        )


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------

def _attenuation_exponent(gamma: float, sigma: float, k_sigma: float) -> float:
    x = gamma / sigma
    return 0.5 * (k_sigma * k_sigma + x * x)


def _two_p(epsilon: float, phi: float, e_exp: float, regime: Regime) -> float:
    """Twice the post-selection probability, in a cancellation-safe form.

    The naive ``1 -/+ cos(2 eps) cos(phi) exp(-E)`` loses all precision near
    the dark port; the split below keeps every term non-negative there.
    """
    c2 = math.cos(2.0 * epsilon)
    cphi = math.cos(phi)
    half_minus = epsilon - 0.5 * phi
    half_plus = epsilon + 0.5 * phi
    if regime is Regime.COHERENCY:
        # 1 - c2*cphi*e^-E = [sin^2(eps-phi/2) + sin^2(eps+phi/2)] - c2*cphi*expm1(-E)
        base = math.sin(half_minus) ** 2 + math.sin(half_plus) ** 2
        return base - c2 * cphi * math.expm1(-e_exp)
    base = math.cos(half_minus) ** 2 + math.cos(half_plus) ** 2
    return base + c2 * cphi * math.expm1(-e_exp)


def _pointer_core(
    gamma: float,
    phi: float,
    sigma: float,
    k_sigma: float,
    epsilon: float,
    regime: Regime,
) -> tuple[float, float]:
    """Return (2P, numerator) of the pointer statistics.

    The position expectation is ``gamma_common + sign * numerator / (2P)``
    with sign +1 for COHERENCY and -1 for ANTI_COHERENCY.
    """
    e_exp = _attenuation_exponent(gamma, sigma, k_sigma)
    exp_me = math.exp(-e_exp)
    c2 = math.cos(2.0 * epsilon)
    s2 = math.sin(2.0 * epsilon)
    k = k_sigma / sigma
    numerator = gamma * s2 + k * sigma * sigma * c2 * math.sin(phi) * exp_me
    two_p = _two_p(epsilon, phi, e_exp, regime)
    return two_p, numerator


def postselection_probability(
    ip: InteractionParams,
    sel: SelectionSpec,
    beam: BeamSpec,
    boost: BoostSpec,
) -> float:
    """Probability that a photon survives the post-selector, in [0, 1]."""
    two_p, _ = _pointer_core(
        ip.gamma, ip.phi, beam.sigma, boost.k_sigma, sel.epsilon, sel.regime
    )
    return min(max(0.5 * two_p, 0.0), 1.0)


def expectation_z(
    ip: InteractionParams,
    sel: SelectionSpec,
    beam: BeamSpec,
    boost: BoostSpec,
    p_floor: float = P_FLOOR_DEFAULT,
) -> float:
    """Exact position expectation value of the post-selected pointer, meters.

    Raises DegeneratePostSelection when the survival probability falls below
    ``p_floor`` and the mean is no longer well conditioned.
    """
    two_p, numerator = _pointer_core(
        ip.gamma, ip.phi, beam.sigma, boost.k_sigma, sel.epsilon, sel.regime
    )
    if 0.5 * two_p < p_floor:
        raise DegeneratePostSelection(
            f"post-selection probability {0.5 * two_p:.3e} below floor {p_floor:.3e}"
        )
    shift = numerator / two_p
    if sel.regime is Regime.COHERENCY:
        return ip.gamma_common + shift
    return ip.gamma_common - shift


def weak_value(sel: SelectionSpec) -> float:
    """Weak value of the polarization operator: +/- cot(epsilon)."""
    if sel.epsilon == 0.0:
        raise SingularSelectionError("weak value undefined at epsilon = 0")
    cot = math.cos(sel.epsilon) / math.sin(sel.epsilon)
    return cot if sel.regime is Regime.COHERENCY else -cot


def wva_prediction(ip: InteractionParams, sel: SelectionSpec) -> float:
    """Weak-value-theory pointer position: gamma_common + gamma * A_w."""
    return ip.gamma_common + ip.gamma * weak_value(sel)


@dataclass(frozen=True)
class InverseWvaShift:
    """Both printed forms of the boost-dominated pointer shift (meters).

    ``exact`` is the epsilon = 0 reduction of the full expectation value;
    ``small_phase`` additionally linearizes in the (wrapped) phase.
    """

    exact: float
    small_phase: float


def inverse_wva_prediction(
    ip: InteractionParams,
    beam: BeamSpec,
    boost: BoostSpec,
) -> InverseWvaShift:
    """Pointer shift relative to gamma_common in the inverse-WVA limit.

    Assumes crossed polarizers (epsilon = 0).  The phase is reduced to its
    principal value in (-pi, pi] before the small-phase form is applied,
    since near a coherency point the accumulated phase is a large multiple
    of 2 pi while only the deviation matters.
    """
    sigma = beam.sigma
    k_sigma = boost.k_sigma
    phi_wrapped = math.atan2(math.sin(ip.phi), math.cos(ip.phi))
    if k_sigma == 0.0 and phi_wrapped == 0.0:
        raise DegeneratePostSelection(
            "inverse-WVA shift undefined at k_sigma = 0 with zero phase"
        )
    if k_sigma == 0.0:
        return InverseWvaShift(exact=0.0, small_phase=0.0)
    k = k_sigma / sigma
    e_exp = _attenuation_exponent(ip.gamma, sigma, k_sigma)
    exact = k * sigma * sigma * math.sin(ip.phi) / (math.exp(e_exp) - math.cos(ip.phi))
    ratio = ip.gamma / (k * sigma * sigma)
    small = 2.0 * phi_wrapped / (k * (1.0 + ratio * ratio))
    return InverseWvaShift(exact=exact, small_phase=small)


def classify_regime(
    ip: InteractionParams,
    sel: SelectionSpec,
    beam: BeamSpec,
    boost: BoostSpec,
    thresholds: RegimeThresholds = RegimeThresholds(),
) -> RegimeLabel:
    """Deterministic regime label from the scale hierarchy of the inputs.

    WVA requires gamma/sigma << epsilon << 1 with negligible boost;
    INVERSE_WVA requires epsilon << k sigma << 1; a gamma/sigma beyond
    ``strong_gamma`` is STRONG regardless; everything else is INTERMEDIATE.
    The checks run in that order, which resolves the measure-zero overlaps.
    """
    x = abs(ip.gamma) / beam.sigma
    eps = abs(sel.epsilon)
    ks = boost.k_sigma
    r = thresholds.ratio
    if x <= eps / r and eps <= thresholds.weak_cap and ks <= eps / r:
        return RegimeLabel.WVA
    if eps <= ks / r and ks <= thresholds.weak_cap:
        return RegimeLabel.INVERSE_WVA
    if x > thresholds.strong_gamma:
        return RegimeLabel.STRONG
    return RegimeLabel.INTERMEDIATE


# ---------------------------------------------------------------------------
# sampled wavefunction
# ---------------------------------------------------------------------------

def auto_sample_count(halfwidth: float, k: float) -> int:
    """Sample count for a grid of the given halfwidth under boost wavevector k.

    max(16384, ceil(20 * halfwidth * k / pi)), rounded up to a power of two;
    guarantees spacing <= pi / (10 k).
    """
    need = max(MIN_SAMPLES, math.ceil(2.0 * _NYQUIST_MARGIN * halfwidth * k / math.pi))
    return 1 << (need - 1).bit_length()


def _auto_halfwidth(ip: InteractionParams, beam: BeamSpec) -> float:
    return abs(ip.gamma) + GRID_WIDTHS * beam.sigma


def _amplitudes_on(
    ip: InteractionParams,
    sel: SelectionSpec,
    beam: BeamSpec,
    boost: BoostSpec,
    z: np.ndarray,
) -> np.ndarray:
    """Evaluate the post-selected amplitude at arbitrary positions z."""
    sigma = beam.sigma
    beta = sel.beta
    k = boost.wavenumber(beam)
    u = z - ip.gamma_common
    norm = (2.0 * math.pi * sigma * sigma) ** -0.25
    g_plus = norm * np.exp(-((u - ip.gamma) ** 2) / (4.0 * sigma * sigma))
    g_minus = norm * np.exp(-((u + ip.gamma) ** 2) / (4.0 * sigma * sigma))
    boost_phase = np.exp(0.5j * k * u)
    h_branch = math.cos(beta) * boost_phase * g_plus
    v_branch = math.sin(beta) * np.conj(boost_phase) * complex(math.cos(ip.phi), -math.sin(ip.phi)) * g_minus
    return (h_branch + v_branch) / math.sqrt(2.0)


def final_wavefunction(
    ip: InteractionParams,
    sel: SelectionSpec,
    beam: BeamSpec,
    boost: BoostSpec,
    grid: "GridRequest | None" = None,
) -> PointerWavefunction:
    """Sample the post-selected pointer amplitude on a uniform grid.

    With ``grid=None`` (or zero fields) the grid is centered on the common
    shift with halfwidth ``|gamma| + 12 sigma`` and an automatic sample
    count.  An explicit grid must cover that interval and resolve the boost
    oscillation (spacing <= pi / (10 k)); otherwise GridTooCoarseError.
    """
    k = boost.wavenumber(beam)
    required_hw = _auto_halfwidth(ip, beam)
    if grid is None:
        center = ip.gamma_common
        halfwidth = required_hw
        count = auto_sample_count(halfwidth, k)
    else:
        center = grid.center
        halfwidth = grid.halfwidth if grid.halfwidth > 0 else required_hw
        count = grid.sample_count if grid.sample_count > 0 else auto_sample_count(halfwidth, k)
        slack = 1e-9 * beam.sigma
        lo_req = ip.gamma_common - required_hw
        hi_req = ip.gamma_common + required_hw
        if center - halfwidth > lo_req + slack or center + halfwidth < hi_req - slack:
            raise GridTooCoarseError(
                "grid does not cover the displaced beam: need "
                f"[{lo_req:.6e}, {hi_req:.6e}]"
            )
    if count < 2:
        raise GridTooCoarseError("sample_count >= 2 required")
    spacing = 2.0 * halfwidth / (count - 1)
    if k > 0.0 and spacing > math.pi / (_NYQUIST_MARGIN * k) * (1.0 + 1e-12):
        raise GridTooCoarseError(
            f"spacing {spacing:.3e} m underresolves boost oscillation; "
            f"need <= {math.pi / (_NYQUIST_MARGIN * k):.3e} m"
        )
    z = np.linspace(center - halfwidth, center + halfwidth, count)
    return PointerWavefunction(
        grid_center=center,
        grid_halfwidth=halfwidth,
        sample_count=count,
        amplitudes=_amplitudes_on(ip, sel, beam, boost, z),
    )
