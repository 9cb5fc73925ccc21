"""Closed-form optics of a plane-parallel birefringent plate.

A uniaxial plate of thickness ``T`` with its optic axis perpendicular to the
plane of incidence splits a beam into ordinary and extraordinary rays that
exit parallel to the input beam but transversely displaced by ``a_o`` and
``a_e``.  The displacements, the relative phase retardation ``phi`` between
the rays, and the derived interaction strengths (common shift ``gamma_o``,
differential shift ``gamma``) are all smooth functions of the incidence
angle ``theta``.

Angles are radians, lengths are meters throughout; no unit conversion
happens inside this module.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import AngleDomainError

_HALF_PI = math.pi / 2


class PhaseForm(enum.Enum):
    """Retardation model for the plate.

    ``DIFFERENCE`` is the optical-path-difference retardation
    ``T k_o [sqrt(n_e^2 - s^2) - sqrt(n_o^2 - s^2)]`` (s = n_air sin(theta))
    and is the default used by every downstream computation.  ``RATIO``
    replaces the difference of the two radicals with their ratio minus one;
    it is kept only as a named alternative for side-by-side comparison and
    is not used by the rest of the package.
    """

    DIFFERENCE = "difference"
    RATIO = "ratio"


@dataclass(frozen=True)
class CrystalSpec:
    """Geometry and refractive indices of the birefringent plate.

    ``thickness`` is the plate thickness in meters.  Indices must keep both
    refraction radicands ``n^2 - (n_air sin theta)^2`` positive on
    [0, pi/2), which the invariant ``n > n_air >= 1`` guarantees.
    """

    thickness: float
    n_o: float
    n_e: float
    n_air: float = 1.0

    def __post_init__(self) -> None:
        if not self.thickness > 0:
            raise ValueError("T > 0")
        if not self.n_air >= 1:
            raise ValueError("n_air >= 1")
        if not self.n_o > self.n_air:
            raise ValueError("n_o > n_air >= 1")
        if not self.n_e > self.n_air:
            raise ValueError("n_e > n_air >= 1")
        if self.n_o == self.n_e:
            raise ValueError("n_o != n_e")


@dataclass(frozen=True)
class BeamSpec:
    """Laser vacuum wavenumber (rad/m) and Gaussian pointer width sigma (m).

    ``2 * sigma`` is the e^-2 intensity radius of the beam.
    """

    vacuum_wavenumber: float
    sigma: float

    def __post_init__(self) -> None:
        if not self.vacuum_wavenumber > 0:
            raise ValueError("k_o > 0")
        if not self.sigma > 0:
            raise ValueError("sigma > 0")


@dataclass(frozen=True)
class InteractionParams:
    """Per-angle interaction strengths of the plate.

    ``gamma_common`` is the polarization-independent transverse shift,
    ``gamma`` the differential shift carried with opposite sign by the two
    polarization paths; both derive from the ray displacements through
    ``gamma_common = (a_o + a_e)/2`` and ``gamma = (a_o - a_e)/2``, so the
    ordinary ray sits at ``gamma_common + gamma``.
    """

    theta: float
    a_o: float
    a_e: float
    gamma_common: float
    gamma: float
    phi: float

    @classmethod
    def from_components(
        cls,
        gamma_common: float,
        gamma: float,
        phi: float,
        theta: float = 0.0,
    ) -> "InteractionParams":
        """Build parameters directly from (gamma_common, gamma, phi).

        Intended for configurations where the phase is pinned by hand (for
        instance forcing phi = 0 to study an idealized matched plate); the
        ray displacements are reconstructed from the averaging relations.
        """
        return cls(
            theta=theta,
            a_o=gamma_common + gamma,
            a_e=gamma_common - gamma,
            gamma_common=gamma_common,
            gamma=gamma,
            phi=phi,
        )


def _check_theta(theta: float) -> None:
    if not 0.0 <= theta < _HALF_PI:
        raise AngleDomainError(f"theta must lie in [0, pi/2), got {theta!r}")


def _radicand(n: float, n_air: float, theta: float) -> float:
    s = n_air * math.sin(theta)
    r2 = n * n - s * s
    if r2 <= 0.0:
        raise AngleDomainError(
            f"refraction radicand n^2 - (n_air sin theta)^2 <= 0 at theta={theta!r}"
        )
    return r2


def _displacement(crystal: CrystalSpec, n: float, theta: float) -> float:
    r = math.sqrt(_radicand(n, crystal.n_air, theta))
    return crystal.thickness * math.sin(theta) * (
        crystal.n_air * math.cos(theta) / r - 1.0
    )


def ray_displacements(crystal: CrystalSpec, theta: float) -> tuple[float, float]:
    """Transverse exit displacements (a_o, a_e) of the two rays, in meters.

    Each ray obeys ``a = T sin(theta) (n_air cos(theta) / sqrt(n^2 -
    (n_air sin theta)^2) - 1)`` with its own refractive index.  Both vanish
    at normal incidence and are negative for theta in (0, pi/2) whenever the
    plate is denser than the surrounding medium.
    """
    _check_theta(theta)
    return (
        _displacement(crystal, crystal.n_o, theta),
        _displacement(crystal, crystal.n_e, theta),
    )


def phase_shift(
    crystal: CrystalSpec,
    k_o: float,
    theta: float,
    form: PhaseForm = PhaseForm.DIFFERENCE,
) -> float:
    """Relative phase retardation phi(theta) between the two rays, radians.

    Strictly increasing on (0, pi/2) for n_e > n_o (decreasing for
    n_e < n_o).  At normal incidence the difference form reduces to
    ``T k_o (n_e - n_o)``.
    """
    _check_theta(theta)
    r_o = math.sqrt(_radicand(crystal.n_o, crystal.n_air, theta))
    r_e = math.sqrt(_radicand(crystal.n_e, crystal.n_air, theta))
    if form is PhaseForm.DIFFERENCE:
        return crystal.thickness * k_o * (r_e - r_o)
    return crystal.thickness * k_o * (r_e / r_o - 1.0)


def interaction_params(
    crystal: CrystalSpec,
    k_o: float,
    theta: float,
    form: PhaseForm = PhaseForm.DIFFERENCE,
) -> InteractionParams:
    """Full per-angle parameter set (a_o, a_e, gamma_common, gamma, phi)."""
    a_o, a_e = ray_displacements(crystal, theta)
    return InteractionParams(
        theta=theta,
        a_o=a_o,
        a_e=a_e,
        gamma_common=0.5 * (a_o + a_e),
        gamma=0.5 * (a_o - a_e),
        phi=phase_shift(crystal, k_o, theta, form),
    )


def _displacement_slope(crystal: CrystalSpec, n: float, theta: float) -> float:
    # d/dtheta of T sin(theta) (n_air cos(theta)/r - 1) with
    # r = sqrt(n^2 - s^2), s = n_air sin(theta), dr/dtheta = -s n_air cos/r.
    na = crystal.n_air
    s = na * math.sin(theta)
    r2 = _radicand(n, na, theta)
    r = math.sqrt(r2)
    cos = math.cos(theta)
    return crystal.thickness * (
        na * math.cos(2.0 * theta) / r
        + na * s * s * cos * cos / (r2 * r)
        - cos
    )


def classical_tilt_sensitivity(crystal: CrystalSpec, theta: float) -> float:
    """Analytic d(gamma_common)/d(theta), in m/rad.

    This is the tilt response of the beam centroid with no post-selection:
    the slope the device would have as a plain refraction sensor.
    """
    _check_theta(theta)
    return 0.5 * (
        _displacement_slope(crystal, crystal.n_o, theta)
        + _displacement_slope(crystal, crystal.n_e, theta)
    )


def differential_shift_slope(crystal: CrystalSpec, theta: float) -> float:
    """Analytic d(gamma)/d(theta), in m/rad."""
    _check_theta(theta)
    return 0.5 * (
        _displacement_slope(crystal, crystal.n_o, theta)
        - _displacement_slope(crystal, crystal.n_e, theta)
    )


def phase_slope(
    crystal: CrystalSpec,
    k_o: float,
    theta: float,
    form: PhaseForm = PhaseForm.DIFFERENCE,
) -> float:
    """Analytic d(phi)/d(theta), dimensionless (rad per rad)."""
    _check_theta(theta)
    na = crystal.n_air
    s = na * math.sin(theta)
    sc = s * na * math.cos(theta)
    r2_o = _radicand(crystal.n_o, na, theta)
    r2_e = _radicand(crystal.n_e, na, theta)
    r_o, r_e = math.sqrt(r2_o), math.sqrt(r2_e)
    if form is PhaseForm.DIFFERENCE:
        return crystal.thickness * k_o * sc * (1.0 / r_o - 1.0 / r_e)
    # d/dtheta of (r_e/r_o - 1): both radii shrink with theta.
    return crystal.thickness * k_o * sc * (r_e / (r2_o * r_o) - 1.0 / (r_e * r_o))
