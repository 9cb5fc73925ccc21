"""Tilt sensitivity, parameter sweeps, synthetic data, and boost fitting.

The headline quantity is d<z>/d(theta) of the full model: the interaction
parameters are recomputed at displaced angles (so the common shift, the
differential shift and the retardation all vary) and the exact expectation
value is differenced.  Sweeps and maps generate figure-grade data; the
measurement synthesizer and the damped Gauss-Newton fitter close the loop
that recovers the boost strength k*sigma from (synthetic or ingested)
measurement records.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .coherency import CoherencyPoint
from .errors import DegeneratePostSelection, RankDeficientFitError
from .optics import BeamSpec, CrystalSpec, interaction_params
from .pointer import (
    P_FLOOR_DEFAULT,
    BoostSpec,
    Regime,
    SelectionSpec,
    _amplitudes_on,
    _pointer_core,
    expectation_z,
)

#: CSV header for measurement ingestion and emission.
MEASUREMENT_HEADER = "theta_offset_rad,z_mean_m,z_stddev_m,frames"

_FIT_PARAMS = ("k_sigma", "epsilon", "theta_offset", "z_offset")
_FIT_STEPS = {
    "k_sigma": 1e-7,
    "epsilon": 1e-8,
    "theta_offset": 1e-9,
    "z_offset": 1e-12,
}


@dataclass(frozen=True)
class SweepRecord:
    """One incidence angle of a sweep.

    ``z_exp`` and ``slope`` are None where the post-selection probability
    fell below the floor (degenerate points are recorded, not fatal).
    """

    theta: float
    z_exp: float | None
    probability: float
    gamma_o: float
    slope: float | None = None


@dataclass(frozen=True)
class EpsilonRecord:
    """One post-selector angle of a sweep at fixed incidence."""

    epsilon: float
    z_exp: float | None
    probability: float


@dataclass(frozen=True)
class MeasurementSample:
    """Pointer-position measurement relative to a reference point.

    ``theta_offset`` is relative to the reference coherency-point angle and
    ``z_mean`` to the common shift there; ``z_stddev`` is the per-sample
    standard deviation over ``frame_count`` camera frames.
    """

    theta_offset: float
    z_mean: float
    z_stddev: float
    frame_count: int

    def __post_init__(self) -> None:
        if self.z_stddev < 0:
            raise ValueError("z_stddev >= 0")
        if self.frame_count < 1:
            raise ValueError("frame_count >= 1")


@dataclass(frozen=True)
class FitResult:
    """Outcome of a least-squares boost fit.

    ``converged`` means the relative parameter step dropped below tolerance
    within the iteration budget; a False value is a reported outcome, never
    a silent wrong answer.  ``parameters`` holds every fitted (and fixed)
    model parameter by name.
    """

    k_sigma_hat: float
    residual_rms: float
    iterations: int
    converged: bool
    parameters: dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class DensityMap:
    """|amplitude|^2 on a (theta, z) grid; values[i, j] at theta_axis[i], z_axis[j]."""

    theta_axis: np.ndarray
    z_axis: np.ndarray
    values: np.ndarray


@dataclass(frozen=True, eq=False)
class ProbabilityMap:
    """Post-selection probability on a (theta, epsilon) grid."""

    theta_axis: np.ndarray
    epsilon_axis: np.ndarray
    values: np.ndarray


# ---------------------------------------------------------------------------
# sensitivity
# ---------------------------------------------------------------------------

def tilt_sensitivity(
    crystal: CrystalSpec,
    k_o: float,
    beam: BeamSpec,
    sel: SelectionSpec,
    boost: BoostSpec,
    theta: float,
    dtheta: float = 1e-7,
) -> float:
    """d<z>/d(theta) of the full model, m/rad.

    Richardson-extrapolated central difference: interaction parameters are
    recomputed at each displaced angle, so every theta dependence is
    included.  DegeneratePostSelection propagates from the stencil points.
    """

    def f(t: float) -> float:
        return expectation_z(interaction_params(crystal, k_o, t), sel, beam, boost)

    d_full = (f(theta + dtheta) - f(theta - dtheta)) / (2.0 * dtheta)
    d_half = (f(theta + 0.5 * dtheta) - f(theta - 0.5 * dtheta)) / dtheta
    return (4.0 * d_half - d_full) / 3.0


def _raw_statistics(
    gamma: float,
    gamma_common: float,
    phi: float,
    sigma: float,
    k_sigma: float,
    epsilon: float,
    regime: Regime,
    p_floor: float = P_FLOOR_DEFAULT,
) -> tuple[float | None, float]:
    """(z_exp or None, probability) without SelectionSpec range validation.

    Sweeps and maps explore post-selector angles outside the validated
    SelectionSpec range (e.g. epsilon near pi/2), and fits iterate through
    arbitrary intermediate values; this raw entry point serves both.
    """
    two_p, numerator = _pointer_core(gamma, phi, sigma, k_sigma, epsilon, regime)
    p = min(max(0.5 * two_p, 0.0), 1.0)
    if two_p <= 0.0 or 0.5 * two_p < p_floor:
        return None, p
    shift = numerator / two_p
    z = gamma_common + shift if regime is Regime.COHERENCY else gamma_common - shift
    return z, p


def sweep_theta(
    crystal: CrystalSpec,
    k_o: float,
    theta_range: tuple[float, float],
    n_points: int,
    sel: SelectionSpec,
    beam: BeamSpec,
    boost: BoostSpec,
    include_slopes: bool = False,
    dtheta: float = 1e-7,
) -> list[SweepRecord]:
    """Uniform sweep of the expectation value and probability over theta."""
    lo, hi = theta_range
    if not (0.0 <= lo < hi) or n_points < 2:
        raise ValueError("need 0 <= lo < hi and n_points >= 2")
    records = []
    for theta in np.linspace(lo, hi, n_points):
        ip = interaction_params(crystal, k_o, float(theta))
        z, p = _raw_statistics(
            ip.gamma, ip.gamma_common, ip.phi, beam.sigma,
            boost.k_sigma, sel.epsilon, sel.regime,
        )
        slope = None
        if include_slopes and z is not None:
            try:
                slope = tilt_sensitivity(crystal, k_o, beam, sel, boost, float(theta), dtheta)
            except DegeneratePostSelection:
                slope = None
        records.append(
            SweepRecord(
                theta=float(theta),
                z_exp=z,
                probability=p,
                gamma_o=ip.gamma_common,
                slope=slope,
            )
        )
    return records


def sweep_epsilon(
    crystal: CrystalSpec,
    k_o: float,
    theta: float,
    epsilon_range: tuple[float, float],
    n_points: int,
    regime: Regime,
    beam: BeamSpec,
    boost: BoostSpec,
) -> list[EpsilonRecord]:
    """Sweep of the post-selector angle at fixed incidence."""
    lo, hi = epsilon_range
    if not lo < hi or n_points < 2:
        raise ValueError("need lo < hi and n_points >= 2")
    ip = interaction_params(crystal, k_o, theta)
    records = []
    for eps in np.linspace(lo, hi, n_points):
        z, p = _raw_statistics(
            ip.gamma, ip.gamma_common, ip.phi, beam.sigma,
            boost.k_sigma, float(eps), regime,
        )
        records.append(EpsilonRecord(epsilon=float(eps), z_exp=z, probability=p))
    return records


def density_map(
    crystal: CrystalSpec,
    k_o: float,
    theta_grid: np.ndarray,
    z_grid: np.ndarray,
    sel: SelectionSpec,
    beam: BeamSpec,
    boost: BoostSpec,
) -> DensityMap:
    """Pointer probability density |amplitude|^2 over (theta, z)."""
    theta_axis = np.asarray(theta_grid, dtype=float)
    z_axis = np.asarray(z_grid, dtype=float)
    values = np.empty((theta_axis.size, z_axis.size))
    for i, theta in enumerate(theta_axis):
        ip = interaction_params(crystal, k_o, float(theta))
        amps = _amplitudes_on(ip, sel, beam, boost, z_axis)
        values[i, :] = np.abs(amps) ** 2
    return DensityMap(theta_axis=theta_axis, z_axis=z_axis, values=values)


def probability_map(
    crystal: CrystalSpec,
    k_o: float,
    theta_grid: np.ndarray,
    epsilon_grid: np.ndarray,
    regime: Regime,
    beam: BeamSpec,
    boost: BoostSpec,
) -> ProbabilityMap:
    """Post-selection probability over (theta, epsilon).

    The epsilon axis is unrestricted (the band structure near epsilon =
    pi/2 is part of the point), so the raw statistics route is used.
    """
    theta_axis = np.asarray(theta_grid, dtype=float)
    epsilon_axis = np.asarray(epsilon_grid, dtype=float)
    values = np.empty((theta_axis.size, epsilon_axis.size))
    for i, theta in enumerate(theta_axis):
        ip = interaction_params(crystal, k_o, float(theta))
        for j, eps in enumerate(epsilon_axis):
            _, p = _raw_statistics(
                ip.gamma, ip.gamma_common, ip.phi, beam.sigma,
                boost.k_sigma, float(eps), regime,
            )
            values[i, j] = p
    return ProbabilityMap(theta_axis=theta_axis, epsilon_axis=epsilon_axis, values=values)


def optimal_epsilon(
    crystal: CrystalSpec,
    k_o: float,
    cp: CoherencyPoint,
    beam: BeamSpec,
    boost: BoostSpec,
) -> tuple[float, float]:
    """Post-selector angle maximizing the pointer shift at a coherency point.

    Golden-section search of <z> - gamma_o over epsilon in (0, pi/4] at
    fixed theta = cp.theta.  Returns (epsilon_star, shift_star).  The
    interesting (single-peak) behavior belongs to the boost-free branch;
    the search itself only assumes unimodality.
    """
    ip = interaction_params(crystal, k_o, cp.theta)

    def shift(eps: float) -> float:
        z, _ = _raw_statistics(
            ip.gamma, ip.gamma_common, ip.phi, beam.sigma,
            boost.k_sigma, eps, Regime.COHERENCY,
        )
        return -math.inf if z is None else z - ip.gamma_common

    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    lo, hi = 1e-12, math.pi / 4
    a = hi - inv_phi * (hi - lo)
    b = lo + inv_phi * (hi - lo)
    f_a, f_b = shift(a), shift(b)
    while hi - lo > 1e-12:
        if f_a < f_b:
            lo, a, f_a = a, b, f_b
            b = lo + inv_phi * (hi - lo)
            f_b = shift(b)
        else:
            hi, b, f_b = b, a, f_a
            a = hi - inv_phi * (hi - lo)
            f_a = shift(a)
    eps_star = 0.5 * (lo + hi)
    return eps_star, shift(eps_star)


def amplification_factor(measured_slope: float, classical_slope: float) -> float:
    """|measured| / |classical| tilt-sensitivity gain."""
    if classical_slope == 0.0:
        raise ValueError("classical_slope must be nonzero")
    return abs(measured_slope / classical_slope)


# ---------------------------------------------------------------------------
# synthetic measurements and fitting
# ---------------------------------------------------------------------------

def synthesize_measurements(
    crystal: CrystalSpec,
    k_o: float,
    cp: CoherencyPoint,
    sel: SelectionSpec,
    beam: BeamSpec,
    boost: BoostSpec,
    theta_offsets: list[float] | np.ndarray,
    noise_z: float,
    seed: int,
    frame_count: int = 500,
) -> list[MeasurementSample]:
    """Model-generated measurement records with seeded Gaussian noise.

    Positions are reported relative to the reference (cp.theta, gamma_o at
    the point), matching how lab data is logged.  A fixed seed gives
    bit-identical output; zero noise lands exactly on the model curve.
    """
    if noise_z < 0:
        raise ValueError("noise_z >= 0")
    rng = np.random.default_rng(seed)
    samples = []
    for offset in theta_offsets:
        ip = interaction_params(crystal, k_o, cp.theta + float(offset))
        z = expectation_z(ip, sel, beam, boost)
        noise = float(rng.normal(0.0, noise_z))
        samples.append(
            MeasurementSample(
                theta_offset=float(offset),
                z_mean=z - cp.gamma_o + noise,
                z_stddev=noise_z,
                frame_count=frame_count,
            )
        )
    return samples


def _fit_model(
    crystal: CrystalSpec,
    k_o: float,
    cp: CoherencyPoint,
    beam: BeamSpec,
    regime: Regime,
    offsets: np.ndarray,
    params: dict[str, float],
) -> np.ndarray:
    k_sigma = max(params["k_sigma"], 0.0)
    out = np.empty(offsets.size)
    for i, offset in enumerate(offsets):
        theta = cp.theta + float(offset) + params["theta_offset"]
        ip = interaction_params(crystal, k_o, theta)
        z, _ = _raw_statistics(
            ip.gamma, ip.gamma_common, ip.phi, beam.sigma,
            k_sigma, params["epsilon"], regime, p_floor=0.0,
        )
        out[i] = (math.nan if z is None else z) - cp.gamma_o + params["z_offset"]
    return out


def fit_boost(
    crystal: CrystalSpec,
    k_o: float,
    samples: list[MeasurementSample],
    cp: CoherencyPoint,
    sel: SelectionSpec,
    beam: BeamSpec,
    free: tuple[str, ...] = ("k_sigma",),
    initial: dict[str, float] | None = None,
    max_iterations: int = 100,
    step_tol: float = 1e-10,
) -> FitResult:
    """Damped Gauss-Newton least squares against the exact pointer model.

    ``free`` selects fitted parameters from {k_sigma, epsilon, theta_offset,
    z_offset}; everything else is held at its ``initial`` (or default)
    value.  Residuals are weighted by 1/z_stddev when every sample carries a
    positive stddev, uniformly otherwise.  Convergence means the relative
    parameter step fell below ``step_tol``; hitting the iteration budget
    reports converged=False rather than failing.
    """
    if len(samples) < 3:
        raise ValueError("need at least 3 samples")
    bad = [name for name in free if name not in _FIT_PARAMS]
    if bad or not free:
        raise ValueError(f"free parameters must be a nonempty subset of {_FIT_PARAMS}")
    if len(free) > len(samples):
        raise RankDeficientFitError(
            f"{len(free)} free parameters exceed {len(samples)} samples"
        )

    params = {
        "k_sigma": 0.02,
        "epsilon": sel.epsilon,
        "theta_offset": 0.0,
        "z_offset": 0.0,
    }
    if initial:
        params.update(initial)

    offsets = np.array([s.theta_offset for s in samples])
    z_obs = np.array([s.z_mean for s in samples])
    stddevs = np.array([s.z_stddev for s in samples])
    weights = 1.0 / stddevs if np.all(stddevs > 0) else np.ones_like(stddevs)

    def residuals(p: dict[str, float]) -> np.ndarray:
        model = _fit_model(crystal, k_o, cp, beam, sel.regime, offsets, p)
        if np.isnan(model).any():
            return np.full(offsets.size, np.inf)
        return weights * (model - z_obs)

    res = residuals(params)
    if not np.all(np.isfinite(res)):
        raise ValueError(
            "initial parameters give a degenerate model (dark port at some sample)"
        )
    cost = float(res @ res)
    lam = 1e-3
    converged = False
    iterations = 0

    for iterations in range(1, max_iterations + 1):
        jac = np.empty((offsets.size, len(free)))
        for j, name in enumerate(free):
            h = _FIT_STEPS[name]
            up = dict(params); up[name] += h
            dn = dict(params); dn[name] -= h
            jac[:, j] = (residuals(up) - residuals(dn)) / (2.0 * h)
        grad = jac.T @ res
        normal = jac.T @ jac
        # Stationarity: residual orthogonal to the model tangent, or (for
        # perfect fits, where the residual is pure roundoff) an undamped
        # Newton step already below the step tolerance.
        grad_scale = np.linalg.norm(jac) * np.linalg.norm(res) + 1e-300
        param_scale = np.linalg.norm([params[n] for n in free]) + 1e-30
        try:
            newton = np.linalg.solve(normal, -grad)
        except np.linalg.LinAlgError as exc:
            raise RankDeficientFitError(
                "normal equations singular: data does not constrain the free parameters"
            ) from exc
        at_stationary = (
            np.linalg.norm(grad) <= 1e-6 * grad_scale
            or np.linalg.norm(newton) <= step_tol * param_scale
        )
        accepted = False
        rel_step = math.inf
        for _ in range(12):
            damped = normal + lam * np.diag(np.diag(normal)) + 1e-300 * np.eye(len(free))
            try:
                step = np.linalg.solve(damped, -grad)
            except np.linalg.LinAlgError as exc:
                raise RankDeficientFitError(
                    "normal equations singular: data does not constrain the free parameters"
                ) from exc
            trial = dict(params)
            for j, name in enumerate(free):
                trial[name] = params[name] + step[j]
            if "k_sigma" in free:
                trial["k_sigma"] = max(trial["k_sigma"], 0.0)
            trial_res = residuals(trial)
            trial_cost = float(trial_res @ trial_res)
            if trial_cost < cost:
                rel_step = float(
                    np.linalg.norm(step)
                    / (np.linalg.norm([params[n] for n in free]) + 1e-30)
                )
                params, res, cost = trial, trial_res, trial_cost
                lam = max(lam / 3.0, 1e-12)
                accepted = True
                break
            lam *= 10.0
        if accepted and rel_step < step_tol and at_stationary:
            converged = True
            break
        if not accepted:
            # no improving step exists; converged iff already stationary
            converged = at_stationary
            break

    model = _fit_model(crystal, k_o, cp, beam, sel.regime, offsets, params)
    residual_rms = float(np.sqrt(np.mean((model - z_obs) ** 2)))
    return FitResult(
        k_sigma_hat=params["k_sigma"],
        residual_rms=residual_rms,
        iterations=iterations,
        converged=converged,
        parameters=dict(params),
    )


# ---------------------------------------------------------------------------
# measurement CSV ingestion
# ---------------------------------------------------------------------------

def parse_measurements(text: str) -> list[MeasurementSample]:
    """Parse the documented measurement CSV (comment lines allowed)."""
    samples = []
    header_seen = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not header_seen:
            if line != MEASUREMENT_HEADER:
                raise ValueError(
                    f"line {lineno}: expected header '{MEASUREMENT_HEADER}', got '{line}'"
                )
            header_seen = True
            continue
        fields = line.split(",")
        if len(fields) != 4:
            raise ValueError(f"line {lineno}: expected 4 fields, got {len(fields)}")
        try:
            samples.append(
                MeasurementSample(
                    theta_offset=float(fields[0]),
                    z_mean=float(fields[1]),
                    z_stddev=float(fields[2]),
                    frame_count=int(fields[3]),
                )
            )
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from exc
    if not header_seen:
        raise ValueError("no header line found")
    return samples


def read_measurements(path: str | Path) -> list[MeasurementSample]:
    """Load measurement samples from a CSV file."""
    return parse_measurements(Path(path).read_text(encoding="utf-8"))
