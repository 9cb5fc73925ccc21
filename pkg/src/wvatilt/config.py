"""Run configuration: defaults, dotted-key text format, validation.

The configuration format is flat ``key = value`` text with dotted keys
(``crystal.n_o = 1.5427``).  ``[section]`` headers are optional sugar that
prefix the keys below them.  Blank lines and ``#`` comments are ignored,
unknown keys are rejected, and every value is validated against the same
invariants the parameter dataclasses enforce.

All angles are radians and all lengths meters, in files and flags alike.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

from .errors import ConfigError
from .optics import BeamSpec, CrystalSpec
from .pointer import BoostSpec, Regime, RegimeThresholds, SelectionSpec

#: Default experimental profile: 4 mm plate in air probed at 633 nm with a
#: 0.168 mm pointer width, crossed polarizers, no boost.  The extraordinary
#: index is derived, not measured: it is tuned so the 11th coherency point
#: of the difference-form retardation lands at 0.9955 rad.
DEFAULT_THICKNESS = 4e-3
DEFAULT_N_O = 1.5427
DEFAULT_N_E = 1.5517413
DEFAULT_N_AIR = 1.0
DEFAULT_WAVELENGTH = 633e-9
DEFAULT_SIGMA = 1.68e-4


class OutputFormat(enum.Enum):
    CSV = "csv"
    JSON = "json"


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved configuration for one CLI invocation."""

    crystal: CrystalSpec
    beam: BeamSpec
    selection: SelectionSpec
    boost: BoostSpec
    thresholds: RegimeThresholds
    p_floor: float
    output_format: OutputFormat


def default_crystal() -> CrystalSpec:
    return CrystalSpec(
        thickness=DEFAULT_THICKNESS,
        n_o=DEFAULT_N_O,
        n_e=DEFAULT_N_E,
        n_air=DEFAULT_N_AIR,
    )


def default_beam() -> BeamSpec:
    return BeamSpec(
        vacuum_wavenumber=2.0 * math.pi / DEFAULT_WAVELENGTH,
        sigma=DEFAULT_SIGMA,
    )


def default_config() -> RunConfig:
    return RunConfig(
        crystal=default_crystal(),
        beam=default_beam(),
        selection=SelectionSpec(epsilon=0.0, regime=Regime.COHERENCY),
        boost=BoostSpec(k_sigma=0.0),
        thresholds=RegimeThresholds(),
        p_floor=1e-12,
        output_format=OutputFormat.CSV,
    )


_FLOAT_KEYS = {
    "crystal.thickness_m",
    "crystal.n_o",
    "crystal.n_e",
    "crystal.n_air",
    "beam.wavelength_m",
    "beam.vacuum_wavenumber_rad_per_m",
    "beam.sigma_m",
    "selection.epsilon_rad",
    "boost.k_sigma",
    "thresholds.wva_ratio",
    "thresholds.weak_cap",
    "thresholds.strong_gamma_over_sigma",
    "tolerances.p_floor",
}
_ENUM_KEYS = {
    "selection.regime": {r.value: r for r in Regime},
    "output.format": {f.value: f for f in OutputFormat},
}
KNOWN_KEYS = sorted(_FLOAT_KEYS | set(_ENUM_KEYS))


def parse_config(text: str) -> RunConfig:
    """Parse configuration text; unset keys take the default profile."""
    raw: dict[str, object] = {}
    section = ""
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if stripped.startswith("[") and stripped.endswith("]"):
            section = stripped[1:-1].strip()
            if not section:
                raise ConfigError(f"line {lineno}: empty section name")
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got '{stripped}'")
        key, _, value = stripped.partition("=")
        key = key.strip()
        value = value.strip()
        if section and "." not in key:
            key = f"{section}.{key}"
        if key in _FLOAT_KEYS:
            try:
                raw[key] = float(value)
            except ValueError:
                raise ConfigError(f"line {lineno}: '{key}' needs a number, got '{value}'")
        elif key in _ENUM_KEYS:
            options = _ENUM_KEYS[key]
            token = value.lower()
            if token not in options:
                raise ConfigError(
                    f"line {lineno}: '{key}' must be one of {sorted(options)}, got '{value}'"
                )
            raw[key] = options[token]
        else:
            raise ConfigError(f"line {lineno}: unknown key '{key}'")

    if "beam.wavelength_m" in raw and "beam.vacuum_wavenumber_rad_per_m" in raw:
        raise ConfigError(
            "beam.wavelength_m and beam.vacuum_wavenumber_rad_per_m are mutually exclusive"
        )

    def grab(key: str, default: float) -> float:
        return float(raw.get(key, default))

    try:
        crystal = CrystalSpec(
            thickness=grab("crystal.thickness_m", DEFAULT_THICKNESS),
            n_o=grab("crystal.n_o", DEFAULT_N_O),
            n_e=grab("crystal.n_e", DEFAULT_N_E),
            n_air=grab("crystal.n_air", DEFAULT_N_AIR),
        )
        if "beam.vacuum_wavenumber_rad_per_m" in raw:
            k_o = float(raw["beam.vacuum_wavenumber_rad_per_m"])
        else:
            wavelength = grab("beam.wavelength_m", DEFAULT_WAVELENGTH)
            if not wavelength > 0:
                raise ValueError("wavelength > 0")
            k_o = 2.0 * math.pi / wavelength
        beam = BeamSpec(vacuum_wavenumber=k_o, sigma=grab("beam.sigma_m", DEFAULT_SIGMA))
        selection = SelectionSpec(
            epsilon=grab("selection.epsilon_rad", 0.0),
            regime=raw.get("selection.regime", Regime.COHERENCY),
        )
        boost = BoostSpec(k_sigma=grab("boost.k_sigma", 0.0))
        thresholds = RegimeThresholds(
            ratio=grab("thresholds.wva_ratio", 10.0),
            weak_cap=grab("thresholds.weak_cap", 0.1),
            strong_gamma=grab("thresholds.strong_gamma_over_sigma", 0.3),
        )
        p_floor = grab("tolerances.p_floor", 1e-12)
        if not p_floor > 0:
            raise ValueError("p_floor > 0")
    except ValueError as exc:
        raise ConfigError(f"invalid configuration: {exc}") from exc

    return RunConfig(
        crystal=crystal,
        beam=beam,
        selection=selection,
        boost=boost,
        thresholds=thresholds,
        p_floor=p_floor,
        output_format=raw.get("output.format", OutputFormat.CSV),
    )


def with_overrides(
    config: RunConfig,
    epsilon: float | None = None,
    regime: Regime | None = None,
    k_sigma: float | None = None,
) -> RunConfig:
    """Apply per-command physics overrides, re-running validation."""
    selection = config.selection
    if epsilon is not None or regime is not None:
        try:
            selection = SelectionSpec(
                epsilon=selection.epsilon if epsilon is None else epsilon,
                regime=selection.regime if regime is None else regime,
            )
        except ValueError as exc:
            raise ConfigError(f"invalid configuration: {exc}") from exc
    boost = config.boost
    if k_sigma is not None:
        try:
            boost = BoostSpec(k_sigma=k_sigma)
        except ValueError as exc:
            raise ConfigError(f"invalid configuration: {exc}") from exc
    return replace(config, selection=selection, boost=boost)


def config_echo(config: RunConfig) -> dict[str, object]:
    """Canonical dotted-key view of a resolved configuration."""
    return {
        "crystal.thickness_m": config.crystal.thickness,
        "crystal.n_o": config.crystal.n_o,
        "crystal.n_e": config.crystal.n_e,
        "crystal.n_air": config.crystal.n_air,
        "beam.vacuum_wavenumber_rad_per_m": config.beam.vacuum_wavenumber,
        "beam.sigma_m": config.beam.sigma,
        "selection.epsilon_rad": config.selection.epsilon,
        "selection.regime": config.selection.regime.value,
        "boost.k_sigma": config.boost.k_sigma,
        "thresholds.wva_ratio": config.thresholds.ratio,
        "thresholds.weak_cap": config.thresholds.weak_cap,
        "thresholds.strong_gamma_over_sigma": config.thresholds.strong_gamma,
        "tolerances.p_floor": config.p_floor,
        "output.format": config.output_format.value,
    }
