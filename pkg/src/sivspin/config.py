"""Run configuration: schema, defaults, and JSON/TOML loading.

Every default carries a short source descriptor that is echoed in the
provenance header of CSV outputs, so sweep files are self-describing.
Unknown keys are rejected rather than ignored.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - version shim
    import tomli as tomllib


class ConfigError(ValueError):
    """Raised for malformed configuration input."""


@dataclass(frozen=True)
class ConfigField:
    default: Any
    kind: type
    descriptor: str


#: Schema: key -> (default, type, source descriptor).
SCHEMA: dict[str, ConfigField] = {
    "model": ConfigField("singlet", str, "excited-state model selection"),
    "d_g_ghz": ConfigField(0.94, float, "ground-state axial zero-field splitting"),
    "d_e_ghz": ConfigField(5.0, float, "excited-state axial zero-field splitting, triplet model"),
    "g_parallel": ConfigField(2.0042, float, "g tensor component along the defect axis"),
    "g_perpendicular": ConfigField(2.0035, float, "g tensor component normal to the defect axis"),
    "ea_mev": ConfigField(16.8, float, "thermal activation energy of the relaxation process"),
    "zeeman_freq_ghz": ConfigField(9.7, float, "X-band microwave and Zeeman frequency"),
    "field_mt": ConfigField(345.8, float, "static field magnitude at the measured transition"),
    "ratio": ConfigField(125.0, float, "zero-field overlap imbalance |t0/t_pm|"),
    "c_rate": ConfigField(8.5e5, float, "relaxation rate scale C|t0|^4 matching the off-axis prefactor"),
    "temperature_k": ConfigField(30.0, float, "operating temperature for orientation studies"),
    "t2_sd_s": ConfigField(0.95e-3, float, "spectral-diffusion coherence background"),
    "t2_id_s": ConfigField(0.319e-3, float, "instantaneous-diffusion coherence background"),
    "misalignment_deg": ConfigField(2.6, float, "field misalignment from the aligned axis"),
    "polarization": ConfigField(0.115, float, "optical spin polarization fraction into m=0"),
    "transition": ConfigField("0p", str, "measured transition (m0 or 0p)"),
    "triplet_t2_mode": ConfigField("full-dephasing", str, "triplet coherence model choice"),
    "triplet_tau_e_s": ConfigField(0.0, float, "excited-state lifetime for partial-coherence mode"),
    "window_min_mt": ConfigField(1.0, float, "field sweep window lower edge"),
    "window_max_mt": ConfigField(600.0, float, "field sweep window upper edge"),
    "theta_min_deg": ConfigField(0.5, float, "orientation sweep start angle"),
    "theta_max_deg": ConfigField(90.0, float, "orientation sweep end angle"),
    "theta_points": ConfigField(64, int, "orientation sweep grid size"),
    "temp_min_k": ConfigField(5.0, float, "temperature sweep start"),
    "temp_max_k": ConfigField(60.0, float, "temperature sweep end"),
    "temp_points": ConfigField(24, int, "temperature sweep grid size"),
    "a_t1_on_axis_hz": ConfigField(2.10e3, float, "aligned-site T1 rate prefactor, sample fit"),
    "a_t1_off_axis_hz": ConfigField(378.0e3, float, "off-axis-site T1 rate prefactor, sample fit"),
    "a_t2_hz": ConfigField(1.26e6, float, "T2 rate prefactor, sample fit"),
    "t1_sat_s": ConfigField(46.0, float, "low-temperature T1 saturation value"),
    "t2_sat_s": ConfigField(0.48e-3, float, "low-temperature T2 saturation value"),
    "densities_cm3": ConfigField(
        [5e15, 5e16, 5e17, 5e18], list, "neighbor density grid for the bath sweep"
    ),
    "bath_temps_k": ConfigField(
        [25.0, 30.0, 35.0, 40.0, 50.0, 60.0], list, "temperature grid for the bath sweep"
    ),
    "time_min_s": ConfigField(1e-5, float, "decay-curve synthesis start time"),
    "time_max_s": ConfigField(5e-2, float, "decay-curve synthesis end time"),
    "time_points": ConfigField(120, int, "decay-curve synthesis grid size"),
    "noise": ConfigField(0.0, float, "relative Gaussian noise added to synthesized curves"),
    "theta_deg": ConfigField(35.0, float, "single orientation used for decay synthesis"),
    "seed": ConfigField(0, int, "random seed for synthesized noise"),
    "threads": ConfigField(1, int, "worker threads for sweeps"),
}


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration values for one CLI invocation."""

    values: dict[str, Any]

    def __getattr__(self, name: str) -> Any:
        try:
            return self.values[name]
        except KeyError as exc:  # pragma: no cover - attribute protocol
            raise AttributeError(name) from exc

    def provenance(self) -> str:
        """Single-line provenance string with values and source descriptors."""
        parts = []
        for key in sorted(self.values):
            field = SCHEMA[key]
            parts.append(f"{key}={self.values[key]!r} ({field.descriptor})")
        return "; ".join(parts)


def _coerce(key: str, value: Any, field: ConfigField) -> Any:
    if field.kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key} must be a number, got {value!r}")
        return float(value)
    if field.kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{key} must be an integer, got {value!r}")
        return int(value)
    if field.kind is str:
        if not isinstance(value, str):
            raise ConfigError(f"{key} must be a string, got {value!r}")
        return value
    if field.kind is list:
        if not isinstance(value, (list, tuple)) or not value:
            raise ConfigError(f"{key} must be a nonempty list, got {value!r}")
        try:
            return [float(v) for v in value]
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{key} must hold numbers") from exc
    raise ConfigError(f"unsupported schema type for {key}")  # pragma: no cover


def build_config(overrides: dict[str, Any] | None = None) -> RunConfig:
    """Merge overrides onto the defaults, rejecting unknown keys."""
    overrides = overrides or {}
    unknown = sorted(set(overrides) - set(SCHEMA))
    if unknown:
        raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")
    values = {key: field.default for key, field in SCHEMA.items()}
    for key, value in overrides.items():
        values[key] = _coerce(key, value, SCHEMA[key])
    if values["model"] not in ("singlet", "triplet"):
        raise ConfigError("model must be 'singlet' or 'triplet'")
    if values["transition"] not in ("m0", "0p"):
        raise ConfigError("transition must be 'm0' or '0p'")
    if values["triplet_t2_mode"] not in ("full-dephasing", "partial-coherence"):
        raise ConfigError("triplet_t2_mode must be 'full-dephasing' or 'partial-coherence'")
    return RunConfig(values=values)


def load_config(path: str | Path | None) -> RunConfig:
    """Load a JSON or TOML configuration document (or defaults for None)."""
    if path is None:
        return build_config()
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    text = p.read_bytes()
    if p.suffix.lower() == ".json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON config: {exc}") from exc
    elif p.suffix.lower() == ".toml":
        try:
            data = tomllib.loads(text.decode("utf-8"))
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"invalid TOML config: {exc}") from exc
    else:
        raise ConfigError("config file must end in .json or .toml")
    if not isinstance(data, dict):
        raise ConfigError("config document must be a table of key/value pairs")
    return build_config(data)
