"""Flat ``section.key_unit = value`` configuration files and built-in scenarios.

Keys carry their unit in the name so a bare number is never ambiguous::

    # degenerate pair 2.1 nm below the 780 nm line
    fiber.diameter_nm = 350
    pair.detuning_nm = 2.1
    vapor.density_per_cm3 = 1e12

Later sources override earlier ones: defaults, built-in scenario, config file,
then ``--set`` overrides from the command line.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

from ..constants import wavelength_span_to_omega, wavelength_to_omega
from ..engine import AtomicLadder, PairKind, PhotonPairSpec, ToroidSpec, VaporSpec
from ..errors import ConfigError, TpaError
from ..fiber import ENERGY_CONVENTIONS, FiberSpec

NM = 1e-9


def _choice(*options):
    def parse(text):
        value = str(text).strip().lower()
        if value not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return value
    return parse


def _positive_int(text):
    value = int(str(text).strip())
    if value < 1:
        raise ValueError("expected a positive integer")
    return value


def _float(text):
    value = float(str(text).strip())
    if not math.isfinite(value):
        raise ValueError("expected a finite number")
    return value


def _optional_float(text):
    return None if str(text).strip().lower() in ("", "none") else _float(text)


def _text(text):
    return str(text).strip()


# key -> (parser, default)
SCHEMA: dict[str, tuple[Any, Any]] = {
    "fiber.diameter_nm": (_float, 350.0),
    "fiber.length_mm": (_float, 5.0),
    "fiber.core_index": (_float, 1.4537),
    "pair.kind": (_choice("entangled", "monochromatic"), "entangled"),
    "pair.wavelength_nm": (_float, 778.0),
    "pair.idler_wavelength_nm": (_optional_float, None),
    "pair.detuning_nm": (_float, 2.1),
    "pair.bandwidth_nm": (_float, 1.0),
    "atom.r1_nm": (_float, 0.223),
    "atom.r2_nm": (_float, 0.0492),
    "atom.gamma1_per_s": (_float, 1e9),
    "atom.gamma2_per_s": (_float, 1e9),
    "vapor.density_per_cm3": (_float, 1e12),
    "toroid.principal_diameter_um": (_optional_float, None),
    "toroid.minor_diameter_nm": (_optional_float, None),
    "model.azimuth": (_choice("full", "averaged"), "full"),
    "model.velocity": (_choice("group", "phase"), "group"),
    "model.energy_convention": (_choice(*ENERGY_CONVENTIONS), "hbar_omega"),
    "sweep.variable": (_choice("none", "detuning", "bandwidth"), "none"),
    "sweep.lo_nm": (_optional_float, None),
    "sweep.hi_nm": (_optional_float, None),
    "sweep.steps": (_positive_int, 2),
    "optimize.lo_nm": (_float, 0.2),
    "optimize.hi_nm": (_float, 6.0),
    "optimize.prescan_points": (_positive_int, 32),
    "output.format": (_choice("csv", "json"), "csv"),
    "output.path": (_text, ""),
}

DEFAULTS = {key: default for key, (_, default) in SCHEMA.items()}

BUILTIN_SCENARIOS: dict[str, dict[str, Any]] = {
    "table1-entangled-fiber": {"pair.kind": "entangled"},
    "table1-mono-fiber": {"pair.kind": "monochromatic"},
    "table1-toroid": {
        "pair.kind": "monochromatic",
        "toroid.principal_diameter_um": 19.0,
        "toroid.minor_diameter_nm": 350.0,
    },
}

#: Reference rates of the table1 scenarios, s^-1, reported alongside the computed ones.
TABLE1_REFERENCE = {
    "table1-entangled-fiber": 1.45e6,
    "table1-mono-fiber": 2.7e4,
    "table1-toroid": 0.6e6,
}


@dataclass(frozen=True)
class SweepSpec:
    variable: str
    lo_nm: float
    hi_nm: float
    steps: int


@dataclass(frozen=True)
class ModelOptions:
    azimuth: str = "full"
    velocity: str = "group"
    energy_convention: str = "hbar_omega"


@dataclass(frozen=True)
class ScenarioConfig:
    fiber: FiberSpec
    atom: AtomicLadder
    pair: PhotonPairSpec
    vapor: VaporSpec
    toroid: ToroidSpec | None
    sweep: SweepSpec | None
    model: ModelOptions
    output_format: str
    output_path: str
    values: tuple  # sorted (key, value) pairs after parsing

    @property
    def parameters(self) -> dict[str, Any]:
        return dict(self.values)

    @property
    def config_hash(self) -> str:
        return config_hash(self.parameters)

    @property
    def wavelength(self) -> float:
        return self.parameters["pair.wavelength_nm"] * NM

    def with_values(self, **overrides) -> "ScenarioConfig":
        """Copy with keys overridden; keys use ``__`` in place of the dot."""
        merged = self.parameters
        merged.update({k.replace("__", "."): v for k, v in overrides.items()})
        return build_config(merged)

    def replace(self, mapping: Mapping[str, Any]) -> "ScenarioConfig":
        merged = self.parameters
        merged.update(mapping)
        return build_config(merged)


def config_hash(parameters: Mapping[str, Any]) -> str:
    """SHA-256 of the physics parameters; ``output.*`` keys do not enter."""
    physics = {k: v for k, v in parameters.items() if not k.startswith("output.")}
    canonical = json.dumps(physics, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def parse_config_text(text: str, source: str = "<config>") -> dict[str, str]:
    """Read ``key = value`` lines; ``#`` starts a comment."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in SCHEMA:
            raise ConfigError(f"unknown key ({source}:{lineno})", key)
        out[key] = value
    return out


def load_config_file(path) -> dict[str, str]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}", str(path)) from exc
    return parse_config_text(text, str(path))


def parse_overrides(items) -> dict[str, str]:
    out = {}
    for item in items or ():
        if "=" not in item:
            raise ConfigError(f"override must look like key=value, got {item!r}")
        key, value = (part.strip() for part in item.split("=", 1))
        if key not in SCHEMA:
            raise ConfigError("unknown key in override", key)
        out[key] = value
    return out


def resolve(scenario: str | None = None, *layers: Mapping[str, Any]) -> dict[str, Any]:
    merged: dict[str, Any] = dict(DEFAULTS)
    if scenario is not None:
        if scenario not in BUILTIN_SCENARIOS:
            raise ConfigError(f"unknown scenario {scenario!r}; built-ins are "
                              f"{', '.join(BUILTIN_SCENARIOS)}", "scenario")
        merged.update(BUILTIN_SCENARIOS[scenario])
    for layer in layers:
        merged.update(layer)
    return merged


def _parse_values(raw: Mapping[str, Any]) -> dict[str, Any]:
    values = {}
    for key, item in raw.items():
        if key not in SCHEMA:
            raise ConfigError("unknown key", key)
        parser, default = SCHEMA[key]
        if item is None:
            values[key] = None
            continue
        try:
            values[key] = parser(item)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid value {item!r}: {exc}", key) from exc
    for key, default in DEFAULTS.items():
        values.setdefault(key, default)
    return values


def _section(key, build):
    try:
        return build()
    except ConfigError:
        raise
    except (TpaError, ValueError, TypeError) as exc:
        raise ConfigError(str(exc), key) from exc


def _require_positive(values, *keys):
    for key in keys:
        if not values[key] > 0:
            raise ConfigError(f"must be positive, got {values[key]!r}", key)


def build_config(raw: Mapping[str, Any]) -> ScenarioConfig:
    """Validate a flat mapping and assemble the typed configuration."""
    v = _parse_values(raw)
    _require_positive(v, "fiber.diameter_nm", "fiber.length_mm", "fiber.core_index",
                      "pair.wavelength_nm", "atom.r1_nm", "atom.r2_nm",
                      "atom.gamma1_per_s", "atom.gamma2_per_s")
    if v["vapor.density_per_cm3"] < 0:
        raise ConfigError("must be non-negative", "vapor.density_per_cm3")

    fiber = _section("fiber", lambda: FiberSpec(v["fiber.diameter_nm"] * NM,
                                                v["fiber.length_mm"] * 1e-3,
                                                v["fiber.core_index"]))
    lam_s = v["pair.wavelength_nm"] * NM
    lam_i = lam_s if v["pair.idler_wavelength_nm"] is None else v["pair.idler_wavelength_nm"] * NM
    if lam_i <= 0:
        raise ConfigError("must be positive", "pair.idler_wavelength_nm")
    omega_s, omega_i = wavelength_to_omega(lam_s), wavelength_to_omega(lam_i)
    delta = wavelength_span_to_omega(v["pair.detuning_nm"] * NM, lam_s)
    kind = v["pair.kind"]
    sigma = wavelength_span_to_omega(v["pair.bandwidth_nm"] * NM, lam_s)
    if kind == "entangled":
        _require_positive(v, "pair.bandwidth_nm")
    pair = _section("pair", lambda: PhotonPairSpec(omega_s, omega_i,
                                                   sigma if kind == "entangled" else 0.0,
                                                   PairKind(kind)))
    omega1 = omega_s - delta
    if omega1 <= 0:
        raise ConfigError("detuning puts the intermediate level at negative frequency",
                          "pair.detuning_nm")
    atom = _section("atom", lambda: AtomicLadder.from_radii(
        omega1, omega_s + omega_i - omega1, v["atom.r1_nm"] * NM, v["atom.r2_nm"] * NM,
        v["atom.gamma1_per_s"], v["atom.gamma2_per_s"]))
    vapor = VaporSpec(v["vapor.density_per_cm3"] * 1e6)

    toroid = None
    big, small = v["toroid.principal_diameter_um"], v["toroid.minor_diameter_nm"]
    if (big is None) != (small is None):
        missing = "toroid.minor_diameter_nm" if small is None else "toroid.principal_diameter_um"
        raise ConfigError("toroid needs both diameters", missing)
    if big is not None:
        _require_positive(v, "toroid.principal_diameter_um", "toroid.minor_diameter_nm")
        toroid = _section("toroid.minor_diameter_nm",
                          lambda: ToroidSpec(big * 1e-6, small * NM))
        if kind != "monochromatic":
            raise ConfigError("the toroid estimate uses monochromatic photons", "pair.kind")

    sweep = None
    if v["sweep.variable"] != "none":
        lo, hi, steps = v["sweep.lo_nm"], v["sweep.hi_nm"], v["sweep.steps"]
        if lo is None or hi is None:
            raise ConfigError("sweep needs lo and hi", "sweep.lo_nm" if lo is None else "sweep.hi_nm")
        if not lo < hi:
            raise ConfigError(f"lo ({lo}) must be below hi ({hi})", "sweep.lo_nm")
        if steps < 2:
            raise ConfigError("need at least 2 steps", "sweep.steps")
        if v["sweep.variable"] == "bandwidth" and kind != "entangled":
            raise ConfigError("bandwidth sweeps need an entangled pair", "sweep.variable")
        if v["sweep.variable"] == "bandwidth" and lo <= 0:
            raise ConfigError("bandwidth must stay positive", "sweep.lo_nm")
        sweep = SweepSpec(v["sweep.variable"], lo, hi, steps)

    if not 0 < v["optimize.lo_nm"] < v["optimize.hi_nm"]:
        raise ConfigError("need 0 < optimize.lo_nm < optimize.hi_nm", "optimize.lo_nm")
    if v["optimize.prescan_points"] < 3:
        raise ConfigError("need at least 3 prescan points", "optimize.prescan_points")

    model = ModelOptions(v["model.azimuth"], v["model.velocity"], v["model.energy_convention"])
    return ScenarioConfig(fiber, atom, pair, vapor, toroid, sweep, model,
                          v["output.format"], v["output.path"], tuple(sorted(v.items())))


def load_scenario(scenario: str | None = None, config_path=None, overrides=None) -> ScenarioConfig:
    layers = []
    if config_path is not None:
        layers.append(load_config_file(config_path))
    if overrides:
        layers.append(parse_overrides(overrides) if not isinstance(overrides, Mapping)
                      else dict(overrides))
    return build_config(resolve(scenario, *layers))
