"""Simulation configuration: validation, text round-trip, initial state."""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np
import yaml

from .construction import BasisParams, basis_vectors

MODES = ("simulate", "montecarlo", "enumerate", "povm", "validate")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SimConfig:
    mode: str = "simulate"
    phi: float = 0.5
    basis_a: float = 1.0
    chi: float = 0.0
    alpha_sq: float = 0.5
    psi_phase: float = 0.0
    n_max: int = 200
    eta: float = 1e-6
    trials: int = 10000
    seed: int = 42
    out_path: str = "out"
    povm_path: str | None = None
    enum_depth: int | None = None
    workers: int = 1

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {', '.join(MODES)}; got {self.mode!r}")
        for name in ("phi", "basis_a", "chi", "alpha_sq", "psi_phase", "eta"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"{name} must be finite")
        if not 0.0 < self.phi < math.pi / 2:
            raise ConfigError(f"phi must lie in (0, pi/2); got {self.phi!r}")
        if not 0.0 <= self.basis_a <= 1.0:
            raise ConfigError(f"basis_a must lie in [0, 1]; got {self.basis_a!r}")
        if not 0.0 <= self.alpha_sq <= 1.0:
            raise ConfigError(f"alpha_sq must lie in [0, 1]; got {self.alpha_sq!r}")
        if not 0.0 < self.eta < 0.5:
            raise ConfigError(f"eta must lie in (0, 1/2); got {self.eta!r}")
        if self.n_max < 1:
            raise ConfigError(f"steps must be >= 1; got {self.n_max}")
        if self.trials < 0:
            raise ConfigError(f"trials must be >= 0; got {self.trials}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be a 64-bit unsigned integer; got {self.seed}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1; got {self.workers}")
        if self.enum_depth is not None and self.enum_depth < 1:
            raise ConfigError(f"depth must be >= 1; got {self.enum_depth}")
        if self.mode == "povm" and not self.povm_path:
            raise ConfigError("povm mode requires a POVM file (--povm)")

    @property
    def basis(self) -> BasisParams:
        a = self.basis_a
        return BasisParams(a, 0.0 if a in (0.0, 1.0) else self.chi)

    def initial_state(self, basis: BasisParams | None = None) -> np.ndarray:
        """sqrt(alpha_sq) b0 + e^{i psi_phase} sqrt(1 - alpha_sq) b1."""
        b0, b1 = basis_vectors(basis or self.basis)
        psi = math.sqrt(self.alpha_sq) * b0 + np.exp(1j * self.psi_phase) * math.sqrt(1.0 - self.alpha_sq) * b1
        return psi / np.linalg.norm(psi)

    def to_text(self) -> str:
        """One ``field: value`` line per set field, floats at 17 significant digits.

        The worker count is left out: it never changes results, and leaving
        it out keeps written configs identical across parallel settings.
        """
        lines = []
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if v is None or f.name == "workers":
                continue
            lines.append(f"{f.name}: {format(v, '.17g') if isinstance(v, float) else v}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "SimConfig":
        try:
            data = yaml.safe_load(text) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"malformed config: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config must be a mapping of field: value")
        return cls.from_mapping(data)

    @classmethod
    def from_mapping(cls, data: dict) -> "SimConfig":
        fields = {f.name: f for f in dataclasses.fields(cls)}
        kwargs = {}
        for key, value in data.items():
            if key not in fields:
                raise ConfigError(f"unknown config field {key!r}")
            kwargs[key] = _coerce(key, fields[key].type, value)
        return cls(**kwargs)


def _coerce(key: str, typ: str, value):
    if value is None:
        return None
    try:
        if typ == "float":
            return float(value)
        if typ in ("int", "int | None"):
            if isinstance(value, float) and not value.is_integer():
                raise ValueError
            return int(value)
        return str(value)
    except (TypeError, ValueError):
        raise ConfigError(f"field {key!r}: cannot interpret {value!r} as {typ}") from None


def normalize_config_text(text: str) -> str:
    return SimConfig.from_text(text).to_text()
