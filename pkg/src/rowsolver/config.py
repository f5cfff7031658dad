"""
Solver configuration.
Defaults can be overridden from the environment (.env supported) or a YAML file.
"""

import os
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, Dict, Optional, Union

import yaml
from dotenv import load_dotenv

ENV_PREFIX = "HIERBAND_"


@dataclass(frozen=True)
class SolverConfig:
    """ADMM settings shared by every row problem."""

    eps_abs: float = 1e-6
    eps_rel: float = 1e-6
    max_iter: int = 10_000
    rho_init: float = 1.0
    rho_check_period: int = 10
    rho_balance: float = 10.0
    rho_scale: float = 2.0
    support_threshold: float = 1e-10

    def __post_init__(self):
        for name in ('eps_abs', 'eps_rel', 'rho_init', 'support_threshold'):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        for name in ('max_iter', 'rho_check_period'):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value}")
        if not self.rho_balance > 1:
            raise ValueError(f"rho_balance must exceed 1, got {self.rho_balance}")
        if not self.rho_scale > 1:
            raise ValueError(f"rho_scale must exceed 1, got {self.rho_scale}")

    @classmethod
    def from_env(cls, dotenv_path: Optional[str] = None) -> "SolverConfig":
        """Create config from HIERBAND_* environment variables."""
        load_dotenv(dotenv_path)
        values: Dict[str, Any] = {}
        for f in fields(cls):
            raw = os.getenv(ENV_PREFIX + f.name.upper())
            if raw is not None:
                values[f.name] = _coerce(f.type, raw)
        return cls(**values)

    @classmethod
    def from_yaml(cls, path: Union[str, Path], base: Optional["SolverConfig"] = None) -> "SolverConfig":
        """Overlay the `solver:` mapping of a YAML file on base (defaults if omitted)."""
        with open(path, 'r') as f:
            document = yaml.safe_load(f) or {}
        section = document.get('solver', {}) or {}
        known = {f.name: f.type for f in fields(cls)}
        unknown = set(section) - set(known)
        if unknown:
            raise ValueError(f"unknown solver settings: {sorted(unknown)}")
        values = {name: _coerce(known[name], value) for name, value in section.items()}
        return replace(base or cls(), **values)

    def override(self, **values) -> "SolverConfig":
        """Return a copy with the non-None values applied."""
        return replace(self, **{k: v for k, v in values.items() if v is not None})

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _coerce(type_, value):
    type_name = type_ if isinstance(type_, str) else getattr(type_, '__name__', str(type_))
    if type_name == 'int':
        return int(float(value))
    return float(value)


def load_settings(path: Union[str, Path]) -> Dict[str, Any]:
    """Full YAML settings document (solver, grid and cv sections)."""
    with open(path, 'r') as f:
        return yaml.safe_load(f) or {}
