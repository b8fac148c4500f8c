"""
Run configuration for the period pipeline.

Defaults live in templates/tropical/run_config.json. A manifest's
``options`` section and command-line flags are merged on top of them.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

from mpmath import mp

from .errors import OracleError

DEFAULT_CONFIG = Path(__file__).resolve().parents[2] / "templates" / "tropical" / "run_config.json"


@dataclass
class QuadratureConfig:
    samples: Dict[int, int] = field(default_factory=lambda: {1: 2048, 2: 256, 3: 64})
    t_moduli: List[float] = field(default_factory=lambda: [0.05, 0.1, 0.3])
    t_arguments: List[float] = field(default_factory=lambda: [0.0, 1.0, 2.5])
    tolerance: float = 1e-8
    deformation: float = 0.2

    def __post_init__(self):
        self.samples = {int(k): int(v) for k, v in self.samples.items()}
        if any(v < 64 for v in self.samples.values()):
            raise OracleError(f"quadrature needs at least 64 samples per dimension, got {self.samples}")
        if self.tolerance <= 0:
            raise OracleError(f"tolerance must be positive, got {self.tolerance}")

    @classmethod
    def from_dict(cls, d: Dict) -> 'QuadratureConfig':
        defaults = cls()
        return cls(
            samples=d.get('samples', defaults.samples),
            t_moduli=d.get('t_moduli', defaults.t_moduli),
            t_arguments=d.get('t_arguments', defaults.t_arguments),
            tolerance=d.get('tolerance', defaults.tolerance),
            deformation=d.get('deformation', defaults.deformation),
        )

    def samples_for(self, n: int) -> int:
        return self.samples.get(n, min(self.samples.values()))

    def with_samples(self, samples: int) -> 'QuadratureConfig':
        """Same configuration with one sample count for every dimension."""
        return QuadratureConfig({k: samples for k in self.samples}, list(self.t_moduli),
                                list(self.t_arguments), self.tolerance, self.deformation)


@dataclass
class RunConfig:
    order: int = 5
    precision: int = 30
    tolerance: float = 1e-12
    report_precision: int = 12
    radius_trials: int = 10
    seed: int = 0
    quadrature: QuadratureConfig = field(default_factory=QuadratureConfig)

    @classmethod
    def from_dict(cls, d: Dict) -> 'RunConfig':
        defaults = cls()
        return cls(
            order=d.get('order', defaults.order),
            precision=d.get('precision', defaults.precision),
            tolerance=d.get('tolerance', defaults.tolerance),
            report_precision=d.get('report_precision', defaults.report_precision),
            radius_trials=d.get('radius_trials', defaults.radius_trials),
            seed=d.get('seed', defaults.seed),
            quadrature=QuadratureConfig.from_dict(d.get('quadrature', {})),
        )

    def to_dict(self) -> Dict:
        return {
            'order': self.order,
            'precision': self.precision,
            'tolerance': self.tolerance,
            'report_precision': self.report_precision,
            'radius_trials': self.radius_trials,
            'seed': self.seed,
            'quadrature': {
                'samples': {str(k): v for k, v in self.quadrature.samples.items()},
                't_moduli': self.quadrature.t_moduli,
                't_arguments': self.quadrature.t_arguments,
                'tolerance': self.quadrature.tolerance,
                'deformation': self.quadrature.deformation,
            },
        }

    def apply_precision(self):
        mp.dps = self.precision


def deep_merge(base: Dict, overrides: Dict) -> Dict:
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(base.get(key), dict):
            deep_merge(base[key], value)
        else:
            base[key] = value
    return base


def load_config(path: Optional[Path] = None, overrides: Optional[Dict] = None) -> RunConfig:
    """File defaults, then ``overrides`` (manifest options, CLI flags)."""
    path = path or DEFAULT_CONFIG
    data: Dict = {}
    if path.exists():
        with open(path) as f:
            data = json.load(f)
    if overrides:
        deep_merge(data, overrides)
    return RunConfig.from_dict(data)
