"""Experiment configuration: a flat YAML mapping with documented defaults.

Recognised keys (all optional except one of ``preset`` / ``phi_file``)::

    preset       name from ``hysterm presets``
    phi_file     text file with columns ``phi`` and ``h0`` (0 where forced)
    alpha, beta  thresholds, alpha < 0 < beta          (-0.1, 0.1)
    nx, dt, T    grid                                   (401, 1e-5, 0.01)
    mode         relay | fixedpoint | both              (both)
    tol_fp       Picard stopping tolerance              (h/4)
    tol_slope    transversality cut-off                 (1e-3)
    tol_bound    slack on sup-norm bound checks         (1e-8)
    max_iter     Picard sweep limit                     (20)
    h_steps      quotient steps for one-sided bounds    ([1, 2, 4])
    refinements  [[nx, dt], ...] for pattern statistics ([[201, 4e-5], [401, 1e-5]])
    out_dir      output directory                       (runs/<preset>)

``HYSTERM_OUT`` in the environment replaces ``out_dir``.
"""

from __future__ import annotations

import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import List, Optional, Tuple

import yaml

from .errors import ParseError, ValidationError
from .presets import PRESETS

MODES = ("relay", "fixedpoint", "both")
ENV_OUT = "HYSTERM_OUT"


@dataclass
class ExperimentConfig:
    preset: Optional[str] = None
    phi_file: Optional[str] = None
    alpha: float = -0.1
    beta: float = 0.1
    nx: int = 401
    dt: float = 1e-5
    T: float = 0.01
    mode: str = "both"
    tol_fp: Optional[float] = None
    tol_slope: float = 1e-3
    tol_bound: float = 1e-8
    max_iter: int = 20
    h_steps: List[int] = field(default_factory=lambda: [1, 2, 4])
    refinements: List[Tuple[int, float]] = field(default_factory=lambda: [(201, 4e-5), (401, 1e-5)])
    out_dir: Optional[str] = None

    @property
    def h(self) -> float:
        return 1.0 / (self.nx - 1)

    @property
    def effective_tol_fp(self) -> float:
        return self.h / 4 if self.tol_fp is None else self.tol_fp

    @property
    def label(self) -> str:
        return self.preset or Path(self.phi_file).stem

    def resolved_out_dir(self, override: Optional[str] = None) -> Path:
        """``override`` (command line) beats ``HYSTERM_OUT``, which beats ``out_dir``."""
        if override:
            return Path(override)
        env = os.environ.get(ENV_OUT)
        if env:
            return Path(env)
        return Path(self.out_dir) if self.out_dir else Path("runs") / self.label

    def as_dict(self) -> dict:
        d = asdict(self)
        d["refinements"] = [list(r) for r in self.refinements]
        d["tol_fp"] = self.effective_tol_fp
        return d

    def validate(self) -> "ExperimentConfig":
        if (self.preset is None) == (self.phi_file is None):
            raise ValidationError("preset", "give exactly one of preset or phi_file")
        if self.preset is not None and self.preset not in PRESETS:
            raise ValidationError("preset", f"unknown preset {self.preset!r}; available: {', '.join(PRESETS)}")
        if not self.alpha < 0:
            raise ValidationError("alpha", f"must be < 0 (got {self.alpha})")
        if not self.beta > 0:
            raise ValidationError("beta", f"must be > 0 (got {self.beta})")
        if self.nx < 3:
            raise ValidationError("nx", f"must be >= 3 (got {self.nx})")
        if not self.dt > 0:
            raise ValidationError("dt", f"must be > 0 (got {self.dt})")
        if not 0 < self.T <= 1:
            raise ValidationError("T", f"must lie in (0, 1] (got {self.T})")
        if self.dt > self.T:
            raise ValidationError("dt", f"exceeds T={self.T}")
        if self.mode not in MODES:
            raise ValidationError("mode", f"must be one of {', '.join(MODES)} (got {self.mode!r})")
        for name in ("tol_slope", "tol_bound"):
            if not getattr(self, name) > 0:
                raise ValidationError(name, "must be > 0")
        if self.tol_fp is not None and not self.tol_fp > 0:
            raise ValidationError("tol_fp", "must be > 0")
        if self.max_iter < 1:
            raise ValidationError("max_iter", "must be >= 1")
        if not self.h_steps or any(k < 1 for k in self.h_steps):
            raise ValidationError("h_steps", "must be a non-empty list of positive integers")
        for i, (nx, dt) in enumerate(self.refinements):
            if nx < 3 or not dt > 0:
                raise ValidationError(f"refinements[{i}]", f"needs nx >= 3 and dt > 0 (got {nx}, {dt})")
        return self


_FIELD_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def _coerce(key, value):
    try:
        if key in ("nx", "max_iter"):
            if isinstance(value, bool) or float(value) != int(value):
                raise ValueError
            return int(value)
        if key in ("alpha", "beta", "dt", "T", "tol_slope", "tol_bound"):
            return float(value)
        if key == "tol_fp":
            return None if value is None else float(value)
        if key in ("preset", "phi_file", "mode", "out_dir"):
            return None if value is None else str(value)
        if key == "h_steps":
            return [int(k) for k in value]
        if key == "refinements":
            out = []
            for i, pair in enumerate(value):
                if len(pair) != 2:
                    raise ValidationError(f"refinements[{i}]", "expected a pair [nx, dt]")
                out.append((int(pair[0]), float(pair[1])))
            return out
    except ValidationError:
        raise
    except (TypeError, ValueError):
        raise ValidationError(key, f"cannot interpret {value!r}") from None
    raise ValidationError(key, "unknown key")


def config_from_mapping(data: dict) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ParseError("config must be a mapping of keys to values")
    unknown = sorted(set(data) - set(_FIELD_TYPES))
    if unknown:
        raise ValidationError(unknown[0], f"unknown key; allowed: {', '.join(_FIELD_TYPES)}")
    kwargs = {k: _coerce(k, v) for k, v in data.items()}
    return ExperimentConfig(**kwargs).validate()


def load_config(path) -> ExperimentConfig:
    """Read, fill defaults and validate a YAML config file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if data is None:
        data = {}
    cfg = config_from_mapping(data)
    if cfg.phi_file is not None and not Path(cfg.phi_file).is_absolute():
        cfg.phi_file = str(path.parent / cfg.phi_file)
    return cfg


DEFAULTS = ExperimentConfig(preset=PRESETS[0])
