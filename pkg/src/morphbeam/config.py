"""Experiment configuration: strict JSON parsing and domain-object builders.

Keys carry their units (``p_t_dbm``, ``theta_deg``, ``d_max_wavelengths``) so
files are self-describing; values convert to internal units (mW, radians,
wavelengths) only when the domain objects are built. Unknown keys anywhere in
the document are rejected, which catches typos before they silently change an
experiment.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .array_model import ArrayGeometry, SurfaceShape, TargetSet
from .bcd import BcdConfig, InitScheme, Scheme
from .shape_opt import AscentConfig
from .units import wavelength_from_frequency


class ConfigError(ValueError):
    """Invalid or malformed experiment configuration."""


_REQUIRED = object()


def _take(block: dict, context: str, key: str, kind, default=_REQUIRED):
    if key in block:
        value = block.pop(key)
    elif default is not _REQUIRED:
        return default
    else:
        raise ConfigError(f"{context}: missing required key '{key}'")
    if kind is float and isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if kind is int and isinstance(value, int) and not isinstance(value, bool):
        return value
    if kind is str and isinstance(value, str):
        return value
    if kind is list and isinstance(value, list):
        return value
    if kind is dict and isinstance(value, dict):
        return value
    raise ConfigError(f"{context}: key '{key}' must be {kind.__name__}, "
                      f"got {type(value).__name__}")


def _reject_unknown(block: dict, context: str) -> None:
    if block:
        raise ConfigError(f"{context}: unknown keys {sorted(block)}")


@dataclass
class GeometryConfig:
    n_x: int
    n_z: int
    dx_wavelengths: float
    dz_wavelengths: float
    frequency_hz: float
    d_max_wavelengths: float

    @classmethod
    def from_dict(cls, d: dict) -> "GeometryConfig":
        d = dict(d)
        out = cls(
            n_x=_take(d, "geometry", "n_x", int),
            n_z=_take(d, "geometry", "n_z", int),
            dx_wavelengths=_take(d, "geometry", "dx_wavelengths", float),
            dz_wavelengths=_take(d, "geometry", "dz_wavelengths", float),
            frequency_hz=_take(d, "geometry", "frequency_hz", float),
            d_max_wavelengths=_take(d, "geometry", "d_max_wavelengths", float),
        )
        _reject_unknown(d, "geometry")
        return out

    def to_dict(self) -> dict:
        return {
            "n_x": self.n_x, "n_z": self.n_z,
            "dx_wavelengths": self.dx_wavelengths,
            "dz_wavelengths": self.dz_wavelengths,
            "frequency_hz": self.frequency_hz,
            "d_max_wavelengths": self.d_max_wavelengths,
        }


@dataclass
class TargetConfig:
    theta_deg: float
    phi_deg: float
    rcs_re: float = 1.0
    rcs_im: float = 0.0

    @classmethod
    def from_dict(cls, d: dict, index: int) -> "TargetConfig":
        d = dict(d)
        ctx = f"targets[{index}]"
        out = cls(
            theta_deg=_take(d, ctx, "theta_deg", float),
            phi_deg=_take(d, ctx, "phi_deg", float),
            rcs_re=_take(d, ctx, "rcs_re", float, 1.0),
            rcs_im=_take(d, ctx, "rcs_im", float, 0.0),
        )
        _reject_unknown(d, ctx)
        return out

    def to_dict(self) -> dict:
        return {"theta_deg": self.theta_deg, "phi_deg": self.phi_deg,
                "rcs_re": self.rcs_re, "rcs_im": self.rcs_im}


@dataclass
class AlgorithmConfig:
    scheme: str = Scheme.FIM_MIMO.value
    max_outer_iters: int = 50
    rel_increase_threshold_db: float = -30.0
    n_starts: int = 4
    init_scheme: str = InitScheme.UNIFORM_BOX.value
    grad_tol: float = 1e-6
    ascent_max_iters: int = 1000
    armijo_c: float = 1e-4
    shrink: float = 0.5
    initial_step: float = 1e-2
    init_displacements: list = field(default_factory=list)

    @classmethod
    def from_dict(cls, d: dict) -> "AlgorithmConfig":
        d = dict(d)
        out = cls(
            scheme=_take(d, "algorithm", "scheme", str, Scheme.FIM_MIMO.value),
            max_outer_iters=_take(d, "algorithm", "max_outer_iters", int, 50),
            rel_increase_threshold_db=_take(
                d, "algorithm", "rel_increase_threshold_db", float, -30.0),
            n_starts=_take(d, "algorithm", "n_starts", int, 4),
            init_scheme=_take(d, "algorithm", "init_scheme", str,
                              InitScheme.UNIFORM_BOX.value),
            grad_tol=_take(d, "algorithm", "grad_tol", float, 1e-6),
            ascent_max_iters=_take(d, "algorithm", "ascent_max_iters", int, 1000),
            armijo_c=_take(d, "algorithm", "armijo_c", float, 1e-4),
            shrink=_take(d, "algorithm", "shrink", float, 0.5),
            initial_step=_take(d, "algorithm", "initial_step", float, 1e-2),
            init_displacements=_take(d, "algorithm", "init_displacements", list, []),
        )
        _reject_unknown(d, "algorithm")
        try:
            Scheme(out.scheme)
        except ValueError:
            raise ConfigError(f"algorithm: unknown scheme '{out.scheme}'") from None
        try:
            InitScheme(out.init_scheme)
        except ValueError:
            raise ConfigError(
                f"algorithm: unknown init_scheme '{out.init_scheme}'") from None
        if not all(isinstance(v, (int, float)) and not isinstance(v, bool)
                   for v in out.init_displacements):
            raise ConfigError("algorithm: init_displacements must be numbers")
        return out

    def to_dict(self) -> dict:
        return {
            "scheme": self.scheme,
            "max_outer_iters": self.max_outer_iters,
            "rel_increase_threshold_db": self.rel_increase_threshold_db,
            "n_starts": self.n_starts,
            "init_scheme": self.init_scheme,
            "grad_tol": self.grad_tol,
            "ascent_max_iters": self.ascent_max_iters,
            "armijo_c": self.armijo_c,
            "shrink": self.shrink,
            "initial_step": self.initial_step,
            "init_displacements": list(self.init_displacements),
        }


@dataclass
class OutputConfig:
    dir: str = "out"
    grid_points: int = 181

    @classmethod
    def from_dict(cls, d: dict) -> "OutputConfig":
        d = dict(d)
        out = cls(
            dir=_take(d, "output", "dir", str, "out"),
            grid_points=_take(d, "output", "grid_points", int, 181),
        )
        _reject_unknown(d, "output")
        if out.grid_points < 2:
            raise ConfigError(f"output: grid_points must be >= 2, got {out.grid_points}")
        return out

    def to_dict(self) -> dict:
        return {"dir": self.dir, "grid_points": self.grid_points}


@dataclass
class ExperimentConfig:
    geometry: GeometryConfig
    targets: list[TargetConfig]
    p_t_dbm: float
    algorithm: AlgorithmConfig
    output: OutputConfig
    seed: int = 0

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        if not isinstance(d, dict):
            raise ConfigError(f"config root must be an object, got {type(d).__name__}")
        d = dict(d)
        geometry = GeometryConfig.from_dict(_take(d, "config", "geometry", dict))
        raw_targets = _take(d, "config", "targets", list)
        if not raw_targets:
            raise ConfigError("targets: at least one target is required")
        targets = [TargetConfig.from_dict(t, i) if isinstance(t, dict)
                   else _bad_target(i, t)
                   for i, t in enumerate(raw_targets)]
        power = _take(d, "config", "power", dict)
        power = dict(power)
        p_t_dbm = _take(power, "power", "p_t_dbm", float)
        _reject_unknown(power, "power")
        algorithm = AlgorithmConfig.from_dict(_take(d, "config", "algorithm", dict, {}))
        output = OutputConfig.from_dict(_take(d, "config", "output", dict, {}))
        seed = _take(d, "config", "seed", int, 0)
        _reject_unknown(d, "config")
        cfg = cls(geometry=geometry, targets=targets, p_t_dbm=p_t_dbm,
                  algorithm=algorithm, output=output, seed=seed)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        "Cross-field checks beyond per-block parsing; raises ConfigError."
        if self.seed < 0:
            raise ConfigError(f"seed must be nonnegative, got {self.seed}")
        try:
            geom = self.build_geometry()
            self.build_targets()
            self.build_bcd()
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(str(exc)) from exc
        init = self.algorithm.init_displacements
        if init:
            if len(init) != geom.n_elements:
                raise ConfigError(
                    f"algorithm: init_displacements has {len(init)} entries, "
                    f"geometry has {geom.n_elements} elements")
            worst = max(abs(float(v)) for v in init)
            if worst > geom.d_max + 1e-12:
                raise ConfigError(
                    f"algorithm: init displacement {worst:g} exceeds morphing "
                    f"limit {geom.d_max:g}")

    def to_dict(self) -> dict:
        return {
            "geometry": self.geometry.to_dict(),
            "targets": [t.to_dict() for t in self.targets],
            "power": {"p_t_dbm": self.p_t_dbm},
            "algorithm": self.algorithm.to_dict(),
            "output": self.output.to_dict(),
            "seed": self.seed,
        }

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def digest(self) -> str:
        "Hex digest identifying the configuration content."
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()

    # builders -----------------------------------------------------------

    def build_geometry(self) -> ArrayGeometry:
        g = self.geometry
        return ArrayGeometry(
            n_x=g.n_x, n_z=g.n_z,
            dx=g.dx_wavelengths, dz=g.dz_wavelengths,
            wavelength=wavelength_from_frequency(g.frequency_hz),
            d_max=g.d_max_wavelengths,
        )

    def build_targets(self) -> TargetSet:
        thetas = [t.theta_deg for t in self.targets]
        phis = [t.phi_deg for t in self.targets]
        rcs = [complex(t.rcs_re, t.rcs_im) for t in self.targets]
        return TargetSet.from_degrees(np.asarray(thetas), np.asarray(phis),
                                      np.asarray(rcs))

    def build_bcd(self) -> BcdConfig:
        a = self.algorithm
        ascent = AscentConfig(
            grad_tol=a.grad_tol, max_iters=a.ascent_max_iters,
            armijo_c=a.armijo_c, shrink=a.shrink, initial_step=a.initial_step,
        )
        return BcdConfig(
            max_outer_iters=a.max_outer_iters,
            rel_increase_threshold_db=a.rel_increase_threshold_db,
            ascent=ascent,
            n_starts=a.n_starts,
            rng_seed=self.seed,
            init_scheme=InitScheme(a.init_scheme),
        )

    def build_init_shape(self) -> SurfaceShape | None:
        if not self.algorithm.init_displacements:
            return None
        return SurfaceShape(np.asarray(self.algorithm.init_displacements, dtype=float))

    @property
    def scheme(self) -> Scheme:
        return Scheme(self.algorithm.scheme)


def _bad_target(index: int, value) -> TargetConfig:
    raise ConfigError(f"targets[{index}] must be an object, got {type(value).__name__}")


def load_config(path: str | Path) -> ExperimentConfig:
    """Parse and validate a JSON config file.

    Raises ``ConfigError`` for malformed JSON or schema/semantic violations;
    ``OSError`` propagates for unreadable paths.
    """
    text = Path(path).read_text()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    return ExperimentConfig.from_dict(raw)
