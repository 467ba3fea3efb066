"""Flat ``key = value`` experiment configuration with dotted section names.

Example::

    # Example 1 material
    material.n = 3
    material.kappa = 1
    material.h.kind = power
    material.h.C = 1
    material.h.gamma = 2
    material.h.delta_exp = 2
    run.lambda = 1.05
    run.eps_list = 0.3, 0.2, 1e-4
    output.directory = out
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import asdict, dataclass, field

from .errors import ConfigError
from .material import LawKind, MaterialLaw, VolumetricLaw, stress_free_D

_FLOAT_KEYS = {
    "material.kappa", "material.h.C", "material.h.gamma", "material.h.delta_exp",
    "material.h.D", "run.lambda", "run.tol_bc", "run.rtol", "run.atol", "run.tol_inv",
}
_INT_KEYS = {"material.n", "run.mesh.nodes"}
_LIST_KEYS = {"run.eps_list", "run.C_list"}
_BOOL_KEYS = {"output.emit_plots", "run.predictor"}
_STR_KEYS = {"material.h.kind", "output.directory", "run.direction"}
KNOWN_KEYS = _FLOAT_KEYS | _INT_KEYS | _LIST_KEYS | _BOOL_KEYS | _STR_KEYS

PRESETS = {
    "example1": {
        "material.n": "3",
        "material.kappa": "1",
        "material.h.kind": "power",
        "material.h.C": "1",
        "material.h.gamma": "2",
        "material.h.delta_exp": "2",
        "run.lambda": "1.05",
        "run.eps_list": "0.3, 0.2, 1e-4",
    },
    "example2": {
        "material.n": "3",
        "material.kappa": "3",
        "material.h.kind": "penalty",
        "material.h.C": "20",
        "material.h.delta_exp": "2",
        "material.h.D": "1.5",
        "run.lambda": "1.05",
        "run.eps_list": "0.005",
        "run.C_list": "20, 40, 80, 160, 320, 640",
    },
}

_DEFAULTS = {
    "material.h.gamma": "1",
    "run.mesh.nodes": "4096",
    "run.tol_bc": "1e-9",
    "run.rtol": "1e-10",
    "run.atol": "1e-30",
    "run.tol_inv": "1e-12",
    "run.direction": "outward",
    "run.predictor": "true",
    "output.directory": "out",
    "output.emit_plots": "false",
}


def parse_text(text, source="<string>"):
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in KNOWN_KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        out[key] = val
    return out


def _to_bool(key, s):
    low = s.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {s!r}")


def _convert(key, s):
    try:
        if key in _FLOAT_KEYS:
            return float(s)
        if key in _INT_KEYS:
            return int(s)
        if key in _LIST_KEYS:
            return [float(x) for x in s.replace(";", ",").split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"{key}: cannot parse {s!r}") from exc
    if key in _BOOL_KEYS:
        return _to_bool(key, s)
    return s


@dataclass
class ExperimentConfig:
    """Validated experiment configuration.

    ``raw`` keeps the resolved string values; it is what the hash covers.
    """

    n: int
    kappa: float
    kind: LawKind
    C: float
    gamma: float
    delta_exp: float
    D: float | None
    lam: float
    eps_list: list
    C_list: list
    nodes: int
    tol_bc: float
    rtol: float
    atol: float
    tol_inv: float
    direction: str
    predictor: bool
    directory: str
    emit_plots: bool
    raw: dict = field(repr=False, default_factory=dict)

    @classmethod
    def from_mapping(cls, mapping, preset="example1"):
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
        raw = {**_DEFAULTS, **PRESETS[preset], **{k: str(v) for k, v in mapping.items()}}
        unknown = set(raw) - KNOWN_KEYS
        if unknown:
            raise ConfigError(f"unknown keys {sorted(unknown)}")
        val = {k: _convert(k, v) for k, v in raw.items()}
        try:
            kind = LawKind(val["material.h.kind"])
        except ValueError as exc:
            raise ConfigError(f"material.h.kind must be 'power' or 'penalty', "
                              f"got {val['material.h.kind']!r}") from exc
        cfg = cls(
            n=val["material.n"], kappa=val["material.kappa"], kind=kind,
            C=val["material.h.C"], gamma=val["material.h.gamma"],
            delta_exp=val["material.h.delta_exp"], D=val.get("material.h.D"),
            lam=val["run.lambda"], eps_list=val["run.eps_list"],
            C_list=val.get("run.C_list", []), nodes=val["run.mesh.nodes"],
            tol_bc=val["run.tol_bc"], rtol=val["run.rtol"], atol=val["run.atol"],
            tol_inv=val["run.tol_inv"], direction=val["run.direction"],
            predictor=val["run.predictor"], directory=val["output.directory"],
            emit_plots=val["output.emit_plots"], raw=raw,
        )
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path=None, preset="example1", overrides=None):
        mapping = {}
        if path is not None:
            try:
                with open(path) as fh:
                    mapping = parse_text(fh.read(), source=os.fspath(path))
            except OSError as exc:
                raise ConfigError(f"cannot read config {path}: {exc}") from exc
        mapping.update({k: v for k, v in (overrides or {}).items() if v is not None})
        return cls.from_mapping(mapping, preset)

    def validate(self):
        if not self.eps_list:
            raise ConfigError("run.eps_list is empty")
        if any(not 0 < e < 1 for e in self.eps_list):
            raise ConfigError(f"run.eps_list entries must lie in (0, 1): {self.eps_list}")
        if any(b >= a for a, b in zip(self.eps_list, self.eps_list[1:])):
            raise ConfigError(f"run.eps_list must be strictly decreasing: {self.eps_list}")
        if not self.lam > 0:
            raise ConfigError(f"run.lambda must be positive, got {self.lam}")
        if self.nodes < 8:
            raise ConfigError(f"run.mesh.nodes too small: {self.nodes}")
        if self.direction not in ("outward", "inward"):
            raise ConfigError(f"run.direction must be outward or inward, got {self.direction!r}")
        if any(c <= 0 for c in self.C_list):
            raise ConfigError(f"run.C_list entries must be positive: {self.C_list}")
        self.material()  # raises ConfigError on an invalid law

    def material(self, C=None) -> MaterialLaw:
        """Build the material, optionally replacing the volumetric constant ``C``."""
        C = self.C if C is None else C
        try:
            if self.kind is LawKind.POWER:
                D = self.D if self.D is not None else stress_free_D(
                    self.n, self.kappa, C, self.gamma, self.delta_exp)
                vol = VolumetricLaw.power(C, self.gamma, self.delta_exp, D)
            else:
                D = self.D if self.D is not None else stress_free_D(
                    self.n, self.kappa, C, 1.0, self.delta_exp, LawKind.PENALTY)
                vol = VolumetricLaw.penalty(C, self.delta_exp, D)
            return MaterialLaw(self.n, self.kappa, vol, tol_inv=self.tol_inv)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"invalid material: {exc}") from exc

    def solver_kwargs(self):
        return dict(nodes=self.nodes, rtol=self.rtol, atol=self.atol,
                    direction=self.direction)

    def to_text(self):
        return "".join(f"{k} = {self.raw[k]}\n" for k in sorted(self.raw))

    def hash(self):
        return hashlib.sha256(self.to_text().encode()).hexdigest()[:16]


@dataclass
class RunManifest:
    """What a command produced; written next to the outputs as ``manifest.json``."""

    command: str
    config_hash: str
    outputs: list = field(default_factory=list)
    rows: list = field(default_factory=list)

    def add(self, path):
        self.outputs.append(os.fspath(path))
        return path

    def missing(self):
        return [p for p in self.outputs if not os.path.exists(p)]

    def write(self, directory):
        path = os.path.join(directory, "manifest.json")
        missing = self.missing()
        if missing:
            raise ConfigError(f"manifest lists files that were not written: {missing}")
        with open(path, "w") as fh:
            json.dump(asdict(self), fh, indent=2, default=float)
            fh.write("\n")
        return path
