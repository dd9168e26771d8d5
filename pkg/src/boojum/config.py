"""YAML run configuration with strict schema checking.

Unknown keys are rejected by name so that typos surface as ConfigError
instead of silently falling back to defaults.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import yaml

from .energy import EnergyParams
from .errors import ConfigError
from .geometry import BoundaryData, StarDomain, fourier_data, tangential_data, unit_disc
from .minimizer import MinimizeOptions, SeedSpec

__all__ = ["Config", "load_config"]


def _section(raw: dict, name: str, allowed: dict) -> dict:
    sec = raw.get(name) or {}
    if not isinstance(sec, dict):
        raise ConfigError(f"section {name!r} must be a mapping")
    for key in sec:
        if key not in allowed:
            raise ConfigError(f"unknown key {key!r} in section {name!r}")
    return sec


def _num(sec: dict, key: str, default, where: str):
    v = sec.get(key, default)
    if v is None:
        return None
    try:
        return float(v)
    except (TypeError, ValueError):
        raise ConfigError(f"{where}.{key} must be a number, got {v!r}")


def _int(sec: dict, key: str, default, where: str):
    v = sec.get(key, default)
    if v is None:
        return None
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{where}.{key} must be an integer, got {v!r}")
    return v


def _floats(sec: dict, key: str, where: str) -> Tuple[float, ...]:
    v = sec.get(key, [])
    if not isinstance(v, (list, tuple)):
        raise ConfigError(f"{where}.{key} must be a list of numbers")
    try:
        return tuple(float(x) for x in v)
    except (TypeError, ValueError):
        raise ConfigError(f"{where}.{key} must be a list of numbers")


@dataclass(frozen=True)
class Config:
    domain_kind: str
    domain_const: float
    domain_cos: Tuple[float, ...]
    domain_sin: Tuple[float, ...]
    anchoring: str
    degree: int
    phase_const: float
    phase_cos: Tuple[float, ...]
    phase_sin: Tuple[float, ...]
    mode: str
    s: float
    epsilons: Tuple[float, ...]
    mesh_h: Optional[float]
    minimize: MinimizeOptions
    seeds: SeedSpec
    lam: float
    max_merges: int
    renorm_points: Tuple[Tuple[float, float], ...]
    renorm_pairs: Tuple[Tuple[float, float], ...]
    renorm_grid: Optional[int]
    renorm_h: float
    snapshots: bool
    rng_seed: int

    def build_domain(self) -> StarDomain:
        if self.domain_kind == "disc":
            return unit_disc()
        return StarDomain(
            const=self.domain_const,
            cos_coeffs=self.domain_cos,
            sin_coeffs=self.domain_sin,
        )

    def build_data(self, domain: StarDomain) -> BoundaryData:
        if self.anchoring == "tangent":
            return tangential_data(domain)
        return fourier_data(
            domain,
            degree=self.degree,
            phase_const=self.phase_const,
            cos_coeffs=self.phase_cos,
            sin_coeffs=self.phase_sin,
        )

    def params(self, eps: float) -> EnergyParams:
        return EnergyParams(epsilon=eps, mode=self.mode, s=self.s)

    def h_for(self, eps: float) -> float:
        return self.mesh_h if self.mesh_h is not None else eps / 4.0


def load_config(path) -> Config:
    try:
        with open(path) as f:
            raw = yaml.safe_load(f)
    except FileNotFoundError:
        raise ConfigError(f"config file {path} not found")
    except yaml.YAMLError as e:
        raise ConfigError(f"config file {path} is not valid YAML: {e}")
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError("top-level config must be a mapping")
    known = {
        "domain", "boundary", "energy", "mesh", "minimize",
        "seeds", "analyze", "renorm", "output", "rng_seed",
    }
    for key in raw:
        if key not in known:
            raise ConfigError(f"unknown top-level key {key!r}")

    dom = _section(raw, "domain", {"kind": 1, "const": 1, "cos": 1, "sin": 1})
    kind = dom.get("kind", "disc")
    if kind not in ("disc", "star"):
        raise ConfigError(f"domain.kind must be 'disc' or 'star', got {kind!r}")

    bnd = _section(
        raw, "boundary", {"anchoring": 1, "degree": 1, "phase_const": 1, "cos": 1, "sin": 1}
    )
    anchoring = bnd.get("anchoring", "tangent")
    if anchoring not in ("tangent", "fourier"):
        raise ConfigError(f"boundary.anchoring must be 'tangent' or 'fourier', got {anchoring!r}")

    en = _section(raw, "energy", {"mode": 1, "s": 1, "epsilon": 1})
    mode = en.get("mode", "strong")
    if mode not in ("strong", "weak"):
        raise ConfigError(f"energy.mode must be 'strong' or 'weak', got {mode!r}")
    eps_raw = en.get("epsilon", 0.1)
    if isinstance(eps_raw, (list, tuple)):
        epsilons = _floats(en, "epsilon", "energy")
    else:
        epsilons = (_num(en, "epsilon", 0.1, "energy"),)
    if not epsilons or any(e <= 0.0 for e in epsilons):
        raise ConfigError("energy.epsilon must be positive")

    msh = _section(raw, "mesh", {"h": 1, "rule": 1})
    rule = msh.get("rule", "quarter_eps")
    if rule != "quarter_eps":
        raise ConfigError(f"mesh.rule must be 'quarter_eps', got {rule!r}")
    mesh_h = _num(msh, "h", None, "mesh")

    mn = _section(
        raw, "minimize",
        {"max_iters": 1, "grad_tol": 1, "step_rule": 1, "fixed_step": 1},
    )
    step_rule = mn.get("step_rule", "bb")
    if step_rule not in ("bb", "backtracking", "fixed"):
        raise ConfigError(f"minimize.step_rule must be bb/backtracking/fixed, got {step_rule!r}")
    options = MinimizeOptions(
        max_iters=_int(mn, "max_iters", 20000, "minimize"),
        grad_tol=_num(mn, "grad_tol", None, "minimize"),
        step_rule=step_rule,
        fixed_step=_num(mn, "fixed_step", 1e-3, "minimize"),
    )

    sd = _section(
        raw, "seeds", {"base": 1, "interior": 1, "boundary": 1, "smoothing_steps": 1}
    )
    base = sd.get("base", "aligned")
    if base not in ("aligned", "random"):
        raise ConfigError(f"seeds.base must be 'aligned' or 'random', got {base!r}")
    interior = []
    for row in sd.get("interior") or []:
        if not isinstance(row, (list, tuple)) or len(row) != 3:
            raise ConfigError("seeds.interior entries must be [x, y, charge]")
        interior.append((float(row[0]), float(row[1]), int(row[2])))
    boundary = []
    for row in sd.get("boundary") or []:
        if not isinstance(row, (list, tuple)) or len(row) != 2:
            raise ConfigError("seeds.boundary entries must be [t, index]")
        boundary.append((float(row[0]), int(row[1])))
    seeds = SeedSpec(
        base=base,
        interior=tuple(interior),
        boundary=tuple(boundary),
        smoothing_steps=_int(sd, "smoothing_steps", 50, "seeds"),
    )

    an = _section(raw, "analyze", {"lambda": 1, "max_merges": 1})
    rn = _section(
        raw, "renorm", {"interior_points": 1, "boundary_pairs": 1, "grid": 1, "h": 1}
    )
    points = []
    for row in rn.get("interior_points") or []:
        if not isinstance(row, (list, tuple)) or len(row) != 2:
            raise ConfigError("renorm.interior_points entries must be [x, y]")
        points.append((float(row[0]), float(row[1])))
    pairs = []
    for row in rn.get("boundary_pairs") or []:
        if not isinstance(row, (list, tuple)) or len(row) != 2:
            raise ConfigError("renorm.boundary_pairs entries must be [t1, t2]")
        pairs.append((float(row[0]), float(row[1])))

    out = _section(raw, "output", {"snapshots": 1})
    snapshots = out.get("snapshots", True)
    if not isinstance(snapshots, bool):
        raise ConfigError("output.snapshots must be a boolean")

    rng_seed = raw.get("rng_seed", 0)
    if isinstance(rng_seed, bool) or not isinstance(rng_seed, int):
        raise ConfigError("rng_seed must be an integer")

    return Config(
        domain_kind=kind,
        domain_const=_num(dom, "const", 1.0, "domain"),
        domain_cos=_floats(dom, "cos", "domain"),
        domain_sin=_floats(dom, "sin", "domain"),
        anchoring=anchoring,
        degree=_int(bnd, "degree", 1, "boundary"),
        phase_const=_num(bnd, "phase_const", 0.0, "boundary"),
        phase_cos=_floats(bnd, "cos", "boundary"),
        phase_sin=_floats(bnd, "sin", "boundary"),
        mode=mode,
        s=_num(en, "s", 1.0, "energy"),
        epsilons=epsilons,
        mesh_h=mesh_h,
        minimize=options,
        seeds=seeds,
        lam=_num(an, "lambda", 4.0, "analyze"),
        max_merges=_int(an, "max_merges", 8, "analyze"),
        renorm_points=tuple(points),
        renorm_pairs=tuple(pairs),
        renorm_grid=_int(rn, "grid", None, "renorm"),
        renorm_h=_num(rn, "h", 0.02, "renorm"),
        snapshots=snapshots,
        rng_seed=rng_seed,
    )
