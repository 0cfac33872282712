"""Scenario configuration: schema validation and canonical serialization.

Configs are plain JSON-compatible dictionaries.  Validation rejects
unknown keys and names the offending field, so a config echoed into a
results file is always sufficient to rerun the experiment.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Optional

__all__ = ["ConfigError", "ScenarioConfig", "validate_config"]


class ConfigError(ValueError):
    pass


_ENGINE_KEYS = {
    "seed": int,
    "n_chains": int,
    "steps_per_chain": int,
    "initial": (int, float),
    "record_stride": int,
    "dense_until": int,
    "block_len": int,
}

_LAYOUT_KEYS = {
    "x_core": (int, float),
    "n_core": int,
    "bins_per_decade": int,
    "decades": int,
}

_TOP_KEYS = {"scenario", "target", "description", "family", "engine",
             "layout", "conjugate_route", "diagnostics"}

# per-diagnostic parameter names (beyond "kind"); values are validated by
# the dispatch functions themselves
DIAGNOSTIC_KEYS: dict[str, set] = {
    "group_axioms": {"n", "tol", "seed"},
    "hitting_window_scan": {"z_grid", "b0", "a0", "horizon", "chains", "seed", "min_prob"},
    "envelope_sandwich": {"replicas", "steps", "seed", "families"},
    "tail_homogeneity": {"z_grid", "M", "max_flatness"},
    "log_growth": {"k_grid", "min_r2"},
    "slow_variation": {"phi", "x_grid", "y_grid", "band"},
    "invariance": {"push_samples", "seed", "max_tv"},
    "martingale_bound": {"U", "V", "horizon", "chains", "seed"},
    "contraction": {"x", "y", "window", "steps", "replicas", "seed", "max_ratio"},
    "ratio_monotone": {"y", "steps", "replicas", "seed", "thresholds"},
    "critical_tail": {"phi", "x_grid", "max_flatness"},
    "cross_route_tail": {"phi", "x_grid", "z_grid", "M", "max_flatness"},
    "feller_oracle": {"law", "steps", "threshold", "seed"},
    "embedded_ladder": {"embedded_steps", "excursions", "direct_steps", "seed", "max_flatness"},
    "poisson_limit": {"ramp_k", "x_grid", "chains", "seed"},
    "duality": {"g", "x", "chains", "k_max", "seed"},
    "wiener_hopf": {"a", "p_a", "chains", "horizon", "seed", "oracle_tol"},
    "power_conjugation": {"n_maps", "alpha_max", "seed", "grid_hi"},
    "synthetic_classifier": {"samples", "seed"},
    "uniqueness_audit": {"budget", "seed"},
    "gw_envelope": {"alpha", "x_max", "samples", "seed"},
}


def _expect(cond: bool, path: str, msg: str):
    if not cond:
        raise ConfigError(f"{path}: {msg}")


def _check_keys(obj: dict, allowed: set, path: str):
    unknown = set(obj) - allowed
    _expect(not unknown, path, f"unknown keys {sorted(unknown)}")


def _check_typed(obj: dict, schema: dict, path: str):
    _check_keys(obj, set(schema), path)
    for k, v in obj.items():
        t = schema[k]
        _expect(isinstance(v, t) and not isinstance(v, bool), f"{path}.{k}",
                f"expected {t}, got {type(v).__name__}")


@dataclass
class ScenarioConfig:
    """A fully seeded experiment description."""

    scenario: str
    target: str
    description: str = ""
    family: Optional[dict] = None
    engine: dict = field(default_factory=dict)
    layout: Optional[dict] = None
    conjugate_route: Optional[str] = None   # e.g. "exp": bin s(Y) alongside Y
    diagnostics: list = field(default_factory=list)

    def as_dict(self) -> dict:
        out = {"scenario": self.scenario, "target": self.target,
               "description": self.description, "engine": dict(self.engine),
               "diagnostics": [dict(d) for d in self.diagnostics]}
        if self.family is not None:
            out["family"] = self.family
        if self.layout is not None:
            out["layout"] = self.layout
        if self.conjugate_route is not None:
            out["conjugate_route"] = self.conjugate_route
        return out

    def canonical_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True, indent=2)


def validate_config(obj: dict) -> ScenarioConfig:
    _expect(isinstance(obj, dict), "config", "must be an object")
    _check_keys(obj, _TOP_KEYS, "config")
    for key in ("scenario", "target"):
        _expect(isinstance(obj.get(key), str) and obj[key], f"config.{key}",
                "required nonempty string")
    engine = obj.get("engine", {})
    _expect(isinstance(engine, dict), "config.engine", "must be an object")
    _check_typed(engine, _ENGINE_KEYS, "config.engine")
    for k in ("n_chains", "steps_per_chain", "record_stride", "dense_until", "block_len"):
        if k in engine:
            _expect(engine[k] >= 1, f"config.engine.{k}", "must be a positive integer")
    if "seed" in engine:
        _expect(0 <= engine["seed"] < 2**64, "config.engine.seed",
                "must fit in 64 bits")
    layout = obj.get("layout")
    if layout is not None:
        _expect(isinstance(layout, dict), "config.layout", "must be an object")
        _check_typed(layout, _LAYOUT_KEYS, "config.layout")
        for k, v in layout.items():
            _expect(v > 0, f"config.layout.{k}", "must be positive")
    family = obj.get("family")
    if family is not None:
        _expect(isinstance(family, dict) and "family" in family, "config.family",
                "must be an object with a 'family' tag")
    route = obj.get("conjugate_route")
    if route is not None:
        _expect(route in ("exp",), "config.conjugate_route", "must be 'exp'")
    diags = obj.get("diagnostics", [])
    _expect(isinstance(diags, list), "config.diagnostics", "must be a list")
    for i, d in enumerate(diags):
        path = f"config.diagnostics[{i}]"
        _expect(isinstance(d, dict) and "kind" in d, path, "must have a 'kind'")
        kind = d["kind"]
        _expect(kind in DIAGNOSTIC_KEYS, f"{path}.kind", f"unknown kind {kind!r}")
        _check_keys({k: v for k, v in d.items() if k != "kind"},
                    DIAGNOSTIC_KEYS[kind], path)
    return ScenarioConfig(
        scenario=obj["scenario"], target=obj["target"],
        description=obj.get("description", ""), family=family,
        engine=dict(engine), layout=dict(layout) if layout else None,
        conjugate_route=route, diagnostics=[dict(d) for d in diags])
