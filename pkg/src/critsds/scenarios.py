"""Bundled experiment scenarios.

Each scenario names the quantitative law it targets, carries a fully
seeded budget, and is reproducible byte for byte from its config.  The
`--quick` CLI flag swaps in the reduced budgets listed under "quick".
"""

from __future__ import annotations

import copy

__all__ = ["SCENARIOS", "list_scenarios", "get_scenario"]

_AFFINE_CRITICAL_FAMILY = {
    "family": "affine",
    # variances 0.25: log A ~ N(0, 0.25), B = max(lognormal(0, 0.25), 1)
    "log_a": {"kind": "normal", "args": [0.0, 0.5]},
    "b": {"kind": "lognormal", "args": [0.0, 0.5]},
    "b_min": 1.0,
}

_GOLDIE_MAX_FAMILY = {
    "family": "goldie_max",
    "log_a": {"kind": "normal", "args": [0.0, 0.3]},
    "b": {"kind": "lognormal", "args": [0.0, 0.3]},
    "c": {"kind": "uniform", "args": [0.5, 1.5]},
}

_DEFAULT_LAYOUT = {"x_core": 1.0, "n_core": 64, "bins_per_decade": 16, "decades": 8}

# linear-resolution core for the reflected walk (Lebesgue-like tail)
_REFLECTED_LAYOUT = {"x_core": 128.0, "n_core": 2048, "bins_per_decade": 16,
                     "decades": 6}

SCENARIOS: dict[str, dict] = {
    "group-axioms": {
        "scenario": "group-axioms",
        "target": "sec-2-affine-group",
        "description": "Associativity, inverse and action axioms of the affine group.",
        "engine": {"seed": 8261},
        "diagnostics": [{"kind": "group_axioms", "n": 10_000, "tol": 1e-12}],
    },
    "hitting-windows": {
        "scenario": "hitting-windows",
        "target": "lemma-3.4-hitting",
        "description": "Right-walk hitting probabilities of dilated windows stay "
                       "bounded below as the dilation grows.",
        "family": _AFFINE_CRITICAL_FAMILY,
        "engine": {"seed": 8262},
        "diagnostics": [{
            "kind": "hitting_window_scan", "z_grid": [1.0, 3.0, 10.0, 30.0],
            "b0": 20.0, "a0": 8.0, "horizon": 3000, "chains": 1500,
            "min_prob": 0.02,
        }],
        "quick": {"diagnostics": [{"chains": 300, "horizon": 1000}]},
    },
    "envelope-sandwich": {
        "scenario": "envelope-sandwich",
        "target": "eq-aff-rec-envelopes",
        "description": "Z <= X <= Y for the affine envelope recursions across "
                       "all five map families.",
        "engine": {"seed": 8263},
        "diagnostics": [{
            "kind": "envelope_sandwich", "replicas": 100, "steps": 10_000,
            "families": ["affine", "goldie_max", "goldie_sqrt",
                         "exp_conj_reflected", "interval_mix"],
        }],
        "quick": {"diagnostics": [{"replicas": 20, "steps": 2000}]},
    },
    "affine-critical": {
        "scenario": "affine-critical",
        "target": "thm-1.1-affine",
        "description": "dx/x tail homogeneity of the invariant measure of the "
                       "critical affine recursion.",
        "family": _AFFINE_CRITICAL_FAMILY,
        "engine": {"seed": 20260809, "n_chains": 1024, "steps_per_chain": 97_657,
                   "initial": 1.0},
        "layout": _DEFAULT_LAYOUT,
        "diagnostics": [
            {"kind": "tail_homogeneity", "z_grid": [10.0, 100.0, 1000.0, 10_000.0],
             "M": 2.0, "max_flatness": 1.4},
            {"kind": "log_growth", "k_grid": [1, 2, 3, 4, 5, 6, 7, 8], "min_r2": 0.98},
            {"kind": "slow_variation", "phi": "indicator[1,2]",
             "x_grid": [4, 5, 6, 7, 8, 9], "y_grid": [0.5, 1.0, 2.0],
             "band": [0.8, 1.25]},
        ],
        "quick": {"engine": {"n_chains": 128, "steps_per_chain": 20_000}},
    },
    "log-growth": {
        "scenario": "log-growth",
        "target": "prop-3.1-log-growth",
        "description": "nu[-z, z] grows logarithmically in z.",
        "family": _AFFINE_CRITICAL_FAMILY,
        "engine": {"seed": 8264, "n_chains": 256, "steps_per_chain": 80_000,
                   "initial": 1.0},
        "layout": _DEFAULT_LAYOUT,
        "diagnostics": [
            {"kind": "log_growth", "k_grid": [1, 2, 3, 4, 5, 6, 7, 8], "min_r2": 0.98},
        ],
        "quick": {"engine": {"n_chains": 64, "steps_per_chain": 20_000}},
    },
    "slow-variation": {
        "scenario": "slow-variation",
        "target": "cor-3.5-slow-variation",
        "description": "The dilated functional is slowly varying with the "
                       "linear-in-y ratio bound.",
        "family": _AFFINE_CRITICAL_FAMILY,
        "engine": {"seed": 8265, "n_chains": 256, "steps_per_chain": 80_000,
                   "initial": 1.0},
        "layout": _DEFAULT_LAYOUT,
        "diagnostics": [
            {"kind": "slow_variation", "phi": "indicator[1,2]",
             "x_grid": [4, 5, 6, 7, 8, 9], "y_grid": [0.5, 1.0, 2.0],
             "band": [0.8, 1.25]},
        ],
        "quick": {"engine": {"n_chains": 64, "steps_per_chain": 20_000},
                  "diagnostics": [{"x_grid": [2, 3, 4, 5]}]},
    },
    "martingale-bound": {
        "scenario": "martingale-bound",
        "target": "lemma-3.2-bound",
        "description": "nu(V) >= P(T <= horizon) nu(U) via backward right-walk "
                       "hitting.",
        "family": _AFFINE_CRITICAL_FAMILY,
        "engine": {"seed": 8266, "n_chains": 256, "steps_per_chain": 40_000,
                   "initial": 1.0},
        "layout": _DEFAULT_LAYOUT,
        "diagnostics": [
            {"kind": "martingale_bound", "U": [10.0, 20.0], "V": [0.0, 5.0],
             "horizon": 10_000, "chains": 10_000},
        ],
        "quick": {"engine": {"n_chains": 64, "steps_per_chain": 10_000},
                  "diagnostics": [{"horizon": 2000, "chains": 2000}]},
    },
    "local-contraction": {
        "scenario": "local-contraction",
        "target": "thm-1.2-uniqueness",
        "description": "Audited uniqueness conditions, local contraction of "
                       "coupled orbits, monotone normalized ratio.",
        "family": _GOLDIE_MAX_FAMILY,
        "engine": {"seed": 8267},
        "diagnostics": [
            {"kind": "uniqueness_audit", "budget": 2000},
            {"kind": "contraction", "x": 1.0, "y": 5.0, "window": [0.0, 10.0],
             "steps": 100_000, "replicas": 1000, "max_ratio": 0.01},
            {"kind": "ratio_monotone", "y": 0.0, "steps": 100_000,
             "replicas": 100, "thresholds": [1e6]},
        ],
        "quick": {"diagnostics": [{"budget": 300},
                                  {"steps": 20_000, "replicas": 200},
                                  {"steps": 20_000, "replicas": 20}]},
    },
    "reflected-critical": {
        "scenario": "reflected-critical",
        "target": "thm-1.3-reflected",
        "description": "Lebesgue-like tail of the critical reflected walk and "
                       "cross-route agreement with the exponential conjugation.",
        "family": {"family": "reflected_step", "u": {"kind": "normal", "args": [0.0, 1.0]}},
        "engine": {"seed": 8268, "n_chains": 256, "steps_per_chain": 390_625,
                   "initial": 1.0},
        "layout": _REFLECTED_LAYOUT,
        "conjugate_route": "exp",
        "diagnostics": [
            {"kind": "critical_tail", "phi": "indicator[0,1]",
             "x_grid": [10.0, 20.0, 50.0, 100.0], "max_flatness": 1.35},
            {"kind": "cross_route_tail", "phi": "indicator[0,1]",
             "x_grid": [10.0, 20.0, 50.0, 100.0], "M": 2.0,
             "max_flatness": 1.35},
        ],
        "quick": {"engine": {"n_chains": 64, "steps_per_chain": 40_000},
                  "diagnostics": [{"x_grid": [5.0, 10.0, 20.0, 40.0]},
                                  {"x_grid": [5.0, 10.0, 20.0, 40.0]}]},
    },
    "feller-closed-form": {
        "scenario": "feller-closed-form",
        "target": "sec-1.3-feller",
        "description": "Occupation law of the nonnegative-step reflected walk "
                       "against the closed-form invariant density.",
        "engine": {"seed": 8269},
        "diagnostics": [
            {"kind": "feller_oracle", "law": {"kind": "exponential", "args": [1.0]},
             "steps": 1_000_000, "threshold": 0.01},
            {"kind": "feller_oracle", "law": {"kind": "uniform", "args": [0.0, 1.0]},
             "steps": 1_000_000, "threshold": 0.01},
        ],
        "quick": {"diagnostics": [{"steps": 100_000, "threshold": 0.02},
                                  {"steps": 100_000, "threshold": 0.02}]},
    },
    "embedded-ladder": {
        "scenario": "embedded-ladder",
        "target": "sec-6.6-ladder-construction",
        "description": "Two-stage ladder-walk estimate of the reflected "
                       "invariant measure against direct occupation.",
        "engine": {"seed": 8270},
        "diagnostics": [
            {"kind": "embedded_ladder", "embedded_steps": 200_000,
             "excursions": 30_000, "direct_steps": 2_000_000, "max_flatness": 1.2},
        ],
        "quick": {"diagnostics": [{"embedded_steps": 20_000, "excursions": 3000,
                                   "direct_steps": 200_000, "max_flatness": 1.5}]},
    },
    "poisson-limits": {
        "scenario": "poisson-limits",
        "target": "lemma-4.1-poisson",
        "description": "Renewal limits of the Poisson equation and the "
                       "ladder-duality identity.",
        "engine": {"seed": 8271},
        "diagnostics": [
            {"kind": "poisson_limit", "ramp_k": 5.0, "x_grid": [5.0, 10.0, 20.0],
             "chains": 20_000},
            {"kind": "duality", "g": "bump[-2,0]", "x": 0.0, "chains": 20_000,
             "k_max": 64},
        ],
        "quick": {"diagnostics": [{"chains": 2000}, {"chains": 2000}]},
    },
    "wiener-hopf": {
        "scenario": "wiener-hopf",
        "target": "sec-4-wiener-hopf",
        "description": "Ladder-height means of a two-point law: enumeration "
                       "oracle vs Monte Carlo, product vs variance.",
        "engine": {"seed": 8272},
        "diagnostics": [
            {"kind": "wiener_hopf", "a": 1.0, "p_a": 0.3333333333333333,
             "chains": 100_000, "oracle_tol": 0.01},
        ],
        "quick": {"diagnostics": [{"chains": 10_000, "oracle_tol": 0.03}]},
    },
    "power-conjugation": {
        "scenario": "power-conjugation",
        "target": "lemma-2.1-power-conjugation",
        "description": "Removing a sublinear envelope exponent: exact slope "
                       "A^(1-alpha) and a verified (AL0) envelope.",
        "engine": {"seed": 8273},
        "diagnostics": [
            {"kind": "power_conjugation", "n_maps": 1000, "alpha_max": 0.9,
             "grid_hi": 1e8},
        ],
        "quick": {"diagnostics": [{"n_maps": 100}]},
    },
    "synthetic-classifier": {
        "scenario": "synthetic-classifier",
        "target": "oracle-battery",
        "description": "Known synthetic laws are classified correctly by the "
                       "tail diagnostics.",
        "engine": {"seed": 8274},
        "diagnostics": [{"kind": "synthetic_classifier", "samples": 1_000_000}],
        "quick": {"diagnostics": [{"samples": 200_000}]},
    },
    "gw-envelope": {
        "scenario": "gw-envelope",
        "target": "sec-6.5-galton-watson",
        "description": "Envelope constants of branching maps with random "
                       "reproduction laws.",
        "family": {
            "family": "galton_watson",
            "alpha": 0.8,
            "environments": [
                {"weight": 0.5, "offspring": {"kind": "poisson", "args": [1.3498588075760032]},
                 "immigration": {"kind": "constant", "args": [1.0]}},
                {"weight": 0.5, "offspring": {"kind": "poisson", "args": [0.7408182206817179]},
                 "immigration": {"kind": "constant", "args": [1.0]}},
            ],
        },
        "engine": {"seed": 8275},
        "diagnostics": [
            {"kind": "gw_envelope", "alpha": 0.8, "x_max": 10_000, "samples": 200},
        ],
        "quick": {"diagnostics": [{"x_max": 2000, "samples": 50}]},
    },
}


def list_scenarios() -> list[dict]:
    return [{"scenario": s["scenario"], "target": s["target"],
             "description": s["description"]} for s in SCENARIOS.values()]


def get_scenario(name: str, quick: bool = False) -> dict:
    if name not in SCENARIOS:
        raise KeyError(f"unknown scenario {name!r}; see list-scenarios")
    cfg = copy.deepcopy(SCENARIOS[name])
    quick_patch = cfg.pop("quick", None)
    if quick and quick_patch:
        if "engine" in quick_patch:
            cfg["engine"].update(quick_patch["engine"])
        for d, patch in zip(cfg["diagnostics"], quick_patch.get("diagnostics", [])):
            d.update(patch)
    return cfg
