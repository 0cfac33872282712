"""Scenario-driven experiment runner.

`critsds list-scenarios` shows the bundled experiments and the law each
one targets; `critsds run --scenario NAME --out DIR` simulates, runs the
configured diagnostics, and writes a measure CSV, a results JSON (with
the full config echoed) and a human-readable summary.  Exit codes:
0 all checks passed, 1 ran but some checks failed, 2 crash or config
error.
"""

from __future__ import annotations

import argparse
import datetime
import json
import math
import os
import sys
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import BACKEND_NAME, affine, engine, maps, measure, reflected, renewal
from .config import ConfigError, ScenarioConfig, validate_config
from .conjugate import default_log_grid, power_conjugate
from .maps import Dist, MapSample
from .phi import phi_from_config
from .scenarios import SCENARIOS, get_scenario, list_scenarios
from .transforms import exp_scale

_MEASURE_KINDS = {"tail_homogeneity", "log_growth", "slow_variation",
                  "martingale_bound", "critical_tail", "cross_route_tail",
                  "invariance"}

_FAMILY_DEFAULTS = {
    "affine": lambda: maps.AffineFamily(),
    "goldie_max": lambda: maps.GoldieMaxFamily(),
    "goldie_sqrt": lambda: maps.GoldieSqrtFamily(),
    "exp_conj_reflected": lambda: maps.ExpConjReflectedFamily(),
    "interval_mix": lambda: maps.IntervalMixFamily(),
}

_INITIALS = {"reals": 0.0, "half_line": 1.0, "naturals": 1.0}


@dataclass
class RunContext:
    cfg: ScenarioConfig
    family: Optional[maps.FamilySpec]
    measures: list
    threads: int
    seed: int


def _engine_config(cfg: ScenarioConfig) -> engine.TrajectoryConfig:
    e = cfg.engine
    return engine.TrajectoryConfig(
        seed=int(e.get("seed", 0)),
        steps=int(e.get("steps_per_chain", 10_000)),
        n_chains=int(e.get("n_chains", 1)),
        initial=float(e.get("initial", 1.0)),
        record_stride=int(e.get("record_stride", 1)),
        dense_until=int(e.get("dense_until", 10_000)),
        block_len=int(e.get("block_len", 4096)),
    )


def _diag_seed(ctx: RunContext, params: dict, offset: int) -> int:
    return int(params.get("seed", ctx.seed + 7919 * (offset + 1)))


# ---------------------------------------------------------------------------
# diagnostic dispatch: each returns (report_dict, passed | None)

def _d_group_axioms(params, ctx, idx):
    n = int(params.get("n", 10_000))
    tol = float(params.get("tol", 1e-12))
    rng = np.random.Generator(np.random.Philox(
        np.random.SeedSequence(_diag_seed(ctx, params, idx))))
    worst_assoc = worst_inv = worst_act = 0.0
    for _ in range(n):
        g, h, k = (affine.GroupElement(float(rng.normal(0, 3)),
                                       float(np.exp(rng.normal(0, 1)))) for _ in range(3))
        lhs = affine.compose(affine.compose(g, h), k)
        rhs = affine.compose(g, affine.compose(h, k))
        worst_assoc = max(worst_assoc,
                          abs(lhs.a - rhs.a) / max(lhs.a, rhs.a),
                          abs(lhs.b - rhs.b) / (abs(lhs.b) + abs(rhs.b) + 1.0))
        gi = affine.compose(g, affine.invert(g))
        worst_inv = max(worst_inv, abs(gi.a - 1.0), abs(gi.b) / (abs(g.b) + 1.0))
        anti = affine.invert(affine.compose(g, h))
        anti2 = affine.compose(affine.invert(h), affine.invert(g))
        worst_inv = max(worst_inv, abs(anti.a - anti2.a) / max(anti.a, anti2.a))
        x = float(rng.normal(0, 5))
        v1 = affine.act(affine.compose(g, h), x)
        v2 = affine.act(g, affine.act(h, x))
        worst_act = max(worst_act, abs(v1 - v2) / (abs(v1) + abs(v2) + 1.0))
    rep = {"n": n, "max_assoc_err": worst_assoc, "max_inverse_err": worst_inv,
           "max_action_err": worst_act, "tol": tol}
    return rep, max(worst_assoc, worst_inv, worst_act) < tol


def _d_hitting_window_scan(params, ctx, idx):
    fam = ctx.family
    b0, a0 = float(params["b0"]), float(params["a0"])
    horizon = int(params.get("horizon", 3000))
    chains = int(params.get("chains", 1500))
    min_prob = float(params.get("min_prob", 0.02))
    seed = _diag_seed(ctx, params, idx)

    def sampler(rng):
        p = fam.draw_params(rng, 1)
        return affine.GroupElement(float(p["b"][0]), float(p["a"][0]))

    rows = []
    for z in params["z_grid"]:
        region = affine.scaled_window_region(b0, a0, float(z), "left")
        est = affine.estimate_hitting_probability(sampler, region, horizon, chains, seed)
        rows.append({"z": float(z)} | est.as_dict())
    rep = {"windows": rows, "min_prob": min_prob, "b0": b0, "a0": a0}
    return rep, all(r["probability"] >= min_prob for r in rows)


def _d_envelope_sandwich(params, ctx, idx):
    replicas = int(params.get("replicas", 100))
    steps = int(params.get("steps", 10_000))
    seed = _diag_seed(ctx, params, idx)
    out = {}
    ok = True
    for i, name in enumerate(params["families"]):
        fam = _FAMILY_DEFAULTS[name]()
        cfg = engine.TrajectoryConfig(seed=seed + i, steps=steps, n_chains=replicas,
                                      initial=_INITIALS[fam.domain],
                                      dense_until=0, record_stride=max(1, steps // 64),
                                      block_len=1024)
        try:
            engine.simulate_envelopes(fam, cfg)
            out[name] = {"violations": 0, "replicas": replicas, "steps": steps}
        except engine.SandwichError as exc:
            out[name] = {"violations": 1, "error": str(exc)}
            ok = False
    return {"families": out}, ok


def _d_tail_homogeneity(params, ctx, idx):
    rep = measure.tail_homogeneity_report(ctx.measures[0], params["z_grid"],
                                          float(params.get("M", 2.0)))
    max_flat = float(params.get("max_flatness", 1.4))
    return rep.as_dict() | {"max_flatness": max_flat}, rep.passes(max_flat)


def _d_log_growth(params, ctx, idx):
    m = ctx.measures[0]
    fit = measure.log_growth_fit(m, params["k_grid"])
    min_r2 = float(params.get("min_r2", 0.98))
    windows_pos = all(
        m.count_interval(math.exp(k), 2 * math.exp(k)) > 0 for k in params["k_grid"])
    rep = fit.as_dict() | {"min_r2": min_r2, "doubling_windows_positive": windows_pos}
    return rep, bool(fit.r2 >= min_r2 and windows_pos)


def _d_slow_variation(params, ctx, idx):
    phi = phi_from_config(params.get("phi", "indicator[1,2]"))
    band = tuple(params.get("band", (0.8, 1.25)))
    rep = measure.slow_variation_check(ctx.measures[0], phi, params["x_grid"],
                                       params["y_grid"], band)
    return rep.as_dict(), bool(rep.trend_pass and rep.bound_pass)


def _d_invariance(params, ctx, idx):
    rep = measure.invariance_residual(ctx.measures[0], ctx.family,
                                      int(params.get("push_samples", 100_000)),
                                      _diag_seed(ctx, params, idx))
    max_tv = float(params.get("max_tv", 0.05))
    return rep.as_dict() | {"max_tv": max_tv}, rep.tv_distance <= max_tv


def _d_martingale_bound(params, ctx, idx):
    rep = measure.martingale_bound_check(
        ctx.measures[0], ctx.family, tuple(params["U"]), tuple(params["V"]),
        int(params.get("horizon", 10_000)), int(params.get("chains", 10_000)),
        _diag_seed(ctx, params, idx), threads=ctx.threads)
    return rep.as_dict(), rep.passes


def _d_contraction(params, ctx, idx):
    x, y = float(params["x"]), float(params["y"])
    steps = int(params.get("steps", 100_000))
    replicas = int(params.get("replicas", 1000))
    res = engine.coupled_pair(
        ctx.family, x, y, tuple(params.get("window", (0.0, 10.0))),
        engine.TrajectoryConfig(seed=_diag_seed(ctx, params, idx), steps=steps,
                                n_chains=replicas, initial=x,
                                dense_until=0, record_stride=max(1, steps // 32)))
    max_ratio = float(params.get("max_ratio", 0.01))
    rep = {"mean_final": res.mean_final, "separation": abs(x - y),
           "threshold": max_ratio * abs(x - y), "steps": steps, "replicas": replicas}
    return rep, res.mean_final <= max_ratio * abs(x - y)


def _d_ratio_monotone(params, ctx, idx):
    steps = int(params.get("steps", 100_000))
    replicas = int(params.get("replicas", 100))
    thresholds = [float(t) for t in params.get("thresholds", [1e6])]
    try:
        res = engine.normalized_ratio(
            ctx.family, float(params.get("y", 0.0)),
            engine.TrajectoryConfig(seed=_diag_seed(ctx, params, idx), steps=steps,
                                    n_chains=replicas, initial=float(params.get("y", 0.0)),
                                    dense_until=0, record_stride=max(1, steps // 32)),
            thresholds=thresholds)
    except engine.MonotoneRatioError as exc:
        return {"error": str(exc)}, False
    crossings = {str(m): int((res.first_crossing[m] >= 0).sum())
                 for m in res.first_crossing}
    rep = {"violations": res.violations, "replicas": replicas, "steps": steps,
           "crossed_count": crossings}
    # crossing counts are informational: at any fixed horizon a fraction
    # ~ sqrt(log M) / (sigma sqrt(n)) of replicas has not crossed yet
    return rep, res.violations == 0


def _d_critical_tail(params, ctx, idx):
    phi = phi_from_config(params.get("phi", "indicator[0,1]"))
    rep = reflected.critical_tail_check(ctx.measures[0], phi, params["x_grid"])
    max_flat = float(params.get("max_flatness", 1.35))
    return rep.as_dict() | {"max_flatness": max_flat}, rep.passes(max_flat)


def _d_cross_route_tail(params, ctx, idx):
    """Same law through two routes: translated windows of the plain
    measure vs dilated windows of the exponentially conjugated one."""
    if len(ctx.measures) < 2:
        raise ConfigError("cross_route_tail needs conjugate_route: exp")
    phi = phi_from_config(params.get("phi", "indicator[0,1]"))
    max_flat = float(params.get("max_flatness", 1.35))
    linear = reflected.critical_tail_check(ctx.measures[0], phi, params["x_grid"])
    z_grid = [math.exp(float(x)) for x in params["x_grid"]]
    conj = measure.tail_homogeneity_report(ctx.measures[1], z_grid,
                                           float(params.get("M", 2.0)))
    lin_ok = linear.passes(max_flat)
    conj_ok = conj.passes(max_flat)
    rep = {"linear_flatness": linear.flatness, "conj_flatness": conj.flatness,
           "linear_pass": lin_ok, "conj_pass": conj_ok,
           "conj_h": list(map(float, conj.h)), "max_flatness": max_flat}
    return rep, lin_ok == conj_ok


def _d_feller_oracle(params, ctx, idx):
    spec = reflected.ReflectedSpec(Dist.from_config(params["law"]),
                                   centered_intended=False)
    rep = reflected.feller_oracle_check(spec, int(params.get("steps", 1_000_000)),
                                        _diag_seed(ctx, params, idx),
                                        threshold=float(params.get("threshold", 0.01)))
    return rep.as_dict() | {"law": params["law"]}, rep.passes


def _d_embedded_ladder(params, ctx, idx):
    spec = reflected.ReflectedSpec(Dist.normal(0.0, 1.0))
    lay = measure.BinLayout(x_core=64.0, n_core=512, bins_per_decade=16, decades=6)
    rep = reflected.embedded_ladder_measure(
        spec, lay,
        embedded_steps=int(params.get("embedded_steps", 200_000)),
        excursions=int(params.get("excursions", 30_000)),
        direct_steps=int(params.get("direct_steps", 2_000_000)),
        seed=_diag_seed(ctx, params, idx))
    max_flat = float(params.get("max_flatness", 1.2))
    return rep.as_dict() | {"max_flatness": max_flat}, rep.ratio_flatness <= max_flat


def _ramp(k: float):
    def f(x):
        return np.clip(np.asarray(x, dtype=float), 0.0, k)
    return f


def _d_poisson_limit(params, ctx, idx):
    law = renewal.StepLaw.normal(1.0)
    k = float(params.get("ramp_k", 5.0))
    rep = renewal.poisson_limit_check(
        _ramp(k), law, params.get("x_grid", [5.0, 10.0, 20.0]),
        chains=int(params.get("chains", 20_000)),
        seed=_diag_seed(ctx, params, idx),
        g_range=(-40.0, k + 40.0))
    return rep.as_dict() | {"ramp_k": k}, rep.pass_noncentered


def _d_duality(params, ctx, idx):
    g = phi_from_config(params.get("g", "bump[-2,0]"))
    rep = renewal.duality_R_check(
        g, renewal.StepLaw.normal(1.0), float(params.get("x", 0.0)),
        chains=int(params.get("chains", 20_000)),
        k_max=int(params.get("k_max", 64)),
        seed=_diag_seed(ctx, params, idx))
    return rep.as_dict(), bool(rep.agree_3se and rep.truncation_leak < 0.01)


def _d_wiener_hopf(params, ctx, idx):
    law = renewal.StepLaw.two_point(float(params.get("a", 1.0)),
                                    float(params.get("p_a", 0.5)))
    et_exact, el_exact = renewal.ladder_means_two_point_exact(law)
    rep = renewal.wiener_hopf_check(law, chains=int(params.get("chains", 100_000)),
                                    horizon=int(params.get("horizon", 1_000_000)),
                                    seed=_diag_seed(ctx, params, idx))
    tol = float(params.get("oracle_tol", 0.01))
    err_t = abs(rep.mean_s_t - et_exact) / abs(et_exact)
    err_l = abs(rep.mean_s_l - el_exact) / abs(el_exact)
    out = rep.as_dict() | {"exact_s_t": et_exact, "exact_s_l": el_exact,
                           "oracle_rel_err_t": err_t, "oracle_rel_err_l": err_l,
                           "oracle_tol": tol}
    # the product-vs-variance ratio is informational only
    return out, bool(err_t <= tol and err_l <= tol)


def _d_power_conjugation(params, ctx, idx):
    n_maps = int(params.get("n_maps", 1000))
    alpha_max = float(params.get("alpha_max", 0.9))
    grid = default_log_grid(hi=float(params.get("grid_hi", 1e8)), two_sided=False)
    rng = np.random.Generator(np.random.Philox(
        np.random.SeedSequence(_diag_seed(ctx, params, idx))))
    worst_slope = 0.0
    worst_env = -math.inf
    worst_c = 0.0
    for i in range(n_maps):
        alpha = float(rng.random() * alpha_max)
        a = float(np.exp(rng.normal(0, 0.5)))
        b1 = float(np.exp(rng.normal(0, 0.5))) + 1.0
        b2 = float(rng.random())
        if i % 2 == 0:
            ev = lambda x, a=a, b1=b1: a * np.asarray(x, float) + b1
        else:
            # sublinear oscillation saturating the (AL^alpha) envelope
            ev = lambda x, a=a, b1=b1, b2=b2, al=alpha: (
                a * np.asarray(x, float)
                + b1 + b2 * (1 + np.abs(x) ** al) * np.cos(np.asarray(x, float)))
        m = MapSample("alpha_sample", ev, A=a, B=b1 + b2, alpha=alpha,
                      domain=maps.HALF_LINE)
        res = power_conjugate(m, grid)
        worst_slope = max(worst_slope, abs(res.map.A - a ** (1 - alpha)))
        chk = maps.envelope_check(res.map, grid)
        worst_env = max(worst_env, chk.max_violation)
        worst_c = max(worst_c, res.c_alpha_empirical)
    rep = {"n_maps": n_maps, "alpha_max": alpha_max,
           "max_slope_error": worst_slope, "max_envelope_violation": worst_env,
           "max_c_alpha_empirical": worst_c}
    return rep, bool(worst_slope == 0.0 and worst_env <= 0.0)


def _d_synthetic_classifier(params, ctx, idx):
    n = int(params.get("samples", 1_000_000))
    seed = _diag_seed(ctx, params, idx)
    log_lay = measure.BinLayout()
    lin_lay = measure.BinLayout(x_core=128.0, n_core=2048, bins_per_decade=16,
                                decades=6)
    checks = {}

    m_haar = measure.synthetic_measure(log_lay, "dx_over_x", n, 1e-2, 1e7, seed)
    m_kest = measure.synthetic_measure(log_lay, "dx_over_x1pk", n, 1e-2, 1e7, seed + 1)
    z = [10.0, 100.0, 1000.0]
    checks["tail_homogeneity_accepts_haar"] = measure.tail_homogeneity_report(
        m_haar, z).passes(1.4)
    checks["tail_homogeneity_rejects_kesten"] = not measure.tail_homogeneity_report(
        m_kest, z).passes(1.4)

    m_haar2 = measure.synthetic_measure(log_lay, "dx_over_x", n, 1e-2, 1e7,
                                        seed + 2, two_sided=True)
    m_leb2 = measure.synthetic_measure(log_lay, "dx", n, 0.0, 2000.0, seed + 3,
                                       two_sided=True)
    ks = [1, 2, 3, 4, 5, 6]
    checks["log_growth_accepts_haar"] = measure.log_growth_fit(m_haar2, ks).r2 >= 0.98
    checks["log_growth_rejects_lebesgue"] = measure.log_growth_fit(m_leb2, ks).r2 < 0.98

    phi01 = phi_from_config("indicator[0,1]")
    xg = [10.0, 20.0, 50.0, 100.0]
    m_leb = measure.synthetic_measure(lin_lay, "dx", n, 0.0, 2000.0, seed + 4)
    m_haar3 = measure.synthetic_measure(lin_lay, "dx_over_x", n, 1e-2, 1e7, seed + 5)
    checks["critical_tail_accepts_lebesgue"] = reflected.critical_tail_check(
        m_leb, phi01, xg).passes(1.35)
    checks["critical_tail_rejects_haar"] = not reflected.critical_tail_check(
        m_haar3, phi01, xg).passes(1.35)

    correct = sum(checks.values())
    return {"checks": checks, "correct": correct, "total": len(checks)}, correct == len(checks)


def _d_uniqueness_audit(params, ctx, idx):
    grid = np.concatenate([[0.0], np.logspace(-2, 4, 61)])
    audit = maps.uniqueness_criterion_audit(
        ctx.family, int(params.get("budget", 2000)), grid,
        _diag_seed(ctx, params, idx))
    return audit.as_dict(), audit.all_pass


def _d_gw_envelope(params, ctx, idx):
    fam = ctx.family
    alpha = float(params.get("alpha", 0.8))
    x_max = int(params.get("x_max", 10_000))
    samples = int(params.get("samples", 200))
    seed = _diag_seed(ctx, params, idx)
    rep1 = maps.gw_envelope_constant(fam, alpha, x_max, samples, seed)
    rep2 = maps.gw_envelope_constant(fam, alpha, 2 * x_max, samples, seed + 1)
    ratio = rep2.p99 / rep1.p99 if rep1.p99 > 0 else math.inf
    rep = {"alpha": alpha, "x_max": x_max, "samples": samples,
           "p99": rep1.p99, "p99_doubled": rep2.p99, "p99_ratio": ratio,
           "log_moment": rep1.log_moment}
    return rep, bool(math.isfinite(rep1.p99) and 0.7 <= ratio <= 1.4)


_DISPATCH = {
    "group_axioms": _d_group_axioms,
    "hitting_window_scan": _d_hitting_window_scan,
    "envelope_sandwich": _d_envelope_sandwich,
    "tail_homogeneity": _d_tail_homogeneity,
    "log_growth": _d_log_growth,
    "slow_variation": _d_slow_variation,
    "invariance": _d_invariance,
    "martingale_bound": _d_martingale_bound,
    "contraction": _d_contraction,
    "ratio_monotone": _d_ratio_monotone,
    "critical_tail": _d_critical_tail,
    "cross_route_tail": _d_cross_route_tail,
    "feller_oracle": _d_feller_oracle,
    "embedded_ladder": _d_embedded_ladder,
    "poisson_limit": _d_poisson_limit,
    "duality": _d_duality,
    "wiener_hopf": _d_wiener_hopf,
    "power_conjugation": _d_power_conjugation,
    "synthetic_classifier": _d_synthetic_classifier,
    "uniqueness_audit": _d_uniqueness_audit,
    "gw_envelope": _d_gw_envelope,
}

_CONJ_LAYOUT = measure.BinLayout(x_core=1.0, n_core=64, bins_per_decade=16,
                                 decades=295)


def _jsonable(obj):
    """Recursively convert numpy scalars/arrays for json.dump."""
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def run_scenario(cfg: ScenarioConfig, out_dir: str, threads: int = 1,
                 quick: bool = False) -> tuple[dict, int]:
    """Execute a validated scenario; returns (results, checks_failed)."""
    os.makedirs(out_dir, exist_ok=True)
    family = maps.family_from_config(cfg.family) if cfg.family else None
    needs_measure = any(d["kind"] in _MEASURE_KINDS for d in cfg.diagnostics)
    measures = []
    if needs_measure:
        if family is None:
            raise ConfigError("config.family: required by the requested diagnostics")
        lay = measure.BinLayout.from_config(cfg.layout) if cfg.layout else measure.BinLayout()
        routes = [(lay, None)]
        if cfg.conjugate_route == "exp":
            routes.append((_CONJ_LAYOUT, exp_scale))
        measures = measure.simulate_occupation(family, _engine_config(cfg), routes,
                                               threads=threads)
    ctx = RunContext(cfg, family, measures, threads,
                     int(cfg.engine.get("seed", 0)))
    results = []
    failed = 0
    for i, d in enumerate(cfg.diagnostics):
        params = {k: v for k, v in d.items() if k != "kind"}
        rep, passed = _DISPATCH[d["kind"]](params, ctx, i)
        if passed is False:
            failed += 1
        results.append({"kind": d["kind"], "passed": passed, "report": rep})

    out = {
        "scenario": cfg.scenario,
        "target": cfg.target,
        "backend": BACKEND_NAME,
        "seed": int(cfg.engine.get("seed", 0)),
        "quick": quick,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "config": cfg.as_dict(),
        "diagnostics": results,
        "checks_failed": failed,
    }
    for i, m in enumerate(measures):
        suffix = "" if i == 0 else "_conj"
        m.write_csv(os.path.join(out_dir, f"{cfg.scenario}_measure{suffix}.csv"))
    out = _jsonable(out)
    with open(os.path.join(out_dir, f"{cfg.scenario}_results.json"), "w") as f:
        json.dump(out, f, indent=2, sort_keys=True)
        f.write("\n")
    _write_summary(out, os.path.join(out_dir, f"{cfg.scenario}_summary.txt"))
    return out, failed


def _write_summary(out: dict, path: str):
    lines = [f"scenario: {out['scenario']}   target: {out['target']}   "
             f"seed: {out['seed']}   backend: {out['backend']}"]
    for d in out["diagnostics"]:
        status = {True: "PASS", False: "FAIL", None: "INFO"}[d["passed"]]
        lines.append(f"  [{status}] {d['kind']}")
    lines.append(f"checks failed: {out['checks_failed']}")
    text = "\n".join(lines) + "\n"
    with open(path, "w") as f:
        f.write(text)
    print(text, end="")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="critsds",
                                     description="Critical stochastic dynamical "
                                                 "systems: simulation and checks.")
    sub = parser.add_subparsers(dest="command", required=True)
    runp = sub.add_parser("run", help="run a scenario")
    runp.add_argument("--scenario", help="bundled scenario name")
    runp.add_argument("--config", help="path to a scenario config JSON")
    runp.add_argument("--seed", type=int, help="override the master seed")
    runp.add_argument("--out", default="out", help="output directory")
    runp.add_argument("--threads", type=int, default=0,
                      help="worker threads (0 = auto)")
    runp.add_argument("--quick", action="store_true", help="reduced CI budgets")
    sub.add_parser("list-scenarios", help="show bundled scenarios")
    args = parser.parse_args(argv)

    if args.command == "list-scenarios":
        for row in list_scenarios():
            print(f"{row['scenario']:24s} {row['target']:28s} {row['description']}")
        return 0

    try:
        if args.config:
            with open(args.config) as f:
                raw = json.load(f)
        elif args.scenario:
            raw = get_scenario(args.scenario, quick=args.quick)
        else:
            print("error: need --scenario or --config", file=sys.stderr)
            return 2
        if args.seed is not None:
            raw.setdefault("engine", {})["seed"] = args.seed
        cfg = validate_config(raw)
        threads = args.threads if args.threads > 0 else (os.cpu_count() or 1)
        _, failed = run_scenario(cfg, args.out, threads=threads, quick=args.quick)
    except (ConfigError, KeyError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (engine.OverflowGuardError, engine.SandwichError) as exc:
        print(f"hard failure: {exc}", file=sys.stderr)
        return 2
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
