"""The reflected random walk Y_n = |Y_(n-1) - u_n| on [0, inf).

For nonnegative steps the invariant probability has the closed form
(1 - F(x)) dx (the exact oracle used in the acceptance suite); for
centered steps the walk is null recurrent and its infinite invariant
measure is Lebesgue-like at infinity, estimated here by occupation
times and cross-checked through the ladder-walk construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import engine as _engine
from ._kernels import backend as _backend
from .maps import Dist, ReflectedStepFamily
from .measure import BinLayout, LogBinnedMeasure
from .rng import chain_rng

__all__ = [
    "ReflectedSpec",
    "simulate_reflected",
    "feller_density",
    "feller_cdf",
    "feller_mass",
    "FellerReport",
    "feller_oracle_check",
    "lattice_period",
    "EmbeddedLadderReport",
    "embedded_ladder_measure",
    "CriticalTailReport",
    "critical_tail_check",
    "moment_audit",
]


@dataclass(frozen=True)
class ReflectedSpec:
    """Step law plus the user-asserted moment/aperiodicity flags."""

    u: Dist
    centered_intended: bool = True
    moments_asserted: bool = True   # E(u+)^(3/2) < inf and E(u-)^2 < inf
    aperiodic_asserted: bool = True

    @property
    def family(self) -> ReflectedStepFamily:
        return ReflectedStepFamily(self.u)


def simulate_reflected(spec: ReflectedSpec, x: float,
                       config: _engine.TrajectoryConfig) -> _engine.TrajectoryResult:
    """Forward reflected orbits; trajectories stay nonnegative."""
    if x < 0:
        raise ValueError("initial point must be nonnegative")
    from dataclasses import replace
    return _engine.simulate_forward(spec.family, replace(config, initial=x))


def moment_audit(spec: ReflectedSpec, seed: int = 0, n: int = 200_000) -> dict:
    """Empirical moments behind the recurrence assumptions."""
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    u = spec.u.sample(rng, n)
    up = np.maximum(u, 0.0)
    um = np.maximum(-u, 0.0)
    return {"mean": float(u.mean()), "mean_se": float(u.std(ddof=1) / math.sqrt(n)),
            "e_uplus_3_2": float((up ** 1.5).mean()), "e_uminus_2": float((um ** 2).mean())}


def feller_density(F: Callable, x) -> np.ndarray | float:
    """Density 1 - F(x) of the invariant measure for nonnegative steps."""
    x = np.asarray(x, dtype=float)
    out = 1.0 - np.asarray(F(x), dtype=float)
    return out if out.ndim else float(out)


def feller_mass(F: Callable, hi: float, n: int = 200_001) -> float:
    """Total mass of (1-F) dx on [0, hi]; equals E[u] when hi covers the tail."""
    xs = np.linspace(0.0, hi, n)
    return float(np.trapezoid(feller_density(F, xs), xs))


def feller_cdf(F: Callable, grid: np.ndarray) -> np.ndarray:
    """Normalized CDF of (1-F(x)) dx on the given grid (grid[0] = 0)."""
    dens = feller_density(F, grid)
    cdf = np.concatenate([[0.0], np.cumsum((dens[1:] + dens[:-1]) / 2 * np.diff(grid))])
    return cdf / cdf[-1]


def dist_cdf(d: Dist) -> Callable:
    """Analytic CDF for the step kinds the Feller oracle supports."""
    k, a = d.kind, d.args
    if k == "exponential":
        return lambda x: np.where(np.asarray(x, float) < 0, 0.0,
                                  1.0 - np.exp(-np.asarray(x, float) / a[0]))
    if k == "uniform":
        lo, hi = a
        return lambda x: np.clip((np.asarray(x, float) - lo) / (hi - lo), 0.0, 1.0)
    if k == "constant":
        return lambda x: (np.asarray(x, float) >= a[0]).astype(float)
    raise ValueError(f"no analytic CDF for distribution kind {k!r}")


def lattice_period(samples: np.ndarray, tol: float = 1e-9) -> Optional[float]:
    """Greatest common step quantum, or None if the law looks nonlattice."""
    v = np.abs(np.asarray(samples, dtype=float))
    v = v[v > tol]
    if len(v) == 0:
        return None
    ints = np.rint(v / tol).astype(np.int64)
    g = 0
    for i in ints[:2000]:
        g = math.gcd(g, int(i))
        if g == 1:
            break
    period = g * tol
    return period if period > 10 * tol else None


@dataclass
class FellerReport:
    ks_distance: float
    threshold: float
    steps: int
    periodic: bool
    passes: bool

    def as_dict(self) -> dict:
        return {"ks_distance": self.ks_distance, "threshold": self.threshold,
                "steps": self.steps, "periodic": self.periodic, "passes": self.passes}


def feller_oracle_check(spec: ReflectedSpec, steps: int = 1_000_000,
                        seed: int = 0, x0: float = 0.0,
                        threshold: float = 0.01) -> FellerReport:
    """KS distance between the occupation distribution and (1-F) dx.

    Steps must be nonnegative a.s.; lattice laws are flagged and skipped
    (a two-cycle never mixes to the Feller law).
    """
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    probe = spec.u.sample(rng, 2000)
    if (probe < 0).any():
        raise ValueError("Feller oracle needs nonnegative steps")
    period = lattice_period(probe)
    if period is not None:
        return FellerReport(math.nan, threshold, steps, True, False)
    cfg = _engine.TrajectoryConfig(seed=seed, steps=steps, n_chains=1, initial=x0,
                                   dense_until=steps, record_stride=1)
    traj = simulate_reflected(spec, x0, cfg)
    vals = np.sort(traj.values[:, 0])
    F = dist_cdf(spec.u)
    hi = float(vals.max()) * 1.01 + 1.0
    grid = np.linspace(0.0, hi, 20_001)
    cdf = feller_cdf(F, grid)
    theo = np.interp(vals, grid, cdf)
    emp_hi = np.arange(1, len(vals) + 1) / len(vals)
    emp_lo = np.arange(0, len(vals)) / len(vals)
    ks = float(max(np.abs(emp_hi - theo).max(), np.abs(emp_lo - theo).max()))
    return FellerReport(ks, threshold, steps, False, ks < threshold)


# ---------------------------------------------------------------------------
# the ladder-walk construction of the invariant measure

def _ladder_increments(u_dist: Dist, rng, count: int, block: int = 4096) -> np.ndarray:
    """Weak-ascending ladder height increments of the walk S_n = sum(u)."""
    out = np.empty(count)
    got = 0
    s0 = 0.0
    record = 0.0
    while got < count:
        s = s0 + np.cumsum(u_dist.sample(rng, block))
        running = np.maximum.accumulate(np.maximum(s, record))
        prev = np.concatenate([[record], running[:-1]])
        heights = s[s >= prev]
        take = min(len(heights), count - got)
        if take:
            # `record` carries the last ladder height across blocks so the
            # increments chain correctly
            inc = np.diff(np.concatenate([[record], heights[:take]]))
            out[got:got + take] = inc
            record = float(heights[take - 1])
        s0 = float(s[-1])
        got += take
    return out


@dataclass
class EmbeddedLadderReport:
    measure: LogBinnedMeasure           # two-stage estimate of the invariant measure
    direct: LogBinnedMeasure            # independent plain occupation estimate
    ratio_flatness: float               # max/min of per-window ratios
    windows: np.ndarray
    censored_excursions: float
    embedded_steps: int
    excursions: int

    def as_dict(self) -> dict:
        return {"ratio_flatness": self.ratio_flatness,
                "windows": [list(map(float, w)) for w in self.windows],
                "censored_excursions": self.censored_excursions,
                "embedded_steps": self.embedded_steps, "excursions": self.excursions}


def embedded_ladder_measure(
    spec: ReflectedSpec,
    layout: BinLayout,
    embedded_steps: int = 200_000,
    excursions: int = 50_000,
    direct_steps: int = 2_000_000,
    excursion_horizon: int = 100_000,
    burn_in: int = 10_000,
    seed: int = 0,
    windows: Optional[np.ndarray] = None,
) -> EmbeddedLadderReport:
    """Two-stage estimator of the invariant measure and its consistency
    against a direct occupation run.

    Stage one runs the embedded chain driven by i.i.d. ascending ladder
    heights (positive steps, hence positive recurrent) to estimate its
    invariant probability; stage two accumulates excursions of the full
    chain started from that estimate, each stopped at the first weak
    ascent of its driving walk.
    """
    spec.family  # validate
    rng_l = chain_rng(seed, 0)
    ubar = _ladder_increments(spec.u, rng_l, burn_in + embedded_steps)
    # embedded reflected recursion driven by the ladder increments
    emb_state = np.zeros(1)
    emb_out = np.empty((len(ubar), 1))
    _backend.reflected_block(emb_state, np.ascontiguousarray(ubar[:, None]), emb_out)
    emb = emb_out[burn_in:, 0]

    rng_e = chain_rng(seed, 1)
    starts = rng_e.choice(emb, size=excursions, replace=True)
    two_stage = LogBinnedMeasure(layout)
    censored = 0
    block = 512
    for k in range(excursions):
        # Y and its driving walk S share the same draws; stop the
        # excursion at the first weak ascent of S.  Occupation collects
        # Y_0 .. Y_(t-1).
        state = np.array([float(starts[k])])
        prev = float(starts[k])
        s0 = 0.0
        taken = 0
        done = False
        while taken < excursion_horizon and not done:
            u = spec.u.sample(rng_e, block)
            s = s0 + np.cumsum(u)
            up = np.nonzero(s >= 0.0)[0]
            stop = int(up[0]) + 1 if len(up) else block
            done = len(up) > 0
            path = np.empty((stop, 1))
            _backend.reflected_block(state, np.ascontiguousarray(u[:stop, None]), path)
            two_stage.add_values(np.concatenate([[prev], path[:-1, 0]]))
            prev = float(path[-1, 0])
            s0 = float(s[-1])
            taken += stop
        if not done:
            censored += 1

    cfg = _engine.TrajectoryConfig(seed=seed + 1, steps=direct_steps, n_chains=1,
                                   initial=0.0, dense_until=direct_steps)
    direct = LogBinnedMeasure(layout)
    for _, vals in _engine.iter_value_blocks(spec.family, cfg):
        direct.add_values(vals)

    if windows is None:
        hi = np.percentile(emb, 95)
        edges = np.linspace(0.0, max(hi, 4.0), 9)
        windows = np.column_stack([edges[:-1], edges[1:]])
    ratios = []
    for lo, hi in windows:
        a = two_stage.count_interval(lo, hi)
        b = direct.count_interval(lo, hi)
        if a > 0 and b > 0:
            ratios.append((a / two_stage.ref_count) / (b / direct.ref_count))
    ratios = np.asarray(ratios)
    flat = float(ratios.max() / ratios.min()) if len(ratios) else math.inf
    return EmbeddedLadderReport(two_stage, direct, flat, np.asarray(windows),
                                censored / excursions, embedded_steps, excursions)


@dataclass
class CriticalTailReport:
    """Translated-window functionals of the occupation measure."""

    x_grid: np.ndarray
    values: np.ndarray
    raw_counts: np.ndarray
    low_confidence: np.ndarray
    flatness: float

    def passes(self, max_flatness: float) -> bool:
        return bool(np.all(self.values > 0) and self.flatness <= max_flatness)

    def as_dict(self) -> dict:
        return {"x_grid": list(map(float, self.x_grid)),
                "values": list(map(float, self.values)),
                "raw_counts": list(map(float, self.raw_counts)),
                "low_confidence": list(map(bool, self.low_confidence)),
                "flatness": self.flatness}


def critical_tail_check(m: LogBinnedMeasure, phi, x_grid) -> CriticalTailReport:
    """Integral of phi(u - x) dnu(u), across translations x.

    Flat in x means the tail is Lebesgue-like; a dx/x measure decays
    like 1/x here instead.
    """
    x_grid = np.asarray(x_grid, dtype=float)
    slo, shi = phi.support
    mids = m.layout.mids()[1:-1]
    vals = np.empty(len(x_grid))
    raw = np.empty(len(x_grid))
    for i, x in enumerate(x_grid):
        if x + shi > m.layout.x_max:
            from .measure import CoverageError
            raise CoverageError(f"translation window [{x+slo:g},{x+shi:g}] outside coverage")
        w = np.asarray(phi(mids - x), dtype=float)
        vals[i] = float((m.counts[1:-1] * w).sum() / m.ref_count)
        raw[i] = m.count_interval(x + slo, x + shi)
    pos = vals[vals > 0]
    flat = float(pos.max() / pos.min()) if len(pos) == len(vals) and len(vals) else math.inf
    return CriticalTailReport(x_grid, vals, raw, raw < 100, flat)
