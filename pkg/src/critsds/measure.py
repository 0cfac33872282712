"""Empirical invariant Radon measures from occupation times.

A LogBinnedMeasure is a count histogram: uniform core bins on
[-x_core, x_core], geometric tail bins on each side out to
x_core * 10^decades, and one overflow bin per side.  All diagnostics use
count ratios against a reference window (default [1, e]), matching the
fact that the invariant measure is only defined up to scale.  Merging is
exact count addition, so chains parallelize trivially.

Null-recurrent occupation ratios converge slowly; every report carries
raw counts and flags low-confidence windows instead of hiding them.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from . import engine as _engine
from ._kernels import backend as _backend
from .maps import FamilySpec
from .rng import chain_rng

__all__ = [
    "BinLayout",
    "LogBinnedMeasure",
    "CoverageError",
    "accumulate",
    "merge",
    "simulate_occupation",
    "synthetic_measure",
    "dilated_functional",
    "TailHomogeneityReport",
    "tail_homogeneity_report",
    "LogGrowthFit",
    "log_growth_fit",
    "SlowVariationReport",
    "slow_variation_check",
    "InvarianceReport",
    "invariance_residual",
    "MartingaleBoundReport",
    "martingale_bound_check",
]

E = float(np.e)


class CoverageError(ValueError):
    """A query needed mass outside the covered range."""


@dataclass(frozen=True)
class BinLayout:
    """Bin geometry: core + geometric tails + overflow."""

    x_core: float = 1.0
    n_core: int = 64
    bins_per_decade: int = 16
    decades: int = 8

    def __post_init__(self):
        if self.x_core <= 0 or self.n_core < 1 or self.bins_per_decade < 1 or self.decades < 1:
            raise ValueError("invalid layout")

    @property
    def n_tail(self) -> int:
        return self.bins_per_decade * self.decades

    @property
    def x_max(self) -> float:
        return self.x_core * 10.0 ** self.decades

    @property
    def n_bins(self) -> int:
        # [neg overflow] + neg tail + core + pos tail + [pos overflow]
        return 2 * self.n_tail + self.n_core + 2

    def edges(self) -> np.ndarray:
        """Interior bin edges, ascending (length n_bins - 1)."""
        j = np.arange(1, self.n_tail + 1)
        tail = self.x_core * 10.0 ** (j / self.bins_per_decade)
        core = np.linspace(-self.x_core, self.x_core, self.n_core + 1)
        return np.concatenate([-tail[::-1], core, tail])

    def index(self, values: np.ndarray) -> np.ndarray:
        """Bin index per value (arithmetic, no edge search)."""
        v = np.asarray(values, dtype=float)
        av = np.abs(v)
        core_w = 2.0 * self.x_core / self.n_core
        with np.errstate(divide="ignore", invalid="ignore"):
            j = np.floor(np.log10(av / self.x_core) * self.bins_per_decade)
        j = np.clip(j, 0, self.n_tail - 1)
        core_idx = np.clip(np.floor((v + self.x_core) / core_w), 0, self.n_core - 1)
        idx = np.where(
            av >= self.x_max,
            np.where(v < 0, 0, self.n_bins - 1),
            np.where(
                av <= self.x_core,
                1 + self.n_tail + core_idx,
                np.where(v < 0, self.n_tail - j, 1 + self.n_tail + self.n_core + j),
            ),
        )
        return idx.astype(np.int64)

    def mids(self) -> np.ndarray:
        """Representative points: arithmetic mid in the core, geometric in
        the tails, nan for overflow."""
        e = self.edges()
        lo, hi = e[:-1], e[1:]
        tail = np.sign(lo) * np.sqrt(np.abs(lo * hi))
        lin = (lo + hi) / 2.0
        is_core = (np.abs(lo) <= self.x_core + 1e-300) & (np.abs(hi) <= self.x_core * (1 + 1e-12))
        inner = np.where(is_core, lin, tail)
        return np.concatenate([[np.nan], inner, [np.nan]])

    def as_config(self) -> dict:
        return {"x_core": self.x_core, "n_core": self.n_core,
                "bins_per_decade": self.bins_per_decade, "decades": self.decades}

    @staticmethod
    def from_config(obj: dict) -> "BinLayout":
        return BinLayout(float(obj["x_core"]), int(obj["n_core"]),
                         int(obj["bins_per_decade"]), int(obj["decades"]))


@dataclass
class LogBinnedMeasure:
    """Counts per bin plus bookkeeping; values only enter as ratios."""

    layout: BinLayout
    counts: np.ndarray = None
    total_steps: int = 0
    ref_window: tuple[float, float] = (1.0, E)

    def __post_init__(self):
        if self.counts is None:
            self.counts = np.zeros(self.layout.n_bins, dtype=np.int64)
        if len(self.counts) != self.layout.n_bins:
            raise ValueError("counts length does not match layout")

    # -- accumulation ------------------------------------------------------
    def add_values(self, values: np.ndarray):
        idx = self.layout.index(np.ravel(values))
        self.counts += np.bincount(idx, minlength=self.layout.n_bins)
        self.total_steps += idx.size

    def __add__(self, other: "LogBinnedMeasure") -> "LogBinnedMeasure":
        if self.layout != other.layout or self.ref_window != other.ref_window:
            raise ValueError("can only merge measures with identical layouts")
        return LogBinnedMeasure(self.layout, self.counts + other.counts,
                                self.total_steps + other.total_steps, self.ref_window)

    # -- queries -----------------------------------------------------------
    @property
    def overflow_fraction(self) -> float:
        if self.total_steps == 0:
            return 0.0
        return float((self.counts[0] + self.counts[-1]) / self.total_steps)

    @property
    def overflow_flagged(self) -> bool:
        return self.overflow_fraction > 0.01

    def count_interval(self, lo: float, hi: float) -> float:
        """Counts in [lo, hi], fractional at the boundary bins.

        Within-bin interpolation is linear in the core and log-linear in
        the tails (the natural convention for a dx/x-like object).
        """
        if hi <= lo:
            return 0.0
        lay = self.layout
        if lo < -lay.x_max or hi > lay.x_max:
            raise CoverageError(f"[{lo}, {hi}] leaks outside covered range ±{lay.x_max:g}")
        e = lay.edges()
        inner = self.counts[1:-1]
        a = np.maximum(e[:-1], lo)
        b = np.minimum(e[1:], hi)
        olap = np.maximum(b - a, 0.0)
        width = e[1:] - e[:-1]
        frac_lin = olap / width
        # log fraction for tail bins (nonzero overlap only, same-sign edges)
        with np.errstate(divide="ignore", invalid="ignore"):
            num = np.log(np.abs(np.where(olap > 0, a, 1.0))) - np.log(np.abs(np.where(olap > 0, b, 1.0)))
            den = np.log(np.abs(e[:-1])) - np.log(np.abs(e[1:]))
            frac_log = np.abs(num) / np.abs(den)
        is_tail = (np.abs(e[:-1]) >= lay.x_core * (1 - 1e-12)) & (np.abs(e[1:]) > lay.x_core)
        frac = np.where(is_tail & (olap > 0), frac_log, frac_lin)
        return float((inner * np.where(olap > 0, frac, 0.0)).sum())

    @property
    def ref_count(self) -> float:
        return self.count_interval(*self.ref_window)

    def normalized(self, lo: float, hi: float) -> float:
        r = self.ref_count
        if r <= 0:
            raise ValueError("reference window has no counts; cannot normalize")
        return self.count_interval(lo, hi) / r

    # -- serialization -----------------------------------------------------
    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("# critsds-measure v1\n")
        buf.write(f"# layout: {json.dumps(self.layout.as_config(), sort_keys=True)}\n")
        buf.write(f"# total_steps: {self.total_steps}\n")
        buf.write(f"# reference_window: [{self.ref_window[0]!r}, {self.ref_window[1]!r}]\n")
        ref = self.ref_count if self.counts[1:-1].any() else 0.0
        buf.write("bin_lo,bin_hi,count,normalized\n")
        e = self.layout.edges()
        los = np.concatenate([[-np.inf], e])
        his = np.concatenate([e, [np.inf]])
        for lo, hi, c in zip(los, his, self.counts):
            nrm = (c / ref) if ref > 0 else 0.0
            buf.write(f"{lo!r},{hi!r},{int(c)},{nrm!r}\n")
        return buf.getvalue()

    def write_csv(self, path):
        with open(path, "w") as f:
            f.write(self.to_csv())

    @staticmethod
    def from_csv(text: str) -> "LogBinnedMeasure":
        layout = None
        total = 0
        ref = (1.0, E)
        counts = []
        rows = []
        for line in text.splitlines():
            if line.startswith("# layout:"):
                layout = BinLayout.from_config(json.loads(line.split(":", 1)[1]))
            elif line.startswith("# total_steps:"):
                total = int(line.split(":", 1)[1])
            elif line.startswith("# reference_window:"):
                ref = tuple(json.loads(line.split(":", 1)[1]))
            elif line.startswith("#") or line.startswith("bin_lo") or not line.strip():
                continue
            else:
                rows.append(line.split(","))
        if layout is None:
            raise ValueError("missing layout header")
        counts = np.array([int(r[2]) for r in rows], dtype=np.int64)
        m = LogBinnedMeasure(layout, counts, total, (float(ref[0]), float(ref[1])))
        e = layout.edges()
        file_edges = np.array([float(r[0]) for r in rows[1:]])
        if not np.array_equal(file_edges, e):
            raise ValueError("bin edges in file disagree with layout header")
        return m


def accumulate(values: Iterable, layout: BinLayout,
               ref_window: tuple[float, float] = (1.0, E)) -> LogBinnedMeasure:
    """Bin a value array or an iterator of blocks into a fresh measure."""
    m = LogBinnedMeasure(layout, ref_window=ref_window)
    if isinstance(values, np.ndarray):
        m.add_values(values)
        return m
    for block in values:
        m.add_values(np.asarray(block))
    return m


def merge(measures: Sequence[LogBinnedMeasure]) -> LogBinnedMeasure:
    out = measures[0]
    for m in measures[1:]:
        out = out + m
    return out


def simulate_occupation(
    spec: FamilySpec,
    config: _engine.TrajectoryConfig,
    layouts: Sequence[tuple[BinLayout, Optional[Callable]]],
    threads: int = 1,
    ref_window: tuple[float, float] = (1.0, E),
) -> list[LogBinnedMeasure]:
    """Accumulate occupation measures over all chains, one per (layout,
    transform) pair, in a single simulation pass."""

    def worker(chain_range):
        ms = [LogBinnedMeasure(lay, ref_window=ref_window) for lay, _ in layouts]
        for _, values in _engine.iter_value_blocks(spec, config, chain_range):
            for m, (_, tf) in zip(ms, layouts):
                m.add_values(values if tf is None else tf(values))
        return ms

    parts = _engine.parallel_chunks(worker, config.n_chains, threads)
    return [merge([p[i] for p in parts]) for i in range(len(layouts))]


def synthetic_measure(
    layout: BinLayout,
    law: str,
    n_samples: int,
    lo: float,
    hi: float,
    seed: int,
    kappa: float = 0.5,
    two_sided: bool = False,
    ref_window: tuple[float, float] = (1.0, E),
) -> LogBinnedMeasure:
    """Measure sampled exactly from a known density (oracle input).

    law: "dx_over_x" (Haar on the positive half line), "dx" (Lebesgue),
    "dx_over_x1pk" (density x^-(1+kappa)), "point_mass" (at lo).
    """
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    u = rng.random(n_samples)
    if law == "dx_over_x":
        x = np.exp(np.log(lo) + u * (np.log(hi) - np.log(lo)))
    elif law == "dx":
        x = lo + u * (hi - lo)
    elif law == "dx_over_x1pk":
        # inverse CDF of x^-(1+k) on [lo, hi]
        a, b = lo ** -kappa, hi ** -kappa
        x = (a - u * (a - b)) ** (-1.0 / kappa)
    elif law == "point_mass":
        x = np.full(n_samples, lo)
    else:
        raise ValueError(f"unknown synthetic law {law!r}")
    if two_sided:
        x = x * np.where(rng.random(n_samples) < 0.5, -1.0, 1.0)
    return accumulate(x, layout, ref_window)


# ---------------------------------------------------------------------------
# diagnostics


def _phi_support(phi) -> tuple[float, float]:
    supp = getattr(phi, "support", None)
    if supp is None:
        raise ValueError("phi needs a declared support (use the phi library)")
    return supp


def dilated_functional(m: LogBinnedMeasure, phi, z: float) -> float:
    """Normalized integral of phi(u / z) against the measure.

    Bin-midpoint quadrature; the dilated support must stay inside the
    covered positive range.
    """
    if z <= 0:
        raise ValueError("z must be positive")
    slo, shi = _phi_support(phi)
    if slo <= 0:
        raise ValueError("phi must be supported in (0, inf)")
    if z * shi > m.layout.x_max:
        raise CoverageError(f"dilated support [{z*slo:g}, {z*shi:g}] leaks past {m.layout.x_max:g}")
    mids = m.layout.mids()
    inner = slice(1, -1)
    w = np.asarray(phi(mids[inner] / z), dtype=float)
    return float((m.counts[inner] * w).sum() / m.ref_count)


@dataclass
class TailHomogeneityReport:
    """h(z) = nu[z, Mz] / log M across a dilation grid."""

    z_grid: np.ndarray
    m_factor: float
    h: np.ndarray
    raw_counts: np.ndarray
    low_confidence: np.ndarray
    flatness: float

    def passes(self, max_flatness: float) -> bool:
        return bool(np.all(self.h > 0) and self.flatness <= max_flatness)

    def as_dict(self) -> dict:
        return {"z_grid": list(map(float, self.z_grid)), "M": self.m_factor,
                "h": list(map(float, self.h)),
                "raw_counts": list(map(float, self.raw_counts)),
                "low_confidence": list(map(bool, self.low_confidence)),
                "flatness": self.flatness}


def tail_homogeneity_report(m: LogBinnedMeasure, z_grid: Sequence[float],
                            M: float = 2.0) -> TailHomogeneityReport:
    if M <= 1:
        raise ValueError("dilation factor M must exceed 1")
    z_grid = np.asarray(z_grid, dtype=float)
    h = np.empty(len(z_grid))
    raw = np.empty(len(z_grid))
    for i, z in enumerate(z_grid):
        raw[i] = m.count_interval(z, M * z)
        h[i] = raw[i] / m.ref_count / math.log(M)
    pos = h[h > 0]
    flat = float(pos.max() / pos.min()) if len(pos) == len(h) and len(pos) else float("inf")
    return TailHomogeneityReport(z_grid, M, h, raw, raw < 100, flat)


@dataclass
class LogGrowthFit:
    k_grid: np.ndarray
    values: np.ndarray          # normalized nu[-e^k, e^k]
    slope: float
    intercept: float
    r2: float
    convex_residuals: bool      # curvature flag: linear fit may be wrong model

    def as_dict(self) -> dict:
        return {"k_grid": list(map(float, self.k_grid)),
                "values": list(map(float, self.values)),
                "slope": self.slope, "intercept": self.intercept, "r2": self.r2,
                "convex_residuals": self.convex_residuals}


def log_growth_fit(m: LogBinnedMeasure, k_grid: Sequence[float]) -> LogGrowthFit:
    """Least squares of nu[-e^k, e^k] against k."""
    k_grid = np.asarray(k_grid, dtype=float)
    if len(k_grid) < 3:
        raise ValueError("need at least 3 grid points")
    y = np.array([m.normalized(-math.exp(k), math.exp(k)) for k in k_grid])
    A = np.vstack([k_grid, np.ones_like(k_grid)]).T
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    pred = slope * k_grid + intercept
    ss_res = float(((y - pred) ** 2).sum())
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    resid = y - pred
    # an everywhere-positive second difference marks convex growth
    d2 = np.diff(resid, 2)
    return LogGrowthFit(k_grid, y, float(slope), float(intercept), r2,
                        bool(len(d2) >= 2 and (d2 > 0).all()))


@dataclass
class SlowVariationReport:
    x_grid: np.ndarray
    y_grid: np.ndarray
    ratios: np.ndarray          # shape (len(x), len(y)): L(e^(x+y)) / L(e^x)
    k_hat: float                # max ratio / (1 + y)
    trend_band: tuple[float, float]
    trend_pass: bool            # last-x ratios inside the band
    bound_pass: bool            # all ratios <= k_hat (1 + y)
    low_confidence: np.ndarray

    def as_dict(self) -> dict:
        return {"x_grid": list(map(float, self.x_grid)),
                "y_grid": list(map(float, self.y_grid)),
                "ratios": [list(map(float, r)) for r in self.ratios],
                "k_hat": self.k_hat, "trend_band": list(self.trend_band),
                "trend_pass": self.trend_pass, "bound_pass": self.bound_pass}


def slow_variation_check(
    m: LogBinnedMeasure,
    phi,
    x_grid: Sequence[float],
    y_grid: Sequence[float],
    trend_band: tuple[float, float] = (0.8, 1.25),
) -> SlowVariationReport:
    """Ratio matrix L(e^(x+y))/L(e^x) for L(z) = dilated functional at z."""
    x_grid = np.asarray(x_grid, dtype=float)
    y_grid = np.asarray(y_grid, dtype=float)
    slo, shi = _phi_support(phi)
    ratios = np.empty((len(x_grid), len(y_grid)))
    lowc = np.zeros_like(ratios, dtype=bool)
    for i, x in enumerate(x_grid):
        base = dilated_functional(m, phi, math.exp(x))
        for j, y in enumerate(y_grid):
            num = dilated_functional(m, phi, math.exp(x + y))
            ratios[i, j] = num / base if base > 0 else np.inf
            z = math.exp(x + y)
            lowc[i, j] = m.count_interval(z * slo, z * shi) < 100
    k_hat = float(np.max(ratios / (1.0 + y_grid[None, :])))
    last = ratios[-1]
    trend = bool(np.all((last >= trend_band[0]) & (last <= trend_band[1])))
    bound = bool(np.all(ratios <= k_hat * (1.0 + y_grid[None, :]) + 1e-12))
    return SlowVariationReport(x_grid, y_grid, ratios, k_hat, trend_band,
                               trend, bound, lowc)


@dataclass
class InvarianceReport:
    tv_distance: float
    max_abs_z: float
    push_samples: int
    dropped_fraction: float     # pushed points that left the covered range

    def as_dict(self) -> dict:
        return {"tv_distance": self.tv_distance, "max_abs_z": self.max_abs_z,
                "push_samples": self.push_samples,
                "dropped_fraction": self.dropped_fraction}


def invariance_residual(m: LogBinnedMeasure, spec: FamilySpec,
                        push_samples: int, seed: int) -> InvarianceReport:
    """Distance between the measure and its one-step push.

    Draws weighted bin representatives, applies freshly sampled maps,
    re-bins, and compares the two normalized bin vectors (total-variation
    distance and the largest per-bin z-score under multinomial error).
    """
    if m.total_steps == 0 or not m.counts[1:-1].any():
        raise ValueError("empty measure")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    inner = m.counts[1:-1].astype(float)
    p = inner / inner.sum()
    picks = rng.multinomial(push_samples, p)
    mids = m.layout.mids()[1:-1]
    points = np.repeat(mids, picks)
    if spec.kernel is not None:
        params = spec.draw_params(rng, len(points))
        stacked = {k: np.ascontiguousarray(v[None, :]) for k, v in params.items()}
        out = np.empty((1, len(points)))
        states = np.ascontiguousarray(spec.state_from_value(points), dtype=float)
        _engine._run_kernel(spec, _backend, states, stacked, out)
        pushed = np.asarray(spec.values_from_states(out[0]))
    else:
        pushed = np.array([float(spec.sample_map(rng).evaluate(v)) for v in points])
    idx = m.layout.index(pushed)
    q = np.bincount(idx, minlength=m.layout.n_bins)[1:-1].astype(float)
    dropped = 1.0 - q.sum() / push_samples
    q = q / max(q.sum(), 1.0)
    tv = 0.5 * float(np.abs(p - q).sum())
    se = np.sqrt(np.maximum(p * (1 - p), 1e-300) / push_samples)
    nz = p + q > 0
    zmax = float(np.max(np.abs(q - p)[nz] / se[nz])) if nz.any() else 0.0
    return InvarianceReport(tv, zmax, push_samples, float(dropped))


@dataclass
class MartingaleBoundReport:
    nu_v: float
    nu_u: float
    p_hat: float
    p_ci: tuple[float, float]
    horizon: int
    chains: int
    margin: float               # nu_v - p_hat * nu_u, in combined-SE units
    passes: bool

    def as_dict(self) -> dict:
        return {"nu_v": self.nu_v, "nu_u": self.nu_u, "p_hat": self.p_hat,
                "p_ci": list(self.p_ci), "horizon": self.horizon,
                "chains": self.chains, "margin_se": self.margin,
                "passes": self.passes}


def martingale_bound_check(
    m: LogBinnedMeasure,
    spec: FamilySpec,
    U: tuple[float, float],
    V: tuple[float, float],
    horizon: int,
    chains: int,
    seed: int,
    threads: int = 1,
    block_len: int = 512,
) -> MartingaleBoundReport:
    """Check nu(V) >= P(T <= horizon) nu(U) - 3 SE.

    The hitting time is for the event that the backward composition maps
    U into V, certified through the affine envelope of the right walk
    (valid for every asymptotically linear family, exact for affine with
    B >= 1); the finite horizon makes the estimate a lower bound.
    """
    if spec.kernel is None:
        raise ValueError("needs a kernel family")
    k1, k2 = U
    m1, m2 = V
    nu_u = m.normalized(k1, k2)
    nu_v = m.normalized(m1, m2)
    if nu_u <= 0:
        raise ValueError("nu(U) must be positive")

    if k1 >= m1 and k2 <= m2:  # identity already maps U into V: T = 0
        hits_total = chains
    else:
        def worker(chain_range):
            lo, hi = chain_range
            n = hi - lo
            rngs = [chain_rng(seed, c) for c in range(lo, hi)]
            aa = np.ones(n)
            bb = np.zeros(n)
            hit = np.full(n, -1, dtype=np.int64)
            dead = np.zeros(n, dtype=np.uint8)
            done = 0
            while done < horizon:
                k = min(block_len, horizon - done)
                per = [spec.draw_params(rng, k) for rng in rngs]
                a_env = np.empty((k, n))
                b_env = np.empty((k, n))
                for i, prm in enumerate(per):
                    ai, bi = spec.envelope_ab(prm)
                    a_env[:, i] = ai
                    b_env[:, i] = bi
                _backend.right_walk_hit_block(
                    aa, bb, np.ascontiguousarray(a_env), np.ascontiguousarray(b_env),
                    float(k1), float(k2), float(m1), float(m2), hit, dead, done)
                done += k
                if (dead | (hit >= 0)).all():
                    # remaining draws are never inspected; skipping them is
                    # safe because each chain owns its stream
                    break
            return int((hit >= 0).sum())

        parts = _engine.parallel_chunks(worker, chains, threads)
        hits_total = sum(parts)

    from .affine import wilson_interval
    p_hat = hits_total / chains
    ci = wilson_interval(hits_total, chains)
    se_p = (ci[1] - ci[0]) / (2 * 1.959963984540054)
    # crude multinomial-style errors on the measure ratios
    rc = m.ref_count
    cu, cv = m.count_interval(k1, k2), m.count_interval(m1, m2)
    se_u = nu_u * math.sqrt(1.0 / max(cu, 1.0) + 1.0 / max(rc, 1.0))
    se_v = nu_v * math.sqrt(1.0 / max(cv, 1.0) + 1.0 / max(rc, 1.0))
    se_comb = math.sqrt(se_v ** 2 + (nu_u * se_p) ** 2 + (p_hat * se_u) ** 2)
    margin = nu_v - p_hat * nu_u
    passes = margin >= -3.0 * se_comb
    return MartingaleBoundReport(nu_v, nu_u, p_hat, ci, horizon, chains,
                                 margin / se_comb if se_comb > 0 else math.inf, passes)
