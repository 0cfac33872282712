"""Ladder-epoch machinery for the centered driving walk.

Conventions are fixed once: ascending epochs are weak (S_n >= previous
record), descending epochs are strict (S_n < previous record), and the
Poisson equation is written conv(f) = f + g.  The first ladder epochs
are a.s. finite with infinite mean, so every Monte Carlo estimate here
carries a horizon and a censoring fraction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .maps import Dist
from .rng import chain_rng

__all__ = [
    "StepLaw",
    "LadderStats",
    "ladder_decompose",
    "LadderMeans",
    "estimate_ladder_means",
    "ladder_means_two_point_exact",
    "WienerHopfReport",
    "wiener_hopf_check",
    "f_phi_eval",
    "convolve",
    "poisson_residual",
    "PoissonLimitReport",
    "poisson_limit_check",
    "DualityReport",
    "duality_R_check",
    "QuadratureError",
    "ks_two_sample_pvalue",
]


class QuadratureError(RuntimeError):
    """Grid refinement failed to converge."""


@dataclass(frozen=True)
class StepLaw:
    """The centered step distribution with optional analytic structure."""

    dist: Dist
    sigma2: float
    density: Optional[Callable] = None
    density_range: tuple[float, float] = (-12.0, 12.0)
    atoms: Optional[tuple] = None    # ((value, prob), ...) for exact convolution

    @staticmethod
    def normal(sigma: float = 1.0) -> "StepLaw":
        s2 = sigma * sigma

        def rho(y):
            return np.exp(-np.asarray(y, float) ** 2 / (2 * s2)) / math.sqrt(2 * math.pi * s2)

        return StepLaw(Dist.normal(0.0, sigma), s2, rho, (-12 * sigma, 12 * sigma))

    @staticmethod
    def two_point(a: float, p_a: float) -> "StepLaw":
        """+a w.p. p_a, -b otherwise, with b chosen so the mean is zero."""
        if not (0 < p_a < 1 and a > 0):
            raise ValueError("need a > 0 and 0 < p_a < 1")
        b = a * p_a / (1 - p_a)
        s2 = p_a * a * a + (1 - p_a) * b * b
        return StepLaw(Dist.two_point(a, p_a, -b), s2,
                       atoms=((a, p_a), (-b, 1 - p_a)))

    @staticmethod
    def uniform_sym(w: float) -> "StepLaw":
        def rho(y):
            return (np.abs(np.asarray(y, float)) <= w) / (2 * w)

        return StepLaw(Dist.uniform(-w, w), w * w / 3.0, rho, (-w, w))

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return self.dist.sample(rng, size)

    def check_centered(self, tol: float = 1e-9):
        m = self.dist.mean()
        if m is not None and abs(m) > tol:
            raise ValueError(f"step law is not centered (mean {m:g})")


# ---------------------------------------------------------------------------
# ladder decomposition

@dataclass
class LadderStats:
    """Weak-ascending / strict-descending ladder structure of one path."""

    s: np.ndarray          # partial sums S_1..S_n
    t_epochs: np.ndarray   # n with S_n >= running record (record starts at 0)
    t_heights: np.ndarray
    l_epochs: np.ndarray   # n with S_n < running minimum
    l_heights: np.ndarray

    def height_increment_summary(self, which: str = "t") -> dict:
        """Mean and 95% CI of the i.i.d. ladder height increments."""
        h = self.t_heights if which == "t" else self.l_heights
        if len(h) == 0:
            return {"mean": math.nan, "ci_half": math.nan, "count": 0}
        inc = np.diff(h, prepend=0.0)
        se = inc.std(ddof=1) / math.sqrt(len(inc)) if len(inc) > 1 else math.nan
        return {"mean": float(inc.mean()), "ci_half": 1.959963984540054 * se,
                "count": int(len(inc))}

    def epoch_gap_tail(self, which: str = "t") -> dict:
        e = self.t_epochs if which == "t" else self.l_epochs
        if len(e) < 2:
            return {"median_gap": math.nan, "max_gap": math.nan}
        gaps = np.diff(e)
        return {"median_gap": float(np.median(gaps)), "max_gap": int(gaps.max())}


def ladder_decompose(increments: Sequence[float]) -> LadderStats:
    """Epochs and heights; t uses >= against the record, l uses < strictly."""
    inc = np.asarray(increments, dtype=float)
    s = np.cumsum(inc)
    prev_max = np.maximum.accumulate(np.concatenate([[0.0], s]))[:-1]
    prev_min = np.minimum.accumulate(np.concatenate([[0.0], s]))[:-1]
    t_idx = np.nonzero(s >= prev_max)[0]
    l_idx = np.nonzero(s < prev_min)[0]
    return LadderStats(s, t_idx + 1, s[t_idx], l_idx + 1, s[l_idx])


# ---------------------------------------------------------------------------
# first-passage Monte Carlo

def _first_passages(law: StepLaw, chains: int, horizon: int, seed: int,
                    block: int = 256):
    """First weak-ascending and strict-descending passages per chain.

    Returns (s_t, n_t, s_l, n_l); epochs are -1 where censored at the
    horizon.  Each chain scans its own stream in blocks, stopping once
    both passages are found.
    """
    s_t = np.full(chains, np.nan)
    n_t = np.full(chains, -1, dtype=np.int64)
    s_l = np.full(chains, np.nan)
    n_l = np.full(chains, -1, dtype=np.int64)
    for c in range(chains):
        rng = chain_rng(seed, c)
        s0 = 0.0
        done = 0
        need_t, need_l = True, True
        while done < horizon and (need_t or need_l):
            k = min(block, horizon - done)
            s = s0 + np.cumsum(law.sample(rng, k))
            if need_t:
                up = np.nonzero(s >= 0.0)[0]
                if len(up):
                    n_t[c] = done + up[0] + 1
                    s_t[c] = s[up[0]]
                    need_t = False
            if need_l:
                dn = np.nonzero(s < 0.0)[0]
                if len(dn):
                    n_l[c] = done + dn[0] + 1
                    s_l[c] = s[dn[0]]
                    need_l = False
            s0 = s[-1]
            done += k
    return s_t, n_t, s_l, n_l


@dataclass
class LadderMeans:
    mean_s_t: float
    ci_s_t: float
    censored_t: float
    mean_s_l: float
    ci_s_l: float
    censored_l: float
    chains: int
    horizon: int

    @property
    def bias_warning(self) -> bool:
        return max(self.censored_t, self.censored_l) > 0.01

    def as_dict(self) -> dict:
        return {"mean_s_t": self.mean_s_t, "ci_s_t": self.ci_s_t,
                "censored_t": self.censored_t, "mean_s_l": self.mean_s_l,
                "ci_s_l": self.ci_s_l, "censored_l": self.censored_l,
                "chains": self.chains, "horizon": self.horizon,
                "bias_warning": self.bias_warning}


def estimate_ladder_means(law: StepLaw, chains: int, horizon: int = 1_000_000,
                          seed: int = 0) -> LadderMeans:
    """Sample means of the first ladder heights over uncensored chains."""
    if law.sigma2 <= 0:
        raise ValueError("degenerate step law")
    law.check_centered()
    s_t, n_t, s_l, n_l = _first_passages(law, chains, horizon, seed)
    ok_t = n_t >= 0
    ok_l = n_l >= 0
    z = 1.959963984540054

    def mean_ci(v):
        if v.sum() == 0:
            return math.nan, math.nan
        vals = (s_t if v is ok_t else s_l)[v]
        se = vals.std(ddof=1) / math.sqrt(len(vals)) if len(vals) > 1 else math.nan
        return float(vals.mean()), z * se

    m_t, ci_t = mean_ci(ok_t)
    m_l, ci_l = mean_ci(ok_l)
    return LadderMeans(m_t, ci_t, float(1 - ok_t.mean()), m_l, ci_l,
                       float(1 - ok_l.mean()), chains, horizon)


def ladder_means_two_point_exact(law: StepLaw, depth: int = 20_000) -> tuple[float, float]:
    """(E[S_t], E[S_l]) for a two-point law by lattice enumeration.

    Propagates the exact sub-probability mass of unabsorbed paths on the
    step lattice and removes the heavy first-passage tail (~ n^(-1/2)) by
    Richardson extrapolation between depth and depth/2.
    """
    if law.atoms is None or len(law.atoms) != 2:
        raise ValueError("exact enumeration needs a two-point law")
    (a, pa), (mb, pb) = law.atoms
    b = -mb
    fa, fb = Fraction(a).limit_denominator(10**6), Fraction(b).limit_denominator(10**6)
    unit = Fraction(math.gcd(fa.numerator * fb.denominator, fb.numerator * fa.denominator),
                    fa.denominator * fb.denominator)
    ka, kb = int(fa / unit), int(fb / unit)
    h = float(unit)

    def run(absorb_up: bool) -> np.ndarray:
        # mass vector over surviving lattice states (offset-indexed)
        span = depth * max(ka, kb) + ka + kb + 2
        mass = np.zeros(2 * span + 1)
        mass[span] = 1.0  # S_0 = 0... first step happens below
        absorbed = np.zeros(depth + 1)
        at_depth = {}
        for n in range(1, depth + 1):
            new = np.zeros_like(mass)
            new[ka:] += pa * mass[:-ka]
            new[:-kb] += pb * mass[kb:]
            if absorb_up:
                # t: absorb at S >= 0, survivors strictly negative
                hit = new[span:].copy()
                new[span:] = 0.0
                absorbed[n] = float((hit * (np.arange(len(hit)) * h)).sum())
            else:
                # l: absorb at S < 0, survivors >= 0
                hit = new[:span].copy()
                new[:span] = 0.0
                absorbed[n] = float((hit * ((np.arange(span) - span) * h)).sum())
            mass = new
            if n in (depth // 2, depth):
                at_depth[n] = absorbed[: n + 1].sum()
        e_half, e_full = at_depth[depth // 2], at_depth[depth]
        # remove the c * n^(-1/2) censoring tail
        return e_full + (e_full - e_half) / (math.sqrt(2.0) - 1.0)

    return float(run(True)), float(run(False))


@dataclass
class WienerHopfReport:
    """Ladder-height product against the step variance (informational:
    the magnitude and sign depend on the weak/strict conventions, so the
    ratio is recorded rather than asserted)."""

    mean_s_t: float
    mean_s_l: float
    product: float
    sigma2: float
    ratio: float
    ratio_ci: tuple[float, float]
    censoring: tuple[float, float]

    def as_dict(self) -> dict:
        return {"mean_s_t": self.mean_s_t, "mean_s_l": self.mean_s_l,
                "product": self.product, "sigma2": self.sigma2,
                "ratio": self.ratio, "ratio_ci": list(self.ratio_ci),
                "censoring": list(self.censoring)}


def wiener_hopf_check(law: StepLaw, chains: int = 100_000,
                      horizon: int = 1_000_000, seed: int = 0) -> WienerHopfReport:
    lm = estimate_ladder_means(law, chains, horizon, seed)
    prod = lm.mean_s_t * lm.mean_s_l
    ratio = prod / law.sigma2
    # first-order error propagation on the product
    rel = math.sqrt((lm.ci_s_t / abs(lm.mean_s_t)) ** 2 +
                    (lm.ci_s_l / abs(lm.mean_s_l)) ** 2) if lm.mean_s_t and lm.mean_s_l else math.nan
    return WienerHopfReport(lm.mean_s_t, lm.mean_s_l, prod, law.sigma2, ratio,
                            (ratio * (1 - rel), ratio * (1 + rel)),
                            (lm.censored_t, lm.censored_l))


# ---------------------------------------------------------------------------
# the Poisson equation

def f_phi_eval(m, phi, v0: float, x: float) -> float:
    """Quadrature of phi(e^(-x) (u - v0)) against a binned measure.

    v0 = 0 recovers the dilated functional at z = e^x.
    """
    from .measure import CoverageError
    slo, shi = phi.support
    z = math.exp(x)
    lo, hi = z * slo + v0, z * shi + v0
    if hi > m.layout.x_max or lo < -m.layout.x_max:
        raise CoverageError(f"window [{lo:g}, {hi:g}] outside coverage")
    mids = m.layout.mids()[1:-1]
    w = np.asarray(phi((mids - v0) / z), dtype=float)
    return float((m.counts[1:-1] * w).sum() / m.ref_count)


def _simpson(fn, lo: float, hi: float, n: int) -> float:
    xs = np.linspace(lo, hi, 2 * n + 1)
    ys = np.asarray(fn(xs), dtype=float)
    h = (hi - lo) / (2 * n)
    return float(h / 3 * (ys[0] + ys[-1] + 4 * ys[1:-1:2].sum() + 2 * ys[2:-1:2].sum()))


def _simpson_refined(fn, lo: float, hi: float, tol: float, n0: int = 64,
                     max_doublings: int = 14) -> float:
    prev = _simpson(fn, lo, hi, n0)
    n = n0
    for _ in range(max_doublings):
        n *= 2
        cur = _simpson(fn, lo, hi, n)
        if abs(cur - prev) <= tol * (1.0 + abs(cur)):
            return cur
        prev = cur
    raise QuadratureError(f"Simpson refinement did not converge on [{lo}, {hi}]")


def convolve(f: Callable, law: StepLaw, x: float, tol: float = 1e-9,
             mc_budget: int = 200_000, seed: int = 0) -> float:
    """(law * f)(x) = E[f(x + Y)], by atoms, quadrature, or Monte Carlo."""
    if law.atoms is not None:
        return float(sum(p * float(f(x + v)) for v, p in law.atoms))
    if law.density is not None:
        lo, hi = law.density_range

        def integrand(y):
            return np.asarray(f(x + y), dtype=float) * law.density(y)

        return _simpson_refined(integrand, lo, hi, tol)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    return float(np.mean(np.asarray(f(x + law.sample(rng, mc_budget)), dtype=float)))


def poisson_residual(f: Callable, law: StepLaw, x: float, tol: float = 1e-9,
                     seed: int = 0) -> float:
    """g(x) = (law * f)(x) - f(x), the Poisson-equation residual."""
    return convolve(f, law, x, tol=tol, seed=seed) - float(f(x))


def _antiderivative(f: Callable, lo: float, hi: float, n: int = 400_001):
    xs = np.linspace(lo, hi, n)
    ys = np.asarray(f(xs), dtype=float)
    F = np.concatenate([[0.0], np.cumsum((ys[1:] + ys[:-1]) / 2 * np.diff(xs))])

    def eval_F(v):
        return np.interp(v, xs, F)

    return eval_F


def _simpson_weights(n_points: int, h: float) -> np.ndarray:
    if n_points % 2 == 0:
        raise ValueError("Simpson needs an odd point count")
    w = np.ones(n_points)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * h / 3.0


def _convolution_on_grid(f: Callable, law: StepLaw, xs: np.ndarray,
                         n_y: int) -> np.ndarray:
    """(law * f)(x) for a whole grid at once."""
    if law.atoms is not None:
        out = np.zeros_like(xs)
        for v, p in law.atoms:
            out += p * np.asarray(f(xs + v), dtype=float)
        return out
    if law.density is None:
        raise QuadratureError("grid convolution needs atoms or a density")
    lo, hi = law.density_range
    ys = np.linspace(lo, hi, 2 * n_y + 1)
    w = _simpson_weights(len(ys), (hi - lo) / (2 * n_y)) * law.density(ys)
    out = np.empty(len(xs))
    chunk = max(1, 4_000_000 // len(ys))
    for i in range(0, len(xs), chunk):
        blk = xs[i:i + chunk]
        out[i:i + chunk] = np.asarray(f(blk[:, None] + ys[None, :]), dtype=float) @ w
    return out


def _g_integrals(f: Callable, law: StepLaw, glo: float, ghi: float,
                 tol: float, n_x: int = 8193, n_y: int = 2048):
    """(int g, int x g(x) dx) with a doubling-based error estimate."""
    xs = np.linspace(glo, ghi, n_x)
    fx = np.asarray(f(xs), dtype=float)
    wx = _simpson_weights(n_x, (ghi - glo) / (n_x - 1))
    res = []
    for ny in (n_y, 2 * n_y):
        g = _convolution_on_grid(f, law, xs, ny) - fx
        res.append((float(wx @ g), float(wx @ (xs * g)), g))
    (i1, xi1, _), (i2, xi2, g) = res
    err = max(abs(i1 - i2), abs(xi1 - xi2))
    scale = 1.0 + abs(i2) + abs(xi2)
    if err > max(tol * scale, 1e-9 * scale):
        raise QuadratureError(
            f"convolution grid not converged (delta {err:.3g} on [{glo}, {ghi}])")
    g_edge = max(abs(g[0]), abs(g[-1]))
    return i2, xi2, g_edge


@dataclass
class PoissonLimitReport:
    x_grid: np.ndarray
    left_noncentered: np.ndarray      # MC of E[f(x + S_t)] - f(x)
    left_se: np.ndarray
    right_noncentered: float          # -(1/E[S_l]) integral of g
    int_g: float
    left_integrated: np.ndarray       # MC of E[ integral_x^(x+S_t) f ]
    left_integrated_se: np.ndarray
    right_integrated: float           # (1/E[S_l]) integral of x g(x)
    int_g_zero: bool
    mean_s_l: float
    censored_t: float
    f_growth_ok: bool
    g_tail_decay: float
    pass_noncentered: bool

    def as_dict(self) -> dict:
        return {"x_grid": list(map(float, self.x_grid)),
                "left_noncentered": list(map(float, self.left_noncentered)),
                "left_se": list(map(float, self.left_se)),
                "right_noncentered": self.right_noncentered,
                "int_g": self.int_g,
                "left_integrated": list(map(float, self.left_integrated)),
                "right_integrated": self.right_integrated,
                "int_g_zero": self.int_g_zero, "mean_s_l": self.mean_s_l,
                "censored_t": self.censored_t, "f_growth_ok": self.f_growth_ok,
                "g_tail_decay": self.g_tail_decay,
                "pass_noncentered": self.pass_noncentered}


def poisson_limit_check(
    f: Callable,
    law: StepLaw,
    x_grid: Sequence[float],
    chains: int = 20_000,
    horizon: int = 1_000_000,
    seed: int = 0,
    g_range: tuple[float, float] = (-60.0, 60.0),
    quad_tol: float = 1e-8,
) -> PoissonLimitReport:
    """Monte Carlo left sides of the two renewal limits against the
    quadrature right sides.

    Audits the growth condition 0 <= f <= C (1 + x+) on a grid and the
    tail decay of |g| at the integration boundary before trusting the
    quadratures.
    """
    x_grid = np.asarray(x_grid, dtype=float)
    law.check_centered()
    s_t, n_t, s_l, n_l = _first_passages(law, chains, horizon, seed)
    ok = n_t >= 0
    censored_t = float(1 - ok.mean())
    st = s_t[ok]
    z = 1.959963984540054

    # growth audit: f >= 0 and f <= C (1 + x+) with a stable C
    aud = np.linspace(-50, max(50, x_grid.max() + 50), 2001)
    fa = np.asarray(f(aud), dtype=float)
    c_hat = float((fa / (1.0 + np.maximum(aud, 0.0))).max())
    f_ok = bool((fa >= -1e-12).all() and math.isfinite(c_hat))

    glo, ghi = g_range
    int_g, int_xg, g_edge = _g_integrals(f, law, glo, ghi, quad_tol)

    okl = n_l >= 0
    mean_s_l = float(s_l[okl].mean())

    left = np.empty(len(x_grid))
    left_se = np.empty(len(x_grid))
    lint = np.empty(len(x_grid))
    lint_se = np.empty(len(x_grid))
    F = _antiderivative(f, float(x_grid.min() - 1), float(x_grid.max() + st.max() + 1))
    for i, xv in enumerate(x_grid):
        vals = np.asarray(f(xv + st), dtype=float) - float(f(xv))
        left[i] = vals.mean()
        left_se[i] = vals.std(ddof=1) / math.sqrt(len(vals))
        iv = F(xv + st) - F(xv)
        lint[i] = iv.mean()
        lint_se[i] = iv.std(ddof=1) / math.sqrt(len(iv))

    right = -int_g / mean_s_l
    right_int = int_xg / mean_s_l
    # combined error at the largest x: MC SE plus quadrature tolerance
    se_comb = math.sqrt(left_se[-1] ** 2 + (quad_tol * (1 + abs(int_g))) ** 2)
    passes = abs(left[-1] - right) <= 3.0 * max(se_comb, 1e-12)
    return PoissonLimitReport(
        x_grid, left, left_se, right, int_g, lint, lint_se, right_int,
        abs(int_g) <= 1e-6 * (1 + abs(int_xg)), mean_s_l, censored_t, f_ok,
        float(g_edge), passes)


@dataclass
class DualityReport:
    lhs: float            # sum over k of E[g(x + S_(l_k))]
    lhs_se: float
    rhs: float            # E[sum_(n < t) g(x + S_n)]
    rhs_se: float
    k_used_max: int
    truncation_leak: float
    agree_3se: bool

    def as_dict(self) -> dict:
        return {"lhs": self.lhs, "lhs_se": self.lhs_se, "rhs": self.rhs,
                "rhs_se": self.rhs_se, "k_used_max": self.k_used_max,
                "truncation_leak": self.truncation_leak,
                "agree_3se": self.agree_3se}


def duality_R_check(
    g,
    law: StepLaw,
    x: float,
    chains: int = 20_000,
    k_max: int = 64,
    horizon: int = 200_000,
    seed: int = 0,
) -> DualityReport:
    """Two estimators of the same renewal sum.

    LHS walks the strict-descending ladder heights until they exit the
    support of g (or k_max); RHS accumulates g along the path strictly
    before the first weak-ascending epoch.  g must be compactly
    supported.
    """
    glo, ghi = g.support
    lhs_vals = np.zeros(chains)
    rhs_vals = np.zeros(chains)
    leaks = 0
    kmax_seen = 0
    block = 256
    for c in range(chains):
        # ladder-height route: walk the strict descending records until
        # they leave supp(g) from below
        rng = chain_rng(seed, c)
        lhs = float(g(x))  # k = 0 term: S_(l_0) = 0
        record = 0.0
        s0 = 0.0
        k_used = 0
        steps = 0
        while k_used < k_max and steps < horizon and x + record >= glo:
            s = s0 + np.cumsum(law.sample(rng, block))
            running = np.minimum.accumulate(np.minimum(s, record))
            is_rec = s < np.concatenate([[record], running[:-1]])
            heights = s[is_rec]
            for hgt in heights:  # few per block
                k_used += 1
                if x + hgt >= glo:
                    lhs += float(g(x + hgt))
                if k_used >= k_max:
                    break
            record = float(running[-1])
            s0 = float(s[-1])
            steps += block
        if x + record >= glo:
            leaks += 1
        kmax_seen = max(kmax_seen, k_used)
        lhs_vals[c] = lhs

        # pre-ascent route: accumulate g along the path strictly before
        # the first weak ascending epoch
        rng2 = chain_rng(seed, c, stream=1)
        rhs = float(g(x))  # n = 0 term
        s0 = 0.0
        steps = 0
        while steps < horizon:
            s = s0 + np.cumsum(law.sample(rng2, block))
            up = np.nonzero(s >= 0.0)[0]
            stop = up[0] if len(up) else block
            if stop:
                rhs += float(np.asarray(g(x + s[:stop]), dtype=float).sum())
            if len(up):
                break
            s0 = float(s[-1])
            steps += block
        rhs_vals[c] = rhs

    lhs_se = lhs_vals.std(ddof=1) / math.sqrt(chains)
    rhs_se = rhs_vals.std(ddof=1) / math.sqrt(chains)
    diff = abs(lhs_vals.mean() - rhs_vals.mean())
    se = math.sqrt(lhs_se**2 + rhs_se**2)
    return DualityReport(float(lhs_vals.mean()), float(lhs_se),
                         float(rhs_vals.mean()), float(rhs_se), kmax_seen,
                         leaks / chains, bool(diff <= 3 * se))


def ks_two_sample_pvalue(a: np.ndarray, b: np.ndarray) -> float:
    """Asymptotic two-sample Kolmogorov-Smirnov p-value."""
    a = np.sort(np.asarray(a, float))
    b = np.sort(np.asarray(b, float))
    allv = np.concatenate([a, b])
    ca = np.searchsorted(a, allv, side="right") / len(a)
    cb = np.searchsorted(b, allv, side="right") / len(b)
    d = float(np.abs(ca - cb).max())
    ne = len(a) * len(b) / (len(a) + len(b))
    lam = (math.sqrt(ne) + 0.12 + 0.11 / math.sqrt(ne)) * d
    s = 0.0
    for j in range(1, 101):
        s += 2 * (-1) ** (j - 1) * math.exp(-2 * j * j * lam * lam)
    return max(0.0, min(1.0, s))
